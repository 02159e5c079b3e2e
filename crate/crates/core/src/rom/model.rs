use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RomConfig, RomKind, QOI_COUNT};
use super::network::{forward, init_params, scalar_heads};
use crate::campaign::Scaler;
use crate::diff::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::heat_source::{ParamBounds, ProcessParams, PARAM_COUNT};
use crate::jsonl;

pub const MODEL_FORMAT_VERSION: u32 = 1;

const EVAL_CHUNK: usize = 64;

/// A network plus everything needed to map physical inputs to physical QoIs.
///
/// The DNN predicts the two maxima directly. DeepONet and FNO predict both
/// series; their maxima are read out with [`scalar_heads`].
#[derive(Debug, Clone, PartialEq)]
pub struct RomModel {
    pub config: RomConfig,
    /// Series length the model was trained on.
    pub steps: usize,
    pub bounds: ParamBounds,
    /// Maxima scaler for the DNN, pooled series scaler for operator models.
    pub output_scaler: Scaler,
    pub weights: Vec<Tensor>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: RomConfig,
    steps: usize,
    bounds: ParamBounds,
    output_scaler: Scaler,
    weight_count: usize,
}

impl RomModel {
    /// Freshly initialised model.
    pub fn new(config: RomConfig, steps: usize, bounds: ParamBounds, output_scaler: Scaler, seed: u64) -> Result<Self> {
        config.validate()?;
        let weights = init_params(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_weights(config, steps, bounds, output_scaler, weights)
    }

    pub fn from_weights(
        config: RomConfig,
        steps: usize,
        bounds: ParamBounds,
        output_scaler: Scaler,
        weights: Vec<Tensor>,
    ) -> Result<Self> {
        config.validate()?;
        bounds.validate()?;
        let shapes = config.param_shapes();
        if weights.len() != shapes.len() || weights.iter().zip(&shapes).any(|(w, s)| w.shape() != s.as_slice()) {
            return Err(Error::shape("rom weights", "weights do not match the configured layout"));
        }
        if output_scaler.channels() != QOI_COUNT {
            return Err(Error::invalid(format!("output scaler needs {QOI_COUNT} channels")));
        }
        if config.is_operator() && steps == 0 {
            return Err(Error::invalid("operator model needs steps >= 1"));
        }
        Ok(Self {
            config,
            steps,
            bounds,
            output_scaler,
            weights,
        })
    }

    pub fn kind(&self) -> RomKind {
        self.config.kind()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Tensor::len).sum()
    }

    /// Unscaled network output for unit-cube inputs (see [`forward`] for layout).
    pub fn raw_forward(&self, unit: &[[f64; PARAM_COUNT]], steps: usize) -> Result<Tensor> {
        let cols = QOI_COUNT;
        let per_sample = if self.config.is_operator() { steps } else { 1 };
        let mut out = Vec::with_capacity(unit.len() * per_sample * cols);
        for chunk in unit.chunks(EVAL_CHUNK) {
            let x = Tensor::new(vec![chunk.len(), PARAM_COUNT], chunk.iter().flatten().copied().collect())?;
            let mut tape = Tape::new();
            let params: Vec<_> = self.weights.iter().map(|w| tape.constant(w.clone())).collect();
            let y = forward(&mut tape, &self.config, &params, &x, steps)?;
            out.extend_from_slice(tape.value(y).data());
        }
        Tensor::new(vec![unit.len() * per_sample, cols], out)
    }

    pub fn to_unit(&self, params: &[ProcessParams]) -> Vec<[f64; PARAM_COUNT]> {
        params.iter().map(|p| self.bounds.to_unit(p)).collect()
    }

    /// Physical series `[v_bead, t_mp]` per sample; operator models only.
    pub fn predict_series(&self, params: &[ProcessParams], steps: usize) -> Result<Vec<[Vec<f64>; QOI_COUNT]>> {
        if !self.config.is_operator() {
            return Err(Error::invalid("the dnn predicts maxima only, not series"));
        }
        let raw = self.raw_forward(&self.to_unit(params), steps)?;
        Ok(raw
            .data()
            .chunks(steps * QOI_COUNT)
            .map(|sample| {
                std::array::from_fn(|q| {
                    sample
                        .chunks(QOI_COUNT)
                        .map(|row| self.output_scaler.inverse(q, row[q]))
                        .collect()
                })
            })
            .collect())
    }

    /// Physical `(max v_bead, max t_mp)` per sample.
    pub fn predict_scalar(&self, params: &[ProcessParams]) -> Result<Vec<[f64; QOI_COUNT]>> {
        self.predict_scalar_unit(&self.to_unit(params))
    }

    pub fn predict_scalar_unit(&self, unit: &[[f64; PARAM_COUNT]]) -> Result<Vec<[f64; QOI_COUNT]>> {
        let raw = self.raw_forward(unit, self.steps)?;
        let scaled = if self.config.is_operator() {
            // the inverse scaling is increasing, so max commutes with it
            scalar_heads(&raw, self.steps)?
        } else {
            raw.data().chunks(QOI_COUNT).map(|r| [r[0], r[1]]).collect()
        };
        Ok(scaled
            .into_iter()
            .map(|r| std::array::from_fn(|q| self.output_scaler.inverse(q, r[q])))
            .collect())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let header = Header {
            format_version: MODEL_FORMAT_VERSION,
            config: self.config.clone(),
            steps: self.steps,
            bounds: self.bounds,
            output_scaler: self.output_scaler.clone(),
            weight_count: self.param_count(),
        };
        let flat: Vec<f64> = self.weights.iter().flat_map(|w| w.data().iter().copied()).collect();
        Ok(format!("{}\n{}\n", jsonl::to_line(&header)?, jsonl::to_line(&flat)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_file(path, &self.to_jsonl()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &jsonl::read_file(path)?)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (n0, first) = lines.next().ok_or_else(|| Error::format(path, "empty model file"))?;
        let header: Header = jsonl::from_line(path, n0, first)?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::format(path, format!("model format {} unsupported", header.format_version)));
        }
        let (n1, second) = lines.next().ok_or_else(|| Error::format(path, "missing weight line"))?;
        let flat: Vec<f64> = jsonl::from_line(path, n1, second)?;
        if lines.next().is_some() {
            return Err(Error::format(path, "trailing content after weights"));
        }
        let shapes = header.config.param_shapes();
        let expected: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
        if flat.len() != expected || header.weight_count != expected {
            return Err(Error::format(
                path,
                format!("config implies {expected} weights, file has {} (header {})", flat.len(), header.weight_count),
            ));
        }
        let mut weights = Vec::with_capacity(shapes.len());
        let mut offset = 0;
        for shape in shapes {
            let n: usize = shape.iter().product();
            weights.push(Tensor::new(shape, flat[offset..offset + n].to_vec())?);
            offset += n;
        }
        Self::from_weights(header.config, header.steps, header.bounds, header.output_scaler, weights)
            .map_err(|e| Error::format(path, e.to_string()))
    }
}
