//! Training loops, evaluation metrics and the hyperparameter grid harness.

mod metrics;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use metrics::{
    five_number, isotonic_fit, monotonic_violation, quantile_sorted, r2, rel_err, rel_l2, rmse, FiveNumber, REL_ERR_FLOOR,
};
pub use report::{evaluate, grid_search, validation_rmse, EvalReport, QoiReport, SearchEntry, SeriesStats};

use crate::campaign::Dataset;
use crate::diff::{adam_step, AdamState, Tape, Tensor};
use crate::error::{Error, Result};
use crate::heat_source::PARAM_COUNT;
use crate::rom::{forward, RomConfig, RomKind, RomModel, QOI_COUNT};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Mae,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub loss: LossKind,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// Epochs without improvement before the learning rate is halved; 0 disables.
    #[serde(default)]
    pub plateau: usize,
}

impl TrainConfig {
    /// Defaults per architecture, sized for a single CPU core.
    pub fn for_kind(kind: RomKind, seed: u64) -> Self {
        match kind {
            RomKind::Dnn => Self {
                epochs: 2000,
                batch_size: 32,
                lr: 1e-3,
                seed,
                loss: LossKind::Mse,
                patience: 300,
                plateau: 100,
            },
            RomKind::DeepOnet => Self {
                epochs: 600,
                batch_size: 32,
                lr: 1e-3,
                seed,
                loss: LossKind::Mse,
                patience: 150,
                plateau: 50,
            },
            RomKind::Fno => Self {
                epochs: 300,
                batch_size: 8,
                lr: 2e-3,
                seed,
                loss: LossKind::Mae,
                patience: 40,
                plateau: 15,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be >= 1"));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::invalid(format!("learning rate must be finite and >= 0, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights restored to the best validation epoch.
    pub model: RomModel,
    pub curve: Vec<EpochLoss>,
    pub best_epoch: usize,
    pub training_time_s: f64,
}

/// Untrained model wired to the dataset's bounds and the matching output scaler.
pub fn new_model(config: RomConfig, ds: &Dataset, seed: u64) -> Result<RomModel> {
    let scaler = if config.is_operator() {
        ds.scalers.series.clone()
    } else {
        ds.scalers.scalar.clone()
    };
    RomModel::new(config, ds.steps(), ds.bounds, scaler, seeds::derive(seed, seeds::stream::INIT))
}

/// Inputs and scaled targets of a set of records, in the model's output layout.
pub(crate) struct Prepared {
    pub x: Vec<[f64; PARAM_COUNT]>,
    /// `rows` rows of `QOI_COUNT` values per sample.
    pub y: Vec<f64>,
    pub rows: usize,
}

impl Prepared {
    pub fn new(model: &RomModel, ds: &Dataset, idx: &[usize]) -> Self {
        let s = &model.output_scaler;
        let x = idx.iter().map(|&i| ds.unit_inputs(i)).collect();
        let mut y = Vec::new();
        let rows = if model.config.is_operator() {
            for &i in idx {
                let r = &ds.records[i];
                for t in 0..ds.steps() {
                    y.push(s.transform(0, r.v_bead[t]));
                    y.push(s.transform(1, r.t_mp[t]));
                }
            }
            ds.steps()
        } else {
            for &i in idx {
                let m = ds.scalar_truth(i);
                y.extend((0..QOI_COUNT).map(|q| s.transform(q, m[q])));
            }
            1
        };
        Self { x, y, rows }
    }

    fn batch(&self, members: &[usize]) -> Result<(Tensor, Tensor)> {
        let x = Tensor::new(
            vec![members.len(), PARAM_COUNT],
            members.iter().flat_map(|&m| self.x[m]).collect(),
        )?;
        let width = self.rows * QOI_COUNT;
        let y = Tensor::new(
            vec![members.len() * self.rows, QOI_COUNT],
            members.iter().flat_map(|&m| self.y[m * width..(m + 1) * width].iter().copied()).collect(),
        )?;
        Ok((x, y))
    }
}

fn loss_value(kind: LossKind, pred: &[f64], target: &[f64]) -> f64 {
    let n = pred.len() as f64;
    match kind {
        LossKind::Mse => pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n,
        LossKind::Mae => pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / n,
    }
}

fn as_divergence(err: Error, epoch: usize) -> Error {
    match err {
        Error::NonFinite(_) => Error::Divergence { epoch, loss: f64::NAN },
        other => other,
    }
}

/// Loss of `model` over a prepared set, without recording gradients.
pub(crate) fn dataset_loss(model: &RomModel, data: &Prepared, kind: LossKind) -> Result<f64> {
    let pred = model.raw_forward(&data.x, data.rows)?;
    Ok(loss_value(kind, pred.data(), &data.y))
}

/// Mini-batch Adam on the training split with early stopping on the validation loss.
pub fn train(model: RomModel, ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if ds.split.train.is_empty() || ds.split.val.is_empty() {
        return Err(Error::invalid("training needs non-empty train and validation splits"));
    }
    let started = Instant::now();
    let train_set = Prepared::new(&model, ds, &ds.split.train);
    let val_set = Prepared::new(&model, ds, &ds.split.val);

    let mut model = model;
    let mut adam = AdamState::new(&model.weights, cfg.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, seeds::stream::SHUFFLE));
    let mut order: Vec<usize> = (0..train_set.x.len()).collect();

    let mut best = (f64::INFINITY, 0usize, model.weights.clone());
    let mut last_decay = 0;
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for members in order.chunks(cfg.batch_size) {
            let (x, y) = train_set.batch(members)?;
            let mut tape = Tape::new();
            let params: Vec<_> = model.weights.iter().map(|w| tape.param(w.clone())).collect();
            let step = (|| -> Result<(f64, Vec<Tensor>)> {
                let pred = forward(&mut tape, &model.config, &params, &x, train_set.rows)?;
                let target = tape.constant(y);
                let loss = match cfg.loss {
                    LossKind::Mse => tape.mse(pred, target)?,
                    LossKind::Mae => tape.mae(pred, target)?,
                };
                let value = tape.value(loss).data()[0];
                let mut grads = tape.backward(loss)?;
                Ok((value, params.iter().map(|&p| grads.take(p)).collect()))
            })();
            let (value, grads) = step.map_err(|e| as_divergence(e, epoch))?;
            if !value.is_finite() {
                return Err(Error::Divergence { epoch, loss: value });
            }
            total += value * members.len() as f64;
            adam_step(&mut model.weights, &grads, &mut adam).map_err(|e| as_divergence(e, epoch))?;
        }
        let train_loss = total / order.len() as f64;
        let val_loss = dataset_loss(&model, &val_set, cfg.loss).map_err(|e| as_divergence(e, epoch))?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        curve.push(EpochLoss {
            epoch,
            train_loss,
            val_loss,
        });
        if val_loss < best.0 {
            best = (val_loss, epoch, model.weights.clone());
        } else if epoch - best.1 >= cfg.patience {
            log::debug!("early stop at epoch {epoch}, best {}", best.1);
            break;
        } else if cfg.plateau > 0 && epoch - best.1.max(last_decay) >= cfg.plateau {
            adam.lr *= 0.5;
            last_decay = epoch;
            log::debug!("epoch {epoch}: lr halved to {:e}", adam.lr);
        }
    }
    model.weights = best.2;
    Ok(TrainOutcome {
        model,
        curve,
        best_epoch: best.1,
        training_time_s: started.elapsed().as_secs_f64(),
    })
}
