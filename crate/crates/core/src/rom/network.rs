use rand::Rng;

use super::config::{DeepOnetConfig, DnnConfig, FnoConfig, RomConfig, FNO_INPUT_CHANNELS, QOI_COUNT};
use crate::diff::{Activation, SpectralShape, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::heat_source::PARAM_COUNT;

/// Normalized time coordinate of output step `n` out of `steps`: `(n + 1) / steps`.
pub fn time_coordinates(steps: usize) -> Vec<f64> {
    (0..steps).map(|n| (n + 1) as f64 / steps as f64).collect()
}

pub fn init_params(cfg: &RomConfig, rng: &mut impl Rng) -> Vec<Tensor> {
    cfg.layout()
        .into_iter()
        .map(|(shape, rule)| {
            let limit = rule.limit(shape[0]);
            let n: usize = shape.iter().product();
            let data = if limit == 0.0 {
                vec![0.0; n]
            } else {
                (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
            };
            Tensor::new(shape, data).expect("layout shape matches data")
        })
        .collect()
}

struct Cursor<'a> {
    params: &'a [Var],
    next: usize,
}

impl Cursor<'_> {
    fn take(&mut self) -> Result<Var> {
        let v = self
            .params
            .get(self.next)
            .copied()
            .ok_or_else(|| Error::shape("rom forward", "too few parameter tensors"))?;
        self.next += 1;
        Ok(v)
    }
}

fn mlp(tape: &mut Tape, h: Var, layers: usize, act: Activation, cur: &mut Cursor<'_>) -> Result<Var> {
    let mut h = h;
    for l in 0..layers {
        let w = cur.take()?;
        let b = cur.take()?;
        let z = tape.matmul(h, w)?;
        h = tape.add_bias(z, b)?;
        if l + 1 < layers {
            h = tape.activate(h, act)?;
        }
    }
    Ok(h)
}

/// Network output for unit-scaled inputs `x` of shape `[B, 5]`.
///
/// The DNN returns `[B, 2]`. The operator models return `[B * steps, 2]` with
/// row `b * steps + t`.
pub fn forward(tape: &mut Tape, cfg: &RomConfig, params: &[Var], x: &Tensor, steps: usize) -> Result<Var> {
    let (_, cols) = x.dims2()?;
    if cols != PARAM_COUNT {
        return Err(Error::shape("rom forward", format!("inputs have {cols} columns, expected {PARAM_COUNT}")));
    }
    if cfg.is_operator() && steps == 0 {
        return Err(Error::invalid("operator models need at least one time step"));
    }
    let mut cur = Cursor { params, next: 0 };
    let out = match cfg {
        RomConfig::Dnn(c) => dnn(tape, c, x, &mut cur)?,
        RomConfig::DeepOnet(c) => deeponet(tape, c, x, steps, &mut cur)?,
        RomConfig::Fno(c) => fno(tape, c, x, steps, &mut cur)?,
    };
    if cur.next != params.len() {
        return Err(Error::shape(
            "rom forward",
            format!("{} parameter tensors given, {} used", params.len(), cur.next),
        ));
    }
    Ok(out)
}

fn dnn(tape: &mut Tape, c: &DnnConfig, x: &Tensor, cur: &mut Cursor<'_>) -> Result<Var> {
    let h = tape.constant(x.clone());
    mlp(tape, h, c.layer_widths.len() + 1, c.activation, cur)
}

fn deeponet(tape: &mut Tape, c: &DeepOnetConfig, x: &Tensor, steps: usize, cur: &mut Cursor<'_>) -> Result<Var> {
    let xb = tape.constant(x.clone());
    let tt = tape.constant(Tensor::new(vec![steps, 1], time_coordinates(steps))?);
    let mut heads = Vec::with_capacity(QOI_COUNT);
    for _ in 0..QOI_COUNT {
        let branch = mlp(tape, xb, c.branch_widths.len(), c.activation, cur)?;
        let trunk = mlp(tape, tt, c.trunk_widths.len(), c.activation, cur)?;
        let bias = cur.take()?;
        let dot = tape.matmul_nt(branch, trunk)?;
        heads.push(tape.add_scalar(dot, bias)?);
    }
    tape.stack_cols(&heads)
}

/// Rows `b * steps + t`: the five inputs of sample `b` followed by the time coordinate.
pub fn fno_input(x: &Tensor, steps: usize) -> Result<Tensor> {
    let (batch, _) = x.dims2()?;
    let times = time_coordinates(steps);
    let mut data = Vec::with_capacity(batch * steps * FNO_INPUT_CHANNELS);
    for row in x.data().chunks(PARAM_COUNT) {
        for &t in &times {
            data.extend_from_slice(row);
            data.push(t);
        }
    }
    Tensor::new(vec![batch * steps, FNO_INPUT_CHANNELS], data)
}

fn fno(tape: &mut Tape, c: &FnoConfig, x: &Tensor, steps: usize, cur: &mut Cursor<'_>) -> Result<Var> {
    let (batch, _) = x.dims2()?;
    if c.modes > steps / 2 {
        return Err(Error::invalid(format!("{} modes need >= {} steps, got {steps}", c.modes, 2 * c.modes)));
    }
    let input = tape.constant(fno_input(x, steps)?);
    let mut q = mlp(tape, input, 1, Activation::Identity, cur)?;
    let shape = SpectralShape {
        batch,
        len: steps,
        in_channels: c.width,
        out_channels: c.width,
        modes: c.modes,
    };
    for _ in 0..c.n_layers {
        let w_re = cur.take()?;
        let w_im = cur.take()?;
        let spectral = tape.spectral_conv(q, w_re, w_im, shape)?;
        let local = mlp(tape, q, 1, Activation::Identity, cur)?;
        let sum = tape.add(spectral, local)?;
        q = tape.activate(sum, c.activation)?;
    }
    mlp(tape, q, 2, Activation::Gelu, cur)
}

/// Per-QoI maximum over time of a `[B * steps, 2]` output, as `B` pairs.
pub fn scalar_heads(series: &Tensor, steps: usize) -> Result<Vec<[f64; QOI_COUNT]>> {
    let (rows, cols) = series.dims2()?;
    if steps == 0 || cols != QOI_COUNT || rows % steps != 0 {
        return Err(Error::shape("scalar_heads", format!("{:?} with {steps} steps", series.shape())));
    }
    Ok(series
        .data()
        .chunks(steps * QOI_COUNT)
        .map(|sample| {
            let mut best = [f64::NEG_INFINITY; QOI_COUNT];
            for row in sample.chunks(QOI_COUNT) {
                for q in 0..QOI_COUNT {
                    best[q] = best[q].max(row[q]);
                }
            }
            best
        })
        .collect())
}
