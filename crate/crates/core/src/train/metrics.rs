use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truth values this close to zero are left out of relative errors.
pub const REL_ERR_FLOOR: f64 = 1e-12;

fn check_pair(op: &'static str, pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::shape(op, format!("{} predictions vs {} truths", pred.len(), truth.len())));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair("rmse", pred, truth)?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn r2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair("r2", pred, truth)?;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::ZeroVariance("r2 truth values".into()));
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Per-sample `|pred - truth| / |truth|` in percent, plus how many samples
/// were skipped for a near-zero truth.
pub fn rel_err(pred: &[f64], truth: &[f64]) -> Result<(Vec<f64>, usize)> {
    check_pair("rel_err", pred, truth)?;
    let mut out = Vec::with_capacity(pred.len());
    let mut skipped = 0;
    for (p, t) in pred.iter().zip(truth) {
        if t.abs() < REL_ERR_FLOOR {
            skipped += 1;
        } else {
            out.push(100.0 * (p - t).abs() / t.abs());
        }
    }
    Ok((out, skipped))
}

/// `100 * ||pred - truth||_2 / ||truth||_2`.
pub fn rel_l2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair("rel_l2", pred, truth)?;
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den.sqrt() < REL_ERR_FLOOR {
        return Err(Error::invalid("relative L2 error of an all-zero truth series"));
    }
    Ok(100.0 * (num / den).sqrt())
}

/// Box-plot summary with linear-interpolation quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// `q3 + 1.5 * (q3 - q1)`; values above it are outliers.
    pub upper_fence: f64,
    pub outliers: usize,
}

/// Quantile of sorted data, interpolating between order statistics at `p (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn five_number(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::invalid("five-number summary of an empty list"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("five_number input"));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&s, 0.25);
    let q3 = quantile_sorted(&s, 0.75);
    let upper_fence = q3 + 1.5 * (q3 - q1);
    Ok(FiveNumber {
        min: s[0],
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        max: s[s.len() - 1],
        upper_fence,
        outliers: s.iter().filter(|&&v| v > upper_fence).count(),
    })
}

/// Least-squares non-decreasing fit (pool adjacent violators).
pub fn isotonic_fit(series: &[f64]) -> Vec<f64> {
    // blocks of (mean, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(series.len());
    for &v in series {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().expect("two blocks") = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat(m).take(n)).collect()
}

/// Largest distance to the isotonic fit, relative to the final value.
pub fn monotonic_violation(series: &[f64]) -> f64 {
    let Some(&last) = series.last() else {
        return 0.0;
    };
    let fit = isotonic_fit(series);
    let worst = series.iter().zip(&fit).fold(0.0f64, |m, (s, f)| m.max((s - f).abs()));
    if last.abs() < REL_ERR_FLOOR {
        worst
    } else {
        worst / last.abs()
    }
}
