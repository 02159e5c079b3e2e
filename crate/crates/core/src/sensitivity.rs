//! Variance-based global sensitivity: Saltelli sampling with the Saltelli
//! first-order and Jansen total-effect estimators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::campaign::lhs_unit;
use crate::error::{Error, Result};
use crate::jsonl;

/// Sums of total indices above this suggest interactions that matter.
pub const INTERACTION_THRESHOLD: f64 = 1.15;

const EVAL_CHUNK: usize = 256;

/// Base matrices `A` and `B` (rows of physical input values).
#[derive(Debug, Clone, PartialEq)]
pub struct SaltelliDesign {
    pub n_base: usize,
    pub dims: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl SaltelliDesign {
    pub fn n_evaluations(&self) -> usize {
        self.n_base * (self.dims + 2)
    }

    /// Evaluation matrix: `A`, then `B`, then each `AB_i` (`A` with column `i` from `B`).
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(self.n_evaluations());
        rows.extend(self.a.iter().cloned());
        rows.extend(self.b.iter().cloned());
        for i in 0..self.dims {
            for (a, b) in self.a.iter().zip(&self.b) {
                let mut r = a.clone();
                r[i] = b[i];
                rows.push(r);
            }
        }
        rows
    }
}

/// Smallest power of two that is at least `n` (and at least 1).
pub fn round_n_base(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Builds `A` and `B` from one Latin hypercube with `2 d` columns, so both
/// matrices are stratified. `n_base` is rounded up to a power of two.
pub fn saltelli_sample(bounds: &[(f64, f64)], n_base: usize, seed: u64) -> Result<SaltelliDesign> {
    if bounds.is_empty() {
        return Err(Error::invalid("sensitivity analysis needs at least one input"));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("bounds of input {i} must satisfy low < high, got [{lo}, {hi}]")));
        }
    }
    let n = round_n_base(n_base);
    if n != n_base {
        log::info!("n_base {n_base} rounded up to {n}");
    }
    let d = bounds.len();
    let unit = lhs_unit(n, 2 * d, &mut ChaCha8Rng::seed_from_u64(seed));
    let scale = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(bounds)
            .map(|(u, (lo, hi))| lo + u * (hi - lo))
            .collect()
    };
    Ok(SaltelliDesign {
        n_base: n,
        dims: d,
        a: unit.iter().map(|r| scale(&r[..d])).collect(),
        b: unit.iter().map(|r| scale(&r[d..])).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolResult {
    pub input_labels: Vec<String>,
    pub qoi_labels: Vec<String>,
    /// `s1[q][i]`: first-order index of input `i` for QoI `q`.
    pub s1: Vec<Vec<f64>>,
    pub st: Vec<Vec<f64>>,
    pub n_base: usize,
    pub n_evaluations: usize,
}

/// Estimates first-order and total indices of every QoI.
///
/// `evaluate` maps a chunk of input rows to one output vector per row; chunks
/// run in parallel and are reassembled in order.
pub fn sobol_indices<F>(
    design: &SaltelliDesign,
    input_labels: &[&str],
    qoi_labels: &[&str],
    evaluate: F,
) -> Result<SobolResult>
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<Vec<f64>>> + Sync,
{
    let (n, d, m) = (design.n_base, design.dims, qoi_labels.len());
    if input_labels.len() != d || m == 0 {
        return Err(Error::invalid(format!(
            "{} input labels for {d} inputs, {m} QoI labels",
            input_labels.len()
        )));
    }
    let rows = design.rows();
    let chunks: Vec<Result<Vec<Vec<f64>>>> = rows.par_chunks(EVAL_CHUNK).map(&evaluate).collect();
    let mut y = Vec::with_capacity(rows.len());
    for c in chunks {
        y.extend(c?);
    }
    if y.len() != rows.len() || y.iter().any(|r| r.len() != m) {
        return Err(Error::shape("sobol_indices", format!("evaluator returned {} rows for {}", y.len(), rows.len())));
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sobol evaluator output"));
    }

    let mut s1 = vec![vec![0.0; d]; m];
    let mut st = vec![vec![0.0; d]; m];
    for q in 0..m {
        let fa: Vec<f64> = y[..n].iter().map(|r| r[q]).collect();
        let fb: Vec<f64> = y[n..2 * n].iter().map(|r| r[q]).collect();
        let all = fa.iter().chain(&fb);
        let mean = all.clone().sum::<f64>() / (2 * n) as f64;
        let var = all.map(|v| (v - mean).powi(2)).sum::<f64>() / (2 * n) as f64;
        if !(var > 1e-300) {
            return Err(Error::ZeroVariance(format!("output {}", qoi_labels[q])));
        }
        for i in 0..d {
            let block = &y[(2 + i) * n..(3 + i) * n];
            let (mut first, mut total) = (0.0, 0.0);
            for k in 0..n {
                let fab = block[k][q];
                first += fb[k] * (fab - fa[k]);
                total += (fa[k] - fab).powi(2);
            }
            s1[q][i] = first / n as f64 / var;
            st[q][i] = total / n as f64 / (2.0 * var);
        }
    }
    Ok(SobolResult {
        input_labels: input_labels.iter().map(|s| s.to_string()).collect(),
        qoi_labels: qoi_labels.iter().map(|s| s.to_string()).collect(),
        s1,
        st,
        n_base: n,
        n_evaluations: rows.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSum {
    pub qoi: String,
    pub sum_st: f64,
    /// `sum_st <= INTERACTION_THRESHOLD`.
    pub negligible: bool,
}

pub fn interaction_check(result: &SobolResult) -> Vec<InteractionSum> {
    result
        .qoi_labels
        .iter()
        .zip(&result.st)
        .map(|(label, st)| {
            let sum_st: f64 = st.iter().sum();
            InteractionSum {
                qoi: label.clone(),
                sum_st,
                negligible: sum_st <= INTERACTION_THRESHOLD,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct IndexLine<'a> {
    qoi: &'a str,
    input: &'a str,
    s1: f64,
    st: f64,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    n_base: usize,
    n_evaluations: usize,
    interactions: &'a [InteractionSum],
}

impl SobolResult {
    /// Index of the input with the largest total index for each QoI.
    pub fn top_input(&self, q: usize) -> usize {
        self.st[q]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// A summary line, then one line per (QoI, input) pair.
    pub fn to_jsonl(&self) -> Result<String> {
        let interactions = interaction_check(self);
        let mut out = jsonl::to_line(&SummaryLine {
            n_base: self.n_base,
            n_evaluations: self.n_evaluations,
            interactions: &interactions,
        })?;
        out.push('\n');
        for (q, qoi) in self.qoi_labels.iter().enumerate() {
            for (i, input) in self.input_labels.iter().enumerate() {
                out.push_str(&jsonl::to_line(&IndexLine {
                    qoi,
                    input,
                    s1: self.s1[q][i],
                    st: self.st[q][i],
                })?);
                out.push('\n');
            }
        }
        Ok(out)
    }
}
