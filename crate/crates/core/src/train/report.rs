use serde::{Deserialize, Serialize};

use super::metrics::{five_number, monotonic_violation, r2, rel_err, rel_l2, rmse, FiveNumber};
use super::{new_model, train, TrainConfig};
use crate::campaign::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::heat_source::ProcessParams;
use crate::rom::{RomConfig, RomKind, RomModel, Target, QOI_COUNT, QOI_LABELS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoiReport {
    pub label: String,
    /// Physical units.
    pub rmse: f64,
    /// RMSE divided by the dataset scaler's standard deviation.
    pub rmse_scaled: f64,
    pub r2: f64,
    /// Percent, one per sample: absolute relative error of the maximum, or the
    /// relative L2 error of the whole series.
    pub rel_err: Vec<f64>,
    pub rel_err_excluded: usize,
    pub summary: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    /// Per-sample distance of predicted v_bead from its isotonic fit,
    /// relative to the final value.
    pub v_bead_monotonic_violation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kind: RomKind,
    pub target: Target,
    pub n_samples: usize,
    pub qois: Vec<QoiReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesStats>,
    /// Wall-clock seconds; `None` when the report is written to a reproducible artifact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_time_s: Option<f64>,
}

impl EvalReport {
    pub fn qoi(&self, q: usize) -> &QoiReport {
        &self.qois[q]
    }
}

fn qoi_report(q: usize, pred: &[f64], truth: &[f64], per_sample: (Vec<f64>, usize), scaler: &Scaler) -> Result<QoiReport> {
    let e = rmse(pred, truth)?;
    let (rel, excluded) = per_sample;
    let summary = if rel.is_empty() {
        return Err(Error::invalid(format!("no usable relative errors for {}", QOI_LABELS[q])));
    } else {
        five_number(&rel)?
    };
    Ok(QoiReport {
        label: QOI_LABELS[q].to_string(),
        rmse: e,
        rmse_scaled: e / scaler.std[q],
        r2: r2(pred, truth)?,
        rel_err: rel,
        rel_err_excluded: excluded,
        summary,
    })
}

/// Physical-unit accuracy of `model` on the records `idx`.
///
/// `Target::Scalar` scores the two maxima (operator models via their series
/// maxima); `Target::Series` scores every step and needs an operator model.
pub fn evaluate(model: &RomModel, ds: &Dataset, idx: &[usize], target: Target) -> Result<EvalReport> {
    if idx.is_empty() {
        return Err(Error::invalid("evaluation needs at least one record"));
    }
    let params: Vec<ProcessParams> = idx.iter().map(|&i| ds.records[i].params).collect();
    let mut qois = Vec::with_capacity(QOI_COUNT);
    let series = match target {
        Target::Scalar => {
            let pred = model.predict_scalar(&params)?;
            for q in 0..QOI_COUNT {
                let p: Vec<f64> = pred.iter().map(|r| r[q]).collect();
                let t: Vec<f64> = idx.iter().map(|&i| ds.scalar_truth(i)[q]).collect();
                let per_sample = rel_err(&p, &t)?;
                qois.push(qoi_report(q, &p, &t, per_sample, &ds.scalers.scalar)?);
            }
            None
        }
        Target::Series => {
            let pred = model.predict_series(&params, ds.steps())?;
            for q in 0..QOI_COUNT {
                let truth_of = |i: usize| match q {
                    0 => &ds.records[i].v_bead,
                    _ => &ds.records[i].t_mp,
                };
                let p: Vec<f64> = pred.iter().flat_map(|s| s[q].iter().copied()).collect();
                let t: Vec<f64> = idx.iter().flat_map(|&i| truth_of(i).iter().copied()).collect();
                let mut per = Vec::with_capacity(idx.len());
                for (s, &i) in pred.iter().zip(idx) {
                    per.push(rel_l2(&s[q], truth_of(i))?);
                }
                qois.push(qoi_report(q, &p, &t, (per, 0), &ds.scalers.series)?);
            }
            Some(SeriesStats {
                v_bead_monotonic_violation: pred.iter().map(|s| monotonic_violation(&s[0])).collect(),
            })
        }
    };
    Ok(EvalReport {
        kind: model.kind(),
        target,
        n_samples: idx.len(),
        qois,
        series,
        training_time_s: None,
    })
}

/// Mean over QoIs of the scaled validation RMSE; the grid-search ranking key.
pub fn validation_rmse(model: &RomModel, ds: &Dataset, target: Target) -> Result<f64> {
    let r = evaluate(model, ds, &ds.split.val, target)?;
    Ok(r.qois.iter().map(|q| q.rmse_scaled).sum::<f64>() / QOI_COUNT as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    /// 1-based rank by validation RMSE; failed runs rank last.
    pub rank: usize,
    /// Position in the submitted grid.
    pub index: usize,
    pub config: RomConfig,
    pub val_rmse: Option<f64>,
    pub best_epoch: Option<usize>,
    pub test: Option<EvalReport>,
    pub error: Option<String>,
}

/// Trains every config with the same seed and ranks them by validation RMSE.
/// A failing run is recorded in its entry instead of aborting the search.
pub fn grid_search(configs: &[RomConfig], ds: &Dataset, cfg: &TrainConfig, target: Target) -> Result<Vec<SearchEntry>> {
    if configs.is_empty() {
        return Err(Error::invalid("grid search needs at least one config"));
    }
    let mut entries: Vec<SearchEntry> = configs
        .iter()
        .enumerate()
        .map(|(index, config)| {
            let run = || -> Result<(f64, usize, EvalReport)> {
                let model = new_model(config.clone(), ds, cfg.seed)?;
                let out = train(model, ds, cfg)?;
                let val = validation_rmse(&out.model, ds, target)?;
                let test = evaluate(&out.model, ds, &ds.split.test, target)?;
                Ok((val, out.best_epoch, test))
            };
            match run() {
                Ok((val, best_epoch, test)) => SearchEntry {
                    rank: 0,
                    index,
                    config: config.clone(),
                    val_rmse: Some(val),
                    best_epoch: Some(best_epoch),
                    test: Some(test),
                    error: None,
                },
                Err(e) => {
                    log::warn!("grid entry {index} failed: {e}");
                    SearchEntry {
                        rank: 0,
                        index,
                        config: config.clone(),
                        val_rmse: None,
                        best_epoch: None,
                        test: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    entries.sort_by(|a, b| match (a.val_rmse, b.val_rmse) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    for (r, e) in entries.iter_mut().enumerate() {
        e.rank = r + 1;
    }
    Ok(entries)
}
