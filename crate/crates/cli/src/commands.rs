use std::fmt;

use opforge_core::campaign::{generate, CampaignConfig, Dataset};
use opforge_core::heat_source::{ProcessParams, PARAM_LABELS};
use opforge_core::jsonl;
use opforge_core::rom::{RomModel, Target, QOI_LABELS};
use opforge_core::seeds;
use opforge_core::sensitivity::{interaction_check, saltelli_sample, sobol_indices};
use opforge_core::train::{evaluate, grid_search, new_model, train, EvalReport};
use opforge_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::manifest::RunManifest;
use crate::settings::RunFile;
use crate::{Command, Common, EvaluateArgs, GenerateArgs, SensitivityArgs, TrainArgs};

pub const DEFAULT_SEED: u64 = 2024;
pub const WORKERS_ENV: &str = "OPFORGE_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs one subcommand and returns the summary line for stdout.
pub fn run(command: Command) -> CliResult<String> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Hypersearch(a) => cmd_hypersearch(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
    }
}

fn workers(common: &Common) -> CliResult<usize> {
    let n = match common.workers {
        Some(n) => n,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Usage("worker count must be >= 1".into()));
    }
    Ok(n)
}

fn lines<T: Serialize>(items: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&jsonl::to_line(&item)?);
        out.push('\n');
    }
    Ok(out)
}

fn cmd_generate(a: GenerateArgs) -> CliResult<String> {
    let mut cfg = match &a.config {
        Some(p) => CampaignConfig::load(p)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = a.common.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let workers = workers(&a.common)?;
    let ds = generate(&cfg, workers)?;

    let mut manifest = RunManifest::new("generate", cfg.seed, a.config.as_deref(), &a.common.out);
    manifest.write("dataset", "dataset.jsonl", &ds.to_jsonl()?)?;
    manifest.finish()?;
    eprintln!("removed {} non-melting samples of {}", ds.removed_count, cfg.n_samples);
    Ok(json!({
        "records": ds.len(),
        "removed": ds.removed_count,
        "train": ds.split.train.len(),
        "val": ds.split.val.len(),
        "test": ds.split.test.len(),
    })
    .to_string())
}

#[derive(Serialize)]
struct ScalarPrediction {
    record: usize,
    params: [f64; 5],
    pred: [f64; 2],
    truth: [f64; 2],
}

#[derive(Serialize)]
struct SeriesPrediction<'a> {
    record: usize,
    params: [f64; 5],
    time_ms: &'a [f64],
    v_bead_pred: &'a [f64],
    v_bead_truth: &'a [f64],
    t_mp_pred: &'a [f64],
    t_mp_truth: &'a [f64],
}

/// Per-sample predictions on `idx`, the data behind scatter and time-series plots.
fn predictions(model: &RomModel, ds: &Dataset, idx: &[usize], target: Target) -> CliResult<String> {
    let params: Vec<ProcessParams> = idx.iter().map(|&i| ds.records[i].params).collect();
    match target {
        Target::Scalar => {
            let pred = model.predict_scalar(&params)?;
            lines(idx.iter().zip(pred).map(|(&i, p)| ScalarPrediction {
                record: i,
                params: ds.records[i].params.to_array(),
                pred: p,
                truth: ds.scalar_truth(i),
            }))
        }
        Target::Series => {
            let pred = model.predict_series(&params, ds.steps())?;
            lines(idx.iter().zip(&pred).map(|(&i, p)| {
                let r = &ds.records[i];
                SeriesPrediction {
                    record: i,
                    params: r.params.to_array(),
                    time_ms: &r.time_grid,
                    v_bead_pred: &p[0],
                    v_bead_truth: &r.v_bead,
                    t_mp_pred: &p[1],
                    t_mp_truth: &r.t_mp,
                }
            }))
        }
    }
}

fn check_target(model_is_operator: bool, target: Target) -> CliResult<()> {
    if target == Target::Series && !model_is_operator {
        return Err(CliError::Usage("the dnn predicts maxima only; use --target scalar".into()));
    }
    Ok(())
}

fn report_summary(report: &EvalReport) -> serde_json::Value {
    let qois: Vec<_> = report
        .qois
        .iter()
        .map(|q| {
            json!({
                "qoi": q.label,
                "rmse": q.rmse,
                "r2": q.r2,
                "median_rel_err_pct": q.summary.median,
            })
        })
        .collect();
    json!({ "kind": report.kind, "target": report.target, "test_samples": report.n_samples, "qois": qois })
}

fn cmd_train(a: TrainArgs) -> CliResult<String> {
    let file = RunFile::load(a.config.as_deref())?;
    let rom = file.model_config(a.model_kind)?;
    check_target(rom.is_operator(), a.target)?;
    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let cfg = file.train_config(a.model_kind, seed);
    let ds = Dataset::load(&a.dataset)?;

    let outcome = train(new_model(rom, &ds, seed)?, &ds, &cfg)?;
    let report = evaluate(&outcome.model, &ds, &ds.split.test, a.target)?;

    let mut manifest = RunManifest::new("train", seed, a.config.as_deref(), &a.common.out);
    manifest.inputs.push(a.dataset.clone());
    manifest.write("model", "model.jsonl", &outcome.model.to_jsonl()?)?;
    manifest.write("training", "loss_curve.jsonl", &lines(&outcome.curve)?)?;
    manifest.write("evaluation", "report.json", &lines([&report])?)?;
    manifest.write(
        "evaluation",
        "predictions.jsonl",
        &predictions(&outcome.model, &ds, &ds.split.test, a.target)?,
    )?;
    manifest.finish()?;

    let mut summary = report_summary(&report);
    summary["best_epoch"] = json!(outcome.best_epoch);
    summary["epochs_run"] = json!(outcome.curve.len());
    summary["training_time_s"] = json!(outcome.training_time_s);
    Ok(summary.to_string())
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<String> {
    let model = RomModel::load(&a.model)?;
    check_target(model.config.is_operator(), a.target)?;
    let ds = Dataset::load(&a.dataset)?;
    if model.bounds != ds.bounds {
        log::warn!("model was trained on different parameter bounds than {}", a.dataset.display());
    }
    let report = evaluate(&model, &ds, &ds.split.test, a.target)?;

    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let mut manifest = RunManifest::new("evaluate", seed, None, &a.common.out);
    manifest.inputs.extend([a.model.clone(), a.dataset.clone()]);
    manifest.write("evaluation", "report.json", &lines([&report])?)?;
    manifest.write("evaluation", "predictions.jsonl", &predictions(&model, &ds, &ds.split.test, a.target)?)?;
    manifest.finish()?;
    Ok(report_summary(&report).to_string())
}

fn cmd_hypersearch(a: TrainArgs) -> CliResult<String> {
    let file = RunFile::load(a.config.as_deref())?;
    let grid = file.search_grid(a.model_kind)?;
    for c in &grid {
        check_target(c.is_operator(), a.target)?;
    }
    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let cfg = file.train_config(a.model_kind, seed);
    let ds = Dataset::load(&a.dataset)?;
    let entries = grid_search(&grid, &ds, &cfg, a.target)?;

    let mut manifest = RunManifest::new("hypersearch", seed, a.config.as_deref(), &a.common.out);
    manifest.inputs.push(a.dataset.clone());
    manifest.write("search", "search.jsonl", &lines(&entries)?)?;
    manifest.finish()?;

    let ranking: Vec<_> = entries
        .iter()
        .map(|e| json!({ "rank": e.rank, "index": e.index, "val_rmse": e.val_rmse, "error": e.error }))
        .collect();
    Ok(json!({ "kind": a.model_kind, "target": a.target, "ranking": ranking }).to_string())
}

fn cmd_sensitivity(a: SensitivityArgs) -> CliResult<String> {
    let model = RomModel::load(&a.model)?;
    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let design = saltelli_sample(&model.bounds.0, a.n_base, seeds::derive(seed, seeds::stream::SALTELLI))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(&a.common)?)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let result = pool.install(|| {
        sobol_indices(&design, &PARAM_LABELS, &QOI_LABELS, |rows: &[Vec<f64>]| {
            let params: Vec<ProcessParams> = rows
                .iter()
                .map(|r| ProcessParams::from_array([r[0], r[1], r[2], r[3], r[4]]))
                .collect();
            Ok(model.predict_scalar(&params)?.into_iter().map(|p| p.to_vec()).collect())
        })
    })?;

    let mut manifest = RunManifest::new("sensitivity", seed, None, &a.common.out);
    manifest.inputs.push(a.model.clone());
    manifest.write("sensitivity", "sobol.jsonl", &result.to_jsonl()?)?;
    manifest.finish()?;

    let sums = interaction_check(&result);
    for s in &sums {
        eprintln!(
            "{}: sum of total indices {:.4} ({})",
            s.qoi,
            s.sum_st,
            if s.negligible { "negligible interactions" } else { "interacting" }
        );
    }
    Ok(json!({ "kind": model.kind(), "n_base": result.n_base, "interactions": sums }).to_string())
}
