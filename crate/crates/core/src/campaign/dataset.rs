use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scaler::{split_indices, Scaler, Split};
use crate::error::{Error, Result};
use crate::heat_source::ParamBounds;
use crate::jsonl;
use crate::thermal::{GridSpec, MaterialProps, SimulationRecord};

pub const SCHEMA_VERSION: u32 = 1;

/// Output statistics, fitted on the training split only.
///
/// `scalar` standardizes the per-record maxima; `series` pools every time step
/// of a QoI into one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetScalers {
    pub scalar: Scaler,
    pub series: Scaler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    n_records: usize,
    removed_count: usize,
    bounds: ParamBounds,
    grid: GridSpec,
    material: MaterialProps,
    scalers: DatasetScalers,
    split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub bounds: ParamBounds,
    pub grid: GridSpec,
    pub material: MaterialProps,
    /// Melted records only.
    pub records: Vec<SimulationRecord>,
    pub removed_count: usize,
    pub split: Split,
    pub scalers: DatasetScalers,
}

impl Dataset {
    pub fn assemble(
        records: Vec<SimulationRecord>,
        removed_count: usize,
        bounds: ParamBounds,
        grid: GridSpec,
        material: MaterialProps,
        ratios: [f64; 3],
        seed: u64,
    ) -> Result<Self> {
        if let Some(i) = records.iter().position(|r| !r.melted) {
            return Err(Error::invalid(format!("record {i} never melted; filter before assembling")));
        }
        let split = split_indices(records.len(), ratios, seed)?;
        let scalers = fit_scalers(&records, &split.train)?;
        Ok(Self {
            bounds,
            grid,
            material,
            records,
            removed_count,
            split,
            scalers,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Series length shared by every record.
    pub fn steps(&self) -> usize {
        self.grid.n_output_steps
    }

    /// Process inputs min-max scaled to `[0, 1]` by the parameter bounds.
    pub fn unit_inputs(&self, i: usize) -> [f64; 5] {
        self.bounds.to_unit(&self.records[i].params)
    }

    /// `(max v_bead, max t_mp)` in physical units.
    pub fn scalar_truth(&self, i: usize) -> [f64; 2] {
        let r = &self.records[i];
        [r.max_v_bead(), r.max_t_mp()]
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let header = Header {
            schema_version: SCHEMA_VERSION,
            n_records: self.records.len(),
            removed_count: self.removed_count,
            bounds: self.bounds,
            grid: self.grid,
            material: self.material,
            scalers: self.scalers.clone(),
            split: self.split.clone(),
        };
        let mut text = jsonl::to_line(&header)?;
        text.push('\n');
        for r in &self.records {
            text.push_str(&jsonl::to_line(r)?);
            text.push('\n');
        }
        Ok(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_file(path, &self.to_jsonl()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &jsonl::read_file(path)?)
    }

    /// `path` is only used in error messages.
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (n0, first) = lines.next().ok_or_else(|| Error::format(path, "empty dataset file"))?;
        let header: Header = jsonl::from_line(path, n0, first)?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(Error::format(
                path,
                format!("schema version {} unsupported (expected {SCHEMA_VERSION})", header.schema_version),
            ));
        }
        let records = lines
            .map(|(n, l)| jsonl::from_line::<SimulationRecord>(path, n, l))
            .collect::<Result<Vec<_>>>()?;
        if records.len() != header.n_records {
            return Err(Error::format(
                path,
                format!("header announces {} records, found {}", header.n_records, records.len()),
            ));
        }
        let steps = header.grid.n_output_steps;
        for (i, r) in records.iter().enumerate() {
            if r.v_bead.len() != steps || r.t_mp.len() != steps || r.time_grid.len() != steps {
                return Err(Error::format(path, format!("record {i} series length differs from {steps}")));
            }
        }
        let covered = {
            let mut all: Vec<usize> = header
                .split
                .train
                .iter()
                .chain(&header.split.val)
                .chain(&header.split.test)
                .copied()
                .collect();
            all.sort_unstable();
            all == (0..records.len()).collect::<Vec<_>>()
        };
        if !covered {
            return Err(Error::format(path, "split indices are not a partition of the records"));
        }
        Ok(Self {
            bounds: header.bounds,
            grid: header.grid,
            material: header.material,
            records,
            removed_count: header.removed_count,
            split: header.split,
            scalers: header.scalers,
        })
    }
}

fn fit_scalers(records: &[SimulationRecord], train: &[usize]) -> Result<DatasetScalers> {
    let pick = |f: &dyn Fn(&SimulationRecord) -> f64| train.iter().map(|&i| f(&records[i])).collect::<Vec<_>>();
    let scalar = Scaler::fit(&[pick(&|r| r.max_v_bead()), pick(&|r| r.max_t_mp())])?;
    let pool = |f: &dyn Fn(&SimulationRecord) -> &[f64]| {
        train.iter().flat_map(|&i| f(&records[i]).iter().copied()).collect::<Vec<_>>()
    };
    let series = Scaler::fit(&[pool(&|r| &r.v_bead), pool(&|r| &r.t_mp)])?;
    Ok(DatasetScalers { scalar, series })
}
