use std::path::Path;

use opforge_core::rom::{study_group, RomConfig, RomKind};
use opforge_core::train::{LossKind, TrainConfig};
use serde::Deserialize;

use crate::commands::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub patience: Option<usize>,
    pub plateau: Option<usize>,
    pub loss: Option<LossKind>,
}

/// Optional TOML for `train` and `hypersearch`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunFile {
    pub model: Option<RomConfig>,
    pub train: TrainOverrides,
    /// Explicit architectures for `hypersearch`.
    pub grid: Vec<RomConfig>,
    /// Study groups (1..=6) for `hypersearch`; all six when both lists are empty.
    pub groups: Vec<usize>,
}

impl RunFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| opforge_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| {
            CliError::Core(opforge_core::Error::Format {
                path: path.to_path_buf(),
                detail: e.to_string().replace('\n', " "),
            })
        })
    }

    pub fn train_config(&self, kind: RomKind, seed: u64) -> TrainConfig {
        let mut t = TrainConfig::for_kind(kind, seed);
        let o = &self.train;
        t.epochs = o.epochs.unwrap_or(t.epochs);
        t.batch_size = o.batch_size.unwrap_or(t.batch_size);
        t.lr = o.lr.unwrap_or(t.lr);
        t.patience = o.patience.unwrap_or(t.patience);
        t.plateau = o.plateau.unwrap_or(t.plateau);
        t.loss = o.loss.unwrap_or(t.loss);
        t
    }

    pub fn model_config(&self, kind: RomKind) -> Result<RomConfig, CliError> {
        match &self.model {
            Some(m) if m.kind() != kind => Err(CliError::Usage(format!(
                "--model-kind {} conflicts with [model] kind {}",
                kind.label(),
                m.kind().label()
            ))),
            Some(m) => Ok(m.clone()),
            None => Ok(RomConfig::default_for(kind)),
        }
    }

    pub fn search_grid(&self, kind: RomKind) -> Result<Vec<RomConfig>, CliError> {
        if let Some(bad) = self.grid.iter().find(|c| c.kind() != kind) {
            return Err(CliError::Usage(format!("grid entry of kind {} in a {} search", bad.kind().label(), kind.label())));
        }
        let mut grid = self.grid.clone();
        let groups: Vec<usize> = if self.grid.is_empty() && self.groups.is_empty() {
            (1..=6).collect()
        } else {
            self.groups.clone()
        };
        for g in groups {
            grid.push(study_group(kind, g)?);
        }
        Ok(grid)
    }
}
