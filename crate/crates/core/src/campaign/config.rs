use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat_source::ParamBounds;
use crate::thermal::{GridSpec, MaterialProps};

/// Flat campaign configuration. Every key is optional; bound keys override
/// single ends of the default parameter ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,

    #[serde(rename = "P_min", skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(rename = "P_max", skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,

    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub scan_length: f64,
    pub n_output_steps: usize,

    pub rho: f64,
    pub c: f64,
    pub k: f64,
    pub h_conv: f64,
    pub t_ambient: f64,
    pub t_melt: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        let m = MaterialProps::default();
        Self {
            n_samples: 500,
            seed: 0,
            train_ratio: 0.8,
            val_ratio: 0.1,
            test_ratio: 0.1,
            p_min: None,
            p_max: None,
            v_min: None,
            v_max: None,
            r_min: None,
            r_max: None,
            eta_min: None,
            eta_max: None,
            alpha_min: None,
            alpha_max: None,
            nx: g.nx,
            nz: g.nz,
            dx: g.dx,
            dz: g.dz,
            scan_length: g.scan_length,
            n_output_steps: g.n_output_steps,
            rho: m.rho,
            c: m.c,
            k: m.k,
            h_conv: m.h_conv,
            t_ambient: m.t_ambient,
            t_melt: m.t_melt,
        }
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::invalid(format!("campaign config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str::<Self>(&text)
            .map_err(|e| Error::format(path, e.to_string().replace('\n', " ")))
            .and_then(|c| c.validate().map(|_| c))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        self.bounds().validate()?;
        self.grid().validate()?;
        self.material().validate()
    }

    pub fn ratios(&self) -> [f64; 3] {
        [self.train_ratio, self.val_ratio, self.test_ratio]
    }

    pub fn bounds(&self) -> ParamBounds {
        let mut b = ParamBounds::TABLE;
        let overrides = [
            (self.p_min, self.p_max),
            (self.v_min, self.v_max),
            (self.r_min, self.r_max),
            (self.eta_min, self.eta_max),
            (self.alpha_min, self.alpha_max),
        ];
        for (slot, (lo, hi)) in b.0.iter_mut().zip(overrides) {
            slot.0 = lo.unwrap_or(slot.0);
            slot.1 = hi.unwrap_or(slot.1);
        }
        b
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            nz: self.nz,
            dx: self.dx,
            dz: self.dz,
            scan_length: self.scan_length,
            n_output_steps: self.n_output_steps,
        }
    }

    pub fn material(&self) -> MaterialProps {
        MaterialProps {
            rho: self.rho,
            c: self.c,
            k: self.k,
            h_conv: self.h_conv,
            t_ambient: self.t_ambient,
            t_melt: self.t_melt,
        }
    }
}
