//! Gaussian point, line and hybrid laser heat sources.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PARAM_COUNT: usize = 5;
pub const PARAM_LABELS: [&str; PARAM_COUNT] = ["P", "v", "r", "eta", "alpha"];

/// The five laser heat-source inputs.
///
/// Units: power W, speed mm/ms, radius mm; efficiency and scaling are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "v")]
    pub speed: f64,
    #[serde(rename = "r")]
    pub radius: f64,
    #[serde(rename = "eta")]
    pub efficiency: f64,
    #[serde(rename = "alpha")]
    pub scaling: f64,
}

impl ProcessParams {
    pub const NOMINAL: ProcessParams = ProcessParams {
        power: 300.0,
        speed: 0.01058,
        radius: 0.3,
        efficiency: 0.36,
        scaling: 1.6,
    };

    pub fn from_array(a: [f64; PARAM_COUNT]) -> Self {
        Self {
            power: a[0],
            speed: a[1],
            radius: a[2],
            efficiency: a[3],
            scaling: a[4],
        }
    }

    pub fn to_array(self) -> [f64; PARAM_COUNT] {
        [self.power, self.speed, self.radius, self.efficiency, self.scaling]
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in PARAM_LABELS.iter().zip(self.to_array()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "process parameter {label} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Peak volumetric power `2 alpha eta P / (pi r^3)` in W/mm^3.
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.scaling * self.efficiency * self.power / (PI * self.radius.powi(3))
    }
}

/// Closed interval per input, in [`PARAM_LABELS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds(pub [(f64, f64); PARAM_COUNT]);

impl ParamBounds {
    /// Process-variable ranges of the laser deposition study.
    pub const TABLE: ParamBounds = ParamBounds([
        (250.0, 400.0),
        (0.004, 0.020),
        (0.25, 0.40),
        (0.3, 0.4),
        (1.0, 2.0),
    ]);

    pub fn validate(&self) -> Result<()> {
        for (label, (lo, hi)) in PARAM_LABELS.iter().zip(self.0) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "bounds for {label} must satisfy low < high, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &ProcessParams) -> bool {
        p.to_array()
            .iter()
            .zip(self.0)
            .all(|(&v, (lo, hi))| v >= lo && v <= hi)
    }

    /// Min-max scaling to the unit cube.
    pub fn to_unit(&self, p: &ProcessParams) -> [f64; PARAM_COUNT] {
        let a = p.to_array();
        std::array::from_fn(|i| (a[i] - self.0[i].0) / (self.0[i].1 - self.0[i].0))
    }

    pub fn from_unit(&self, u: &[f64; PARAM_COUNT]) -> ProcessParams {
        ProcessParams::from_array(std::array::from_fn(|i| {
            self.0[i].0 + u[i] * (self.0[i].1 - self.0[i].0)
        }))
    }
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self::TABLE
    }
}

/// Straight scan track: `p(t) = origin + direction * speed * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPath {
    origin: [f64; 3],
    direction: [f64; 3],
    speed: f64,
}

impl ScanPath {
    pub fn new(origin: [f64; 3], direction: [f64; 3], speed: f64) -> Result<Self> {
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("scan direction must be non-zero"));
        }
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(Error::invalid(format!("scan speed must be >= 0, got {speed}")));
        }
        Ok(Self {
            origin,
            direction: direction.map(|d| d / norm),
            speed,
        })
    }

    /// Scan along +y from `origin`.
    pub fn along_y(origin: [f64; 3], speed: f64) -> Result<Self> {
        Self::new(origin, [0.0, 1.0, 0.0], speed)
    }

    pub fn position(&self, t: f64) -> [f64; 3] {
        std::array::from_fn(|i| self.origin[i] + self.direction[i] * self.speed * t)
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

/// Gaussian point source in W/mm^3 at position `x` (mm) and time `t` (ms).
pub fn point_source(x: &[f64; 3], t: f64, pp: &ProcessParams, path: &ScanPath) -> f64 {
    let p = path.position(t);
    let r2 = pp.radius * pp.radius;
    pp.peak_intensity() * (-2.0 * dist_sq(x, &p) / r2).exp()
}

pub const LINE_QUADRATURE_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 0 { 1.0 } else { p1 };
            let pn1 = if order == 0 { 0.0 } else { p0 };
            dp = n * (x * pn - pn1) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn line_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(LINE_QUADRATURE_ORDER))
}

/// Time average of the point source over `[t0, t0 + dt]`.
pub fn line_source(x: &[f64; 3], t0: f64, dt: f64, pp: &ProcessParams, path: &ScanPath) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("line source needs dt > 0, got {dt}")));
    }
    let (nodes, weights) = line_rule();
    let half = 0.5 * dt;
    let mid = t0 + half;
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for (s, w) in nodes.iter().zip(weights) {
        acc += w * point_source(x, mid + half * s, pp, path);
        wsum += w;
    }
    Ok(acc / wsum)
}

/// Line source when the step would let the beam skip cells (`dt > r / v`),
/// otherwise the point source at the step midpoint.
pub fn hybrid_source(x: &[f64; 3], t0: f64, dt: f64, pp: &ProcessParams, path: &ScanPath) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("hybrid source needs dt > 0, got {dt}")));
    }
    if uses_line_source(dt, pp.radius, path.speed()) {
        line_source(x, t0, dt, pp, path)
    } else {
        Ok(point_source(x, t0 + 0.5 * dt, pp, path))
    }
}

pub fn uses_line_source(dt: f64, radius: f64, speed: f64) -> bool {
    speed > 0.0 && dt > radius / speed
}
