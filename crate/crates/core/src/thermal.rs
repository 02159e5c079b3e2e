//! Explicit finite-volume heat conduction on a 2-D slab under a moving laser.
//!
//! The slab spans the scan direction (columns) and depth (rows, row 0 at the
//! top surface). Cells have an out-of-plane thickness equal to `dx`. Lateral
//! faces are adiabatic, the top face loses heat by convection, and the bottom
//! face exchanges heat with a substrate held at the ambient temperature one
//! cell pitch below the last row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat_source::{hybrid_source, ProcessParams, ScanPath};

/// Layers below the surface that absorb laser power.
pub const HEATED_LAYERS: usize = 2;

const SUBSTEP_CAP: usize = 1_000_000;
const STABILITY_SAFETY: f64 = 0.9;

/// Constant material properties. Units: kg/mm^3, J/(kg K), W/(mm K), W/(mm^2 K), K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    pub rho: f64,
    pub c: f64,
    pub k: f64,
    pub h_conv: f64,
    pub t_ambient: f64,
    pub t_melt: f64,
}

impl Default for MaterialProps {
    /// 316L-like stainless steel.
    fn default() -> Self {
        Self {
            rho: 7.95e-6,
            c: 500.0,
            k: 0.015,
            h_conv: 1e-5,
            t_ambient: 293.0,
            t_melt: 1700.0,
        }
    }
}

impl MaterialProps {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("c", self.c),
            ("k", self.k),
            ("h_conv", self.h_conv),
            ("t_ambient", self.t_ambient),
            ("t_melt", self.t_melt),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("material {name} must be positive, got {v}")));
            }
        }
        if self.t_melt <= self.t_ambient {
            return Err(Error::invalid("melting point must exceed ambient temperature"));
        }
        Ok(())
    }

    /// Volumetric heat capacity, J/(mm^3 K).
    pub fn heat_capacity(&self) -> f64 {
        self.rho * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub scan_length: f64,
    pub n_output_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 96,
            nz: 24,
            dx: 0.05,
            dz: 0.05,
            scan_length: 2.0,
            n_output_steps: 200,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.nz < HEATED_LAYERS {
            return Err(Error::invalid(format!(
                "grid needs nx >= 2 and nz >= {HEATED_LAYERS}, got {}x{}",
                self.nx, self.nz
            )));
        }
        if !(self.dx > 0.0 && self.dz > 0.0 && self.scan_length > 0.0) {
            return Err(Error::invalid("cell sizes and scan length must be positive"));
        }
        if self.nx as f64 * self.dx < self.scan_length {
            return Err(Error::invalid(format!(
                "domain length {} mm shorter than scan length {} mm",
                self.nx as f64 * self.dx,
                self.scan_length
            )));
        }
        if self.n_output_steps == 0 {
            return Err(Error::invalid("n_output_steps must be >= 1"));
        }
        Ok(())
    }

    /// Cell volume in mm^3 (out-of-plane thickness `dx`).
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dz * self.dx
    }

    pub fn cells(&self) -> usize {
        self.nx * self.nz
    }

    /// Where the beam starts along the scan axis, centring the track in the domain.
    pub fn scan_start(&self) -> f64 {
        0.5 * (self.nx as f64 * self.dx - self.scan_length)
    }

    pub fn total_time_ms(&self, speed: f64) -> f64 {
        self.scan_length / speed
    }

    pub fn output_dt_ms(&self, speed: f64) -> f64 {
        self.total_time_ms(speed) / self.n_output_steps as f64
    }
}

/// One physics run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub params: ProcessParams,
    /// End time of each output step, ms.
    pub time_grid: Vec<f64>,
    /// Cumulative ever-melted volume, mm^3.
    pub v_bead: Vec<f64>,
    /// Peak temperature over the grid during each output step, K.
    pub t_mp: Vec<f64>,
    pub melted: bool,
}

impl SimulationRecord {
    pub fn max_v_bead(&self) -> f64 {
        self.v_bead.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_t_mp(&self) -> f64 {
        self.t_mp.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Internal time stepping for one output interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    /// `0.25 min(dx, dz)^2 rho c / k`, converted to ms.
    pub bound_ms: f64,
    pub dt_ms: f64,
    pub substeps: usize,
}

/// Explicit-diffusion step bound and the sub-step split of one output interval.
pub fn stability_substeps(mat: &MaterialProps, grid: &GridSpec, output_dt_ms: f64) -> Result<StepPlan> {
    let h = grid.dx.min(grid.dz);
    let bound_ms = 0.25 * h * h * mat.heat_capacity() / mat.k * 1e3;
    if !(output_dt_ms.is_finite() && output_dt_ms > 0.0) {
        return Err(Error::invalid(format!("output step must be positive, got {output_dt_ms}")));
    }
    let raw = (output_dt_ms / (STABILITY_SAFETY * bound_ms)).ceil();
    if !raw.is_finite() || raw > SUBSTEP_CAP as f64 {
        return Err(Error::Stability(format!(
            "{raw} sub-steps per output step exceeds cap {SUBSTEP_CAP}"
        )));
    }
    let substeps = (raw as usize).max(1);
    Ok(StepPlan {
        bound_ms,
        dt_ms: output_dt_ms / substeps as f64,
        substeps,
    })
}

/// Energy flows over one output step, in J.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyStep {
    pub injected: f64,
    pub convective_loss: f64,
    pub substrate_loss: f64,
    /// Change of `sum rho c V (T - T_ambient)` over the step.
    pub stored_change: f64,
}

/// Snapshot handed to an observer after every sub-step.
#[derive(Debug)]
pub struct SubstepView<'a> {
    pub output_step: usize,
    /// Start of the sub-step, ms.
    pub t0_ms: f64,
    pub dt_ms: f64,
    /// Temperature after the sub-step, row-major `[nz][nx]`.
    pub temperature: &'a [f64],
    /// Cell-averaged source used during the sub-step, W/mm^3, `[HEATED_LAYERS][nx]`.
    pub source: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub record: SimulationRecord,
    pub energy: Vec<EnergyStep>,
    pub plan: StepPlan,
}

pub fn run_simulation(pp: &ProcessParams, mat: &MaterialProps, grid: &GridSpec) -> Result<SimulationRecord> {
    Ok(simulate(pp, mat, grid, true, |_| {})?.record)
}

/// Full run with energy accounting and a per-sub-step observer.
///
/// With `laser_on == false` the source is switched off, leaving only the
/// boundary exchange.
pub fn simulate<F>(
    pp: &ProcessParams,
    mat: &MaterialProps,
    grid: &GridSpec,
    laser_on: bool,
    mut observer: F,
) -> Result<SimulationTrace>
where
    F: FnMut(&SubstepView<'_>),
{
    pp.validate()?;
    mat.validate()?;
    grid.validate()?;

    let (nx, nz) = (grid.nx, grid.nz);
    let out_dt = grid.output_dt_ms(pp.speed);
    let plan = stability_substeps(mat, grid, out_dt)?;
    let path = ScanPath::along_y([0.0, grid.scan_start(), 0.0], pp.speed)?;

    let rc = mat.heat_capacity();
    let t_amb = mat.t_ambient;
    let vol = grid.cell_volume();
    let area_top = grid.dx * grid.dx;
    let dt_s = plan.dt_ms * 1e-3;
    // per-sub-step update coefficients
    let cx = mat.k / (rc * grid.dx * grid.dx) * dt_s;
    let cz = mat.k / (rc * grid.dz * grid.dz) * dt_s;
    let c_conv = mat.h_conv / (rc * grid.dz) * dt_s;
    let c_src = dt_s / rc;

    // 2x2 Gauss points per heated cell
    let g = 0.5 / 3f64.sqrt();
    let offsets = [0.5 - g, 0.5 + g];

    let mut temp = vec![t_amb; nx * nz];
    let mut next = temp.clone();
    let mut source = vec![0.0; HEATED_LAYERS * nx];
    let mut ever_melted = vec![false; nx * nz];
    let mut melted_count = 0usize;

    let n_out = grid.n_output_steps;
    let mut time_grid = Vec::with_capacity(n_out);
    let mut v_bead = Vec::with_capacity(n_out);
    let mut t_mp = Vec::with_capacity(n_out);
    let mut energy = Vec::with_capacity(n_out);

    let stored = |field: &[f64]| -> f64 { rc * vol * field.iter().map(|t| t - t_amb).sum::<f64>() };

    for step in 0..n_out {
        let mut ledger = EnergyStep::default();
        let e_start = stored(&temp);
        let mut peak = f64::NEG_INFINITY;
        for sub in 0..plan.substeps {
            let t0 = step as f64 * out_dt + sub as f64 * plan.dt_ms;
            if laser_on {
                for j in 0..HEATED_LAYERS {
                    for i in 0..nx {
                        let mut acc = 0.0;
                        for oz in offsets {
                            for ox in offsets {
                                let x = [0.0, (i as f64 + ox) * grid.dx, -(j as f64 + oz) * grid.dz];
                                acc += hybrid_source(&x, t0, plan.dt_ms, pp, &path)?;
                            }
                        }
                        source[j * nx + i] = 0.25 * acc;
                    }
                }
            }

            let mut injected = 0.0;
            let mut conv = 0.0;
            let mut substrate = 0.0;
            for j in 0..nz {
                for i in 0..nx {
                    let id = j * nx + i;
                    let t = temp[id];
                    let left = if i > 0 { temp[id - 1] } else { t };
                    let right = if i + 1 < nx { temp[id + 1] } else { t };
                    let mut dt_cell = cx * (left + right - 2.0 * t);
                    if j > 0 {
                        dt_cell += cz * (temp[id - nx] - t);
                    } else {
                        dt_cell -= c_conv * (t - t_amb);
                        conv += mat.h_conv * area_top * (t - t_amb) * dt_s;
                    }
                    if j + 1 < nz {
                        dt_cell += cz * (temp[id + nx] - t);
                    } else {
                        dt_cell += cz * (t_amb - t);
                        substrate += mat.k * area_top / grid.dz * (t - t_amb) * dt_s;
                    }
                    if laser_on && j < HEATED_LAYERS {
                        let q = source[id];
                        dt_cell += c_src * q;
                        injected += q * vol * dt_s;
                    }
                    next[id] = t + dt_cell;
                }
            }
            std::mem::swap(&mut temp, &mut next);

            for (id, &t) in temp.iter().enumerate() {
                if !t.is_finite() {
                    return Err(Error::NonFinite("temperature field"));
                }
                peak = peak.max(t);
                if t >= mat.t_melt && !ever_melted[id] {
                    ever_melted[id] = true;
                    melted_count += 1;
                }
            }
            ledger.injected += injected;
            ledger.convective_loss += conv;
            ledger.substrate_loss += substrate;

            observer(&SubstepView {
                output_step: step,
                t0_ms: t0,
                dt_ms: plan.dt_ms,
                temperature: &temp,
                source: &source,
            });
        }
        ledger.stored_change = stored(&temp) - e_start;
        energy.push(ledger);
        time_grid.push((step + 1) as f64 * out_dt);
        v_bead.push(melted_count as f64 * vol);
        t_mp.push(peak);
    }

    let melted = melted_count > 0;
    Ok(SimulationTrace {
        record: SimulationRecord {
            params: *pp,
            time_grid,
            v_bead,
            t_mp,
            melted,
        },
        energy,
        plan,
    })
}
