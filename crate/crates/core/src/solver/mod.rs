//! Time integration of the projected Navier–Stokes equations
//! `∂_t u = νΔu − ℙ∇·(u⊗u)` and of the perturbed system for `w = u − v`.
//!
//! The scheme is Cox–Matthews ETDRK2: diffusion is integrated exactly by the
//! multiplier `e^{−ν|k|²h}`, the projected nonlinearity explicitly at second
//! order. Along the way each step also integrates `‖∇u‖₂²` over the step
//! using the scheme's own continuous extension, which gives the dissipation
//! integral needed by the energy inequality without a coarse time quadrature.

mod etd;
mod nonlinear;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use etd::{phi1, phi2, EtdTables};
pub(crate) use nonlinear::bilinear_coeffs;
pub use nonlinear::{nonlinear_term, perturbed_nonlinear, NonlinearForm};

use crate::error::{invalid, Error, Result};
use crate::monitor::{compute_record, lp_norm, DiagnosticRecord, MonitorConfig};
use crate::spectral::{check_same, leray_in_place, Grid, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub viscosity: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Uniform snapshot cadence (ignored when `snapshot_times` is set).
    pub snapshot_interval: f64,
    /// Explicit snapshot times; steps are shortened to land on them.
    pub snapshot_times: Option<Vec<f64>>,
    pub nonlinear_form: NonlinearForm,
    pub dealias: bool,
    /// `false` integrates the Stokes equations.
    pub nonlinear: bool,
    /// Advective CFL number used by the step-size advisor.
    pub cfl: f64,
    /// Escape when ‖u‖_q exceeds `blowup_factor`·‖u₀‖_q (q = `blowup_norm`).
    pub blowup_factor: f64,
    pub blowup_norm: f64,
    /// Absolute ceiling overriding the relative one.
    pub blowup_ceiling: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            viscosity: 1.0,
            dt: 0.01,
            t_end: 1.0,
            snapshot_interval: 0.1,
            snapshot_times: None,
            nonlinear_form: NonlinearForm::SkewSymmetric,
            dealias: true,
            nonlinear: true,
            cfl: 0.5,
            blowup_factor: 1e6,
            blowup_norm: 4.0,
            blowup_ceiling: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.viscosity > 0.0 && self.viscosity.is_finite()) {
            return invalid("viscosity must be positive");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return invalid("t_end must be finite and non-negative");
        }
        match &self.snapshot_times {
            Some(ts) => {
                if ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[1] <= w[0]) {
                    return invalid("snapshot_times must be finite and strictly increasing");
                }
            }
            None => {
                if !(self.snapshot_interval >= self.dt) {
                    return invalid("snapshot_interval must be >= dt");
                }
            }
        }
        if !(self.cfl > 0.0) {
            return invalid("cfl must be positive");
        }
        if !(self.blowup_factor > 1.0) || !(self.blowup_norm >= 1.0) {
            return invalid("blow-up guard needs factor > 1 and norm exponent >= 1");
        }
        Ok(())
    }
}

/// Advective step bound `cfl·Δx / max|u|` (infinite for u = 0).
pub fn advise_dt(u: &VectorField, cfl: f64) -> f64 {
    let m = u.max_abs();
    if m == 0.0 {
        f64::INFINITY
    } else {
        cfl * u.grid().spacing() / m
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: VectorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Escaped { t: f64, norm: f64, ceiling: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub scenario: String,
    pub snapshots: Vec<Snapshot>,
    pub records: Vec<DiagnosticRecord>,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn escaped(&self) -> bool {
        matches!(self.status, RunStatus::Escaped { .. })
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a trajectory always holds its initial datum")
    }
}

#[derive(Debug, Clone)]
pub struct CoupledTrajectory {
    pub v: Trajectory,
    pub w: Trajectory,
    /// Records of u = v + w.
    pub sum_records: Vec<DiagnosticRecord>,
}

type Coeffs = Vec<Vec<Complex64>>;

struct Integrator<'a> {
    cfg: &'a SolverConfig,
    grid: Grid,
    tables: EtdTables,
}

impl<'a> Integrator<'a> {
    fn new(grid: Grid, cfg: &'a SolverConfig) -> Self {
        Self {
            cfg,
            grid,
            tables: EtdTables::new(&grid, cfg.viscosity, cfg.dt),
        }
    }

    /// F = −ℙB for each part: [u] → [F(u)]; [v, w] → [F(v), −ℙB(2v+w, w)].
    fn forcing(&self, parts: &[VectorField]) -> Vec<Coeffs> {
        let zero =
            || vec![vec![Complex64::new(0.0, 0.0); self.grid.spectral_len()]; self.grid.dim()];
        if !self.cfg.nonlinear {
            return parts.iter().map(|_| zero()).collect();
        }
        let form = self.cfg.nonlinear_form;
        let neg = |mut c: Coeffs| {
            c.iter_mut().flatten().for_each(|x| *x = -*x);
            c
        };
        let mut out = vec![neg(nonlinear::bilinear_coeffs(
            &parts[0],
            &parts[0],
            form,
            self.cfg.dealias,
        ))];
        if let Some(w) = parts.get(1) {
            let a = parts[0].lincomb(2.0, w, 1.0).expect("same grid");
            out.push(neg(nonlinear::bilinear_coeffs(
                &a,
                w,
                form,
                self.cfg.dealias,
            )));
        }
        out
    }

    /// ∂_t u = νΔu + F as a field (for the balance diagnostics).
    fn time_derivative(&self, u: &VectorField, f: &Coeffs) -> VectorField {
        let modes = self.grid.modes();
        let nu = self.cfg.viscosity;
        let c = (0..self.grid.dim())
            .map(|a| {
                let uc = u.component(a).coeffs();
                (0..uc.len())
                    .map(|m| -nu * modes.k_op_sq(m) * uc[m] + f[a][m])
                    .collect()
            })
            .collect();
        VectorField::from_coeffs(self.grid, c).expect("same grid")
    }

    /// One ETDRK2 step of size h. Returns the new parts and ∫‖∇·‖₂² over the
    /// step for each part (and for their sum when there are two).
    fn step(
        &mut self,
        parts: &[VectorField],
        f0: &[Coeffs],
        h: f64,
    ) -> (Vec<VectorField>, Vec<f64>) {
        if h != self.tables.h {
            self.tables = EtdTables::new(&self.grid, self.cfg.viscosity, h);
        }
        let modes = self.grid.modes();
        let tab = &self.tables;
        let stage: Vec<VectorField> = parts
            .iter()
            .zip(f0)
            .map(|(u, f)| {
                let c = (0..self.grid.dim())
                    .map(|a| {
                        let uc = u.component(a).coeffs();
                        (0..uc.len())
                            .map(|m| {
                                let s = modes.index_sq[m] as usize;
                                uc[m] * tab.decay[s] + f[a][m] * tab.p1[s]
                            })
                            .collect()
                    })
                    .collect();
                VectorField::from_coeffs(self.grid, c).expect("same grid")
            })
            .collect();
        let f1 = self.forcing(&stage);
        let tab = &self.tables;
        let mut next = Vec::with_capacity(parts.len());
        for (i, a_field) in stage.iter().enumerate() {
            let mut c: Coeffs = (0..self.grid.dim())
                .map(|a| {
                    let ac = a_field.component(a).coeffs();
                    (0..ac.len())
                        .map(|m| {
                            ac[m] + (f1[i][a][m] - f0[i][a][m]) * tab.p2[modes.index_sq[m] as usize]
                        })
                        .collect()
                })
                .collect();
            leray_in_place(&self.grid, &mut c);
            next.push(
                VectorField::from_coeffs(self.grid, c)
                    .expect("same grid")
                    .with_flag(true),
            );
        }
        let vol = self.grid.volume();
        let integral = |pick: &dyn Fn(usize, usize) -> (Complex64, Complex64, Complex64)| -> f64 {
            let mut total = 0.0;
            for m in 0..modes.len() {
                let k2 = modes.k_op_sq(m);
                if k2 == 0.0 {
                    continue;
                }
                let s = modes.index_sq[m] as usize;
                let mut e = 0.0;
                for a in 0..self.grid.dim() {
                    let (u0, n0, n1) = pick(a, m);
                    e += tab.mode_energy_integral(s, u0, n0, n1);
                }
                total += modes.weight[m] * k2 * e;
            }
            total * vol
        };
        let mut ints: Vec<f64> = (0..parts.len())
            .map(|i| {
                integral(&|a, m| (parts[i].component(a).coeffs()[m], f0[i][a][m], f1[i][a][m]))
            })
            .collect();
        if parts.len() == 2 {
            ints.push(integral(&|a, m| {
                (
                    parts[0].component(a).coeffs()[m] + parts[1].component(a).coeffs()[m],
                    f0[0][a][m] + f0[1][a][m],
                    f1[0][a][m] + f1[1][a][m],
                )
            }));
        }
        (next, ints)
    }
}

/// One step of size `config.dt` from a snapshot.
pub fn step(snapshot: &Snapshot, config: &SolverConfig) -> Result<Snapshot> {
    config.validate()?;
    let mut integ = Integrator::new(*snapshot.u.grid(), config);
    let parts = [snapshot.u.clone()];
    let f0 = integ.forcing(&parts);
    let (mut next, _) = integ.step(&parts, &f0, config.dt);
    let u = next.remove(0);
    let t = snapshot.t + config.dt;
    if !u.all_finite() {
        return Err(Error::NumericalFailure {
            t,
            detail: "non-finite velocity after step".into(),
        });
    }
    Ok(Snapshot { t, u })
}

fn snapshot_targets(cfg: &SolverConfig, t0: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = match &cfg.snapshot_times {
        Some(list) => list
            .iter()
            .copied()
            .filter(|&t| t > t0 && t < cfg.t_end)
            .collect(),
        None => {
            let mut v = Vec::new();
            let mut j = 1u64;
            loop {
                let t = t0 + j as f64 * cfg.snapshot_interval;
                if t >= cfg.t_end * (1.0 - 1e-12) {
                    break;
                }
                v.push(t);
                j += 1;
            }
            v
        }
    };
    if cfg.t_end > t0 {
        ts.push(cfg.t_end);
    }
    ts
}

struct DriveOutput {
    snapshots: Vec<Vec<Snapshot>>,
    records: Vec<Vec<DiagnosticRecord>>,
    sum_records: Vec<DiagnosticRecord>,
    status: RunStatus,
}

fn ensure_solenoidal(u: &VectorField, name: &str) -> Result<()> {
    if !u.is_solenoidal() && u.divergence_residual() > 1e-10 {
        return invalid(format!("{name} is not solenoidal"));
    }
    Ok(())
}

fn drive(
    parts: Vec<VectorField>,
    t0: f64,
    grad_int0: &[f64],
    cfg: &SolverConfig,
    mon: &MonitorConfig,
) -> Result<DriveOutput> {
    cfg.validate()?;
    mon.validate()?;
    let grid = *parts[0].grid();
    let coupled = parts.len() == 2;
    let mut integ = Integrator::new(grid, cfg);
    let total = |ps: &[VectorField]| {
        if coupled {
            ps[0].add(&ps[1]).expect("same grid")
        } else {
            ps[0].clone()
        }
    };
    let u_init = total(&parts);
    let ceiling = cfg
        .blowup_ceiling
        .unwrap_or(cfg.blowup_factor * lp_norm(&u_init, cfg.blowup_norm)?);
    let targets = snapshot_targets(cfg, t0);

    let mut parts = parts;
    let mut t = t0;
    let mut gint: Vec<f64> = grad_int0.to_vec();
    gint.resize(if coupled { 3 } else { 1 }, 0.0);
    let mut out = DriveOutput {
        snapshots: parts
            .iter()
            .map(|p| vec![Snapshot { t, u: p.clone() }])
            .collect(),
        records: vec![Vec::new(); parts.len()],
        sum_records: Vec::new(),
        status: RunStatus::Completed,
    };
    let mut next_target = 0usize;
    let mut k = 0usize;
    let mut warned = false;

    let record = |integ: &Integrator,
                  ps: &[VectorField],
                  f: Option<&[Coeffs]>,
                  t: f64,
                  gint: &[f64],
                  out: &mut DriveOutput|
     -> Result<()> {
        for (i, p) in ps.iter().enumerate() {
            let dudt = match f {
                Some(f) if mon.balance => Some(integ.time_derivative(p, &f[i])),
                _ => None,
            };
            let m = if mon.balance && dudt.is_none() {
                MonitorConfig {
                    balance: false,
                    ..mon.clone()
                }
            } else {
                mon.clone()
            };
            out.records[i].push(compute_record(p, t, &m, gint[i], dudt.as_ref())?);
        }
        if coupled {
            let m = MonitorConfig {
                balance: false,
                ..mon.clone()
            };
            out.sum_records
                .push(compute_record(&total(ps), t, &m, gint[2], None)?);
        }
        Ok(())
    };

    loop {
        let done = next_target >= targets.len();
        let due = k % mon.stride == 0 || done;
        if done {
            let f = if mon.balance {
                Some(integ.forcing(&parts))
            } else {
                None
            };
            if due {
                record(&integ, &parts, f.as_deref(), t, &gint, &mut out)?;
            }
            break;
        }
        let f0 = integ.forcing(&parts);
        if due {
            record(&integ, &parts, Some(&f0), t, &gint, &mut out)?;
        }
        let target = targets[next_target];
        let (h, hit) = if target - (t + cfg.dt) <= 1e-9 * cfg.dt {
            (target - t, true)
        } else {
            (cfg.dt, false)
        };
        let u_now = total(&parts);
        let bound = advise_dt(&u_now, cfg.cfl);
        if h > bound && !warned {
            log::warn!("dt = {h:e} exceeds the advective bound {bound:e} at t = {t}");
            warned = true;
        }
        let (next, ints) = integ.step(&parts, &f0, h);
        parts = next;
        t = if hit { target } else { t + h };
        gint.iter_mut().zip(&ints).for_each(|(g, i)| *g += i);
        k += 1;

        if parts.iter().any(|p| {
            p.components()
                .iter()
                .any(|c| c.values().iter().any(|v| v.is_nan()))
        }) {
            return Err(Error::NumericalFailure {
                t,
                detail: format!("NaN in velocity after step {k}"),
            });
        }
        let u_now = total(&parts);
        let norm = lp_norm(&u_now, cfg.blowup_norm)?;
        if !norm.is_finite() || norm > ceiling {
            out.status = RunStatus::Escaped { t, norm, ceiling };
            if norm.is_finite() {
                record(&integ, &parts, None, t, &gint, &mut out)?;
            }
            for (s, p) in out.snapshots.iter_mut().zip(&parts) {
                s.push(Snapshot { t, u: p.clone() });
            }
            log::warn!(
                "escaped at t = {t}: ‖u‖_{} = {norm:e} > {ceiling:e}",
                cfg.blowup_norm
            );
            break;
        }
        if hit {
            for (s, p) in out.snapshots.iter_mut().zip(&parts) {
                s.push(Snapshot { t, u: p.clone() });
            }
            next_target += 1;
        }
    }
    Ok(out)
}

/// Integrates from `u0` at t = 0 to `config.t_end`.
pub fn run(u0: &VectorField, config: &SolverConfig, monitor: &MonitorConfig) -> Result<Trajectory> {
    run_from(u0, 0.0, 0.0, config, monitor)
}

/// Integrates from `u0` at time `t0`, with the dissipation integral already
/// accumulated up to `t0` (used when resuming).
pub fn run_from(
    u0: &VectorField,
    t0: f64,
    grad_int0: f64,
    config: &SolverConfig,
    monitor: &MonitorConfig,
) -> Result<Trajectory> {
    ensure_solenoidal(u0, "initial datum")?;
    let mut o = drive(vec![u0.clone()], t0, &[grad_int0], config, monitor)?;
    Ok(Trajectory {
        config: config.clone(),
        scenario: String::new(),
        snapshots: o.snapshots.remove(0),
        records: o.records.remove(0),
        status: o.status,
    })
}

/// Integrates v under the Navier–Stokes equations and w under the perturbed
/// system driven by the instantaneous v; v + w then solves the equations from
/// v0 + w0. The blow-up guard watches v + w.
pub fn run_coupled(
    v0: &VectorField,
    w0: &VectorField,
    config: &SolverConfig,
    monitor: &MonitorConfig,
) -> Result<CoupledTrajectory> {
    check_same(v0.grid(), w0.grid())?;
    ensure_solenoidal(v0, "v0")?;
    ensure_solenoidal(w0, "w0")?;
    let mut o = drive(
        vec![v0.clone(), w0.clone()],
        0.0,
        &[0.0, 0.0, 0.0],
        config,
        monitor,
    )?;
    let traj = |snapshots, records| Trajectory {
        config: config.clone(),
        scenario: String::new(),
        snapshots,
        records,
        status: o.status,
    };
    let v = traj(o.snapshots.remove(0), o.records.remove(0));
    let w = traj(o.snapshots.remove(0), o.records.remove(0));
    Ok(CoupledTrajectory {
        v,
        w,
        sum_records: o.sum_records,
    })
}
