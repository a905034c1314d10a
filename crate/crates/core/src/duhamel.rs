//! Mild-solution oracle: the heat semigroup, Picard iteration of
//! u(t) = e^{tνΔ}u₀ − ∫₀ᵗ e^{(t−s)νΔ}ℙ∇·(u⊗u) ds, and log-log fits of
//! smoothing rates near t = 0.
//!
//! The Duhamel integral uses the composite trapezoid rule with the semigroup
//! factor applied exactly, via the recursion
//! T_i = E·T_{i−1} + (h/2)(E·F_{i−1} + F_i), E = e^{−ν|k|²h}.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::monitor::lp_norm;
use crate::solver::{bilinear_coeffs, nonlinear_term, NonlinearForm, Snapshot, SolverConfig};
use crate::spectral::{derivative, Grid, ScalarField, VectorField};

type Coeffs = Vec<Vec<Complex64>>;

/// Sup-norm at which an iterate counts as diverged (well below √f64::MAX).
const DIVERGENCE_GUARD: f64 = 1e100;

/// e^{tνΔ}u: every mode damped by e^{−ν|k|²t}.
pub fn heat_semigroup(u: &VectorField, t: f64, viscosity: f64) -> Result<VectorField> {
    if !(t >= 0.0) {
        return invalid(format!("semigroup time {t} must be non-negative"));
    }
    if t == 0.0 {
        return Ok(u.clone());
    }
    let grid = *u.grid();
    let decay = decay_table(&grid, viscosity, t);
    let modes = grid.modes();
    let comps = u
        .components()
        .iter()
        .map(|c| c.map_coeffs(|m, z| z * decay[modes.index_sq[m] as usize]))
        .collect();
    Ok(VectorField::from_components(comps)?.with_flag(u.is_solenoidal()))
}

fn decay_table(grid: &Grid, viscosity: f64, t: f64) -> Vec<f64> {
    let ku2 = grid.k_unit() * grid.k_unit();
    (0..=grid.modes().max_index_sq)
        .map(|m| (-viscosity * ku2 * m as f64 * t).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Number of trapezoid intervals M (even, ≥ 8); nodes t_i = i·t_end/M.
    pub time_nodes: usize,
    pub max_iter: usize,
    /// Convergence threshold on sup_i ‖u^{(m+1)}(t_i) − u^{(m)}(t_i)‖_p.
    pub tol: f64,
    pub p_norm: f64,
    pub viscosity: f64,
    pub nonlinear_form: NonlinearForm,
    pub dealias: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_end: 0.05,
            time_nodes: 32,
            max_iter: 50,
            tol: 1e-10,
            p_norm: 4.0,
            viscosity: 1.0,
            nonlinear_form: NonlinearForm::SkewSymmetric,
            dealias: true,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid("t_end must be positive");
        }
        if self.time_nodes < 8 || self.time_nodes % 2 != 0 {
            return invalid("time_nodes must be even and >= 8");
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be >= 1");
        }
        if !(self.tol > 0.0) {
            return invalid("tol must be positive");
        }
        if !(self.p_norm >= 2.0) {
            return invalid("p_norm must be >= 2");
        }
        if !(self.viscosity > 0.0) {
            return invalid("viscosity must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub iterations: usize,
    pub converged: bool,
    pub final_distance: f64,
    /// Sup-in-time distance between successive iterates.
    pub distances: Vec<f64>,
    /// distances[m]/distances[m−1].
    pub contraction_ratios: Vec<f64>,
    pub times: Vec<f64>,
    /// The last iterate at the time nodes.
    pub samples: Vec<VectorField>,
}

impl PicardResult {
    pub fn worst_ratio(&self) -> f64 {
        self.contraction_ratios.iter().copied().fold(0.0, f64::max)
    }
}

struct Duhamel<'a> {
    cfg: &'a PicardConfig,
    grid: Grid,
    h: f64,
    /// e^{−ν|k|²h} by |index|².
    step_decay: Vec<f64>,
    /// e^{tνΔ}u₀ at the nodes.
    free: Vec<Coeffs>,
}

impl Duhamel<'_> {
    fn forcing(&self, u: &VectorField) -> Coeffs {
        let mut c = bilinear_coeffs(u, u, self.cfg.nonlinear_form, self.cfg.dealias);
        c.iter_mut().flatten().for_each(|z| *z = -*z);
        c
    }

    /// e^{tΔ}u₀ + ∫₀ᵗ e^{(t−s)Δ}F(s) ds at every node, for forcing values F_i.
    fn integrate(&self, f: &[Coeffs]) -> Vec<Coeffs> {
        let modes = self.grid.modes();
        let dim = self.grid.dim();
        let len = self.grid.spectral_len();
        let mut acc: Coeffs = vec![vec![Complex64::new(0.0, 0.0); len]; dim];
        let mut out = Vec::with_capacity(f.len());
        for i in 0..f.len() {
            if i > 0 {
                for a in 0..dim {
                    for m in 0..len {
                        let e = self.step_decay[modes.index_sq[m] as usize];
                        acc[a][m] =
                            e * acc[a][m] + 0.5 * self.h * (e * f[i - 1][a][m] + f[i][a][m]);
                    }
                }
            }
            let node: Coeffs = (0..dim)
                .map(|a| (0..len).map(|m| self.free[i][a][m] + acc[a][m]).collect())
                .collect();
            out.push(node);
        }
        out
    }

    fn field(&self, c: Coeffs) -> VectorField {
        VectorField::from_coeffs(self.grid, c)
            .expect("grid-sized")
            .with_flag(true)
    }
}

/// Picard iteration from u^{(0)}(t) = e^{tνΔ}u₀. Failure to contract within
/// `max_iter` iterates is reported through `converged`, not as an error.
pub fn picard_solve(u0: &VectorField, cfg: &PicardConfig) -> Result<PicardResult> {
    cfg.validate()?;
    if !u0.is_solenoidal() && u0.divergence_residual() > 1e-10 {
        return invalid("initial datum is not solenoidal");
    }
    let grid = *u0.grid();
    let m = cfg.time_nodes;
    let h = cfg.t_end / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let free = times
        .par_iter()
        .map(|&t| {
            heat_semigroup(u0, t, cfg.viscosity)
                .map(|f| f.components().iter().map(|c| c.coeffs().to_vec()).collect())
        })
        .collect::<Result<Vec<Coeffs>>>()?;
    let d = Duhamel {
        cfg,
        grid,
        h,
        step_decay: decay_table(&grid, cfg.viscosity, h),
        free,
    };

    let mut current: Vec<VectorField> = d.free.iter().map(|c| d.field(c.clone())).collect();
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let f: Vec<Coeffs> = current.par_iter().map(|u| d.forcing(u)).collect();
        let next: Vec<VectorField> = d.integrate(&f).into_iter().map(|c| d.field(c)).collect();
        let dist = next
            .par_iter()
            .zip(&current)
            .map(|(a, b)| lp_norm(&a.sub(b).expect("same grid"), cfg.p_norm))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if let Some(&prev) = distances.last() {
            ratios.push(if prev > 0.0 { dist / prev } else { 0.0 });
        }
        distances.push(dist);
        current = next;
        if dist <= cfg.tol {
            converged = true;
            break;
        }
        // Diverging iterates are abandoned before their quadratic forcing
        // can overflow.
        if !dist.is_finite() || current.iter().any(|u| !(u.max_abs() < DIVERGENCE_GUARD)) {
            break;
        }
    }
    Ok(PicardResult {
        iterations: distances.len(),
        converged,
        final_distance: *distances.last().unwrap_or(&0.0),
        distances,
        contraction_ratios: ratios,
        times,
        samples: current,
    })
}

/// L² norm at each node of u(t) − e^{tΔ}u₀ − ∫₀ᵗ e^{(t−s)Δ}F(u(s)) ds, with
/// the same quadrature as the iteration.
pub fn duhamel_residual(
    u0: &VectorField,
    result: &PicardResult,
    cfg: &PicardConfig,
) -> Result<Vec<f64>> {
    let grid = *u0.grid();
    let h = cfg.t_end / cfg.time_nodes as f64;
    let free = result
        .times
        .iter()
        .map(|&t| {
            heat_semigroup(u0, t, cfg.viscosity)
                .map(|f| f.components().iter().map(|c| c.coeffs().to_vec()).collect())
        })
        .collect::<Result<Vec<Coeffs>>>()?;
    let d = Duhamel {
        cfg,
        grid,
        h,
        step_decay: decay_table(&grid, cfg.viscosity, h),
        free,
    };
    let f: Vec<Coeffs> = result.samples.par_iter().map(|u| d.forcing(u)).collect();
    d.integrate(&f)
        .into_iter()
        .zip(&result.samples)
        .map(|(c, u)| Ok(d.field(c).sub(u)?.energy_spectral().sqrt()))
        .collect()
}

/// Halves `t_end` until the iteration converges, at most `max_halvings` times.
/// Returns the result and the horizon that was used.
pub fn picard_with_halving(
    u0: &VectorField,
    cfg: &PicardConfig,
    max_halvings: usize,
) -> Result<(PicardResult, f64)> {
    let mut c = cfg.clone();
    let mut res = picard_solve(u0, &c)?;
    for _ in 0..max_halvings {
        if res.converged {
            break;
        }
        c.t_end *= 0.5;
        log::info!(
            "Picard iteration did not contract; retrying with t_end = {}",
            c.t_end
        );
        res = picard_solve(u0, &c)?;
    }
    Ok((res, c.t_end))
}

/// σ = k + |α|/2 + (N/2)(1/p − 1/q): the rate at which ‖∂_t^k∂_x^α u(t)‖_q may
/// blow up as t → 0 for data in L^p.
pub fn smoothing_exponent(dim: usize, p: f64, q: f64, time_order: u32, space_order: usize) -> f64 {
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    time_order as f64 + space_order as f64 / 2.0 + dim as f64 / 2.0 * (1.0 / p - inv_q)
}

/// ∂_t^k∂_x^α: `time` ∈ {0, 1}; `space[a]` derivatives along axis a.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeOrder {
    pub time: u32,
    pub space: Vec<usize>,
}

impl DerivativeOrder {
    pub fn space_order(&self) -> usize {
        self.space.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Least-squares slope of log‖·‖_q against −log t.
    pub sigma_hat: f64,
    pub sigma_theory: f64,
    pub points: usize,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Least-squares slope and intercept of log y against −log t, plus R².
pub fn fit_log_slope(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            t.len().min(y.len())
        )));
    }
    if t.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Fit(
            "times and values must be positive and finite".into(),
        ));
    }
    let x: Vec<f64> = t.iter().map(|t| -t.ln()).collect();
    let z: Vec<f64> = y.iter().map(|y| y.ln()).collect();
    let n = x.len() as f64;
    let (mx, mz) = (x.iter().sum::<f64>() / n, z.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxz: f64 = x.iter().zip(&z).map(|(a, b)| (a - mx) * (b - mz)).sum();
    let szz: f64 = z.iter().map(|v| (v - mz).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return Err(Error::Fit("sample times do not span an interval".into()));
    }
    let slope = sxz / sxx;
    let r2 = if szz == 0.0 {
        1.0
    } else {
        sxz * sxz / (sxx * szz)
    };
    Ok((slope, mz - slope * mx, r2))
}

/// ‖∂_t^k∂_x^α u‖_q for one snapshot; ∂_t u is taken from the equation.
pub fn derivative_norm(
    u: &VectorField,
    order: &DerivativeOrder,
    q: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if order.time > 1 {
        return invalid("time derivatives beyond first order are not supported");
    }
    if order.space.len() > u.dim() {
        return invalid("multi-index longer than the dimension");
    }
    let mut f = u.clone();
    if order.time == 1 {
        let modes = u.grid().modes();
        let nu = cfg.viscosity;
        let diff: Vec<ScalarField> = u
            .components()
            .iter()
            .map(|c| c.map_coeffs(|m, z| -nu * modes.k_op_sq(m) * z))
            .collect();
        let diff = VectorField::from_components(diff)?;
        f = if cfg.nonlinear {
            diff.sub(&nonlinear_term(u, cfg.nonlinear_form, cfg.dealias))?
        } else {
            diff
        };
    }
    for (axis, &count) in order.space.iter().enumerate() {
        for _ in 0..count {
            let comps = f.components().iter().map(|c| derivative(c, axis)).collect();
            f = VectorField::from_components(comps)?;
        }
    }
    if q.is_infinite() {
        Ok(f.max_abs())
    } else {
        lp_norm(&f, q)
    }
}

fn window_samples(
    snapshots: &[Snapshot],
    cfg: &SolverConfig,
    q: f64,
    order: &DerivativeOrder,
    window: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let picked: Vec<&Snapshot> = snapshots
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1 && s.t > 0.0)
        .collect();
    if picked.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} snapshots inside the fit window",
            picked.len()
        )));
    }
    let t: Vec<f64> = picked.iter().map(|s| s.t).collect();
    let y = picked
        .par_iter()
        .map(|s| derivative_norm(&s.u, order, q, cfg))
        .collect::<Result<Vec<f64>>>()?;
    Ok((t, y))
}

fn rate_fit(
    dim: usize,
    p: f64,
    q: f64,
    order: &DerivativeOrder,
    t: &[f64],
    y: &[f64],
) -> Result<RateFit> {
    let (slope, intercept, r2) = fit_log_slope(t, y)?;
    Ok(RateFit {
        sigma_hat: slope,
        sigma_theory: smoothing_exponent(dim, p, q, order.time, order.space_order()),
        points: t.len(),
        intercept,
        r_squared: r2,
        t_min: t[0],
        t_max: *t.last().expect("non-empty"),
    })
}

/// Fits σ̂ from the snapshots whose times fall in `window` (inclusive).
pub fn smoothing_rate_fit(
    snapshots: &[Snapshot],
    cfg: &SolverConfig,
    p: f64,
    q: f64,
    order: &DerivativeOrder,
    window: (f64, f64),
) -> Result<RateFit> {
    let (t, y) = window_samples(snapshots, cfg, q, order, window)?;
    rate_fit(snapshots[0].u.dim(), p, q, order, &t, &y)
}

/// Ensemble variant: fits the geometric mean of the norms over several runs
/// sharing the same snapshot times. Averaging log‖·‖ removes most of the
/// run-to-run scatter of sup norms of random data.
pub fn smoothing_rate_fit_ensemble(
    runs: &[&[Snapshot]],
    cfg: &SolverConfig,
    p: f64,
    q: f64,
    order: &DerivativeOrder,
    window: (f64, f64),
) -> Result<RateFit> {
    let Some(first) = runs.first() else {
        return Err(Error::Fit("empty ensemble".into()));
    };
    let (t, mut logs) = window_samples(first, cfg, q, order, window)?;
    logs.iter_mut().for_each(|y| *y = y.ln());
    for run in &runs[1..] {
        let (ti, yi) = window_samples(run, cfg, q, order, window)?;
        if ti.len() != t.len()
            || ti
                .iter()
                .zip(&t)
                .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::Fit(
                "ensemble members have different snapshot times".into(),
            ));
        }
        logs.iter_mut().zip(&yi).for_each(|(l, y)| *l += y.ln());
    }
    let n = runs.len() as f64;
    let y: Vec<f64> = logs.iter().map(|l| (l / n).exp()).collect();
    rate_fit(first[0].u.dim(), p, q, order, &t, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn semigroup_basics() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| [(3.0 * x[1]).sin(), 0.0, 0.0]).unwrap();
        assert_eq!(heat_semigroup(&u, 0.0, 1.0).unwrap(), u);
        let v = heat_semigroup(&u, 0.1, 1.0).unwrap();
        let expect = u.scale((-0.9f64).exp());
        assert!(v.sub(&expect).unwrap().max_abs() < 1e-15);
        assert!(heat_semigroup(&u, -1.0, 1.0).is_err());
    }

    #[test]
    fn exponents_from_formula() {
        assert_eq!(smoothing_exponent(3, 4.0, 4.0, 0, 0), 0.0);
        assert_eq!(smoothing_exponent(3, 4.0, f64::INFINITY, 0, 0), 0.375);
        assert_eq!(smoothing_exponent(3, 4.0, 4.0, 0, 1), 0.5);
        assert_eq!(smoothing_exponent(2, 4.0, 4.0, 1, 0), 1.0);
    }

    #[test]
    fn log_slope_fit() {
        let t: Vec<f64> = (0..6).map(|i| 0.01 * 1.5f64.powi(i)).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * t.powf(-0.3)).collect();
        let (s, _, r2) = fit_log_slope(&t, &y).unwrap();
        assert!((s - 0.3).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!(fit_log_slope(&t[..2], &y[..2]).is_err());
        assert!(fit_log_slope(&[0.1; 4], &[1.0; 4]).is_err());
        assert!(fit_log_slope(&t, &[0.0; 6]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PicardConfig::default().validate().is_ok());
        assert!(PicardConfig {
            time_nodes: 9,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(PicardConfig {
            time_nodes: 6,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(PicardConfig {
            tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
