//! Time-series helpers shared by the checks: column extraction, second-order
//! differentiation on non-uniform samples, trapezoid integrals.

use super::record::DiagnosticRecord;
use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// Diagnostic series of one run plus the run parameters the checks need.
#[derive(Debug, Clone, Copy)]
pub struct RunSeries<'a> {
    pub records: &'a [DiagnosticRecord],
    pub dim: usize,
    pub viscosity: f64,
    pub box_length: f64,
    /// Nominal step size (for the cadence test of the balance checks).
    pub dt: f64,
    pub escaped: bool,
}

impl<'a> RunSeries<'a> {
    pub fn from_trajectory(traj: &'a Trajectory) -> Self {
        let grid = traj.snapshots[0].u.grid();
        Self {
            records: &traj.records,
            dim: grid.dim(),
            viscosity: traj.config.viscosity,
            box_length: grid.box_length(),
            dt: traj.config.dt,
            escaped: traj.escaped(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn norm(&self, q: f64) -> Result<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r.norm(q).ok_or_else(|| missing(format!("l{q}"))))
            .collect()
    }

    pub fn dissipation(&self, p: f64) -> Result<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r.dissipation(p).ok_or_else(|| missing(format!("D_{p}"))))
            .collect()
    }

    /// Slowest Stokes decay rate ν(2π/L)² of a mean-free field.
    pub fn stokes_rate(&self) -> f64 {
        let k1 = 2.0 * std::f64::consts::PI / self.box_length;
        self.viscosity * k1 * k1
    }

    /// Time exponent r of the space-time norm L^r_t L^q_x paired with L^p data:
    /// 2/r + N/q = N/p. Infinite for q = p.
    pub fn mixed_exponent(&self, p: f64, q: f64) -> Result<f64> {
        if !(p > 0.0) || !(q >= p) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < p <= q, got p={p}, q={q}"
            )));
        }
        let n = self.dim as f64;
        Ok(2.0 / (n / p - n / q))
    }

    /// (∫‖u‖_q^r dt)^{1/r} over the recorded window by the trapezoid rule,
    /// with r from [`Self::mixed_exponent`]; the sup when r is infinite.
    /// Informational: no threshold is attached to it.
    pub fn mixed_norm(&self, p: f64, q: f64) -> Result<(f64, f64)> {
        let r = self.mixed_exponent(p, q)?;
        let y = self.norm(q)?;
        if r.is_infinite() {
            return Ok((r, y.iter().copied().fold(0.0, f64::max)));
        }
        let yr: Vec<f64> = y.iter().map(|v| v.powf(r)).collect();
        Ok((r, trapezoid(&self.times(), &yr).powf(1.0 / r)))
    }

    pub fn first(&self) -> Result<&DiagnosticRecord> {
        self.records
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty diagnostic series".into()))
    }

    pub fn last(&self) -> Result<&DiagnosticRecord> {
        self.records
            .last()
            .ok_or_else(|| Error::InvalidParameter("empty diagnostic series".into()))
    }
}

pub(crate) fn missing(col: String) -> Error {
    Error::InvalidParameter(format!("missing column {col}"))
}

/// dy/dt at every sample: three-point second-order stencils (one-sided at
/// the ends) on possibly non-uniform times; two points give the secant.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    match n {
        0 => vec![],
        1 => vec![0.0],
        2 => {
            let d = (y[1] - y[0]) / (t[1] - t[0]);
            vec![d, d]
        }
        _ => (0..n)
            .map(|i| {
                let j = i.clamp(1, n - 2);
                let (t0, t1, t2) = (t[j - 1], t[j], t[j + 1]);
                let (y0, y1, y2) = (y[j - 1], y[j], y[j + 1]);
                // Derivative of the interpolating quadratic at t[i].
                let x = t[i];
                let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
                let l1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
                let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
                y0 * l0 + y1 * l1 + y2 * l2
            })
            .collect(),
    }
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    cumulative_trapezoid(t, y).last().copied().unwrap_or(0.0)
}

pub fn running_max(y: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    y.iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}
