//! Descriptive probe of how the integral ∫‖u‖_p^α dt responds to shrinking
//! perturbations of a base datum. Heuristic only; no verdict is issued.

use serde::{Deserialize, Serialize};

use super::exponents::ExponentTable;
use super::norms::lp_norm;
use super::record::{DiagnosticRecord, MonitorConfig};
use super::series::trapezoid;
use crate::error::{invalid, Result};
use crate::solver::{run, run_coupled, SolverConfig};
use crate::spectral::VectorField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    /// The perturbation is 2^{−level}·w₀.
    pub level: u32,
    pub perturbation_norm: f64,
    pub outside_regime: bool,
    pub escaped: bool,
    pub integral: Option<f64>,
    pub rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub p: f64,
    pub alpha: f64,
    pub base_integral: f64,
    pub regime_limit: f64,
    pub entries: Vec<ProbeEntry>,
    /// Relative differences non-increasing along the in-regime levels.
    pub converging: bool,
}

fn alpha_integral(records: &[DiagnosticRecord], p: f64, alpha: f64) -> Option<f64> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Option<Vec<f64>> = records
        .iter()
        .map(|r| r.norm(p).map(|x| x.powf(alpha)))
        .collect();
    y.map(|y| trapezoid(&t, &y))
}

/// Runs the base datum `v0` and coupled runs for 2^{−k}w₀, k = 0..levels.
/// Perturbations with ‖·‖_N above `regime_limit` are marked and skipped.
pub fn stability_probe(
    v0: &VectorField,
    w0: &VectorField,
    levels: u32,
    p: f64,
    regime_limit: f64,
    cfg: &SolverConfig,
    mon: &MonitorConfig,
) -> Result<ProbeReport> {
    let ex = ExponentTable::new(p, v0.dim())?;
    let mut mon = mon.clone();
    if !mon.p_set.contains(&p) {
        mon.p_set.push(p);
    }
    let base = run(v0, cfg, &mon)?;
    let Some(base_integral) = alpha_integral(&base.records, p, ex.alpha) else {
        return invalid("base run lacks the p-norm column");
    };
    let n = v0.dim() as f64;
    let mut entries = Vec::new();
    for level in 0..=levels {
        let w = w0.scale(0.5f64.powi(level as i32));
        let wn = lp_norm(&w, n)?;
        if wn > regime_limit {
            entries.push(ProbeEntry {
                level,
                perturbation_norm: wn,
                outside_regime: true,
                escaped: false,
                integral: None,
                rel_diff: None,
            });
            continue;
        }
        let c = run_coupled(v0, &w, cfg, &mon)?;
        let escaped = c.v.escaped();
        let integral = alpha_integral(&c.sum_records, p, ex.alpha);
        let rel_diff = integral.map(|i| {
            if base_integral == 0.0 {
                i.abs()
            } else {
                (i - base_integral).abs() / base_integral
            }
        });
        entries.push(ProbeEntry {
            level,
            perturbation_norm: wn,
            outside_regime: false,
            escaped,
            integral,
            rel_diff,
        });
    }
    let diffs: Vec<f64> = entries
        .iter()
        .filter(|e| !e.outside_regime && !e.escaped)
        .filter_map(|e| e.rel_diff)
        .collect();
    let converging = diffs.windows(2).all(|w| w[1] <= w[0]);
    Ok(ProbeReport {
        p,
        alpha: ex.alpha,
        base_integral,
        regime_limit,
        entries,
        converging,
    })
}
