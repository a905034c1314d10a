use std::path::Path;

use nsap_core::monitor::{scaling_test, ScalingReport};

use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::ic::make_initial;

/// κ_p and ‖·‖_N before and after u ↦ λu(λx) for the scenario's initial datum,
/// for each requested p (the monitor p-set when none is given).
pub fn cmd_scale_test(config: &Path, lambda: f64, p: &[f64]) -> CliResult<Vec<ScalingReport>> {
    let cfg = ScenarioConfig::load(config)?;
    let u0 = make_initial(&cfg.ic, cfg.grid.build()?)?;
    let ps = if p.is_empty() {
        cfg.monitor.p_set.clone()
    } else {
        p.to_vec()
    };
    let reports = ps
        .iter()
        .map(|&p| scaling_test(&u0, lambda, p))
        .collect::<nsap_core::Result<Vec<_>>>()?;
    for r in &reports {
        println!(
            "lambda={} p={}: kappa delta {:.3e}, |.|_{} delta {:.3e}, |.|_2 ratio {:.12} (expected {:.12}, delta {:.3e}) -> {}",
            r.lambda,
            r.p,
            r.kappa_rel_delta,
            r.dim,
            r.critical_rel_delta,
            r.l2_ratio,
            r.l2_expected,
            r.l2_rel_delta,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(reports)
}
