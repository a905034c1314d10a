//! Families of initial data at a common κ_p(u₀): one run per member, each in
//! its own directory, and a table of C_emp with its spread.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nsap_core::monitor::{family_spread, kappa, FamilyStats, Verdict};
use nsap_core::spectral::write_checkpoint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{IcSpec, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::ic::make_initial;
use crate::output::write_json;
use crate::run::run_scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRow {
    pub member: usize,
    pub label: String,
    pub dir: PathBuf,
    /// κ_p of the rescaled datum.
    pub kappa_p: f64,
    pub c_emp: f64,
    pub verdict: Verdict,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub id: String,
    pub p: f64,
    pub kappa_target: f64,
    pub members: Vec<MemberRow>,
    /// Over the members that did not escape.
    pub spread: FamilyStats,
}

/// The member's scenario with its datum rescaled to κ_p = target.
fn member_config(
    base: &ScenarioConfig,
    ic: &IcSpec,
    i: usize,
    root: &Path,
    p: f64,
    target: f64,
    id: &str,
) -> CliResult<ScenarioConfig> {
    let grid = base.grid.build()?;
    let u = make_initial(ic, grid)?;
    let k = kappa(&u, p)?.value;
    if !(k > 0.0) {
        return Err(CliError::Config(format!(
            "sweep member {i} has kappa_p = 0 and cannot be rescaled"
        )));
    }
    let factor = target / k;
    let dir = root.join(format!("member_{i:02}"));
    let scaled = match ic.clone() {
        IcSpec::TaylorGreen { amplitude } => IcSpec::TaylorGreen {
            amplitude: amplitude * factor,
        },
        IcSpec::RandomSolenoidal {
            amplitude,
            spectrum,
            k0,
            seed,
        } => IcSpec::RandomSolenoidal {
            amplitude: amplitude * factor,
            spectrum,
            k0,
            seed,
        },
        IcSpec::LocalizedBump {
            amplitude,
            radius,
            center,
        } => IcSpec::LocalizedBump {
            amplitude: amplitude * factor,
            radius,
            center,
        },
        IcSpec::FromCheckpoint { .. } => {
            fs::create_dir_all(root.join("inputs"))?;
            let path = root.join("inputs").join(format!("member_{i:02}.ckpt"));
            write_checkpoint(&path, &u.scale(factor), 0.0)?;
            IcSpec::FromCheckpoint { path }
        }
    };
    let mut cfg = base.clone();
    cfg.name = format!("{} member {i}", base.name);
    cfg.ic = scaled;
    cfg.sweep = None;
    cfg.perturbation = None;
    cfg.output.dir = dir;
    cfg.output.checks = vec![id.to_string()];
    if !cfg.monitor.p_set.contains(&p) {
        cfg.monitor.p_set.push(p);
    }
    Ok(cfg)
}

pub fn run_sweep(base: &ScenarioConfig, root: &Path, force: bool) -> CliResult<SweepReport> {
    let Some(sw) = &base.sweep else {
        return Err(CliError::Config("no [sweep] section".into()));
    };
    fs::create_dir_all(root)?;
    let configs = sw
        .members
        .iter()
        .enumerate()
        .map(|(i, ic)| member_config(base, ic, i, root, sw.p, sw.kappa, &sw.id))
        .collect::<CliResult<Vec<_>>>()?;
    // Members are independent and own their directories.
    let rows = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let s = run_scenario(cfg, &cfg.output.dir, force)?;
            let report = s
                .reports
                .iter()
                .find(|r| r.id == sw.id && r.parameters.get("p").map_or(true, |q| *q == sw.p))
                .ok_or_else(|| {
                    CliError::Config(format!("member {i} produced no {} report", sw.id))
                })?;
            let u0 = make_initial(&cfg.ic, cfg.grid.build()?)?;
            Ok(MemberRow {
                member: i,
                label: sw.members[i].label(),
                dir: cfg.output.dir.clone(),
                kappa_p: kappa(&u0, sw.p)?.value,
                c_emp: report.c_emp,
                verdict: report.verdict,
                escaped: s.manifest.escaped,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let c: Vec<f64> = rows
        .iter()
        .filter(|r| !r.escaped)
        .map(|r| r.c_emp)
        .collect();
    let report = SweepReport {
        id: sw.id.clone(),
        p: sw.p,
        kappa_target: sw.kappa,
        members: rows,
        spread: family_spread(&c),
    };
    write_json(&root.join("sweep.json"), &report)?;
    fs::write(root.join("sweep.dat"), table(&report))?;
    Ok(report)
}

pub fn table(r: &SweepReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# id {} p {} kappa_target {}", r.id, r.p, r.kappa_target);
    let _ = writeln!(s, "# member kappa_p c_emp verdict escaped label");
    for m in &r.members {
        let v = serde_json::to_value(m.verdict)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{} {:.12e} {:.6e} {v} {} {}",
            m.member, m.kappa_p, m.c_emp, m.escaped, m.label
        );
    }
    let f = &r.spread;
    let _ = writeln!(
        s,
        "# spread max/min = {:.6} (min {:.6e}, max {:.6e}, {} members)",
        f.spread, f.min, f.max, f.members
    );
    s
}
