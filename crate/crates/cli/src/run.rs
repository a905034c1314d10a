//! `run`, `resume` and `check`.

use std::fs;
use std::path::{Path, PathBuf};

use nsap_core::monitor::{DiagnosticRecord, InequalityReport};
use nsap_core::solver::{run, run_coupled, run_from, RunStatus, Snapshot, Trajectory};
use nsap_core::spectral::write_checkpoint;

use crate::check::{evaluate, summary_line, Available};
use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::ic::make_initial;
use crate::output::*;

/// What a finished scenario left behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub reports: Vec<InequalityReport>,
}

impl RunSummary {
    pub fn into_result(self) -> CliResult<Self> {
        match self.manifest.outcome {
            Outcome::Escaped { t, norm, ceiling } => Err(CliError::Escaped { t, norm, ceiling }),
            _ => Ok(self),
        }
    }
}

fn prepare_dir(dir: &Path, force: bool) -> CliResult<()> {
    if dir.join(MANIFEST_FILE).exists() {
        if !force {
            return Err(CliError::Config(format!(
                "{} already holds a run; use --force to replace it or --resume to continue",
                dir.display()
            )));
        }
        for sub in [CHECKPOINT_DIR, REPORT_DIR, SERIES_DIR] {
            if dir.join(sub).is_dir() {
                fs::remove_dir_all(dir.join(sub))?;
            }
        }
        for f in [
            MANIFEST_FILE,
            SCENARIO_FILE,
            DIAGNOSTICS_FILE,
            V_DIAGNOSTICS_FILE,
            W_DIAGNOSTICS_FILE,
        ] {
            if dir.join(f).exists() {
                fs::remove_file(dir.join(f))?;
            }
        }
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

fn outcome_of(status: RunStatus) -> Outcome {
    match status {
        RunStatus::Completed => Outcome::Completed,
        RunStatus::Escaped { t, norm, ceiling } => Outcome::Escaped { t, norm, ceiling },
    }
}

fn write_checkpoints(
    dir: &Path,
    prefix: &str,
    snaps: &[Snapshot],
    first_index: usize,
) -> CliResult<()> {
    let d = dir.join(CHECKPOINT_DIR);
    fs::create_dir_all(&d)?;
    for (i, s) in snaps.iter().enumerate() {
        write_checkpoint(&d.join(checkpoint_name(prefix, first_index + i)), &s.u, s.t)?;
    }
    Ok(())
}

/// Reports for every configured id and p, computed from the records as read
/// back from disk so that `check` regenerates them bit for bit.
fn configured_reports(
    cfg: &ScenarioConfig,
    dir: &Path,
    escaped: bool,
) -> CliResult<Vec<InequalityReport>> {
    let records = read_records(&dir.join(DIAGNOSTICS_FILE))?;
    let parts = if cfg.perturbation.is_some() {
        Some((
            read_records(&dir.join(V_DIAGNOSTICS_FILE))?,
            read_records(&dir.join(W_DIAGNOSTICS_FILE))?,
        ))
    } else {
        None
    };
    let avail = Available {
        u: series_for(cfg, &records, escaped),
        parts: parts
            .as_ref()
            .map(|(v, w)| (series_for(cfg, v, escaped), series_for(cfg, w, escaped))),
        has_balance: records.first().is_some_and(|r| !r.balance.is_empty()),
    };
    let mut out: Vec<InequalityReport> = Vec::new();
    for id in &cfg.output.checks {
        for &p in &cfg.monitor.p_set {
            for r in evaluate(id, p, &avail)? {
                if !out.iter().any(|o| o.file_stem() == r.file_stem()) {
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

fn finish(
    cfg: &ScenarioConfig,
    dir: &Path,
    mut manifest: RunManifest,
    t_final: f64,
) -> CliResult<RunSummary> {
    let reports = configured_reports(cfg, dir, manifest.escaped)?;
    write_reports(dir, &reports, &mut manifest)?;
    manifest.t_final = t_final;
    manifest.finished_unix = unix_now();
    manifest.finalize(dir)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        manifest,
        reports,
    })
}

fn record_failure(
    cfg: &ScenarioConfig,
    dir: &Path,
    mut manifest: RunManifest,
    e: &CliError,
) -> CliResult<()> {
    manifest.outcome = Outcome::Failed {
        message: e.to_string(),
    };
    manifest.finished_unix = unix_now();
    fs::write(dir.join(SCENARIO_FILE), cfg.to_toml())?;
    manifest.finalize(dir)
}

/// Runs one scenario into `dir`. An escape is part of the summary, not an
/// error; numerical failures are recorded in the manifest and returned.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, force: bool) -> CliResult<RunSummary> {
    cfg.validate()?;
    prepare_dir(dir, force)?;
    let started = unix_now();
    let grid = cfg.grid.build()?;
    let u0 = make_initial(&cfg.ic, grid)?;
    fs::write(dir.join(SCENARIO_FILE), cfg.to_toml())?;
    let mut manifest = RunManifest::new(cfg, started);
    log::info!("running {:?} into {}", cfg.name, dir.display());

    let result: CliResult<(RunStatus, f64)> = (|| {
        if let Some(wspec) = &cfg.perturbation {
            let w0 = make_initial(wspec, grid)?;
            let c = run_coupled(&u0, &w0, &cfg.solver, &cfg.monitor)?;
            write_records(&dir.join(DIAGNOSTICS_FILE), &c.sum_records)?;
            write_records(&dir.join(V_DIAGNOSTICS_FILE), &c.v.records)?;
            write_records(&dir.join(W_DIAGNOSTICS_FILE), &c.w.records)?;
            write_series(dir, &c.sum_records)?;
            if cfg.output.checkpoints {
                write_checkpoints(dir, "v", &c.v.snapshots, 0)?;
                write_checkpoints(dir, "w", &c.w.snapshots, 0)?;
                let sums: Vec<Snapshot> =
                    c.v.snapshots
                        .iter()
                        .zip(&c.w.snapshots)
                        .map(|(a, b)| {
                            Ok(Snapshot {
                                t: a.t,
                                u: a.u.add(&b.u)?,
                            })
                        })
                        .collect::<CliResult<_>>()?;
                write_checkpoints(dir, "u", &sums, 0)?;
            }
            Ok((c.v.status, c.v.final_snapshot().t))
        } else {
            let traj = run(&u0, &cfg.solver, &cfg.monitor)?;
            write_trajectory(cfg, dir, &traj.records, &traj, 0)?;
            Ok((traj.status, traj.final_snapshot().t))
        }
    })();
    let (status, t_final) = match result {
        Ok(x) => x,
        Err(e) => {
            record_failure(cfg, dir, manifest, &e)?;
            return Err(e);
        }
    };
    manifest.outcome = outcome_of(status);
    manifest.escaped = matches!(status, RunStatus::Escaped { .. });
    finish(cfg, dir, manifest, t_final)
}

fn write_trajectory(
    cfg: &ScenarioConfig,
    dir: &Path,
    records: &[DiagnosticRecord],
    traj: &Trajectory,
    first_ckpt: usize,
) -> CliResult<()> {
    write_records(&dir.join(DIAGNOSTICS_FILE), records)?;
    write_series(dir, records)?;
    if cfg.output.checkpoints {
        write_checkpoints(dir, "u", &traj.snapshots, first_ckpt)?;
    }
    Ok(())
}

/// Continues a completed single-field run up to `t_end` from its last
/// checkpoint.
pub fn resume_dir(dir: &Path, t_end: Option<f64>) -> CliResult<RunSummary> {
    let rd = RunDir::open(dir)?;
    if rd.manifest.coupled {
        return Err(CliError::Config(
            "resuming coupled runs is not supported".into(),
        ));
    }
    if rd.manifest.outcome != Outcome::Completed {
        return Err(CliError::Config(format!(
            "cannot resume a run with outcome {:?}",
            rd.manifest.outcome
        )));
    }
    let Some((u, t0, last_index)) = last_checkpoint(dir, "u")? else {
        return Err(CliError::Config(
            "no checkpoints to resume from (output.checkpoints = false?)".into(),
        ));
    };
    let last = rd
        .records
        .last()
        .ok_or_else(|| CliError::Config("empty diagnostics".into()))?;
    if last.t != t0 {
        return Err(CliError::Config(format!(
            "last checkpoint (t = {t0}) does not match the last record (t = {})",
            last.t
        )));
    }
    let mut cfg = rd.config.clone();
    let target = t_end.unwrap_or(cfg.solver.t_end);
    if !(target > t0) {
        return Err(CliError::Config(format!(
            "t_end = {target} does not extend the run (already at t = {t0})"
        )));
    }
    cfg.solver.t_end = target;
    cfg.validate()?;
    let mut manifest = rd.manifest.clone();
    manifest.scenario_hash = cfg.hash();
    manifest.resumed_from.push(t0);
    manifest.verdicts.clear();
    log::info!("resuming {} from t = {t0} to {target}", dir.display());

    let traj = run_from(&u, t0, last.grad_l2_integral, &cfg.solver, &cfg.monitor)?;
    let mut records = rd.records.clone();
    records.extend(traj.records.iter().skip(1).cloned());
    // The first snapshot repeats the last checkpoint.
    let rest = Trajectory {
        snapshots: traj.snapshots[1..].to_vec(),
        ..traj.clone()
    };
    fs::write(dir.join(SCENARIO_FILE), cfg.to_toml())?;
    write_trajectory(&cfg, dir, &records, &rest, last_index + 1)?;
    manifest.outcome = outcome_of(traj.status);
    manifest.escaped = traj.escaped();
    finish(&cfg, dir, manifest, traj.final_snapshot().t)
}

pub fn cmd_run(
    config: &Path,
    out: Option<PathBuf>,
    resume: bool,
    force: bool,
) -> CliResult<RunSummary> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(o) = out {
        cfg.output.dir = o;
    }
    let dir = cfg.output.dir.clone();
    let summary = if resume && dir.join(MANIFEST_FILE).exists() {
        let stored = RunDir::open(&dir)?.config;
        let same = |c: &ScenarioConfig| ScenarioConfig {
            solver: nsap_core::solver::SolverConfig {
                t_end: 0.0,
                ..c.solver.clone()
            },
            ..c.clone()
        };
        if same(&stored) != same(&cfg) {
            return Err(CliError::Config(
                "stored scenario differs from the given one beyond solver.t_end".into(),
            ));
        }
        resume_dir(&dir, Some(cfg.solver.t_end))?
    } else {
        run_scenario(&cfg, &dir, force)?
    };
    print_summary(&summary);
    summary.into_result()
}

pub fn cmd_resume(dir: &Path, t_end: Option<f64>) -> CliResult<RunSummary> {
    let summary = resume_dir(dir, t_end)?;
    print_summary(&summary);
    summary.into_result()
}

fn print_summary(s: &RunSummary) {
    let m = &s.manifest;
    let status = match &m.outcome {
        Outcome::Completed => "completed".to_string(),
        Outcome::Escaped { t, .. } => format!("ESCAPED at t = {t}"),
        Outcome::Failed { message } => format!("failed: {message}"),
    };
    println!(
        "{}: {status}, t = {}, {} files",
        s.dir.display(),
        m.t_final,
        m.files.len()
    );
    for r in &s.reports {
        println!("  {}", summary_line(r));
    }
}

/// Regenerates the reports for `id` from the stored CSV files, writes them
/// and records them in the manifest.
pub fn cmd_check(dir: &Path, id: &str, p: Option<f64>) -> CliResult<Vec<InequalityReport>> {
    crate::check::validate_id(id)?;
    let rd = RunDir::open(dir)?;
    let p = p
        .or_else(|| rd.config.monitor.p_set.first().copied())
        .unwrap_or(4.0);
    let avail = Available {
        u: rd.series(&rd.records),
        parts: rd.parts.as_ref().map(|(v, w)| (rd.series(v), rd.series(w))),
        has_balance: rd.records.first().is_some_and(|r| !r.balance.is_empty()),
    };
    let reports = evaluate(id, p, &avail)?;
    let mut manifest = rd.manifest.clone();
    write_reports(dir, &reports, &mut manifest)?;
    manifest.finalize(dir)?;
    for r in &reports {
        println!("{}", summary_line(r));
    }
    Ok(reports)
}
