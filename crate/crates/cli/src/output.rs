//! Output directory layout, the run manifest, and loading a finished run.
//!
//! ```text
//! <dir>/scenario.toml          canonical scenario
//! <dir>/manifest.json          hash, version, walltimes, outcome, verdicts, files
//! <dir>/diagnostics.csv        records of u (of u = v + w for coupled runs)
//! <dir>/diagnostics_{v,w}.csv  coupled runs only
//! <dir>/checkpoints/u_00000.ckpt ...
//! <dir>/series/*.dat           whitespace-separated columns for plotting
//! <dir>/reports/<id>_p<p>.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nsap_core::monitor::{
    read_csv, write_csv, DiagnosticRecord, InequalityReport, RunSeries, Verdict,
};
use nsap_core::spectral::read_checkpoint;
use nsap_core::VectorField;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

pub const SCENARIO_FILE: &str = "scenario.toml";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const V_DIAGNOSTICS_FILE: &str = "diagnostics_v.csv";
pub const W_DIAGNOSTICS_FILE: &str = "diagnostics_w.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const REPORT_DIR: &str = "reports";
pub const SERIES_DIR: &str = "series";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Escaped { t: f64, norm: f64, ceiling: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub scenario_hash: String,
    pub code_version: String,
    /// Seeds of the random initial data (datum first, then perturbation).
    pub seeds: Vec<u64>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outcome: Outcome,
    pub escaped: bool,
    pub t_final: f64,
    pub coupled: bool,
    /// Times from which the run was continued.
    #[serde(default)]
    pub resumed_from: Vec<f64>,
    /// Verdict per report file stem.
    pub verdicts: BTreeMap<String, Verdict>,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(cfg: &ScenarioConfig, started_unix: f64) -> Self {
        Self {
            scenario: cfg.name.clone(),
            scenario_hash: cfg.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: std::iter::once(&cfg.ic)
                .chain(cfg.perturbation.as_ref())
                .filter_map(|s| s.seed())
                .collect(),
            started_unix,
            finished_unix: started_unix,
            outcome: Outcome::Completed,
            escaped: false,
            t_final: 0.0,
            coupled: cfg.perturbation.is_some(),
            resumed_from: Vec::new(),
            verdicts: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    /// Lists every file under `dir` except the manifest itself, then writes it.
    pub fn finalize(&mut self, dir: &Path) -> CliResult<()> {
        let mut paths = Vec::new();
        collect_files(dir, dir, &mut paths)?;
        paths.sort();
        self.files = paths
            .into_iter()
            .filter(|p| p != MANIFEST_FILE)
            .map(|p| {
                let bytes = fs::read(dir.join(&p))?;
                Ok(FileEntry {
                    path: p,
                    bytes: bytes.len() as u64,
                    sha256: hex::encode(Sha256::digest(&bytes)),
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> CliResult<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walked from root");
            out.push(
                rel.components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/"),
            );
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write_records(path: &Path, records: &[DiagnosticRecord]) -> CliResult<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_csv(&mut w, records)?;
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> CliResult<Vec<DiagnosticRecord>> {
    let f =
        fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(read_csv(BufReader::new(f))?)
}

pub fn checkpoint_name(prefix: &str, index: usize) -> String {
    format!("{prefix}_{index:05}.ckpt")
}

/// Checkpoints `<prefix>_NNNNN.ckpt` in index order.
pub fn list_checkpoints(dir: &Path, prefix: &str) -> CliResult<Vec<PathBuf>> {
    let d = dir.join(CHECKPOINT_DIR);
    if !d.is_dir() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = fs::read_dir(&d)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&format!("{prefix}_")) && n.ends_with(".ckpt"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn last_checkpoint(dir: &Path, prefix: &str) -> CliResult<Option<(VectorField, f64, usize)>> {
    let list = list_checkpoints(dir, prefix)?;
    let Some(path) = list.last() else {
        return Ok(None);
    };
    let (u, t) = read_checkpoint(path)?;
    Ok(Some((u, t, list.len() - 1)))
}

/// Plot-ready series: `energy.dat` (t, |u|_2^2) and `norms.dat` (t and every
/// recorded norm).
pub fn write_series(dir: &Path, records: &[DiagnosticRecord]) -> CliResult<()> {
    let d = dir.join(SERIES_DIR);
    fs::create_dir_all(&d)?;
    let mut e = BufWriter::new(fs::File::create(d.join("energy.dat"))?);
    writeln!(e, "# t energy")?;
    for r in records {
        writeln!(e, "{:e} {:e}", r.t, r.energy().unwrap_or(f64::NAN))?;
    }
    e.flush()?;
    let mut n = BufWriter::new(fs::File::create(d.join("norms.dat"))?);
    if let Some(first) = records.first() {
        let cols: Vec<String> = first.norms.iter().map(|(q, _)| format!("l{q}")).collect();
        writeln!(n, "# t {} linf", cols.join(" "))?;
    }
    for r in records {
        let vals: Vec<String> = r.norms.iter().map(|(_, v)| format!("{v:e}")).collect();
        writeln!(n, "{:e} {} {:e}", r.t, vals.join(" "), r.linf)?;
    }
    n.flush()?;
    Ok(())
}

pub fn write_reports(
    dir: &Path,
    reports: &[InequalityReport],
    manifest: &mut RunManifest,
) -> CliResult<()> {
    let d = dir.join(REPORT_DIR);
    fs::create_dir_all(&d)?;
    for r in reports {
        write_json(&d.join(format!("{}.json", r.file_stem())), r)?;
        manifest.verdicts.insert(r.file_stem(), r.verdict);
    }
    Ok(())
}

/// A finished (or escaped) run directory.
pub struct RunDir {
    pub path: PathBuf,
    pub config: ScenarioConfig,
    pub manifest: RunManifest,
    pub records: Vec<DiagnosticRecord>,
    /// (v, w) records of a coupled run.
    pub parts: Option<(Vec<DiagnosticRecord>, Vec<DiagnosticRecord>)>,
}

impl RunDir {
    pub fn open(path: &Path) -> CliResult<Self> {
        if !path.join(MANIFEST_FILE).is_file() {
            return Err(CliError::Config(format!(
                "{} is not a run directory (no {MANIFEST_FILE})",
                path.display()
            )));
        }
        let text = fs::read_to_string(path.join(SCENARIO_FILE))
            .map_err(|e| CliError::Config(format!("{SCENARIO_FILE}: {e}")))?;
        let config = ScenarioConfig::parse(&text)?;
        let manifest: RunManifest = read_json(&path.join(MANIFEST_FILE))?;
        let records = read_records(&path.join(DIAGNOSTICS_FILE))?;
        let parts = if manifest.coupled {
            Some((
                read_records(&path.join(V_DIAGNOSTICS_FILE))?,
                read_records(&path.join(W_DIAGNOSTICS_FILE))?,
            ))
        } else {
            None
        };
        Ok(Self {
            path: path.to_path_buf(),
            config,
            manifest,
            records,
            parts,
        })
    }

    pub fn series<'a>(&self, records: &'a [DiagnosticRecord]) -> RunSeries<'a> {
        series_for(&self.config, records, self.manifest.escaped)
    }
}

pub fn series_for<'a>(
    cfg: &ScenarioConfig,
    records: &'a [DiagnosticRecord],
    escaped: bool,
) -> RunSeries<'a> {
    RunSeries {
        records,
        dim: cfg.grid.dim,
        viscosity: cfg.solver.viscosity,
        box_length: cfg.grid.box_length,
        dt: cfg.solver.dt,
        escaped,
    }
}
