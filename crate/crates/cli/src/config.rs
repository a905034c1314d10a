//! Scenario files: TOML with sections [grid], [ic], [solver], [monitor],
//! [output], and the optional [perturbation] and [sweep].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nsap_core::initial::Spectrum;
use nsap_core::monitor::MonitorConfig;
use nsap_core::solver::SolverConfig;
use nsap_core::Grid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub grid: GridSpec,
    pub ic: IcSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub output: OutputSpec,
    /// Initial perturbation w₀; when present the run integrates v and w
    /// separately (u = v + w).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<IcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "two_pi")]
    pub box_length: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::new(self.dim, self.n, self.box_length).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Peaked,
    Flat,
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_k0() -> f64 {
    2.0
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcSpec {
    TaylorGreen {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    RandomSolenoidal {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "peaked")]
        spectrum: SpectrumKind,
        #[serde(default = "default_k0")]
        k0: f64,
        #[serde(default)]
        seed: u64,
    },
    LocalizedBump {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        /// Defaults to the centre of the box.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    FromCheckpoint {
        path: PathBuf,
    },
}

fn peaked() -> SpectrumKind {
    SpectrumKind::Peaked
}

impl IcSpec {
    pub fn spectrum(&self) -> Option<Spectrum> {
        match self {
            IcSpec::RandomSolenoidal {
                spectrum: SpectrumKind::Peaked,
                k0,
                ..
            } => Some(Spectrum::Peaked { k0: *k0 }),
            IcSpec::RandomSolenoidal {
                spectrum: SpectrumKind::Flat,
                ..
            } => Some(Spectrum::Flat),
            _ => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            IcSpec::RandomSolenoidal { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Short human-readable label for tables.
    pub fn label(&self) -> String {
        match self {
            IcSpec::TaylorGreen { .. } => "taylor_green".into(),
            IcSpec::RandomSolenoidal {
                spectrum: SpectrumKind::Peaked,
                k0,
                seed,
                ..
            } => format!("random(peaked k0={k0}, seed={seed})"),
            IcSpec::RandomSolenoidal {
                spectrum: SpectrumKind::Flat,
                seed,
                ..
            } => format!("random(flat, seed={seed})"),
            IcSpec::LocalizedBump { radius, .. } => format!("bump(r={radius})"),
            IcSpec::FromCheckpoint { path } => format!("checkpoint({})", path.display()),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), CliError> {
        let amp = match self {
            IcSpec::TaylorGreen { amplitude } => *amplitude,
            IcSpec::RandomSolenoidal {
                amplitude,
                spectrum,
                k0,
                ..
            } => {
                if *spectrum == SpectrumKind::Peaked && !(*k0 > 0.0 && k0.is_finite()) {
                    return Err(CliError::Config(format!("ic.k0 = {k0} must be positive")));
                }
                *amplitude
            }
            IcSpec::LocalizedBump {
                amplitude,
                radius,
                center,
            } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(CliError::Config(format!(
                        "ic.radius = {radius} must be positive"
                    )));
                }
                if let Some(c) = center {
                    if c.len() != dim || c.iter().any(|x| !x.is_finite()) {
                        return Err(CliError::Config(format!(
                            "ic.center needs {dim} finite coordinates"
                        )));
                    }
                }
                *amplitude
            }
            IcSpec::FromCheckpoint { .. } => 0.0,
        };
        if !(amp >= 0.0 && amp.is_finite()) {
            return Err(CliError::Config(format!(
                "ic.amplitude = {amp} must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; relative paths are taken from the working directory.
    pub dir: PathBuf,
    /// Write a checkpoint at every snapshot.
    pub checkpoints: bool,
    /// Inequality ids evaluated after the run, for every p in `monitor.p_set`.
    pub checks: Vec<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            checkpoints: true,
            checks: vec!["1.2".into(), "2.1".into(), "2.3".into(), "monotone".into()],
        }
    }
}

/// A family of initial data rescaled to a common κ_p(u₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_sweep_p")]
    pub p: f64,
    /// Target κ_p(u₀) shared by all members.
    pub kappa: f64,
    /// Inequality whose C_emp is tabulated.
    #[serde(default = "default_sweep_id")]
    pub id: String,
    pub members: Vec<IcSpec>,
}

fn default_sweep_p() -> f64 {
    4.0
}

fn default_sweep_id() -> String {
    "2.3".into()
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // Checkpoint paths are relative to the scenario file.
        let base = path.parent().unwrap_or(Path::new("."));
        for ic in std::iter::once(&mut cfg.ic).chain(cfg.perturbation.as_mut()) {
            if let IcSpec::FromCheckpoint { path } = ic {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: nsap_core::Error| CliError::Config(e.to_string());
        self.grid.build()?;
        self.solver.validate().map_err(cfg)?;
        self.monitor.validate().map_err(cfg)?;
        self.ic.validate(self.grid.dim)?;
        if let Some(w) = &self.perturbation {
            w.validate(self.grid.dim)?;
        }
        let dim = self.grid.dim as f64;
        for id in &self.output.checks {
            crate::check::validate_id(id)?;
            if crate::check::needs_balance(id) && !self.monitor.balance {
                return Err(CliError::Config(format!(
                    "check {id} needs monitor.balance = true"
                )));
            }
            if crate::check::needs_perturbation(id) && self.perturbation.is_none() {
                return Err(CliError::Config(format!(
                    "check {id} needs a [perturbation] section"
                )));
            }
        }
        if !self.output.checks.is_empty() {
            if let Some(p) = self.monitor.p_set.iter().find(|p| **p <= dim) {
                return Err(CliError::Config(format!(
                    "monitor.p_set contains p = {p} <= dimension"
                )));
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.p > dim && s.p.is_finite()) {
                return Err(CliError::Config(format!(
                    "sweep.p = {} must exceed the dimension",
                    s.p
                )));
            }
            if !(s.kappa > 0.0 && s.kappa.is_finite()) {
                return Err(CliError::Config("sweep.kappa must be positive".into()));
            }
            if s.members.is_empty() {
                return Err(CliError::Config("sweep.members is empty".into()));
            }
            crate::check::validate_id(&s.id)?;
            for m in &s.members {
                m.validate(self.grid.dim)?;
            }
        }
        Ok(())
    }
}
