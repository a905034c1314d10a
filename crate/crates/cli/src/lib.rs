//! Scenario runner for `nsap-core`: configuration files, initial data,
//! run directories with manifests, report regeneration, comparisons and
//! fixed-κ sweeps.

pub mod check;
pub mod compare;
pub mod config;
pub mod error;
pub mod ic;
pub mod output;
pub mod run;
pub mod scale;
pub mod sweep;

/// The shipped reference scenario, with every key at its default.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.toml");
