//! Field and series differences between two run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{last_checkpoint, RunDir, DIAGNOSTICS_FILE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDiff {
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    pub t_a: f64,
    pub t_b: f64,
    pub max_abs: f64,
    /// ‖a − b‖₂/‖b‖₂ (absolute when b = 0).
    pub rel_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows_a: usize,
    pub rows_b: usize,
    /// Rows compared (the common prefix with equal times).
    pub rows_compared: usize,
    pub columns: BTreeMap<String, ColumnDiff>,
    /// Columns present in only one of the two files.
    pub unmatched_columns: Vec<String>,
    pub final_field: Option<FieldDiff>,
    pub identical: bool,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
                })
                .collect()
        })
        .collect::<CliResult<Vec<Vec<f64>>>>()?;
    Ok(Table { header, rows })
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b || (a.is_nan() && b.is_nan()) {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn compare_dirs(a: &Path, b: &Path) -> CliResult<CompareReport> {
    let (ra, rb) = (RunDir::open(a)?, RunDir::open(b)?);
    if ra.config.grid != rb.config.grid {
        return Err(CliError::Config(format!(
            "incompatible grids: {:?} vs {:?}",
            ra.config.grid, rb.config.grid
        )));
    }
    let (ta, tb) = (
        read_table(&a.join(DIAGNOSTICS_FILE))?,
        read_table(&b.join(DIAGNOSTICS_FILE))?,
    );
    let t_col = |t: &Table| t.header.iter().position(|h| h == "t");
    let (ia, ib) = (t_col(&ta), t_col(&tb));
    let rows_compared = ta
        .rows
        .iter()
        .zip(&tb.rows)
        .take_while(|(x, y)| match (ia, ib) {
            (Some(i), Some(j)) => x[i] == y[j],
            _ => true,
        })
        .count();
    let mut columns = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (ca, name) in ta.header.iter().enumerate() {
        let Some(cb) = tb.header.iter().position(|h| h == name) else {
            unmatched.push(name.clone());
            continue;
        };
        let mut d = ColumnDiff {
            max_abs: 0.0,
            max_rel: 0.0,
        };
        for (x, y) in ta.rows.iter().zip(&tb.rows).take(rows_compared) {
            let (u, v) = (x[ca], y[cb]);
            if u.is_nan() && v.is_nan() {
                continue;
            }
            d.max_abs = d.max_abs.max((u - v).abs());
            d.max_rel = d.max_rel.max(rel(u, v));
        }
        columns.insert(name.clone(), d);
    }
    unmatched.extend(tb.header.iter().filter(|h| !ta.header.contains(h)).cloned());

    let final_field = match (last_checkpoint(a, "u")?, last_checkpoint(b, "u")?) {
        (Some((ua, t_a, _)), Some((ub, t_b, _))) => {
            let diff = ua.sub(&ub)?;
            let nb = ub.energy_spectral().sqrt();
            let nd = diff.energy_spectral().sqrt();
            Some(FieldDiff {
                t_a,
                t_b,
                max_abs: diff.max_abs(),
                rel_l2: if nb > 0.0 { nd / nb } else { nd },
            })
        }
        _ => None,
    };
    let identical = ta.rows.len() == tb.rows.len()
        && rows_compared == ta.rows.len()
        && unmatched.is_empty()
        && columns.values().all(|c| c.max_abs == 0.0)
        && final_field
            .as_ref()
            .map_or(true, |f| f.max_abs == 0.0 && f.t_a == f.t_b);
    Ok(CompareReport {
        rows_a: ta.rows.len(),
        rows_b: tb.rows.len(),
        rows_compared,
        columns,
        unmatched_columns: unmatched,
        final_field,
        identical,
    })
}
