use nsap_core::initial::{localized_bump, random_solenoidal, taylor_green};
use nsap_core::spectral::{leray_project, read_checkpoint};
use nsap_core::{Grid, VectorField};

use crate::config::IcSpec;
use crate::error::{CliError, CliResult};

/// Builds the solenoidal, mean-free initial field described by `spec`.
pub fn make_initial(spec: &IcSpec, grid: Grid) -> CliResult<VectorField> {
    let u = match spec {
        IcSpec::TaylorGreen { amplitude } => taylor_green(grid, *amplitude),
        IcSpec::RandomSolenoidal {
            amplitude, seed, ..
        } => random_solenoidal(
            grid,
            *amplitude,
            spec.spectrum().expect("random spec has a spectrum"),
            *seed,
        ),
        IcSpec::LocalizedBump {
            amplitude,
            radius,
            center,
        } => {
            let mid = grid.box_length() / 2.0;
            let mut c = [mid; 3];
            if let Some(v) = center {
                c[..v.len()].copy_from_slice(v);
            }
            localized_bump(grid, *amplitude, *radius, c)
        }
        IcSpec::FromCheckpoint { path } => {
            let (u, _) = read_checkpoint(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if *u.grid() != grid {
                return Err(CliError::Config(format!(
                    "checkpoint {} does not match the [grid] section",
                    path.display()
                )));
            }
            if u.is_solenoidal() {
                u
            } else {
                log::warn!(
                    "checkpoint {} is not divergence-free; projecting",
                    path.display()
                );
                leray_project(&u)
            }
        }
    };
    // ℙ removes the mean; zero fields are trivially solenoidal.
    if u.max_abs() == 0.0 {
        return Ok(u.mark_solenoidal()?);
    }
    Ok(u)
}
