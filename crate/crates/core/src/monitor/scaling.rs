//! The Navier–Stokes scaling u ↦ λu(λx). On a periodic box this is exact
//! resampling: the same samples on a box of length L/λ, multiplied by λ.

use serde::{Deserialize, Serialize};

use super::norms::{kappa, lp_norm};
use crate::error::{invalid, Result};
use crate::spectral::{Grid, ScalarField, VectorField};

/// Invariance tolerance for κ_p and ‖·‖_N, and for the ‖·‖₂ scaling law.
pub const SCALING_TOL: f64 = 1e-10;

/// λu(λx) on the box of length L/λ. λ must be a power of two.
pub fn rescale_field(u: &VectorField, lambda: f64) -> Result<VectorField> {
    let e = lambda.log2();
    if !(lambda > 0.0) || e.fract() != 0.0 {
        return invalid(format!("scale factor {lambda} is not a power of two"));
    }
    let g = u.grid();
    let grid = Grid::new(g.dim(), g.n(), g.box_length() / lambda)?;
    let comps = u
        .components()
        .iter()
        .map(|c| ScalarField::from_values(grid, c.values().iter().map(|v| v * lambda).collect()))
        .collect::<Result<Vec<_>>>()?;
    let out = VectorField::from_components(comps)?;
    // Divergence scales uniformly, so the solenoidal flag carries over.
    Ok(out.with_flag(u.is_solenoidal()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: f64,
    pub p: f64,
    pub dim: usize,
    pub kappa_before: f64,
    pub kappa_after: f64,
    pub kappa_rel_delta: f64,
    /// ‖·‖_N before and after.
    pub critical_before: f64,
    pub critical_after: f64,
    pub critical_rel_delta: f64,
    /// ‖u^λ‖₂/‖u‖₂ against λ^{1−N/2}.
    pub l2_ratio: f64,
    pub l2_expected: f64,
    pub l2_rel_delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Measures κ_p and ‖·‖_N before and after rescaling by λ.
pub fn scaling_test(u0: &VectorField, lambda: f64, p: f64) -> Result<ScalingReport> {
    let scaled = rescale_field(u0, lambda)?;
    let dim = u0.dim();
    let (k0, k1) = (kappa(u0, p)?, kappa(&scaled, p)?);
    let n = dim as f64;
    let (c0, c1) = (lp_norm(u0, n)?, lp_norm(&scaled, n)?);
    let l2_expected = lambda.powf(1.0 - n / 2.0);
    let l2_ratio = if k0.l2 == 0.0 {
        l2_expected
    } else {
        k1.l2 / k0.l2
    };
    let (dk, dc, dl) = (
        rel(k0.value, k1.value),
        rel(c0, c1),
        rel(l2_ratio, l2_expected),
    );
    Ok(ScalingReport {
        lambda,
        p,
        dim,
        kappa_before: k0.value,
        kappa_after: k1.value,
        kappa_rel_delta: dk,
        critical_before: c0,
        critical_after: c1,
        critical_rel_delta: dc,
        l2_ratio,
        l2_expected,
        l2_rel_delta: dl,
        tolerance: SCALING_TOL,
        pass: dk <= SCALING_TOL && dc <= SCALING_TOL && dl <= SCALING_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_scale_is_exact() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), x[2].cos(), x[0].sin()]).unwrap();
        let r = scaling_test(&u, 1.0, 4.0).unwrap();
        assert_eq!(r.kappa_rel_delta, 0.0);
        assert_eq!(r.critical_rel_delta, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn non_power_of_two_rejected() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert!(rescale_field(&VectorField::zeros(g), 3.0).is_err());
        assert!(rescale_field(&VectorField::zeros(g), -2.0).is_err());
    }

    #[test]
    fn single_mode_invariance() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
        let r = scaling_test(&u, 2.0, 4.0).unwrap();
        assert!(
            r.kappa_rel_delta <= 1e-12 && r.critical_rel_delta <= 1e-12,
            "{r:?}"
        );
        assert!(r.l2_rel_delta <= 1e-12);
    }
}
