//! Exponents of the L^p estimates as functions of p and the dimension N.
//!
//! In 3-D the embedding target is the Sobolev exponent Np/(N−2) = 3p. In
//! 2-D, where that exponent is infinite, the Ladyzhenskaya-type pair
//! ‖u‖_{2p}^p ≤ C‖u‖_p^{p/2} D_p^{1/2} is used instead and the target is 2p.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub dim: usize,
    pub p: f64,
    /// α(p, N) = p(p−N+2)/(p−N), the time-integrability exponent.
    pub alpha: f64,
    /// Sobolev pair ‖f‖_r ≤ C‖∇f‖_q: q = 2, r = 2N/(N−2) (None in 2-D).
    pub sobolev_q: f64,
    pub sobolev_r: Option<f64>,
    /// Norm controlled by D_p: Np/(N−2) in 3-D, 2p in 2-D.
    pub embedding_target: f64,
    /// κ_p = ‖u‖_p^{kappa_lp}·‖u‖₂^{kappa_l2}.
    pub kappa_lp: f64,
    pub kappa_l2: f64,
    /// ‖u‖_p ≤ ‖u‖_N^θ·‖u‖_target^{1−θ}.
    pub interp_theta: f64,
    /// Exponent of ‖u₀‖_N in the small-data integral bound.
    pub small_data_exponent: f64,
    /// (1/p)d/dt‖u‖_p^p + D_p ≤ C‖u‖_p^{a}·D_p^{b}.
    pub balance_a: f64,
    pub balance_b: f64,
}

impl ExponentTable {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return invalid(format!("dimension {dim} not supported"));
        }
        let n = dim as f64;
        if !(p > n) || !p.is_finite() {
            return invalid(format!("p = {p} must exceed the dimension {dim}"));
        }
        let (sobolev_r, embedding_target) = if dim == 2 {
            (None, 2.0 * p)
        } else {
            (Some(2.0 * n / (n - 2.0)), n * p / (n - 2.0))
        };
        let theta_k = p * (n - 2.0) / (n * (p - 2.0));
        let interp_theta = (1.0 / p - 1.0 / embedding_target) / (1.0 / n - 1.0 / embedding_target);
        Ok(Self {
            dim,
            p,
            alpha: p * (p - n + 2.0) / (p - n),
            sobolev_q: 2.0,
            sobolev_r,
            embedding_target,
            kappa_lp: theta_k,
            kappa_l2: 1.0 - theta_k,
            interp_theta,
            small_data_exponent: 2.0 * p / (p - n),
            balance_a: (p - n + 2.0) / 2.0,
            balance_b: (p + n) / (2.0 * p),
        })
    }
}

/// α(p, N) in exact rational arithmetic; None when p ≤ N.
pub fn alpha_exact(p: Ratio<i64>, dim: i64) -> Option<Ratio<i64>> {
    let n = Ratio::from_integer(dim);
    (p > n).then(|| p * (p - n + 2) / (p - n))
}

/// θ with ‖u‖_p ≤ ‖u‖_N^θ‖u‖_{Np/(N−2)}^{1−θ}, exact (3-D and higher).
pub fn interp_theta_exact(p: Ratio<i64>, dim: i64) -> Ratio<i64> {
    Ratio::from_integer(2) / (p - dim + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_values() {
        let e = ExponentTable::new(4.0, 3).unwrap();
        assert_eq!(e.alpha, 12.0);
        assert_eq!(e.embedding_target, 12.0);
        assert_eq!(e.sobolev_r, Some(6.0));
        assert!((e.kappa_lp - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.kappa_l2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.interp_theta - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.small_data_exponent, 8.0);
        assert_eq!(e.balance_a, 1.5);
        assert!((e.balance_b - 7.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_values() {
        let e = ExponentTable::new(4.0, 2).unwrap();
        assert_eq!(e.alpha, 8.0);
        assert_eq!(e.embedding_target, 8.0);
        assert_eq!(e.kappa_lp, 0.0);
        assert!((e.interp_theta - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_p() {
        assert!(ExponentTable::new(3.0, 3).is_err());
        assert!(ExponentTable::new(2.0, 2).is_err());
        assert!(ExponentTable::new(5.0, 4).is_err());
    }

    #[test]
    fn rational_identities() {
        for num in 7..60i64 {
            let p = Ratio::new(num, 2);
            let a = alpha_exact(p, 3).unwrap();
            assert_eq!(a * (p - 3), p * (p - 1));
            let th = interp_theta_exact(p, 3);
            // Hölder split of the small-data bound: θα = 2p/(p−3), (1−θ)α = p.
            assert_eq!(th * a, p * 2 / (p - 3));
            assert_eq!((Ratio::from_integer(1) - th) * a, p);
        }
        assert_eq!(alpha_exact(Ratio::from_integer(3), 3), None);
    }
}
