//! Lebesgue norms, κ_p, weighted dissipation and the pointwise pieces of the
//! L^p energy identity.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{derivative, laplacian, Grid, VectorField};

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::default();
    xs.into_iter().for_each(|x| s.add(x));
    s.value()
}

fn pow(x: f64, q: f64) -> f64 {
    if q == q.trunc() && q.abs() <= 64.0 {
        x.powi(q as i32)
    } else {
        x.powf(q)
    }
}

/// ‖f‖_q of pointwise magnitudes; samples are rescaled by their maximum
/// before raising to q so high powers stay in range.
pub fn lp_of_magnitude(grid: &Grid, mag: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return invalid(format!("norm exponent must be >= 1, got {q}"));
    }
    let max = mag.iter().copied().fold(0.0, f64::max);
    if q.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let s = compensated(mag.iter().map(|&m| pow(m / max, q)));
    Ok(max * (s * grid.cell_volume()).powf(1.0 / q))
}

/// ‖u‖_q with |u| the pointwise Euclidean magnitude; q = ∞ gives the maximum.
pub fn lp_norm(u: &VectorField, q: f64) -> Result<f64> {
    lp_of_magnitude(u.grid(), &u.magnitude(), q)
}

/// Weight θ on ‖u‖_p in κ_p = ‖u‖_p^θ ‖u‖₂^{1−θ}, θ = p(N−2)/(N(p−2)).
pub fn kappa_theta(p: f64, dim: usize) -> f64 {
    let n = dim as f64;
    p * (n - 2.0) / (n * (p - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaValue {
    pub p: f64,
    pub dim: usize,
    pub value: f64,
    pub lp: f64,
    pub l2: f64,
    /// ‖u‖₂^{2(p−N)/(p−2)}‖u‖_p^{p(N−2)/(p−2)}, which equals value^N.
    pub identity_lhs: f64,
}

impl KappaValue {
    pub fn identity_residual(&self) -> f64 {
        let rhs = self.value.powi(self.dim as i32);
        if rhs == 0.0 {
            self.identity_lhs.abs()
        } else {
            (self.identity_lhs - rhs).abs() / rhs
        }
    }
}

pub fn kappa_from_norms(lp: f64, l2: f64, p: f64, dim: usize) -> f64 {
    let th = kappa_theta(p, dim);
    lp.powf(th) * l2.powf(1.0 - th)
}

/// κ_p(u), scale-invariant and ≥ ‖u‖_N by Hölder.
pub fn kappa(u: &VectorField, p: f64) -> Result<KappaValue> {
    let dim = u.dim();
    if !(p > dim as f64) {
        return invalid(format!("kappa requires p > N = {dim}, got {p}"));
    }
    let mag = u.magnitude();
    let lp = lp_of_magnitude(u.grid(), &mag, p)?;
    let l2 = lp_of_magnitude(u.grid(), &mag, 2.0)?;
    let n = dim as f64;
    Ok(KappaValue {
        p,
        dim,
        value: kappa_from_norms(lp, l2, p, dim),
        lp,
        l2,
        identity_lhs: l2.powf(2.0 * (p - n) / (p - 2.0)) * lp.powf(p * (n - 2.0) / (p - 2.0)),
    })
}

/// Pointwise |u|, |∇u|² = Σ(∂_j u_k)² and s_j = Σ_k u_k ∂_j u_k.
pub struct GradientData {
    pub grid: Grid,
    pub mag: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub s: Vec<Vec<f64>>,
}

impl GradientData {
    pub fn new(u: &VectorField) -> Self {
        let grid = *u.grid();
        let len = grid.real_len();
        let mut grad_sq = vec![0.0; len];
        let mut s = vec![vec![0.0; len]; grid.dim()];
        for k in 0..grid.dim() {
            let uk = u.component(k).values();
            for (j, sj) in s.iter_mut().enumerate() {
                let d = derivative(u.component(k), j);
                for (i, &v) in d.values().iter().enumerate() {
                    grad_sq[i] += v * v;
                    sj[i] += uk[i] * v;
                }
            }
        }
        Self {
            grid,
            mag: u.magnitude(),
            grad_sq,
            s,
        }
    }

    /// D_p = ∫|u|^{p−2}|∇u|².
    pub fn dissipation(&self, p: f64) -> f64 {
        let s = if p == 2.0 {
            compensated(self.grad_sq.iter().copied())
        } else {
            compensated(
                self.mag
                    .iter()
                    .zip(&self.grad_sq)
                    .map(|(&m, &g)| pow(m, p - 2.0) * g),
            )
        };
        s * self.grid.cell_volume()
    }

    /// (p−2)∫|u|^{p−4}Σ_j(u·∂_j u)², with the integrand taken as 0 where u = 0.
    pub fn cross_term(&self, p: f64) -> f64 {
        if p == 2.0 {
            return 0.0;
        }
        let s = compensated((0..self.mag.len()).map(|i| {
            let m = self.mag[i];
            if m == 0.0 {
                return 0.0;
            }
            let ss: f64 = self.s.iter().map(|sj| sj[i] * sj[i]).sum();
            pow(m, p - 2.0) * ss / (m * m)
        }));
        (p - 2.0) * s * self.grid.cell_volume()
    }

    /// ∫ f·|u|^{p−2}u for a vector field f on the same grid.
    pub fn pairing(&self, u: &VectorField, f: &VectorField, p: f64) -> f64 {
        let s = compensated((0..self.mag.len()).map(|i| {
            let w = if p == 2.0 {
                1.0
            } else {
                pow(self.mag[i], p - 2.0)
            };
            let dot: f64 = (0..u.dim())
                .map(|a| u.component(a).values()[i] * f.component(a).values()[i])
                .sum();
            w * dot
        }));
        s * self.grid.cell_volume()
    }

    pub fn grad_l2(&self) -> f64 {
        compensated(self.grad_sq.iter().copied()) * self.grid.cell_volume()
    }
}

/// D_p(u) = ∫|u|^{p−2}|∇u|² dx.
pub fn dissipation(u: &VectorField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return invalid(format!("dissipation requires p >= 2, got {p}"));
    }
    Ok(GradientData::new(u).dissipation(p))
}

/// −∫Δu·|u|^{p−2}u.
pub fn laplacian_pairing(u: &VectorField, data: &GradientData, p: f64) -> f64 {
    let lap = VectorField::from_components(u.components().iter().map(laplacian).collect())
        .expect("same grid");
    -data.pairing(u, &lap, p)
}

/// Fraction of ‖u‖₂² located within `fraction/2` of some face of the box.
pub fn tail_mass(u: &VectorField, fraction: f64) -> f64 {
    let g = u.grid();
    let l = g.box_length();
    let lo = 0.5 * fraction * l;
    let hi = l - lo;
    let mag = u.magnitude();
    let mut outer = CompensatedSum::default();
    let mut total = CompensatedSum::default();
    for (i, m) in mag.iter().enumerate() {
        let e = m * m;
        total.add(e);
        let x = g.point(i);
        if x[..g.dim()].iter().any(|&c| c < lo || c >= hi) {
            outer.add(e);
        }
    }
    if total.value() == 0.0 {
        0.0
    } else {
        outer.value() / total.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn constant(c: f64) -> VectorField {
        let g = Grid::new(3, 8, 1.5).unwrap();
        VectorField::from_fn(g, |_| [c * 0.6, c * 0.8, 0.0]).unwrap()
    }

    #[test]
    fn zero_field_norms() {
        let u = VectorField::zeros(Grid::new(2, 8, 1.0).unwrap());
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&u, q).unwrap(), 0.0);
        }
        assert_eq!(dissipation(&u, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_magnitude_closed_form() {
        let u = constant(2.0);
        let v: f64 = 1.5f64.powi(3);
        for q in [1.0, 2.0, 3.0, 7.5, 12.0] {
            let expect = 2.0 * v.powf(1.0 / q);
            assert!((lp_norm(&u, q).unwrap() - expect).abs() < 1e-13 * expect);
        }
        assert!((lp_norm(&u, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
        let k = kappa(&u, 4.0).unwrap();
        let l3 = lp_norm(&u, 3.0).unwrap();
        assert!((k.value - l3).abs() < 1e-13 * l3);
        assert!(k.identity_residual() < 1e-13);
    }

    #[test]
    fn rejects_bad_exponents() {
        let u = constant(1.0);
        assert!(lp_norm(&u, 0.5).is_err());
        assert!(kappa(&u, 3.0).is_err());
        assert!(dissipation(&u, 1.5).is_err());
    }

    #[test]
    fn dissipation_two_is_gradient_energy() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| {
            [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
        })
        .unwrap();
        // Each component has |k|² = 2 and ‖u_i‖₂² = π².
        let expect = 2.0 * 2.0 * PI * PI;
        assert!((dissipation(&u, 2.0).unwrap() - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn tail_mass_of_uniform_field() {
        let g = Grid::new(2, 40, 10.0).unwrap();
        let u = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]).unwrap();
        // Outer band: 2 of 40 rows per axis → 1 − (36/40)².
        let expect = 1.0 - (36.0f64 / 40.0).powi(2);
        assert!((tail_mass(&u, 0.1) - expect).abs() < 1e-14);
    }
}
