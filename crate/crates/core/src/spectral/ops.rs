//! Spectral differential operators, Riesz transforms, pressure and the
//! Leray projection.
//!
//! Conventions: derivatives multiply by `i·k` with Nyquist components of `k`
//! zeroed; `R_j` has symbol `−i k_j/|k|`; modes whose operator wavenumber
//! vanishes (the mean and pure-Nyquist corners) are mapped to zero by `R_j`
//! and `ℙ`. With these signs `P = Σ R_jR_k(u_j u_k)` solves
//! `−ΔP = ∂_j∂_k(u_j u_k)` and
//! `ℙ∇·(u⊗u) = ∇·(u⊗u) + ∇P` for solenoidal `u`.

use num_complex::Complex64;

use super::field::{check_same, ScalarField, TensorField, VectorField};
use super::grid::Grid;
use crate::error::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    assert!(axis < f.grid().dim(), "axis {axis} out of range");
    let modes = f.grid().modes();
    f.map_coeffs(|m, c| I * modes.k_op[m][axis] * c)
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|a| derivative(f, a)).collect();
    VectorField::from_components(comps).expect("components share the grid")
}

/// Velocity gradient, entry (j, k) = ∂_j u_k.
pub fn vector_gradient(u: &VectorField) -> TensorField {
    TensorField::from_fn(*u.grid(), false, |j, k| Ok(derivative(u.component(k), j)))
        .expect("same grid")
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let modes = grid.modes();
    let coeffs = (0..grid.spectral_len())
        .map(|m| {
            let k = modes.k_op[m];
            (0..grid.dim())
                .map(|a| I * k[a] * u.component(a).coeffs()[m])
                .sum()
        })
        .collect();
    ScalarField::from_coeffs(grid, coeffs).expect("length preserved")
}

/// (∇·A)_i = Σ_j ∂_j A_ij.
pub fn tensor_divergence(a: &TensorField) -> VectorField {
    let grid = *a.grid();
    let mut coeffs = tensor_divergence_coeffs(a);
    let comps = coeffs
        .drain(..)
        .map(|c| ScalarField::from_coeffs(grid, c).expect("length preserved"))
        .collect();
    VectorField::from_components(comps).expect("same grid")
}

pub(crate) fn tensor_divergence_coeffs(a: &TensorField) -> Vec<Vec<Complex64>> {
    let grid = *a.grid();
    let modes = grid.modes();
    let dim = grid.dim();
    (0..dim)
        .map(|i| {
            (0..grid.spectral_len())
                .map(|m| {
                    let k = modes.k_op[m];
                    (0..dim).map(|j| I * k[j] * a.entry(i, j).coeffs()[m]).sum()
                })
                .collect()
        })
        .collect()
}

/// Spectral Laplacian, symbol −|k|² (operator wavenumbers).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let modes = f.grid().modes();
    f.map_coeffs(|m, c| -modes.k_op_sq(m) * c)
}

pub fn vector_laplacian(u: &VectorField) -> VectorField {
    let comps = u.components().iter().map(laplacian).collect();
    VectorField::from_components(comps)
        .expect("same grid")
        .with_flag(u.is_solenoidal())
}

/// Riesz transform R_j, symbol −i k_j/|k|; zero where |k| = 0.
pub fn riesz(f: &ScalarField, j: usize) -> ScalarField {
    assert!(j < f.grid().dim(), "axis {j} out of range");
    let modes = f.grid().modes();
    f.map_coeffs(|m, c| {
        let k2 = modes.k_op_sq(m);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -I * (modes.k_op[m][j] / k2.sqrt()) * c
        }
    })
}

/// L(T) = Σ_{j,k} R_j R_k T_jk.
pub fn riesz_contract(t: &TensorField) -> ScalarField {
    let grid = *t.grid();
    let modes = grid.modes();
    let dim = grid.dim();
    let coeffs = (0..grid.spectral_len())
        .map(|m| {
            let k = modes.k_op[m];
            let k2 = modes.k_op_sq(m);
            if k2 == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                for l in 0..dim {
                    acc += t.entry(j, l).coeffs()[m] * (k[j] * k[l]);
                }
            }
            -acc / k2
        })
        .collect();
    ScalarField::from_coeffs(grid, coeffs).expect("length preserved")
}

/// Kinematic pressure P = Σ R_jR_k(u_j u_k), mean zero.
pub fn pressure_from_velocity(u: &VectorField) -> ScalarField {
    let t = TensorField::sym_outer(u, u).expect("same grid");
    riesz_contract(&t)
}

/// Helmholtz–Weyl projection, symbol δ_ij − k_i k_j/|k|²; the |k| = 0 modes are zeroed.
pub fn leray_project(f: &VectorField) -> VectorField {
    let grid = *f.grid();
    let mut coeffs = f.coeff_vecs();
    leray_in_place(&grid, &mut coeffs);
    VectorField::from_coeffs(grid, coeffs)
        .expect("same grid")
        .with_flag(true)
}

pub fn leray_in_place(grid: &Grid, comps: &mut [Vec<Complex64>]) {
    let modes = grid.modes();
    let dim = grid.dim();
    for m in 0..grid.spectral_len() {
        let k = modes.k_op[m];
        let k2 = modes.k_op_sq(m);
        if k2 == 0.0 {
            comps
                .iter_mut()
                .for_each(|c| c[m] = Complex64::new(0.0, 0.0));
            continue;
        }
        let mut kdot = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            kdot += comps[a][m] * k[a];
        }
        let s = kdot / k2;
        for a in 0..dim {
            comps[a][m] -= s * k[a];
        }
    }
}

pub fn dealias_in_place(grid: &Grid, c: &mut [Complex64]) {
    let modes = grid.modes();
    for (v, keep) in c.iter_mut().zip(&modes.in_band) {
        if !keep {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

/// 2/3-rule truncation: any mode with |index| > n/3 on some axis is removed.
pub trait Dealias {
    fn dealias(&self) -> Self;
}

impl Dealias for ScalarField {
    fn dealias(&self) -> Self {
        let mut c = self.coeffs().to_vec();
        dealias_in_place(self.grid(), &mut c);
        ScalarField::from_coeffs(*self.grid(), c).expect("length preserved")
    }
}

impl Dealias for VectorField {
    fn dealias(&self) -> Self {
        let comps = self.components().iter().map(Dealias::dealias).collect();
        VectorField::from_components(comps)
            .expect("same grid")
            .with_flag(self.is_solenoidal())
    }
}

impl Dealias for TensorField {
    fn dealias(&self) -> Self {
        self.map_entries(Dealias::dealias)
    }
}

/// Spectral interpolation of `u` onto an `n`-point grid (n ≥ the current
/// size) by zero padding. Modes on a Nyquist plane of the source grid are
/// dropped: they carry no derivative information under the operator
/// convention above.
pub fn zero_pad(u: &VectorField, n: usize) -> Result<VectorField> {
    let g = *u.grid();
    if n < g.n() {
        return Err(crate::error::Error::InvalidParameter(format!(
            "cannot pad {} points down to {n}",
            g.n()
        )));
    }
    if n == g.n() {
        return Ok(u.clone());
    }
    let fine = Grid::new(g.dim(), n, g.box_length())?;
    let nyq = (g.n() / 2) as i64;
    let comps = u
        .components()
        .iter()
        .map(|c| {
            let mut out = vec![Complex64::new(0.0, 0.0); fine.spectral_len()];
            for (m, z) in c.coeffs().iter().enumerate() {
                let idx = g.mode_index(m);
                if idx[..g.dim()].iter().any(|i| i.abs() == nyq) {
                    continue;
                }
                out[fine.mode_flat(idx).expect("coarse modes fit the fine grid")] = *z;
            }
            ScalarField::from_coeffs(fine, out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField::from_components(comps)?.with_flag(u.is_solenoidal()))
}

/// Grid quadrature ⟨a, b⟩ = Σ_x a(x)·b(x) (L/n)^N.
pub fn inner_product(a: &VectorField, b: &VectorField) -> Result<f64> {
    check_same(a.grid(), b.grid())?;
    let mut s = 0.0;
    for (x, y) in a.components().iter().zip(b.components()) {
        s += x
            .values()
            .iter()
            .zip(y.values())
            .map(|(p, q)| p * q)
            .sum::<f64>();
    }
    Ok(s * a.grid().cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g2() -> Grid {
        Grid::new(2, 16, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_sine() {
        let l = 3.0;
        let g = Grid::new(3, 16, l).unwrap();
        let k = 2.0 * PI / l;
        let f = ScalarField::from_fn(g, |x| (k * x[0]).sin()).unwrap();
        let d = derivative(&f, 0);
        let exact: Vec<f64> = (0..g.real_len())
            .map(|i| k * (k * g.point(i)[0]).cos())
            .collect();
        assert!(max_diff(d.values(), &exact) < 1e-12 * k);
    }

    #[test]
    fn shear_is_divergence_free() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
        assert!(divergence(&u).values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn laplacian_of_mode() {
        let g = g2();
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0] + 3.0 * x[1]).cos()).unwrap();
        let lap = laplacian(&f);
        let exact: Vec<f64> = f.values().iter().map(|v| -13.0 * v).collect();
        assert!(max_diff(lap.values(), &exact) < 1e-12);
    }

    #[test]
    fn riesz_of_cosine() {
        // R_x cos x: symbol −i·sign(k) maps cos to sin.
        let g = g2();
        let f = ScalarField::from_fn(g, |x| x[0].cos()).unwrap();
        let r = riesz(&f, 0);
        let exact: Vec<f64> = (0..g.real_len()).map(|i| g.point(i)[0].sin()).collect();
        assert!(max_diff(r.values(), &exact) < 1e-14);
        let c = ScalarField::from_values(g, vec![3.0; g.real_len()]).unwrap();
        assert!(riesz(&c, 1).values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity() {
        let g = g2();
        let f =
            ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[1]).cos()).unwrap();
        let mut acc = vec![0.0; g.real_len()];
        for j in 0..2 {
            let rr = riesz(&riesz(&f, j), j);
            acc.iter_mut().zip(rr.values()).for_each(|(a, v)| *a += v);
        }
        let neg: Vec<f64> = f.values().iter().map(|v| -v).collect();
        assert!(max_diff(&acc, &neg) < 1e-14);
    }

    #[test]
    fn taylor_green_pressure() {
        let g = g2();
        let u = VectorField::from_fn(g, |x| {
            [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
        })
        .unwrap();
        let p = pressure_from_velocity(&u);
        let exact: Vec<f64> = (0..g.real_len())
            .map(|i| {
                let x = g.point(i);
                0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
            })
            .collect();
        assert!(max_diff(p.values(), &exact) < 1e-14);
        assert!(pressure_from_velocity(&VectorField::zeros(g))
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn leray_keeps_shear_pair() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let f = VectorField::from_fn(g, |x| [x[1].sin(), x[0].sin(), 0.0]).unwrap();
        let pf = leray_project(&f);
        for a in 0..3 {
            assert!(max_diff(pf.component(a).values(), f.component(a).values()) < 1e-14);
        }
        assert!(pf.is_solenoidal());
    }

    #[test]
    fn leray_kills_gradient() {
        let g = g2();
        let phi = ScalarField::from_fn(g, |x| (x[0] + x[1]).sin() * (2.0 * x[1]).cos()).unwrap();
        let pg = leray_project(&gradient(&phi));
        assert!(pg
            .components()
            .iter()
            .all(|c| c.values().iter().all(|v| v.abs() < 1e-14)));
    }

    #[test]
    fn dealias_examples() {
        let g = g2();
        let band = ScalarField::from_fn(g, |x| (5.0 * x[0]).sin() + (3.0 * x[1]).cos()).unwrap();
        assert!(max_diff(band.dealias().values(), band.values()) < 1e-14);
        let nyq = ScalarField::from_fn(g, |x| (8.0 * x[0]).cos()).unwrap();
        assert!(nyq.dealias().values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn dealiased_product_matches_double_resolution() {
        // sin(5x)² = ½ − ½cos(10x): on n=16 the k=10 part aliases to k=6.
        let a = 5.0;
        let coarse = g2();
        let fine = Grid::new(2, 32, 2.0 * PI).unwrap();
        let prod = |g: Grid| ScalarField::from_fn(g, |x| (a * x[0]).sin().powi(2)).unwrap();
        let c = prod(coarse).dealias();
        let f = prod(fine);
        for m in 0..coarse.spectral_len() {
            let idx = coarse.mode_index(m);
            let in_band = idx
                .iter()
                .all(|i| i.unsigned_abs() as usize <= coarse.dealias_cutoff());
            let reference = if in_band {
                f.coeffs()[fine.mode_flat(idx).unwrap()]
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((c.coeffs()[m] - reference).norm() < 1e-15, "mode {idx:?}");
        }
    }
}
