use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{
    check_same, dealias_in_place, derivative, leray_in_place, tensor_divergence_coeffs,
    ScalarField, TensorField, VectorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearForm {
    /// ∇·(u⊗u).
    Divergence,
    /// ½[∇·(u⊗u) + (u·∇)u]; energy-neutral under grid quadrature.
    #[default]
    SkewSymmetric,
}

/// Coefficients of ℙ·B(a, b), where B is the symmetric bilinear form whose
/// diagonal is the chosen nonlinearity:
/// divergence: B(a,b) = ∇·(a⊗_s b);
/// skew: B(a,b) = ½∇·(a⊗_s b) + ¼[(a·∇)b + (b·∇)a].
pub(crate) fn bilinear_coeffs(
    a: &VectorField,
    b: &VectorField,
    form: NonlinearForm,
    dealias: bool,
) -> Vec<Vec<Complex64>> {
    let grid = *a.grid();
    let dim = grid.dim();
    let len = grid.real_len();
    let same = std::ptr::eq(a, b);
    let t = TensorField::sym_outer(a, b).expect("grids checked by caller");
    let mut out = tensor_divergence_coeffs(&t);
    if form == NonlinearForm::SkewSymmetric {
        out.iter_mut().flatten().for_each(|c| *c *= 0.5);
        let mut adv = vec![vec![0.0; len]; dim];
        // (x·∇)y accumulated into adv with weight w.
        let mut advect = |x: &VectorField, y: &VectorField, w: f64| {
            for (k, acc) in adv.iter_mut().enumerate() {
                for j in 0..dim {
                    let d = derivative(y.component(k), j);
                    let xj = x.component(j).values();
                    for ((o, &dv), &xv) in acc.iter_mut().zip(d.values()).zip(xj) {
                        *o += w * xv * dv;
                    }
                }
            }
        };
        if same {
            advect(a, a, 0.5);
        } else {
            advect(a, b, 0.25);
            advect(b, a, 0.25);
        }
        for (o, v) in out.iter_mut().zip(adv) {
            let f = ScalarField::from_values(grid, v).expect("finite products");
            o.iter_mut().zip(f.coeffs()).for_each(|(x, y)| *x += y);
        }
    }
    if dealias {
        out.iter_mut().for_each(|c| dealias_in_place(&grid, c));
    }
    leray_in_place(&grid, &mut out);
    out
}

/// ℙ∇·(u⊗u) (or its skew-symmetric form), dealiased when requested.
pub fn nonlinear_term(u: &VectorField, form: NonlinearForm, dealias: bool) -> VectorField {
    let c = bilinear_coeffs(u, u, form, dealias);
    VectorField::from_coeffs(*u.grid(), c)
        .expect("same grid")
        .with_flag(true)
}

/// ℙ[2B(v,w) + B(w,w)] = nonlinear_term(v+w) − nonlinear_term(v), evaluated
/// as the single bilinear term B(2v + w, w).
pub fn perturbed_nonlinear(
    v: &VectorField,
    w: &VectorField,
    form: NonlinearForm,
    dealias: bool,
) -> Result<VectorField> {
    check_same(v.grid(), w.grid())?;
    let a = v.lincomb(2.0, w, 1.0)?;
    let c = bilinear_coeffs(&a, w, form, dealias);
    Ok(VectorField::from_coeffs(*v.grid(), c)?.with_flag(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{random_solenoidal, Spectrum};
    use crate::spectral::{inner_product, Grid};
    use std::f64::consts::PI;

    fn rel(a: &VectorField, b: &VectorField) -> f64 {
        let d = a.sub(b).unwrap();
        d.energy_spectral().sqrt() / b.energy_spectral().sqrt().max(1e-300)
    }

    #[test]
    fn zero_field_gives_zero() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let z = VectorField::zeros(g);
        let n = nonlinear_term(&z, NonlinearForm::SkewSymmetric, true);
        assert_eq!(n.energy_spectral(), 0.0);
    }

    #[test]
    fn taylor_green_nonlinearity_vanishes() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| {
            [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
        })
        .unwrap();
        for form in [NonlinearForm::Divergence, NonlinearForm::SkewSymmetric] {
            let n = nonlinear_term(&u, form, true);
            assert!(n.energy_spectral().sqrt() < 1e-14, "{form:?}");
        }
    }

    #[test]
    fn skew_form_is_energy_neutral() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let u = random_solenoidal(g, 1.0, Spectrum::Peaked { k0: 3.0 }, 7);
        let n = nonlinear_term(&u, NonlinearForm::SkewSymmetric, true);
        let ip = inner_product(&n, &u).unwrap();
        let scale = n.energy_spectral().sqrt() * u.energy_spectral().sqrt();
        assert!(ip.abs() < 1e-12 * scale, "{ip} vs {scale}");
    }

    #[test]
    fn perturbed_reductions_and_identity() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let v = random_solenoidal(g, 1.0, Spectrum::Peaked { k0: 2.0 }, 1);
        let w = random_solenoidal(g, 0.3, Spectrum::Peaked { k0: 3.0 }, 2);
        for form in [NonlinearForm::Divergence, NonlinearForm::SkewSymmetric] {
            let zero = VectorField::zeros(g);
            assert_eq!(
                perturbed_nonlinear(&v, &zero, form, true)
                    .unwrap()
                    .energy_spectral(),
                0.0
            );
            let direct = nonlinear_term(&w, form, true);
            assert!(
                rel(
                    &perturbed_nonlinear(&zero, &w, form, true).unwrap(),
                    &direct
                ) < 1e-14
            );
            let sum = nonlinear_term(&v.add(&w).unwrap(), form, true);
            let split = nonlinear_term(&v, form, true)
                .add(&perturbed_nonlinear(&v, &w, form, true).unwrap())
                .unwrap();
            assert!(rel(&split, &sum) < 1e-10, "{form:?}");
        }
    }
}
