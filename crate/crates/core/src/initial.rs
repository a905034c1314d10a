//! Initial-condition library. Every generator returns a projected,
//! mean-free, band-limited (2/3 rule) field; random fields are a pure
//! function of the seed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::spectral::{leray_project, Dealias, Grid, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Spectrum {
    /// E(k) ∝ k⁴ exp(−k²/k0²).
    Peaked { k0: f64 },
    /// E(k) constant up to the dealiasing cutoff.
    Flat,
}

impl Spectrum {
    fn shell_energy(&self, k: f64) -> f64 {
        match *self {
            Spectrum::Peaked { k0 } => k.powi(4) * (-(k * k) / (k0 * k0)).exp(),
            Spectrum::Flat => 1.0,
        }
    }
}

fn rms(u: &VectorField) -> f64 {
    (u.energy_spectral() / u.grid().volume()).sqrt()
}

/// Sign-flipped mode indices, or None when the mode is its own conjugate.
fn conjugate_key(dim: usize, idx: [i64; 3]) -> Option<[i64; 3]> {
    let mut neg = [0i64; 3];
    for a in 0..dim {
        neg[a] = -idx[a];
    }
    (neg != idx).then_some(neg)
}

fn stream_id(n: usize, idx: [i64; 3]) -> u64 {
    let span = 2 * n as u64 + 1;
    idx.iter()
        .fold(0u64, |acc, &i| acc * span + (i + n as i64) as u64)
}

/// Random solenoidal field with shell spectrum E(k) and uniformly random
/// phases, rescaled so that the root-mean-square of |u| equals `amplitude`.
///
/// Each mode draws from its own ChaCha stream keyed by (seed, mode), so the
/// field does not depend on iteration order or thread count.
pub fn random_solenoidal(grid: Grid, amplitude: f64, spectrum: Spectrum, seed: u64) -> VectorField {
    if amplitude == 0.0 {
        return VectorField::zeros(grid);
    }
    let dim = grid.dim();
    let modes = grid.modes();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); grid.spectral_len()]; dim];
    for m in 0..grid.spectral_len() {
        if !modes.in_band[m] || m == 0 {
            continue;
        }
        let idx = grid.mode_index(m);
        let partner = if idx[dim - 1] == 0 {
            match conjugate_key(dim, idx) {
                Some(neg) if neg > idx => continue,
                Some(neg) => grid.mode_flat(neg),
                None => continue,
            }
        } else {
            None
        };
        let k = modes.k_op[m];
        let kmag = modes.k_op_sq(m).sqrt();
        let mut rng = base.clone();
        rng.set_stream(stream_id(grid.n(), idx));
        let mut z = [Complex64::new(0.0, 0.0); 3];
        for za in z.iter_mut().take(dim) {
            *za = Complex64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
        }
        let kz: Complex64 = (0..dim).map(|a| z[a] * k[a]).sum::<Complex64>() / (kmag * kmag);
        for a in 0..dim {
            z[a] -= kz * k[a];
        }
        let norm = (0..dim).map(|a| z[a].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let amp = (spectrum.shell_energy(kmag) / kmag.powi(dim as i32 - 1)).sqrt() / norm;
        for a in 0..dim {
            coeffs[a][m] = z[a] * amp;
            if let Some(p) = partner {
                coeffs[a][p] = (z[a] * amp).conj();
            }
        }
    }
    let u = leray_project(&VectorField::from_coeffs(grid, coeffs).expect("grid-sized"));
    let r = rms(&u);
    if r == 0.0 {
        u
    } else {
        u.scale(amplitude / r)
    }
}

/// Taylor–Green vortex with prefactor `amplitude`:
/// 2-D (sin x cos y, −cos x sin y); 3-D (sin x cos y cos z, −cos x sin y cos z, 0),
/// with x measured in units of L/2π.
pub fn taylor_green(grid: Grid, amplitude: f64) -> VectorField {
    let k = grid.k_unit();
    let three = grid.dim() == 3;
    let u = VectorField::from_fn(grid, |x| {
        let (sx, cx, sy, cy) = (
            (k * x[0]).sin(),
            (k * x[0]).cos(),
            (k * x[1]).sin(),
            (k * x[1]).cos(),
        );
        let cz = if three { (k * x[2]).cos() } else { 1.0 };
        [amplitude * sx * cy * cz, -amplitude * cx * sy * cz, 0.0]
    })
    .expect("finite samples");
    leray_project(&u)
}

/// Smooth bump φ(s) = exp(1 − 1/(1 − s²)) on s < 1 and its derivative.
fn bump(s: f64) -> (f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - s * s;
    let f = (1.0 - 1.0 / d).exp();
    (f, -2.0 * s / (d * d) * f)
}

/// Swirl generated by a compactly supported potential ψ = φ(|x − c|/R):
/// 2-D u = (∂_yψ, −∂_xψ); 3-D u = ∇×(ψ·(1,1,1)/√3). Scaled to max|u| = amplitude.
pub fn localized_bump(grid: Grid, amplitude: f64, radius: f64, center: [f64; 3]) -> VectorField {
    if amplitude == 0.0 {
        return VectorField::zeros(grid);
    }
    let dim = grid.dim();
    let u = VectorField::from_fn(grid, |x| {
        let mut d = [0.0; 3];
        let mut r2 = 0.0;
        for a in 0..dim {
            d[a] = x[a] - center[a];
            r2 += d[a] * d[a];
        }
        let r = r2.sqrt();
        if r == 0.0 || r >= radius {
            return [0.0; 3];
        }
        let (_, dphi) = bump(r / radius);
        let g: Vec<f64> = (0..3).map(|a| dphi / radius * d[a] / r).collect();
        if dim == 2 {
            [g[1], -g[0], 0.0]
        } else {
            let c = 1.0 / 3f64.sqrt();
            [c * (g[1] - g[2]), c * (g[2] - g[0]), c * (g[0] - g[1])]
        }
    })
    .expect("finite samples");
    let u = leray_project(&u.dealias());
    let m = u.max_abs();
    if m == 0.0 {
        u
    } else {
        u.scale(amplitude / m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_is_exact_field() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = taylor_green(g, 1.0);
        for i in 0..g.real_len() {
            let x = g.point(i);
            assert!((u.component(0).values()[i] - x[0].sin() * x[1].cos()).abs() < 1e-15);
            assert!((u.component(1).values()[i] + x[0].cos() * x[1].sin()).abs() < 1e-15);
        }
        assert!(u.is_solenoidal());
    }

    #[test]
    fn random_field_properties() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let a = random_solenoidal(g, 0.5, Spectrum::Peaked { k0: 2.0 }, 11);
        let b = random_solenoidal(g, 0.5, Spectrum::Peaked { k0: 2.0 }, 11);
        let c = random_solenoidal(g, 0.5, Spectrum::Peaked { k0: 2.0 }, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.divergence_residual() < 1e-12);
        assert!((rms(&a) - 0.5).abs() < 1e-12);
        assert!(a.components().iter().all(|f| f.coeffs()[0].norm() == 0.0));
        // Hermitian consistency: the values are real and reproduce the coefficients.
        let back = VectorField::from_components(
            a.components()
                .iter()
                .map(|f| crate::ScalarField::from_values(g, f.values().to_vec()).unwrap())
                .collect(),
        )
        .unwrap();
        for (x, y) in back.components().iter().zip(a.components()) {
            for (p, q) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((p - q).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bump_is_localized_and_solenoidal() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 32, 1.0).unwrap();
            let u = localized_bump(g, 2.0, 0.25, [0.5; 3]);
            assert!(u.divergence_residual() < 1e-12);
            assert!((u.max_abs() - 2.0).abs() < 1e-12);
            assert!(crate::monitor::tail_mass(&u, 0.1) < 1e-3);
        }
    }
}
