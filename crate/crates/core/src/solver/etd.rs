//! ETDRK2 multipliers and the per-step dissipation quadrature, tabulated by
//! the integer |index|² so each distinct decay rate is evaluated once.

use num_complex::Complex64;

use crate::spectral::Grid;

/// φ₁(z) = (e^z − 1)/z.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        series(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// φ₂(z) = (e^z − 1 − z)/z².
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        series(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Σ_j z^j/(j+m)!, enough terms for |z| < 0.5 at double precision.
fn series(z: f64, m: u32) -> f64 {
    let mut fact: f64 = (1..=m).map(f64::from).product();
    let mut term_pow = 1.0;
    let mut sum = 0.0;
    for j in 0..20u32 {
        sum += term_pow / fact;
        term_pow *= z;
        fact *= f64::from(j + m + 1);
    }
    sum
}

/// 5-point Gauss–Legendre nodes and weights on [−1, 1].
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Multipliers for one step size.
pub struct EtdTables {
    pub h: f64,
    pub decay: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// ∫₀ʰ e^{−2λs} ds.
    diss_exact: Vec<f64>,
    /// Per node: (weight, e^{−λs}, sφ₁(−λs), (s²/h)φ₂(−λs)).
    diss_nodes: Vec<[[f64; 4]; 5]>,
}

impl EtdTables {
    pub fn new(grid: &Grid, viscosity: f64, h: f64) -> Self {
        let modes = grid.modes();
        let ku2 = grid.k_unit() * grid.k_unit();
        let count = modes.max_index_sq as usize + 1;
        let mut t = Self {
            h,
            decay: Vec::with_capacity(count),
            p1: Vec::with_capacity(count),
            p2: Vec::with_capacity(count),
            diss_exact: Vec::with_capacity(count),
            diss_nodes: Vec::with_capacity(count),
        };
        for m in 0..count {
            let lam = viscosity * ku2 * m as f64;
            let z = -lam * h;
            t.decay.push(z.exp());
            t.p1.push(h * phi1(z));
            t.p2.push(h * phi2(z));
            t.diss_exact.push(h * phi1(2.0 * z));
            let mut nodes = [[0.0; 4]; 5];
            for (q, node) in nodes.iter_mut().enumerate() {
                let s = 0.5 * h * (1.0 + GL_X[q]);
                let zs = -lam * s;
                *node = [
                    0.5 * h * GL_W[q],
                    zs.exp(),
                    s * phi1(zs),
                    s * s / h * phi2(zs),
                ];
            }
            t.diss_nodes.push(nodes);
        }
        t
    }

    /// ∫₀ʰ |û(s)|² ds for one mode along the ETDRK2 continuous extension
    /// û(s) = e^{−λs}û₀ + sφ₁(−λs)N₀ + (s²/h)φ₂(−λs)(N₁ − N₀).
    /// The pure-decay part is integrated exactly, the forced part by
    /// Gauss–Legendre quadrature.
    pub fn mode_energy_integral(
        &self,
        m: usize,
        u0: Complex64,
        n0: Complex64,
        n1: Complex64,
    ) -> f64 {
        let mut acc = u0.norm_sqr() * self.diss_exact[m];
        if n0 == Complex64::new(0.0, 0.0) && n1 == Complex64::new(0.0, 0.0) {
            return acc;
        }
        let dn = n1 - n0;
        for node in &self.diss_nodes[m] {
            let r = n0 * node[2] + dn * node[3];
            acc += node[0] * (2.0 * (u0.conj() * r).re * node[1] + r.norm_sqr());
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_match_closed_forms() {
        for z in [-1e-8f64, -1e-3, -0.3, -0.49, -0.51, -2.0, -40.0] {
            let p1 = z.exp_m1() / z;
            let p2 = (f64::exp(z) - 1.0 - z) / (z * z);
            assert!((phi1(z) - p1).abs() < 1e-9 * p1.abs().max(1.0), "phi1({z})");
            if z.abs() > 1e-3 {
                assert!((phi2(z) - p2).abs() < 1e-9 * p2.abs().max(1.0), "phi2({z})");
            }
        }
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
        // Continuity across the series/closed-form switch.
        assert!((phi2(-0.5 + 1e-12) - phi2(-0.5 - 1e-12)).abs() < 1e-12);
        assert!((phi1(-0.01 + 1e-14) - phi1(-0.01 - 1e-14)).abs() < 1e-13);
    }

    #[test]
    fn unforced_energy_integral_is_exact() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let t = EtdTables::new(&g, 0.3, 0.01);
        let lam = 0.3 * g.k_unit().powi(2) * 5.0;
        let u0 = Complex64::new(0.7, -0.2);
        let exact = u0.norm_sqr() * (1.0 - (-2.0 * lam * 0.01f64).exp()) / (2.0 * lam);
        let z = Complex64::new(0.0, 0.0);
        assert!(
            (t.mode_energy_integral(5, u0, z, z) - exact).abs() < 1e-15 * exact.max(1e-300) * 10.0
        );
    }

    #[test]
    fn forced_energy_integral_matches_fine_quadrature() {
        // Constant forcing: û(s) = e^{−λs}û₀ + (1 − e^{−λs})/λ·N.
        let g = Grid::new(2, 16, 1.0).unwrap();
        let nu = 0.01;
        let h = 0.05;
        let t = EtdTables::new(&g, nu, h);
        let m = 13usize;
        let lam = nu * g.k_unit().powi(2) * m as f64;
        let (u0, f) = (Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.8));
        let steps = 200_000;
        let ds = h / steps as f64;
        let exact: f64 = (0..steps)
            .map(|i| {
                let s = (i as f64 + 0.5) * ds;
                let u = u0 * (-lam * s).exp() + f * (-(-lam * s).exp_m1() / lam);
                u.norm_sqr() * ds
            })
            .sum();
        let got = t.mode_energy_integral(m, u0, f, f);
        assert!((got - exact).abs() < 1e-9 * exact, "{got} vs {exact}");
    }
}
