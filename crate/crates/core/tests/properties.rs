//! Invariants of the spectral layer, the κ functional, configuration
//! serialization and the report semantics, checked on generated inputs.

use std::f64::consts::PI;

use nsap_core::duhamel::PicardConfig;
use nsap_core::initial::{random_solenoidal, Spectrum};
use nsap_core::monitor::{
    alpha_exact, kappa, lp_norm, ConstantKind, ExponentTable, InequalityReport, MonitorConfig,
    Verdict,
};
use nsap_core::solver::{NonlinearForm, SolverConfig};
use nsap_core::spectral::{
    derivative, divergence, inner_product, leray_project, read_checkpoint, write_checkpoint,
    zero_pad,
};
use nsap_core::{Grid, ScalarField, VectorField};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn grid_for(dim: usize) -> Grid {
    Grid::new(dim, if dim == 2 { 16 } else { 8 }, 2.0 * PI).unwrap()
}

/// Unstructured field: i.i.d. normal samples, neither solenoidal nor band-limited.
fn noise(grid: Grid, seed: u64, scale: f64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..grid.dim())
        .map(|_| {
            let v = (0..grid.real_len())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                })
                .collect::<Vec<f64>>();
            ScalarField::from_values(grid, v).unwrap()
        })
        .collect();
    VectorField::from_components(comps).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent_and_orthogonal(seed in any::<u64>(), dim in 2usize..=3, scale in 0.01f64..100.0) {
        let f = noise(grid_for(dim), seed, scale);
        let pf = leray_project(&f);
        let ppf = leray_project(&pf);
        prop_assert!(ppf.sub(&pf).unwrap().max_abs() <= 1e-12 * f.max_abs());
        prop_assert!(divergence(&pf).values().iter().all(|d| d.abs() <= 1e-11 * f.max_abs()));
        let rest = f.sub(&pf).unwrap();
        let cross = inner_product(&pf, &rest).unwrap();
        prop_assert!(cross.abs() <= 1e-12 * f.energy_spectral());
    }

    #[test]
    fn parseval_holds(seed in any::<u64>(), dim in 2usize..=3) {
        let f = noise(grid_for(dim), seed, 1.0);
        let quadrature = inner_product(&f, &f).unwrap();
        prop_assert!(rel(quadrature, f.energy_spectral()) <= 1e-12);
    }

    #[test]
    fn mixed_derivatives_commute(seed in any::<u64>()) {
        let f = noise(grid_for(3), seed, 1.0).component(0).clone();
        let xy = derivative(&derivative(&f, 0), 1);
        let yx = derivative(&derivative(&f, 1), 0);
        let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(xy.values().iter().zip(yx.values()).all(|(a, b)| (a - b).abs() <= 1e-11 * scale));
    }

    #[test]
    fn kappa_is_homogeneous_and_dominates_the_critical_norm(
        seed in any::<u64>(), c in 0.01f64..100.0, p in 3.5f64..12.0,
    ) {
        let u = random_solenoidal(grid_for(3), 1.0, Spectrum::Peaked { k0: 2.0 }, seed);
        let k = kappa(&u, p).unwrap();
        let kc = kappa(&u.scale(c), p).unwrap();
        prop_assert!(rel(kc.value, c * k.value) <= 1e-12);
        prop_assert!(k.value >= lp_norm(&u, 3.0).unwrap() * (1.0 - 1e-10));
        prop_assert!(k.identity_residual() <= 1e-12);
    }

    #[test]
    fn random_fields_are_reproducible_and_normalized(seed in any::<u64>(), amp in 0.01f64..10.0, dim in 2usize..=3) {
        let g = grid_for(dim);
        let a = random_solenoidal(g, amp, Spectrum::Peaked { k0: 2.0 }, seed);
        let b = random_solenoidal(g, amp, Spectrum::Peaked { k0: 2.0 }, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.is_solenoidal());
        let rms = (a.energy_spectral() / g.volume()).sqrt();
        prop_assert!(rel(rms, amp) <= 1e-12);
    }

    #[test]
    fn zero_padding_interpolates(seed in any::<u64>()) {
        let g = Grid::new(3, 12, 2.0 * PI).unwrap();
        let u = random_solenoidal(g, 1.0, Spectrum::Flat, seed);
        let v = zero_pad(&u, 24).unwrap();
        prop_assert!(rel(v.energy_spectral(), u.energy_spectral()) <= 1e-12);
        // Every second fine sample is a coarse sample.
        let (n, f) = (12usize, 24usize);
        for (i, j, k) in [(0, 0, 0), (3, 5, 7), (11, 2, 9)] {
            let coarse = u.component(1).values()[(i * n + j) * n + k];
            let fine = v.component(1).values()[(2 * i * f + 2 * j) * f + 2 * k];
            prop_assert!((coarse - fine).abs() <= 1e-12);
        }
    }

    #[test]
    fn alpha_matches_closed_form(num in 7i64..200) {
        let p = Ratio::new(num, 2);
        prop_assert_eq!(alpha_exact(p, 3).unwrap(), p * (p - 1) / (p - 3));
        let e = ExponentTable::new(num as f64 / 2.0, 3).unwrap();
        let (pf, a) = (num as f64 / 2.0, *alpha_exact(p, 3).unwrap().numer() as f64 / *alpha_exact(p, 3).unwrap().denom() as f64);
        prop_assert!(rel(e.alpha, a) <= 1e-14);
        prop_assert!(rel(e.kappa_lp + e.kappa_l2, 1.0) <= 1e-15);
        prop_assert!(rel(e.small_data_exponent, 2.0 * pf / (pf - 3.0)) <= 1e-15);
    }

    #[test]
    fn solver_config_roundtrips(
        nu in 1e-4f64..10.0, dt in 1e-5f64..0.1, t_end in 0.0f64..10.0, skew in any::<bool>(),
        times in proptest::collection::vec(0.0f64..1.0, 0..5),
    ) {
        let mut ts = times.clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let cfg = SolverConfig {
            viscosity: nu,
            dt,
            t_end,
            snapshot_times: if ts.is_empty() { None } else { Some(ts) },
            nonlinear_form: if skew { NonlinearForm::SkewSymmetric } else { NonlinearForm::Divergence },
            blowup_ceiling: Some(nu * 1e3),
            ..Default::default()
        };
        let back: SolverConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn monitor_and_picard_configs_roundtrip(stride in 1usize..100, p in 2.0f64..20.0, nodes in 4usize..64) {
        let m = MonitorConfig { stride, p_set: vec![p, p + 1.0], balance: true, balance_p: Some(vec![p]), ..Default::default() };
        let back: MonitorConfig = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
        let pc = PicardConfig { time_nodes: 2 * nodes, p_norm: p, ..Default::default() };
        let back: PicardConfig = serde_json::from_str(&serde_json::to_string(&pc).unwrap()).unwrap();
        prop_assert_eq!(back, pc);
    }

    #[test]
    fn holding_verdict_bounds_every_sample(
        pairs in proptest::collection::vec((0.0f64..10.0, 0.1f64..10.0), 1..40),
    ) {
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let t = (0..lhs.len()).map(|i| i as f64).collect();
        let mut r = InequalityReport::new("x", "test", t, lhs.clone(), rhs.clone(), ConstantKind::Empirical, 0.0, 0.0);
        r.evaluate();
        prop_assert_eq!(r.verdict, Verdict::HoldsWithC);
        for (l, h) in lhs.iter().zip(&rhs) {
            prop_assert!(*l <= r.c_emp * h * (1.0 + 1e-12));
        }
        prop_assert!(r.recheck());
    }
}

#[test]
fn checkpoint_roundtrip_preserves_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.ckpt");
    let u = random_solenoidal(grid_for(3), 0.7, Spectrum::Flat, 3);
    write_checkpoint(&path, &u, 0.125).unwrap();
    let (v, t) = read_checkpoint(&path).unwrap();
    assert_eq!(t, 0.125);
    assert_eq!(v.grid(), u.grid());
    for (a, b) in v.components().iter().zip(u.components()) {
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(v.is_solenoidal());
}
