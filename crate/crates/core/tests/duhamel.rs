use std::f64::consts::PI;

use nsap_core::duhamel::{
    duhamel_residual, heat_semigroup, picard_solve, picard_with_halving, smoothing_rate_fit,
    smoothing_rate_fit_ensemble, DerivativeOrder, PicardConfig,
};
use nsap_core::initial::{random_solenoidal, taylor_green, Spectrum};
use nsap_core::monitor::MonitorConfig;
use nsap_core::solver::{run, SolverConfig};
use nsap_core::{Grid, VectorField};

fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
    (a.sub(b).unwrap().energy_spectral() / b.energy_spectral()).sqrt()
}

#[test]
fn zero_datum_converges_immediately() {
    let g = Grid::new(3, 8, 2.0 * PI).unwrap();
    let res = picard_solve(
        &VectorField::zeros(g).mark_solenoidal().unwrap(),
        &PicardConfig::default(),
    )
    .unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    assert_eq!(res.final_distance, 0.0);
    assert!(res.samples.iter().all(|u| u.max_abs() == 0.0));
}

#[test]
fn two_dimensional_taylor_green_is_reproduced() {
    // The nonlinearity of 2-D Taylor–Green is a pure gradient, so the mild
    // solution is the heat flow e^{−2νt}u₀.
    let g = Grid::new(2, 32, 2.0 * PI).unwrap();
    let u0 = taylor_green(g, 1.0);
    let cfg = PicardConfig {
        t_end: 0.2,
        viscosity: 0.5,
        ..Default::default()
    };
    let res = picard_solve(&u0, &cfg).unwrap();
    assert!(res.converged);
    for (t, u) in res.times.iter().zip(&res.samples) {
        let exact = u0.scale((-2.0 * cfg.viscosity * t).exp());
        assert!(rel_l2(u, &exact) <= 1e-12, "t = {t}");
    }
}

#[test]
fn converged_iterate_has_small_residual() {
    let g = Grid::new(3, 16, 2.0 * PI).unwrap();
    let u0 = random_solenoidal(g, 1.0, Spectrum::Peaked { k0: 2.0 }, 7);
    // With the L² distance the residual is directly comparable to tol.
    let cfg = PicardConfig {
        t_end: 0.05,
        p_norm: 2.0,
        tol: 1e-9,
        ..Default::default()
    };
    let res = picard_solve(&u0, &cfg).unwrap();
    assert!(res.converged);
    assert!(res.worst_ratio() < 1.0);
    let r = duhamel_residual(&u0, &res, &cfg).unwrap();
    let worst = r.iter().copied().fold(0.0, f64::max);
    assert!(worst <= 2.0 * cfg.tol, "residual {worst:e}");
}

#[test]
fn halving_recovers_contraction() {
    let g = Grid::new(3, 16, 2.0 * PI).unwrap();
    let u0 = random_solenoidal(g, 40.0, Spectrum::Peaked { k0: 2.0 }, 2);
    let cfg = PicardConfig {
        t_end: 0.5,
        max_iter: 30,
        ..Default::default()
    };
    let first = picard_solve(&u0, &cfg).unwrap();
    assert!(!first.converged);
    let (res, horizon) = picard_with_halving(&u0, &cfg, 12).unwrap();
    assert!(res.converged);
    assert!(horizon < cfg.t_end);
    assert!(res.worst_ratio() < first.worst_ratio());
}

#[test]
fn semigroup_property() {
    let g = Grid::new(3, 16, 2.0 * PI).unwrap();
    let u = random_solenoidal(g, 1.0, Spectrum::Flat, 9);
    let two = heat_semigroup(&heat_semigroup(&u, 0.1, 0.7).unwrap(), 0.1, 0.7).unwrap();
    let once = heat_semigroup(&u, 0.2, 0.7).unwrap();
    assert!(rel_l2(&two, &once) <= 1e-14);
    assert!(once.is_solenoidal());
}

#[test]
fn picard_matches_the_solver() {
    let g = Grid::new(3, 16, 2.0 * PI).unwrap();
    let u0 = random_solenoidal(g, 1.0, Spectrum::Peaked { k0: 2.0 }, 12);
    let pc = PicardConfig {
        t_end: 0.05,
        time_nodes: 64,
        ..Default::default()
    };
    let res = picard_solve(&u0, &pc).unwrap();
    let sc = SolverConfig {
        dt: pc.t_end / 128.0,
        t_end: pc.t_end,
        snapshot_interval: pc.t_end,
        ..Default::default()
    };
    let traj = run(&u0, &sc, &MonitorConfig::default()).unwrap();
    let d = rel_l2(res.samples.last().unwrap(), &traj.final_snapshot().u);
    assert!(d <= 1e-5, "relative distance {d:e}");
}

#[test]
fn smooth_data_has_no_lp_smoothing_singularity() {
    // q = p and no derivatives: σ = 0, and a smooth datum shows a flat norm.
    let g = Grid::new(3, 16, 2.0 * PI).unwrap();
    let u0 = taylor_green(g, 1.0);
    let times: Vec<f64> = (0..8).map(|i| 1e-4 * 2f64.powi(i)).collect();
    let cfg = SolverConfig {
        dt: 5e-5,
        t_end: *times.last().unwrap(),
        snapshot_times: Some(times),
        ..Default::default()
    };
    let traj = run(&u0, &cfg, &MonitorConfig::default()).unwrap();
    let fit = smoothing_rate_fit(
        &traj.snapshots,
        &cfg,
        4.0,
        4.0,
        &DerivativeOrder::default(),
        (0.0, 1.0),
    )
    .unwrap();
    assert_eq!(fit.sigma_theory, 0.0);
    assert_eq!(fit.points, 8);
    assert!(fit.sigma_hat.abs() < 0.02, "{fit:?}");
    let one = smoothing_rate_fit_ensemble(
        &[&traj.snapshots],
        &cfg,
        4.0,
        4.0,
        &DerivativeOrder::default(),
        (0.0, 1.0),
    )
    .unwrap();
    assert!((one.sigma_hat - fit.sigma_hat).abs() <= 1e-12);
}

#[test]
fn ensemble_rejects_mismatched_members() {
    let g = Grid::new(3, 8, 2.0 * PI).unwrap();
    let u0 = taylor_green(g, 1.0);
    let mon = MonitorConfig::default();
    let a_cfg = SolverConfig {
        dt: 0.01,
        t_end: 0.05,
        snapshot_interval: 0.01,
        ..Default::default()
    };
    let b_cfg = SolverConfig {
        snapshot_interval: 0.0125,
        ..a_cfg.clone()
    };
    let a = run(&u0, &a_cfg, &mon).unwrap();
    let b = run(&u0, &b_cfg, &mon).unwrap();
    let order = DerivativeOrder::default();
    assert!(smoothing_rate_fit_ensemble(
        &[&a.snapshots, &b.snapshots],
        &a_cfg,
        4.0,
        8.0,
        &order,
        (0.0, 1.0)
    )
    .is_err());
    assert!(smoothing_rate_fit_ensemble(&[], &a_cfg, 4.0, 8.0, &order, (0.0, 1.0)).is_err());
}
