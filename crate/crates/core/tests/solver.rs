use std::f64::consts::PI;

use nsap_core::duhamel::heat_semigroup;
use nsap_core::initial::{random_solenoidal, taylor_green, Spectrum};
use nsap_core::monitor::{lp_norm, rescale_field, MonitorConfig};
use nsap_core::solver::{run, run_coupled, run_from, NonlinearForm, RunStatus, SolverConfig};
use nsap_core::{Grid, VectorField};

fn cube(n: usize) -> Grid {
    Grid::new(3, n, 2.0 * PI).unwrap()
}

fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
    (a.sub(b).unwrap().energy_spectral() / b.energy_spectral()).sqrt()
}

fn mon() -> MonitorConfig {
    MonitorConfig {
        p_set: vec![4.0],
        ..Default::default()
    }
}

#[test]
fn stokes_energy_follows_the_modal_decay() {
    let u0 = random_solenoidal(cube(16), 1.0, Spectrum::Flat, 5);
    let nu = 0.3;
    let cfg = SolverConfig {
        viscosity: nu,
        dt: 0.01,
        t_end: 0.25,
        snapshot_interval: 0.05,
        nonlinear: false,
        ..Default::default()
    };
    let traj = run(&u0, &cfg, &mon()).unwrap();
    for s in &traj.snapshots {
        let exact = heat_semigroup(&u0, s.t, nu).unwrap().energy_spectral();
        let got = s.u.energy_spectral();
        assert!(
            (got - exact).abs() <= 1e-10 * exact,
            "t = {}: {got} vs {exact}",
            s.t
        );
    }
}

#[test]
fn scaling_symmetry_is_respected_by_the_integrator() {
    // u ↦ λu(λx, λ²t): running the rescaled datum on the shrunken box with
    // dt/λ² reproduces the rescaled solution.
    let lambda = 2.0;
    let u0 = random_solenoidal(cube(16), 0.5, Spectrum::Peaked { k0: 2.0 }, 8);
    let cfg = SolverConfig {
        dt: 0.004,
        t_end: 0.04,
        snapshot_interval: 0.04,
        ..Default::default()
    };
    let a = run(&u0, &cfg, &mon()).unwrap();
    let small = SolverConfig {
        dt: cfg.dt / (lambda * lambda),
        t_end: cfg.t_end / (lambda * lambda),
        snapshot_interval: cfg.t_end / (lambda * lambda),
        ..cfg.clone()
    };
    let b = run(&rescale_field(&u0, lambda).unwrap(), &small, &mon()).unwrap();
    let expect = rescale_field(&a.final_snapshot().u, lambda).unwrap();
    let got = &b.final_snapshot().u;
    let diff: f64 = got
        .components()
        .iter()
        .zip(expect.components())
        .flat_map(|(x, y)| {
            x.values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max);
    assert!(diff <= 1e-10 * expect.max_abs(), "max deviation {diff:e}");
}

#[test]
fn runs_are_bitwise_deterministic() {
    let u0 = random_solenoidal(cube(16), 1.0, Spectrum::Peaked { k0: 3.0 }, 2);
    let cfg = SolverConfig {
        dt: 0.005,
        t_end: 0.05,
        snapshot_interval: 0.025,
        ..Default::default()
    };
    let a = run(&u0, &cfg, &mon()).unwrap();
    let b = run(&u0, &cfg, &mon()).unwrap();
    assert_eq!(a.records, b.records);
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.t, y.t);
        assert_eq!(x.u, y.u);
    }
}

#[test]
fn resuming_reproduces_an_uninterrupted_run() {
    let u0 = random_solenoidal(cube(16), 1.0, Spectrum::Peaked { k0: 2.0 }, 4);
    let cfg = SolverConfig {
        dt: 0.005,
        t_end: 0.1,
        snapshot_interval: 0.05,
        ..Default::default()
    };
    let whole = run(&u0, &cfg, &mon()).unwrap();
    let half = run(
        &u0,
        &SolverConfig {
            t_end: 0.05,
            ..cfg.clone()
        },
        &mon(),
    )
    .unwrap();
    let mid = half.final_snapshot();
    let g0 = half.records.last().unwrap().grad_l2_integral;
    let rest = run_from(&mid.u, mid.t, g0, &cfg, &mon()).unwrap();
    let (a, b) = (whole.final_snapshot(), rest.final_snapshot());
    assert_eq!(a.t, b.t);
    assert!(rel_l2(&b.u, &a.u) <= 1e-13);
    let (ga, gb) = (
        whole.records.last().unwrap().grad_l2_integral,
        rest.records.last().unwrap().grad_l2_integral,
    );
    assert!((ga - gb).abs() <= 1e-12 * ga);
}

#[test]
fn snapshots_land_on_requested_times() {
    let u0 = taylor_green(cube(16), 1.0);
    let times = vec![0.013, 0.05, 0.0977];
    let cfg = SolverConfig {
        dt: 0.01,
        t_end: 0.0977,
        snapshot_times: Some(times.clone()),
        ..Default::default()
    };
    let traj = run(&u0, &cfg, &mon()).unwrap();
    let got: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(got[0], 0.0);
    assert_eq!(&got[1..], &times[..]);
    assert_eq!(traj.status, RunStatus::Completed);
}

#[test]
fn escape_guard_stops_the_run() {
    let u0 = random_solenoidal(cube(16), 1.0, Spectrum::Flat, 1);
    let ceiling = 0.5 * lp_norm(&u0, 4.0).unwrap();
    let cfg = SolverConfig {
        dt: 0.005,
        t_end: 1.0,
        blowup_ceiling: Some(ceiling),
        ..Default::default()
    };
    let traj = run(&u0, &cfg, &mon()).unwrap();
    assert!(traj.escaped());
    match traj.status {
        RunStatus::Escaped {
            t,
            norm,
            ceiling: c,
        } => {
            assert!(t > 0.0 && t < 1.0);
            assert!(norm > c);
            assert_eq!(c, ceiling);
        }
        RunStatus::Completed => unreachable!(),
    }
    assert!(traj.final_snapshot().t < 1.0);
}

#[test]
fn zero_datum_stays_zero() {
    let u0 = VectorField::zeros(cube(8));
    let cfg = SolverConfig {
        dt: 0.01,
        t_end: 0.1,
        ..Default::default()
    };
    let traj = run(&u0, &cfg, &mon()).unwrap();
    assert_eq!(traj.status, RunStatus::Completed);
    assert!(traj.snapshots.iter().all(|s| s.u.max_abs() == 0.0));
    assert!(traj.records.iter().all(|r| r.energy() == Some(0.0)));
}

#[test]
fn nonlinear_forms_agree_on_dealiased_runs() {
    let u0 = random_solenoidal(cube(16), 1.0, Spectrum::Peaked { k0: 2.0 }, 6);
    let cfg = SolverConfig {
        dt: 0.005,
        t_end: 0.05,
        snapshot_interval: 0.05,
        ..Default::default()
    };
    let a = run(&u0, &cfg, &mon()).unwrap();
    let b = run(
        &u0,
        &SolverConfig {
            nonlinear_form: NonlinearForm::Divergence,
            ..cfg
        },
        &mon(),
    )
    .unwrap();
    assert!(rel_l2(&b.final_snapshot().u, &a.final_snapshot().u) <= 1e-12);
}

#[test]
fn unperturbed_coupled_run_matches_the_direct_run() {
    let g = cube(16);
    let v0 = random_solenoidal(g, 1.0, Spectrum::Peaked { k0: 2.0 }, 3);
    let cfg = SolverConfig {
        dt: 0.005,
        t_end: 0.05,
        snapshot_interval: 0.05,
        ..Default::default()
    };
    let c = run_coupled(
        &v0,
        &VectorField::zeros(g).mark_solenoidal().unwrap(),
        &cfg,
        &mon(),
    )
    .unwrap();
    let d = run(&v0, &cfg, &mon()).unwrap();
    assert!(c.w.final_snapshot().u.max_abs() == 0.0);
    assert_eq!(c.v.final_snapshot().u, d.final_snapshot().u);
}

#[test]
fn invalid_configurations_are_rejected() {
    let u0 = taylor_green(cube(8), 1.0);
    for bad in [
        SolverConfig {
            viscosity: 0.0,
            ..Default::default()
        },
        SolverConfig {
            dt: -1.0,
            ..Default::default()
        },
        SolverConfig {
            t_end: f64::NAN,
            ..Default::default()
        },
        SolverConfig {
            snapshot_times: Some(vec![0.2, 0.1]),
            ..Default::default()
        },
        SolverConfig {
            blowup_factor: 1.0,
            ..Default::default()
        },
    ] {
        assert!(run(&u0, &bad, &mon()).is_err(), "{bad:?}");
    }
    let div = VectorField::from_fn(cube(8), |x| [x[0].sin(), 0.0, 0.0]).unwrap();
    assert!(run(&div, &SolverConfig::default(), &mon()).is_err());
}
