//! Inequality checks over diagnostic series. Every check works from the
//! stored records alone, so a report can be regenerated from a CSV file.

use serde::{Deserialize, Serialize};

use super::exponents::ExponentTable;
use super::norms::kappa_from_norms;
use super::record::{compute_record, MonitorConfig};
use super::report::{ConstantKind, InequalityReport};
use super::series::{
    cumulative_trapezoid, missing, running_max, time_derivative, trapezoid, RunSeries,
};
use crate::error::{invalid, Result};
use crate::spectral::VectorField;

/// Relative slack of the energy inequality.
pub const ENERGY_TOL: f64 = 1e-6;
/// Per-sample relative slack for monotonicity.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Relative tolerance of the balance identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Quadrature slack of pointwise Hölder/interpolation inequalities.
pub const HOLDER_TOL: f64 = 1e-8;
/// ‖u(T)‖_p/‖u₀‖_p required before time integrals count as infinite-horizon.
pub const DECAY_RATIO: f64 = 1e-3;
/// Largest record spacing, in steps, accepted by the balance checks.
pub const MAX_BALANCE_STRIDE: f64 = 4.0;
/// Start times used by the two-time energy check are thinned to this many.
const MAX_ENERGY_STARTS: usize = 128;

const TORUS_NOTE: &str = "periodic box: embedding constants differ from the whole-space ones";

/// Energy inequality ‖u(t)‖₂² + 2ν∫_{t₀}^t‖∇u‖₂² ≤ ‖u(t₀)‖₂² for all sampled
/// t₀ < t, using the dissipation integral accumulated by the integrator.
pub fn check_energy(s: &RunSeries) -> Result<InequalityReport> {
    let t = s.times();
    let e: Vec<f64> = s.norm(2.0)?.iter().map(|x| x * x).collect();
    let g: Vec<f64> = s.records.iter().map(|r| r.grad_l2_integral).collect();
    let n = t.len();
    let step = n.div_ceil(MAX_ENERGY_STARTS).max(1);
    let (mut t0s, mut ts, mut lhs, mut rhs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in (0..n).step_by(step) {
        for j in i + 1..n {
            t0s.push(t[i]);
            ts.push(t[j]);
            lhs.push(e[j] + 2.0 * s.viscosity * (g[j] - g[i]));
            rhs.push(e[i]);
        }
    }
    let mut r = InequalityReport::new(
        "1.2",
        "energy inequality: |u(t)|_2^2 + 2 nu int_t0^t |grad u|_2^2 <= |u(t0)|_2^2",
        ts,
        lhs,
        rhs,
        ConstantKind::Bound { c: 1.0 },
        ENERGY_TOL,
        0.0,
    )
    .with_start_times(t0s)
    .with_param("viscosity", s.viscosity);
    if step > 1 {
        r = r.with_note(format!("start times thinned to every {step}th record"));
    }
    if s.escaped {
        r = r.precondition_failed("trajectory escaped");
    }
    Ok(r)
}

/// Sobolev-type embedding: ‖u‖_{Np/(N−2)}^p ≤ C·D_p (3-D);
/// ‖u‖_{2p}^p ≤ C‖u‖_p^{p/2}·D_p^{1/2} (2-D).
pub fn check_sobolev(s: &RunSeries, p: f64) -> Result<InequalityReport> {
    if !(p >= 2.0) {
        return invalid(format!("p = {p} must be >= 2"));
    }
    let n = s.dim as f64;
    let target = if s.dim == 2 {
        2.0 * p
    } else {
        n * p / (n - 2.0)
    };
    let hi = s.norm(target)?;
    let dp = s.dissipation(p)?;
    let lhs: Vec<f64> = hi.iter().map(|x| x.powf(p)).collect();
    let rhs: Vec<f64> = if s.dim == 2 {
        let lp = s.norm(p)?;
        lp.iter()
            .zip(&dp)
            .map(|(l, d)| l.powf(p / 2.0) * d.sqrt())
            .collect()
    } else {
        dp.clone()
    };
    let degenerate = lhs.iter().zip(&rhs).any(|(l, r)| *r == 0.0 && *l > 0.0);
    let mut r = InequalityReport::new(
        "2.1",
        if s.dim == 2 {
            "|u|_{2p}^p <= C |u|_p^{p/2} D_p^{1/2}"
        } else {
            "|u|_{3p}^p <= C D_p"
        },
        s.times(),
        lhs,
        rhs,
        ConstantKind::Empirical,
        0.0,
        0.0,
    )
    .with_param("p", p)
    .with_param("target", target)
    .with_note(TORUS_NOTE);
    if degenerate {
        r = r.precondition_failed("D_p vanishes on a nonzero field");
    }
    Ok(r)
}

/// Single-field form of [`check_sobolev`].
pub fn check_sobolev_field(u: &VectorField, p: f64) -> Result<InequalityReport> {
    let mon = MonitorConfig {
        p_set: vec![p],
        ..Default::default()
    };
    let rec = [compute_record(u, 0.0, &mon, 0.0, None)?];
    let g = u.grid();
    let s = RunSeries {
        records: &rec,
        dim: g.dim(),
        viscosity: 1.0,
        box_length: g.box_length(),
        dt: 1.0,
        escaped: false,
    };
    check_sobolev(&s, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub members: usize,
    pub min: f64,
    pub max: f64,
    /// max/min (infinite when min = 0 < max).
    pub spread: f64,
}

/// Spread of empirical constants over a family of runs.
pub fn family_spread(c: &[f64]) -> FamilyStats {
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if c.is_empty() || max == 0.0 {
        1.0
    } else {
        max / min
    };
    FamilyStats {
        members: c.len(),
        min,
        max,
        spread,
    }
}

fn cadence_ok(s: &RunSeries) -> bool {
    let t = s.times();
    t.len() >= 3
        && t.windows(2)
            .all(|w| w[1] - w[0] <= MAX_BALANCE_STRIDE * s.dt * (1.0 + 1e-9))
}

/// The L^p balance along a run:
/// (i) d/dt(‖u‖_p^p/p) by finite differences against ∫∂_t u·|u|^{p−2}u;
/// (ii) −∫Δu·|u|^{p−2}u = D_p + (p−2)∫|u|^{p−4}Σ_j(u·∂_ju)²;
/// (iii) (1/p)d/dt‖u‖_p^p + D_p ≤ C‖u‖_p^{(p−N+2)/2}·D_p^{(p+N)/(2p)}.
pub fn check_lp_balance(s: &RunSeries, p: f64) -> Result<Vec<InequalityReport>> {
    if !(p >= 2.0) {
        return invalid(format!("p = {p} must be >= 2"));
    }
    let t = s.times();
    let bal = s
        .records
        .iter()
        .map(|r| {
            r.balance(p)
                .copied()
                .ok_or_else(|| missing(format!("dtq_{p}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let lp = s.norm(p)?;
    let dp = s.dissipation(p)?;
    let q: Vec<f64> = lp.iter().map(|x| x.powf(p) / p).collect();
    let fd = time_derivative(&t, &q);
    let cadence = cadence_ok(s);

    // (i): error measured against h²·max|dQ/dt|/T².
    let span = (t.last().unwrap_or(&0.0) - t.first().unwrap_or(&0.0)).max(f64::MIN_POSITIVE);
    let dmax = bal.iter().map(|b| b.time_pairing.abs()).fold(0.0, f64::max);
    let h: Vec<f64> = (0..t.len())
        .map(|i| {
            let a = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
            let b = if i + 1 < t.len() {
                t[i + 1] - t[i]
            } else {
                0.0
            };
            a.max(b)
        })
        .collect();
    let mut r1 = InequalityReport::new(
        "2.4",
        "finite-difference d/dt(|u|_p^p/p) vs int d_t u . |u|^{p-2} u, error in units of h^2 max|dQ/dt|/T^2",
        t.clone(),
        fd.iter().zip(&bal).map(|(f, b)| (f - b.time_pairing).abs()).collect(),
        h.iter().map(|h| h * h * dmax / (span * span)).collect(),
        ConstantKind::Empirical,
        0.0,
        1e-300,
    )
    .with_param("p", p);

    let mut r2 = InequalityReport::new(
        "2.6",
        "-int Lap u . |u|^{p-2} u = D_p + (p-2) int |u|^{p-4} sum_j (u . d_j u)^2",
        t.clone(),
        bal.iter().map(|b| b.laplacian_pairing).collect(),
        bal.iter().map(|b| b.dissipation + b.cross).collect(),
        ConstantKind::Equality,
        IDENTITY_TOL,
        0.0,
    )
    .with_param("p", p);

    let n = s.dim as f64;
    let (a, bexp) = ((p - n + 2.0) / 2.0, (p + n) / (2.0 * p));
    let mut r3 = InequalityReport::new(
        "2.2",
        "(1/p) d/dt |u|_p^p + D_p <= C |u|_p^a D_p^b",
        t,
        fd.iter().zip(&dp).map(|(f, d)| f + d).collect(),
        lp.iter()
            .zip(&dp)
            .map(|(l, d)| l.powf(a) * d.powf(bexp))
            .collect(),
        ConstantKind::Empirical,
        0.0,
        0.0,
    )
    .with_param("p", p)
    .with_param("a", a)
    .with_param("b", bexp);
    if !cadence {
        r1 = r1.precondition_failed("record cadence coarser than 4 steps");
        r3 = r3.precondition_failed("record cadence coarser than 4 steps");
    }
    if s.escaped {
        r3 = r3.precondition_failed("trajectory escaped");
    }
    r2.evaluate();
    Ok(vec![r1, r2, r3])
}

/// (1/p)d/dt‖u‖_p^p + ½D_p ≤ C‖u‖_p^{α(p,N)}.
pub fn check_ode_bound(s: &RunSeries, p: f64) -> Result<InequalityReport> {
    let ex = ExponentTable::new(p, s.dim)?;
    let t = s.times();
    let lp = s.norm(p)?;
    let dp = s.dissipation(p)?;
    let q: Vec<f64> = lp.iter().map(|x| x.powf(p) / p).collect();
    let fd = time_derivative(&t, &q);
    let mut r = InequalityReport::new(
        "2.3",
        "(1/p) d/dt |u|_p^p + D_p/2 <= C |u|_p^alpha",
        t,
        fd.iter().zip(&dp).map(|(f, d)| f + 0.5 * d).collect(),
        lp.iter().map(|l| l.powf(ex.alpha)).collect(),
        ConstantKind::Empirical,
        0.0,
        0.0,
    )
    .with_param("p", p)
    .with_param("alpha", ex.alpha);
    if s.escaped {
        r = r.precondition_failed("trajectory escaped");
    }
    Ok(r)
}

/// ‖u(t)‖_q non-increasing, with relative slack [`MONOTONE_TOL`] per sample.
pub fn check_monotone(s: &RunSeries, q: f64) -> Result<InequalityReport> {
    let t = s.times();
    let y = s.norm(q)?;
    let mut r = InequalityReport::new(
        "monotone",
        "|u(t_{i+1})|_q <= |u(t_i)|_q",
        t.iter().skip(1).copied().collect(),
        y.iter().skip(1).copied().collect(),
        y.iter().take(y.len().saturating_sub(1)).copied().collect(),
        ConstantKind::Bound { c: 1.0 },
        MONOTONE_TOL,
        0.0,
    )
    .with_param("q", q);
    if s.escaped {
        r = r.precondition_failed("trajectory escaped");
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    /// Largest value found with the property.
    pub below: f64,
    /// Smallest value found without it.
    pub above: f64,
    pub ratio: f64,
    /// False when the initial interval did not bracket a transition.
    pub bracketed: bool,
    pub evaluations: usize,
}

/// Geometric bisection for the transition of a property that holds at
/// `lo` and fails at `hi`, until `above/below ≤ ratio`.
pub fn bisect_threshold(
    lo: f64,
    hi: f64,
    ratio: f64,
    max_evals: usize,
    mut holds: impl FnMut(f64) -> Result<bool>,
) -> Result<ThresholdBracket> {
    if !(lo > 0.0 && hi > lo && ratio > 1.0) {
        return invalid("bisection needs 0 < lo < hi and ratio > 1");
    }
    let mut evals = 2;
    let (at_lo, at_hi) = (holds(lo)?, holds(hi)?);
    if !at_lo || at_hi {
        return Ok(ThresholdBracket {
            below: lo,
            above: hi,
            ratio: hi / lo,
            bracketed: false,
            evaluations: evals,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > ratio && evals < max_evals {
        let m = (a * b).sqrt();
        evals += 1;
        if holds(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(ThresholdBracket {
        below: a,
        above: b,
        ratio: b / a,
        bracketed: true,
        evaluations: evals,
    })
}

/// ∫ over the run plus a Stokes-decay tail y(T)/(rate) for y ∝ e^{−rate·t}.
fn integral_with_tail(t: &[f64], y: &[f64], rate: f64) -> f64 {
    trapezoid(t, y) + y.last().map_or(0.0, |v| v / rate)
}

/// Infinite-horizon bounds: small-data integral bound, the chain of bounds
/// following from finite ∫‖u‖_p^α, the target integral, and the algebraic
/// κ identity. Time integrals are trapezoid sums plus an analytic
/// Stokes-decay tail; they require ‖u(T)‖_p ≤ 10⁻³‖u₀‖_p.
pub fn check_integral_bounds(s: &RunSeries, p: f64) -> Result<Vec<InequalityReport>> {
    let ex = ExponentTable::new(p, s.dim)?;
    let n = s.dim as f64;
    let t = s.times();
    let lp = s.norm(p)?;
    let ln = s.norm(n)?;
    let l2 = s.norm(2.0)?;
    let hi = s.norm(ex.embedding_target)?;
    let dp = s.dissipation(p)?;
    let rate = s.stokes_rate();
    let (lp0, ln0, l20) = (lp[0], ln[0], l2[0]);
    let kappa0 = kappa_from_norms(lp0, l20, p, s.dim);
    let decayed = lp0 == 0.0 || *lp.last().unwrap_or(&0.0) <= DECAY_RATIO * lp0;

    let pow = |v: &[f64], e: f64| v.iter().map(|x| x.powf(e)).collect::<Vec<_>>();
    let int_alpha = integral_with_tail(&t, &pow(&lp, ex.alpha), ex.alpha * rate);
    let int_dp = integral_with_tail(&t, &dp, p * rate);
    let int_hi = integral_with_tail(&t, &pow(&hi, p), p * rate);
    let sup_p = lp.iter().map(|x| x.powf(p)).fold(0.0, f64::max);
    let sup_n = ln.iter().copied().fold(0.0, f64::max);
    let t_end = *t.last().unwrap_or(&0.0);

    let single = |id: &str, desc: &str, lhs: f64, rhs: f64| {
        InequalityReport::new(
            id,
            desc,
            vec![t_end],
            vec![lhs],
            vec![rhs],
            ConstantKind::Empirical,
            0.0,
            0.0,
        )
        .with_param("p", p)
        .with_param("alpha", ex.alpha)
    };
    let mut out = vec![
        single(
            "2.2.3",
            "small data: int |u|_p^alpha dt <= C |u0|_N^{2p/(p-N)} |u0|_p^p",
            int_alpha,
            ln0.powf(ex.small_data_exponent) * lp0.powf(p),
        ),
        single(
            "2.8",
            "int |u|_p^alpha dt <= C[kappa] |u0|_p^p",
            int_alpha,
            lp0.powf(p),
        ),
        single(
            "1.4",
            "target estimate: int |u|_p^alpha dt <= C[kappa] |u0|_p^p",
            int_alpha,
            lp0.powf(p),
        ),
        single(
            "2.9",
            "sup |u|_p^p <= C[kappa] |u0|_p^p",
            sup_p,
            lp0.powf(p),
        ),
        single(
            "2.10",
            "int D_p dt <= C[kappa] |u0|_p^p",
            int_dp,
            lp0.powf(p),
        ),
        single(
            "2.11",
            "int |u|_{Np/(N-2)}^p dt <= C[kappa] |u0|_p^p",
            int_hi,
            lp0.powf(p),
        )
        .with_param("target", ex.embedding_target),
    ];
    if s.dim == 3 {
        let l9 = s.norm(9.0)?;
        let l6 = s.norm(6.0)?;
        let int_9 = integral_with_tail(&t, &pow(&l9, 3.0), 3.0 * rate);
        out.push(single(
            "2.12",
            "int |u|_9^3 dt <= C[kappa] kappa^3",
            int_9,
            kappa0.powi(3),
        ));
        // Hölder in time on the truncated integrals (a positive-weight
        // quadrature, so the discrete inequality is exact).
        let lhs = trapezoid(&t, &pow(&l9, 3.0));
        let rhs = trapezoid(&t, &pow(&l6, 2.0)).powf((p - 3.0) / (p - 2.0))
            * trapezoid(&t, &pow(&hi, p)).powf(1.0 / (p - 2.0));
        out.push(
            InequalityReport::new(
                "2.12-holder",
                "int |u|_9^3 <= (int |u|_6^2)^{(p-3)/(p-2)} (int |u|_{3p}^p)^{1/(p-2)}",
                vec![t_end],
                vec![lhs],
                vec![rhs],
                ConstantKind::Bound { c: 1.0 },
                HOLDER_TOL,
                0.0,
            )
            .with_param("p", p),
        );
    } else {
        out.push(
            InequalityReport::new(
                "2.12",
                "int |u|_{N^2/(N-2)}^N dt <= C[kappa]",
                vec![],
                vec![],
                vec![],
                ConstantKind::Empirical,
                0.0,
                0.0,
            )
            .with_param("p", p)
            .precondition_failed("exponent N^2/(N-2) is infinite in 2-D"),
        );
    }
    out.push(single("2.13", "sup |u|_N <= C[kappa] kappa", sup_n, kappa0));
    let ident = l20.powf(2.0 * (p - n) / (p - 2.0)) * lp0.powf(p * (n - 2.0) / (p - 2.0));
    out.push(
        InequalityReport::new(
            "kappa-identity",
            "|u0|_2^{2(p-N)/(p-2)} |u0|_p^{p(N-2)/(p-2)} = kappa^N",
            vec![0.0],
            vec![ident],
            vec![kappa0.powi(s.dim as i32)],
            ConstantKind::Equality,
            1e-10,
            0.0,
        )
        .with_param("p", p),
    );
    for r in out.iter_mut() {
        let series_based = !matches!(r.id.as_str(), "kappa-identity" | "2.12-holder");
        if series_based && r.preconditions_met {
            if s.escaped {
                *r = r.clone().precondition_failed("trajectory escaped");
            } else if !decayed {
                *r = r.clone().precondition_failed(format!(
                    "insufficient decay: |u(T)|_p > {DECAY_RATIO} |u0|_p"
                ));
            }
        }
    }
    Ok(out)
}

/// Pointwise Hölder chain on every record: ‖u‖_N ≤ κ_p(u) and
/// ‖u‖_p ≤ ‖u‖_N^θ‖u‖_target^{1−θ}.
pub fn check_holder_chain(s: &RunSeries, p: f64) -> Result<Vec<InequalityReport>> {
    let ex = ExponentTable::new(p, s.dim)?;
    let n = s.dim as f64;
    let (lp, ln, l2, hi) = (
        s.norm(p)?,
        s.norm(n)?,
        s.norm(2.0)?,
        s.norm(ex.embedding_target)?,
    );
    let kappa: Vec<f64> = lp
        .iter()
        .zip(&l2)
        .map(|(a, b)| kappa_from_norms(*a, *b, p, s.dim))
        .collect();
    let interp: Vec<f64> = ln
        .iter()
        .zip(&hi)
        .map(|(a, b)| a.powf(ex.interp_theta) * b.powf(1.0 - ex.interp_theta))
        .collect();
    Ok(vec![
        InequalityReport::new(
            "kappa-holder",
            "|u|_N <= kappa_p(u)",
            s.times(),
            ln,
            kappa,
            ConstantKind::Bound { c: 1.0 },
            HOLDER_TOL,
            0.0,
        )
        .with_param("p", p),
        InequalityReport::new(
            "interpolation",
            "|u|_p <= |u|_N^theta |u|_target^{1-theta}",
            s.times(),
            lp,
            interp,
            ConstantKind::Bound { c: 1.0 },
            HOLDER_TOL,
            0.0,
        )
        .with_param("p", p)
        .with_param("theta", ex.interp_theta),
    ])
}

/// Perturbation estimates for w = u − v along a coupled run.
pub fn check_perturbation(v: &RunSeries, w: &RunSeries, p: f64) -> Result<Vec<InequalityReport>> {
    let ex = ExponentTable::new(p, w.dim)?;
    let n = w.dim as f64;
    let t = w.times();
    let (wn, w2, wp, whi) = (
        w.norm(n)?,
        w.norm(2.0)?,
        w.norm(p)?,
        w.norm(ex.embedding_target)?,
    );
    let wdp = w.dissipation(p)?;
    let v0 = v.first()?;
    let (v2_0, vp_0) = (
        v0.norm(2.0).ok_or_else(|| missing("l2".into()))?,
        v0.norm(p).ok_or_else(|| missing(format!("l{p}")))?,
    );
    let (wn0, w20, wp0) = (wn[0], w2[0], wp[0]);

    let sup_e = running_max(&w2.iter().map(|x| x * x).collect::<Vec<_>>());
    let grad_int: Vec<f64> = w.records.iter().map(|r| r.grad_l2_integral).collect();
    let sup_p = running_max(&wp.iter().map(|x| x.powf(p)).collect::<Vec<_>>());
    let int_dp = cumulative_trapezoid(&t, &wdp);
    let int_alpha =
        cumulative_trapezoid(&t, &wp.iter().map(|x| x.powf(ex.alpha)).collect::<Vec<_>>());

    let rep = |id: &str, desc: &str, lhs: Vec<f64>, rhs: Vec<f64>| {
        InequalityReport::new(
            id,
            desc,
            t.clone(),
            lhs,
            rhs,
            ConstantKind::Empirical,
            0.0,
            0.0,
        )
        .with_param("p", p)
    };
    let mut out = vec![
        rep(
            "3.4",
            "sup |w|_N <= C[kappa(v0)] |w0|_N",
            wn.clone(),
            vec![wn0; t.len()],
        ),
        rep(
            "3.6",
            "sup |w|_2^2 + nu int |grad w|_2^2 - |w0|_2^2 <= C |w0|_N^2 |v0|_2^2",
            sup_e
                .iter()
                .zip(&grad_int)
                .map(|(e, g)| e + w.viscosity * g - w20 * w20)
                .collect(),
            vec![wn0 * wn0 * v2_0 * v2_0; t.len()],
        ),
        rep(
            "3.7",
            "sup |w|_p^p + int D_p(w) - |w0|_p^p <= C |w0|_N^p |v0|_p^p",
            sup_p
                .iter()
                .zip(&int_dp)
                .map(|(a, b)| a + b - wp0.powf(p))
                .collect(),
            vec![wn0.powf(p) * vp_0.powf(p); t.len()],
        ),
        rep(
            "3.8",
            "int |w|_p^alpha dt <= C (|w0|_p^p + |w0|_N^p |v0|_p^p)",
            int_alpha,
            vec![wp0.powf(p) + wn0.powf(p) * vp_0.powf(p); t.len()],
        )
        .with_param("alpha", ex.alpha)
        .with_note("time integral truncated at the end of the run"),
        InequalityReport::new(
            "3.9",
            "|w|_p <= |w|_N^theta |w|_target^{1-theta}",
            t.clone(),
            wp.clone(),
            wn.iter()
                .zip(&whi)
                .map(|(a, b)| a.powf(ex.interp_theta) * b.powf(1.0 - ex.interp_theta))
                .collect(),
            ConstantKind::Bound { c: 1.0 },
            HOLDER_TOL,
            0.0,
        )
        .with_param("p", p)
        .with_param("theta", ex.interp_theta),
    ];
    if v.escaped || w.escaped {
        for r in out.iter_mut() {
            *r = r.clone().precondition_failed("trajectory escaped");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::report::Verdict;
    use crate::monitor::DiagnosticRecord;

    fn rec(t: f64, l2: f64, grad_int: f64) -> DiagnosticRecord {
        DiagnosticRecord {
            t,
            norms: vec![(2.0, l2)],
            linf: 0.0,
            dissipation: vec![],
            grad_l2: 0.0,
            tail_mass: 0.0,
            grad_l2_integral: grad_int,
            balance: vec![],
        }
    }

    fn series(r: &[DiagnosticRecord]) -> RunSeries<'_> {
        RunSeries {
            records: r,
            dim: 3,
            viscosity: 1.0,
            box_length: 1.0,
            dt: 0.1,
            escaped: false,
        }
    }

    #[test]
    fn energy_check_detects_growth() {
        let ok = [rec(0.0, 1.0, 0.0), rec(0.1, 0.9, 0.05), rec(0.2, 0.8, 0.09)];
        assert_eq!(
            check_energy(&series(&ok)).unwrap().verdict,
            Verdict::HoldsWithC
        );
        let bad = [rec(0.0, 1.0, 0.0), rec(0.1, 1.0, 0.05)];
        assert_eq!(
            check_energy(&series(&bad)).unwrap().verdict,
            Verdict::ViolatedBeyondTolerance
        );
    }

    #[test]
    fn monotone_slack() {
        let r = [
            rec(0.0, 1.0, 0.0),
            rec(0.1, 1.0 + 5e-9, 0.0),
            rec(0.2, 0.5, 0.0),
        ];
        assert!(check_monotone(&series(&r), 2.0).unwrap().holds());
        let r = [rec(0.0, 1.0, 0.0), rec(0.1, 1.0 + 5e-8, 0.0)];
        assert!(!check_monotone(&series(&r), 2.0).unwrap().holds());
    }

    #[test]
    fn missing_column_is_reported() {
        let r = [rec(0.0, 1.0, 0.0)];
        assert!(check_monotone(&series(&r), 3.0).is_err());
    }

    #[test]
    fn bisection_brackets_within_ratio() {
        let b = bisect_threshold(1e-3, 10.0, 2.0, 50, |a| Ok(a < 0.37)).unwrap();
        assert!(b.bracketed && b.ratio <= 2.0 && b.below < 0.37 && b.above >= 0.37);
        let nb = bisect_threshold(1.0, 10.0, 2.0, 50, |a| Ok(a < 0.37)).unwrap();
        assert!(!nb.bracketed);
    }

    #[test]
    fn spread_statistic() {
        let f = family_spread(&[1.0, 2.0, 4.0]);
        assert_eq!((f.min, f.max, f.spread, f.members), (1.0, 4.0, 4.0, 3));
    }
}
