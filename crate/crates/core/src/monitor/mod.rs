//! Norms, functionals and inequality reports evaluated along trajectories.

mod checks;
mod exponents;
mod norms;
mod probe;
mod record;
mod report;
mod scaling;
mod series;

pub use checks::{
    bisect_threshold, check_energy, check_holder_chain, check_integral_bounds, check_lp_balance,
    check_monotone, check_ode_bound, check_perturbation, check_sobolev, check_sobolev_field,
    family_spread, FamilyStats, ThresholdBracket, DECAY_RATIO, ENERGY_TOL, HOLDER_TOL,
    IDENTITY_TOL, MAX_BALANCE_STRIDE, MONOTONE_TOL,
};
pub use exponents::{alpha_exact, interp_theta_exact, ExponentTable};
pub use norms::{
    dissipation, kappa, kappa_from_norms, kappa_theta, laplacian_pairing, lp_norm, lp_of_magnitude,
    tail_mass, CompensatedSum, GradientData, KappaValue,
};
pub use probe::{stability_probe, ProbeEntry, ProbeReport};
pub use record::{
    compute_record, csv_header, read_csv, write_csv, BalanceTerms, DiagnosticRecord, MonitorConfig,
};
pub use report::{ConstantKind, InequalityReport, MarginStats, Verdict};
pub use scaling::{rescale_field, scaling_test, ScalingReport, SCALING_TOL};
pub use series::{cumulative_trapezoid, running_max, time_derivative, trapezoid, RunSeries};
