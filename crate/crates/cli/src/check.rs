//! Dispatch from inequality ids to the monitor checks.

use nsap_core::monitor::{
    check_energy, check_holder_chain, check_integral_bounds, check_lp_balance, check_monotone,
    check_ode_bound, check_perturbation, check_sobolev, InequalityReport, RunSeries,
};

use crate::error::{CliError, CliResult};

const BALANCE: &[&str] = &["2.2", "2.4", "2.6"];
const INTEGRAL: &[&str] = &[
    "1.4",
    "2.2.3",
    "2.8",
    "2.9",
    "2.10",
    "2.11",
    "2.12",
    "2.12-holder",
    "2.13",
    "kappa-identity",
];
const HOLDER: &[&str] = &["kappa-holder", "interpolation"];
const PERTURBATION: &[&str] = &["3.4", "3.6", "3.7", "3.8", "3.9"];
const SINGLE: &[&str] = &["1.2", "2.1", "2.3", "monotone"];

/// Every id accepted by `check`, in display order.
pub fn known_ids() -> Vec<&'static str> {
    [SINGLE, BALANCE, INTEGRAL, HOLDER, PERTURBATION].concat()
}

pub fn validate_id(id: &str) -> CliResult<()> {
    if id == "all" || known_ids().contains(&id) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "unknown inequality id {id:?}; known: all, {}",
            known_ids().join(", ")
        )))
    }
}

pub fn needs_balance(id: &str) -> bool {
    BALANCE.contains(&id)
}

pub fn needs_perturbation(id: &str) -> bool {
    PERTURBATION.contains(&id)
}

/// Series available for a run: the total field and, for coupled runs, v and w.
pub struct Available<'a> {
    pub u: RunSeries<'a>,
    pub parts: Option<(RunSeries<'a>, RunSeries<'a>)>,
    pub has_balance: bool,
}

/// Reports for `id` at exponent `p`. "all" expands to every id the run can
/// support.
pub fn evaluate(id: &str, p: f64, s: &Available) -> CliResult<Vec<InequalityReport>> {
    validate_id(id)?;
    if id == "all" {
        let mut out = Vec::new();
        let mut groups: Vec<&[&str]> = vec![SINGLE, INTEGRAL, HOLDER];
        if s.has_balance {
            groups.push(BALANCE);
        }
        if s.parts.is_some() {
            groups.push(PERTURBATION);
        }
        for g in groups {
            out.extend(group(g[0], p, s)?);
        }
        return Ok(out);
    }
    Ok(group(id, p, s)?
        .into_iter()
        .filter(|r| r.id == id)
        .collect())
}

/// All reports of the check that produces `id`.
fn group(id: &str, p: f64, s: &Available) -> CliResult<Vec<InequalityReport>> {
    let u = &s.u;
    let reports = match id {
        "1.2" => vec![check_energy(u)?],
        "2.1" => vec![check_sobolev(u, p)?],
        "2.3" => vec![check_ode_bound(u, p)?],
        "monotone" => vec![check_monotone(u, p)?],
        _ if BALANCE.contains(&id) => {
            if !s.has_balance {
                return Err(CliError::Config(format!(
                    "check {id} needs balance columns (monitor.balance = true)"
                )));
            }
            check_lp_balance(u, p)?
        }
        _ if INTEGRAL.contains(&id) => check_integral_bounds(u, p)?,
        _ if HOLDER.contains(&id) => check_holder_chain(u, p)?,
        _ if PERTURBATION.contains(&id) => {
            let Some((v, w)) = &s.parts else {
                return Err(CliError::Config(format!(
                    "check {id} needs a coupled (perturbed) run"
                )));
            };
            check_perturbation(v, w, p)?
        }
        "all" => unreachable!("expanded by the caller"),
        other => return Err(CliError::Config(format!("unknown inequality id {other:?}"))),
    };
    Ok(reports)
}

/// One console line per report: id, parameters, C_emp and verdict.
pub fn summary_line(r: &InequalityReport) -> String {
    let params: Vec<String> = r
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    let verdict = serde_json::to_value(r.verdict)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let mut line = format!(
        "{:<14} [{}]  C_emp = {:.6e}  {verdict}",
        r.id,
        params.join(", "),
        r.c_emp
    );
    if !r.preconditions_met {
        line.push_str(&format!(
            " ({})",
            r.notes
                .last()
                .map(String::as_str)
                .unwrap_or("precondition failed")
        ));
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_registry() {
        assert!(validate_id("2.3").is_ok());
        assert!(validate_id("all").is_ok());
        assert!(matches!(validate_id("9.9"), Err(CliError::Config(_))));
        assert!(needs_balance("2.6") && !needs_balance("2.3"));
        assert!(needs_perturbation("3.4"));
        let ids = known_ids();
        let mut dedup = ids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), ids.len());
    }
}
