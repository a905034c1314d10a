//! Per-time diagnostic records and their CSV form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::norms::{laplacian_pairing, lp_of_magnitude, tail_mass, GradientData};
use crate::error::{Error, Result};
use crate::spectral::{zero_pad, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorConfig {
    /// Exponents p for D_p and the p-dependent norms.
    pub p_set: Vec<f64>,
    /// Additional norm exponents beyond the defaults.
    pub extra_q: Vec<f64>,
    /// Record every `stride` steps (the final state is always recorded).
    pub stride: usize,
    /// Record the three terms of the L^p balance identity.
    pub balance: bool,
    /// Exponents for the balance terms; defaults to `p_set`.
    pub balance_p: Option<Vec<f64>>,
    /// Width of the boundary band used for the tail-mass monitor.
    pub tail_fraction: f64,
    /// Balance terms are integrated on a grid this many times finer (zero
    /// padding); 2 makes the quadrature exact for even p ≤ 6 on dealiased
    /// fields.
    pub balance_oversample: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            p_set: vec![4.0, 6.0, 9.0],
            extra_q: vec![],
            stride: 1,
            balance: false,
            balance_p: None,
            tail_fraction: 0.1,
            balance_oversample: 2,
        }
    }
}

impl MonitorConfig {
    /// Finite norm exponents recorded: 2, N, each p (including balance
    /// exponents), Np/(N−2) (2p when N = 2), 6 and 9 in 3-D, plus extras;
    /// sorted, without duplicates.
    pub fn q_set(&self, dim: usize) -> Vec<f64> {
        let mut q = vec![2.0, dim as f64];
        for p in self.dissipation_exponents() {
            q.push(p);
            q.push(if dim == 2 { 2.0 * p } else { 3.0 * p });
        }
        if dim == 3 {
            q.extend([6.0, 9.0]);
        }
        q.extend(self.extra_q.iter().copied().filter(|x| x.is_finite()));
        q.sort_by(f64::total_cmp);
        q.dedup();
        q
    }

    pub fn balance_exponents(&self) -> Vec<f64> {
        self.balance_p.clone().unwrap_or_else(|| self.p_set.clone())
    }

    /// Exponents for which D_p is recorded: the p-set, plus the balance
    /// exponents when balance terms are on.
    pub fn dissipation_exponents(&self) -> Vec<f64> {
        let mut p = self.p_set.clone();
        if self.balance {
            p.extend(self.balance_exponents());
        }
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::InvalidParameter(
                "monitor stride must be >= 1".into(),
            ));
        }
        if !(1..=8).contains(&self.balance_oversample) {
            return Err(Error::InvalidParameter(
                "balance_oversample must lie in 1..=8".into(),
            ));
        }
        if let Some(p) = self
            .p_set
            .iter()
            .chain(self.balance_exponents().iter())
            .find(|p| !(**p >= 2.0) || !p.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "exponent {p} must be finite and >= 2"
            )));
        }
        if let Some(q) = self.extra_q.iter().find(|q| !(**q >= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "norm exponent {q} must be >= 1"
            )));
        }
        if !(0.0..1.0).contains(&self.tail_fraction) {
            return Err(Error::InvalidParameter(
                "tail_fraction must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Terms of ∫∂_t u·|u|^{p−2}u = ∫Δu·|u|^{p−2}u + (nonlinear pairing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceTerms {
    pub p: f64,
    /// ∫∂_t u·|u|^{p−2}u with ∂_t u from the evolution equation.
    pub time_pairing: f64,
    /// −∫Δu·|u|^{p−2}u.
    pub laplacian_pairing: f64,
    /// (p−2)∫|u|^{p−4}Σ_j(u·∂_j u)².
    pub cross: f64,
    /// D_p on the same quadrature as the other terms.
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// (q, ‖u‖_q) for finite q, ascending.
    pub norms: Vec<(f64, f64)>,
    pub linf: f64,
    /// (p, D_p).
    pub dissipation: Vec<(f64, f64)>,
    /// ‖∇u‖₂².
    pub grad_l2: f64,
    pub tail_mass: f64,
    /// ∫‖∇u‖₂² ds from the start of the run.
    pub grad_l2_integral: f64,
    pub balance: Vec<BalanceTerms>,
}

fn lookup(v: &[(f64, f64)], key: f64) -> Option<f64> {
    v.iter().find(|(k, _)| *k == key).map(|(_, x)| *x)
}

impl DiagnosticRecord {
    /// ‖u‖_q if recorded (q = ∞ gives the maximum).
    pub fn norm(&self, q: f64) -> Option<f64> {
        if q.is_infinite() {
            Some(self.linf)
        } else {
            lookup(&self.norms, q)
        }
    }

    pub fn dissipation(&self, p: f64) -> Option<f64> {
        if p == 2.0 {
            return lookup(&self.dissipation, p).or(Some(self.grad_l2));
        }
        lookup(&self.dissipation, p)
    }

    pub fn energy(&self) -> Option<f64> {
        self.norm(2.0).map(|x| x * x)
    }

    pub fn balance(&self, p: f64) -> Option<&BalanceTerms> {
        self.balance.iter().find(|b| b.p == p)
    }
}

/// Computes a record for `u` at time `t`. `dudt` is required when the
/// configuration asks for balance terms.
pub fn compute_record(
    u: &VectorField,
    t: f64,
    cfg: &MonitorConfig,
    grad_l2_integral: f64,
    dudt: Option<&VectorField>,
) -> Result<DiagnosticRecord> {
    let grid = *u.grid();
    let data = GradientData::new(u);
    let norms = cfg
        .q_set(grid.dim())
        .into_iter()
        .map(|q| Ok((q, lp_of_magnitude(&grid, &data.mag, q)?)))
        .collect::<Result<Vec<_>>>()?;
    let linf = data.mag.iter().copied().fold(0.0, f64::max);
    let dissipation = cfg
        .dissipation_exponents()
        .into_iter()
        .map(|p| (p, data.dissipation(p)))
        .collect();
    let balance = if cfg.balance {
        let dudt = dudt.ok_or_else(|| {
            Error::InvalidParameter("balance terms need the time derivative".into())
        })?;
        let fine = grid.n() * cfg.balance_oversample;
        let (uf, df) = (zero_pad(u, fine)?, zero_pad(dudt, fine)?);
        let fdata = if cfg.balance_oversample == 1 {
            None
        } else {
            Some(GradientData::new(&uf))
        };
        let fdata = fdata.as_ref().unwrap_or(&data);
        cfg.balance_exponents()
            .into_iter()
            .map(|p| BalanceTerms {
                p,
                time_pairing: fdata.pairing(&uf, &df, p),
                laplacian_pairing: laplacian_pairing(&uf, fdata, p),
                cross: fdata.cross_term(p),
                dissipation: fdata.dissipation(p),
            })
            .collect()
    } else {
        Vec::new()
    };
    let rec = DiagnosticRecord {
        t,
        norms,
        linf,
        dissipation,
        grad_l2: data.grad_l2(),
        tail_mass: tail_mass(u, cfg.tail_fraction),
        grad_l2_integral,
        balance,
    };
    if !rec
        .norms
        .iter()
        .chain(&rec.dissipation)
        .all(|(_, v)| v.is_finite())
        || !rec.linf.is_finite()
    {
        return Err(Error::NonFinite(format!("diagnostics at t = {t}")));
    }
    Ok(rec)
}

fn label(x: f64) -> String {
    format!("{x}")
}

/// Column names of a record set (taken from the first record).
pub fn csv_header(rec: &DiagnosticRecord) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(rec.norms.iter().map(|(q, _)| format!("l{}", label(*q))));
    h.push("linf".into());
    h.extend(
        rec.dissipation
            .iter()
            .map(|(p, _)| format!("D_{}", label(*p))),
    );
    h.extend(["grad_l2".into(), "tail_mass".into(), "grad_l2_int".into()]);
    for b in &rec.balance {
        let p = label(b.p);
        h.extend([
            format!("dtq_{p}"),
            format!("lap_{p}"),
            format!("cross_{p}"),
            format!("dpb_{p}"),
        ]);
    }
    h
}

/// Writes one row per record. Floats use the shortest round-trip form, so
/// reading the file back reproduces the records bit for bit.
pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticRecord]) -> Result<()> {
    let Some(first) = records.first() else {
        return Ok(());
    };
    writeln!(w, "{}", csv_header(first).join(","))?;
    for r in records {
        let mut row = vec![r.t];
        row.extend(r.norms.iter().map(|x| x.1));
        row.push(r.linf);
        row.extend(r.dissipation.iter().map(|x| x.1));
        row.extend([r.grad_l2, r.tail_mass, r.grad_l2_integral]);
        for b in &r.balance {
            row.extend([b.time_pairing, b.laplacian_pairing, b.cross, b.dissipation]);
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<DiagnosticRecord>> {
    let mut lines = r.lines();
    let header: Vec<String> = match lines.next() {
        Some(h) => h?.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Ok(Vec::new()),
    };
    let col = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| {
        col(name).ok_or_else(|| Error::InvalidParameter(format!("missing column '{name}'")))
    };
    let (ct, cinf, cg, ctail, cint) = (
        need("t")?,
        need("linf")?,
        need("grad_l2")?,
        need("tail_mass")?,
        need("grad_l2_int")?,
    );
    let parse_key = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad column '{s}'")))
    };
    let mut norm_cols = Vec::new();
    let mut diss_cols = Vec::new();
    let mut bal: Vec<(f64, [usize; 4])> = Vec::new();
    for (i, h) in header.iter().enumerate() {
        if let Some(q) = h
            .strip_prefix('l')
            .filter(|s| s.chars().next().is_some_and(|c| c.is_ascii_digit()))
        {
            norm_cols.push((parse_key(q)?, i));
        } else if let Some(p) = h.strip_prefix("D_") {
            diss_cols.push((parse_key(p)?, i));
        } else if let Some(p) = h.strip_prefix("dtq_") {
            let lap = need(&format!("lap_{p}"))?;
            let cross = need(&format!("cross_{p}"))?;
            let dp = need(&format!("dpb_{p}"))?;
            bal.push((parse_key(p)?, [i, lap, cross, dp]));
        }
    }
    if norm_cols.is_empty() {
        return Err(Error::InvalidParameter("no norm columns".into()));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad value '{s}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if cells.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} cells, header {}",
                cells.len(),
                header.len()
            )));
        }
        out.push(DiagnosticRecord {
            t: cells[ct],
            norms: norm_cols.iter().map(|&(q, i)| (q, cells[i])).collect(),
            linf: cells[cinf],
            dissipation: diss_cols.iter().map(|&(p, i)| (p, cells[i])).collect(),
            grad_l2: cells[cg],
            tail_mass: cells[ctail],
            grad_l2_integral: cells[cint],
            balance: bal
                .iter()
                .map(|&(p, [a, b, c, d])| BalanceTerms {
                    p,
                    time_pairing: cells[a],
                    laplacian_pairing: cells[b],
                    cross: cells[c],
                    dissipation: cells[d],
                })
                .collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn q_set_contents() {
        let c = MonitorConfig::default();
        assert_eq!(c.q_set(3), vec![2.0, 3.0, 4.0, 6.0, 9.0, 12.0, 18.0, 27.0]);
        assert_eq!(c.q_set(2), vec![2.0, 4.0, 6.0, 8.0, 9.0, 12.0, 18.0]);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = VectorField::from_fn(g, |x| {
            [
                x[0].sin() * x[1].cos() / 3.0,
                -x[0].cos() * x[1].sin() / 3.0,
                0.0,
            ]
        })
        .unwrap();
        let cfg = MonitorConfig {
            balance: true,
            ..Default::default()
        };
        let recs: Vec<_> = (0..3)
            .map(|i| {
                compute_record(
                    &u.scale(1.0 + 0.1 * i as f64),
                    0.1 * i as f64,
                    &cfg,
                    0.7 * i as f64,
                    Some(&u),
                )
                .unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn missing_column_is_an_error() {
        let csv = "t,l2,linf,grad_l2,tail_mass\n0,1,1,1,0\n";
        assert!(read_csv(csv.as_bytes()).is_err());
    }
}
