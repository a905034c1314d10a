//! Inequality reports: LHS/RHS series, an empirical constant and a verdict
//! that can be recomputed from the stored series alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsWithC,
    ViolatedBeyondTolerance,
    Inconclusive,
}

/// How the constant of an inequality is treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantKind {
    /// LHS ≤ c·RHS with a known c (Hölder, energy inequality, monotonicity).
    Bound { c: f64 },
    /// LHS = RHS.
    Equality,
    /// LHS ≤ C·RHS for some unspecified C; only C_emp is reported.
    Empirical,
}

/// Relative slack s = (C·RHS − LHS)/(C·RHS) over the samples with C·RHS > 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MarginStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub description: String,
    pub parameters: BTreeMap<String, f64>,
    pub times: Vec<f64>,
    /// Start times for two-time inequalities; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub start_times: Vec<f64>,
    #[serde(with = "lenient_vec")]
    pub lhs: Vec<f64>,
    #[serde(with = "lenient_vec")]
    pub rhs: Vec<f64>,
    pub constant: ConstantKind,
    /// sup LHS/RHS (≥ 0), skipping 0/0 samples.
    #[serde(with = "lenient")]
    pub c_emp: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub margin: MarginStats,
    /// False when a precondition failed (coarse cadence, escape, no decay);
    /// the verdict is then inconclusive regardless of the series.
    pub preconditions_met: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl InequalityReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: &str,
        description: &str,
        times: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        constant: ConstantKind,
        rel_tol: f64,
        abs_tol: f64,
    ) -> Self {
        let mut r = Self {
            id: id.into(),
            description: description.into(),
            parameters: BTreeMap::new(),
            times,
            start_times: Vec::new(),
            lhs,
            rhs,
            constant,
            c_emp: 0.0,
            rel_tol,
            abs_tol,
            margin: MarginStats::default(),
            preconditions_met: true,
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        };
        r.evaluate();
        r
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_start_times(mut self, t0: Vec<f64>) -> Self {
        self.start_times = t0;
        self
    }

    /// Marks a failed precondition and forces an inconclusive verdict.
    pub fn precondition_failed(mut self, why: impl Into<String>) -> Self {
        self.preconditions_met = false;
        self.notes.push(why.into());
        self.evaluate();
        self
    }

    /// Recomputes C_emp, margins and the verdict from the stored series.
    pub fn evaluate(&mut self) {
        let (c_emp, verdict, margin) = assess(
            &self.lhs,
            &self.rhs,
            self.constant,
            self.rel_tol,
            self.abs_tol,
            self.preconditions_met,
        );
        self.c_emp = c_emp;
        self.verdict = verdict;
        self.margin = margin;
    }

    /// True when re-evaluating the stored series reproduces the stored
    /// constant and verdict.
    pub fn recheck(&self) -> bool {
        let mut copy = self.clone();
        copy.evaluate();
        copy.verdict == self.verdict && same_float(copy.c_emp, self.c_emp)
    }

    /// File-name friendly form of the id, suffixed with the exponent.
    pub fn file_stem(&self) -> String {
        let mut s: String = self
            .id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        if let Some(p) = self.parameters.get("p") {
            s.push_str(&format!("_p{p}"));
        } else if let Some(q) = self.parameters.get("q") {
            s.push_str(&format!("_q{q}"));
        }
        s
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsWithC
    }
}

fn same_float(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

fn assess(
    lhs: &[f64],
    rhs: &[f64],
    constant: ConstantKind,
    rel_tol: f64,
    abs_tol: f64,
    ok: bool,
) -> (f64, Verdict, MarginStats) {
    let finite = lhs.len() == rhs.len() && lhs.iter().chain(rhs).all(|x| x.is_finite());
    let mut c_emp: f64 = 0.0;
    if finite {
        for (&l, &r) in lhs.iter().zip(rhs) {
            if r > 0.0 {
                c_emp = c_emp.max(l / r);
            } else if l > abs_tol {
                c_emp = f64::INFINITY;
            }
        }
    } else {
        c_emp = f64::NAN;
    }
    let c = match constant {
        ConstantKind::Bound { c } => c,
        ConstantKind::Equality => 1.0,
        ConstantKind::Empirical => {
            if c_emp.is_finite() {
                c_emp
            } else {
                0.0
            }
        }
    };
    let mut margin = MarginStats {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        mean: 0.0,
        samples: 0,
    };
    for (&l, &r) in lhs.iter().zip(rhs) {
        let cr = c * r;
        if cr > 0.0 && cr.is_finite() && l.is_finite() {
            let s = (cr - l) / cr;
            margin.min = margin.min.min(s);
            margin.max = margin.max.max(s);
            margin.mean += s;
            margin.samples += 1;
        }
    }
    if margin.samples > 0 {
        margin.mean /= margin.samples as f64;
    } else {
        margin = MarginStats::default();
    }
    let verdict = if !ok || !finite {
        Verdict::Inconclusive
    } else {
        let within = |l: f64, r: f64| match constant {
            ConstantKind::Bound { c } => l <= c * r + rel_tol * (c * r).abs() + abs_tol,
            ConstantKind::Equality => (l - r).abs() <= rel_tol * l.abs().max(r.abs()) + abs_tol,
            ConstantKind::Empirical => r > 0.0 || l <= abs_tol,
        };
        if lhs.iter().zip(rhs).all(|(&l, &r)| within(l, r)) {
            Verdict::HoldsWithC
        } else {
            Verdict::ViolatedBeyondTolerance
        }
    };
    (c_emp, verdict, margin)
}

/// Serializes non-finite floats as strings so reports survive a JSON round trip.
mod lenient {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("nan".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("invalid number {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

mod lenient_vec {
    use super::lenient::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| to_repr(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(from_repr)
            .collect()
    }
}
