use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::MatrixRecord;

/// Default relative tolerance for inequality checks, scaled by `max(1, |rhs|)`.
pub const INEQ_REL_TOL: f64 = 1e-8;
/// Default absolute tolerance for equality checks.
pub const EQ_ABS_TOL: f64 = 1e-10;

/// Inputs sufficient to rerun a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Hc {
        x: MatrixRecord,
        p: f64,
        q: f64,
        eps: f64,
        case: u8,
    },
    HcUnnormalized {
        x: MatrixRecord,
        p: f64,
        q: f64,
        eps: f64,
    },
    RefinedGross {
        x: MatrixRecord,
        q: f64,
        qubit: usize,
    },
    DsVector {
        lambda: Vec<f64>,
        d: MatrixRecord,
        q: f64,
    },
    TechLemma {
        a: f64,
        b: f64,
        eps: f64,
    },
    PtSandwich {
        a: MatrixRecord,
        q: f64,
    },
    NormCompression {
        m: MatrixRecord,
        p: f64,
    },
    Entrywise2x2 {
        x: MatrixRecord,
        y: MatrixRecord,
        p: f64,
    },
    Watrous {
        x: MatrixRecord,
        eps: f64,
        q: f64,
        p: f64,
    },
    DepolarizingHc {
        x: MatrixRecord,
        p: f64,
        q: f64,
        rho: f64,
    },
    ClassicalBec {
        f: Vec<f64>,
        p: f64,
        q: f64,
        eps: f64,
    },
    SchurHorn {
        x: MatrixRecord,
    },
    MatrixHolder {
        a: MatrixRecord,
        b: MatrixRecord,
        p: f64,
    },
    Kt {
        a: MatrixRecord,
    },
    LogSobolev {
        x: MatrixRecord,
        m: usize,
        eps: f64,
        q: f64,
    },
    Decomposition {
        x: MatrixRecord,
        m: usize,
        eps: f64,
        q: f64,
    },
    TwoPointClaim {
        x: MatrixRecord,
        m: usize,
        eps: f64,
        q: f64,
    },
    NormOracle {
        x: MatrixRecord,
        eps: f64,
        q: f64,
    },
    GPrime {
        x: MatrixRecord,
        t: f64,
        p: f64,
        c: f64,
    },
}

/// Outcome of one check.
///
/// `gap = rhs − lhs` for inequalities and `−|rhs − lhs|` for equalities;
/// `pass` holds iff `gap ≥ −tol` and every recorded side condition holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tol: f64,
    pub relation: Relation,
    pub pass: bool,
    /// Scalar inputs, for tabular output.
    pub params: BTreeMap<String, f64>,
    /// Derived quantities and side-condition measurements.
    pub detail: BTreeMap<String, f64>,
    /// Side conditions that failed, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_conditions: Vec<String>,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs = rhs`
    Equal,
}

impl CheckReport {
    fn build(id: &str, label: &str, relation: Relation, lhs: f64, rhs: f64, witness: Witness) -> Self {
        let (gap, tol) = match relation {
            Relation::AtMost => (rhs - lhs, INEQ_REL_TOL * rhs.abs().max(1.0)),
            Relation::Equal => (-(rhs - lhs).abs(), EQ_ABS_TOL),
        };
        let mut r = Self {
            id: id.to_string(),
            label: label.to_string(),
            lhs,
            rhs,
            gap,
            tol,
            relation,
            pass: false,
            params: BTreeMap::new(),
            detail: BTreeMap::new(),
            failed_conditions: Vec::new(),
            witness,
        };
        r.refresh();
        r
    }

    /// Report for `lhs ≤ rhs`.
    pub fn inequality(id: &str, label: &str, lhs: f64, rhs: f64, witness: Witness) -> Self {
        Self::build(id, label, Relation::AtMost, lhs, rhs, witness)
    }

    /// Report for `lhs = rhs`.
    pub fn equality(id: &str, label: &str, lhs: f64, rhs: f64, witness: Witness) -> Self {
        Self::build(id, label, Relation::Equal, lhs, rhs, witness)
    }

    fn refresh(&mut self) {
        self.pass = self.gap.is_finite() && self.gap >= -self.tol && self.failed_conditions.is_empty();
    }

    /// Replace the gap (e.g. by the smaller of two one-sided gaps).
    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self.refresh();
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }

    /// Record a side condition; a false one fails the report.
    pub fn require(mut self, name: &str, holds: bool) -> Self {
        if !holds {
            self.failed_conditions.push(name.to_string());
        }
        self.refresh();
        self
    }

    /// Override the tolerance: inequalities use `coeff · max(1, |rhs|)`,
    /// equalities use `coeff` directly.
    pub fn with_tolerance(mut self, coeff: f64) -> Self {
        self.tol = match self.relation {
            Relation::AtMost => coeff * self.rhs.abs().max(1.0),
            Relation::Equal => coeff,
        };
        self.refresh();
        self
    }

    /// Compact `key=value;...` rendering of the scalar parameters.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Witness {
        Witness::TechLemma {
            a: 1.0,
            b: 1.0,
            eps: 0.5,
        }
    }

    #[test]
    fn inequality_sign_convention() {
        let r = CheckReport::inequality("t", "t", 1.0, 2.0, w());
        assert_eq!(r.gap, 1.0);
        assert!(r.pass);
        let r = CheckReport::inequality("t", "t", 2.0, 1.0, w());
        assert!(!r.pass);
        // within tolerance
        let r = CheckReport::inequality("t", "t", 1.0 + 5e-9, 1.0, w());
        assert!(r.pass);
        let r = CheckReport::inequality("t", "t", 1e6 + 1e-3, 1e6, w());
        assert!(r.pass);
        let r = CheckReport::inequality("t", "t", 1e6 + 1e-1, 1e6, w());
        assert!(!r.pass);
    }

    #[test]
    fn equality_is_two_sided() {
        assert!(CheckReport::equality("t", "t", 1.0, 1.0 + 1e-11, w()).pass);
        assert!(!CheckReport::equality("t", "t", 1.0 + 1e-9, 1.0, w()).pass);
        assert!(!CheckReport::equality("t", "t", 1.0, 1.0 + 1e-9, w()).pass);
    }

    #[test]
    fn side_conditions_fail_report() {
        let r = CheckReport::inequality("t", "t", 0.0, 1.0, w()).require("bridge", false);
        assert!(!r.pass);
        assert_eq!(r.failed_conditions, vec!["bridge".to_string()]);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!CheckReport::inequality("t", "t", f64::NAN, 1.0, w()).pass);
    }

    #[test]
    fn serde_round_trip() {
        let r = CheckReport::inequality("t", "t", 0.25, 1.0, w())
            .param("eps", 0.5)
            .detail("x", 2.0);
        let back: CheckReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
