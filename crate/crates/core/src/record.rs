//! Result records for identity/inequality checks and empirical probes.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// |lhs - rhs| <= tolerance.
    Identity,
    /// lhs >= rhs - tolerance; residual is the slack lhs - rhs.
    Inequality,
}

/// One executed check: an identity or inequality with both sides, the
/// residual, the tolerance in force and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub id: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs - rhs: signed mismatch for identities, slack for inequalities.
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, f64>,
}

impl VerificationRecord {
    pub fn identity(id: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        let verdict = if residual.abs() <= tolerance && residual.is_finite() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerificationRecord {
            id: id.into(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            residual,
            tolerance,
            verdict,
            metadata: BTreeMap::new(),
        }
    }

    /// Inequality lhs >= rhs, passing when the slack stays above -tolerance.
    pub fn inequality(id: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        let verdict = if residual >= -tolerance && residual.is_finite() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerificationRecord {
            id: id.into(),
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            residual,
            tolerance,
            verdict,
            metadata: BTreeMap::new(),
        }
    }

    /// A check whose preconditions failed; carries a reason tag.
    pub fn vacuous(id: impl Into<String>, kind: CheckKind) -> Self {
        VerificationRecord {
            id: id.into(),
            kind,
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            tolerance: 0.0,
            verdict: Verdict::Vacuous,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    /// Force the verdict to vacuous (used when a precondition turns out to
    /// hold only trivially, e.g. a bound that is vacuously true).
    pub fn into_vacuous(mut self) -> Self {
        self.verdict = Verdict::Vacuous;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Empirical measurement row for the curvature-estimate probes: no
/// pass/fail semantics, just the hypothesis and conclusion quantities.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRecord {
    pub label: String,
    pub s: f64,
    pub p: f64,
    /// Heuristic lower bound for the injectivity radius at the base point.
    pub inj_lower_bound: f64,
    /// Integral of |A|^2 over the intrinsic ball.
    pub total_curvature: f64,
    pub starred_w1p: f64,
    pub starred_w22: f64,
    /// s^2 |A|^2 at the base point.
    pub s2_a2_base: f64,
    /// max over the polar grid of (s - r)^2 |A|^2.
    pub scan_max: f64,
    /// s^{-2} area of the intrinsic ball.
    pub area_ratio: f64,
    /// min { s^{-2} area, total curvature } (area/curvature probe).
    pub min_area_curvature: f64,
    pub hypothesis: BTreeMap<String, f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_the_residual_rule() {
        let ok = VerificationRecord::identity("x", 1.0, 1.0 + 5e-4, 1e-3);
        assert_eq!(ok.verdict, Verdict::Pass);
        let bad = VerificationRecord::identity("x", 1.0, 1.01, 1e-3);
        assert_eq!(bad.verdict, Verdict::Fail);
        let slack_ok = VerificationRecord::inequality("y", 2.0, 1.0, 1e-9);
        assert_eq!(slack_ok.verdict, Verdict::Pass);
        let slack_edge = VerificationRecord::inequality("y", 1.0, 1.0 + 1e-12, 1e-9);
        assert_eq!(slack_edge.verdict, Verdict::Pass);
        let slack_bad = VerificationRecord::inequality("y", 1.0, 1.1, 1e-3);
        assert_eq!(slack_bad.verdict, Verdict::Fail);
        let nan = VerificationRecord::identity("z", f64::NAN, 0.0, 1.0);
        assert_eq!(nan.verdict, Verdict::Fail);
    }
}
