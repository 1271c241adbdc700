use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Number, Value};

/// Why a check was not evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    NotRegular,
    DegenerateForm,
    NewtonDiverged,
    NotApplicableToKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(SkipReason),
}

impl Status {
    pub fn is_skipped(self) -> bool {
        matches!(self, Status::Skipped(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check_id: String,
    pub point_index: usize,
    /// `None` for point checks and for checks skipped at the base point.
    pub fiber_index: Option<usize>,
    pub point: Vec<Complex64>,
    pub fiber: Option<Vec<f64>>,
    /// `None` when skipped.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    /// Richardson ratio `r(h) / r(h/2)`.
    pub convergence_ratio: Option<f64>,
    pub expected_fail: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub check_id: String,
    pub evaluated: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub max_residual: Option<f64>,
    /// Point index (and fiber index) of the largest residual.
    pub worst_point: Option<(usize, Option<usize>)>,
    pub expected_fail: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub results: usize,
    pub passed: usize,
    pub failed: usize,
    pub expected_failures: usize,
    pub skipped: usize,
    /// Checks marked expected-fail that passed everywhere they ran.
    pub unexpected_passes: Vec<String>,
    pub all_skipped: bool,
    pub ok: bool,
}

/// Echo of the input, in file units (angles in degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct SpecEcho {
    pub n: usize,
    pub kind: String,
    pub components: Vec<String>,
    pub sample_points: Vec<Vec<Complex64>>,
    pub fd_step: f64,
    pub tol: f64,
    pub conic: bool,
    pub theta_samples_deg: Vec<f64>,
    pub lambda_samples: Vec<Complex64>,
    pub fibers: Vec<Vec<f64>>,
    pub expected_fail: Vec<String>,
    pub expected_skip: bool,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub timestamp: u64,
    pub seed: u64,
    pub conventions: Vec<(&'static str, &'static str)>,
    pub spec: SpecEcho,
    pub summary: Summary,
    pub aggregates: Vec<Aggregate>,
    pub results: Vec<CheckResult>,
}

/// A JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    serde_json::from_str::<Number>(&text).map(Value::Number).unwrap_or(Value::Null)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn complex(c: Complex64) -> Value {
    Value::Array(vec![num(c.re), num(c.im)])
}

fn complex_list(v: &[Complex64]) -> Value {
    Value::Array(v.iter().copied().map(complex).collect())
}

fn real_list(v: &[f64]) -> Value {
    Value::Array(v.iter().copied().map(num).collect())
}

impl SpecEcho {
    fn to_value(&self) -> Value {
        let tolerances: Map<String, Value> = self.tolerances.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
        json!({
            "n": self.n,
            "kind": self.kind,
            "components": self.components,
            "sample_points": self.sample_points.iter().map(|p| complex_list(p)).collect::<Vec<_>>(),
            "fd_step": num(self.fd_step),
            "tol": num(self.tol),
            "conic": self.conic,
            "theta_samples": real_list(&self.theta_samples_deg),
            "lambda_samples": complex_list(&self.lambda_samples),
            "fibers": self.fibers.iter().map(|f| real_list(f)).collect::<Vec<_>>(),
            "expected_fail": self.expected_fail,
            "expected_skip": self.expected_skip,
            "tolerances": tolerances,
        })
    }
}

impl CheckResult {
    fn to_value(&self) -> Value {
        let (status, reason) = match self.status {
            Status::Pass => ("pass", Value::Null),
            Status::Fail => ("fail", Value::Null),
            Status::Skipped(r) => ("skipped", serde_json::to_value(r).unwrap_or(Value::Null)),
        };
        json!({
            "check_id": self.check_id,
            "point_index": self.point_index,
            "fiber_index": self.fiber_index,
            "point": complex_list(&self.point),
            "fiber": self.fiber.as_deref().map_or(Value::Null, real_list),
            "residual": opt_num(self.residual),
            "tolerance": num(self.tolerance),
            "status": status,
            "reason": reason,
            "convergence_ratio": opt_num(self.convergence_ratio),
            "expected_fail": self.expected_fail,
        })
    }
}

impl Aggregate {
    fn to_value(&self) -> Value {
        json!({
            "check_id": self.check_id,
            "evaluated": self.evaluated,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "max_residual": opt_num(self.max_residual),
            "worst_point": self.worst_point.map(|(p, f)| json!({"point_index": p, "fiber_index": f})),
            "expected_fail": self.expected_fail,
        })
    }
}

impl VerificationReport {
    pub fn to_value(&self) -> Value {
        let conventions: Map<String, Value> =
            self.conventions.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect();
        let s = &self.summary;
        json!({
            "tool": self.tool,
            "version": self.version,
            "timestamp": self.timestamp,
            "seed": self.seed,
            "conventions": conventions,
            "spec": self.spec.to_value(),
            "summary": {
                "results": s.results,
                "passed": s.passed,
                "failed": s.failed,
                "expected_failures": s.expected_failures,
                "skipped": s.skipped,
                "unexpected_passes": s.unexpected_passes,
                "all_skipped": s.all_skipped,
                "ok": s.ok,
            },
            "aggregates": self.aggregates.iter().map(Aggregate::to_value).collect::<Vec<_>>(),
            "results": self.results.iter().map(CheckResult::to_value).collect::<Vec<_>>(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        text.push('\n');
        text
    }

    /// Results of one check, in report order.
    pub fn results_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a CheckResult> + 'a {
        self.results.iter().filter(move |r| r.check_id == id)
    }

    pub fn aggregate(&self, id: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.check_id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = num(0.1);
        assert_eq!(v.to_string(), "1.0000000000000001e-1");
        let back: f64 = v.to_string().parse().unwrap();
        assert_eq!(back, 0.1);
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(-2.5e-300).to_string(), "-2.5000000000000000e-300");
    }
}
