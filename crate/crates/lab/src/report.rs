use std::collections::BTreeMap;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One named measurement and the rule that decides it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub metrics: BTreeMap<String, Value>,
    /// Human-readable pass rule over `metrics`.
    pub criterion: String,
    pub passed: bool,
    /// False when an estimator behind this check hit its budget.
    pub converged: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, criterion: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            metrics: BTreeMap::new(),
            criterion: criterion.into(),
            passed: false,
            converged: true,
        }
    }

    pub fn metric(mut self, key: &str, value: impl Serialize) -> Self {
        self.metrics
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    pub fn converged(mut self, converged: bool) -> Self {
        self.converged = converged;
        self
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment_id: String,
    pub seed: u64,
    pub inputs: Value,
    pub results: Vec<CheckRecord>,
    pub verdict: Verdict,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
}

impl ExperimentReport {
    pub fn new(
        experiment_id: impl Into<String>,
        seed: u64,
        inputs: Value,
        results: Vec<CheckRecord>,
        wall_time: f64,
    ) -> Self {
        let verdict = verdict_of(&results);
        Self {
            experiment_id: experiment_id.into(),
            seed,
            inputs,
            results,
            verdict,
            wall_time,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite-or-null JSON values")
    }

    /// Pretty JSON with `wall_time` removed.
    pub fn to_stable_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        if let Value::Object(map) = &mut value {
            map.remove("wall_time");
        }
        serde_json::to_string_pretty(&value).expect("report serialises")
    }
}

/// Inconclusive if any check did not converge, else pass only if all passed.
pub fn verdict_of(results: &[CheckRecord]) -> Verdict {
    if results.iter().any(|r| !r.converged) {
        Verdict::Inconclusive
    } else if !results.is_empty() && results.iter().all(|r| r.passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn verdict_rules() {
        let ok = CheckRecord::new("a", "x").passed(true);
        let bad = CheckRecord::new("b", "x").passed(false);
        let slow = CheckRecord::new("c", "x").passed(true).converged(false);
        assert_eq!(verdict_of(std::slice::from_ref(&ok)), Verdict::Pass);
        assert_eq!(verdict_of(&[ok.clone(), bad.clone()]), Verdict::Fail);
        assert_eq!(verdict_of(&[bad, slow]), Verdict::Inconclusive);
        assert_eq!(verdict_of(&[]), Verdict::Fail);
    }

    #[test]
    fn stable_json_drops_wall_time() {
        let rec = CheckRecord::new("a", "x ≤ 1").metric("x", 0.5).passed(true);
        let r1 = ExperimentReport::new("e", 1, json!({"k": 1}), vec![rec.clone()], 0.25);
        let r2 = ExperimentReport::new("e", 1, json!({"k": 1}), vec![rec], 9.0);
        assert_ne!(r1.to_json(), r2.to_json());
        assert_eq!(r1.to_stable_json(), r2.to_stable_json());
        assert!(!r1.to_stable_json().contains("wall_time"));
        assert!(r1.to_json().contains("\"verdict\": \"pass\""));
    }
}
