//! Machine-readable scenario reports.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

/// Ratios are formed only above this denominator.
pub const RATIO_FLOOR: f64 = 1e-12;

/// `a / b` when `b` exceeds [`RATIO_FLOOR`].
pub fn ratio(a: f64, b: f64) -> Option<f64> {
    (b.abs() > RATIO_FLOOR).then(|| a / b)
}

/// How a check is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Discrete identity or inequality; any violation fails.
    Exact,
    /// Empirical constant against a threshold declared before the run.
    Empirical,
    /// Reported only.
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tier: Tier,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub constants: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn new(scenario: &str, columns: &[&str]) -> Self {
        Self {
            scenario: scenario.to_string(),
            params: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            constants: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.push((key.to_string(), value));
    }

    pub fn at_most(&mut self, name: &str, tier: Tier, value: f64, bound: f64) -> bool {
        self.push_check(name, tier, value, Relation::AtMost, bound, value <= bound)
    }

    pub fn at_least(&mut self, name: &str, tier: Tier, value: f64, bound: f64) -> bool {
        self.push_check(name, tier, value, Relation::AtLeast, bound, value >= bound)
    }

    /// Boolean check recorded as `value = 1` against `bound = 1`.
    pub fn holds(&mut self, name: &str, tier: Tier, ok: bool) -> bool {
        self.push_check(name, tier, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0, ok)
    }

    fn push_check(&mut self, name: &str, tier: Tier, value: f64, relation: Relation, bound: f64, passed: bool) -> bool {
        let passed = passed && !value.is_nan();
        self.checks.push(Check {
            name: name.to_string(),
            tier,
            value,
            relation,
            bound,
            passed,
        });
        passed
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn constant_value(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// True when every exact and empirical check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.tier == Tier::Info || c.passed)
    }

    /// Failed exact checks.
    pub fn hard_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.tier == Tier::Exact && !c.passed).count()
    }

    /// Per-instance table: header `instance,<columns>`, LF line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "instance")?;
        for c in &self.columns {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(w, "{i}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Summary entry for a run manifest.
    pub fn summary(&self) -> Value {
        let params: serde_json::Map<String, Value> =
            self.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let constants: serde_json::Map<String, Value> =
            self.constants.iter().map(|(k, v)| (k.clone(), json!(finite_or_null(*v)))).collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "tier": c.tier,
                    "value": finite_or_null(c.value),
                    "relation": c.relation,
                    "bound": finite_or_null(c.bound),
                    "passed": c.passed,
                })
            })
            .collect();
        json!({
            "scenario": self.scenario,
            "passed": self.passed(),
            "instances": self.rows.len(),
            "params": params,
            "constants": constants,
            "checks": checks,
        })
    }

    /// One line per check, for logs.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            out.push_str(&format!(
                "{} {}: {:.6e} {rel} {:.6e} [{:?}]\n",
                match (c.tier, c.passed) {
                    (Tier::Info, _) => "info",
                    (_, true) => "ok  ",
                    (_, false) => "FAIL",
                },
                c.name,
                c.value,
                c.bound,
                c.tier
            ));
        }
        out
    }
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_pass_flag() {
        let mut r = VerifyReport::new("demo", &["a", "b"]);
        r.param("p", 1.5);
        r.row(vec![1.0, 0.25]);
        r.row(vec![2.0, -3.0]);
        assert_eq!(r.csv_string(), "instance,a,b\n0,1,0.25\n1,2,-3\n");
        assert!(r.at_most("x", Tier::Empirical, 1.0, 2.0));
        r.at_least("info", Tier::Info, 0.0, 1.0);
        assert!(r.passed());
        r.at_most("y", Tier::Exact, f64::NAN, 1.0);
        assert!(!r.passed());
        assert_eq!(r.hard_failures(), 1);
        let s = r.summary();
        assert_eq!(s["scenario"], "demo");
        assert_eq!(s["checks"][2]["value"], Value::Null);
    }

    #[test]
    fn ratio_floor() {
        assert_eq!(ratio(1.0, 0.0), None);
        assert_eq!(ratio(1.0, 1e-13), None);
        assert_eq!(ratio(1.0, 2.0), Some(0.5));
    }
}
