//! Suite reports: per-check verdicts, measured constants and timings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// How a measured constant is reduced across trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduce {
    Max,
    Min,
    Sum,
}

impl Reduce {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Reduce::Max => {
                if b > a || b.is_nan() {
                    b
                } else {
                    a
                }
            }
            Reduce::Min => {
                if b < a || b.is_nan() {
                    b
                } else {
                    a
                }
            }
            Reduce::Sum => a + b,
        }
    }
}

/// JSON has no infinities: non-finite values are written as strings.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Num(*v).serialize(s)
        } else {
            Repr::Text(v.to_string()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub passed: bool,
    pub evaluations: usize,
    pub failures: usize,
    /// The first few failures, in trial order.
    pub examples: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    #[serde(with = "extended_float")]
    pub value: f64,
    pub reduce: Reduce,
}

/// Outcome of one trial, merged into the suite report in trial order.
#[derive(Debug, Clone, Default)]
pub struct TrialLog {
    pub trial: usize,
    pub seed: u64,
    checks: Vec<(String, bool, String)>,
    constants: Vec<(String, f64, Reduce)>,
}

impl TrialLog {
    pub fn new(trial: usize, seed: u64) -> Self {
        TrialLog { trial, seed, ..Default::default() }
    }

    /// Records a named verdict; `detail` is only evaluated on failure.
    pub fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) -> bool {
        let d = if ok { String::new() } else { detail() };
        self.checks.push((name.to_string(), ok, d));
        ok
    }

    pub fn max(&mut self, name: &str, v: f64) {
        self.constants.push((name.to_string(), v, Reduce::Max));
    }

    pub fn min(&mut self, name: &str, v: f64) {
        self.constants.push((name.to_string(), v, Reduce::Min));
    }

    pub fn sum(&mut self, name: &str, v: f64) {
        self.constants.push((name.to_string(), v, Reduce::Sum));
    }

    /// Records an error raised by the code under test as a failed check.
    pub fn error(&mut self, name: &str, e: &dyn std::fmt::Display) {
        self.checks.push((name.to_string(), false, e.to_string()));
    }
}

const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub m: u32,
    pub seed: u64,
    pub trials: usize,
    pub checks: BTreeMap<String, CheckSummary>,
    pub constants: BTreeMap<String, Constant>,
}

impl SuiteReport {
    pub fn new(suite: &str, m: u32, seed: u64, trials: usize) -> Self {
        SuiteReport { suite: suite.into(), m, seed, trials, checks: BTreeMap::new(), constants: BTreeMap::new() }
    }

    /// Appends a trial under `prefix`.
    pub fn absorb(&mut self, prefix: &str, log: TrialLog) {
        for (name, ok, detail) in log.checks {
            let e = self.checks.entry(format!("{prefix}{name}")).or_insert(CheckSummary {
                passed: true,
                evaluations: 0,
                failures: 0,
                examples: Vec::new(),
            });
            e.evaluations += 1;
            if !ok {
                e.passed = false;
                e.failures += 1;
                if e.examples.len() < MAX_EXAMPLES {
                    e.examples.push(Failure { trial: log.trial, seed: log.seed, detail });
                }
            }
        }
        for (name, v, reduce) in log.constants {
            self.constants
                .entry(format!("{prefix}{name}"))
                .and_modify(|c| c.value = c.reduce.apply(c.value, v))
                .or_insert(Constant { value: v, reduce });
        }
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.passed)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).map(|c| c.value)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| !c.passed).map(|(n, _)| n.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "suite {} (M = {}, seed = {}, trials = {})", self.suite, self.m, self.seed, self.trials);
        for (name, c) in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {name} ({} evaluations, {} failures)", c.evaluations, c.failures);
            for f in &c.examples {
                let _ = writeln!(s, "    trial {} seed {}: {}", f.trial, f.seed, f.detail);
            }
        }
        if !self.constants.is_empty() {
            let _ = writeln!(s, "constants:");
            let width = self.constants.keys().map(|k| k.len()).max().unwrap_or(0);
            for (name, c) in &self.constants {
                let _ = writeln!(s, "  {name:<width$}  {:.6e}  ({:?})", c.value, c.reduce);
            }
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{verdict}: {} checks, {} failed", self.checks.len(), self.failed_checks().len());
        s
    }

    /// Writes `report.json`, `report.txt` and `timings.json` into `dir`.
    pub fn write(&self, dir: &Path, timings: &BTreeMap<String, f64>) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("report.txt"), self.to_text())?;
        std::fs::write(dir.join("timings.json"), serde_json::to_string_pretty(timings)?)?;
        Ok(())
    }
}
