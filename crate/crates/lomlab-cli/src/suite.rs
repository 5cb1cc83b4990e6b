//! Runs the corpus against its expectations plus the acceptance criteria.

use std::time::Instant;

use lomlab::algebra::DEFAULT_SEED;
use lomlab::instance::{parse_instance, Expectation, InstanceFile};
use lomlab::{Error, Tolerance};
use serde_json::{json, Value};

use crate::corpus::CorpusEntry;
use crate::criteria::{self, CriterionResult};
use crate::ops::{self, Failure, Operation};
use crate::report;

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerance: Option<Tolerance>,
}

impl Overrides {
    fn apply(&self, mut inst: InstanceFile) -> InstanceFile {
        if let Some(s) = self.seed {
            inst.seed = Some(s);
        }
        if let Some(t) = self.tolerance {
            inst.tolerance = Some(t);
        }
        inst.with_defaults()
    }
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub file: String,
    pub sha256: String,
    pub name: Option<String>,
    pub passed: bool,
    pub detail: String,
    pub outcome: Value,
}

impl InstanceResult {
    fn to_json(&self) -> Value {
        json!({
            "file": self.file,
            "sha256": self.sha256,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "outcome": self.outcome,
        })
    }
}

pub struct SuiteReport {
    pub instances: Vec<InstanceResult>,
    pub criteria: Vec<CriterionResult>,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.passed) && self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "operation": "suite",
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed(),
            "instances": self.instances.iter().map(InstanceResult::to_json).collect::<Vec<_>>(),
            "criteria": self.criteria,
            "wall_time_ms": self.seconds * 1e3,
        })
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for i in &self.instances {
            let tag = if i.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {:<28} {}\n", i.file, i.detail));
        }
        for c in &self.criteria {
            out.push_str(&c.line());
            out.push('\n');
        }
        let failed = self.instances.iter().filter(|i| !i.passed).count() + self.criteria.iter().filter(|c| !c.passed).count();
        out.push_str(&format!(
            "{} instances, {} criteria, {failed} failures\n",
            self.instances.len(),
            self.criteria.len()
        ));
        out
    }
}

fn result_type(result: &Value) -> Option<&str> {
    result
        .get("algebra_type")
        .or_else(|| result.get("commutant").and_then(|c| c.get("algebra_type")))
        .and_then(Value::as_str)
}

fn result_dim(result: &Value) -> Option<u64> {
    result
        .get("algebra_dim")
        .or_else(|| result.get("commutant").and_then(|c| c.get("dim")))
        .and_then(Value::as_u64)
}

/// Compares an outcome with the expectation; `Err` describes the mismatch.
fn compare(expect: &Expectation, outcome: &Result<Value, Failure>) -> Result<String, String> {
    match (outcome, &expect.error) {
        (Err(f), Some(want)) if f.error.kind() == want => return Ok(format!("expected {want}")),
        (Err(f), _) => return Err(format!("{}: {}", f.error.kind(), f.error)),
        (Ok(_), Some(want)) => return Err(format!("expected {want}, run succeeded")),
        (Ok(_), None) => {}
    }
    let result = outcome.as_ref().expect("ok outcome");
    let mut seen = Vec::new();
    if let Some(t) = expect.algebra_type {
        let got = result_type(result);
        if got != Some(&t.to_string()) {
            return Err(format!("type {got:?}, expected {t}"));
        }
        seen.push(t.to_string());
    }
    if let Some(d) = expect.dim {
        let got = result_dim(result);
        if got != Some(d as u64) {
            return Err(format!("dimension {got:?}, expected {d}"));
        }
        seen.push(format!("dim {d}"));
    }
    if expect.transitive == Some(false) {
        return Err("expected a non-transitive algebra".into());
    }
    if let Some(v) = &expect.verdict {
        let got = result.get("verdict").and_then(|x| x.get("verdict")).and_then(Value::as_str);
        if got != Some(v.as_str()) {
            return Err(format!("verdict {got:?}, expected {v}"));
        }
        if v == "NonIsomorphic" {
            let ok = result.pointer("/witness_check/independently_verified").and_then(Value::as_bool);
            if ok != Some(true) {
                return Err("witness failed independent summation".into());
            }
        }
        seen.push(v.clone());
    }
    if let Some(p) = expect.p {
        let got = result.pointer("/verdict/p").and_then(Value::as_u64);
        if got != Some(p) {
            return Err(format!("p = {got:?}, expected {p}"));
        }
        seen.push(format!("p {p}"));
    }
    Ok(seen.join(", "))
}

fn run_entry(entry: &CorpusEntry, overrides: &Overrides) -> (InstanceResult, Option<InstanceFile>) {
    let sha256 = report::sha256_hex(&entry.bytes);
    let parsed = std::str::from_utf8(&entry.bytes)
        .map_err(|e| Error::Parse(format!("input is not UTF-8: {e}")))
        .and_then(parse_instance);
    let inst = match parsed {
        Ok(i) => overrides.apply(i),
        Err(e) => {
            let f = Failure::from(e);
            let result = InstanceResult {
                file: entry.file.clone(),
                sha256,
                name: None,
                passed: false,
                detail: format!("{}: {}", f.error.kind(), f.error),
                outcome: f.to_json(),
            };
            return (result, None);
        }
    };
    let op = Operation::for_kind(inst.payload.kind());
    let outcome = ops::run(op, &inst);
    let expect = inst.expect.clone().unwrap_or_default();
    let verdict = compare(&expect, &outcome);
    let outcome_json = match &outcome {
        Ok(v) => json!({ "operation": op.name(), "status": "ok", "result_sha256": report::value_hash(v) }),
        Err(f) => json!({ "operation": op.name(), "status": "error", "error": f.to_json() }),
    };
    let (passed, detail) = match verdict {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let result = InstanceResult { file: entry.file.clone(), sha256, name: Some(inst.name.clone()), passed, detail, outcome: outcome_json };
    (result, Some(inst))
}

/// Runs every entry (concurrently) and then the acceptance criteria on the
/// instances that parsed.
pub fn run(entries: &[CorpusEntry], overrides: &Overrides) -> SuiteReport {
    let start = Instant::now();
    let mut results: Vec<(InstanceResult, Option<InstanceFile>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries.iter().map(|e| scope.spawn(move || run_entry(e, overrides))).collect();
        handles.into_iter().map(|h| h.join().expect("instance thread panicked")).collect()
    });
    results.sort_by(|a, b| a.0.sha256.cmp(&b.0.sha256).then_with(|| a.0.file.cmp(&b.0.file)));
    let parsed: Vec<InstanceFile> = results.iter().filter_map(|(_, i)| i.clone()).collect();
    let seed = overrides.seed.unwrap_or(DEFAULT_SEED);
    let tolerance = overrides.tolerance.unwrap_or_default();
    let ctx = criteria::Context { corpus: &parsed, seed, tol: tolerance };
    let criteria = criteria::run_all(&ctx);
    SuiteReport {
        instances: results.into_iter().map(|(r, _)| r).collect(),
        criteria,
        seed,
        tolerance,
        seconds: start.elapsed().as_secs_f64(),
    }
}
