//! Trial runner and reports. Records are sorted by trial index; everything
//! except `elapsed_ms` is a function of the config.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::checks::{check, Failure};
use crate::config::{Suite, SuiteConfig};
use crate::gen::{suite_instance, trial_rng};
use crate::instance::Instance;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    /// SHA-256 of the instance JSON; empty when generation itself failed.
    pub digest: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    /// Present on every failure whose instance was generated; otherwise the
    /// trial is regenerated from `(seed, index)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Instance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Failures by engine error variant; property failures count as `Property`.
    pub errors: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub engine_version: String,
    pub config: SuiteConfig,
    pub anchor: String,
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn human_summary(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "{} over {}: {}/{} passed (seed {})",
            self.config.suite, self.config.ring, s.passed, s.trials, self.config.seed
        );
        for (k, n) in &s.errors {
            out.push_str(&format!("\n  {k}: {n}"));
        }
        for r in self.failures().take(5) {
            if let Some(f) = &r.failure {
                out.push_str(&format!("\n  trial {}: {}", r.index, f.reason));
            }
        }
        out
    }
}

pub fn digest(inst: &Instance) -> String {
    let bytes = serde_json::to_vec(inst).expect("instances serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn panic_failure(p: Box<dyn std::any::Any + Send>) -> Failure {
    let msg = p
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into());
    Failure { reason: msg, error: Some("Panic".into()) }
}

/// Checks one instance, turning panics into failures.
pub fn evaluate(suite: Suite, inst: &Instance) -> Result<Value, Failure> {
    catch_unwind(AssertUnwindSafe(|| check(suite, inst))).unwrap_or_else(|p| Err(panic_failure(p)))
}

fn record(index: u64, inst: Option<Instance>, outcome: Result<Value, Failure>) -> TrialRecord {
    let digest = inst.as_ref().map(digest).unwrap_or_default();
    match outcome {
        Ok(w) => TrialRecord { index, digest, passed: true, witnesses: Some(w), failure: None, payload: None },
        Err(f) => TrialRecord { index, digest, passed: false, witnesses: None, failure: Some(f), payload: inst },
    }
}

pub fn run_trial(config: &SuiteConfig, index: u64) -> TrialRecord {
    let mut r = trial_rng(config.seed, index);
    let generated = catch_unwind(AssertUnwindSafe(|| suite_instance(config.suite, config.ring, &config.caps, index, &mut r)));
    match generated {
        Ok(Ok(inst)) => {
            let outcome = evaluate(config.suite, &inst);
            record(index, Some(inst), outcome)
        }
        Ok(Err(e)) => record(index, None, Err(e.into())),
        Err(p) => record(index, None, Err(panic_failure(p))),
    }
}

pub fn run_suite(config: &SuiteConfig) -> Report {
    let start = Instant::now();
    let records: Vec<TrialRecord> = (0..config.trials as u64).into_par_iter().map(|t| run_trial(config, t)).collect();
    let passed = records.iter().filter(|r| r.passed).count();
    let mut errors = BTreeMap::new();
    for f in records.iter().filter_map(|r| r.failure.as_ref()) {
        *errors.entry(f.error.clone().unwrap_or_else(|| "Property".into())).or_insert(0) += 1;
    }
    Report {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        engine_version: devissage::VERSION.into(),
        config: config.clone(),
        anchor: config.suite.anchor().into(),
        summary: Summary { trials: records.len(), passed, failed: records.len() - passed, errors },
        records,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Reruns each failed trial of a report and returns `(index, reproduced)`,
/// where `reproduced` means the new record serializes to the stored bytes.
pub fn replay(report: &Report) -> Vec<(u64, bool)> {
    report
        .failures()
        .map(|old| {
            let new = match &old.payload {
                Some(inst) => record(old.index, Some(inst.clone()), evaluate(report.config.suite, inst)),
                None => run_trial(&report.config, old.index),
            };
            let bytes = |r: &TrialRecord| serde_json::to_vec(r).expect("records serialize");
            (old.index, bytes(&new) == bytes(old))
        })
        .collect()
}
