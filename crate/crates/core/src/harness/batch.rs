//! Batch verification: generate and check one scheme per seed, in
//! parallel, aggregating in seed order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{theorem_check, HypothesisClass};
use crate::error::{Error, Result};
use crate::harness::generate::{generate, PatternSpec};
use crate::harness::schemefile::SchemeFile;

pub const REPORT_VERSION: &str = "fatpoints-report/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub hypothesis_class: HypothesisClass,
    pub reg: usize,
    pub bound: usize,
    pub holds: bool,
    pub tight: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialError {
    pub seed: u64,
    pub message: String,
}

/// A failed promise, with the scheme for replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub hypothesis_class: HypothesisClass,
    pub reg: usize,
    pub bound: usize,
    pub scheme: SchemeFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchReport {
    pub version: &'static str,
    pub spec: PatternSpec,
    pub base_seed: u64,
    pub trials: usize,
    pub records: Vec<TrialRecord>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub error_count: usize,
    pub errors: Vec<TrialError>,
    pub max_reg: usize,
    /// Counts of reg - bound.
    pub histogram: BTreeMap<i64, usize>,
}

enum Outcome {
    Checked(TrialRecord, Option<Violation>),
    Failed(TrialError),
}

fn run_trial(spec: &PatternSpec, seed: u64) -> Outcome {
    let trial = || -> Result<(TrialRecord, Option<Violation>)> {
        let z = generate(&spec.with_seed(seed))?;
        let v = theorem_check(&z)?;
        let record = TrialRecord {
            seed,
            hypothesis_class: v.hypothesis_class,
            reg: v.reg,
            bound: v.bound,
            holds: v.holds,
            tight: v.tight,
        };
        let violation = v.violation.then(|| Violation {
            seed,
            hypothesis_class: v.hypothesis_class,
            reg: v.reg,
            bound: v.bound,
            scheme: SchemeFile::from_scheme(&z),
        });
        Ok((record, violation))
    };
    match trial() {
        Ok((r, v)) => Outcome::Checked(r, v),
        Err(e) => Outcome::Failed(TrialError {
            seed,
            message: e.to_string(),
        }),
    }
}

/// Runs seeds base_seed..base_seed + trials. `workers` = 0 uses the
/// global rayon pool. The report does not depend on the worker count.
pub fn batch_check(spec: &PatternSpec, trials: usize, base_seed: u64, workers: usize) -> Result<BatchReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..trials as u64).map(|k| base_seed.wrapping_add(k)).collect();
    let run = || -> Vec<Outcome> { seeds.par_iter().map(|&s| run_trial(spec, s)).collect() };
    let outcomes = if workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
            .install(run)
    };

    let mut records = Vec::new();
    let mut violations = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Checked(r, v) => {
                records.push(r);
                violations.extend(v);
            }
            Outcome::Failed(e) => errors.push(e),
        }
    }
    let mut histogram = BTreeMap::new();
    for r in &records {
        *histogram.entry(r.reg as i64 - r.bound as i64).or_insert(0) += 1;
    }
    Ok(BatchReport {
        version: REPORT_VERSION,
        spec: spec.with_seed(base_seed),
        base_seed,
        trials,
        max_reg: records.iter().map(|r| r.reg).max().unwrap_or(0),
        violation_count: violations.len(),
        violations,
        error_count: errors.len(),
        errors,
        records,
        histogram,
    })
}

pub fn report_json(report: &BatchReport) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}
