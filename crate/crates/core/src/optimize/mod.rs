//! Design evaluation archive, T-Search, scalarization and Pareto fronts.

mod evaluators;
mod tsearch;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{DesignBounds, DesignParams};

pub use evaluators::{ObjectiveSpec, OracleEvaluator, SurrogateEvaluator, DEFAULT_FROUDE_PAIR};
pub use tsearch::{default_weight_sets, multi_objective_run, t_search, Constraint, LinearConstraint, MultiObjectiveRun, TSearchConfig};

pub const ARCHIVE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Surrogate,
    Oracle,
}

impl EvaluatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EvaluatorKind::Surrogate => "surrogate",
            EvaluatorKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub id: u64,
    pub params: DesignParams,
    /// Empty for infeasible records.
    pub objectives: Vec<f64>,
    pub feasible: bool,
    pub violations: Vec<String>,
    pub evaluator: EvaluatorKind,
    pub wall_time_s: f64,
}

/// Result of evaluating one design.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Feasible(Vec<f64>),
    Infeasible(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub outcome: Outcome,
    pub wall_time_s: f64,
}

/// Something that maps a design onto objective values.
pub trait Evaluator {
    fn kind(&self) -> EvaluatorKind;
    fn objective_names(&self) -> Vec<String>;
    fn evaluate(&mut self, params: &DesignParams) -> Result<Evaluation>;
}

/// Closure-backed evaluator, mostly for analytic test problems.
pub struct FnEvaluator<F> {
    pub kind: EvaluatorKind,
    pub names: Vec<String>,
    pub f: F,
}

impl<F> FnEvaluator<F>
where
    F: FnMut(&DesignParams) -> Outcome,
{
    pub fn new(names: &[&str], f: F) -> Self {
        FnEvaluator {
            kind: EvaluatorKind::Oracle,
            names: names.iter().map(|n| String::from(*n)).collect(),
            f,
        }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: FnMut(&DesignParams) -> Outcome,
{
    fn kind(&self) -> EvaluatorKind {
        self.kind
    }

    fn objective_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn evaluate(&mut self, params: &DesignParams) -> Result<Evaluation> {
        Ok(Evaluation {
            outcome: (self.f)(params),
            wall_time_s: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub seed: u64,
    pub bounds: DesignBounds,
    pub config_hash: u64,
    pub objective_names: Vec<String>,
}

impl RunMetadata {
    pub fn new(seed: u64, bounds: DesignBounds, config_hash: u64, objective_names: Vec<String>) -> Self {
        RunMetadata {
            schema_version: ARCHIVE_SCHEMA_VERSION,
            seed,
            bounds,
            config_hash,
            objective_names,
        }
    }
}

fn param_key(p: &DesignParams) -> [u64; 5] {
    p.to_array().map(f64::to_bits)
}

/// Append-only evaluation log. Identical designs are looked up instead of
/// re-evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    metadata: RunMetadata,
    records: Vec<EvaluationRecord>,
    by_params: BTreeMap<[u64; 5], usize>,
}

impl Archive {
    pub fn new(metadata: RunMetadata) -> Self {
        Archive {
            metadata,
            records: Vec::new(),
            by_params: BTreeMap::new(),
        }
    }

    /// Rebuild an archive from persisted records, checking its invariants.
    pub fn from_records(metadata: RunMetadata, records: Vec<EvaluationRecord>) -> Result<Self> {
        let mut archive = Archive::new(metadata);
        for r in records {
            archive.push_record(r)?;
        }
        Ok(archive)
    }

    pub fn metadata(&self) -> &RunMetadata {
        &self.metadata
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feasible(&self) -> impl Iterator<Item = &EvaluationRecord> {
        self.records.iter().filter(|r| r.feasible)
    }

    pub fn lookup(&self, params: &DesignParams) -> Option<&EvaluationRecord> {
        self.by_params.get(&param_key(params)).map(|&i| &self.records[i])
    }

    fn push_record(&mut self, record: EvaluationRecord) -> Result<()> {
        if record.id != self.records.len() as u64 {
            return Err(Error::Config(alloc::format!(
                "archive record ids must be sequential: expected {}, found {}",
                self.records.len(),
                record.id
            )));
        }
        let expected = self.metadata.objective_names.len();
        if record.feasible && record.objectives.len() != expected {
            return Err(Error::CountMismatch {
                expected,
                actual: record.objectives.len(),
            });
        }
        if !record.feasible && !record.objectives.is_empty() {
            return Err(Error::Config("infeasible records carry no objective values".into()));
        }
        self.by_params.entry(param_key(&record.params)).or_insert(self.records.len());
        self.records.push(record);
        Ok(())
    }

    /// Append a new record and return it.
    pub fn append(&mut self, params: DesignParams, evaluation: Evaluation, evaluator: EvaluatorKind) -> Result<&EvaluationRecord> {
        let (objectives, feasible, violations) = match evaluation.outcome {
            Outcome::Feasible(v) => (v, true, Vec::new()),
            Outcome::Infeasible(why) => (Vec::new(), false, why),
        };
        let id = self.records.len() as u64;
        self.push_record(EvaluationRecord {
            id,
            params,
            objectives,
            feasible,
            violations,
            evaluator,
            wall_time_s: evaluation.wall_time_s,
        })?;
        Ok(&self.records[id as usize])
    }

    /// Cached record for `params`, or evaluate and append. The flag reports
    /// whether a new evaluation happened.
    pub fn evaluate(&mut self, evaluator: &mut dyn Evaluator, params: &DesignParams) -> Result<(EvaluationRecord, bool)> {
        if let Some(r) = self.lookup(params) {
            return Ok((r.clone(), false));
        }
        let evaluation = evaluator.evaluate(params)?;
        let record = self.append(*params, evaluation, evaluator.kind())?.clone();
        Ok((record, true))
    }
}

/// Weighted mean `Σ w_i f_i / Σ w_i`.
pub fn scalarize(objectives: &[f64], weights: &[f64]) -> Result<f64> {
    if objectives.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: objectives.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Config("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Config("weights must not all be zero".into()));
    }
    Ok(objectives.iter().zip(weights).map(|(f, w)| f * w).sum::<f64>() / total)
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn project(r: &EvaluationRecord, idx: &[usize]) -> Result<Vec<f64>> {
    idx.iter()
        .map(|&i| {
            r.objectives.get(i).copied().ok_or(Error::DimensionMismatch {
                expected: i + 1,
                actual: r.objectives.len(),
            })
        })
        .collect()
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Pairwise dominance filter, `O(n²)`.
pub fn pareto_front_brute_force(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, &points[i])))
        .collect()
}

/// Indices of the non-dominated points, sorted ascending by the
/// objectives in order (ties by index).
pub fn non_dominated(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lexicographic(&points[a], &points[b]).then(a.cmp(&b)));
    if points.first().map_or(true, |p| p.len() != 2) {
        let keep = pareto_front_brute_force(points);
        return order.into_iter().filter(|i| keep.binary_search(i).is_ok()).collect();
    }
    // Sweep in ascending first objective; a group sharing the first value
    // survives through its lowest second values, if they beat everything
    // seen so far.
    let mut front = Vec::new();
    let mut best = f64::INFINITY;
    let mut g = 0;
    while g < order.len() {
        let f1 = points[order[g]][0];
        let mut end = g;
        while end < order.len() && points[order[end]][0] == f1 {
            end += 1;
        }
        // sorted lexicographically, so the group minimum comes first
        let low = points[order[g]][1];
        if low < best {
            front.extend(order[g..end].iter().copied().filter(|&i| points[i][1] == low));
            best = low;
        }
        g = end;
    }
    front
}

/// Feasible non-dominated records over the chosen objectives, ascending in
/// the first of them.
pub fn pareto_front(records: &[EvaluationRecord], objective_indices: &[usize]) -> Result<Vec<EvaluationRecord>> {
    let feasible: Vec<&EvaluationRecord> = records.iter().filter(|r| r.feasible).collect();
    if feasible.is_empty() {
        return Err(Error::EmptyFront);
    }
    let points = feasible.iter().map(|r| project(r, objective_indices)).collect::<Result<Vec<_>>>()?;
    Ok(non_dominated(&points).into_iter().map(|i| feasible[i].clone()).collect())
}
