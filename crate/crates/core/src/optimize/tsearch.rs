//! Tangent search: axis probes, extrapolating moves and step contraction in
//! the unit cube of the free parameters.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{pareto_front, scalarize, Archive, Evaluation, EvaluationRecord, Evaluator, Outcome};
use crate::doe::DesignSpace;
use crate::error::{Error, Result};
use crate::morph::DesignParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TSearchConfig {
    /// Initial probe step as a fraction of each parameter range.
    pub initial_step: f64,
    pub contraction: f64,
    pub expansion: f64,
    /// Search stops once the step falls below this fraction of the range.
    pub tolerance: f64,
    /// Maximum number of new evaluations per search.
    pub budget: usize,
}

impl Default for TSearchConfig {
    fn default() -> Self {
        TSearchConfig {
            initial_step: 0.1,
            contraction: 0.5,
            expansion: 2.0,
            tolerance: 1e-4,
            budget: 500,
        }
    }
}

impl TSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.contraction && self.contraction < 1.0 && 1.0 < self.expansion) {
            return Err(Error::Config("need 0 < contraction < 1 < expansion".into()));
        }
        if !(self.initial_step > 0.0 && self.tolerance > 0.0) {
            return Err(Error::Config("step and tolerance must be positive".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("evaluation budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inequality constraint, satisfied when `value(p) <= 0`.
pub trait Constraint {
    fn name(&self) -> String;
    fn value(&self, params: &DesignParams) -> f64;
}

/// `Σ coefficients[i] · params[i] <= rhs`, parameters in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub coefficients: [f64; 5],
    pub rhs: f64,
}

impl Constraint for LinearConstraint {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, params: &DesignParams) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(params.to_array()).map(|(c, x)| c * x).sum();
        lhs - self.rhs
    }
}

enum Probe {
    Value(f64, EvaluationRecord),
    Infeasible,
    Exhausted,
}

struct Search<'a> {
    evaluator: &'a mut dyn Evaluator,
    weights: &'a [f64],
    space: &'a DesignSpace,
    constraints: &'a [&'a dyn Constraint],
    archive: &'a mut Archive,
    used: usize,
    budget: usize,
}

impl Search<'_> {
    fn violations(&self, u: &[f64], params: &DesignParams) -> Vec<String> {
        let mut out = Vec::new();
        for (p, &x) in self.space.free().iter().zip(u) {
            if !(0.0..=1.0).contains(&x) {
                out.push(format!("bounds:{}", p.name()));
            }
        }
        for c in self.constraints {
            if !(c.value(params) <= 0.0) {
                out.push(c.name());
            }
        }
        out
    }

    fn probe_params(&mut self, u: &[f64], params: DesignParams) -> Result<Probe> {
        let record = match self.archive.lookup(&params) {
            Some(r) => r.clone(),
            None => {
                if self.used >= self.budget {
                    return Ok(Probe::Exhausted);
                }
                self.used += 1;
                let violations = self.violations(u, &params);
                let evaluation = if violations.is_empty() {
                    self.evaluator.evaluate(&params)?
                } else {
                    Evaluation {
                        outcome: Outcome::Infeasible(violations),
                        wall_time_s: 0.0,
                    }
                };
                self.archive.append(params, evaluation, self.evaluator.kind())?.clone()
            }
        };
        if record.feasible {
            let f = scalarize(&record.objectives, self.weights)?;
            Ok(Probe::Value(f, record))
        } else {
            Ok(Probe::Infeasible)
        }
    }

    fn probe(&mut self, u: &[f64]) -> Result<Probe> {
        let params = self.space.scale_to_bounds(u)?;
        self.probe_params(u, params)
    }
}

struct Base {
    u: Vec<f64>,
    f: f64,
    record: EvaluationRecord,
}

/// Minimize the weighted objectives of `evaluator` over the free parameters
/// of `space`, starting from `x0`. Every new evaluation, including rejected
/// candidates, is appended to `archive`; designs already in the archive are
/// reused without re-evaluation.
pub fn t_search(
    evaluator: &mut dyn Evaluator,
    weights: &[f64],
    space: &DesignSpace,
    constraints: &[&dyn Constraint],
    x0: &DesignParams,
    config: &TSearchConfig,
    archive: &mut Archive,
) -> Result<EvaluationRecord> {
    config.validate()?;
    let d = space.dimension();
    if d == 0 {
        return Err(Error::Config("no free parameters to search".into()));
    }
    let mut s = Search {
        evaluator,
        weights,
        space,
        constraints,
        archive,
        used: 0,
        budget: config.budget,
    };
    let u0 = space.to_unit(x0);
    let mut base = match s.probe_params(&u0, *x0)? {
        Probe::Value(f, record) => Base { u: u0, f, record },
        _ => {
            let why = s.archive.lookup(x0).map(|r| r.violations.join(", ")).unwrap_or_default();
            return Err(Error::InfeasibleStart(why));
        }
    };
    let mut step = config.initial_step;
    'search: while step >= config.tolerance {
        // exploratory phase
        let mut u = base.u.clone();
        let mut best: Option<(f64, EvaluationRecord)> = None;
        let mut blocked = Vec::new();
        for i in 0..d {
            let current = best.as_ref().map_or(base.f, |b| b.0);
            for dir in [1.0, -1.0] {
                let mut cand = u.clone();
                cand[i] += dir * step;
                match s.probe(&cand)? {
                    Probe::Value(f, r) if f < current => {
                        u = cand;
                        best = Some((f, r));
                        break;
                    }
                    Probe::Value(..) => {}
                    Probe::Infeasible => blocked.push(i),
                    Probe::Exhausted => break 'search,
                }
            }
        }
        if let Some((f, record)) = best {
            // tangent move along the improvement direction
            let cand: Vec<f64> = base.u.iter().zip(&u).map(|(a, b)| a + config.expansion * (b - a)).collect();
            base = Base { u, f, record };
            match s.probe(&cand)? {
                Probe::Value(f, record) if f < base.f => base = Base { u: cand, f, record },
                Probe::Exhausted => break,
                _ => {}
            }
            continue;
        }
        // Blocked by a bound or constraint: slide along it with diagonal probes.
        blocked.dedup();
        for &i in &blocked {
            for j in (0..d).filter(|&j| j != i) {
                for (si, sj) in [(1.0, -1.0), (-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0)] {
                    let mut cand = base.u.clone();
                    cand[i] += si * step;
                    cand[j] += sj * step;
                    match s.probe(&cand)? {
                        Probe::Value(f, record) if f < base.f => {
                            base = Base { u: cand, f, record };
                            continue 'search;
                        }
                        Probe::Exhausted => break 'search,
                        _ => {}
                    }
                }
            }
        }
        step *= config.contraction;
    }
    Ok(base.record)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiObjectiveRun {
    /// Best record of each weighted search, in weight order.
    pub best: Vec<EvaluationRecord>,
    /// Non-dominated feasible records of the whole archive.
    pub front: Vec<EvaluationRecord>,
}

/// Weighted T-Search restarts sharing one archive, followed by a Pareto
/// filter over everything evaluated.
pub fn multi_objective_run(
    evaluator: &mut dyn Evaluator,
    space: &DesignSpace,
    x0: &DesignParams,
    weight_sets: &[Vec<f64>],
    constraints: &[&dyn Constraint],
    config: &TSearchConfig,
    archive: &mut Archive,
) -> Result<MultiObjectiveRun> {
    if space.dimension() == 0 {
        return Err(Error::Config("multi-objective run needs at least one free parameter".into()));
    }
    let n = evaluator.objective_names().len();
    let mut best = Vec::with_capacity(weight_sets.len());
    for w in weight_sets {
        best.push(t_search(evaluator, w, space, constraints, x0, config, archive)?);
    }
    let indices: Vec<usize> = (0..n).collect();
    let front = pareto_front(archive.records(), &indices)?;
    Ok(MultiObjectiveRun { best, front })
}

/// The five weight vectors used for two-speed runs.
pub fn default_weight_sets() -> Vec<Vec<f64>> {
    [(1.0, 0.0), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.0, 1.0)]
        .iter()
        .map(|&(a, b)| alloc::vec![a, b])
        .collect()
}
