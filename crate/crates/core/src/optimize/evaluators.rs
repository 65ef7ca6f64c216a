use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Evaluation, Evaluator, EvaluatorKind, Outcome};
use crate::error::{Error, Result};
use crate::fields::{integrate_forces, speed_from_froude, ForceOptions};
use crate::mesh::HullMesh;
use crate::morph::{apply_morph, DesignParams, MorphConfig};
use crate::oracle::{surface_samples, OracleConfig};
use crate::surrogate::{evaluate_design, SamplingPlan, SurrogateModel};

/// Froude numbers of the two-speed resistance objectives.
pub const DEFAULT_FROUDE_PAIR: [f64; 2] = [0.18, 0.26];

/// Total resistance `Fx` at the design's own speed or at a fixed Froude
/// number based on the baseline hull length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSpec {
    DesignSpeed,
    Froude(f64),
}

impl ObjectiveSpec {
    fn speed(self, params: &DesignParams, gravity: f64, length: f64) -> f64 {
        match self {
            ObjectiveSpec::DesignSpeed => params.v_inf,
            ObjectiveSpec::Froude(fr) => speed_from_froude(fr, gravity, length),
        }
    }

    pub fn two_speed() -> Vec<ObjectiveSpec> {
        DEFAULT_FROUDE_PAIR.iter().map(|&f| ObjectiveSpec::Froude(f)).collect()
    }
}

fn objective_names(specs: &[ObjectiveSpec]) -> Vec<String> {
    (0..specs.len())
        .map(|i| {
            if i == 0 {
                String::from("eval_TotalForceX")
            } else {
                format!("eval_TotalForceX{}", i + 1)
            }
        })
        .collect()
}

fn baseline_length(mesh: &HullMesh) -> f64 {
    let b = mesh.bounds();
    b.max.x - b.min.x
}

/// Morph the baseline, or report why the design cannot be built.
fn morph_or_reject(baseline: &HullMesh, params: &DesignParams, morph: &MorphConfig) -> Result<core::result::Result<HullMesh, String>> {
    match apply_morph(baseline, params, morph) {
        Ok(mesh) => Ok(Ok(mesh)),
        Err(e @ (Error::MorphRejected { .. } | Error::OutOfBounds { .. } | Error::Domain(_))) => {
            Ok(Err(format!("morph: {e}")))
        }
        Err(e) => Err(e),
    }
}

/// Ground-truth evaluator.
#[derive(Debug, Clone)]
pub struct OracleEvaluator {
    pub baseline: HullMesh,
    pub morph: MorphConfig,
    pub config: OracleConfig,
    pub objectives: Vec<ObjectiveSpec>,
}

impl Evaluator for OracleEvaluator {
    fn kind(&self) -> EvaluatorKind {
        EvaluatorKind::Oracle
    }

    fn objective_names(&self) -> Vec<String> {
        objective_names(&self.objectives)
    }

    fn evaluate(&mut self, params: &DesignParams) -> Result<Evaluation> {
        let mesh = match morph_or_reject(&self.baseline, params, &self.morph)? {
            Ok(m) => m,
            Err(why) => {
                return Ok(Evaluation {
                    outcome: Outcome::Infeasible(alloc::vec![why]),
                    wall_time_s: 0.0,
                })
            }
        };
        let length = baseline_length(&self.baseline);
        let mut values = Vec::with_capacity(self.objectives.len());
        for spec in &self.objectives {
            let p = DesignParams {
                v_inf: spec.speed(params, self.config.constants.gravity, length),
                ..*params
            };
            let samples = surface_samples(&mesh, &p, &self.config);
            values.push(integrate_forces(&mesh, &samples, &self.config.constants, ForceOptions::default())?.fx);
        }
        Ok(Evaluation {
            outcome: Outcome::Feasible(values),
            wall_time_s: 0.0,
        })
    }
}

/// Evaluator backed by a trained surrogate.
#[derive(Debug, Clone)]
pub struct SurrogateEvaluator {
    pub model: SurrogateModel,
    pub baseline: HullMesh,
    pub morph: MorphConfig,
    pub plan: SamplingPlan,
    pub objectives: Vec<ObjectiveSpec>,
}

impl Evaluator for SurrogateEvaluator {
    fn kind(&self) -> EvaluatorKind {
        EvaluatorKind::Surrogate
    }

    fn objective_names(&self) -> Vec<String> {
        objective_names(&self.objectives)
    }

    fn evaluate(&mut self, params: &DesignParams) -> Result<Evaluation> {
        let mesh = match morph_or_reject(&self.baseline, params, &self.morph)? {
            Ok(m) => m,
            Err(why) => {
                return Ok(Evaluation {
                    outcome: Outcome::Infeasible(alloc::vec![why]),
                    wall_time_s: 0.0,
                })
            }
        };
        let length = baseline_length(&self.baseline);
        let mut values = Vec::with_capacity(self.objectives.len());
        for spec in &self.objectives {
            let p = DesignParams {
                v_inf: spec.speed(params, self.model.constants.gravity, length),
                ..*params
            };
            values.push(evaluate_design(&self.model, &mesh, &p, &self.plan)?.forces.fx);
        }
        Ok(Evaluation {
            outcome: Outcome::Feasible(values),
            wall_time_s: 0.0,
        })
    }
}
