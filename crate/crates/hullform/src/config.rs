//! Run configuration: one TOML file drives every subcommand.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hullform_core::doe::DesignSpace;
use hullform_core::optimize::{default_weight_sets, EvaluatorKind, LinearConstraint, ObjectiveSpec, TSearchConfig};
use hullform_core::oracle::{make_baseline_hull, OracleConfig};
use hullform_core::rng::digest;
use hullform_core::surrogate::{SamplingPlan, TrainConfig};
use hullform_core::{BaselineRatios, DesignBounds, DesignParams, HullMesh, MorphConfig, Parameter};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh_io::load_mesh;

/// Where the baseline hull comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaselineSource {
    /// The oracle's procedural hull.
    Procedural,
    /// An OBJ or STL file with its principal-dimension ratios.
    Mesh {
        path: PathBuf,
        length_over_beam: f64,
        beam_over_draught: f64,
    },
}

/// A parameter is either searched within a range or frozen, never both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ParameterSpec {
    Range { lower: f64, upper: f64 },
    Frozen { frozen: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub scale_x: ParameterSpec,
    #[serde(rename = "LbyB")]
    pub length_over_beam: ParameterSpec,
    #[serde(rename = "BbyT")]
    pub beam_over_draught: ParameterSpec,
    pub midship: ParameterSpec,
    pub v_inf: ParameterSpec,
}

impl Default for Parameters {
    fn default() -> Self {
        let b = DesignBounds::default();
        let r = |k: usize| ParameterSpec::Range {
            lower: b.lower[k],
            upper: b.upper[k],
        };
        Parameters {
            scale_x: r(0),
            length_over_beam: r(1),
            beam_over_draught: r(2),
            midship: r(3),
            v_inf: r(4),
        }
    }
}

impl Parameters {
    pub fn specs(&self) -> [ParameterSpec; 5] {
        [
            self.scale_x,
            self.length_over_beam,
            self.beam_over_draught,
            self.midship,
            self.v_inf,
        ]
    }

    /// Bounds of the free parameters; frozen ones keep the default range,
    /// widened to include the frozen value.
    pub fn bounds(&self) -> Result<DesignBounds> {
        let d = DesignBounds::default();
        let (mut lower, mut upper) = (d.lower, d.upper);
        for (k, s) in self.specs().iter().enumerate() {
            match *s {
                ParameterSpec::Range { lower: l, upper: u } => {
                    lower[k] = l;
                    upper[k] = u;
                }
                ParameterSpec::Frozen { frozen } => {
                    lower[k] = lower[k].min(frozen);
                    upper[k] = upper[k].max(frozen);
                }
            }
        }
        Ok(DesignBounds::new(lower, upper)?)
    }

    pub fn frozen(&self) -> Vec<(Parameter, f64)> {
        self.specs()
            .iter()
            .zip(Parameter::ALL)
            .filter_map(|(s, p)| match *s {
                ParameterSpec::Frozen { frozen } => Some((p, frozen)),
                ParameterSpec::Range { .. } => None,
            })
            .collect()
    }

    pub fn space(&self) -> Result<DesignSpace> {
        Ok(DesignSpace::new(self.bounds()?, self.frozen())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Number of Sobol designs simulated by `gen-data`.
    pub cases: usize,
    /// Leading Sobol points skipped (the first one is the all-zero corner).
    pub skip: u64,
    /// Train, validation and test shares; normalized before use.
    pub split: [f64; 3],
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            cases: 140,
            skip: 1,
            split: [120.0, 10.0, 10.0],
        }
    }
}

impl DatasetConfig {
    pub fn ratios(&self) -> Result<[f64; 3]> {
        let total: f64 = self.split.iter().sum();
        if !(total > 0.0) || self.split.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Config("dataset.split must be non-negative with a positive sum".into()));
        }
        Ok(self.split.map(|r| r / total))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    pub samples: usize,
    pub skip: u64,
    pub objectives: Vec<ObjectiveSpec>,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            samples: 128,
            skip: 1,
            objectives: vec![ObjectiveSpec::DesignSpeed],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub objectives: Vec<ObjectiveSpec>,
    /// Extra parameters frozen for the search only, by name.
    pub frozen: BTreeMap<String, f64>,
    /// Start point overrides by name; the rest start mid-range.
    pub start: BTreeMap<String, f64>,
    /// One T-Search per weight vector; empty means the defaults.
    pub weights: Vec<Vec<f64>>,
    pub constraints: Vec<LinearConstraint>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let r = BaselineRatios::default();
        OptimizeConfig {
            objectives: ObjectiveSpec::two_speed(),
            frozen: [
                ("scale_x".to_string(), 1.0),
                ("LbyB".to_string(), r.length_over_beam),
                ("BbyT".to_string(), r.beam_over_draught),
                ("v_inf".to_string(), 1.6),
            ]
            .into_iter()
            .collect(),
            start: BTreeMap::new(),
            weights: Vec::new(),
            constraints: Vec::new(),
        }
    }
}

impl OptimizeConfig {
    pub fn weight_sets(&self) -> Vec<Vec<f64>> {
        if !self.weights.is_empty() {
            self.weights.clone()
        } else if self.objectives.len() == 2 {
            default_weight_sets()
        } else {
            vec![vec![1.0; self.objectives.len()]]
        }
    }
}

fn parameter(name: &str) -> Result<Parameter> {
    Parameter::from_name(name).ok_or_else(|| Error::Config(format!("unknown parameter `{name}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Global seed; `--seed` also reseeds the oracle noise and training.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub evaluator: EvaluatorKind,
    pub baseline: BaselineSource,
    pub parameters: Parameters,
    pub morph: MorphSettings,
    pub oracle: OracleConfig,
    pub dataset: DatasetConfig,
    pub train: TrainConfig,
    pub sampling: SamplingPlan,
    pub explore: ExploreConfig,
    pub tsearch: TSearchConfig,
    pub optimize: OptimizeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphSettings {
    /// Shift-curve amplitude as a fraction of the baseline length.
    pub shift_amplitude: f64,
}

impl Default for MorphSettings {
    fn default() -> Self {
        MorphSettings {
            shift_amplitude: MorphConfig::default().shift_amplitude,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("run"),
            evaluator: EvaluatorKind::Surrogate,
            baseline: BaselineSource::Procedural,
            parameters: Parameters::default(),
            morph: MorphSettings::default(),
            oracle: OracleConfig::default(),
            dataset: DatasetConfig::default(),
            train: TrainConfig::default(),
            sampling: SamplingPlan::default(),
            explore: ExploreConfig::default(),
            tsearch: TSearchConfig::default(),
            optimize: OptimizeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| Error::Toml {
            path: path.to_path_buf(),
            source: Box::new(e),
        })?;
        // relative mesh paths are relative to the config file
        if let BaselineSource::Mesh { path: mesh, .. } = &mut config.baseline {
            if mesh.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh = dir.join(&*mesh);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Replace the global seed and every component seed derived from it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.oracle.seed = seed;
        self.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let BaselineSource::Mesh {
            path,
            length_over_beam,
            beam_over_draught,
        } = &self.baseline
        {
            if !path.exists() {
                return Err(Error::Config(format!("baseline mesh {} does not exist", path.display())));
            }
            if !(*length_over_beam > 0.0 && *beam_over_draught > 0.0) {
                return Err(Error::Config("baseline ratios must be positive".into()));
            }
        }
        for (s, p) in self.parameters.specs().iter().zip(Parameter::ALL) {
            match *s {
                ParameterSpec::Range { lower, upper } if !(lower < upper) => {
                    return Err(Error::Config(format!("{}: lower {lower} must be below upper {upper}", p.name())));
                }
                ParameterSpec::Frozen { frozen } if !frozen.is_finite() => {
                    return Err(Error::Config(format!("{}: frozen value must be finite", p.name())));
                }
                _ => {}
            }
        }
        self.parameters.space()?;
        self.oracle.validate()?;
        self.train.validate()?;
        self.tsearch.validate()?;
        self.dataset.ratios()?;
        if self.dataset.cases == 0 {
            return Err(Error::Config("dataset.cases must be at least 1".into()));
        }
        if !(self.morph.shift_amplitude >= 0.0) {
            return Err(Error::Config("morph.shift_amplitude must be non-negative".into()));
        }
        for (what, objectives) in [("explore", &self.explore.objectives), ("optimize", &self.optimize.objectives)] {
            if objectives.is_empty() {
                return Err(Error::Config(format!("{what}.objectives is empty")));
            }
            for o in objectives {
                if let ObjectiveSpec::Froude(f) = o {
                    if !(*f > 0.0) {
                        return Err(Error::Config(format!("{what}: Froude number must be positive, got {f}")));
                    }
                }
            }
        }
        for name in self.optimize.frozen.keys().chain(self.optimize.start.keys()) {
            parameter(name)?;
        }
        for w in self.optimize.weight_sets() {
            if w.len() != self.optimize.objectives.len() {
                return Err(Error::Config(format!(
                    "weight vector {w:?} does not match {} objectives",
                    self.optimize.objectives.len()
                )));
            }
        }
        Ok(())
    }

    pub fn baseline_mesh(&self) -> Result<HullMesh> {
        match &self.baseline {
            BaselineSource::Procedural => Ok(make_baseline_hull(&self.oracle)),
            BaselineSource::Mesh { path, .. } => load_mesh(path),
        }
    }

    pub fn baseline_ratios(&self) -> BaselineRatios {
        match &self.baseline {
            BaselineSource::Procedural => self.oracle.baseline_ratios(),
            BaselineSource::Mesh {
                length_over_beam,
                beam_over_draught,
                ..
            } => BaselineRatios {
                length_over_beam: *length_over_beam,
                beam_over_draught: *beam_over_draught,
            },
        }
    }

    pub fn morph_config(&self) -> MorphConfig {
        MorphConfig {
            baseline: self.baseline_ratios(),
            shift_amplitude: self.morph.shift_amplitude,
        }
    }

    /// Design space of the optimization: the configured space with the
    /// search-only frozen values applied.
    pub fn optimize_space(&self) -> Result<DesignSpace> {
        let mut frozen = self.parameters.frozen();
        for (name, &v) in &self.optimize.frozen {
            let p = parameter(name)?;
            frozen.retain(|(q, _)| *q != p);
            frozen.push((p, v));
        }
        let mut bounds = self.parameters.bounds()?;
        for &(p, v) in &frozen {
            let k = p.index();
            bounds.lower[k] = bounds.lower[k].min(v);
            bounds.upper[k] = bounds.upper[k].max(v);
        }
        Ok(DesignSpace::new(bounds, frozen)?)
    }

    /// Start point of the optimization.
    pub fn optimize_start(&self, space: &DesignSpace) -> Result<DesignParams> {
        let b = &space.bounds;
        let mut x: [f64; 5] = std::array::from_fn(|k| 0.5 * (b.lower[k] + b.upper[k]));
        for (name, &v) in &self.optimize.start {
            x[parameter(name)?.index()] = v;
        }
        for p in Parameter::ALL {
            if let Some(v) = space.frozen_value(p) {
                x[p.index()] = v;
            }
        }
        Ok(DesignParams::from_array(x))
    }

    /// Digest of everything that changes an evaluation's result.
    pub fn evaluation_hash(&self, evaluator: EvaluatorKind, objectives: &[ObjectiveSpec], model_digest: Option<u64>) -> u64 {
        #[derive(Serialize)]
        struct Key<'a> {
            evaluator: EvaluatorKind,
            baseline: &'a BaselineSource,
            morph: &'a MorphSettings,
            oracle: &'a OracleConfig,
            sampling: &'a SamplingPlan,
            objectives: &'a [ObjectiveSpec],
            model: Option<u64>,
        }
        let key = Key {
            evaluator,
            baseline: &self.baseline,
            morph: &self.morph,
            oracle: &self.oracle,
            sampling: &self.sampling,
            objectives,
            model: model_digest,
        };
        digest(serde_json::to_string(&key).expect("key serializes").as_bytes())
    }
}
