//! The subcommands as library functions.

use std::fs;
use std::path::{Path, PathBuf};

use hullform_core::analyze::{pareto_svg, scatter_matrix_svg, sensitivity_report, SensitivityReport};
use hullform_core::doe::sobol_plan;
use hullform_core::fields::{force_relative_l1, ForceVector, RelativeL1};
use hullform_core::optimize::{
    multi_objective_run, pareto_front, Archive, Evaluation, EvaluationRecord, Evaluator, EvaluatorKind,
    LinearConstraint, ObjectiveSpec, OracleEvaluator, RunMetadata, SurrogateEvaluator,
};
use hullform_core::oracle::{case_forces, synth_case};
use hullform_core::rng::digest;
use hullform_core::surrogate::{evaluate_design, split_dataset, train, DatasetSplit, EpochRecord, SurrogateModel};
use hullform_core::{morph::apply_morph, DesignParams, FlowCase, Parameter};
use rayon::prelude::*;

use crate::archive_io::{load_archive, save_archive};
use crate::case_io::{read_case, write_case};
use crate::checkpoint::{encode_model, load_model, save_model, write_history};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::timing::Timed;

/// Conventional file locations inside a run directory.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset")
    }

    pub fn model_dir(&self) -> PathBuf {
        self.root.join("model")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.model_dir().join("model.ckpt")
    }

    pub fn explore_archive(&self) -> PathBuf {
        self.root.join("explore.jsonl")
    }

    pub fn optimize_archive(&self) -> PathBuf {
        self.root.join("optimize.jsonl")
    }

    pub fn figures(&self) -> PathBuf {
        self.root.join("figures")
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Make `dir` empty, refusing to clobber existing output unless `force`.
fn fresh_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !force {
            return Err(Error::Exists(dir.to_path_buf()));
        }
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    create_dir(dir)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_row<I, T>(w: &mut csv::Writer<fs::File>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn param_header() -> Vec<String> {
    Parameter::ALL.iter().map(|p| p.name().to_string()).collect()
}

fn param_row(p: &DesignParams) -> Vec<String> {
    p.to_array().iter().map(f64::to_string).collect()
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub cases: Vec<FlowCase>,
    pub split: DatasetSplit,
}

const SPLIT_NAMES: [&str; 3] = ["train", "validation", "test"];

fn split_of(split: &DatasetSplit, id: usize) -> &'static str {
    if split.train.contains(&id) {
        SPLIT_NAMES[0]
    } else if split.validation.contains(&id) {
        SPLIT_NAMES[1]
    } else {
        SPLIT_NAMES[2]
    }
}

fn case_file(id: usize) -> String {
    format!("case_{id:04}.hfc")
}

/// Simulate a Sobol plan of designs with the oracle and write the case
/// files, a manifest and the train/validation/test split.
pub fn gen_data(config: &RunConfig, dir: &Path, force: bool) -> Result<Dataset> {
    let space = config.parameters.space()?;
    let plan = sobol_plan(&space, config.dataset.cases, config.dataset.skip)?;
    let split = split_dataset(plan.len(), config.dataset.ratios()?, config.seed)?;
    let baseline = config.baseline_mesh()?;
    let morph = config.morph_config();
    let cases = plan
        .par_iter()
        .map(|p| Ok(synth_case(&apply_morph(&baseline, p, &morph)?, p, &config.oracle)))
        .collect::<hullform_core::Result<Vec<_>>>()?;
    fresh_dir(dir, force)?;
    let case_dir = dir.join("cases");
    create_dir(&case_dir)?;
    cases
        .par_iter()
        .enumerate()
        .try_for_each(|(i, c)| write_case(&case_dir.join(case_file(i)), c))?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv_writer(&manifest)?;
    let mut header = vec!["id".to_string(), "file".to_string()];
    header.extend(param_header());
    header.extend(["froude", "split"].map(String::from));
    csv_row(&mut w, &manifest, &header)?;
    for (i, c) in cases.iter().enumerate() {
        let mut row = vec![i.to_string(), format!("cases/{}", case_file(i))];
        row.extend(param_row(&c.params));
        row.push(c.froude().to_string());
        row.push(split_of(&split, i).to_string());
        csv_row(&mut w, &manifest, &row)?;
    }
    w.flush().map_err(|e| Error::io(&manifest, e))?;
    write(&dir.join("split.json"), serde_json::to_string_pretty(&split).expect("split serializes"))?;
    write(&dir.join("config.toml"), config.to_toml())?;
    log::info!("wrote {} cases to {}", cases.len(), dir.display());
    Ok(Dataset { cases, split })
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let split_path = dir.join("split.json");
    let text = fs::read_to_string(&split_path).map_err(|e| Error::io(&split_path, e))?;
    let split: DatasetSplit = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: split_path.clone(),
        line: source.line(),
        source,
    })?;
    let n = split.train.len() + split.validation.len() + split.test.len();
    let case_dir = dir.join("cases");
    let cases = (0..n)
        .into_par_iter()
        .map(|i| read_case(&case_dir.join(case_file(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { cases, split })
}

/// Table-1 style force errors on held-out cases.
#[derive(Debug, Clone)]
pub struct ForceMetrics {
    /// Total Force X, Y, Z; `None` when every true component was zero.
    pub components: [Option<RelativeL1>; 3],
    pub cases: usize,
}

pub const FORCE_LABELS: [&str; 3] = ["Total Force X", "Total Force Y", "Total Force Z"];

/// Components below this fraction of a case's largest true component are
/// treated as zero (the side force of a symmetric hull).
pub const ZERO_FORCE_FRACTION: f64 = 1e-6;

pub fn force_metrics(model: &SurrogateModel, cases: &[&FlowCase], config: &RunConfig) -> Result<ForceMetrics> {
    let pairs = cases
        .par_iter()
        .map(|c| {
            let pred = evaluate_design(model, &c.mesh, &c.params, &config.sampling)?.forces;
            Ok((pred, case_forces(c)?))
        })
        .collect::<hullform_core::Result<Vec<(ForceVector, ForceVector)>>>()?;
    let (pred, truth): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let [x, y, z] = force_relative_l1(&pred, &truth, ZERO_FORCE_FRACTION)?;
    Ok(ForceMetrics {
        components: [x.ok(), y.ok(), z.ok()],
        cases: cases.len(),
    })
}

pub fn write_metrics(path: &Path, metrics: &ForceMetrics) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, ["component", "mean_percent", "std_percent", "cases", "excluded"])?;
    for (label, m) in FORCE_LABELS.iter().zip(&metrics.components) {
        let row = match m {
            Some(r) => [
                label.to_string(),
                format!("{:.3}", r.mean),
                format!("{:.3}", r.std_dev),
                r.per_case.len().to_string(),
                r.excluded.to_string(),
            ],
            None => [label.to_string(), String::new(), String::new(), "0".into(), metrics.cases.to_string()],
        };
        csv_row(&mut w, path, row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: SurrogateModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub metrics: ForceMetrics,
}

/// Train on a dataset and write the checkpoint, loss history and test-split
/// force metrics into `out`.
pub fn train_model(config: &RunConfig, dataset: &Dataset, out: &Path, force: bool) -> Result<TrainReport> {
    let scaling = hullform_core::surrogate::FeatureScaling {
        v_ref: config.parameters.bounds()?.upper[Parameter::Speed.index()],
        bounds: config.parameters.bounds()?,
    };
    let outcome = train(&dataset.cases, &dataset.split, &config.train, scaling, &mut |r| {
        log::debug!("epoch {} train {:.5} val {:?}", r.epoch, r.train_loss, r.val_loss);
    })?;
    let test: Vec<&FlowCase> = dataset.split.test.iter().map(|&i| &dataset.cases[i]).collect();
    let metrics = force_metrics(&outcome.model, &test, config)?;
    fresh_dir(out, force)?;
    save_model(&out.join("model.ckpt"), &outcome.model)?;
    write_history(&out.join("history.csv"), &outcome.history)?;
    write_metrics(&out.join("metrics.csv"), &metrics)?;
    Ok(TrainReport {
        model: outcome.model,
        history: outcome.history,
        best_epoch: outcome.best_epoch,
        metrics,
    })
}

/// Either evaluator behind one concrete, clonable type.
#[derive(Debug, Clone)]
pub enum DesignEvaluator {
    Oracle(OracleEvaluator),
    Surrogate(SurrogateEvaluator),
}

impl Evaluator for DesignEvaluator {
    fn kind(&self) -> EvaluatorKind {
        match self {
            DesignEvaluator::Oracle(e) => e.kind(),
            DesignEvaluator::Surrogate(e) => e.kind(),
        }
    }

    fn objective_names(&self) -> Vec<String> {
        match self {
            DesignEvaluator::Oracle(e) => e.objective_names(),
            DesignEvaluator::Surrogate(e) => e.objective_names(),
        }
    }

    fn evaluate(&mut self, params: &DesignParams) -> hullform_core::Result<Evaluation> {
        match self {
            DesignEvaluator::Oracle(e) => e.evaluate(params),
            DesignEvaluator::Surrogate(e) => e.evaluate(params),
        }
    }
}

/// A timed evaluator and the hash identifying its configuration.
pub struct EvaluatorSetup {
    pub evaluator: Timed<DesignEvaluator>,
    pub config_hash: u64,
}

pub fn make_evaluator(
    config: &RunConfig,
    kind: EvaluatorKind,
    checkpoint: Option<&Path>,
    objectives: &[ObjectiveSpec],
) -> Result<EvaluatorSetup> {
    let baseline = config.baseline_mesh()?;
    let morph = config.morph_config();
    let (inner, model_digest) = match kind {
        EvaluatorKind::Oracle => (
            DesignEvaluator::Oracle(OracleEvaluator {
                baseline,
                morph,
                config: config.oracle.clone(),
                objectives: objectives.to_vec(),
            }),
            None,
        ),
        EvaluatorKind::Surrogate => {
            let path = checkpoint.ok_or_else(|| Error::Config("the surrogate evaluator needs a checkpoint".into()))?;
            let model = load_model(path)?;
            let d = digest(&encode_model(&model));
            (
                DesignEvaluator::Surrogate(SurrogateEvaluator {
                    model,
                    baseline,
                    morph,
                    plan: config.sampling,
                    objectives: objectives.to_vec(),
                }),
                Some(d),
            )
        }
    };
    Ok(EvaluatorSetup {
        evaluator: Timed { inner },
        config_hash: config.evaluation_hash(kind, objectives, model_digest),
    })
}

/// Open an archive for appending, or start a new one.
fn open_archive(path: &Path, metadata: RunMetadata) -> Result<Archive> {
    if !path.exists() {
        return Ok(Archive::new(metadata));
    }
    let archive = load_archive(path)?;
    let found = archive.metadata();
    if found.config_hash != metadata.config_hash {
        return Err(Error::ConfigMismatch {
            path: path.to_path_buf(),
            found: found.config_hash,
            expected: metadata.config_hash,
        });
    }
    if found.objective_names != metadata.objective_names {
        return Err(Error::Config(format!(
            "archive {} holds objectives {:?}, this run evaluates {:?}",
            path.display(),
            found.objective_names,
            metadata.objective_names
        )));
    }
    Ok(archive)
}

pub fn mean_wall_time(records: &[EvaluationRecord]) -> Option<f64> {
    (!records.is_empty()).then(|| records.iter().map(|r| r.wall_time_s).sum::<f64>() / records.len() as f64)
}

#[derive(Debug, Clone)]
pub struct ExploreReport {
    pub archive: Archive,
    /// Ids of designs that could not be evaluated, with the reasons.
    pub infeasible: Vec<(u64, Vec<String>)>,
}

/// Write the Sobol plan as CSV, evaluate every design and archive the
/// results in plan order.
pub fn explore(config: &RunConfig, setup: EvaluatorSetup, archive_path: &Path, force: bool) -> Result<ExploreReport> {
    if archive_path.exists() && !force {
        return Err(Error::Exists(archive_path.to_path_buf()));
    }
    let space = config.parameters.space()?;
    let plan = sobol_plan(&space, config.explore.samples, config.explore.skip)?;
    if let Some(dir) = archive_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let plan_path = archive_path.with_extension("plan.csv");
    let mut w = csv_writer(&plan_path)?;
    csv_row(&mut w, &plan_path, param_header())?;
    for p in &plan {
        csv_row(&mut w, &plan_path, param_row(p))?;
    }
    w.flush().map_err(|e| Error::io(&plan_path, e))?;

    let kind = setup.evaluator.kind();
    let metadata = RunMetadata::new(config.seed, space.bounds, setup.config_hash, setup.evaluator.objective_names());
    let evaluations = plan
        .par_iter()
        .map_init(|| setup.evaluator.clone(), |ev, p| ev.evaluate(p))
        .collect::<hullform_core::Result<Vec<_>>>()?;
    let mut archive = Archive::new(metadata);
    for (p, e) in plan.into_iter().zip(evaluations) {
        archive.append(p, e, kind)?;
    }
    save_archive(archive_path, &archive)?;
    let infeasible = archive
        .records()
        .iter()
        .filter(|r| !r.feasible)
        .map(|r| (r.id, r.violations.clone()))
        .collect();
    Ok(ExploreReport { archive, infeasible })
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub archive: Archive,
    pub best: Vec<EvaluationRecord>,
    pub front: Vec<EvaluationRecord>,
    /// Records added by this invocation.
    pub new_records: usize,
}

/// Weighted T-Search restarts, resuming from `archive_path` if it exists.
pub fn optimize(config: &RunConfig, setup: EvaluatorSetup, archive_path: &Path) -> Result<OptimizeReport> {
    let space = config.optimize_space()?;
    let x0 = config.optimize_start(&space)?;
    let mut evaluator = setup.evaluator;
    let metadata = RunMetadata::new(config.seed, space.bounds, setup.config_hash, evaluator.objective_names());
    let mut archive = open_archive(archive_path, metadata)?;
    let before = archive.len();
    let constraints: Vec<&dyn hullform_core::optimize::Constraint> = config
        .optimize
        .constraints
        .iter()
        .map(|c: &LinearConstraint| c as &dyn hullform_core::optimize::Constraint)
        .collect();
    let run = multi_objective_run(
        &mut evaluator,
        &space,
        &x0,
        &config.optimize.weight_sets(),
        &constraints,
        &config.tsearch,
        &mut archive,
    );
    // keep whatever was evaluated, even when the search failed
    save_archive(archive_path, &archive)?;
    let run = run?;
    Ok(OptimizeReport {
        new_records: archive.len() - before,
        archive,
        best: run.best,
        front: run.front,
    })
}

/// Pareto front of a two-objective archive: SVG figure and CSV listing.
pub fn pareto(archive_path: &Path, out_dir: &Path) -> Result<Vec<EvaluationRecord>> {
    let archive = load_archive(archive_path)?;
    let names = archive.metadata().objective_names.clone();
    let indices: Vec<usize> = (0..names.len()).collect();
    let front = pareto_front(archive.records(), &indices)?;
    create_dir(out_dir)?;
    write(&out_dir.join("pareto.svg"), pareto_svg(archive.records(), &front, &names)?)?;
    let path = out_dir.join("pareto_front.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["id".to_string()];
    header.extend(param_header());
    header.extend(names.iter().cloned());
    csv_row(&mut w, &path, &header)?;
    for r in &front {
        let mut row = vec![r.id.to_string()];
        row.extend(param_row(&r.params));
        row.extend(r.objectives.iter().map(f64::to_string));
        csv_row(&mut w, &path, &row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(front)
}

/// Correlation matrix CSV, full JSON report and scatter-matrix SVG.
pub fn sensitivity(archive_path: &Path, objective: usize, out_dir: &Path) -> Result<SensitivityReport> {
    let archive = load_archive(archive_path)?;
    let name = archive
        .metadata()
        .objective_names
        .get(objective)
        .cloned()
        .ok_or_else(|| Error::Config(format!("archive has no objective {objective}")))?;
    let report = sensitivity_report(archive.records(), objective, &name)?;
    create_dir(out_dir)?;
    let path = out_dir.join("sensitivity_r.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec![String::new()];
    header.extend(report.variables.iter().cloned());
    csv_row(&mut w, &path, &header)?;
    for (v, row) in report.variables.iter().zip(&report.correlation) {
        let mut r = vec![v.clone()];
        r.extend(row.iter().map(|x| format!("{x:.6}")));
        csv_row(&mut w, &path, &r)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write(
        &out_dir.join("sensitivity.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    write(
        &out_dir.join("scatter_matrix.svg"),
        scatter_matrix_svg(&report, archive.records(), objective)?,
    )?;
    Ok(report)
}

/// Figures and tables for every archive present in a run directory.
pub fn report(layout: &RunLayout) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let figures = layout.figures();
    let explore = layout.explore_archive();
    if explore.exists() {
        sensitivity(&explore, 0, &figures)?;
        written.extend(["sensitivity_r.csv", "sensitivity.json", "scatter_matrix.svg"].map(|f| figures.join(f)));
    }
    let opt = layout.optimize_archive();
    if opt.exists() {
        let archive = load_archive(&opt)?;
        if archive.metadata().objective_names.len() == 2 {
            pareto(&opt, &figures)?;
            written.extend(["pareto.svg", "pareto_front.csv"].map(|f| figures.join(f)));
        }
    }
    if written.is_empty() {
        return Err(Error::Missing(format!("no archives in {}", layout.root.display())));
    }
    Ok(written)
}
