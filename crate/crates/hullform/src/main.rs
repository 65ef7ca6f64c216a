use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hullform::pipeline::{self, RunLayout, FORCE_LABELS};
use hullform::{Error, Result, RunConfig};
use hullform_core::optimize::EvaluatorKind;

#[derive(Parser)]
#[command(name = "hullform", version, about = "Surrogate-driven hull-form optimization")]
struct Cli {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory; overrides `out_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,
    /// Print the default configuration and exit.
    #[arg(long)]
    print_default_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluatorArg {
    Surrogate,
    Oracle,
}

impl From<EvaluatorArg> for EvaluatorKind {
    fn from(a: EvaluatorArg) -> Self {
        match a {
            EvaluatorArg::Surrogate => EvaluatorKind::Surrogate,
            EvaluatorArg::Oracle => EvaluatorKind::Oracle,
        }
    }
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Evaluator; defaults to the configuration's.
    #[arg(long, value_enum)]
    evaluator: Option<EvaluatorArg>,
    /// Model checkpoint (default: <out>/model/model.ckpt).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Archive file (default in the run directory).
    #[arg(long)]
    archive: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the Sobol dataset with the analytic oracle.
    GenData,
    /// Train the surrogate and report test-split force errors.
    Train {
        /// Dataset directory (default: <out>/dataset).
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Evaluate a Sobol plan of designs into an archive.
    Explore(EvalArgs),
    /// Run weighted T-Search, resuming from the archive if present.
    Optimize(EvalArgs),
    /// Pareto front figure and table from an archive.
    Pareto {
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Correlation matrix, trend fits and scatter-matrix figure.
    Sensitivity {
        #[arg(long)]
        archive: Option<PathBuf>,
        /// Objective column to analyse.
        #[arg(long, default_value_t = 0)]
        objective: usize,
    },
    /// All figures and tables for the run directory.
    Report,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn setup(config: &RunConfig, layout: &RunLayout, args: &EvalArgs, explore: bool) -> Result<pipeline::EvaluatorSetup> {
    let kind = args.evaluator.map_or(config.evaluator, EvaluatorKind::from);
    let checkpoint = args.checkpoint.clone().unwrap_or_else(|| layout.checkpoint());
    let objectives = if explore {
        &config.explore.objectives
    } else {
        &config.optimize.objectives
    };
    pipeline::make_evaluator(config, kind, Some(&checkpoint), objectives)
}

fn print_timing(records: &[hullform_core::optimize::EvaluationRecord]) {
    if let Some(t) = pipeline::mean_wall_time(records) {
        println!("mean time per evaluation: {:.4} s over {} evaluations", t, records.len());
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.print_default_config {
        print!("{}", RunConfig::default().to_toml());
        return Ok(());
    }
    let config = load_config(&cli)?;
    let layout = RunLayout::new(&config.out_dir);
    let Some(command) = &cli.command else {
        return Err(Error::Config("no subcommand given (see --help)".into()));
    };
    match command {
        Command::GenData => {
            let ds = pipeline::gen_data(&config, &layout.dataset(), cli.force)?;
            println!(
                "{} cases in {} (train {}, validation {}, test {})",
                ds.cases.len(),
                layout.dataset().display(),
                ds.split.train.len(),
                ds.split.validation.len(),
                ds.split.test.len()
            );
        }
        Command::Train { dataset } => {
            let dir = dataset.clone().unwrap_or_else(|| layout.dataset());
            let ds = pipeline::load_dataset(&dir)?;
            let report = pipeline::train_model(&config, &ds, &layout.model_dir(), cli.force)?;
            println!("best epoch: {:?}", report.best_epoch);
            for (label, m) in FORCE_LABELS.iter().zip(&report.metrics.components) {
                match m {
                    Some(r) => println!("{label}: {:.3} ± {:.3} %", r.mean, r.std_dev),
                    None => println!("{label}: zero in every test case"),
                }
            }
        }
        Command::Explore(args) => {
            let s = setup(&config, &layout, args, true)?;
            let path = args.archive.clone().unwrap_or_else(|| layout.explore_archive());
            let report = pipeline::explore(&config, s, &path, cli.force)?;
            println!("{} designs archived in {}", report.archive.len(), path.display());
            for (id, why) in &report.infeasible {
                println!("infeasible design {id}: {}", why.join(", "));
            }
            print_timing(report.archive.records());
        }
        Command::Optimize(args) => {
            let s = setup(&config, &layout, args, false)?;
            let path = args.archive.clone().unwrap_or_else(|| layout.optimize_archive());
            let report = pipeline::optimize(&config, s, &path)?;
            println!("{} new evaluations, {} in {}", report.new_records, report.archive.len(), path.display());
            for r in &report.best {
                println!("best id {}: {:?} -> {:?}", r.id, r.params.to_array(), r.objectives);
            }
            println!("Pareto front: {} designs", report.front.len());
            let new = &report.archive.records()[report.archive.len() - report.new_records..];
            print_timing(new);
        }
        Command::Pareto { archive } => {
            let path = archive.clone().unwrap_or_else(|| layout.optimize_archive());
            let front = pipeline::pareto(&path, &layout.figures())?;
            println!("{} non-dominated designs; figure in {}", front.len(), layout.figures().display());
        }
        Command::Sensitivity { archive, objective } => {
            let path = archive.clone().unwrap_or_else(|| layout.explore_archive());
            let report = pipeline::sensitivity(&path, *objective, &layout.figures())?;
            for (name, r) in &report.ranking {
                println!("{name:>10}  r = {r:+.3}");
            }
        }
        Command::Report => {
            for p in pipeline::report(&layout)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
