use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cphboost::analysis::{
    elimination_importance, forest_auc, gain_importance, individual_importance,
};
use cphboost::bench::{self, BenchConfig, Phase, SweepParameter};
use cphboost::data::{load_csv, CsvTable};
use cphboost::{fit_forest, format_probability, model_store, FitConfig};

/// Gradient-boosted decision trees for binary classification.
#[derive(Parser)]
#[command(name = "cphboost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a forest on a labelled CSV file and write the model as JSON.
    Fit(FitCmd),
    /// Write one signal probability per CSV row.
    Predict(PredictCmd),
    /// Report per-feature importance as CSV `feature,score`.
    #[command(long_about = IMPORTANCE_HELP)]
    Importance(ImportanceCmd),
    /// Time fit and apply while sweeping one parameter.
    Bench(BenchCmd),
}

const IMPORTANCE_HELP: &str = "\
Report per-feature importance as CSV `feature,score`.

gain: summed separation gain of every cut in --model.
individual: summed separation gain along the path of data row --row
  (0-based) through every tree of --model.
elimination: fit on a seeded half of --data and score AUC on the other
  half. A forest on all N features is fitted first; each round fits one
  forest per remaining feature with that feature left out, then removes the
  feature whose absence costs the most AUC and scores it by that drop. The
  forest without the removed feature is the next round's baseline, so the
  run costs 1 + N + (N-1) + ... + 2 = N(N+1)/2 fits. The last feature left
  scores its own AUC minus 0.5. Fit k uses seed --seed + k.";

#[derive(Args, Clone)]
struct FitFlags {
    /// Number of trees.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Depth of every tree.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Learning rate applied to each tree.
    #[arg(long, default_value_t = 0.1)]
    shrinkage: f64,
    /// Fraction of events drawn without replacement for each tree.
    #[arg(long, default_value_t = 0.5)]
    subsample: f64,
    /// Features are binned into 2^L bins.
    #[arg(long, default_value_t = 8)]
    binning_levels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FitFlags {
    fn config(&self) -> FitConfig {
        FitConfig {
            n_trees: self.trees,
            depth: self.depth,
            shrinkage: self.shrinkage,
            subsample: self.subsample,
            binning_levels: self.binning_levels,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct FitCmd {
    #[arg(long)]
    data: PathBuf,
    /// Label column; 1 is signal, 0 or -1 background.
    #[arg(long)]
    label: String,
    /// Optional per-event weight column.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    model_out: PathBuf,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
struct PredictCmd {
    #[arg(long)]
    model: PathBuf,
    /// CSV with a header containing every feature named in the model.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Gain,
    Individual,
    Elimination,
}

#[derive(Args)]
struct ImportanceCmd {
    #[arg(long, value_enum)]
    method: Method,
    /// Model for gain and individual.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column, for elimination.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    weight: Option<String>,
    /// Data row to explain, for individual.
    #[arg(long)]
    row: Option<usize>,
    /// Output CSV; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
struct BenchCmd {
    /// One of trees, depth, events, features, subsample.
    #[arg(long, value_parser = clap::value_parser!(SweepParameter))]
    sweep: SweepParameter,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Training events.
    #[arg(long, default_value_t = 50_000)]
    events: usize,
    #[arg(long, default_value_t = 10)]
    features: usize,
    /// Synthetic events used for the apply phase.
    #[arg(long, default_value_t = 50_000)]
    test_events: usize,
    /// Labelled CSV to use instead of synthetic data.
    #[arg(long, requires = "label")]
    data: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Record CSV; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn data(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

impl From<cphboost::Error> for Failure {
    fn from(e: cphboost::Error) -> Self {
        Failure::data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::data(e)
    }
}

type CmdResult = Result<(), Failure>;

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_path<T>(path: &Path, r: cphboost::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn cmd_fit(cmd: &FitCmd) -> CmdResult {
    let config = cmd.fit.config();
    config.validate().map_err(Failure::usage)?;
    let data = with_path(
        &cmd.data,
        load_csv(&cmd.data, &cmd.label, cmd.weight.as_deref()),
    )?;
    let forest = fit_forest(&data, &config)?;
    model_store::save(&forest, &cmd.model_out)?;
    println!("training AUC: {:.6}", forest_auc(&forest, &data)?);
    Ok(())
}

fn cmd_predict(cmd: &PredictCmd) -> CmdResult {
    if cmd.threads < 1 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let forest = with_path(&cmd.model, model_store::load(&cmd.model))?;
    let table = with_path(&cmd.data, CsvTable::read(&cmd.data))?;
    let values = table.matrix(forest.feature_names()).map_err(|e| {
        Failure::data(format!(
            "{}: data does not match the model's {} features: {e}",
            cmd.data.display(),
            forest.n_features()
        ))
    })?;
    let rows: Vec<&[f64]> = values.chunks_exact(forest.n_features()).collect();
    let p = forest.predict_batch(&rows, cmd.threads)?;
    let mut out = output(Some(&cmd.out))?;
    for v in p {
        writeln!(out, "{}", format_probability(v))?;
    }
    out.flush()?;
    Ok(())
}

fn write_scores(out: &mut dyn Write, names: &[String], scores: &[f64]) -> io::Result<()> {
    writeln!(out, "feature,score")?;
    for (name, s) in names.iter().zip(scores) {
        writeln!(out, "{name},{s}")?;
    }
    out.flush()
}

fn cmd_importance(cmd: &ImportanceCmd) -> CmdResult {
    let need = |what: Option<&PathBuf>, flag: &str| {
        what.cloned()
            .ok_or_else(|| Failure::usage(format!("this method needs {flag}")))
    };
    let (names, scores) = match cmd.method {
        Method::Gain => {
            let path = need(cmd.model.as_ref(), "--model")?;
            let forest = with_path(&path, model_store::load(&path))?;
            let report = gain_importance(&forest);
            (report.feature_names, report.scores)
        }
        Method::Individual => {
            let path = need(cmd.model.as_ref(), "--model")?;
            let data_path = need(cmd.data.as_ref(), "--data")?;
            let row = cmd
                .row
                .ok_or_else(|| Failure::usage("individual needs --row"))?;
            let forest = with_path(&path, model_store::load(&path))?;
            let table = with_path(&data_path, CsvTable::read(&data_path))?;
            let values = with_path(&data_path, table.matrix(forest.feature_names()))?;
            let d = forest.n_features();
            if row >= values.len() / d {
                return Err(Failure::data(format!(
                    "row {row} out of range; the data has {} rows",
                    values.len() / d
                )));
            }
            let scores = individual_importance(&forest, &values[row * d..(row + 1) * d])?;
            (forest.feature_names().to_vec(), scores)
        }
        Method::Elimination => {
            let data_path = need(cmd.data.as_ref(), "--data")?;
            let label = cmd
                .label
                .as_deref()
                .ok_or_else(|| Failure::usage("elimination needs --label"))?;
            let config = cmd.fit.config();
            config.validate().map_err(Failure::usage)?;
            let data = with_path(
                &data_path,
                load_csv(&data_path, label, cmd.weight.as_deref()),
            )?;
            if data.n_features() < 2 {
                return Err(Failure::usage("elimination needs at least two features"));
            }
            let report = elimination_importance(&data, &config)?;
            if let Some(trace) = &report.elimination {
                let order: Vec<&str> = trace
                    .removal_order
                    .iter()
                    .map(|&f| report.feature_names[f].as_str())
                    .collect();
                eprintln!(
                    "elimination: {} fits, removal order {}",
                    trace.fits,
                    order.join(" ")
                );
            }
            (report.feature_names, report.scores)
        }
    };
    let mut out = output(cmd.out.as_deref())?;
    write_scores(&mut out, &names, &scores)?;
    Ok(())
}

fn cmd_bench(cmd: &BenchCmd) -> CmdResult {
    let config = BenchConfig {
        sweep: cmd.sweep,
        values: cmd.values.clone(),
        repeats: cmd.repeats,
        fit: cmd.fit.config(),
        n_events: cmd.events,
        n_features: cmd.features,
        n_test_events: cmd.test_events,
    };
    if config.repeats < 1 {
        return Err(Failure::usage("--repeats must be at least 1"));
    }
    let data = match (&cmd.data, &cmd.label) {
        (Some(path), Some(label)) => Some(with_path(path, load_csv(path, label, None))?),
        _ => None,
    };
    let records = bench::run_bench(&config, data.as_ref()).map_err(|e| match e {
        cphboost::Error::InvalidArgument(_) => Failure::usage(e),
        e => Failure::data(e),
    })?;
    let mut out = output(cmd.out.as_deref())?;
    bench::write_records(&records, &mut out)?;
    out.flush()?;
    drop(out);
    println!("phase,slope,intercept,r_squared");
    for phase in [Phase::Fit, Phase::Apply] {
        match bench::regression(&records, phase) {
            Ok(fit) => println!(
                "{},{:e},{:e},{:.6}",
                phase.name(),
                fit.slope,
                fit.intercept,
                fit.r_squared
            ),
            Err(e) => eprintln!("{}: no regression: {e}", phase.name()),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(c) => cmd_fit(c),
        Command::Predict(c) => cmd_predict(c),
        Command::Importance(c) => cmd_importance(c),
        Command::Bench(c) => cmd_bench(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
