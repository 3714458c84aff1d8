use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankpursuit::dataio::UserGroup;
use rankpursuit::pursuit::Backfit;
use rankpursuit_harness::compare::{compare_methods, paired_errors, RecordMetric};
use rankpursuit_harness::config::{parse_methods, DatasetKind, ExperimentConfig, Method, Setting};
use rankpursuit_harness::experiment::{load_ratings, run_experiment_on, tune_cell, ExperimentOutput};
use rankpursuit_harness::methods::{fit, MethodSettings, Params, TrainData};
use rankpursuit_harness::model_io::{load_model, save_model};
use rankpursuit_harness::points::{partition, read_points, write_predictions};
use rankpursuit_harness::{HarnessError, Result, TableFormat};

#[derive(Parser)]
#[command(name = "rankpursuit", version, about = "Sparse kernel ranking pursuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model on a point file and save it as JSON.
    Fit(FitArgs),
    /// Score a point file with a saved model.
    Predict(PredictArgs),
    /// Run the per-user protocol and print the result table.
    Experiment(ExperimentArgs),
    /// Print the hyperparameters chosen on the holdout tasks of one repeat.
    Grid(ExperimentArgs),
    /// Wilcoxon signed-rank test between two methods' per-user errors.
    Compare(CompareArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    method: Method,
    /// Points as `group,item,score,features…`; empty score = unscored.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Basis count (pursuit) or regressor count (sparse RankRLS).
    #[arg(long)]
    max_basis: Option<usize>,
    #[arg(long, default_value_t = 2)]
    views: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file mirroring the experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated methods.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dataset: Option<DatasetKind>,
    #[arg(long)]
    data_path: Option<PathBuf>,
    #[arg(long)]
    group: Option<UserGroup>,
    #[arg(long, value_parser = parse_setting)]
    setting: Option<Setting>,
    #[arg(long)]
    beta: Option<f64>,
    /// Fixes the co-regularization grid to one value.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "pretty")]
    format: TableFormat,
}

#[derive(Args)]
struct CompareArgs {
    /// Per-user records written by `experiment --out`.
    records: PathBuf,
    /// Two comma-separated methods.
    #[arg(long)]
    method: String,
    #[arg(long)]
    group: Option<UserGroup>,
    #[arg(long, default_value = "disagreement", value_parser = parse_metric)]
    metric: RecordMetric,
}

fn parse_setting(s: &str) -> std::result::Result<Setting, String> {
    match s {
        "supervised" => Ok(Setting::Supervised),
        "semi_supervised" => Ok(Setting::SemiSupervised),
        _ => Err(format!("unknown setting {s:?}")),
    }
}

fn parse_metric(s: &str) -> std::result::Result<RecordMetric, String> {
    match s {
        "disagreement" => Ok(RecordMetric::Disagreement),
        "mse" => Ok(RecordMetric::Mse),
        _ => Err(format!("unknown metric {s:?}")),
    }
}

fn build_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if args.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(m) = &args.method {
        cfg.methods = parse_methods(m)?;
    }
    if let Some(d) = args.dataset {
        cfg.dataset = d;
    }
    if let Some(p) = &args.data_path {
        cfg.data_path = Some(p.clone());
    }
    if let Some(g) = args.group {
        cfg.groups = vec![g];
    }
    if let Some(s) = args.setting {
        cfg.setting = s;
    }
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    if let Some(nu) = args.nu {
        cfg.grids.nus = vec![nu];
    }
    if let Some(seed) = args.seed {
        cfg.task.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `<out>` with `suffix` appended to the file name.
fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let ratings = load_ratings(&cfg)?;
    let out: ExperimentOutput = run_experiment_on(&cfg, &ratings)?;
    for f in &out.failures {
        eprintln!("{} {} repeat {}: {} users failed", f.method, f.group, f.repeat, f.count);
    }
    match &args.out {
        Some(path) => {
            write_text(Some(path), &out.disagreement.emit(args.format))?;
            std::fs::write(sidecar(path, ".mse"), out.mse.emit(args.format))?;
            std::fs::write(sidecar(path, ".records.json"), serde_json::to_string(&out.records)?)?;
        }
        None => {
            if args.format == TableFormat::Pretty {
                println!("normalized disagreement");
                print!("{}", out.disagreement.to_pretty());
                println!("\nmean squared error");
                print!("{}", out.mse.to_pretty());
            } else {
                print!("{}", out.disagreement.to_csv());
            }
        }
    }
    Ok(())
}

fn grid(args: &ExperimentArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let ratings = load_ratings(&cfg)?;
    let mut all = Vec::new();
    for &group in &cfg.groups {
        all.extend(tune_cell(&cfg, &ratings, group, 0)?);
    }
    write_text(args.out.as_deref(), &(serde_json::to_string_pretty(&all)? + "\n"))
}

fn fit_cmd(args: &FitArgs) -> Result<()> {
    let points = read_points(BufReader::new(File::open(&args.dataset)?))?;
    let (scored, unscored) = partition(points)?;
    let data = TrainData {
        scored,
        unscored: (args.method == Method::SsRankingPursuit).then_some(unscored),
    };
    let params = Params {
        width: args.width,
        lambda: Some(args.lambda),
        nu: Some(args.nu),
        basis: args.max_basis.or((args.method == Method::SparseRankrls).then_some(data.scored.len())),
    };
    let settings = MethodSettings {
        beta: args.beta,
        n_views: args.views,
        backfit: Backfit::EveryStep,
    };
    let model = fit(args.method, &settings, &data, &params, args.seed)?;
    save_model(&model, &args.out)?;
    eprintln!("{}: {} nonzero coefficients", args.method, model.nonzero_count());
    Ok(())
}

fn predict_cmd(args: &PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let points = read_points(BufReader::new(File::open(&args.dataset)?))?;
    let predictions = model.predict(&points)?;
    match &args.out {
        Some(p) => write_predictions(&points, &predictions, File::create(p)?),
        None => write_predictions(&points, &predictions, io::stdout().lock()),
    }
}

fn compare_cmd(args: &CompareArgs) -> Result<()> {
    let methods = parse_methods(&args.method)?;
    let [a, b] = methods[..] else {
        return Err(HarnessError::Config("compare needs exactly two methods".into()));
    };
    let records: Vec<rankpursuit_harness::UserRecord> = serde_json::from_reader(BufReader::new(File::open(&args.records)?))
        .map_err(|e| HarnessError::Data(format!("{}: {e}", args.records.display())))?;
    let label = args.group.map(|g| g.label());
    let (xa, xb) = paired_errors(&records, a, b, label, args.metric);
    let c = compare_methods(&xa, &xb)?;
    println!("{a} vs {b}: n = {}, means {:.4} / {:.4}", c.n, c.mean_a, c.mean_b);
    println!(
        "W = {}, p = {:.6}{}, {}",
        c.statistic,
        c.p_value,
        if c.exact { " (exact)" } else { "" },
        if c.significant { "significant at 0.05" } else { "not significant at 0.05" }
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => fit_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::Grid(a) => grid(a),
        Command::Compare(a) => compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
