use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tbm::model_file::{LoadedModel, ModelFile};
use tbm::pipeline::{self, CompareConfig, Method};
use tbm::report::{write_bias_variance_csv, write_compare_csv, BiasVarianceSummary};
use tbm::{read_fimi, write_fimi, FimiOptions};
use tbm_core::baselines::{fit_full_bm, fit_rbm_pcd1, matched_hidden_units, RbmConfig};
use tbm_core::experiment::{synth_dataset, BiasVarianceConfig, SynthConfig};
use tbm_core::{fit, mine_parameter_domain, FitConfig, StepRule, TransactionDataset};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_ALL_REMOVED: u8 = 4;

#[derive(Parser)]
#[command(name = "tbm", version, about = "Transductive Boltzmann machines and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the parameter domain and print it, one pattern per line
    Mine(MineArgs),
    /// Fit a transductive Boltzmann machine
    FitTbm(FitArgs),
    /// Fit a fully visible Boltzmann machine over all of 2^V
    FitBm(FitArgs),
    /// Train an RBM with persistent CD-1
    FitRbm(RbmArgs),
    /// Evaluate a saved model on a dataset
    Eval(EvalArgs),
    /// Generate a synthetic dataset
    Synth(SynthArgs),
    /// Monte-Carlo bias-variance experiment
    Biasvar(BiasvarArgs),
    /// Compare TBM, BM and RBM on one dataset
    Compare(CompareArgs),
}

#[derive(Args)]
struct InputArgs {
    /// FIMI transaction file
    #[arg(long)]
    input: PathBuf,
    /// Count blank lines as empty transactions
    #[arg(long)]
    keep_empty: bool,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<TransactionDataset> {
        read_fimi(&self.input, FimiOptions { keep_empty: self.keep_empty })
            .with_context(|| format!("reading {}", self.input.display()))
    }
}

#[derive(Args)]
struct MiningArgs {
    /// Minimum support as a fraction of transactions
    #[arg(long)]
    sigma: f64,
    /// Largest pattern size
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    mining: MiningArgs,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Natural,
    Gradient,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    mining: MiningArgs,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 30.0)]
    theta_max: f64,
    #[arg(long, value_enum, default_value = "natural")]
    step: StepArg,
    /// Accepted for uniformity; the fit itself is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            epsilon: self.epsilon,
            tol: self.tol,
            max_iters: self.max_iters,
            theta_max: self.theta_max,
            step: match self.step {
                StepArg::Natural => StepRule::Natural,
                StepArg::Gradient => StepRule::Gradient,
            },
            ..FitConfig::default()
        }
    }
}

#[derive(Args)]
#[group(id = "size", required = true, multiple = false, args = ["hidden", "match_params"])]
struct RbmArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of hidden units
    #[arg(long)]
    hidden: Option<usize>,
    /// Pick the hidden layer to match this many TBM parameters
    #[arg(long)]
    match_params: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 1_000_000)]
    updates: usize,
    #[arg(long, default_value_t = 100)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    n_vars: usize,
    #[arg(long, default_value_t = 1000)]
    support_size: usize,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// FIMI output
    #[arg(long, default_value = "-")]
    out: String,
    /// JSON file receiving the generating support
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct BiasvarArgs {
    #[arg(long, default_value_t = 1000)]
    space_size: usize,
    #[arg(long, default_value_t = 50)]
    n_vars: usize,
    #[arg(long, default_value_t = 0.37)]
    sigma: f64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial CSV
    #[arg(long, default_value = "-")]
    out: String,
    /// Optional JSON summary; printed to stderr when absent
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    mining: MiningArgs,
    #[arg(long, value_delimiter = ',', default_value = "tbm,bm,rbm")]
    methods: Vec<Method>,
    /// RBM hidden units; matched to |B| when absent
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 1_000_000)]
    updates: usize,
    #[arg(long, default_value_t = 100)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value = "-")]
    out: String,
}

fn output(path: &str) -> anyhow::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).with_context(|| format!("creating {path}"))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_json(path: &str, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

struct AllRemoved;

fn mine(args: &MineArgs) -> anyhow::Result<()> {
    let d = args.input.load()?;
    let b = mine_parameter_domain(&d, args.mining.sigma, args.mining.k)?;
    let mut out = output(&args.out)?;
    let header = json!({
        "sigma": args.mining.sigma,
        "k": args.mining.k,
        "n": d.n_variables(),
        "N": d.total(),
        "|B|": b.len(),
    });
    writeln!(out, "{header}")?;
    for line in pipeline::lexicographic_lines(&b) {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn fit_tbm(args: &FitArgs) -> anyhow::Result<Option<AllRemoved>> {
    let d = args.input.load()?;
    let b = mine_parameter_domain(&d, args.mining.sigma, args.mining.k)?;
    let (m, report) = fit(&d, &b, &args.config())?;
    let mut out = output(&args.out)?;
    ModelFile::tbm(&m, d.n_variables(), &report).to_writer(&mut out)?;
    out.flush()?;
    Ok(report.all_removed.then_some(AllRemoved))
}

fn fit_bm(args: &FitArgs) -> anyhow::Result<Option<AllRemoved>> {
    let d = args.input.load()?;
    let b = mine_parameter_domain(&d, args.mining.sigma, args.mining.k)?;
    let (m, report) = fit_full_bm(&d, &b, &args.config())?;
    let mut out = output(&args.out)?;
    ModelFile::bm(&m, &report).to_writer(&mut out)?;
    out.flush()?;
    Ok(report.all_removed.then_some(AllRemoved))
}

fn fit_rbm(args: &RbmArgs) -> anyhow::Result<()> {
    let d = args.input.load()?;
    let hidden = match (args.hidden, args.match_params) {
        (Some(h), _) => h,
        (None, Some(b)) => matched_hidden_units(b, d.n_variables()),
        (None, None) => unreachable!("clap enforces the group"),
    };
    let cfg = RbmConfig { learning_rate: args.lr, updates: args.updates, chains: args.chains, seed: args.seed };
    let m = fit_rbm_pcd1(&d, hidden, &cfg)?;
    let mut out = output(&args.out)?;
    ModelFile::rbm(&m, &cfg).to_writer(&mut out)?;
    out.flush()?;
    Ok(())
}

fn eval(args: &EvalArgs) -> anyhow::Result<()> {
    let model: LoadedModel = ModelFile::read(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?
        .load()?;
    let d = args.input.load()?;
    let summary = pipeline::evaluate_model(&model, &d)?;
    write_json(&args.out, &summary)
}

fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig { n_vars: args.n_vars, support_size: args.support_size, n_samples: args.n, seed: args.seed };
    let (d, truth) = synth_dataset(&cfg)?;
    let mut out = output(&args.out)?;
    write_fimi(&d, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.truth {
        let support: Vec<&[u32]> = truth.iter().map(|x| x.items()).collect();
        let value = json!({
            "n_vars": args.n_vars,
            "support_size": args.support_size,
            "n": args.n,
            "seed": args.seed,
            "support": support,
        });
        write_json(&path.to_string_lossy(), &value)?;
    }
    Ok(())
}

fn biasvar(args: &BiasvarArgs) -> anyhow::Result<()> {
    let cfg = BiasVarianceConfig {
        space_size: args.space_size,
        n_vars: args.n_vars,
        sigma: args.sigma,
        k: args.k,
        n_samples: args.n,
        trials: args.trials,
        seed: args.seed,
        fit: FitConfig::default(),
    };
    let report = pipeline::bias_variance_parallel(&cfg)?;
    let mut out = output(&args.out)?;
    write_bias_variance_csv(&report, &mut out)?;
    out.flush()?;
    let summary = BiasVarianceSummary::from(&report);
    match &args.summary {
        Some(path) => write_json(&path.to_string_lossy(), &summary)?,
        None => eprintln!("{}", serde_json::to_string(&summary)?),
    }
    Ok(())
}

fn compare(args: &CompareArgs) -> anyhow::Result<()> {
    let d = args.input.load()?;
    let cfg = CompareConfig {
        sigma: args.mining.sigma,
        k: args.mining.k,
        fit: FitConfig::default(),
        rbm: RbmConfig { learning_rate: args.lr, updates: args.updates, chains: args.chains, seed: args.seed },
        hidden: args.hidden,
        methods: args.methods.clone(),
    };
    let rows = pipeline::compare(&d, &cfg)?;
    match args.format {
        Format::Csv => {
            let mut out = output(&args.out)?;
            write_compare_csv(&rows, &mut out)?;
            out.flush()?;
        }
        Format::Json => write_json(&args.out, &rows)?,
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<Option<AllRemoved>> {
    match &cli.command {
        Command::Mine(a) => mine(a).map(|_| None),
        Command::FitTbm(a) => fit_tbm(a),
        Command::FitBm(a) => fit_bm(a),
        Command::FitRbm(a) => fit_rbm(a).map(|_| None),
        Command::Eval(a) => eval(a).map(|_| None),
        Command::Synth(a) => synth(a).map(|_| None),
        Command::Biasvar(a) => biasvar(a).map(|_| None),
        Command::Compare(a) => compare(a).map(|_| None),
    }
}

/// Bad parameter values are usage errors; everything else is a data error.
fn exit_code(err: &anyhow::Error) -> u8 {
    use tbm_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::InvalidSigma(_) | E::InvalidOrder | E::InvalidConfig(_)) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(AllRemoved)) => {
            eprintln!("tbm: every parameter diverged and was removed; the model is uniform over S");
            ExitCode::from(EXIT_ALL_REMOVED)
        }
        Err(err) => {
            eprintln!("tbm: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
