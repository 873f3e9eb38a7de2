#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use pamle::bo::{bo_mle, sigma2_beta, LimitReportBo, Truncation};
use pamle::experiments::{run_experiment, ExperimentConfig, RAW_FILE, SUMMARY_FILE};
use pamle::hpam::{gamma_mle, Denominator, HpamLimits};
use pamle::ingest::{ingest_records, parse_edges, read_labels_csv, LabelingRule};
use pamle::{BoDomain, Error, GrowthHistory, HpamParams, SimConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pamle",
    version,
    about = "Simulate and fit preferential attachment graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a growth history and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit a model to a history CSV and report the estimates as JSON.
    Fit(FitArgs),
    /// Limiting degree law and asymptotic quantities as JSON.
    Limits(LimitsArgs),
    /// Run a replication study described by a JSON config.
    Experiment(ExperimentArgs),
    /// Build a labeled history from a transaction CSV.
    Ingest(IngestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModel {
    Lcd,
    Bo,
    Hpam,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Bo,
    Hpam,
}

#[derive(Clone, Copy, ValueEnum)]
enum DenominatorArg {
    Exact,
    Scaled,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Exact => Denominator::Exact,
            DenominatorArg::Scaled => Denominator::Scaled,
        }
    }
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: SimModel,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Buckley-Osthus parameter (bo, general).
    #[arg(long)]
    a: Option<f64>,
    /// Degree exponent of the general model.
    #[arg(long)]
    delta: Option<f64>,
    /// Membership probabilities, comma separated (hpam).
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    /// Interaction matrix, row-major and comma separated (hpam).
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: FitModel,
    /// History CSV.
    #[arg(long)]
    input: PathBuf,
    /// Lower end of the BO search domain.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Upper end of the BO search domain.
    #[arg(long, default_value_t = 100.0)]
    max: f64,
    /// Number of communities; defaults to the largest label in the input.
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    denominator: DenominatorArg,
    /// Output JSON; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LimitsArgs {
    #[arg(long, value_enum)]
    model: FitModel,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Stop the p_k list once the remaining mass is below this.
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
    /// Longest p_k list to emit.
    #[arg(long, default_value_t = 10_000)]
    max_len: usize,
    /// Fixed-point tolerance (hpam).
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// Experiment JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output_path.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct IngestArgs {
    /// Transaction CSV with header receiver,sender,timestamp.
    #[arg(long)]
    input: PathBuf,
    /// Use only the first N records after filtering.
    #[arg(long)]
    n_limit: Option<usize>,
    /// Fraction of most active ids labeled as super nodes.
    #[arg(long, default_value_t = 0.05)]
    top_fraction: f64,
    /// Address prefixes to drop, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    blocklist: Vec<String>,
    /// CSV of id,community giving memberships instead of the activity rule.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Community count for --labels; defaults to the largest label.
    #[arg(long)]
    communities: Option<usize>,
    /// History CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Drop report JSON; standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    NonConvergence(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::Config { .. }
            | Error::SizeGuard(_) => Failure::Usage(msg),
            Error::Solver { .. } => Failure::NonConvergence(msg),
            Error::Io { .. } => Failure::Other(msg),
            _ => Failure::Data(msg),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Where human-readable lines go: standard output unless machine output
/// already occupies it.
struct Console {
    to_stdout: bool,
}

impl Console {
    fn for_output(out: &Option<PathBuf>) -> Self {
        Self {
            to_stdout: out.is_some(),
        }
    }

    fn line(&self, s: impl AsRef<str>) {
        if self.to_stdout {
            println!("{}", s.as_ref());
        } else {
            eprintln!("{}", s.as_ref());
        }
    }

    fn config<S: Serialize>(&self, value: &S) {
        let text = serde_json::to_string(value).expect("config serializes");
        self.line(format!("config: {text}"));
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| Failure::Other(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Other(format!("stdout: {e}"))),
    }
}

fn emit_json<S: Serialize>(out: &Option<PathBuf>, value: &S) -> CliResult {
    let mut text = serde_json::to_vec_pretty(value).expect("report serializes");
    text.push(b'\n');
    emit(out, &text)
}

fn open(path: &Path) -> CliResult<fs::File> {
    fs::File::open(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn require<T>(value: Option<T>, flag: &str, model: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --model {model}")))
}

fn hpam_params(pi: Option<Vec<f64>>, gamma: Option<Vec<f64>>) -> CliResult<HpamParams> {
    let pi = require(pi, "pi", "hpam")?;
    let gamma = require(gamma, "gamma", "hpam")?;
    if gamma.len() != pi.len() * pi.len() {
        return Err(Failure::Usage(format!(
            "--gamma has {} entries but --pi implies K = {} (expected {})",
            gamma.len(),
            pi.len(),
            pi.len() * pi.len()
        )));
    }
    Ok(HpamParams::new(pi, gamma)?)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let config = match args.model {
        SimModel::Lcd => SimConfig::lcd(args.n, args.seed),
        SimModel::Bo => SimConfig::bo(args.n, require(args.a, "a", "bo")?, args.seed),
        SimModel::General => SimConfig::general_f(
            args.n,
            require(args.a, "a", "general")?,
            require(args.delta, "delta", "general")?,
            args.seed,
        ),
        SimModel::Hpam => SimConfig::hpam(args.n, hpam_params(args.pi, args.gamma)?, args.seed),
    };
    config.validate()?;
    let console = Console::for_output(&args.out);
    console.config(&config);
    let history = config.simulate()?;
    let mut buf = Vec::new();
    history.write_csv(&mut buf)?;
    emit(&args.out, &buf)?;
    console.line(format!(
        "simulated {} nodes, max degree {}",
        history.len(),
        history.max_degree()
    ));
    Ok(())
}

fn read_history(path: &Path, communities: Option<usize>) -> CliResult<GrowthHistory> {
    Ok(GrowthHistory::read_csv(open(path)?, communities)?)
}

fn cmd_fit(args: FitArgs) -> CliResult {
    let console = Console::for_output(&args.out);
    let history = read_history(&args.input, args.communities)?;
    let n = history.len();
    match args.model {
        FitModel::Bo => {
            let domain = BoDomain::new(args.eps, args.max)?;
            console.config(
                &json!({"model": "bo", "input": args.input, "eps": args.eps, "max": args.max}),
            );
            let fit = bo_mle(&history.degree_counts(), domain)?;
            let (sigma2, beta) = sigma2_beta(fit.a_hat)?;
            let avar = sigma2 / (beta * beta);
            let report = json!({
                "model": "bo",
                "n": n,
                "a_hat": fit.a_hat,
                "loglik": fit.loglik,
                "iterations": fit.iterations,
                "converged": fit.converged,
                "boundary": fit.boundary,
                "avar": avar,
                "std_error": (avar / n as f64).sqrt(),
            });
            emit_json(&args.out, &report)?;
            console.line(format!(
                "a_hat = {:.6} (se {:.6}){}",
                fit.a_hat,
                (avar / n as f64).sqrt(),
                fit.boundary
                    .map_or(String::new(), |b| format!(", on the {b:?} boundary")
                        .to_lowercase())
            ));
            if !fit.converged {
                return Err(Failure::NonConvergence(
                    "the BO fit did not converge".into(),
                ));
            }
        }
        FitModel::Hpam => {
            if !history.is_labeled() {
                return Err(Failure::Data(
                    "the hpam fit needs membership labels in the input history".into(),
                ));
            }
            let mode: Denominator = args.denominator.into();
            let k = history.num_communities();
            console.config(&json!({"model": "hpam", "input": args.input, "communities": k, "denominator": mode}));
            let stats = history.community_stats()?;
            let fit = gamma_mle(&stats, &HpamParams::<f64>::uniform(k), mode)?;
            let mut report = serde_json::to_value(&fit).expect("fit serializes");
            report["model"] = json!("hpam");
            report["n"] = json!(n);
            emit_json(&args.out, &report)?;
            console.line(format!(
                "pi_hat = {:?}, gamma_hat = {:?}, converged = {}",
                fit.pi_hat, fit.gamma_hat, fit.converged
            ));
            if !fit.converged {
                return Err(Failure::NonConvergence(
                    "the gamma fit did not converge".into(),
                ));
            }
        }
    }
    Ok(())
}

fn cmd_limits(args: LimitsArgs) -> CliResult {
    let console = Console::for_output(&args.out);
    match args.model {
        FitModel::Bo => {
            let a0 = require(args.a0, "a0", "bo")?;
            if !(args.tail_tol >= 0.0) || args.max_len == 0 {
                return Err(Failure::Usage(
                    "--tail-tol must be >= 0 and --max-len > 0".into(),
                ));
            }
            let trunc = Truncation {
                tail_tol: args.tail_tol,
                max_len: args.max_len,
            };
            console.config(&json!({"model": "bo", "a0": a0, "truncation": trunc}));
            let report = LimitReportBo::compute(a0, trunc)?;
            emit_json(&args.out, &report)?;
            console.line(format!(
                "sigma2 = {:.10}, beta = {:.10}, avar = {:.10}",
                report.sigma2, report.beta, report.avar
            ));
        }
        FitModel::Hpam => {
            let params = hpam_params(args.pi, args.gamma)?;
            if !(args.tol > 0.0) {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            console.config(&json!({"model": "hpam", "params": params, "tol": args.tol}));
            let limits = HpamLimits::compute(&params, args.tol)?;
            emit_json(&args.out, &limits)?;
            console.line(format!(
                "p0 = {:?}, residual = {:e}",
                limits.p0, limits.residual
            ));
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(dir) = args.out_dir {
        config.output_path = dir;
    }
    println!(
        "config: {}",
        serde_json::to_string(&config).expect("config serializes")
    );
    let output = run_experiment(&config)?;
    fs::create_dir_all(&config.output_path)
        .map_err(|e| Failure::Other(format!("{}: {e}", config.output_path.display())))?;
    write_atomic(&config.output_path.join(RAW_FILE), &output.raw_csv()?)?;
    write_atomic(
        &config.output_path.join(SUMMARY_FILE),
        &output.summary_csv()?,
    )?;
    println!(
        "{:>8}  {:<10} {:>10} {:>10} {:>10} {:>6} {:>9}",
        "n", "parameter", "mean", "median", "std", "count", "excluded"
    );
    for row in &output.summary {
        println!(
            "{:>8}  {:<10} {:>10.4} {:>10.4} {:>10.4} {:>6} {:>9}",
            row.n, row.parameter, row.mean, row.median, row.std, row.count, row.excluded
        );
    }
    println!("wrote {}", config.output_path.display());
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> CliResult {
    let rule = match &args.labels {
        Some(path) => {
            let labels = read_labels_csv(open(path)?)?;
            let k = args
                .communities
                .unwrap_or_else(|| labels.values().copied().max().unwrap_or(1) as usize);
            LabelingRule::Explicit { labels, k }
        }
        None => LabelingRule::top_fraction(args.top_fraction)?,
    };
    let console = Console {
        to_stdout: args.report.is_some(),
    };
    console.config(&json!({
        "input": args.input,
        "n_limit": args.n_limit,
        "top_fraction": args.labels.is_none().then_some(args.top_fraction),
        "labels": args.labels,
        "blocklist": args.blocklist,
        "out": args.out,
    }));
    let edges = parse_edges(open(&args.input)?)?;
    let result = ingest_records(&edges, &args.blocklist, args.n_limit, &rule)?;
    let mut buf = Vec::new();
    result.history.write_csv(&mut buf)?;
    write_atomic(&args.out, &buf)?;
    emit_json(&args.report, &result.report)?;
    console.line(format!(
        "{} nodes from {} records ({} dropped as existing pairs, {} blocked)",
        result.report.nodes,
        result.report.records_used,
        result.report.dropped_existing_pair,
        result.report.dropped_blocked
    ));
    Ok(())
}

fn configure_threads() -> CliResult {
    if let Ok(v) = std::env::var("PA_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            Failure::Usage(format!("PA_THREADS must be a positive integer, got `{v}`"))
        })?;
        if n == 0 {
            return Err(Failure::Usage("PA_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Limits(a) => cmd_limits(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Ingest(a) => cmd_ingest(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Data(m) => (EXIT_DATA, m),
                Failure::NonConvergence(m) => (EXIT_CONVERGENCE, m),
                Failure::Other(m) => (1, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
