use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otood_core::baselines::{DEFAULT_K, DEFAULT_SHRINKAGE};
use otood_core::io::{
    format_scores, read_features, read_labels, read_scores, write_features, write_labels,
    write_score_rows, ScoreRow,
};
use otood_core::oracle::{brute_force_plan, ORACLE_MAX_SIDE};
use otood_core::ot::sinkhorn_weights;
use otood_core::pipeline::{baseline_scores, metrics_for, run_pipeline, BaselineMethod, PipelineScores};
use otood_core::{
    gen_synthetic, CostMatrix, LogDomain, MetricsReport, OtError, RunConfig, SinkhornConfig,
    SynthConfig, TprOn,
};

const THREADS_VAR: &str = "OTOOD_THREADS";

#[derive(Parser)]
#[command(
    name = "otood",
    version,
    about = "Out-of-distribution scores from entropic optimal transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score test features against training features.
    Score(ScoreArgs),
    /// Detection metrics for a score file.
    Eval(EvalArgs),
    /// Score with a k-nearest-neighbour or Mahalanobis baseline.
    Baseline(BaselineArgs),
    /// Write a seeded synthetic train/test/labels fixture.
    Synth(SynthArgs),
    /// Brute-force a tiny transport problem and compare with Sinkhorn.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum TprArg {
    Ood,
    Id,
}

impl From<TprArg> for TprOn {
    fn from(t: TprArg) -> Self {
        match t {
            TprArg::Ood => TprOn::Ood,
            TprArg::Id => TprOn::Id,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Entropic regularization coefficient.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    lambda: f64,
    /// L1 tolerance on the plan marginals.
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = DomainArg::Auto)]
    log_domain: DomainArg,
}

impl SolverArgs {
    fn config(&self) -> SinkhornConfig {
        SinkhornConfig {
            lambda: self.lambda,
            tol: self.tol,
            max_iter: self.max_iter,
            log_domain: match self.log_domain {
                DomainArg::Auto => LogDomain::Auto,
                DomainArg::On => LogDomain::On,
                DomainArg::Off => LogDomain::Off,
            },
            ..SinkhornConfig::default()
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// One 0 (ID) or 1 (OOD) per test row; prints metrics when given.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Test inputs per transport problem [default: all at once].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Shuffle test rows with this seed before batching.
    #[arg(long, value_name = "SEED")]
    shuffle: Option<u64>,
    /// Require unit-norm rows instead of normalizing them.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, value_enum, default_value_t = TprArg::Ood)]
    tpr_on: TprArg,
    /// Score CSV path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Score CSV with header index,score,converged.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_enum, default_value_t = TprArg::Ood)]
    tpr_on: TprArg,
    /// Also write the metrics as a CSV row.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Knn,
    Mahalanobis,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Neighbour rank for knn.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Covariance shrinkage for mahalanobis.
    #[arg(long, default_value_t = DEFAULT_SHRINKAGE)]
    shrinkage: f64,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, value_enum, default_value_t = TprArg::Ood)]
    tpr_on: TprArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Feat,
    Csv,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for train, test and labels files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    n_train: usize,
    #[arg(long, default_value_t = 250)]
    n_id: usize,
    #[arg(long, default_value_t = 250)]
    n_ood: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    /// Cosine distance between the ID and OOD centers.
    #[arg(long, default_value_t = 1.5)]
    separation: f64,
    #[arg(long, default_value_t = 10)]
    n_classes: usize,
    #[arg(long, default_value_t = 1.0)]
    class_spread: f64,
    #[arg(long, default_value_t = 0.25)]
    spread: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Feat)]
    format: FormatArg,
}

#[derive(Args)]
struct OracleArgs {
    /// Cost rows separated by ';', entries by ',' (e.g. "0,1;1,0").
    #[arg(long)]
    cost: String,
    /// Row weights [default: uniform].
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Column weights [default: uniform].
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// 0 solves the unregularized problem.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn exit_code(e: &OtError) -> u8 {
    match e {
        OtError::Stability(_) | OtError::Degenerate(_) | OtError::Singular(_) => 3,
        OtError::MetricUndefined(_) => 4,
        OtError::Config(_) | OtError::Data(_) | OtError::Format(_) | OtError::Io { .. } => 2,
    }
}

fn init_threads() -> Result<(), OtError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| OtError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| OtError::Config(format!("cannot size thread pool: {e}")))
}

fn emit_scores(rows: &[ScoreRow], out: Option<&Path>) -> Result<(), OtError> {
    match out {
        Some(path) => write_score_rows(path, rows),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(format_scores(rows).as_bytes())
                .map_err(|e| OtError::Data(format!("stdout: {e}")))
        }
    }
}

fn warn_unconverged(scores: &PipelineScores) {
    for (k, batch) in scores.unconverged_batches() {
        eprintln!(
            "warning: batch {k} ({} inputs) did not converge: marginal error {:.3e} after {} iterations",
            batch.members.len(),
            batch.diag.marginal_violation,
            batch.diag.iterations
        );
    }
}

fn score(args: ScoreArgs) -> Result<(), OtError> {
    let cfg = RunConfig {
        sinkhorn: args.solver.config(),
        batch_size: args.batch_size,
        normalize: !args.no_normalize,
        shuffle: args.shuffle.is_some(),
        seed: args.shuffle.unwrap_or(0),
        tpr_on: args.tpr_on.into(),
    };
    let output = run_pipeline(&cfg, &args.train, &args.test, args.labels.as_deref())?;
    warn_unconverged(&output.scores);
    emit_scores(&output.scores.rows(), args.out.as_deref())?;
    if let Some(metrics) = output.metrics {
        eprintln!("{metrics}");
    }
    Ok(())
}

fn write_metrics(metrics: &MetricsReport, out: Option<&Path>) -> Result<(), OtError> {
    println!("{metrics}");
    if let Some(path) = out {
        let text = format!("{}\n{}\n", MetricsReport::CSV_HEADER, metrics.csv_row());
        std::fs::write(path, text)
            .map_err(|e| OtError::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), OtError> {
    let rows = read_scores(&args.scores)?;
    let labels = read_labels(&args.labels)?;
    if rows.iter().enumerate().any(|(k, r)| r.index != k) {
        return Err(OtError::Format(format!(
            "{}: rows must be indexed 0, 1, 2, ... in order",
            args.scores.display()
        )));
    }
    if rows.iter().any(|r| !r.converged) {
        eprintln!("warning: some scores come from unconverged plans");
    }
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let metrics = metrics_for(&scores, &labels, args.tpr_on.into())?;
    write_metrics(&metrics, args.out.as_deref())
}

fn baseline(args: BaselineArgs) -> Result<(), OtError> {
    let train = read_features(&args.train, !args.no_normalize)?;
    let test = read_features(&args.test, !args.no_normalize)?;
    let method = match args.method {
        MethodArg::Knn => BaselineMethod::Knn { k: args.k },
        MethodArg::Mahalanobis => BaselineMethod::Mahalanobis {
            shrinkage: args.shrinkage,
        },
    };
    let scores = baseline_scores(method, &train, &test)?;
    let labels = args.labels.as_deref().map(read_labels).transpose()?;
    let rows: Vec<ScoreRow> = scores
        .iter()
        .enumerate()
        .map(|(index, &score)| ScoreRow {
            index,
            score,
            converged: true,
        })
        .collect();
    emit_scores(&rows, args.out.as_deref())?;
    if let Some(labels) = labels {
        eprintln!("{}", metrics_for(&scores, &labels, args.tpr_on.into())?);
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), OtError> {
    let fixture = gen_synthetic(&SynthConfig {
        n_train: args.n_train,
        n_id: args.n_id,
        n_ood: args.n_ood,
        dim: args.dim,
        separation: args.separation,
        n_classes: args.n_classes,
        class_spread: args.class_spread,
        spread: args.spread,
        seed: args.seed,
    })?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| OtError::Data(format!("{}: {e}", args.out.display())))?;
    let ext = match args.format {
        FormatArg::Feat => "feat",
        FormatArg::Csv => "csv",
    };
    for (name, m) in [("train", &fixture.train), ("test", &fixture.test)] {
        match m {
            Some(m) => write_features(args.out.join(format!("{name}.{ext}")), m)?,
            None => eprintln!("warning: no {name} rows requested, {name}.{ext} not written"),
        }
    }
    write_labels(args.out.join("labels.txt"), &fixture.labels)?;
    println!(
        "wrote {} train, {} test rows (d = {}) to {}",
        args.n_train,
        fixture.labels.len(),
        args.dim,
        args.out.display()
    );
    Ok(())
}

fn parse_cost(text: &str) -> Result<CostMatrix, OtError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| OtError::Config(format!("cannot parse cost entry '{}'", x.trim())))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    CostMatrix::from_rows(&rows)
}

fn print_plan(label: &str, data: &[f64], m: usize) {
    println!("{label}:");
    for row in data.chunks(m) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.9}")).collect();
        println!("  {}", cells.join("  "));
    }
}

fn oracle(args: OracleArgs) -> Result<(), OtError> {
    let cost = parse_cost(&args.cost)?;
    let (n, m) = (cost.n_rows(), cost.n_cols());
    if n > ORACLE_MAX_SIDE || m > ORACLE_MAX_SIDE {
        return Err(OtError::Config(format!(
            "oracle handles at most {ORACLE_MAX_SIDE}x{ORACLE_MAX_SIDE}, got {n}x{m}"
        )));
    }
    let a = args.a.unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let b = args.b.unwrap_or_else(|| vec![1.0 / m as f64; m]);
    let exact = brute_force_plan(&a, &b, &cost, args.lambda)?;
    print_plan("oracle plan", &exact.data, m);
    println!("oracle objective: {:.12}", exact.objective);
    if args.lambda > 0.0 {
        let cfg = SinkhornConfig {
            lambda: args.lambda,
            tol: args.tol,
            ..SinkhornConfig::default()
        };
        let plan = sinkhorn_weights(&a, &b, &cost, &cfg, None)?;
        print_plan("sinkhorn plan", plan.as_slice(), m);
        let gap = plan
            .as_slice()
            .iter()
            .zip(&exact.data)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        println!(
            "max entry gap: {gap:.3e} (sinkhorn {} after {} iterations)",
            if plan.converged { "converged" } else { "did not converge" },
            plan.iterations
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a),
        Command::Baseline(a) => baseline(a),
        Command::Synth(a) => synth(a),
        Command::Oracle(a) => oracle(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("otood: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
