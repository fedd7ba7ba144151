//! `fairdiv` command-line interface.
//!
//! Every command prints one JSON document on stdout and logs to stderr.
//! Exit codes: 0 success, 2 bad arguments or input data, 3 infeasible
//! constraints (or a solution that fails validation), 4 a solver budget was
//! exhausted or the instance is degenerate, 1 anything else.

mod failure;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use fairdiv::bench::{
    run_algorithm, run_sweep, write_records_csv, Algorithm, BaseConfig, DataSource, SolveParams, SweepAxis, SweepSpec,
};
use fairdiv::dataset::{derive_proportional_bounds, generate_blobs, load_csv, write_csv};
use fairdiv::geometry::DEFAULT_MAX_PAIRWISE_ITEMS;
use fairdiv::oracle::DEFAULT_ENUMERATION_BUDGET;
use fairdiv::scalable::{FloorPolicy, DEFAULT_EPSILON};
use fairdiv::{DatasetError, FairnessConstraints, GroupedDataset, MetricKind, Solution};

use failure::Failure;

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "Fair max-min diversification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select k diverse items under per-group bounds.
    Solve(SolveArgs),
    /// Run a parameter sweep and write one CSV row per trial.
    Bench(BenchArgs),
    /// Generate a synthetic blob dataset.
    Gen(GenArgs),
    /// Check constraints, and optionally a solution, against a dataset.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV input; without it, blobs are generated from --n, --groups and --seed.
    #[arg(long)]
    input: Option<PathBuf>,
    /// The CSV has a header row.
    #[arg(long)]
    header: bool,
    /// Group column: a header name, a 1-based index, or "last".
    #[arg(long, default_value = "last")]
    group_col: String,
    #[arg(long, default_value = "l2")]
    metric: MetricKind,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConstraintArgs {
    #[arg(long)]
    k: usize,
    /// Explicit per-group bounds "l1:h1,l2:h2,...".
    #[arg(long, conflicts_with = "alpha")]
    bounds: Option<String>,
    /// Proportional bounds with slack alpha (default 0.2).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// First item of the greedy pass.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Branch-and-bound node limit per feasibility query.
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long, default_value = "error")]
    floor_policy: FloorPolicy,
    /// Largest subset count the oracle may enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    max_subsets: u64,
    /// Largest n for which the exact solver builds all pairwise distances.
    #[arg(long, default_value_t = DEFAULT_MAX_PAIRWISE_ITEMS)]
    max_items: usize,
}

impl SolverArgs {
    fn params(&self) -> SolveParams {
        SolveParams {
            epsilon: self.epsilon,
            start: self.start,
            floor_policy: self.floor_policy,
            node_budget: self.node_budget,
            max_items: self.max_items,
            enumeration_budget: self.max_subsets,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "scalable")]
    algo: Algorithm,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    constraints: ConstraintArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "scalable")]
    algo: Algorithm,
    /// Swept parameter: k, epsilon, n or groups.
    #[arg(long)]
    axis: SweepAxis,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Destination of the per-trial CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "l2")]
    metric: MetricKind,
    /// Write a header row.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    constraints: ConstraintArgs,
    /// Solution JSON as printed by `solve`.
    #[arg(long)]
    solution: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Gen(args) => gen(args),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(value) => {
            print_json(&value);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            print_json(&failure.to_json());
            ExitCode::from(failure.code)
        }
    }
}

fn print_json(value: &serde_json::Value) {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = serde_json::to_writer_pretty(&mut lock, value);
    let _ = writeln!(lock);
}

fn load_data(args: &DataArgs) -> Result<(String, GroupedDataset), Failure> {
    match &args.input {
        Some(path) => {
            let ds = load_csv(path, &args.group_col, args.metric, args.header)?;
            eprintln!(
                "loaded {} items, {} groups from {}",
                ds.len(),
                ds.group_count(),
                path.display()
            );
            let name = path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
            Ok((name, ds))
        }
        None => {
            let ds = blobs(args.n, args.groups, args.seed, args.metric)?;
            eprintln!(
                "generated {} blob items in {} groups (seed {})",
                ds.len(),
                ds.group_count(),
                args.seed
            );
            Ok((format!("blobs-n{}-c{}", args.n, args.groups), ds))
        }
    }
}

fn blobs(n: usize, groups: usize, seed: u64, metric: MetricKind) -> Result<GroupedDataset, DatasetError> {
    let ds = generate_blobs(n, groups, seed)?;
    if metric == ds.metric() {
        return Ok(ds);
    }
    let rows = (0..ds.len()).map(|i| ds.features(i).to_vec()).collect();
    let groups = (0..ds.len()).map(|i| ds.group_of(i)).collect();
    GroupedDataset::with_labels(rows, groups, ds.group_labels().to_vec(), metric)
}

fn constraints(ds: &GroupedDataset, args: &ConstraintArgs) -> Result<FairnessConstraints, Failure> {
    Ok(match &args.bounds {
        Some(spec) => FairnessConstraints::parse(args.k, spec)?,
        None => derive_proportional_bounds(ds, args.k, args.alpha.unwrap_or(0.2))?,
    })
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    algorithm: Algorithm,
    k: usize,
    feasible: bool,
    #[serde(flatten)]
    solution: &'a Solution,
}

fn solve(args: SolveArgs) -> Result<serde_json::Value, Failure> {
    let (_, ds) = load_data(&args.data)?;
    let fc = constraints(&ds, &args.constraints)?;
    eprintln!("bounds {:?}, k = {}", fc.bounds, fc.k);
    let solution = run_algorithm(args.algo, &ds, fc.k, Some(&fc), &args.solver.params())?;
    let defects = solution.verify(&ds, Some(&fc));
    let feasible = defects.is_empty();
    if !feasible && args.algo != Algorithm::Gmm {
        return Err(Failure::internal(format!(
            "solution failed re-validation: {}",
            defects.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        )));
    }
    eprintln!(
        "{} selected {} items, diversity {}",
        args.algo,
        solution.selected.len(),
        solution.diversity
    );
    let output = SolveOutput {
        algorithm: args.algo,
        k: fc.k,
        feasible,
        solution: &solution,
    };
    Ok(serde_json::to_value(output).expect("solutions serialize"))
}

fn bench(args: BenchArgs) -> Result<serde_json::Value, Failure> {
    let source = match &args.data.input {
        Some(_) => {
            let (name, dataset) = load_data(&args.data)?;
            DataSource::Fixed { name, dataset }
        }
        None => {
            if args.data.metric != MetricKind::L2 {
                return Err(Failure::usage("synthetic sweeps use the l2 metric"));
            }
            DataSource::Blobs
        }
    };
    let bounds = match &args.bounds {
        Some(spec) => Some(FairnessConstraints::parse(args.k, spec)?.bounds),
        None => None,
    };
    let spec = SweepSpec {
        algorithm: args.algo,
        axis: args.axis,
        values: args.values,
        trials: args.trials,
        seed: args.data.seed,
        base: BaseConfig {
            n: args.data.n,
            groups: args.data.groups,
            k: args.k,
            epsilon: args.solver.epsilon,
            alpha: args.alpha,
            bounds,
            params: args.solver.params(),
        },
        source,
    };
    let report = run_sweep(&spec).map_err(|e| Failure::usage(e.to_string()))?;
    let file = File::create(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    write_records_csv(&report.records, BufWriter::new(file)).map_err(|e| Failure::usage(e.to_string()))?;
    let failed = report.records.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "wrote {} rows ({failed} failed) to {}",
        report.records.len(),
        args.out.display()
    );
    Ok(json!({
        "csv": args.out,
        "rows": report.records.len(),
        "failed_rows": failed,
        "summaries": report.summaries,
    }))
}

fn gen(args: GenArgs) -> Result<serde_json::Value, Failure> {
    let ds = blobs(args.n, args.groups, args.seed, args.metric)?;
    write_dataset(&ds, &args.out, args.header)?;
    eprintln!("wrote {} rows to {}", ds.len(), args.out.display());
    Ok(json!({ "path": args.out, "header": args.header, "meta": ds.meta() }))
}

fn write_dataset(ds: &GroupedDataset, path: &Path, header: bool) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(ds, &mut out, header).map_err(|e| Failure::usage(e.to_string()))?;
    out.flush().map_err(|e| Failure::io(path, e))
}

fn validate(args: ValidateArgs) -> Result<serde_json::Value, Failure> {
    let (_, ds) = load_data(&args.data)?;
    let fc = constraints(&ds, &args.constraints)?;
    let violations = fc.violations(&ds.group_sizes());
    let mut report = json!({
        "k": fc.k,
        "bounds": fc.bounds,
        "violations": violations,
    });
    let mut valid = violations.is_empty();
    if let Some(path) = &args.solution {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let solution: Solution = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: not a solution document: {e}", path.display())))?;
        let defects = solution.verify(&ds, Some(&fc));
        valid &= defects.is_empty();
        report["solution_defects"] = serde_json::to_value(defects).expect("defects serialize");
    }
    report["valid"] = json!(valid);
    if valid {
        Ok(report)
    } else {
        Err(Failure::invalid(report))
    }
}
