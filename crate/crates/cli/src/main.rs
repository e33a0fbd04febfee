//! `hols` — command-line driver for higher-order label spreading.
//!
//! Subcommands cover the full pipeline: `spread` labels a partially
//! labeled graph, `analyze` compares clique label configurations against
//! a shuffle null, `enumerate` counts or dumps k-cliques, and `bench`
//! runs declarative accuracy experiments from a TOML config.
//!
//! Exit codes: 0 on success, 1 on a runtime or experiment failure, 2 on
//! usage or input errors. All diagnostics go to stderr; stdout carries
//! only the requested results.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hols_core::eval::{
    load_dataset, run_experiment_on, sweep_alpha_on, sweep_max_clique_on, ExperimentConfig,
    ExperimentMode,
};
use hols_core::graph::{load_edge_list, load_labels, EdgeListOptions, Graph, LabelAssignment, VertexIdMap};
use hols_core::homogeneity::{
    homogeneity_report, observed_distribution, shuffled_distribution, DEFAULT_SHUFFLE_REPS,
};
use hols_core::motif::{collect_cliques, enumerate_cliques, DEFAULT_CLIQUE_SIZE_CAP};
use hols_core::participation::{CacheKey, MotifPlan, PropagationOperator};
use hols_core::solver::{harden, spread, SoftLabels, SolverConfig};

#[derive(Parser)]
#[command(
    name = "hols",
    version,
    about = "Higher-order label spreading over k-clique motifs",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spread the given seed labels over the graph and write a hardened
    /// labeling.
    Spread(SpreadArgs),
    /// Compare observed clique label configurations against a label-shuffle
    /// null model.
    Analyze(AnalyzeArgs),
    /// Count k-cliques, optionally dumping every occurrence.
    Enumerate(EnumerateArgs),
    /// Run a declarative experiment config: method comparison or a
    /// triangle-weight / clique-size sweep.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: optional single-token vertex declarations, then
    /// `u v` (or `u v weight`) lines; `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
    /// Read a third column as the edge weight.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args)]
struct LabelArgs {
    /// Seed-label file: `vertex class` lines.
    #[arg(long)]
    labels: PathBuf,
    /// Class ids in the label file start at 1 instead of 0.
    #[arg(long)]
    one_based: bool,
    /// Total class count, when the label file does not mention every class.
    #[arg(long)]
    classes: Option<usize>,
}

#[derive(Args)]
struct PlanArgs {
    /// Clique sizes of the motif plan, e.g. `2,3`.
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    motifs: Vec<usize>,
    /// Importance weight per motif, same order as --motifs; must sum to 1.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.5")]
    alpha: Vec<f64>,
}

#[derive(Args)]
struct SolverArgs {
    /// Retention weight η in (0, 1): higher trusts the graph more.
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Convergence threshold on the largest per-entry change.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

#[derive(Args)]
struct SpreadArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    labels: LabelArgs,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Largest clique size the enumerator will accept.
    #[arg(long, default_value_t = DEFAULT_CLIQUE_SIZE_CAP)]
    cap: usize,
    /// Reuse (or create) a binary cache of the combined motif adjacency.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Output file for the hardened `vertex class` lines.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV output of the full soft score matrix.
    #[arg(long)]
    soft_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    labels: LabelArgs,
    /// Clique size to tally.
    #[arg(short, default_value_t = 3)]
    k: usize,
    /// Largest clique size the enumerator will accept.
    #[arg(long, default_value_t = DEFAULT_CLIQUE_SIZE_CAP)]
    cap: usize,
    /// Number of label shuffles forming the null distribution.
    #[arg(long, default_value_t = DEFAULT_SHUFFLE_REPS)]
    reps: usize,
    /// RNG seed for the shuffles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON report including the graph digest and shuffle settings.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Clique size to enumerate.
    #[arg(short, default_value_t = 3)]
    k: usize,
    /// Largest clique size the enumerator will accept.
    #[arg(long, default_value_t = DEFAULT_CLIQUE_SIZE_CAP)]
    cap: usize,
    /// Dump each clique as `v1 … vk weight`, sorted, to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment description; relative data paths resolve against
    /// the config file's directory.
    #[arg(long)]
    config: PathBuf,
    /// Write the comparison report as JSON here instead of stdout.
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Write sweep-mode CSV output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep wall-clock timings in the JSON report (off by default so that
    /// reruns of the same seed are byte-identical).
    #[arg(long)]
    timings: bool,
}

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

/// A failed invocation, carrying the exit code the contract assigns it.
enum Failure {
    /// Bad flags, unreadable or malformed inputs: exit 2.
    Usage(String),
    /// The computation itself failed or produced failed runs: exit 1.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(err: E) -> Failure {
    Failure::Usage(err.to_string())
}

fn runtime<E: std::fmt::Display>(err: E) -> Failure {
    Failure::Runtime(err.to_string())
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits 2 on bad flags, 0 on --help/--version
    if cli.threads > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: --threads {}: {err}", cli.threads);
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Spread(args) => cmd_spread(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

// ---------------------------------------------------------------------------
// Shared loading helpers
// ---------------------------------------------------------------------------

fn read_graph(args: &GraphArgs) -> CliResult<(Graph, VertexIdMap)> {
    let file = File::open(&args.graph)
        .map_err(|e| usage(format!("{}: {e}", args.graph.display())))?;
    load_edge_list(BufReader::new(file), EdgeListOptions { weighted: args.weighted })
        .map_err(|e| usage(format!("{}: {e}", args.graph.display())))
}

fn read_labels(args: &LabelArgs, map: &VertexIdMap) -> CliResult<LabelAssignment> {
    let file = File::open(&args.labels)
        .map_err(|e| usage(format!("{}: {e}", args.labels.display())))?;
    load_labels(BufReader::new(file), map, args.classes, args.one_based)
        .map_err(|e| usage(format!("{}: {e}", args.labels.display())))
}

fn check_clique_size(k: usize, cap: usize) -> CliResult<()> {
    if !(2..=cap).contains(&k) {
        return Err(Failure::Usage(format!(
            "clique size {k} outside the supported range 2..={cap} \
             (raise --cap to allow larger motifs)"
        )));
    }
    Ok(())
}

fn build_plan(plan: &PlanArgs, cap: usize) -> CliResult<MotifPlan> {
    if plan.motifs.len() != plan.alpha.len() {
        return Err(Failure::Usage(format!(
            "--motifs lists {} sizes but --alpha lists {} weights",
            plan.motifs.len(),
            plan.alpha.len()
        )));
    }
    for &k in &plan.motifs {
        check_clique_size(k, cap)?;
    }
    MotifPlan::new(plan.motifs.iter().copied().zip(plan.alpha.iter().copied()).collect())
        .map_err(usage)
}

fn create_out(path: &Path) -> CliResult<BufWriter<File>> {
    let file =
        File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut out = create_out(path)?;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    writeln!(out, "{text}").map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    out.flush().map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// Loads the operator from the cache file when it matches the graph and
/// plan; otherwise builds it (and refreshes the cache when a path was
/// given). A stale or unreadable cache is reported and rebuilt, never
/// trusted.
fn obtain_operator(
    g: &Graph,
    plan: &MotifPlan,
    cache: Option<&Path>,
) -> CliResult<PropagationOperator> {
    let key = CacheKey::new(g, plan);
    if let Some(path) = cache {
        if path.exists() {
            let attempt = File::open(path)
                .map_err(hols_core::HolsError::from)
                .and_then(|mut f| PropagationOperator::read_cache(&mut f, &key));
            match attempt {
                Ok(op) => {
                    eprintln!("reusing cached operator from {}", path.display());
                    return Ok(op);
                }
                Err(err) => {
                    eprintln!("warning: rebuilding operator; cache {}: {err}", path.display());
                }
            }
        }
    }
    let op = PropagationOperator::build(g, plan).map_err(runtime)?;
    if let Some(path) = cache {
        let mut out = create_out(path)?;
        op.write_cache(&key, &mut out).map_err(runtime)?;
        out.flush().map_err(runtime)?;
        eprintln!("wrote operator cache to {}", path.display());
    }
    Ok(op)
}

// ---------------------------------------------------------------------------
// spread
// ---------------------------------------------------------------------------

fn cmd_spread(args: SpreadArgs) -> CliResult<()> {
    let (graph, map) = read_graph(&args.graph)?;
    let labels = read_labels(&args.labels, &map)?;
    if labels.num_labeled() == 0 {
        return Err(Failure::Usage(format!(
            "{}: no seed labels found",
            args.labels.labels.display()
        )));
    }
    let plan = build_plan(&args.plan, args.cap)?;
    let cfg = SolverConfig {
        eta: args.solver.eta,
        epsilon: args.solver.epsilon,
        max_iters: args.solver.max_iters,
    };
    cfg.validate().map_err(usage)?;

    let op = obtain_operator(&graph, &plan, args.cache.as_deref())?;
    let prior = SoftLabels::from_assignment(&labels);
    let result = spread(&op, &prior, &cfg, None).map_err(runtime)?;
    eprintln!(
        "spread over {} vertices with plan {}: {} iterations, residual {:.3e}{}",
        graph.num_vertices(),
        plan.describe(),
        result.iterations,
        result.final_residual,
        if result.converged { "" } else { " (not converged)" }
    );
    if !result.converged {
        eprintln!(
            "warning: iteration budget {} reached before the residual fell below {:.1e}",
            cfg.max_iters, cfg.epsilon
        );
    }

    let outcome = harden(&result.soft, Some(&labels)).map_err(runtime)?;
    if !outcome.tied.is_empty() {
        eprintln!("note: {} vertices had tied top scores (lowest class kept)", outcome.tied.len());
    }
    if !outcome.zero_rows.is_empty() {
        eprintln!(
            "note: {} vertices received no label mass (assigned class {})",
            outcome.zero_rows.len(),
            if args.labels.one_based { 1 } else { 0 }
        );
    }

    let mut out = create_out(&args.out)?;
    let shift = usize::from(args.labels.one_based);
    for v in 0..graph.num_vertices() {
        let class = outcome.labels.get(v as u32).expect("hardened labeling is total");
        writeln!(out, "{} {}", map.external(v as u32), class + shift)
            .map_err(|e| runtime(format!("{}: {e}", args.out.display())))?;
    }
    out.flush().map_err(|e| runtime(format!("{}: {e}", args.out.display())))?;

    if let Some(path) = &args.soft_out {
        let mut out = create_out(path)?;
        result.soft.write_csv(&map, &mut out).map_err(runtime)?;
        out.flush().map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let (graph, map) = read_graph(&args.graph)?;
    let labels = read_labels(&args.labels, &map)?;
    if !labels.is_total() {
        return Err(Failure::Usage(format!(
            "{}: {} of {} vertices are unlabeled; the configuration census needs a total labeling",
            args.labels.labels.display(),
            map.len() - labels.num_labeled(),
            map.len()
        )));
    }
    check_clique_size(args.k, args.cap)?;
    if args.reps == 0 {
        return Err(Failure::Usage("--reps must be at least 1".into()));
    }

    let observed = observed_distribution(&graph, &labels, args.k).map_err(runtime)?;
    let null =
        shuffled_distribution(&graph, &labels, args.k, args.reps, args.seed).map_err(runtime)?;
    let report = homogeneity_report(&observed, &null).map_err(runtime)?;
    eprintln!(
        "tallied {} {}-cliques against {} shuffles (seed {})",
        observed.total(),
        args.k,
        args.reps,
        args.seed
    );

    match &args.out {
        Some(path) => {
            let mut out = create_out(path)?;
            report.write_csv(&mut out).map_err(runtime)?;
            out.flush().map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            report.write_csv(&mut stdout.lock()).map_err(runtime)?;
        }
    }
    if let Some(path) = &args.json_out {
        write_json(path, &report.to_json(&graph.digest_hex(), args.reps, args.seed))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// enumerate
// ---------------------------------------------------------------------------

fn cmd_enumerate(args: EnumerateArgs) -> CliResult<()> {
    let (graph, map) = read_graph(&args.graph)?;
    check_clique_size(args.k, args.cap)?;

    let count = match &args.out {
        Some(path) => {
            let occurrences = collect_cliques(&graph, args.k).map_err(runtime)?;
            let mut rows: Vec<(Vec<u64>, f64)> = occurrences
                .into_iter()
                .map(|occ| {
                    let mut vertices: Vec<u64> =
                        occ.vertices.iter().map(|&v| map.external(v)).collect();
                    vertices.sort_unstable();
                    (vertices, occ.weight)
                })
                .collect();
            rows.sort_by(|a, b| a.0.cmp(&b.0));
            let count = rows.len() as u64;

            let mut out = create_out(path)?;
            for (vertices, weight) in rows {
                let ids: Vec<String> = vertices.iter().map(u64::to_string).collect();
                writeln!(out, "{} {weight}", ids.join(" "))
                    .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            }
            out.flush().map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            count
        }
        None => enumerate_cliques(&graph, args.k, |_, _| {}).map_err(runtime)?,
    };
    println!("{count}");
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    let mut cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;

    // Data paths in the config are relative to the config file.
    if let Some(dir) = args.config.parent() {
        for path in [&mut cfg.graph, &mut cfg.labels] {
            if Path::new(path.as_str()).is_relative() {
                *path = dir.join(path.as_str()).to_string_lossy().into_owned();
            }
        }
    }

    match cfg.mode {
        ExperimentMode::Compare => bench_compare(&args, &cfg),
        ExperimentMode::SweepAlpha | ExperimentMode::SweepClique => bench_sweep(&args, &cfg),
    }
}

fn bench_compare(args: &BenchArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let (graph, truth) = load_dataset(cfg).map_err(usage)?;
    let report = run_experiment_on(&graph, &truth, cfg).map_err(runtime)?;

    println!("{}", report.render_table());
    let json = report.to_json(args.timings);
    match &args.json_out {
        Some(path) => write_json(path, &json)?,
        None => println!("{}", serde_json::to_string_pretty(&json).expect("report serializes")),
    }

    let failed: usize = report
        .methods
        .iter()
        .flat_map(|m| &m.per_run)
        .filter(|r| r.error.is_some())
        .count();
    if failed > 0 {
        return Err(Failure::Runtime(format!(
            "{failed} method run(s) failed; see the report's per-run errors"
        )));
    }
    Ok(())
}

fn bench_sweep(args: &BenchArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let (graph, truth) = load_dataset(cfg).map_err(usage)?;

    let mut csv: Vec<u8> = Vec::new();
    let incomplete = match cfg.mode {
        ExperimentMode::SweepAlpha => {
            let sweep = sweep_alpha_on(&graph, &truth, cfg).map_err(runtime)?;
            sweep.write_csv(&mut csv).map_err(runtime)?;
            if let Some(best) = sweep.best() {
                eprintln!(
                    "best triangle weight {} with mean accuracy {}",
                    best.alpha,
                    best.mean_accuracy.map_or("n/a".into(), |m| format!("{m:.4}"))
                );
            }
            sweep.baseline_mean.is_none()
                || sweep.points.iter().any(|p| p.per_run.iter().any(Option::is_none))
        }
        ExperimentMode::SweepClique => {
            let sweep = sweep_max_clique_on(&graph, &truth, cfg).map_err(runtime)?;
            sweep.write_csv(&mut csv).map_err(runtime)?;
            sweep.pairs_mean.is_none()
                || sweep.points.iter().any(|p| p.mean_accuracy.is_none())
        }
        ExperimentMode::Compare => unreachable!("dispatched in cmd_bench"),
    };

    match &args.out {
        Some(path) => {
            let mut out = create_out(path)?;
            out.write_all(&csv).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            out.flush().map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            stdout
                .lock()
                .write_all(&csv)
                .map_err(|e| runtime(format!("writing to stdout: {e}")))?;
        }
    }

    if incomplete {
        return Err(Failure::Runtime(
            "some sweep runs failed; their grid points report empty accuracies".into(),
        ));
    }
    Ok(())
}
