//! `antjoin` command line: generate query graphs, optimize join orders,
//! run benchmark sweeps, and emit SQL for a chosen order.
//!
//! Exit codes: 0 success, 1 domain or validation error, 2 usage error.
//! Every command is deterministic for fixed flags and seed; timing is
//! reported on stderr so stdout stays reproducible.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use antjoin::bench::{
    ant_count_sweep, emit_csv, emit_trace_csv, policy_summary, run_benchmark, Algorithm,
    AntPolicy, BenchConfig, BenchOutput, TraceRow,
};
use antjoin::{
    dp_optimal, exhaustive, greedy_nn, optimize, random_sample, simulated_annealing, AcoParams,
    JoinOrder, PlanCost, QueryGraph, SaParams, Topology, WorkloadSpec,
};

#[derive(Parser)]
#[command(name = "antjoin", version, about = "Join-order optimization with an ant colony system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random query-graph document
    Gen(GenArgs),
    /// Find a join order for a graph document and report its cost
    Optimize(OptimizeArgs),
    /// Run a benchmark config and write result CSVs
    Bench(BenchArgs),
    /// Emit a left-deep SQL skeleton for a join order
    Sql(SqlArgs),
}

/// Optional config file; flags override file values, file values override
/// defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CliConfig {
    workload: Option<WorkloadSpec>,
    aco: Option<AcoParams>,
    bench: Option<BenchConfig>,
}

fn load_config(path: Option<&Path>) -> Result<CliConfig> {
    match path {
        None => Ok(CliConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    tables: Option<usize>,
    #[arg(long)]
    topology: Option<Topology>,
    #[arg(long, env = "ANTJOIN_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    card_min: Option<u64>,
    #[arg(long)]
    card_max: Option<u64>,
    #[arg(long)]
    sel_min: Option<f64>,
    #[arg(long)]
    sel_max: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the document here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AcoFlags {
    #[arg(long)]
    ants: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    q0: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Batched parallel tour construction
    #[arg(long)]
    parallel: bool,
}

impl AcoFlags {
    fn apply(&self, mut params: AcoParams, seed: Option<u64>) -> AcoParams {
        if let Some(m) = self.ants {
            params.num_ants = Some(m);
        }
        if let Some(b) = self.beta {
            params.beta = b;
        }
        if let Some(r) = self.rho {
            params.rho = r;
        }
        if let Some(q) = self.q0 {
            params.q0 = q;
        }
        if let Some(i) = self.iterations {
            params.iterations = i;
        }
        if self.parallel {
            params.parallel = true;
        }
        if let Some(s) = seed {
            params.seed = s;
        }
        params
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// Graph document; stdin when omitted or `-`
    file: Option<PathBuf>,
    #[arg(long, default_value = "aco")]
    algo: Algorithm,
    #[command(flatten)]
    aco: AcoFlags,
    #[arg(long, env = "ANTJOIN_SEED")]
    seed: Option<u64>,
    /// Write the per-iteration convergence CSV here (aco only)
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here as well as stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark config file (JSON with a `bench` section)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    ant_policy: Option<AntPolicy>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, env = "ANTJOIN_SEED")]
    seed: Option<u64>,
    /// Force sequential cells for noise-free timing
    #[arg(long)]
    serial: bool,
    /// Override the results CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SqlArgs {
    /// Graph document; stdin when omitted or `-`
    file: Option<PathBuf>,
    /// Algorithm that picks the order (ignored with --order)
    #[arg(long, default_value = "aco")]
    algo: Algorithm,
    /// Explicit comma-separated table names, e.g. `A,B,C`
    #[arg(long)]
    order: Option<String>,
    #[command(flatten)]
    aco: AcoFlags,
    #[arg(long, env = "ANTJOIN_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sql(args) => cmd_sql(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_graph(file: Option<&Path>) -> Result<QueryGraph> {
    let text = match file {
        None => read_stdin()?,
        Some(p) if p.as_os_str() == "-" => read_stdin()?,
        Some(p) => {
            std::fs::read_to_string(p).with_context(|| format!("reading graph {}", p.display()))?
        }
    };
    QueryGraph::from_json(&text).map_err(|e| anyhow!("{e}"))
}

fn read_stdin() -> Result<String> {
    let mut buf = String::new();
    std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
    Ok(buf)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let mut spec = cfg.workload.unwrap_or_default();
    if let Some(n) = args.tables {
        spec.num_tables = n;
    }
    if let Some(t) = args.topology {
        spec.topology = t;
    }
    if let Some(c) = args.card_min {
        spec.card_min = c;
    }
    if let Some(c) = args.card_max {
        spec.card_max = c;
    }
    if let Some(s) = args.sel_min {
        spec.sel_min = s;
    }
    if let Some(s) = args.sel_max {
        spec.sel_max = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let g = antjoin::generate(&spec)?;
    write_or_print(args.out.as_deref(), &g.to_json())
}

struct AlgoRun {
    order: JoinOrder,
    cost: PlanCost,
    evaluations: u64,
    elapsed: Duration,
    trace: Vec<f64>,
}

fn run_algorithm(g: &QueryGraph, algo: Algorithm, params: &AcoParams) -> Result<AlgoRun> {
    let budget = params.ants_for(g.n()) as u64 * params.iterations as u64;
    let run = match algo {
        Algorithm::Aco => {
            let r = optimize(g, params)?;
            AlgoRun {
                order: r.best_order,
                cost: r.best_cost,
                evaluations: r.evaluations,
                elapsed: r.elapsed,
                trace: r.trace,
            }
        }
        Algorithm::Exhaustive => baseline_run(exhaustive(g)?),
        Algorithm::Dp => baseline_run(dp_optimal(g)?),
        Algorithm::Greedy => baseline_run(greedy_nn(g, 0)),
        Algorithm::Random => {
            let mut rng = antjoin::rng::stream(params.seed, &[]);
            baseline_run(random_sample(g, budget, &mut rng))
        }
        Algorithm::Sa => {
            let mut rng = antjoin::rng::stream(params.seed, &[]);
            let sa = SaParams { steps: budget as usize, ..Default::default() };
            baseline_run(simulated_annealing(g, &sa, &mut rng)?)
        }
    };
    Ok(run)
}

fn baseline_run(r: antjoin::BaselineResult) -> AlgoRun {
    AlgoRun {
        order: r.order,
        cost: r.cost,
        evaluations: r.evaluations,
        elapsed: r.elapsed,
        trace: Vec::new(),
    }
}

fn cmd_optimize(args: OptimizeArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let params = args.aco.apply(cfg.aco.unwrap_or_default(), args.seed);
    let g = read_graph(args.file.as_deref())?;
    let run = run_algorithm(&g, args.algo, &params)?;

    let mut report = String::new();
    report.push_str(&format!("algorithm: {}\n", args.algo));
    let names: Vec<&str> = run.order.as_slice().iter().map(|&t| g.name(t)).collect();
    report.push_str(&format!("order: {}\n", names.join(",")));
    for (k, step) in run.cost.steps.iter().enumerate() {
        let table = run.order.as_slice()[k + 1];
        report.push_str(&format!("step {}: join {} -> {}\n", k + 1, g.name(table), step));
    }
    report.push_str(&format!("total cost: {}\n", run.cost.total));
    report.push_str(&format!("evaluations: {}\n", run.evaluations));
    print!("{report}");
    if let Some(out) = args.out.as_deref() {
        std::fs::write(out, &report).with_context(|| format!("writing {}", out.display()))?;
    }
    eprintln!("elapsed: {:.3} ms", run.elapsed.as_secs_f64() * 1e3);

    if let Some(trace_path) = args.trace.as_deref() {
        if run.trace.is_empty() {
            eprintln!("note: --trace produces data only for --algo aco");
        } else {
            let rows: Vec<TraceRow> = run
                .trace
                .iter()
                .enumerate()
                .map(|(i, &b)| TraceRow { scenario: 0, run: 0, iteration: i, best_so_far: b })
                .collect();
            emit_trace_csv(&rows, trace_path)?;
        }
    }
    Ok(())
}

fn scenario_summaries(cfg: &BenchConfig, out: &BenchOutput) -> String {
    let mut text = String::new();
    for (i, spec) in cfg.scenarios.iter().enumerate() {
        let seeds: Vec<u64> = (0..cfg.runs)
            .map(|run| antjoin::rng::derive_seed(cfg.seed, &[i as u64, run as u64]))
            .collect();
        let rows: Vec<_> = out.records.iter().filter(|r| seeds.contains(&r.seed)).collect();
        let skipped = out.skips.iter().filter(|s| s.scenario == i).count();
        let best = rows.iter().map(|r| r.best_cost).fold(f64::INFINITY, f64::min);
        text.push_str(&format!(
            "scenario {i}: {} tables, {}, {} records, {} skipped, best cost {}\n",
            spec.num_tables,
            spec.topology,
            rows.len(),
            skipped,
            best
        ));
    }
    text
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg_file = load_config(Some(&args.config))?;
    let mut cfg = cfg_file
        .bench
        .ok_or_else(|| anyhow!("config {} has no bench section", args.config.display()))?;
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(p) = args.ant_policy {
        cfg.ant_policy = p;
    }
    if let Some(i) = args.iterations {
        cfg.aco.iterations = i;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.serial {
        cfg.serial = true;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }

    let out = run_benchmark(&cfg)?;
    for skip in &out.skips {
        eprintln!("warning: {}", skip.message);
    }
    let output = cfg.output.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
    emit_csv(&out.records, &output)?;
    print!("{}", scenario_summaries(&cfg, &out));
    println!("wrote {} records to {}", out.records.len(), output.display());
    if let Some(trace_path) = cfg.trace_output.as_deref() {
        emit_trace_csv(&out.traces, trace_path)?;
        println!("wrote {} trace rows to {}", out.traces.len(), trace_path.display());
    }

    if let Some(sweep_path) = cfg.sweep_output.clone() {
        let sweep = ant_count_sweep(&cfg)?;
        for skip in &sweep.skips {
            eprintln!("warning: {}", skip.message);
        }
        emit_csv(&sweep.records, &sweep_path)?;
        println!("wrote {} sweep records to {}", sweep.records.len(), sweep_path.display());
        for s in policy_summary(&sweep.records) {
            println!(
                "policy {}: mean best cost {} over {} cells, mean evaluations {}",
                s.policy, s.mean_best_cost, s.cells, s.mean_evaluations
            );
            eprintln!("policy {}: median elapsed {:.3} ms", s.policy, s.median_elapsed_ms);
        }
    }
    Ok(())
}

/// Left-deep SQL skeleton. Join predicates are `<left>.key = <right>.key`
/// placeholders - real key columns are schema knowledge this tool does not
/// have - and pairs without a join edge fall back to CROSS JOIN.
fn render_sql(g: &QueryGraph, order: &JoinOrder) -> String {
    let seq = order.as_slice();
    let mut sql = format!("SELECT *\nFROM {}", g.name(seq[0]));
    for k in 1..seq.len() {
        let next = seq[k];
        let predicates: Vec<String> = seq[..k]
            .iter()
            .filter(|&&p| g.adjacent(p, next))
            .map(|&p| format!("{}.key = {}.key", g.name(p), g.name(next)))
            .collect();
        if predicates.is_empty() {
            sql.push_str(&format!("\n  CROSS JOIN {}", g.name(next)));
        } else {
            sql.push_str(&format!(
                "\n  INNER JOIN {} ON {}",
                g.name(next),
                predicates.join(" AND ")
            ));
        }
    }
    sql.push_str(";\n");
    sql
}

fn cmd_sql(args: SqlArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let g = read_graph(args.file.as_deref())?;
    let order = match args.order.as_deref() {
        Some(names) => {
            let seq = names
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    g.table_named(name).ok_or_else(|| anyhow!("unknown table {name:?} in --order"))
                })
                .collect::<Result<Vec<_>>>()?;
            let order = JoinOrder::new(seq);
            order.validate(&g).map_err(|e| anyhow!("invalid --order: {e}"))?;
            order
        }
        None => {
            let params = args.aco.apply(cfg.aco.unwrap_or_default(), args.seed);
            run_algorithm(&g, args.algo, &params)?.order
        }
    };
    write_or_print(args.out.as_deref(), &render_sql(&g, &order))
}
