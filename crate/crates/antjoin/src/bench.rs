//! Experiment harness: scenario sweeps, repeated seeded runs, algorithm
//! comparison, ant-count sweep, CSV output.
//!
//! Every cell of the sweep is `(scenario, algorithm, run)`. A fresh graph
//! is generated per `(scenario seed, run)` and the algorithm seed derives
//! from `(config seed, scenario index, run)`, so the whole benchmark is
//! reproducible from the config alone. Cells run concurrently unless
//! `serial` is set; timing is measured inside each cell, around the
//! algorithm call only, and concurrent cells add timing noise - use serial
//! mode for publication numbers.

use std::error::Error;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aco::{optimize, AcoParams};
use crate::baselines::{
    dp_optimal, exhaustive, greedy_nn, random_sample, simulated_annealing, SaParams,
    DP_MAX_TABLES, EXHAUSTIVE_MAX_TABLES,
};
use crate::rng;
use crate::workload::{generate, Topology, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Aco,
    Exhaustive,
    Dp,
    Greedy,
    Random,
    Sa,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Aco => "aco",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Dp => "dp",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Sa => "sa",
        };
        f.write_str(s)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aco" => Ok(Algorithm::Aco),
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "dp" => Ok(Algorithm::Dp),
            "greedy" => Ok(Algorithm::Greedy),
            "random" => Ok(Algorithm::Random),
            "sa" => Ok(Algorithm::Sa),
            _ => Err(format!("unknown algorithm {s:?}, expected aco|exhaustive|dp|greedy|random|sa")),
        }
    }
}

/// How many ants a scenario gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntPolicy {
    EqualToTables,
    HalfTables,
    Fixed(usize),
}

impl AntPolicy {
    pub fn ants(&self, num_tables: usize) -> usize {
        match self {
            AntPolicy::EqualToTables => num_tables,
            AntPolicy::HalfTables => num_tables.div_ceil(2),
            AntPolicy::Fixed(k) => (*k).max(1),
        }
    }
}

impl fmt::Display for AntPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AntPolicy::EqualToTables => f.write_str("equal_to_tables"),
            AntPolicy::HalfTables => f.write_str("half_tables"),
            AntPolicy::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for AntPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal_to_tables" => Ok(AntPolicy::EqualToTables),
            "half_tables" => Ok(AntPolicy::HalfTables),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|k| k.parse().ok())
                .map(AntPolicy::Fixed)
                .ok_or_else(|| {
                    format!("unknown ant policy {s:?}, expected equal_to_tables|half_tables|fixed:<k>")
                }),
        }
    }
}

/// One full benchmark description; serializable as the `bench` section of
/// the CLI config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub scenarios: Vec<WorkloadSpec>,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub aco: AcoParams,
    pub ant_policy: AntPolicy,
    /// Master seed the per-cell algorithm seeds derive from.
    pub seed: u64,
    /// Run cells one at a time for noise-free timing.
    pub serial: bool,
    pub output: Option<PathBuf>,
    pub trace_output: Option<PathBuf>,
    /// When set, the ant-count sweep also runs and writes here.
    pub sweep_output: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenarios: Vec::new(),
            algorithms: vec![Algorithm::Aco],
            runs: 20,
            aco: AcoParams::default(),
            ant_policy: AntPolicy::EqualToTables,
            seed: 0,
            serial: false,
            output: None,
            trace_output: None,
            sweep_output: None,
        }
    }
}

#[derive(Debug)]
pub enum BenchError {
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Config(msg) => write!(f, "invalid benchmark config: {msg}"),
            BenchError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl Error for BenchError {}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e)
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.scenarios.is_empty() {
            return Err(BenchError::Config("scenario list is empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithm selected".into()));
        }
        if self.runs < 1 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            s.validate().map_err(|e| BenchError::Config(format!("scenario {i}: {e}")))?;
        }
        self.aco.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }

    /// The table-count sweep shipped as `paper_repro.json`: seven scenario
    /// sizes whose cardinality ranges center on the target mean rows, 20
    /// runs of 30 iterations each, and the exhaustive guard exercised on
    /// purpose by the larger scenarios.
    pub fn paper_repro() -> Self {
        let scenarios = crate::workload::table1_scenarios()
            .into_iter()
            .enumerate()
            .map(|(i, (n, mean))| WorkloadSpec {
                num_tables: n,
                card_min: 50,
                card_max: 2 * mean - 50,
                topology: Topology::RandomConnected,
                sel_min: 0.001,
                sel_max: 0.1,
                seed: i as u64 + 1,
            })
            .collect();
        BenchConfig {
            scenarios,
            algorithms: vec![
                Algorithm::Aco,
                Algorithm::Exhaustive,
                Algorithm::Greedy,
                Algorithm::Random,
            ],
            runs: 20,
            seed: 1,
            output: Some(PathBuf::from("paper_repro_results.csv")),
            ..Default::default()
        }
    }
}

/// One benchmark cell's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    /// Ant policy tag for colony rows, `-` for the rest.
    pub ant_policy: String,
    pub num_tables: usize,
    pub topology: Topology,
    pub run: usize,
    pub seed: u64,
    pub best_cost: f64,
    pub elapsed_ms: f64,
    pub evaluations: u64,
}

/// Per-iteration best-so-far of one colony cell, for convergence plots.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub scenario: usize,
    pub run: usize,
    pub iteration: usize,
    pub best_so_far: f64,
}

/// A cell skipped because an exact algorithm's size guard fired.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardSkip {
    pub scenario: usize,
    pub algorithm: Algorithm,
    pub run: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub skips: Vec<GuardSkip>,
    pub traces: Vec<TraceRow>,
}

struct Cell {
    scenario: usize,
    spec: WorkloadSpec,
    algorithm: Algorithm,
    run: usize,
}

enum CellOutcome {
    Record(BenchRecord, Vec<TraceRow>),
    Skip(GuardSkip),
}

fn run_cell(cfg: &BenchConfig, cell: &Cell) -> CellOutcome {
    let graph_seed = rng::derive_seed(cell.spec.seed, &[cell.run as u64]);
    let g = generate(&cell.spec.with_seed(graph_seed))
        .expect("validated scenario generates a valid graph");
    let n = g.n();
    let algo_seed = rng::derive_seed(cfg.seed, &[cell.scenario as u64, cell.run as u64]);
    let ants = cfg.ant_policy.ants(n);
    let budget = (cfg.aco.iterations as u64) * ants as u64;

    let skip = |limit: usize| {
        CellOutcome::Skip(GuardSkip {
            scenario: cell.scenario,
            algorithm: cell.algorithm,
            run: cell.run,
            message: format!(
                "{} skipped on scenario {} run {}: {} tables exceeds its limit of {}",
                cell.algorithm, cell.scenario, cell.run, n, limit
            ),
        })
    };

    let (best_cost, elapsed_ms, evaluations, trace) = match cell.algorithm {
        Algorithm::Aco => {
            let params = AcoParams {
                num_ants: Some(ants),
                seed: algo_seed,
                ..cfg.aco.clone()
            };
            let r = optimize(&g, &params).expect("validated params");
            let trace = r
                .trace
                .iter()
                .enumerate()
                .map(|(i, &b)| TraceRow {
                    scenario: cell.scenario,
                    run: cell.run,
                    iteration: i,
                    best_so_far: b,
                })
                .collect();
            (r.best_cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, trace)
        }
        Algorithm::Exhaustive => {
            if n > EXHAUSTIVE_MAX_TABLES {
                return skip(EXHAUSTIVE_MAX_TABLES);
            }
            let r = exhaustive(&g).expect("guard checked");
            (r.cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, Vec::new())
        }
        Algorithm::Dp => {
            if n > DP_MAX_TABLES {
                return skip(DP_MAX_TABLES);
            }
            let r = dp_optimal(&g).expect("guard checked");
            (r.cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, Vec::new())
        }
        Algorithm::Greedy => {
            let r = greedy_nn(&g, 0);
            (r.cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, Vec::new())
        }
        Algorithm::Random => {
            let mut rng = rng::stream(algo_seed, &[]);
            let r = random_sample(&g, budget, &mut rng);
            (r.cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, Vec::new())
        }
        Algorithm::Sa => {
            let mut rng = rng::stream(algo_seed, &[]);
            let params = SaParams { steps: budget as usize, ..Default::default() };
            let r = simulated_annealing(&g, &params, &mut rng).expect("default params are valid");
            (r.cost.total, r.elapsed.as_secs_f64() * 1e3, r.evaluations, Vec::new())
        }
    };

    let policy_tag = match cell.algorithm {
        Algorithm::Aco => cfg.ant_policy.to_string(),
        _ => "-".to_string(),
    };
    CellOutcome::Record(
        BenchRecord {
            algorithm: cell.algorithm,
            ant_policy: policy_tag,
            num_tables: cell.spec.num_tables,
            topology: cell.spec.topology,
            run: cell.run,
            seed: algo_seed,
            best_cost,
            elapsed_ms,
            evaluations,
        },
        trace,
    )
}

/// Runs every `(scenario, algorithm, run)` cell and collects records in
/// that deterministic order. Guard violations become warnings, not
/// failures.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutput, BenchError> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for (scenario, spec) in cfg.scenarios.iter().enumerate() {
        for &algorithm in &cfg.algorithms {
            for run in 0..cfg.runs {
                cells.push(Cell { scenario, spec: spec.clone(), algorithm, run });
            }
        }
    }

    let outcomes: Vec<CellOutcome> = if cfg.serial {
        cells.iter().map(|c| run_cell(cfg, c)).collect()
    } else {
        cells.par_iter().map(|c| run_cell(cfg, c)).collect()
    };

    let mut out = BenchOutput::default();
    for outcome in outcomes {
        match outcome {
            CellOutcome::Record(r, mut t) => {
                out.records.push(r);
                out.traces.append(&mut t);
            }
            CellOutcome::Skip(s) => out.skips.push(s),
        }
    }
    Ok(out)
}

/// Runs the colony scenarios twice under identical seeds and graphs, once
/// with one ant per table and once with half as many, tagging the records
/// by policy.
pub fn ant_count_sweep(cfg: &BenchConfig) -> Result<BenchOutput, BenchError> {
    if !cfg.algorithms.contains(&Algorithm::Aco) {
        return Err(BenchError::Config("the ant-count sweep needs aco among the algorithms".into()));
    }
    let mut out = BenchOutput::default();
    for policy in [AntPolicy::EqualToTables, AntPolicy::HalfTables] {
        let sub = BenchConfig {
            algorithms: vec![Algorithm::Aco],
            ant_policy: policy,
            ..cfg.clone()
        };
        let mut part = run_benchmark(&sub)?;
        out.records.append(&mut part.records);
        out.skips.append(&mut part.skips);
    }
    Ok(out)
}

/// Mean cost / median time per ant policy, the sweep's report.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub policy: String,
    pub cells: usize,
    pub mean_best_cost: f64,
    pub median_elapsed_ms: f64,
    pub mean_evaluations: f64,
}

pub fn policy_summary(records: &[BenchRecord]) -> Vec<PolicySummary> {
    let mut policies: Vec<String> = Vec::new();
    for r in records {
        if !policies.contains(&r.ant_policy) {
            policies.push(r.ant_policy.clone());
        }
    }
    policies
        .into_iter()
        .map(|policy| {
            let rows: Vec<&BenchRecord> =
                records.iter().filter(|r| r.ant_policy == policy).collect();
            let cells = rows.len();
            let mean_best_cost = rows.iter().map(|r| r.best_cost).sum::<f64>() / cells as f64;
            let mean_evaluations =
                rows.iter().map(|r| r.evaluations as f64).sum::<f64>() / cells as f64;
            let mut times: Vec<f64> = rows.iter().map(|r| r.elapsed_ms).collect();
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median_elapsed_ms = if times.len() % 2 == 1 {
                times[times.len() / 2]
            } else {
                (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
            };
            PolicySummary { policy, cells, mean_best_cost, median_elapsed_ms, mean_evaluations }
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "algorithm,ant_policy,num_tables,topology,run,seed,best_cost,elapsed_ms,evaluations";

/// Results CSV: fixed column order, `.` decimal separator, LF endings.
pub fn csv_string(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{:.3},{}\n",
            r.algorithm,
            r.ant_policy,
            r.num_tables,
            r.topology,
            r.run,
            r.seed,
            r.best_cost,
            r.elapsed_ms,
            r.evaluations
        ));
    }
    s
}

pub fn emit_csv(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    fs::write(path, csv_string(records))?;
    Ok(())
}

pub const TRACE_CSV_HEADER: &str = "scenario,run,iteration,best_so_far";

pub fn trace_csv_string(traces: &[TraceRow]) -> String {
    let mut s = String::from(TRACE_CSV_HEADER);
    s.push('\n');
    for t in traces {
        s.push_str(&format!("{},{},{},{}\n", t.scenario, t.run, t.iteration, t.best_so_far));
    }
    s
}

pub fn emit_trace_csv(traces: &[TraceRow], path: &Path) -> Result<(), BenchError> {
    fs::write(path, trace_csv_string(traces))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> BenchConfig {
        BenchConfig {
            scenarios: vec![
                WorkloadSpec { num_tables: 5, seed: 3, ..Default::default() },
                WorkloadSpec {
                    num_tables: 6,
                    topology: Topology::Star,
                    seed: 4,
                    ..Default::default()
                },
            ],
            algorithms: vec![Algorithm::Aco, Algorithm::Dp, Algorithm::Random],
            runs: 3,
            seed: 11,
            serial: true,
            ..Default::default()
        }
    }

    #[test]
    fn record_accounting() {
        let out = run_benchmark(&tiny_config()).unwrap();
        assert_eq!(out.records.len(), 2 * 3 * 3);
        assert!(out.skips.is_empty());
        // records arrive in (scenario, algorithm, run) order
        let mut sorted = out.records.clone();
        sorted.sort_by_key(|r| (r.num_tables, r.algorithm.to_string(), r.run));
        assert_eq!(out.records, sorted);
    }

    #[test]
    fn guard_skips_are_warnings() {
        let cfg = BenchConfig {
            scenarios: vec![WorkloadSpec { num_tables: 12, seed: 9, ..Default::default() }],
            algorithms: vec![Algorithm::Exhaustive, Algorithm::Greedy],
            runs: 2,
            serial: true,
            ..Default::default()
        };
        let out = run_benchmark(&cfg).unwrap();
        assert_eq!(out.records.len(), 2); // greedy only
        assert_eq!(out.skips.len(), 2); // exhaustive cells
        assert!(out.skips[0].message.contains("exceeds its limit of 10"));
    }

    #[test]
    fn fair_budget_matches_aco_evaluations() {
        let out = run_benchmark(&tiny_config()).unwrap();
        for n in [5usize, 6] {
            let aco: Vec<_> = out
                .records
                .iter()
                .filter(|r| r.algorithm == Algorithm::Aco && r.num_tables == n)
                .collect();
            let random: Vec<_> = out
                .records
                .iter()
                .filter(|r| r.algorithm == Algorithm::Random && r.num_tables == n)
                .collect();
            assert!(!aco.is_empty());
            for (a, r) in aco.iter().zip(&random) {
                assert_eq!(a.evaluations, r.evaluations);
            }
        }
    }

    #[test]
    fn dp_lower_bounds_every_cell() {
        let out = run_benchmark(&tiny_config()).unwrap();
        for n in [5usize, 6] {
            for run in 0..3 {
                let cell = |alg: Algorithm| {
                    out.records
                        .iter()
                        .find(|r| r.algorithm == alg && r.num_tables == n && r.run == run)
                        .unwrap()
                        .best_cost
                };
                let dp = cell(Algorithm::Dp);
                assert!(cell(Algorithm::Aco) >= dp);
                assert!(cell(Algorithm::Random) >= dp);
            }
        }
    }

    #[test]
    fn rerun_is_identical_except_timing() {
        let strip_timing = |csv: &str| -> String {
            csv.lines()
                .map(|l| {
                    let mut cols: Vec<&str> = l.split(',').collect();
                    if cols.len() == 9 && cols[7] != "elapsed_ms" {
                        cols[7] = "0";
                    }
                    cols.join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = csv_string(&run_benchmark(&tiny_config()).unwrap().records);
        let b = csv_string(&run_benchmark(&tiny_config()).unwrap().records);
        assert_eq!(strip_timing(&a), strip_timing(&b));

        // parallel cell execution changes nothing but timing either
        let parallel = BenchConfig { serial: false, ..tiny_config() };
        let c = csv_string(&run_benchmark(&parallel).unwrap().records);
        assert_eq!(strip_timing(&a), strip_timing(&c));
    }

    #[test]
    fn sweep_tags_policies_and_halves_evaluations() {
        let cfg = BenchConfig {
            scenarios: vec![WorkloadSpec { num_tables: 9, seed: 5, ..Default::default() }],
            algorithms: vec![Algorithm::Aco],
            runs: 4,
            serial: true,
            ..Default::default()
        };
        let out = ant_count_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 4);
        let full: Vec<_> =
            out.records.iter().filter(|r| r.ant_policy == "equal_to_tables").collect();
        let half: Vec<_> = out.records.iter().filter(|r| r.ant_policy == "half_tables").collect();
        assert_eq!(full.len(), 4);
        assert_eq!(half.len(), 4);
        // 9 ants vs 5 ants at 30 iterations
        for (f, h) in full.iter().zip(&half) {
            assert_eq!(f.evaluations, 30 * 9);
            assert_eq!(h.evaluations, 30 * 5);
            assert_eq!(f.seed, h.seed);
        }
        let summary = policy_summary(&out.records);
        assert_eq!(summary.len(), 2);
        assert!(summary.iter().all(|s| s.cells == 4));
    }

    #[test]
    fn sweep_requires_aco() {
        let cfg = BenchConfig {
            scenarios: vec![WorkloadSpec::default()],
            algorithms: vec![Algorithm::Greedy],
            ..Default::default()
        };
        assert!(matches!(ant_count_sweep(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
        let out = run_benchmark(&tiny_config()).unwrap();
        let csv = csv_string(&out.records);
        assert_eq!(csv.lines().count(), out.records.len() + 1);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);

        let traces = trace_csv_string(&out.traces);
        assert_eq!(traces.lines().next().unwrap(), TRACE_CSV_HEADER);
        // two scenarios x three aco runs x 30 iterations
        assert_eq!(out.traces.len(), 2 * 3 * 30);
    }

    #[test]
    fn empty_config_is_rejected() {
        let cfg = BenchConfig::default();
        assert!(matches!(run_benchmark(&cfg), Err(BenchError::Config(_))));
        let cfg = BenchConfig {
            scenarios: vec![WorkloadSpec::default()],
            runs: 0,
            ..Default::default()
        };
        assert!(matches!(run_benchmark(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn paper_repro_shape() {
        let cfg = BenchConfig::paper_repro();
        cfg.validate().unwrap();
        assert_eq!(cfg.scenarios.len(), 7);
        assert_eq!(cfg.runs, 20);
        assert_eq!(cfg.aco.iterations, 30);
        assert_eq!(cfg.algorithms.len(), 4);
        // cardinality ranges center on the per-scenario target means
        for (spec, (n, mean)) in cfg.scenarios.iter().zip(crate::workload::table1_scenarios()) {
            assert_eq!(spec.num_tables, n);
            assert_eq!((spec.card_min + spec.card_max) / 2, mean);
        }
    }
}
