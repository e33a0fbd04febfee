//! Benchmark harness: stratified seed sampling, paired method comparisons
//! with micro-sign significance tests, and accuracy sweeps over motif
//! weights and clique sizes.
//!
//! Every randomized step derives its RNG stream from the experiment seed,
//! so a report is bitwise reproducible for a given configuration. Wall-clock
//! timings are measured (excluding I/O) but kept out of the deterministic
//! JSON serialization unless explicitly requested.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{HolsError, Result};
use crate::graph::{self, EdgeListOptions, Graph, LabelAssignment, VertexId};
use crate::motif;
use crate::participation::{
    build_participation_with, combine, MotifPlan, ParticipationMatrix, PropagationOperator,
};
use crate::solver::{self, SoftLabels, SolverConfig, SpreadResult};

/// Two-sided p-value threshold for calling a per-run comparison significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Largest `n` for which the sign-test binomial tail is summed exactly in
/// integer arithmetic; beyond this the log-gamma form takes over.
const EXACT_BINOMIAL_LIMIT: u64 = 100;

// ---------------------------------------------------------------------------
// Stratified seed sampling
// ---------------------------------------------------------------------------

/// Draw `n` labeled seed vertices from a fully labeled ground truth,
/// stratified by class: quotas are proportional to class frequency
/// (largest-remainder rounding) with a floor of one seed per class, and
/// sampling within a class is uniform without replacement.
///
/// Deterministic for a given seed. Returns vertex ids in ascending order.
pub fn stratified_sample(labels: &LabelAssignment, n: usize, seed: u64) -> Result<Vec<VertexId>> {
    if !labels.is_total() {
        return Err(HolsError::Validation(
            "stratified sampling needs a totally labeled ground truth".into(),
        ));
    }
    let num_vertices = labels.num_vertices();
    let counts = labels.class_counts();
    let c = counts.len();
    if counts.contains(&0) {
        return Err(HolsError::Validation(
            "every class needs at least one member".into(),
        ));
    }
    if n < c {
        return Err(HolsError::Validation(format!(
            "budget {n} cannot cover {c} classes with one seed each"
        )));
    }
    if n > num_vertices {
        return Err(HolsError::Validation(format!(
            "budget {n} exceeds the {num_vertices} available vertices"
        )));
    }

    let quotas = class_quotas(&counts, n);
    debug_assert_eq!(quotas.iter().sum::<usize>(), n);

    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); c];
    for (v, class) in labels.labeled() {
        members[class].push(v);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(n);
    for (class, quota) in quotas.iter().enumerate() {
        picked.extend(members[class].choose_multiple(&mut rng, *quota).copied());
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Largest-remainder apportionment with a floor of one per class, clamped
/// to class sizes. Assumes `c <= n <= N`.
fn class_quotas(counts: &[usize], n: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let mut quotas: Vec<usize> = Vec::with_capacity(counts.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(counts.len());
    for (class, &m) in counts.iter().enumerate() {
        let share = n as f64 * m as f64 / total as f64;
        let floor = share.floor() as usize;
        quotas.push(floor);
        remainders.push((share - floor as f64, class));
    }
    // hand out leftovers by descending remainder, lowest class id on ties;
    // the leftover count is below the class count, so one pass suffices
    let mut leftover = n - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, class) in &remainders {
        if leftover == 0 {
            break;
        }
        quotas[class] += 1;
        leftover -= 1;
    }
    // every class gets at least one seed, donated by the largest quota
    for class in 0..counts.len() {
        while quotas[class] == 0 {
            let donor = (0..counts.len())
                .filter(|&d| quotas[d] > 1)
                .max_by_key(|&d| quotas[d])
                .expect("budget >= class count guarantees a donor");
            quotas[donor] -= 1;
            quotas[class] += 1;
        }
    }
    // defensive clamp: no quota may exceed its class size
    loop {
        let mut excess = 0usize;
        for (class, &m) in counts.iter().enumerate() {
            if quotas[class] > m {
                excess += quotas[class] - m;
                quotas[class] = m;
            }
        }
        if excess == 0 {
            break;
        }
        for _ in 0..excess {
            let target = (0..counts.len())
                .filter(|&d| quotas[d] < counts[d])
                .max_by_key(|&d| counts[d] - quotas[d])
                .expect("n <= N guarantees spare capacity");
            quotas[target] += 1;
        }
    }
    quotas
}

// ---------------------------------------------------------------------------
// Accuracy and significance
// ---------------------------------------------------------------------------

/// Fraction of correctly classified vertices outside the excluded (labeled)
/// set. Both assignments must be total.
pub fn accuracy(
    pred: &LabelAssignment,
    truth: &LabelAssignment,
    exclude: &[VertexId],
) -> Result<f64> {
    if pred.num_vertices() != truth.num_vertices() {
        return Err(HolsError::DimensionMismatch {
            expected: truth.num_vertices(),
            got: pred.num_vertices(),
        });
    }
    if !pred.is_total() || !truth.is_total() {
        return Err(HolsError::Validation(
            "accuracy needs total predicted and true labelings".into(),
        ));
    }
    let mut excluded = exclude.to_vec();
    excluded.sort_unstable();
    let mut seen = 0usize;
    let mut correct = 0usize;
    for v in 0..truth.num_vertices() as VertexId {
        if excluded.binary_search(&v).is_ok() {
            continue;
        }
        seen += 1;
        if pred.get(v) == truth.get(v) {
            correct += 1;
        }
    }
    if seen == 0 {
        return Err(HolsError::EmptyEvaluationSet);
    }
    Ok(correct as f64 / seen as f64)
}

/// Two-sided micro-sign test over paired per-vertex correctness flags.
///
/// With `n` vertices where exactly one method is correct and `s` of them
/// favoring the first method, the p-value is
/// `min(1, 2·P(Bin(n, 1/2) ≥ max(s, n−s)))`, and 1 when `n = 0`. The tail
/// is summed exactly for `n ≤ 100` and in log-space above that.
pub fn micro_sign_test(correct_a: &[bool], correct_b: &[bool]) -> Result<f64> {
    if correct_a.len() != correct_b.len() {
        return Err(HolsError::DimensionMismatch {
            expected: correct_a.len(),
            got: correct_b.len(),
        });
    }
    let mut n = 0u64;
    let mut s = 0u64;
    for (&a, &b) in correct_a.iter().zip(correct_b) {
        if a != b {
            n += 1;
            if a {
                s += 1;
            }
        }
    }
    if n == 0 {
        return Ok(1.0);
    }
    let m = s.max(n - s);
    let p = if n <= EXACT_BINOMIAL_LIMIT {
        let tail: u128 = (m..=n).map(|i| binomial_u128(n, i)).sum();
        2.0 * tail as f64 / 2.0f64.powi(n as i32)
    } else {
        // log-sum-exp over the tail, normalized by 2^n
        let ln_terms: Vec<f64> = (m..=n)
            .map(|i| {
                ln_gamma(n as f64 + 1.0)
                    - ln_gamma(i as f64 + 1.0)
                    - ln_gamma((n - i) as f64 + 1.0)
            })
            .collect();
        let peak = ln_terms.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = peak + ln_terms.iter().map(|&t| (t - peak).exp()).sum::<f64>().ln();
        2.0 * (lse - n as f64 * std::f64::consts::LN_2).exp()
    };
    Ok(p.min(1.0))
}

/// Exact binomial coefficient; callers keep `n ≤ 100` so this cannot
/// overflow.
fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i as u128 + 1);
    }
    c
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// How a method turns the prior into soft labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    /// Label spreading `X ← η·S·X + (1−η)·Y` on the plan's operator.
    Spread,
    /// Clamped row-stochastic label propagation on the same operator.
    Propagation,
}

/// One method in a comparison: a name, a solver kind, and a motif plan
/// given as parallel `motifs`/`alphas` lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,
    #[serde(default = "default_method_kind")]
    pub kind: MethodKind,
    pub motifs: Vec<usize>,
    pub alphas: Vec<f64>,
}

fn default_method_kind() -> MethodKind {
    MethodKind::Spread
}

impl MethodSpec {
    pub fn plan(&self) -> Result<MotifPlan> {
        if self.motifs.len() != self.alphas.len() {
            return Err(HolsError::Validation(format!(
                "method {:?} lists {} motifs but {} weights",
                self.name,
                self.motifs.len(),
                self.alphas.len()
            )));
        }
        MotifPlan::new(self.motifs.iter().copied().zip(self.alphas.iter().copied()).collect())
    }
}

/// What to run: a named-method comparison or one of the two sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    #[default]
    Compare,
    SweepAlpha,
    SweepClique,
}

/// Declarative experiment description (deserializable from the CLI's
/// key-value config files).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Edge-list path.
    pub graph: String,
    /// Ground-truth label path (total labeling).
    pub labels: String,
    #[serde(default)]
    pub weighted: bool,
    /// Class ids in the labels file start at 1.
    #[serde(default)]
    pub one_based: bool,
    /// Class count override when the labels file does not cover all classes.
    #[serde(default)]
    pub num_classes: Option<usize>,
    /// Labeled-vertex budget per run.
    pub num_seeds: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub mode: ExperimentMode,
    /// Methods for [`ExperimentMode::Compare`].
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    /// Triangle-weight grid for [`ExperimentMode::SweepAlpha`]; empty means
    /// the default grid 0.0, 0.1, …, 0.9.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Clique-size ceilings for [`ExperimentMode::SweepClique`]; empty
    /// means 2, 3, 4, 5.
    #[serde(default)]
    pub max_clique_sizes: Vec<usize>,
}

fn default_runs() -> usize {
    5
}

fn default_eta() -> f64 {
    SolverConfig::default().eta
}

fn default_epsilon() -> f64 {
    SolverConfig::default().epsilon
}

fn default_max_iters() -> usize {
    SolverConfig::default().max_iters
}

impl ExperimentConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            eta: self.eta,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
        }
    }

    fn validate_against(&self, truth: &LabelAssignment) -> Result<()> {
        if self.runs == 0 {
            return Err(HolsError::Validation("runs must be at least 1".into()));
        }
        if !truth.is_total() {
            return Err(HolsError::Validation(
                "experiments need a totally labeled ground truth".into(),
            ));
        }
        truth.require_all_classes_labeled()?;
        if self.num_seeds < truth.num_classes() {
            return Err(HolsError::Validation(format!(
                "num_seeds = {} is below the class count {}",
                self.num_seeds,
                truth.num_classes()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Outcome of one method on one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    /// Accuracy over unlabeled vertices; absent when the run failed.
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregated results for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub name: String,
    pub plan: String,
    pub kind: MethodKind,
    /// One record per run, in run order.
    pub per_run: Vec<RunRecord>,
    /// Mean accuracy over the runs that succeeded.
    pub mean_accuracy: Option<f64>,
    /// One-time clique-enumeration cost (seconds).
    pub enumeration_seconds: f64,
    /// One-time operator-combination cost (seconds).
    pub build_seconds: f64,
    /// Mean per-run solve cost (seconds).
    pub solve_seconds: Option<f64>,
}

/// Paired comparison between two methods across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub method_a: String,
    pub method_b: String,
    /// Two-sided micro-sign p-value per run; absent when either side failed.
    pub per_run_p: Vec<Option<f64>>,
    /// Runs with `p <` [`SIGNIFICANCE_LEVEL`].
    pub significant_runs: usize,
    /// Runs where both methods produced predictions.
    pub comparable_runs: usize,
    /// Significant in a strict majority of runs.
    pub majority_significant: bool,
}

/// Full comparison report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub graph_digest: String,
    pub num_seeds: usize,
    pub runs: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub methods: Vec<MethodReport>,
    pub comparisons: Vec<PairComparison>,
}

impl Report {
    /// JSON form. Timings vary between invocations, so they are stripped
    /// unless `include_timings` is set; everything else is deterministic
    /// for a given seed.
    pub fn to_json(&self, include_timings: bool) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if !include_timings {
            if let Some(methods) = value["methods"].as_array_mut() {
                for m in methods {
                    if let Some(obj) = m.as_object_mut() {
                        obj.remove("enumeration_seconds");
                        obj.remove("build_seconds");
                        obj.remove("solve_seconds");
                    }
                }
            }
        }
        value
    }

    /// Aligned text table with per-method accuracy and timing plus the
    /// pairwise significance summary.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let name_w = self
            .methods
            .iter()
            .map(|m| m.name.len())
            .chain(["method".len()])
            .max()
            .unwrap();
        let plan_w = self
            .methods
            .iter()
            .map(|m| m.plan.len())
            .chain(["plan".len()])
            .max()
            .unwrap();
        out.push_str(&format!(
            "{:<name_w$}  {:<plan_w$}  {:>9}  {:>5}  {:>8}  {:>8}  {:>8}\n",
            "method", "plan", "mean_acc", "runs", "enum_s", "build_s", "solve_s"
        ));
        for m in &self.methods {
            let ok = m.per_run.iter().filter(|r| r.accuracy.is_some()).count();
            out.push_str(&format!(
                "{:<name_w$}  {:<plan_w$}  {:>9}  {:>5}  {:>8.3}  {:>8.3}  {:>8}\n",
                m.name,
                m.plan,
                m.mean_accuracy
                    .map_or("-".to_string(), |a| format!("{a:.4}")),
                format!("{ok}/{}", self.runs),
                m.enumeration_seconds,
                m.build_seconds,
                m.solve_seconds
                    .map_or("-".to_string(), |s| format!("{s:.3}")),
            ));
        }
        for cmp in &self.comparisons {
            out.push_str(&format!(
                "{} vs {}: p < {} in {}/{} runs (majority: {})\n",
                cmp.method_a,
                cmp.method_b,
                SIGNIFICANCE_LEVEL,
                cmp.significant_runs,
                cmp.comparable_runs,
                if cmp.majority_significant { "yes" } else { "no" }
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

/// Seed for run `r`, drawn from a dedicated stream of the experiment seed.
fn run_seed(seed: u64, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + run as u64);
    rng.random()
}

/// The per-run inputs shared by every method: the stratified seed set, the
/// prior built from it, and the evaluation set (everything unlabeled).
struct RunInputs {
    labeled: Vec<VertexId>,
    run_labels: LabelAssignment,
    prior: SoftLabels,
    eval_set: Vec<VertexId>,
}

fn prepare_runs(truth: &LabelAssignment, cfg: &ExperimentConfig) -> Vec<Result<RunInputs>> {
    (0..cfg.runs)
        .map(|run| {
            let labeled = stratified_sample(truth, cfg.num_seeds, run_seed(cfg.seed, run))?;
            let mut run_labels = LabelAssignment::new(truth.num_vertices(), truth.num_classes());
            for &v in &labeled {
                run_labels.set(v, truth.get(v).expect("truth is total"))?;
            }
            let prior = SoftLabels::from_assignment(&run_labels);
            let eval_set = (0..truth.num_vertices() as VertexId)
                .filter(|v| labeled.binary_search(v).is_err())
                .collect();
            Ok(RunInputs {
                labeled,
                run_labels,
                prior,
                eval_set,
            })
        })
        .collect()
}

fn solve_with(
    kind: MethodKind,
    op: &PropagationOperator,
    inputs: &RunInputs,
    solver_cfg: &SolverConfig,
) -> Result<SpreadResult> {
    match kind {
        MethodKind::Spread => solver::spread(op, &inputs.prior, solver_cfg, None),
        MethodKind::Propagation => {
            solver::label_propagation(op, &inputs.prior, &inputs.labeled, solver_cfg)
        }
    }
}

/// Hardened predictions scored over the evaluation set: accuracy plus the
/// per-vertex correctness flags the sign test pairs on.
fn score(
    result: &SpreadResult,
    inputs: &RunInputs,
    truth: &LabelAssignment,
) -> Result<(f64, Vec<bool>)> {
    let outcome = solver::harden(&result.soft, Some(&inputs.run_labels))?;
    let acc = accuracy(&outcome.labels, truth, &inputs.labeled)?;
    let flags = inputs
        .eval_set
        .iter()
        .map(|&v| outcome.labels.get(v) == truth.get(v))
        .collect();
    Ok((acc, flags))
}

/// Load the configured dataset and run the experiment it describes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let (g, truth) = load_dataset(cfg)?;
    run_experiment_on(&g, &truth, cfg)
}

/// Read the config's graph and ground-truth labels from disk.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<(Graph, LabelAssignment)> {
    let (g, map) = graph::load_edge_list(
        BufReader::new(File::open(&cfg.graph)?),
        EdgeListOptions {
            weighted: cfg.weighted,
        },
    )?;
    let truth = graph::load_labels(
        BufReader::new(File::open(&cfg.labels)?),
        &map,
        cfg.num_classes,
        cfg.one_based,
    )?;
    Ok((g, truth))
}

/// Compare the configured methods on an already loaded dataset.
///
/// Per run: one stratified seed set shared by all methods, one solve per
/// method, accuracy over the unlabeled remainder, and pairwise micro-sign
/// tests. A failing phase marks that method's run failed and the experiment
/// continues.
pub fn run_experiment_on(
    g: &Graph,
    truth: &LabelAssignment,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    cfg.validate_against(truth)?;
    if cfg.methods.is_empty() {
        return Err(HolsError::Validation(
            "comparison experiments need at least one method".into(),
        ));
    }
    let solver_cfg = cfg.solver_config();
    let ord = motif::core_ordering(g);

    // build each method's operator once; timings are per method
    struct Prepared {
        spec: MethodSpec,
        plan_desc: String,
        op: PropagationOperator,
        enumeration_seconds: f64,
        build_seconds: f64,
    }
    let mut prepared = Vec::with_capacity(cfg.methods.len());
    for spec in &cfg.methods {
        let plan = spec.plan()?;
        let t0 = Instant::now();
        let parts: Vec<ParticipationMatrix> = plan
            .motifs()
            .iter()
            .map(|&(k, _)| build_participation_with(g, &ord, k))
            .collect::<Result<_>>()?;
        let enumeration_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let op = combine(&parts, &plan)?;
        let build_seconds = t1.elapsed().as_secs_f64();
        prepared.push(Prepared {
            spec: spec.clone(),
            plan_desc: plan.describe(),
            op,
            enumeration_seconds,
            build_seconds,
        });
    }

    let runs = prepare_runs(truth, cfg);
    let mut per_run: Vec<Vec<RunRecord>> = vec![Vec::new(); prepared.len()];
    let mut solve_times: Vec<Vec<f64>> = vec![Vec::new(); prepared.len()];
    let mut flags: Vec<Vec<Option<Vec<bool>>>> = vec![Vec::new(); prepared.len()];

    for run in &runs {
        match run {
            Err(e) => {
                for m in 0..prepared.len() {
                    per_run[m].push(RunRecord {
                        accuracy: None,
                        error: Some(e.to_string()),
                    });
                    flags[m].push(None);
                }
            }
            Ok(inputs) => {
                for (m, prep) in prepared.iter().enumerate() {
                    let t0 = Instant::now();
                    let solved = solve_with(prep.spec.kind, &prep.op, inputs, &solver_cfg);
                    let elapsed = t0.elapsed().as_secs_f64();
                    match solved.and_then(|r| score(&r, inputs, truth)) {
                        Ok((acc, run_flags)) => {
                            per_run[m].push(RunRecord {
                                accuracy: Some(acc),
                                error: None,
                            });
                            solve_times[m].push(elapsed);
                            flags[m].push(Some(run_flags));
                        }
                        Err(e) => {
                            per_run[m].push(RunRecord {
                                accuracy: None,
                                error: Some(e.to_string()),
                            });
                            flags[m].push(None);
                        }
                    }
                }
            }
        }
    }

    let methods: Vec<MethodReport> = prepared
        .iter()
        .enumerate()
        .map(|(m, prep)| MethodReport {
            name: prep.spec.name.clone(),
            plan: prep.plan_desc.clone(),
            kind: prep.spec.kind,
            per_run: per_run[m].clone(),
            mean_accuracy: mean(per_run[m].iter().filter_map(|r| r.accuracy)),
            enumeration_seconds: prep.enumeration_seconds,
            build_seconds: prep.build_seconds,
            solve_seconds: mean(solve_times[m].iter().copied()),
        })
        .collect();

    let mut comparisons = Vec::new();
    for a in 0..prepared.len() {
        for b in (a + 1)..prepared.len() {
            let per_run_p: Vec<Option<f64>> = (0..cfg.runs)
                .map(|r| match (&flags[a][r], &flags[b][r]) {
                    (Some(fa), Some(fb)) => micro_sign_test(fa, fb).ok(),
                    _ => None,
                })
                .collect();
            let significant_runs = per_run_p
                .iter()
                .filter(|p| matches!(p, Some(p) if *p < SIGNIFICANCE_LEVEL))
                .count();
            let comparable_runs = per_run_p.iter().filter(|p| p.is_some()).count();
            comparisons.push(PairComparison {
                method_a: prepared[a].spec.name.clone(),
                method_b: prepared[b].spec.name.clone(),
                per_run_p,
                significant_runs,
                comparable_runs,
                majority_significant: significant_runs * 2 > cfg.runs,
            });
        }
    }

    Ok(Report {
        graph_digest: g.digest_hex(),
        num_seeds: cfg.num_seeds,
        runs: cfg.runs,
        seed: cfg.seed,
        solver: solver_cfg,
        methods,
        comparisons,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One point of the triangle-weight sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweepPoint {
    pub alpha: f64,
    pub per_run: Vec<Option<f64>>,
    pub mean_accuracy: Option<f64>,
    /// Mean accuracy minus the edge-only baseline's mean.
    pub gain_over_baseline: Option<f64>,
}

/// Accuracy as a function of the triangle weight, against the edge-only
/// label-spreading baseline on shared seed sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweep {
    pub baseline_mean: Option<f64>,
    pub points: Vec<AlphaSweepPoint>,
}

impl AlphaSweep {
    /// The grid point with the highest mean accuracy (first on ties).
    pub fn best(&self) -> Option<&AlphaSweepPoint> {
        self.points
            .iter()
            .filter(|p| p.mean_accuracy.is_some())
            .max_by(|a, b| {
                a.mean_accuracy
                    .partial_cmp(&b.mean_accuracy)
                    .unwrap()
                    .then(b.alpha.partial_cmp(&a.alpha).unwrap())
            })
    }

    /// CSV table: `alpha,mean_accuracy,baseline_mean,gain`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "alpha,mean_accuracy,baseline_mean,gain")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{}",
                p.alpha,
                fmt_opt(p.mean_accuracy),
                fmt_opt(self.baseline_mean),
                fmt_opt(p.gain_over_baseline)
            )?;
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| v.to_string())
}

fn default_alpha_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

fn accuracies_for_plan(
    g: &Graph,
    truth: &LabelAssignment,
    parts_by_size: &HashMap<usize, ParticipationMatrix>,
    plan: &MotifPlan,
    runs: &[Result<RunInputs>],
    solver_cfg: &SolverConfig,
) -> Result<Vec<Option<f64>>> {
    let parts: Vec<ParticipationMatrix> = plan
        .motifs()
        .iter()
        .map(|&(k, _)| parts_by_size[&k].clone())
        .collect();
    let op = combine(&parts, plan)?;
    let _ = g;
    Ok(runs
        .iter()
        .map(|run| {
            let inputs = run.as_ref().ok()?;
            let solved = solver::spread(&op, &inputs.prior, solver_cfg, None).ok()?;
            score(&solved, inputs, truth).ok().map(|(acc, _)| acc)
        })
        .collect())
}

/// Sweep the triangle weight over a grid (default 0.0 … 0.9), reporting
/// each point's gain over the edge-only baseline. All points and the
/// baseline share the same per-run seed sets; the zero-weight point reuses
/// the baseline's results outright, so its gain is exactly zero.
pub fn sweep_alpha_on(
    g: &Graph,
    truth: &LabelAssignment,
    cfg: &ExperimentConfig,
) -> Result<AlphaSweep> {
    cfg.validate_against(truth)?;
    let alphas = if cfg.alphas.is_empty() {
        default_alpha_grid()
    } else {
        cfg.alphas.clone()
    };
    for &a in &alphas {
        if !(0.0..=1.0).contains(&a) {
            return Err(HolsError::Validation(format!(
                "triangle weight {a} outside [0, 1]"
            )));
        }
    }
    let solver_cfg = cfg.solver_config();
    let ord = motif::core_ordering(g);
    let mut parts_by_size = HashMap::new();
    for k in [2usize, 3] {
        parts_by_size.insert(k, build_participation_with(g, &ord, k)?);
    }
    let runs = prepare_runs(truth, cfg);

    let baseline = accuracies_for_plan(
        g,
        truth,
        &parts_by_size,
        &MotifPlan::single(2)?,
        &runs,
        &solver_cfg,
    )?;
    let baseline_mean = mean(baseline.iter().flatten().copied());

    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let per_run = if alpha == 0.0 {
            baseline.clone()
        } else {
            accuracies_for_plan(
                g,
                truth,
                &parts_by_size,
                &MotifPlan::edges_and_triangles(alpha)?,
                &runs,
                &solver_cfg,
            )?
        };
        let mean_accuracy = mean(per_run.iter().flatten().copied());
        let gain_over_baseline = match (mean_accuracy, baseline_mean) {
            (Some(m), Some(b)) => Some(m - b),
            _ => None,
        };
        points.push(AlphaSweepPoint {
            alpha,
            per_run,
            mean_accuracy,
            gain_over_baseline,
        });
    }
    Ok(AlphaSweep {
        baseline_mean,
        points,
    })
}

/// One evaluated weight vector in the clique-size sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    /// Weights for sizes 2..=k, in tenths of the unit budget.
    pub alphas: Vec<f64>,
    pub mean_accuracy: Option<f64>,
}

/// Best-over-grid result for one clique-size ceiling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueSweepPoint {
    pub max_clique_size: usize,
    pub best_alphas: Vec<f64>,
    pub mean_accuracy: Option<f64>,
    /// Best mean minus the edge-only (`k = 2`) mean.
    pub gain_over_pairs: Option<f64>,
    /// The full tuning grid, for inspection.
    pub grid: Vec<GridEntry>,
}

/// Accuracy as a function of the largest clique size used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueSweep {
    pub pairs_mean: Option<f64>,
    pub points: Vec<CliqueSweepPoint>,
}

impl CliqueSweep {
    /// CSV table: `max_clique_size,best_alphas,mean_accuracy,gain_over_pairs`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "max_clique_size,best_alphas,mean_accuracy,gain_over_pairs")?;
        for p in &self.points {
            let weights = p
                .best_alphas
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join("+");
            writeln!(
                out,
                "{},{},{},{}",
                p.max_clique_size,
                weights,
                fmt_opt(p.mean_accuracy),
                fmt_opt(p.gain_over_pairs)
            )?;
        }
        Ok(())
    }
}

/// All weight vectors over sizes 2..=k in tenths: each weight in
/// {0, 0.1, …, 0.9}, the pair weight at least 0.1, total exactly 1.
fn weight_grid(slots: usize) -> Vec<Vec<f64>> {
    if slots == 1 {
        return vec![vec![1.0]];
    }
    let mut grid = Vec::new();
    let mut current = vec![0u8; slots];
    fn fill(current: &mut Vec<u8>, slot: usize, remaining: u8, grid: &mut Vec<Vec<f64>>) {
        if slot + 1 == current.len() {
            if remaining <= 9 {
                current[slot] = remaining;
                grid.push(current.iter().map(|&t| t as f64 / 10.0).collect());
            }
            return;
        }
        let lo = if slot == 0 { 1 } else { 0 };
        for t in lo..=remaining.min(9) {
            current[slot] = t;
            fill(current, slot + 1, remaining - t, grid);
        }
    }
    fill(&mut current, 0, 10, &mut grid);
    grid
}

/// For each ceiling `k`, tune the motif weights over the tenths grid and
/// report the best mean accuracy relative to the edge-only baseline.
pub fn sweep_max_clique_on(
    g: &Graph,
    truth: &LabelAssignment,
    cfg: &ExperimentConfig,
) -> Result<CliqueSweep> {
    cfg.validate_against(truth)?;
    let sizes = if cfg.max_clique_sizes.is_empty() {
        vec![2, 3, 4, 5]
    } else {
        cfg.max_clique_sizes.clone()
    };
    for &k in &sizes {
        if k < 2 {
            return Err(HolsError::Validation(format!(
                "clique-size ceiling must be at least 2, got {k}"
            )));
        }
    }
    let solver_cfg = cfg.solver_config();
    let ord = motif::core_ordering(g);
    let max_size = *sizes.iter().max().unwrap();
    let mut parts_by_size = HashMap::new();
    for k in 2..=max_size {
        parts_by_size.insert(k, build_participation_with(g, &ord, k)?);
    }
    let runs = prepare_runs(truth, cfg);

    let pairs_runs = accuracies_for_plan(
        g,
        truth,
        &parts_by_size,
        &MotifPlan::single(2)?,
        &runs,
        &solver_cfg,
    )?;
    let pairs_mean = mean(pairs_runs.iter().flatten().copied());

    let mut points = Vec::with_capacity(sizes.len());
    for &k in &sizes {
        let mut grid = Vec::new();
        for weights in weight_grid(k - 1) {
            let per_run = if k == 2 {
                pairs_runs.clone()
            } else {
                let entries: Vec<(usize, f64)> = (2..=k)
                    .zip(weights.iter().copied())
                    .filter(|&(_, a)| a > 0.0)
                    .collect();
                accuracies_for_plan(
                    g,
                    truth,
                    &parts_by_size,
                    &MotifPlan::new(entries)?,
                    &runs,
                    &solver_cfg,
                )?
            };
            grid.push(GridEntry {
                alphas: weights,
                mean_accuracy: mean(per_run.iter().flatten().copied()),
            });
        }
        let best = grid
            .iter()
            .filter(|e| e.mean_accuracy.is_some())
            .max_by(|a, b| a.mean_accuracy.partial_cmp(&b.mean_accuracy).unwrap());
        let (best_alphas, mean_accuracy) = match best {
            Some(e) => (e.alphas.clone(), e.mean_accuracy),
            None => (Vec::new(), None),
        };
        let gain_over_pairs = match (mean_accuracy, pairs_mean) {
            (Some(m), Some(b)) => Some(m - b),
            _ => None,
        };
        points.push(CliqueSweepPoint {
            max_clique_size: k,
            best_alphas,
            mean_accuracy,
            gain_over_pairs,
            grid,
        });
    }
    Ok(CliqueSweep { pairs_mean, points })
}
