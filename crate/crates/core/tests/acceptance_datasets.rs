//! Dataset-scale acceptance checks: benchmark accuracy bands and the
//! higher-order homogeneity direction on the PolBlogs and Cora citation /
//! hyperlink networks.
//!
//! These tests need the raw dataset files on disk (this environment has no
//! network access, so they cannot be fetched here). They are ignored by
//! default and run with `cargo test -- --ignored` once the files exist;
//! the README's "Dataset tests" section describes the expected layout:
//!
//! ```text
//! data/polblogs.edges   data/polblogs.labels
//! data/cora.edges       data/cora.labels
//! ```
//!
//! or any directory named by the `HOLS_DATA_DIR` environment variable.
//! Edge files are whitespace-separated `u v` lines (directions, duplicate
//! edges, self-loops and `#` comments are tolerated and normalized away);
//! label files are `vertex class` lines where the class may be an integer
//! or an arbitrary token (tokens are mapped to class ids in sorted order).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use hols_core::eval::{run_experiment_on, sweep_alpha_on, ExperimentConfig, MethodKind, MethodSpec};
use hols_core::graph::{Graph, LabelAssignment, VertexId};
use hols_core::homogeneity::{
    homogeneity_report, observed_distribution, shuffled_distribution, LabelConfiguration, Ratio,
};

const RUN_SEED: u64 = 2026;
const SHUFFLE_REPS: usize = 20;

// ---------------------------------------------------------------------------
// Raw-file loading
// ---------------------------------------------------------------------------

fn data_dir() -> PathBuf {
    match std::env::var_os("HOLS_DATA_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

/// Parses a raw edge list into a simple undirected unit-weight graph:
/// comments, directions, duplicates and self-loops are normalized away,
/// and vertices that end up isolated are dropped. Internal ids follow the
/// sorted order of the surviving external ids.
fn parse_raw_edges(text: &str) -> Result<(Graph, BTreeMap<u64, VertexId>), String> {
    let mut pairs: BTreeSet<(u64, u64)> = BTreeSet::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (u, v) = match (tokens.next(), tokens.next()) {
            (Some(u), Some(v)) => (u, v),
            _ => return Err(format!("edge line {}: expected two ids", line_no + 1)),
        };
        let u: u64 = u.parse().map_err(|e| format!("edge line {}: {e}", line_no + 1))?;
        let v: u64 = v.parse().map_err(|e| format!("edge line {}: {e}", line_no + 1))?;
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }

    let ids: BTreeSet<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let index: BTreeMap<u64, VertexId> =
        ids.iter().enumerate().map(|(i, &id)| (id, i as VertexId)).collect();
    let edges: Vec<(VertexId, VertexId)> =
        pairs.iter().map(|&(u, v)| (index[&u], index[&v])).collect();
    let graph = Graph::from_unit_edges(index.len(), &edges).map_err(|e| e.to_string())?;
    Ok((graph, index))
}

/// Parses `vertex class` lines against the vertex index; labels for
/// dropped (isolated) vertices are skipped. Non-numeric class tokens are
/// mapped to ids in sorted token order.
fn parse_raw_labels(
    text: &str,
    index: &BTreeMap<u64, VertexId>,
) -> Result<LabelAssignment, String> {
    let mut pairs: Vec<(VertexId, String)> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (v, class) = match (tokens.next(), tokens.next()) {
            (Some(v), Some(c)) => (v, c),
            _ => return Err(format!("label line {}: expected `vertex class`", line_no + 1)),
        };
        let v: u64 = v.parse().map_err(|e| format!("label line {}: {e}", line_no + 1))?;
        if let Some(&internal) = index.get(&v) {
            pairs.push((internal, class.to_string()));
        }
    }

    let tokens: BTreeSet<&str> = pairs.iter().map(|(_, c)| c.as_str()).collect();
    let all_numeric = tokens.iter().all(|t| t.parse::<usize>().is_ok());
    let class_of = |token: &str| -> usize {
        if all_numeric {
            token.parse().unwrap()
        } else {
            tokens.iter().position(|&t| t == token).unwrap()
        }
    };
    let num_classes = if all_numeric {
        tokens.iter().map(|t| t.parse::<usize>().unwrap() + 1).max().unwrap_or(0)
    } else {
        tokens.len()
    };

    let mut labels = LabelAssignment::new(index.len(), num_classes);
    for (v, token) in &pairs {
        labels.set(*v, class_of(token)).map_err(|e| e.to_string())?;
    }
    if !labels.is_total() {
        return Err(format!(
            "labels cover {} of {} vertices; a total labeling is required",
            labels.num_labeled(),
            index.len()
        ));
    }
    Ok(labels)
}

fn load_dataset(name: &str) -> Result<(Graph, LabelAssignment), String> {
    let dir = data_dir();
    let edges = fs::read_to_string(dir.join(format!("{name}.edges")))
        .map_err(|e| format!("{name}.edges under {}: {e}", dir.display()))?;
    let labels = fs::read_to_string(dir.join(format!("{name}.labels")))
        .map_err(|e| format!("{name}.labels under {}: {e}", dir.display()))?;
    let (graph, index) = parse_raw_edges(&edges)?;
    let truth = parse_raw_labels(&labels, &index)?;
    Ok((graph, truth))
}

fn benchmark_config(num_seeds: usize) -> ExperimentConfig {
    ExperimentConfig {
        graph: String::new(),
        labels: String::new(),
        weighted: false,
        one_based: false,
        num_classes: None,
        num_seeds,
        runs: 5,
        seed: RUN_SEED,
        eta: 0.5,
        epsilon: 1e-6,
        max_iters: 500,
        mode: Default::default(),
        methods: vec![MethodSpec {
            name: "ls".into(),
            kind: MethodKind::Spread,
            motifs: vec![2],
            alphas: vec![1.0],
        }],
        alphas: Vec::new(),
        max_clique_sizes: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// 7. Benchmark accuracy bands (label spreading vs the tuned triangle plan).
// ---------------------------------------------------------------------------

/// One dataset's worth of criterion 7: the edge-only mean must sit in the
/// published band, and the grid-tuned triangle plan must not fall more
/// than `slack` below it, with a non-negative best gain.
fn check_benchmark(
    name: &str,
    num_seeds: usize,
    ls_band: (f64, f64),
    slack: f64,
) -> Result<(), String> {
    let started = Instant::now();
    let (graph, truth) = load_dataset(name)?;
    let cfg = benchmark_config(num_seeds);

    let report = run_experiment_on(&graph, &truth, &cfg).map_err(|e| e.to_string())?;
    let ls_mean = report.methods[0]
        .mean_accuracy
        .ok_or_else(|| format!("{name}: every edge-only run failed"))?;
    let (center, tol) = ls_band;
    if (ls_mean - center).abs() > tol {
        return Err(format!(
            "{name}: edge-only mean accuracy {ls_mean:.4} outside {center} ± {tol}"
        ));
    }

    let sweep = sweep_alpha_on(&graph, &truth, &cfg).map_err(|e| e.to_string())?;
    let best = sweep.best().ok_or_else(|| format!("{name}: sweep produced no finished point"))?;
    let best_mean =
        best.mean_accuracy.ok_or_else(|| format!("{name}: best sweep point has no mean"))?;
    if best_mean < ls_mean - slack {
        return Err(format!(
            "{name}: tuned triangle mean {best_mean:.4} below edge-only {ls_mean:.4} − {slack}"
        ));
    }
    let gain = best
        .gain_over_baseline
        .ok_or_else(|| format!("{name}: best sweep point has no gain"))?;
    if gain < 0.0 {
        return Err(format!("{name}: best gain {gain:.4} is negative"));
    }

    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("{name}: runtime {elapsed:.1?} exceeds 5 min"));
    }
    println!(
        "    {name}: edge-only {ls_mean:.4}, tuned α₃ = {} → {best_mean:.4} (gain {gain:+.4}) in {elapsed:.1?}"
    , best.alpha);
    Ok(())
}

#[test]
#[ignore = "needs dataset files under ./data or $HOLS_DATA_DIR (polblogs.edges/.labels, cora.edges/.labels); see README"]
fn criterion_07_benchmark_accuracy_bands() {
    let outcome = check_benchmark("polblogs", 20, (0.9361, 0.02), 0.005)
        .and_then(|()| check_benchmark("cora", 100, (0.4921, 0.03), 0.0));
    match outcome {
        Ok(()) => println!(
            "[7] benchmark bands: edge-only means in range, tuned triangle plan competitive: PASS"
        ),
        Err(why) => {
            println!("[7] benchmark bands: FAIL — {why}");
            panic!("[7] {why}");
        }
    }
}

// ---------------------------------------------------------------------------
// 8. Homogeneity direction: monochromatic cliques are over-represented,
//    maximally mixed ones under-represented, versus the shuffle null.
// ---------------------------------------------------------------------------

/// The least homogeneous configuration realizable with `c` classes: `k`
/// split into min(k, c) near-equal parts.
fn most_mixed(k: usize, c: usize) -> LabelConfiguration {
    let parts = k.min(c);
    let base = k / parts;
    let extra = k % parts;
    let sizes: Vec<usize> =
        (0..parts).map(|i| if i < extra { base + 1 } else { base }).collect();
    LabelConfiguration::new(sizes).expect("valid partition")
}

fn check_homogeneity(name: &str) -> Result<(), String> {
    let started = Instant::now();
    let (graph, truth) = load_dataset(name)?;
    let c = truth.num_classes();

    for k in 2..=4 {
        let observed = observed_distribution(&graph, &truth, k).map_err(|e| e.to_string())?;
        let null = shuffled_distribution(&graph, &truth, k, SHUFFLE_REPS, RUN_SEED)
            .map_err(|e| e.to_string())?;
        let report = homogeneity_report(&observed, &null).map_err(|e| e.to_string())?;

        let mono = LabelConfiguration::new(vec![k]).unwrap();
        let mono_ratio = match report.row(&mono).map(|r| r.ratio) {
            Some(Ratio::Finite(r)) => r,
            Some(Ratio::Infinite) => {
                eprintln!("    {name} k = {k}: null never produced a monochromatic clique");
                f64::INFINITY
            }
            _ => return Err(format!("{name} k = {k}: no monochromatic cliques observed")),
        };
        if mono_ratio <= 1.0 {
            return Err(format!(
                "{name} k = {k}: monochromatic ratio {mono_ratio:.3} not above 1"
            ));
        }
        if k == 3 && !(3.6..=60.0).contains(&mono_ratio) {
            // Soft cross-dataset band; logged, not asserted.
            eprintln!(
                "    {name} k = 3: monochromatic ratio {mono_ratio:.3} outside the soft band [3.6, 60]"
            );
        }

        if k <= 3 {
            let mixed = most_mixed(k, c);
            match report.row(&mixed).map(|r| r.ratio) {
                Some(Ratio::Finite(r)) if r < 1.0 => {}
                Some(Ratio::Absent) => eprintln!(
                    "    {name} k = {k}: {mixed} never observed at all (ratio treated as < 1)"
                ),
                other => {
                    return Err(format!(
                        "{name} k = {k}: mixed configuration {mixed} ratio {other:?} not below 1"
                    ))
                }
            }
        }
    }

    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(120) {
        return Err(format!("{name}: runtime {elapsed:.1?} exceeds 2 min"));
    }
    println!("    {name}: homogeneity direction confirmed for k = 2..4 in {elapsed:.1?}");
    Ok(())
}

#[test]
#[ignore = "needs dataset files under ./data or $HOLS_DATA_DIR (polblogs.edges/.labels, cora.edges/.labels); see README"]
fn criterion_08_homogeneity_direction() {
    let outcome = check_homogeneity("polblogs").and_then(|()| check_homogeneity("cora"));
    match outcome {
        Ok(()) => println!("[8] homogeneity direction vs the shuffle null: PASS"),
        Err(why) => {
            println!("[8] homogeneity direction vs the shuffle null: FAIL — {why}");
            panic!("[8] {why}");
        }
    }
}

// ---------------------------------------------------------------------------
// Loader sanity (runs without dataset files).
// ---------------------------------------------------------------------------

/// Exercises the raw-file normalization on a synthetic dataset so the
/// ignored tests' plumbing stays covered: duplicate and reversed edges
/// collapse, self-loops and isolated vertices drop, and string classes map
/// to sorted ids.
#[test]
fn loader_normalizes_raw_dataset_quirks() {
    let edges = "# comment\n10 20\n20 10\n10 20\n30 30\n20 40\n% other comment\n40 50\n";
    let (graph, index) = parse_raw_edges(edges).unwrap();
    assert_eq!(graph.num_vertices(), 4); // 30 had only a self-loop, so it is dropped
    assert_eq!(graph.num_edges(), 3);
    assert_eq!(index.keys().copied().collect::<Vec<_>>(), vec![10, 20, 40, 50]);
    assert!(graph.has_edge(index[&10], index[&20]));
    assert!(graph.has_edge(index[&20], index[&40]));
    assert!(graph.has_edge(index[&40], index[&50]));

    let labels = "10 liberal\n20 conservative\n30 conservative\n40 liberal\n50 conservative\n";
    let truth = parse_raw_labels(labels, &index).unwrap();
    assert_eq!(truth.num_classes(), 2);
    // Sorted tokens: conservative = 0, liberal = 1.
    assert_eq!(truth.get(index[&10]), Some(1));
    assert_eq!(truth.get(index[&20]), Some(0));
    assert_eq!(truth.get(index[&50]), Some(0));

    let partial = "10 a\n20 b\n";
    assert!(parse_raw_labels(partial, &index).is_err());

    // Numeric class tokens keep their own numbering.
    let numeric = "10 1\n20 0\n40 1\n50 0\n";
    let truth = parse_raw_labels(numeric, &index).unwrap();
    assert_eq!(truth.num_classes(), 2);
    assert_eq!(truth.get(index[&10]), Some(1));
    assert_eq!(truth.get(index[&20]), Some(0));

    assert_eq!(most_mixed(3, 2).to_string(), "2-1");
    assert_eq!(most_mixed(3, 7).to_string(), "1-1-1");
    assert_eq!(most_mixed(2, 2).to_string(), "1-1");
    assert_eq!(most_mixed(4, 2).to_string(), "2-2");
}
