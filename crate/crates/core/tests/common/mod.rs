//! Shared fixtures and independent dense oracles for the integration tests.
//!
//! Everything here is deliberately written against plain `Vec` matrices and
//! textbook formulas, without touching the crate's sparse kernels, so that
//! agreement between the two is meaningful evidence of correctness.

#![allow(dead_code)]

use hols_core::graph::{Graph, LabelAssignment, VertexId};
use hols_core::solver::SoftLabels;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi G(n, p) with unit weights; each pair is included
/// independently, reproducibly for a given seed.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u as VertexId, v as VertexId));
            }
        }
    }
    Graph::from_unit_edges(n, &edges).expect("generated edges are valid")
}

/// As [`erdos_renyi`] but with edge weights drawn uniformly from [0.5, 2).
pub fn erdos_renyi_weighted(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                let w = rng.random_range(0.5..2.0);
                edges.push((u as VertexId, v as VertexId, w));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are valid")
}

/// The eight-vertex toy graph used throughout: vertex 0 sits in a 4-clique
/// with vertices 1–3 and additionally carries four pendant neighbors 4–7.
pub fn clique_with_pendants() -> Graph {
    let edges = [
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3),
        (0, 4),
        (0, 5),
        (0, 6),
        (0, 7),
    ];
    Graph::from_unit_edges(8, &edges).expect("fixture is valid")
}

/// Star K_{1,m}: vertex 0 joined to 1..=m.
pub fn star(m: usize) -> Graph {
    let edges: Vec<(VertexId, VertexId)> = (1..=m).map(|v| (0, v as VertexId)).collect();
    Graph::from_unit_edges(m + 1, &edges).expect("fixture is valid")
}

/// Path 0 − 1 − … − (n−1).
pub fn path(n: usize) -> Graph {
    let edges: Vec<(VertexId, VertexId)> =
        (0..n - 1).map(|v| (v as VertexId, v as VertexId + 1)).collect();
    Graph::from_unit_edges(n, &edges).expect("fixture is valid")
}

/// Labels a random subset of vertices (each with probability `frac`,
/// at least one overall) with uniform classes; returns the assignment and
/// the one-hot prior built from it.
pub fn random_seed_labels(
    n: usize,
    num_classes: usize,
    frac: f64,
    seed: u64,
) -> (LabelAssignment, SoftLabels) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = LabelAssignment::new(n, num_classes);
    for v in 0..n {
        if rng.random_bool(frac) {
            let c = rng.random_range(0..num_classes);
            labels.set(v as VertexId, c).unwrap();
        }
    }
    if labels.num_labeled() == 0 {
        let v = rng.random_range(0..n) as VertexId;
        labels.set(v, rng.random_range(0..num_classes)).unwrap();
    }
    let prior = SoftLabels::from_assignment(&labels);
    (labels, prior)
}

/// Whether the graph is connected (trivially true for n ≤ 1).
pub fn is_connected(g: &Graph) -> bool {
    let n = g.num_vertices();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0 as VertexId];
    seen[0] = true;
    let mut found = 1;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if !seen[u as usize] {
                seen[u as usize] = true;
                found += 1;
                stack.push(u);
            }
        }
    }
    found == n
}

/// Draws G(n, p) variants until one is connected.
pub fn connected_erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    for attempt in 0..200 {
        let g = erdos_renyi(n, p, seed.wrapping_add(attempt * 0x9E37_79B9));
        if is_connected(&g) {
            return g;
        }
    }
    panic!("no connected G({n}, {p}) found near seed {seed}");
}

/// Row-major dense adjacency of `g`.
pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut w = vec![vec![0.0; n]; n];
    for (u, v, weight) in g.edges() {
        w[u as usize][v as usize] = weight;
        w[v as usize][u as usize] = weight;
    }
    w
}

/// Textbook label spreading on the plain edge structure of `g`, coded
/// independently with dense matrices: S = D^{-1/2} W D^{-1/2} and
/// X ← η·S·X + (1−η)·Y from X0 = Y, stopping when the largest entry
/// change drops below `epsilon` or after `max_iters` rounds.
///
/// Returns the final scores (row-major) and the number of iterations.
pub fn dense_label_spreading(
    g: &Graph,
    prior: &SoftLabels,
    eta: f64,
    epsilon: f64,
    max_iters: usize,
) -> (Vec<Vec<f64>>, usize) {
    let n = g.num_vertices();
    let c = prior.num_classes();
    let w = dense_adjacency(g);
    let degrees: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = inv_sqrt[i] * w[i][j] * inv_sqrt[j];
        }
    }

    let y: Vec<Vec<f64>> = (0..n).map(|v| prior.row(v as VertexId).to_vec()).collect();
    let mut x = y.clone();
    let mut iterations = 0;
    for _ in 0..max_iters {
        let mut next = vec![vec![0.0; c]; n];
        let mut residual: f64 = 0.0;
        for i in 0..n {
            for class in 0..c {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += s[i][j] * x[j][class];
                }
                let value = eta * acc + (1.0 - eta) * y[i][class];
                residual = residual.max((value - x[i][class]).abs());
                next[i][class] = value;
            }
        }
        x = next;
        iterations += 1;
        if residual < epsilon {
            break;
        }
    }
    (x, iterations)
}

/// Harmonic-function oracle for clamped propagation on the plain edge
/// structure: labeled rows are fixed to their one-hot labels and each
/// unlabeled row solves X_U = (I − P_UU)^{-1} P_UL Y_L for the
/// row-stochastic walk P = D^{-1} W. Requires every unlabeled vertex to
/// reach a labeled one (e.g. a connected graph).
pub fn dense_harmonic(g: &Graph, labels: &LabelAssignment) -> Vec<Vec<f64>> {
    use nalgebra::DMatrix;

    let n = g.num_vertices();
    let c = labels.num_classes();
    let w = dense_adjacency(g);
    let degrees: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();

    let unlabeled: Vec<usize> = (0..n).filter(|&v| labels.get(v as VertexId).is_none()).collect();
    let slot: std::collections::HashMap<usize, usize> =
        unlabeled.iter().copied().enumerate().map(|(slot, v)| (v, slot)).collect();

    let m = unlabeled.len();
    let mut system = DMatrix::<f64>::identity(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, c);
    for (row, &i) in unlabeled.iter().enumerate() {
        if degrees[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let p_ij = w[i][j] / degrees[i];
            if p_ij == 0.0 {
                continue;
            }
            match labels.get(j as VertexId) {
                None => system[(row, slot[&j])] -= p_ij,
                Some(class) => rhs[(row, class)] += p_ij,
            }
        }
    }
    let solution = system.lu().solve(&rhs).expect("harmonic system is nonsingular");

    let mut x = vec![vec![0.0; c]; n];
    for v in 0..n {
        match labels.get(v as VertexId) {
            Some(class) => x[v][class] = 1.0,
            None => {
                let row = slot[&v];
                for class in 0..c {
                    x[v][class] = solution[(row, class)];
                }
            }
        }
    }
    x
}

/// Largest |impl − oracle| over all entries.
pub fn max_entry_gap(soft: &SoftLabels, oracle: &[Vec<f64>]) -> f64 {
    let mut gap: f64 = 0.0;
    for (v, row) in oracle.iter().enumerate() {
        for (class, &want) in row.iter().enumerate() {
            gap = gap.max((soft.get(v as VertexId, class) - want).abs());
        }
    }
    gap
}
