//! k-clique enumeration over a degeneracy-ordered DAG, in the style of the
//! kClist algorithm, plus an exhaustive oracle for small graphs.
//!
//! Occurrences are streamed to a visitor one at a time and never stored,
//! so memory stays independent of the clique size and count.

use rayon::prelude::*;

use crate::error::{HolsError, Result};
use crate::graph::{Graph, VertexId};

/// Default upper bound on the clique size accepted by the CLI; listing cost
/// grows exponentially in the size, so larger values need an explicit
/// override.
pub const DEFAULT_CLIQUE_SIZE_CAP: usize = 8;

/// Roots per parallel work unit. Fixed so that parallel runs are
/// reproducible regardless of the number of worker threads.
const ROOT_CHUNK: usize = 1024;

/// Vertex elimination order by repeated minimum-degree removal.
#[derive(Debug, Clone)]
pub struct CoreOrdering {
    order: Vec<VertexId>,
    position: Vec<u32>,
    degeneracy: u32,
}

impl CoreOrdering {
    /// Removal order; every vertex has at most `degeneracy` neighbors later
    /// in this order.
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    /// Rank of `v` in the removal order.
    pub fn position(&self, v: VertexId) -> u32 {
        self.position[v as usize]
    }

    /// Maximum degree observed at removal time (the core number of the graph).
    pub fn degeneracy(&self) -> u32 {
        self.degeneracy
    }
}

/// Peel minimum-degree vertices one at a time, ties broken by lowest vertex
/// id so the ordering is deterministic.
pub fn core_ordering(g: &Graph) -> CoreOrdering {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = g.num_vertices();
    let mut degree: Vec<usize> = (0..n).map(|v| g.neighbor_count(v as VertexId)).collect();
    let mut removed = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, VertexId)>> = (0..n)
        .map(|v| Reverse((degree[v], v as VertexId)))
        .collect();

    let mut order = Vec::with_capacity(n);
    let mut position = vec![0u32; n];
    let mut degeneracy = 0u32;

    while let Some(Reverse((d, v))) = heap.pop() {
        if removed[v as usize] || d != degree[v as usize] {
            continue; // stale entry
        }
        removed[v as usize] = true;
        degeneracy = degeneracy.max(d as u32);
        position[v as usize] = order.len() as u32;
        order.push(v);
        for &u in g.neighbors(v) {
            if !removed[u as usize] {
                degree[u as usize] -= 1;
                heap.push(Reverse((degree[u as usize], u)));
            }
        }
    }

    CoreOrdering {
        order,
        position,
        degeneracy,
    }
}

/// A single clique occurrence: strictly increasing vertex ids and the
/// product of its incident edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueOccurrence {
    pub vertices: Vec<VertexId>,
    pub weight: f64,
}

/// Graph oriented along the core ordering: edges point from lower to higher
/// removal position, so every out-neighborhood has at most `degeneracy`
/// vertices.
struct OrientedDag {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
}

impl OrientedDag {
    fn build(g: &Graph, ord: &CoreOrdering) -> Self {
        let n = g.num_vertices();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for u in 0..n as VertexId {
            let pu = ord.position(u);
            for (&v, &w) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
                if ord.position(v) > pu {
                    targets.push(v);
                    weights.push(w);
                }
            }
            offsets.push(targets.len());
        }
        OrientedDag {
            offsets,
            targets,
            weights,
        }
    }

    fn row(&self, v: VertexId) -> (&[VertexId], &[f64]) {
        let lo = self.offsets[v as usize];
        let hi = self.offsets[v as usize + 1];
        (&self.targets[lo..hi], &self.weights[lo..hi])
    }
}

/// Per-worker scratch for the recursive descent. Candidate lists carry, for
/// each vertex, the partial product of its edge weights to the prefix.
struct Lister<'a> {
    dag: &'a OrientedDag,
    prefix: Vec<VertexId>,
    emit_buf: Vec<VertexId>,
    levels: Vec<Vec<(VertexId, f64)>>,
}

impl<'a> Lister<'a> {
    fn new(dag: &'a OrientedDag, k: usize) -> Self {
        Lister {
            dag,
            prefix: Vec::with_capacity(k),
            emit_buf: Vec::with_capacity(k),
            levels: vec![Vec::new(); k.saturating_sub(1)],
        }
    }

    fn run_root<F: FnMut(&[VertexId], f64) + ?Sized>(
        &mut self,
        root: VertexId,
        k: usize,
        visit: &mut F,
    ) -> u64 {
        let (ids, ws) = self.dag.row(root);
        if ids.len() < k - 1 {
            return 0;
        }
        self.levels[0].clear();
        self.levels[0].extend(ids.iter().copied().zip(ws.iter().copied()));
        self.prefix.clear();
        self.prefix.push(root);
        self.descend(0, 1.0, k - 1, visit)
    }

    fn descend<F: FnMut(&[VertexId], f64) + ?Sized>(
        &mut self,
        level: usize,
        prefix_weight: f64,
        remaining: usize,
        visit: &mut F,
    ) -> u64 {
        if remaining == 1 {
            let count = self.levels[level].len() as u64;
            for i in 0..self.levels[level].len() {
                let (v, pw) = self.levels[level][i];
                self.emit_buf.clear();
                self.emit_buf.extend_from_slice(&self.prefix);
                self.emit_buf.push(v);
                self.emit_buf.sort_unstable();
                visit(&self.emit_buf, prefix_weight * pw);
            }
            return count;
        }
        let mut count = 0u64;
        for i in 0..self.levels[level].len() {
            let (v, pw) = self.levels[level][i];
            {
                let (row_ids, row_ws) = self.dag.row(v);
                let (head, tail) = self.levels.split_at_mut(level + 1);
                intersect(&head[level], row_ids, row_ws, &mut tail[0]);
            }
            if self.levels[level + 1].len() >= remaining - 1 {
                self.prefix.push(v);
                count += self.descend(level + 1, prefix_weight * pw, remaining - 1, visit);
                self.prefix.pop();
            }
        }
        count
    }
}

/// `out = cand ∩ row`, multiplying each surviving partial product by the
/// weight of the edge to the newly fixed vertex. Both inputs are sorted by id.
fn intersect(
    cand: &[(VertexId, f64)],
    row_ids: &[VertexId],
    row_ws: &[f64],
    out: &mut Vec<(VertexId, f64)>,
) {
    out.clear();
    let mut j = 0usize;
    for &(x, p) in cand {
        while j < row_ids.len() && row_ids[j] < x {
            j += 1;
        }
        if j == row_ids.len() {
            break;
        }
        if row_ids[j] == x {
            out.push((x, p * row_ws[j]));
            j += 1;
        }
    }
}

fn validate_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(HolsError::Validation(format!(
            "clique size must be at least 2, got {k}"
        )));
    }
    Ok(())
}

/// Stream every k-clique exactly once to `visit` (sorted vertex ids and the
/// product of incident edge weights) and return the total count.
pub fn enumerate_cliques<F>(g: &Graph, k: usize, visit: F) -> Result<u64>
where
    F: FnMut(&[VertexId], f64),
{
    let ord = core_ordering(g);
    enumerate_cliques_with(g, &ord, k, visit)
}

/// As [`enumerate_cliques`], reusing a precomputed ordering.
pub fn enumerate_cliques_with<F>(g: &Graph, ord: &CoreOrdering, k: usize, mut visit: F) -> Result<u64>
where
    F: FnMut(&[VertexId], f64),
{
    validate_k(k)?;
    let dag = OrientedDag::build(g, ord);
    let mut lister = Lister::new(&dag, k);
    let mut count = 0u64;
    for root in 0..g.num_vertices() as VertexId {
        count += lister.run_root(root, k, &mut visit);
    }
    Ok(count)
}

/// Data-parallel variant over root vertices. The visitor is invoked
/// concurrently; emissions are order-nondeterministic but multiset-identical
/// to the sequential run.
pub fn enumerate_cliques_parallel<F>(g: &Graph, ord: &CoreOrdering, k: usize, visit: F) -> Result<u64>
where
    F: Fn(&[VertexId], f64) + Sync,
{
    validate_k(k)?;
    let dag = OrientedDag::build(g, ord);
    let n = g.num_vertices();
    let count = (0..n.div_ceil(ROOT_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * ROOT_CHUNK;
            let hi = (lo + ROOT_CHUNK).min(n);
            let mut lister = Lister::new(&dag, k);
            let mut local = 0u64;
            let mut sink = |vs: &[VertexId], w: f64| visit(vs, w);
            for root in lo..hi {
                local += lister.run_root(root as VertexId, k, &mut sink);
            }
            local
        })
        .sum();
    Ok(count)
}

/// Run the lister over fixed-size root chunks in parallel and map each
/// chunk's occurrence stream through `f`, returning per-chunk results in
/// chunk order. Because the chunk size is fixed, the chunk boundaries (and
/// hence any per-chunk accumulation) do not depend on the worker count.
///
/// `f` receives a driver; calling the driver with a visitor streams every
/// occurrence rooted in the chunk through that visitor, in root order.
pub fn map_root_chunks<T, F>(g: &Graph, ord: &CoreOrdering, k: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut dyn FnMut(&mut dyn FnMut(&[VertexId], f64))) -> T + Sync,
{
    validate_k(k)?;
    let dag = OrientedDag::build(g, ord);
    let n = g.num_vertices();
    let out = (0..n.div_ceil(ROOT_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * ROOT_CHUNK;
            let hi = (lo + ROOT_CHUNK).min(n);
            let mut driver = |visit: &mut dyn FnMut(&[VertexId], f64)| {
                let mut lister = Lister::new(&dag, k);
                for root in lo..hi {
                    lister.run_root(root as VertexId, k, visit);
                }
            };
            f(&mut driver)
        })
        .collect();
    Ok(out)
}

/// Maximum graph size accepted by [`brute_force_cliques`].
pub const BRUTE_FORCE_VERTEX_CAP: usize = 64;

/// Exhaustive subset enumeration with a pairwise-adjacency check; the test
/// oracle for the streaming lister. Occurrences come out in lexicographic
/// order of their sorted vertex tuples.
pub fn brute_force_cliques(g: &Graph, k: usize) -> Result<Vec<CliqueOccurrence>> {
    validate_k(k)?;
    let n = g.num_vertices();
    if n > BRUTE_FORCE_VERTEX_CAP {
        return Err(HolsError::TooLargeForDense {
            num_vertices: n,
            cap: BRUTE_FORCE_VERTEX_CAP,
        });
    }
    let mut adj = vec![0u64; n];
    for (u, v, _) in g.edges() {
        adj[u as usize] |= 1 << v;
        adj[v as usize] |= 1 << u;
    }
    let mut out = Vec::new();
    let mut chosen: Vec<VertexId> = Vec::with_capacity(k);
    fn rec(
        g: &Graph,
        adj: &[u64],
        k: usize,
        start: usize,
        common: u64,
        chosen: &mut Vec<VertexId>,
        out: &mut Vec<CliqueOccurrence>,
    ) {
        if chosen.len() == k {
            let mut weight = 1.0;
            for i in 0..k {
                for j in (i + 1)..k {
                    weight *= g.edge_weight(chosen[i], chosen[j]).unwrap();
                }
            }
            out.push(CliqueOccurrence {
                vertices: chosen.clone(),
                weight,
            });
            return;
        }
        for v in start..g.num_vertices() {
            if chosen.is_empty() || common & (1 << v) != 0 {
                chosen.push(v as VertexId);
                let next_common = if chosen.len() == 1 {
                    adj[v]
                } else {
                    common & adj[v]
                };
                rec(g, adj, k, v + 1, next_common, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(g, &adj, k, 0, 0, &mut chosen, &mut out);
    Ok(out)
}

/// Collect the streaming lister's output as a sorted list (test helper and
/// CLI dump support).
pub fn collect_cliques(g: &Graph, k: usize) -> Result<Vec<CliqueOccurrence>> {
    let mut out = Vec::new();
    enumerate_cliques(g, k, |vs, w| {
        out.push(CliqueOccurrence {
            vertices: vs.to_vec(),
            weight: w,
        });
    })?;
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}
