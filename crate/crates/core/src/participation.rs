//! Motif participation matrices and the re-weighted propagation operator.
//!
//! For each clique size κ in the plan, the participation matrix counts the
//! total weight of κ-occurrences that each vertex pair shares. The combined
//! adjacency `W' = Σ α_κ E^κ` is then symmetrically normalized into the
//! spreading operator `S = D'^{-1/2} W' D'^{-1/2}`.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{HolsError, Result};
use crate::graph::{Graph, VertexId};
use crate::motif::{self, CoreOrdering};
use crate::solver::SoftLabels;

const PLAN_SUM_TOLERANCE: f64 = 1e-12;

/// The set of clique motifs to spread over, with their importance weights.
///
/// Weights are positive, at most 1, and sum to 1; a single-motif plan
/// necessarily carries weight exactly 1. Zero-weight motifs are rejected —
/// drop them from the plan instead.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifPlan {
    entries: Vec<(usize, f64)>,
}

impl MotifPlan {
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(HolsError::Validation("motif plan is empty".into()));
        }
        entries.sort_by_key(|e| e.0);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(HolsError::Validation(format!(
                    "duplicate motif size {} in plan",
                    pair[0].0
                )));
            }
        }
        let mut sum = 0.0;
        for &(k, alpha) in &entries {
            if k < 2 {
                return Err(HolsError::Validation(format!(
                    "motif size must be at least 2, got {k}"
                )));
            }
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(HolsError::Validation(format!(
                    "importance weight for size-{k} motif must lie in (0, 1], got {alpha}"
                )));
            }
            sum += alpha;
        }
        if (sum - 1.0).abs() > PLAN_SUM_TOLERANCE {
            return Err(HolsError::Validation(format!(
                "importance weights must sum to 1, got {sum}"
            )));
        }
        Ok(MotifPlan { entries })
    }

    /// Plan using a single clique size with weight 1.
    pub fn single(k: usize) -> Result<Self> {
        Self::new(vec![(k, 1.0)])
    }

    /// Edges plus triangles with the given triangle weight; the boundary
    /// weights degenerate to the single-motif plans.
    pub fn edges_and_triangles(alpha3: f64) -> Result<Self> {
        if alpha3 == 0.0 {
            Self::single(2)
        } else if alpha3 == 1.0 {
            Self::single(3)
        } else {
            Self::new(vec![(2, 1.0 - alpha3), (3, alpha3)])
        }
    }

    /// `(size, weight)` pairs, ascending by size.
    pub fn motifs(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn max_size(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0)
    }

    /// Compact display such as `K2:0.5+K3:0.5`.
    pub fn describe(&self) -> String {
        self.entries
            .iter()
            .map(|(k, a)| format!("K{k}:{a}"))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Sparse symmetric matrix of total motif co-participation weights, stored
/// on the full adjacency pattern of the source graph (entries that no
/// occurrence touches are explicit zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationMatrix {
    motif_size: usize,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    values: Vec<f64>,
}

impl ParticipationMatrix {
    pub fn motif_size(&self) -> usize {
        self.motif_size
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Entry `(i, j)`; zero when the pair shares no occurrence.
    pub fn entry(&self, i: VertexId, j: VertexId) -> f64 {
        let row = &self.targets[self.offsets[i as usize]..self.offsets[i as usize + 1]];
        match row.binary_search(&j) {
            Ok(pos) => self.values[self.offsets[i as usize] + pos],
            Err(_) => 0.0,
        }
    }

    /// Nonzero upper-triangle entries as `(i, j, value)` with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.num_vertices() as VertexId).flat_map(move |i| {
            let lo = self.offsets[i as usize];
            let hi = self.offsets[i as usize + 1];
            self.targets[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .filter(move |(&j, &v)| j > i && v != 0.0)
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Sum over all stored entries (both triangles), for conservation checks.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    #[cfg(test)]
    fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }
}

/// Maps an unordered vertex pair `{i, j}` (which must be an edge) to a
/// stable index in `0..M`.
struct PairIndexer<'g> {
    graph: &'g Graph,
    upper_offsets: Vec<usize>,
}

impl<'g> PairIndexer<'g> {
    fn new(graph: &'g Graph) -> Self {
        let n = graph.num_vertices();
        let mut upper_offsets = Vec::with_capacity(n + 1);
        upper_offsets.push(0);
        for v in 0..n as VertexId {
            let above = graph.neighbors(v).partition_point(|&x| x < v);
            let greater = graph.neighbor_count(v) - above;
            upper_offsets.push(upper_offsets.last().unwrap() + greater);
        }
        PairIndexer {
            graph,
            upper_offsets,
        }
    }

    /// `i < j` required; the pair must be an edge of the graph.
    fn index(&self, i: VertexId, j: VertexId) -> usize {
        let row = self.graph.neighbors(i);
        let split = row.partition_point(|&x| x < i);
        let pos = row.binary_search(&j).expect("pair is an edge");
        self.upper_offsets[i as usize] + pos - split
    }
}

/// Accumulate κ-occurrence weights onto every vertex pair inside each
/// occurrence. For `k = 2` the result equals the graph adjacency.
///
/// Work is partitioned over fixed root chunks and partial sums are merged
/// in chunk order, so the result is bitwise identical for any worker count.
pub fn build_participation(g: &Graph, k: usize) -> Result<ParticipationMatrix> {
    let ord = motif::core_ordering(g);
    build_participation_with(g, &ord, k)
}

/// As [`build_participation`] with a precomputed core ordering.
pub fn build_participation_with(
    g: &Graph,
    ord: &CoreOrdering,
    k: usize,
) -> Result<ParticipationMatrix> {
    let indexer = PairIndexer::new(g);
    let num_upper = g.num_edges();

    let partials: Vec<Vec<(u32, f64)>> = motif::map_root_chunks(g, ord, k, |visit_chunk| {
        let mut local: HashMap<u32, f64> = HashMap::new();
        visit_chunk(&mut |vs: &[VertexId], w: f64| {
            for a in 0..vs.len() {
                for b in (a + 1)..vs.len() {
                    let idx = indexer.index(vs[a], vs[b]) as u32;
                    *local.entry(idx).or_insert(0.0) += w;
                }
            }
        });
        let mut flat: Vec<(u32, f64)> = local.into_iter().collect();
        flat.sort_unstable_by_key(|e| e.0);
        flat
    })?;

    let mut upper = vec![0.0f64; num_upper];
    for part in partials {
        for (idx, w) in part {
            upper[idx as usize] += w;
        }
    }

    // Expand the upper-triangle accumulator onto the symmetric pattern.
    let n = g.num_vertices();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(2 * num_upper);
    let mut values = Vec::with_capacity(2 * num_upper);
    for i in 0..n as VertexId {
        for &j in g.neighbors(i) {
            let idx = if i < j {
                indexer.index(i, j)
            } else {
                indexer.index(j, i)
            };
            targets.push(j);
            values.push(upper[idx]);
        }
        offsets.push(targets.len());
    }

    Ok(ParticipationMatrix {
        motif_size: k,
        offsets,
        targets,
        values,
    })
}

/// Combined adjacency `W' = Σ α_κ E^κ` with its degree vector and the
/// symmetrically normalized spreading operator.
///
/// Rows and columns of `S` for zero-degree vertices are identically zero;
/// their converged labels reduce to `(1-η)` times the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOperator {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    wprime: Vec<f64>,
    s_values: Vec<f64>,
    degrees: Vec<f64>,
    inv_sqrt_deg: Vec<f64>,
    inv_deg: Vec<f64>,
}

/// Combine per-motif participation matrices according to the plan.
pub fn combine(parts: &[ParticipationMatrix], plan: &MotifPlan) -> Result<PropagationOperator> {
    if parts.len() != plan.motifs().len() {
        return Err(HolsError::Validation(format!(
            "plan has {} motifs but {} participation matrices were given",
            plan.motifs().len(),
            parts.len()
        )));
    }
    for (part, &(k, _)) in parts.iter().zip(plan.motifs()) {
        if part.motif_size != k {
            return Err(HolsError::Validation(format!(
                "participation matrix for size {} does not match plan motif size {k}",
                part.motif_size
            )));
        }
    }
    let first = &parts[0];
    for part in parts {
        if part.num_vertices() != first.num_vertices() {
            return Err(HolsError::DimensionMismatch {
                expected: first.num_vertices(),
                got: part.num_vertices(),
            });
        }
        if part.targets != first.targets {
            return Err(HolsError::Validation(
                "participation matrices come from different graphs".into(),
            ));
        }
    }

    let mut wprime = vec![0.0f64; first.values.len()];
    for (part, &(_, alpha)) in parts.iter().zip(plan.motifs()) {
        for (acc, &v) in wprime.iter_mut().zip(&part.values) {
            *acc += alpha * v;
        }
    }
    Ok(PropagationOperator::from_csr(
        first.offsets.clone(),
        first.targets.clone(),
        wprime,
    ))
}

impl PropagationOperator {
    /// Enumerate all motifs in the plan, build their participation matrices
    /// (in parallel across motifs) and combine them.
    pub fn build(g: &Graph, plan: &MotifPlan) -> Result<Self> {
        let ord = motif::core_ordering(g);
        let parts: Vec<ParticipationMatrix> = plan
            .motifs()
            .par_iter()
            .map(|&(k, _)| build_participation_with(g, &ord, k))
            .collect::<Result<_>>()?;
        combine(&parts, plan)
    }

    fn from_csr(offsets: Vec<usize>, targets: Vec<VertexId>, wprime: Vec<f64>) -> Self {
        let n = offsets.len() - 1;
        let mut degrees = vec![0.0f64; n];
        for i in 0..n {
            degrees[i] = wprime[offsets[i]..offsets[i + 1]].iter().sum();
        }
        let inv_sqrt_deg: Vec<f64> = degrees
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let inv_deg: Vec<f64> = degrees
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
            .collect();
        let mut s_values = vec![0.0f64; wprime.len()];
        for i in 0..n {
            for e in offsets[i]..offsets[i + 1] {
                let j = targets[e] as usize;
                s_values[e] = inv_sqrt_deg[i] * wprime[e] * inv_sqrt_deg[j];
            }
        }
        PropagationOperator {
            offsets,
            targets,
            wprime,
            s_values,
            degrees,
            inv_sqrt_deg,
            inv_deg,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Row sum `d'_ii` of the combined adjacency.
    pub fn degree(&self, v: VertexId) -> f64 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Upper-triangle entries of `W'` as `(i, j, w)` with `i < j`,
    /// including explicit zeros on the graph pattern.
    pub fn wprime_entries(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.num_vertices() as VertexId).flat_map(move |i| {
            let lo = self.offsets[i as usize];
            let hi = self.offsets[i as usize + 1];
            self.targets[lo..hi]
                .iter()
                .zip(&self.wprime[lo..hi])
                .filter(move |(&j, _)| j > i)
                .map(move |(&j, &w)| (i, j, w))
        })
    }

    /// All stored entries of `S` as directed `(i, j, s_ij)` triples.
    pub fn s_entries(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.num_vertices() as VertexId).flat_map(move |i| {
            let lo = self.offsets[i as usize];
            let hi = self.offsets[i as usize + 1];
            self.targets[lo..hi]
                .iter()
                .zip(&self.s_values[lo..hi])
                .map(move |(&j, &s)| (i, j, s))
        })
    }

    /// Normalized entry `S_ij`.
    pub fn s_entry(&self, i: VertexId, j: VertexId) -> f64 {
        let lo = self.offsets[i as usize];
        let hi = self.offsets[i as usize + 1];
        match self.targets[lo..hi].binary_search(&j) {
            Ok(pos) => self.s_values[lo + pos],
            Err(_) => 0.0,
        }
    }

    fn check_shape(&self, x: &SoftLabels) -> Result<()> {
        if x.num_vertices() != self.num_vertices() {
            return Err(HolsError::DimensionMismatch {
                expected: self.num_vertices(),
                got: x.num_vertices(),
            });
        }
        Ok(())
    }

    fn check_pair(&self, x: &SoftLabels, out: &SoftLabels) -> Result<()> {
        self.check_shape(x)?;
        if out.num_vertices() != x.num_vertices() || out.num_classes() != x.num_classes() {
            return Err(HolsError::DimensionMismatch {
                expected: x.num_vertices() * x.num_classes(),
                got: out.num_vertices() * out.num_classes(),
            });
        }
        Ok(())
    }

    /// `S · X` by sparse row-wise accumulation (row-parallel; bitwise
    /// independent of the worker count).
    pub fn apply(&self, x: &SoftLabels) -> Result<SoftLabels> {
        let mut out = SoftLabels::zeros(x.num_vertices(), x.num_classes());
        self.apply_to(x, &mut out)?;
        Ok(out)
    }

    /// As [`apply`], writing into a caller-provided buffer so iterative
    /// solvers can avoid per-step allocation.
    pub fn apply_to(&self, x: &SoftLabels, out: &mut SoftLabels) -> Result<()> {
        self.check_pair(x, out)?;
        out.values_mut().fill(0.0);
        self.apply_into(&self.s_values, None, x, out);
        Ok(())
    }

    /// `D'^{-1} W' · X`, the row-stochastic kernel used by clamped label
    /// propagation. Rows of zero-degree vertices stay zero.
    pub fn apply_row_stochastic(&self, x: &SoftLabels) -> Result<SoftLabels> {
        let mut out = SoftLabels::zeros(x.num_vertices(), x.num_classes());
        self.apply_row_stochastic_to(x, &mut out)?;
        Ok(out)
    }

    /// As [`apply_row_stochastic`], writing into a caller-provided buffer.
    pub fn apply_row_stochastic_to(&self, x: &SoftLabels, out: &mut SoftLabels) -> Result<()> {
        self.check_pair(x, out)?;
        out.values_mut().fill(0.0);
        self.apply_into(&self.wprime, Some(&self.inv_deg), x, out);
        Ok(())
    }

    fn apply_into(&self, vals: &[f64], row_scale: Option<&[f64]>, x: &SoftLabels, out: &mut SoftLabels) {
        let c = x.num_classes();
        let xd = x.values();
        out.values_mut()
            .par_chunks_mut(c.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                let span = self.offsets[i]..self.offsets[i + 1];
                for (&target, &v) in self.targets[span.clone()].iter().zip(&vals[span]) {
                    let j = target as usize;
                    for (slot, &xj) in row.iter_mut().zip(&xd[j * c..(j + 1) * c]) {
                        *slot += v * xj;
                    }
                }
                if let Some(scale) = row_scale {
                    for slot in row.iter_mut() {
                        *slot *= scale[i];
                    }
                }
            });
    }
}

/// Identifies a `(graph, plan)` combination for the operator cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheKey([u8; 32]);

impl CacheKey {
    pub fn new(g: &Graph, plan: &MotifPlan) -> Self {
        let mut h = Sha256::new();
        h.update(b"HOLS-WPRIME-V1");
        h.update(g.digest());
        for &(k, alpha) in plan.motifs() {
            h.update((k as u64).to_le_bytes());
            h.update(alpha.to_le_bytes());
        }
        CacheKey(h.finalize().into())
    }
}

const CACHE_MAGIC: &[u8; 8] = b"HOLSWPC1";

impl PropagationOperator {
    /// Serialize `W'` so later runs can skip re-enumeration: magic header,
    /// key digest, N, entry count, then sorted `(i, j, w)` triples, all
    /// little-endian 64-bit values.
    pub fn write_cache<W: Write>(&self, key: &CacheKey, out: &mut W) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&key.0)?;
        out.write_all(&(self.num_vertices() as u64).to_le_bytes())?;
        let count = self.wprime_entries().count() as u64;
        out.write_all(&count.to_le_bytes())?;
        for (i, j, w) in self.wprime_entries() {
            out.write_all(&(i as u64).to_le_bytes())?;
            out.write_all(&(j as u64).to_le_bytes())?;
            out.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    /// Load a cached `W'`, verifying that it was produced for `expected`.
    pub fn read_cache<R: Read>(reader: &mut R, expected: &CacheKey) -> Result<Self> {
        let mut magic = [0u8; 8];
        reader.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(HolsError::CacheMismatch("bad magic header".into()));
        }
        let mut key = [0u8; 32];
        reader.read_exact(&mut key)?;
        if key != expected.0 {
            return Err(HolsError::CacheMismatch(
                "cache was built for a different graph or motif plan".into(),
            ));
        }
        let mut word = [0u8; 8];
        reader.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        reader.read_exact(&mut word)?;
        let count = u64::from_le_bytes(word) as usize;
        let mut uppers = Vec::with_capacity(count);
        for _ in 0..count {
            reader.read_exact(&mut word)?;
            let i = u64::from_le_bytes(word);
            reader.read_exact(&mut word)?;
            let j = u64::from_le_bytes(word);
            reader.read_exact(&mut word)?;
            let w = f64::from_le_bytes(word);
            if i >= j || j >= n as u64 {
                return Err(HolsError::CacheMismatch(format!(
                    "invalid edge ({i}, {j}) for {n} vertices"
                )));
            }
            uppers.push((i as VertexId, j as VertexId, w));
        }
        let (offsets, targets, wprime) = sym_csr_from_sorted_uppers(n, &uppers)?;
        Ok(PropagationOperator::from_csr(offsets, targets, wprime))
    }
}

fn sym_csr_from_sorted_uppers(
    n: usize,
    uppers: &[(VertexId, VertexId, f64)],
) -> Result<(Vec<usize>, Vec<VertexId>, Vec<f64>)> {
    if uppers.windows(2).any(|w| (w[0].0, w[0].1) >= (w[1].0, w[1].1)) {
        return Err(HolsError::CacheMismatch(
            "cache entries are not strictly sorted".into(),
        ));
    }
    let mut counts = vec![0usize; n];
    for &(u, v, _) in uppers {
        counts[u as usize] += 1;
        counts[v as usize] += 1;
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let mut cursor = offsets[..n].to_vec();
    let mut targets = vec![0 as VertexId; uppers.len() * 2];
    let mut vals = vec![0.0f64; uppers.len() * 2];
    for &(u, v, w) in uppers {
        targets[cursor[u as usize]] = v;
        vals[cursor[u as usize]] = w;
        cursor[u as usize] += 1;
        targets[cursor[v as usize]] = u;
        vals[cursor[v as usize]] = w;
        cursor[v as usize] += 1;
    }
    Ok((offsets, targets, vals))
}
