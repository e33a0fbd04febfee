//! Undirected weighted graphs in compressed sparse row form, plus partial
//! vertex labelings and the text loaders for both.
//!
//! Loading sanitizes the input: self-loops are dropped, duplicate and
//! reciprocal edges are merged (keeping the maximum weight on conflict),
//! and neighbor lists end up sorted by vertex id.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use sha2::{Digest, Sha256};

use crate::error::{HolsError, Result};

/// Internal contiguous vertex id.
pub type VertexId = u32;
/// Zero-based class id.
pub type ClassId = usize;

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListOptions {
    /// When set, lines may carry a third token with the edge weight.
    /// Otherwise a third token is a parse error and all edges get weight 1.
    pub weighted: bool,
}

/// Immutable undirected weighted graph with contiguous vertex ids `0..N`.
///
/// The adjacency is symmetric, has no self-loops and no duplicate edges;
/// each neighbor list is sorted by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    num_edges: usize,
}

impl Graph {
    /// Build a graph from raw `(u, v, weight)` triples after sanitization.
    ///
    /// Self-loops are dropped and duplicates merged keeping the maximum
    /// weight. Endpoints must be `< num_vertices`; weights must be finite
    /// and non-negative.
    pub fn from_edges(num_vertices: usize, edges: &[(VertexId, VertexId, f64)]) -> Result<Self> {
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x as usize >= num_vertices {
                    return Err(HolsError::OutOfRange {
                        vertex: x as usize,
                        num_vertices,
                    });
                }
            }
            if !w.is_finite() || w < 0.0 {
                return Err(HolsError::Validation(format!(
                    "edge weight must be finite and non-negative, got {w}"
                )));
            }
        }
        Ok(Self::build(num_vertices, edges.to_vec()))
    }

    /// Convenience builder with all edge weights set to 1.
    pub fn from_unit_edges(num_vertices: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let triples: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(num_vertices, &triples)
    }

    /// `triples` may contain self-loops and duplicates in any orientation.
    fn build(num_vertices: usize, triples: Vec<(VertexId, VertexId, f64)>) -> Self {
        let mut uppers: Vec<(VertexId, VertexId, f64)> = triples
            .into_iter()
            .filter(|&(u, v, _)| u != v)
            .map(|(u, v, w)| (u.min(v), u.max(v), w))
            .collect();
        uppers.sort_unstable_by_key(|&(u, v, _)| (u, v));
        // Merge duplicates, keeping the maximum weight.
        uppers.dedup_by(|next, kept| {
            if next.0 == kept.0 && next.1 == kept.1 {
                kept.2 = kept.2.max(next.2);
                true
            } else {
                false
            }
        });

        let num_edges = uppers.len();
        let mut counts = vec![0usize; num_vertices];
        for &(u, v, _) in &uppers {
            counts[u as usize] += 1;
            counts[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(num_vertices + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..num_vertices].to_vec();
        let mut targets = vec![0 as VertexId; 2 * num_edges];
        let mut weights = vec![0.0f64; 2 * num_edges];
        // A single pass over the sorted upper pairs leaves each row sorted:
        // row x first receives its smaller neighbors (while x occurs as v),
        // then its larger neighbors (while x occurs as u), both ascending.
        for &(u, v, w) in &uppers {
            targets[cursor[u as usize]] = v;
            weights[cursor[u as usize]] = w;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            weights[cursor[v as usize]] = w;
            cursor[v as usize] += 1;
        }
        Graph {
            offsets,
            targets,
            weights,
            num_edges,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges, each counted once.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Neighbor ids of `v`, sorted ascending.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Edge weights aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_weights(&self, v: VertexId) -> &[f64] {
        &self.weights[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Number of incident edges of `v` (unweighted degree).
    pub fn neighbor_count(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Weighted degree: sum of incident edge weights.
    pub fn degree(&self, v: VertexId) -> Result<f64> {
        if (v as usize) >= self.num_vertices() {
            return Err(HolsError::OutOfRange {
                vertex: v as usize,
                num_vertices: self.num_vertices(),
            });
        }
        Ok(self.neighbor_weights(v).iter().sum())
    }

    /// Weight of edge `{u, v}`, or `None` if absent.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let row = self.neighbors(u);
        row.binary_search(&v)
            .ok()
            .map(|i| self.neighbor_weights(u)[i])
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Iterate undirected edges as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.num_vertices() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .filter(move |(&v, _)| v > u)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// SHA-256 digest of the graph structure, used for cache keys and
    /// report metadata.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"HOLS-GRAPH-V1");
        h.update((self.num_vertices() as u64).to_le_bytes());
        h.update((self.num_edges as u64).to_le_bytes());
        for (u, v, w) in self.edges() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
            h.update(w.to_le_bytes());
        }
        h.finalize().into()
    }

    pub fn digest_hex(&self) -> String {
        self.digest().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Serialize in the edge-list format understood by [`load_edge_list`].
    ///
    /// Every vertex is declared up front as a single-token line in internal
    /// order, so reloading assigns the same internal ids and reproduces the
    /// graph exactly — including isolated vertices.
    pub fn write_edge_list<W: Write>(&self, map: &VertexIdMap, out: &mut W) -> io::Result<()> {
        for v in 0..self.num_vertices() as VertexId {
            writeln!(out, "{}", map.external(v))?;
        }
        for (u, v, w) in self.edges() {
            writeln!(out, "{} {} {}", map.external(u), map.external(v), w)?;
        }
        Ok(())
    }
}

/// Bijection between arbitrary external vertex ids and internal contiguous ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VertexIdMap {
    to_external: Vec<u64>,
    to_internal: HashMap<u64, VertexId>,
}

impl VertexIdMap {
    /// Identity map over `0..n`, for graphs built programmatically.
    pub fn identity(n: usize) -> Self {
        let to_external: Vec<u64> = (0..n as u64).collect();
        let to_internal = to_external.iter().map(|&e| (e, e as VertexId)).collect();
        VertexIdMap {
            to_external,
            to_internal,
        }
    }

    /// Intern `external`, assigning the next free internal id on first sight.
    fn intern(&mut self, external: u64) -> VertexId {
        if let Some(&id) = self.to_internal.get(&external) {
            return id;
        }
        let id = self.to_external.len() as VertexId;
        self.to_external.push(external);
        self.to_internal.insert(external, id);
        id
    }

    pub fn len(&self) -> usize {
        self.to_external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_external.is_empty()
    }

    pub fn external(&self, v: VertexId) -> u64 {
        self.to_external[v as usize]
    }

    pub fn internal(&self, external: u64) -> Option<VertexId> {
        self.to_internal.get(&external).copied()
    }
}

/// Parse an edge list: one `u v [w]` edge per line, `#` comment lines,
/// single-token lines declaring isolated vertices.
///
/// Internal ids are assigned in order of first appearance. Sanitization
/// follows the `Graph` invariants: self-loops dropped, duplicates merged
/// keeping the maximum weight, unweighted edges given weight 1.
pub fn load_edge_list<R: BufRead>(
    reader: R,
    options: EdgeListOptions,
) -> Result<(Graph, VertexIdMap)> {
    let mut map = VertexIdMap::default();
    let mut triples: Vec<(VertexId, VertexId, f64)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_id = |tok: &str| -> Result<u64> {
            tok.parse::<u64>().map_err(|_| HolsError::Parse {
                line: line_no,
                message: format!("expected non-negative integer vertex id, got {tok:?}"),
            })
        };
        match tokens.len() {
            1 => {
                map.intern(parse_id(tokens[0])?);
            }
            2 | 3 => {
                if tokens.len() == 3 && !options.weighted {
                    return Err(HolsError::Parse {
                        line: line_no,
                        message: "unexpected weight token on unweighted input".into(),
                    });
                }
                let u = map.intern(parse_id(tokens[0])?);
                let v = map.intern(parse_id(tokens[1])?);
                let w = if tokens.len() == 3 {
                    let w: f64 = tokens[2].parse().map_err(|_| HolsError::Parse {
                        line: line_no,
                        message: format!("expected edge weight, got {:?}", tokens[2]),
                    })?;
                    if !w.is_finite() || w < 0.0 {
                        return Err(HolsError::Validation(format!(
                            "edge weight at line {line_no} must be finite and non-negative, got {w}"
                        )));
                    }
                    w
                } else {
                    1.0
                };
                triples.push((u, v, w));
            }
            n => {
                return Err(HolsError::Parse {
                    line: line_no,
                    message: format!("expected 1 to 3 tokens, got {n}"),
                });
            }
        }
    }

    let graph = Graph::build(map.len(), triples);
    Ok((graph, map))
}

/// Class labels for some or all vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssignment {
    num_classes: usize,
    labels: Vec<Option<ClassId>>,
}

impl LabelAssignment {
    /// A fully unlabeled assignment over `num_vertices` vertices.
    pub fn new(num_vertices: usize, num_classes: usize) -> Self {
        LabelAssignment {
            num_classes,
            labels: vec![None; num_vertices],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn get(&self, v: VertexId) -> Option<ClassId> {
        self.labels[v as usize]
    }

    /// Assign class `c` to vertex `v`, replacing any previous label.
    pub fn set(&mut self, v: VertexId, c: ClassId) -> Result<()> {
        if v as usize >= self.labels.len() {
            return Err(HolsError::OutOfRange {
                vertex: v as usize,
                num_vertices: self.labels.len(),
            });
        }
        if c >= self.num_classes {
            return Err(HolsError::Validation(format!(
                "class id {c} out of range for {} classes",
                self.num_classes
            )));
        }
        self.labels[v as usize] = Some(c);
        Ok(())
    }

    pub fn is_total(&self) -> bool {
        self.labels.iter().all(|l| l.is_some())
    }

    /// Labeled vertices with their classes, ascending by vertex id.
    pub fn labeled(&self) -> impl Iterator<Item = (VertexId, ClassId)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|c| (v as VertexId, c)))
    }

    /// Number of labeled vertices per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for (_, c) in self.labeled() {
            counts[c] += 1;
        }
        counts
    }

    /// Supervision contract: every class must have at least one labeled vertex.
    pub fn require_all_classes_labeled(&self) -> Result<()> {
        let counts = self.class_counts();
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(HolsError::Validation(format!(
                "class {c} has no labeled vertex; supervision requires at least one per class"
            )));
        }
        Ok(())
    }
}

/// Parse a label file: one `vertex_id class_id` pair per line, `#` comments.
///
/// Vertex ids are external ids and must exist in `map`; vertices that are
/// not in the graph are rejected rather than added. The number of classes
/// is inferred as `1 + max class id` unless `declared_classes` is given.
/// `one_based` shifts external class ids down by one.
pub fn load_labels<R: BufRead>(
    reader: R,
    map: &VertexIdMap,
    declared_classes: Option<usize>,
    one_based: bool,
) -> Result<LabelAssignment> {
    let mut seen: Vec<Option<ClassId>> = vec![None; map.len()];
    let mut max_class: Option<ClassId> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(HolsError::Parse {
                line: line_no,
                message: format!("expected `vertex_id class_id`, got {} tokens", tokens.len()),
            });
        }
        let ext: u64 = tokens[0].parse().map_err(|_| HolsError::Parse {
            line: line_no,
            message: format!("expected vertex id, got {:?}", tokens[0]),
        })?;
        let raw_class: u64 = tokens[1].parse().map_err(|_| HolsError::Parse {
            line: line_no,
            message: format!("expected class id, got {:?}", tokens[1]),
        })?;
        let class = if one_based {
            if raw_class == 0 {
                return Err(HolsError::Validation(format!(
                    "class id 0 at line {line_no} is invalid for one-based class ids"
                )));
            }
            (raw_class - 1) as ClassId
        } else {
            raw_class as ClassId
        };
        let v = map
            .internal(ext)
            .ok_or(HolsError::UnknownVertex { id: ext })?;
        match seen[v as usize] {
            Some(prev) if prev != class => {
                return Err(HolsError::LabelCollision {
                    id: ext,
                    first: prev,
                    second: class,
                });
            }
            _ => seen[v as usize] = Some(class),
        }
        max_class = Some(max_class.map_or(class, |m| m.max(class)));
    }

    let inferred = max_class.map_or(0, |m| m + 1);
    let num_classes = match declared_classes {
        Some(c) => {
            if c < inferred {
                return Err(HolsError::Validation(format!(
                    "declared {c} classes but the label file uses class id {}",
                    inferred - 1
                )));
            }
            c
        }
        None => inferred,
    };

    let mut labels = LabelAssignment::new(map.len(), num_classes);
    for (v, class) in seen.iter().enumerate() {
        if let Some(c) = class {
            labels.set(v as VertexId, *c)?;
        }
    }
    Ok(labels)
}
