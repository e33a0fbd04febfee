//! Label configurations of k-cliques and the label-shuffle null model.
//!
//! A clique's label configuration is the multiset of class multiplicities
//! among its vertices — `"3"` for a monochromatic triangle, `"2-1"` for a
//! majority pair, `"1-1-1"` for all-distinct. Comparing the observed
//! configuration distribution against repeated uniform permutations of the
//! label vector (which fix both the graph and the exact label histogram)
//! quantifies how much more homogeneous real cliques are than chance.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{HolsError, Result};
use crate::graph::{ClassId, Graph, LabelAssignment};
use crate::motif;

/// Default number of shuffle repetitions; the null distribution aggregates
/// occurrences over all of them.
pub const DEFAULT_SHUFFLE_REPS: usize = 20;

/// Class multiplicities of one clique occurrence, sorted descending.
///
/// Invariant under permuting the clique's vertices and under renaming
/// classes, so it is a stable key for tallying.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelConfiguration {
    parts: Vec<usize>,
}

impl LabelConfiguration {
    /// Build from raw multiplicities; zero parts are rejected, order is
    /// normalized to descending.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(HolsError::Validation(
                "label configuration needs at least one nonzero part".into(),
            ));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(LabelConfiguration { parts })
    }

    /// Descending multiplicities.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The clique size this configuration belongs to.
    pub fn clique_size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// True when every vertex of the clique carries the same class.
    pub fn is_monochromatic(&self) -> bool {
        self.parts.len() == 1
    }
}

impl fmt::Display for LabelConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                write!(f, "-")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for LabelConfiguration {
    type Err = HolsError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split('-')
            .map(|t| {
                t.parse::<usize>().map_err(|_| {
                    HolsError::Validation(format!("bad configuration part {t:?} in {s:?}"))
                })
            })
            .collect::<Result<_>>()?;
        LabelConfiguration::new(parts)
    }
}

/// The configuration of one tuple of class ids.
pub fn configuration_of(classes: &[ClassId]) -> LabelConfiguration {
    assert!(!classes.is_empty(), "configuration of an empty tuple");
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    let mut parts = Vec::new();
    let mut run = 1usize;
    for i in 1..sorted.len() {
        if sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            parts.push(run);
            run = 1;
        }
    }
    parts.push(run);
    parts.sort_unstable_by(|a, b| b.cmp(a));
    LabelConfiguration { parts }
}

/// Tally of clique occurrences by label configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDistribution {
    k: usize,
    counts: BTreeMap<LabelConfiguration, u64>,
    total: u64,
}

impl ConfigDistribution {
    /// Build from explicit counts; every key must be a partition of `k`.
    pub fn from_counts<I>(k: usize, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LabelConfiguration, u64)>,
    {
        let mut map = BTreeMap::new();
        let mut total = 0u64;
        for (cfg, n) in counts {
            if cfg.clique_size() != k {
                return Err(HolsError::Validation(format!(
                    "configuration {cfg} is not a partition of {k}"
                )));
            }
            total += n;
            *map.entry(cfg).or_insert(0) += n;
        }
        Ok(ConfigDistribution {
            k,
            counts: map,
            total,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Total occurrences tallied (cliques × repetitions for the null).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, cfg: &LabelConfiguration) -> u64 {
        self.counts.get(cfg).copied().unwrap_or(0)
    }

    pub fn probability(&self, cfg: &LabelConfiguration) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(cfg) as f64 / self.total as f64
        }
    }

    /// `(configuration, count)` pairs, ascending by configuration key.
    pub fn counts(&self) -> impl Iterator<Item = (&LabelConfiguration, u64)> + '_ {
        self.counts.iter().map(|(c, &n)| (c, n))
    }
}

fn total_label_vector(labels: &LabelAssignment) -> Result<Vec<ClassId>> {
    (0..labels.num_vertices())
        .map(|v| {
            labels.get(v as u32).ok_or_else(|| {
                HolsError::Validation(format!(
                    "vertex {v} is unlabeled; configuration analysis needs a total labeling"
                ))
            })
        })
        .collect()
}

fn tally(g: &Graph, ord: &motif::CoreOrdering, classes: &[ClassId], k: usize) -> Result<(BTreeMap<LabelConfiguration, u64>, u64)> {
    let mut counts = BTreeMap::new();
    let mut scratch: Vec<ClassId> = Vec::with_capacity(k);
    let total = motif::enumerate_cliques_with(g, ord, k, |vs, _| {
        scratch.clear();
        scratch.extend(vs.iter().map(|&v| classes[v as usize]));
        *counts.entry(configuration_of(&scratch)).or_insert(0u64) += 1;
    })?;
    Ok((counts, total))
}

/// Stream all k-cliques and tally their observed label configurations.
/// Requires a total labeling.
pub fn observed_distribution(
    g: &Graph,
    labels: &LabelAssignment,
    k: usize,
) -> Result<ConfigDistribution> {
    check_labels_cover(g, labels)?;
    let classes = total_label_vector(labels)?;
    let ord = motif::core_ordering(g);
    let (counts, total) = tally(g, &ord, &classes, k)?;
    Ok(ConfigDistribution { k, counts, total })
}

/// The shuffle null: repeatedly permute the label vector uniformly at
/// random (exactly preserving the label histogram), tally configurations of
/// the unchanged cliques, and aggregate over all repetitions.
///
/// Repetition `r` draws from an RNG stream derived from `(seed, r)`, so
/// results are bitwise reproducible for a given seed regardless of how the
/// repetitions are scheduled.
pub fn shuffled_distribution(
    g: &Graph,
    labels: &LabelAssignment,
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<ConfigDistribution> {
    if reps == 0 {
        return Err(HolsError::Validation(
            "shuffle null needs at least one repetition".into(),
        ));
    }
    check_labels_cover(g, labels)?;
    let base = total_label_vector(labels)?;
    let ord = motif::core_ordering(g);

    let per_rep: Vec<(BTreeMap<LabelConfiguration, u64>, u64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let shuffled = permuted_labels(&base, seed, rep as u64);
            tally(g, &ord, &shuffled, k)
        })
        .collect::<Result<_>>()?;

    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for (rep_counts, rep_total) in per_rep {
        for (cfg, n) in rep_counts {
            *counts.entry(cfg).or_insert(0u64) += n;
        }
        total += rep_total;
    }
    Ok(ConfigDistribution { k, counts, total })
}

/// One uniform permutation of the base label vector, drawn from the
/// repetition's dedicated RNG stream.
fn permuted_labels(base: &[ClassId], seed: u64, rep: u64) -> Vec<ClassId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let mut labels = base.to_vec();
    labels.shuffle(&mut rng);
    labels
}

fn check_labels_cover(g: &Graph, labels: &LabelAssignment) -> Result<()> {
    if labels.num_vertices() != g.num_vertices() {
        return Err(HolsError::DimensionMismatch {
            expected: g.num_vertices(),
            got: labels.num_vertices(),
        });
    }
    Ok(())
}

/// Observed-over-null ratio for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    /// Never observed in the real labeling.
    Absent,
    /// Observed, but never produced by the null.
    Infinite,
    Finite(f64),
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Absent => write!(f, "absent"),
            Ratio::Infinite => write!(f, "inf"),
            Ratio::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// One row of the homogeneity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRatio {
    pub configuration: LabelConfiguration,
    pub observed_count: u64,
    pub observed_prob: f64,
    pub null_prob: f64,
    pub ratio: Ratio,
}

/// Observed-vs-null comparison across all configurations that occur in
/// either distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    k: usize,
    rows: Vec<ConfigRatio>,
}

/// Compare an observed distribution against its shuffle null. Rows are
/// ordered most homogeneous first (`"3"`, then `"2-1"`, then `"1-1-1"`).
pub fn homogeneity_report(
    obs: &ConfigDistribution,
    null: &ConfigDistribution,
) -> Result<HomogeneityReport> {
    if obs.k() != null.k() {
        return Err(HolsError::Validation(format!(
            "cannot compare clique sizes {} and {}",
            obs.k(),
            null.k()
        )));
    }
    let mut keys: Vec<&LabelConfiguration> = obs
        .counts
        .keys()
        .chain(null.counts.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    keys.sort_by(|a, b| b.cmp(a));

    let rows = keys
        .into_iter()
        .map(|cfg| {
            let observed_count = obs.count(cfg);
            let observed_prob = obs.probability(cfg);
            let null_prob = null.probability(cfg);
            let ratio = if observed_count == 0 {
                Ratio::Absent
            } else if null_prob == 0.0 {
                Ratio::Infinite
            } else {
                Ratio::Finite(observed_prob / null_prob)
            };
            ConfigRatio {
                configuration: cfg.clone(),
                observed_count,
                observed_prob,
                null_prob,
                ratio,
            }
        })
        .collect();
    Ok(HomogeneityReport { k: obs.k(), rows })
}

impl HomogeneityReport {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[ConfigRatio] {
        &self.rows
    }

    pub fn row(&self, cfg: &LabelConfiguration) -> Option<&ConfigRatio> {
        self.rows.iter().find(|r| &r.configuration == cfg)
    }

    /// CSV table: `configuration,observed_count,observed_prob,null_prob,ratio`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "configuration,observed_count,observed_prob,null_prob,ratio")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.configuration, r.observed_count, r.observed_prob, r.null_prob, r.ratio
            )?;
        }
        Ok(())
    }

    /// JSON blob with provenance metadata, suitable for regenerating
    /// bar-chart style figures.
    pub fn to_json(&self, graph_digest: &str, reps: usize, seed: u64) -> serde_json::Value {
        json!({
            "graph_digest": graph_digest,
            "k": self.k,
            "reps": reps,
            "seed": seed,
            "rows": self.rows.iter().map(|r| {
                json!({
                    "configuration": r.configuration.to_string(),
                    "observed_count": r.observed_count,
                    "observed_prob": r.observed_prob,
                    "null_prob": r.null_prob,
                    "ratio": r.ratio.to_string(),
                })
            }).collect::<Vec<_>>(),
        })
    }
}

/// Number of distinct label configurations possible for k-cliques under `c`
/// classes: integer partitions of `k` into at most `c` parts.
pub fn num_possible_configurations(k: usize, c: usize) -> u64 {
    // partitions with at most c parts = partitions with largest part <= c
    let mut table = vec![0u64; k + 1];
    table[0] = 1;
    for part in 1..=c.min(k) {
        for n in part..=k {
            table[n] += table[n - part];
        }
    }
    table[k]
}
