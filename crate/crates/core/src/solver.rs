//! Iterative label spreading over the motif-weighted operator, its dense
//! closed-form counterpart, and the clamped label-propagation baseline.
//!
//! The spreading update is `X ← η·S·X + (1−η)·Y`; because `η·S` has spectral
//! norm at most `η < 1`, the iteration contracts to a unique fixed point
//! `X = (1−η)(I − ηS)^{-1}Y` regardless of the starting point.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{HolsError, Result};
use crate::graph::{ClassId, LabelAssignment, VertexId, VertexIdMap};
use crate::participation::PropagationOperator;

/// Refuse dense closed-form solves above this many vertices unless the
/// caller raises the cap explicitly; the factorization is cubic in N.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Row-major `N × C` matrix of per-class scores. Holds both priors `Y`
/// (one-hot rows for labeled vertices, zero rows otherwise) and inferred
/// soft labels `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabels {
    num_vertices: usize,
    num_classes: usize,
    values: Vec<f64>,
}

impl SoftLabels {
    pub fn zeros(num_vertices: usize, num_classes: usize) -> Self {
        SoftLabels {
            num_vertices,
            num_classes,
            values: vec![0.0; num_vertices * num_classes],
        }
    }

    /// The prior `Y`: a one-hot row per labeled vertex, zero rows elsewhere.
    pub fn from_assignment(labels: &LabelAssignment) -> Self {
        let mut y = SoftLabels::zeros(labels.num_vertices(), labels.num_classes());
        for (v, c) in labels.labeled() {
            y.set(v, c, 1.0);
        }
        y
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, v: VertexId, c: ClassId) -> f64 {
        self.values[v as usize * self.num_classes + c]
    }

    pub fn set(&mut self, v: VertexId, c: ClassId, value: f64) {
        self.values[v as usize * self.num_classes + c] = value;
    }

    pub fn row(&self, v: VertexId) -> &[f64] {
        let lo = v as usize * self.num_classes;
        &self.values[lo..lo + self.num_classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Largest absolute entry-wise difference (the solver's residual metric).
    pub fn max_abs_diff(&self, other: &SoftLabels) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// A valid prior has rows that are either all-zero or one-hot.
    fn check_prior(&self) -> Result<()> {
        for v in 0..self.num_vertices {
            let row = &self.values[v * self.num_classes..(v + 1) * self.num_classes];
            let ones = row.iter().filter(|&&x| x == 1.0).count();
            let zeros = row.iter().filter(|&&x| x == 0.0).count();
            if !(zeros == self.num_classes || (ones == 1 && zeros == self.num_classes - 1)) {
                return Err(HolsError::Validation(format!(
                    "prior row for vertex {v} is neither zero nor one-hot"
                )));
            }
        }
        Ok(())
    }

    /// CSV dump: one row per vertex (external id first, then one score per
    /// class), with a header line.
    pub fn write_csv<W: Write>(&self, map: &VertexIdMap, out: &mut W) -> Result<()> {
        write!(out, "vertex")?;
        for c in 0..self.num_classes {
            write!(out, ",class_{c}")?;
        }
        writeln!(out)?;
        for v in 0..self.num_vertices as VertexId {
            write!(out, "{}", map.external(v))?;
            for c in 0..self.num_classes {
                write!(out, ",{}", self.get(v, c))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Iteration controls for the spreading and propagation loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Graph-versus-prior tradeoff, strictly inside `(0, 1)`.
    pub eta: f64,
    /// Convergence precision: stop once the residual drops below this.
    pub epsilon: f64,
    /// Iteration budget.
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eta: 0.5,
            epsilon: 1e-6,
            max_iters: 500,
        }
    }
}

impl SolverConfig {
    /// Rejects parameters outside their documented ranges, so callers that
    /// accept user input can fail before any heavy work starts.
    pub fn validate(&self) -> Result<()> {
        validate_eta(self.eta)?;
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(HolsError::Validation(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 {
            return Err(HolsError::Validation(
                "iteration budget must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn validate_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(HolsError::Validation(format!(
            "eta must lie strictly inside (0, 1), got {eta}"
        )));
    }
    Ok(())
}

/// Terminal state of an iterative solve.
#[derive(Debug, Clone, Serialize)]
pub struct SpreadResult {
    /// Soft labels at termination.
    #[serde(skip)]
    pub soft: SoftLabels,
    /// Iterations actually performed.
    pub iterations: usize,
    /// Max absolute entry change in the last iteration.
    pub final_residual: f64,
    /// Whether `final_residual < epsilon` was reached within the budget.
    pub converged: bool,
}

fn check_shapes(op: &PropagationOperator, prior: &SoftLabels, x0: Option<&SoftLabels>) -> Result<()> {
    if prior.num_vertices() != op.num_vertices() {
        return Err(HolsError::DimensionMismatch {
            expected: op.num_vertices(),
            got: prior.num_vertices(),
        });
    }
    if let Some(x0) = x0 {
        if x0.num_vertices() != prior.num_vertices() || x0.num_classes() != prior.num_classes() {
            return Err(HolsError::DimensionMismatch {
                expected: prior.num_vertices() * prior.num_classes(),
                got: x0.num_vertices() * x0.num_classes(),
            });
        }
    }
    Ok(())
}

/// Spread labels by iterating `X ← η·S·X + (1−η)·Y` until the residual
/// drops below `cfg.epsilon` or the budget runs out. `x0` defaults to the
/// prior itself; by the contraction property the fixed point is the same
/// for any start.
pub fn spread(
    op: &PropagationOperator,
    prior: &SoftLabels,
    cfg: &SolverConfig,
    x0: Option<&SoftLabels>,
) -> Result<SpreadResult> {
    spread_traced(op, prior, cfg, x0).map(|(result, _)| result)
}

/// As [`spread`], also returning the residual after every iteration (used
/// to observe the contraction rate).
pub fn spread_traced(
    op: &PropagationOperator,
    prior: &SoftLabels,
    cfg: &SolverConfig,
    x0: Option<&SoftLabels>,
) -> Result<(SpreadResult, Vec<f64>)> {
    cfg.validate()?;
    check_shapes(op, prior, x0)?;
    prior.check_prior()?;

    let mut x = x0.cloned().unwrap_or_else(|| prior.clone());
    let mut next = SoftLabels::zeros(prior.num_vertices(), prior.num_classes());
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        op.apply_to(&x, &mut next)?;
        let mut finite = true;
        residual = 0.0;
        for (nv, (&xv, &yv)) in next
            .values_mut()
            .iter_mut()
            .zip(x.values().iter().zip(prior.values()))
        {
            *nv = cfg.eta * *nv + (1.0 - cfg.eta) * yv;
            finite &= nv.is_finite();
            residual = residual.max((*nv - xv).abs());
        }
        if !finite {
            return Err(HolsError::NonFinite { iteration: t });
        }
        std::mem::swap(&mut x, &mut next);
        trace.push(residual);
        iterations = t;
        if residual < cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok((
        SpreadResult {
            soft: x,
            iterations,
            final_residual: residual,
            converged,
        },
        trace,
    ))
}

/// Solve the fixed point `(I − ηS)X = (1−η)Y` directly by dense LU
/// factorization. Desk-scale oracle for [`spread`]; refuses graphs above
/// [`DEFAULT_DENSE_CAP`] vertices.
pub fn closed_form(op: &PropagationOperator, prior: &SoftLabels, eta: f64) -> Result<SoftLabels> {
    closed_form_with_cap(op, prior, eta, DEFAULT_DENSE_CAP)
}

/// As [`closed_form`] with an explicit vertex cap.
pub fn closed_form_with_cap(
    op: &PropagationOperator,
    prior: &SoftLabels,
    eta: f64,
    cap: usize,
) -> Result<SoftLabels> {
    validate_eta(eta)?;
    check_shapes(op, prior, None)?;
    prior.check_prior()?;
    let n = op.num_vertices();
    let c = prior.num_classes();
    if n > cap {
        return Err(HolsError::TooLargeForDense {
            num_vertices: n,
            cap,
        });
    }
    if n == 0 {
        return Ok(SoftLabels::zeros(0, c));
    }

    let mut a = DMatrix::<f64>::identity(n, n);
    for (i, j, s) in op.s_entries() {
        a[(i as usize, j as usize)] -= eta * s;
    }
    let y = DMatrix::from_fn(n, c, |i, j| prior.get(i as VertexId, j));
    let solved = a.lu().solve(&y).ok_or_else(|| {
        HolsError::Validation("dense system unexpectedly singular".into())
    })?;

    let mut x = SoftLabels::zeros(n, c);
    for i in 0..n {
        for j in 0..c {
            x.set(i as VertexId, j, (1.0 - eta) * solved[(i, j)]);
        }
    }
    Ok(x)
}

/// Clamped label propagation on the same combined adjacency: iterate
/// `X ← D'^{-1}·W'·X`, then reset the rows of `labeled` vertices to their
/// prior, until the residual drops below `cfg.epsilon`.
pub fn label_propagation(
    op: &PropagationOperator,
    prior: &SoftLabels,
    labeled: &[VertexId],
    cfg: &SolverConfig,
) -> Result<SpreadResult> {
    cfg.validate()?;
    check_shapes(op, prior, None)?;
    prior.check_prior()?;
    if labeled.is_empty() {
        return Err(HolsError::Validation(
            "label propagation needs at least one labeled vertex".into(),
        ));
    }

    let c = prior.num_classes();
    let mut x = prior.clone();
    let mut next = SoftLabels::zeros(prior.num_vertices(), c);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        op.apply_row_stochastic_to(&x, &mut next)?;
        for &v in labeled {
            let lo = v as usize * c;
            next.values_mut()[lo..lo + c].copy_from_slice(prior.row(v));
        }
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(HolsError::NonFinite { iteration: t });
        }
        residual = next.max_abs_diff(&x);
        std::mem::swap(&mut x, &mut next);
        iterations = t;
        if residual < cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok(SpreadResult {
        soft: x,
        iterations,
        final_residual: residual,
        converged,
    })
}

/// A hardened labeling with its tie-break diagnostics.
#[derive(Debug, Clone)]
pub struct HardenOutcome {
    /// Total assignment: argmax class per vertex.
    pub labels: LabelAssignment,
    /// Vertices whose maximum score was shared by several classes.
    pub tied: Vec<VertexId>,
    /// Vertices whose row was entirely zero (no signal reached them).
    pub zero_rows: Vec<VertexId>,
}

/// Per-row argmax. Ties and all-zero rows resolve to the lowest class index
/// and are reported separately; `overrides`, when given, pins labeled
/// vertices to their known classes.
pub fn harden(x: &SoftLabels, overrides: Option<&LabelAssignment>) -> Result<HardenOutcome> {
    let c = x.num_classes();
    if c == 0 {
        return Err(HolsError::Validation(
            "cannot harden scores over zero classes".into(),
        ));
    }
    if let Some(known) = overrides {
        if known.num_vertices() != x.num_vertices() {
            return Err(HolsError::DimensionMismatch {
                expected: x.num_vertices(),
                got: known.num_vertices(),
            });
        }
    }

    let mut labels = LabelAssignment::new(x.num_vertices(), c);
    let mut tied = Vec::new();
    let mut zero_rows = Vec::new();
    for v in 0..x.num_vertices() as VertexId {
        if let Some(known) = overrides.and_then(|k| k.get(v)) {
            labels.set(v, known)?;
            continue;
        }
        let row = x.row(v);
        let mut best = 0usize;
        for (idx, &score) in row.iter().enumerate() {
            if score > row[best] {
                best = idx;
            }
        }
        if row.iter().all(|&s| s == 0.0) {
            zero_rows.push(v);
        } else if row.iter().filter(|&&s| s == row[best]).count() > 1 {
            tied.push(v);
        }
        labels.set(v, best)?;
    }
    Ok(HardenOutcome {
        labels,
        tied,
        zero_rows,
    })
}
