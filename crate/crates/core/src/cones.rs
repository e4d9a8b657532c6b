//! Verification of cone conditions over the enclosure graph.
//!
//! For every edge (V, W) the interval matrix
//! `M = C_W [Df(V)] [C_V^{-1}]` is formed and
//! `A = M^T Q M - Q` is tested for positive definiteness by interval
//! Cholesky. An empty unverified set proves strong hyperbolicity of the
//! map on the cubical set with cones, hence uniform hyperbolicity on the
//! maximal invariant set inside the support. Certified expansion constants
//! can then be extracted by bisection on the shifted form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::GridSpec;
use crate::digraph::DiGraph;
use crate::dynsys::MapSystem;
use crate::frames::FrameAssignment;
use crate::interval::{pd_margin, Interval, IntervalMatrix};
use crate::{par_map, ExecMode};

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("vertex {0} has no coordinate frame")]
    MissingFrame(u32),
    #[error("signature dimension {sig} does not match map dimension {map}")]
    DimensionMismatch { sig: usize, map: usize },
    #[error("no verifiable expansion rate above 1 (cone check passed only through rounding slack)")]
    NoExpansionMargin,
}

/// The diagonal signature form `Q = diag(I_u, -I_s)`: `u` expanding and
/// `s` contracting directions. The frames, not Q, carry all geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub u: usize,
    pub s: usize,
}

impl QuadraticForm {
    pub fn new(u: usize, s: usize) -> Self {
        QuadraticForm { u, s }
    }

    pub fn dim(&self) -> usize {
        self.u + self.s
    }

    /// `Q(v) = |v_+|^2 - |v_-|^2` in floats (heuristic checks only).
    pub fn value(&self, v: &[f64]) -> f64 {
        let plus: f64 = v[..self.u].iter().map(|x| x * x).sum();
        let minus: f64 = v[self.u..].iter().map(|x| x * x).sum();
        plus - minus
    }

    /// `Q * M`: negate the rows of the contracting block. Exact.
    fn apply_left(&self, m: &IntervalMatrix) -> IntervalMatrix {
        let mut out = m.clone();
        for i in self.u..self.dim() {
            for j in 0..m.ncols() {
                out[(i, j)] = -out[(i, j)];
            }
        }
        out
    }

    /// `M^T Q M - lambda Q` as an interval matrix.
    fn shifted_form(&self, m: &IntervalMatrix, lambda: Interval) -> IntervalMatrix {
        let mut a = &m.transpose() * &self.apply_left(m);
        for i in 0..self.dim() {
            let sign = if i < self.u { 1.0 } else { -1.0 };
            a[(i, i)] = a[(i, i)] - lambda * Interval::point(sign);
        }
        a
    }
}

/// Result of a cone-condition sweep. `unverified` is empty exactly when
/// strong hyperbolicity was established on every edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeReport {
    pub vertices: usize,
    pub edges: usize,
    /// Source vertices of failed edges, deduplicated and sorted.
    pub unverified: Vec<u32>,
    /// The failing edges themselves.
    pub unverified_edges: Vec<(u32, u32)>,
    /// Smallest verified Cholesky pivot over all passing edges.
    pub min_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<CertifiedRates>,
}

impl ConeReport {
    pub fn all_verified(&self) -> bool {
        self.unverified.is_empty()
    }
}

/// Certified hyperbolicity rate constants extracted from a verified cone
/// sweep. All bounds are rounded in the safe direction: `lambda_bar`,
/// `lambda`, `l_bound`, `r_const` and `c` are lower bounds, `d1`/`d2` are
/// upper bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertifiedRates {
    /// Largest verified shift: `M^T Q M - lambda_bar Q` positive definite
    /// on every edge.
    pub lambda_bar: f64,
    /// One-step expansion rate `sqrt(lambda_bar)`.
    pub lambda: f64,
    /// Uniform lower bound on `v^T A v / |v|^2` over all edges at
    /// `lambda_bar`.
    pub l_bound: f64,
    /// Upper bound on the operator norms of the stored frames.
    pub d1: f64,
    /// Upper bound on the operator norms of the frame inverses.
    pub d2: f64,
    /// `1 / d1^2`.
    pub r_const: f64,
    /// Expansion prefactor `sqrt(r_const * l_bound) / (lambda * d2)`.
    pub c: f64,
}

/// The per-edge transition matrices `M = C_W [Df(V)] [C_V^{-1}]`, grouped
/// by source vertex. `C_W` enters as an exact point matrix; only the
/// inverse of the source frame needs an enclosure.
fn edge_transition_matrices(
    graph: &DiGraph,
    grid: &GridSpec,
    frames: &FrameAssignment,
    map: &dyn MapSystem,
    mode: ExecMode,
) -> Result<Vec<(u32, u32, IntervalMatrix)>, ConeError> {
    for v in 0..graph.vertex_count() as u32 {
        if frames.get(v).is_none() {
            return Err(ConeError::MissingFrame(v));
        }
    }
    let sources: Vec<u32> = (0..graph.vertex_count() as u32).collect();
    let per_source = par_map(&sources, mode, |&v| {
        let d = map.jac_i(&grid.realize(graph.cube_of(v)));
        let inv_v = &frames.get(v).expect("checked").inv_enclosure;
        graph
            .out_ids(v)
            .iter()
            .map(|&w| {
                let cw = IntervalMatrix::from_point(&frames.get(w).expect("checked").c);
                let m = &(&cw * &d) * inv_v;
                (v, w, m)
            })
            .collect::<Vec<_>>()
    });
    Ok(per_source.into_iter().flatten().collect())
}

/// Check strong hyperbolicity edge by edge, collecting the sources of any
/// edges whose form could not be verified positive definite.
pub fn verify_cone_conditions(
    graph: &DiGraph,
    grid: &GridSpec,
    frames: &FrameAssignment,
    q: &QuadraticForm,
    map: &dyn MapSystem,
    mode: ExecMode,
) -> Result<ConeReport, ConeError> {
    if q.dim() != map.dim() {
        return Err(ConeError::DimensionMismatch {
            sig: q.dim(),
            map: map.dim(),
        });
    }
    let transitions = edge_transition_matrices(graph, grid, frames, map, mode)?;
    let outcomes = par_map(&transitions, mode, |(v, w, m)| {
        let a = q.shifted_form(m, Interval::ONE);
        (*v, *w, pd_margin(&a))
    });
    let mut unverified = Vec::new();
    let mut unverified_edges = Vec::new();
    let mut min_margin: Option<f64> = None;
    for (v, w, margin) in outcomes {
        match margin {
            Some(m) => {
                min_margin = Some(min_margin.map_or(m, |cur: f64| cur.min(m)));
            }
            None => {
                unverified.push(v);
                unverified_edges.push((v, w));
            }
        }
    }
    unverified.sort_unstable();
    unverified.dedup();
    Ok(ConeReport {
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        unverified,
        unverified_edges,
        min_margin,
        rates: None,
    })
}

fn all_edges_pd(
    transitions: &[(u32, u32, IntervalMatrix)],
    q: &QuadraticForm,
    lambda: f64,
    mode: ExecMode,
) -> bool {
    par_map(transitions, mode, |(_, _, m)| {
        pd_margin(&q.shifted_form(m, Interval::point(lambda))).is_some()
    })
    .into_iter()
    .all(|ok| ok)
}

/// Largest `c` such that `A - c I` stays verifiably positive definite,
/// bisected from the Cholesky pivot bound down.
fn eigen_lower_bound(a: &IntervalMatrix, pivot_hint: f64, rel_tol: f64) -> f64 {
    let shift = |c: f64| {
        let mut s = a.clone();
        for i in 0..a.nrows() {
            s[(i, i)] = s[(i, i)] - Interval::point(c);
        }
        s
    };
    if pd_margin(&shift(pivot_hint)).is_some() {
        return pivot_hint;
    }
    let mut lo = 0.0;
    let mut hi = pivot_hint;
    while hi - lo > rel_tol * pivot_hint {
        let mid = 0.5 * (lo + hi);
        if pd_margin(&shift(mid)).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Rigorous upper bound on the 2-norm via `sqrt(norm1 * norm_inf)`.
fn spectral_upper(m: &IntervalMatrix) -> f64 {
    let p = Interval::raw(0.0, m.norm_one_upper()) * Interval::raw(0.0, m.norm_inf_upper());
    p.sqrt().map_or(f64::INFINITY, |s| s.hi())
}

/// Extract certified expansion constants after a fully verified sweep.
///
/// Bisection finds the largest `lambda_bar` in `(1, lambda_max]` keeping
/// every edge form positive definite; the uniform quadratic lower bound
/// and the frame norm constants then assemble the expansion prefactor.
pub fn certify_rates(
    graph: &DiGraph,
    grid: &GridSpec,
    frames: &FrameAssignment,
    q: &QuadraticForm,
    map: &dyn MapSystem,
    bisect_tol: f64,
    lambda_max: f64,
    mode: ExecMode,
) -> Result<CertifiedRates, ConeError> {
    if q.dim() != map.dim() {
        return Err(ConeError::DimensionMismatch {
            sig: q.dim(),
            map: map.dim(),
        });
    }
    let transitions = edge_transition_matrices(graph, grid, frames, map, mode)?;
    if transitions.is_empty() {
        return Err(ConeError::NoExpansionMargin);
    }
    let first_above = 1.0 + bisect_tol;
    if !all_edges_pd(&transitions, q, first_above, mode) {
        return Err(ConeError::NoExpansionMargin);
    }
    let lambda_bar = if all_edges_pd(&transitions, q, lambda_max, mode) {
        lambda_max
    } else {
        let mut lo = first_above;
        let mut hi = lambda_max;
        while hi - lo > bisect_tol {
            let mid = 0.5 * (lo + hi);
            if all_edges_pd(&transitions, q, mid, mode) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    // Uniform PD lower bound of the lambda_bar-shifted forms over edges.
    let l_bound = par_map(&transitions, mode, |(_, _, m)| {
        let a = q.shifted_form(m, Interval::point(lambda_bar));
        let hint = pd_margin(&a).expect("lambda_bar was verified on every edge");
        eigen_lower_bound(&a, hint, 1e-3)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min);

    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for v in 0..graph.vertex_count() as u32 {
        let frame = frames.get(v).ok_or(ConeError::MissingFrame(v))?;
        d1 = d1.max(spectral_upper(&IntervalMatrix::from_point(&frame.c)));
        d2 = d2.max(spectral_upper(&frame.inv_enclosure));
    }

    // Assemble the derived constants with outward-safe rounding.
    let lam = Interval::point(lambda_bar)
        .sqrt()
        .map_err(|_| ConeError::NoExpansionMargin)?;
    let r_const = Interval::ONE
        .div(Interval::point(d1).sqr())
        .map_err(|_| ConeError::NoExpansionMargin)?;
    let numerator = (r_const * Interval::point(l_bound))
        .sqrt()
        .map_err(|_| ConeError::NoExpansionMargin)?;
    let denom = lam * Interval::point(d2);
    let c = numerator
        .div(denom)
        .map_err(|_| ConeError::NoExpansionMargin)?;

    Ok(CertifiedRates {
        lambda_bar,
        lambda: lam.lo(),
        l_bound,
        d1,
        d2,
        r_const: r_const.lo(),
        c: c.lo(),
    })
}
