//! Per-vertex coordinate systems.
//!
//! At cubes containing approximate periodic points the frame comes from an
//! eigen-decomposition of the orbit derivative, columns sorted by
//! decreasing |eigenvalue| (complex pairs contribute the real/imaginary
//! basis of their invariant plane, kept adjacent). Everywhere else frames
//! are propagated along edges by pushing the frame vectors through the
//! derivative with a Gram-Schmidt re-orthonormalization and a partial
//! pull-back.
//!
//! The stored matrix `C` always maps tangent vectors INTO eigen-adapted
//! coordinates, so an edge's transition `C_W Df C_V^{-1}` is approximately
//! diagonal. Frames are heuristic; soundness lives entirely in the cached
//! rigorous enclosure of `C^{-1}` consumed by the cone check.

use std::io::{BufRead, Write};

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::GridSpec;
use crate::digraph::DiGraph;
use crate::dynsys::MapSystem;
use crate::hexfloat::{format_hex_f64, parse_hex_f64};
use crate::interval::{verified_inverse, IntervalError, IntervalMatrix};
use crate::periodic::PeriodicCandidate;
use crate::{par_map, ExecMode};

const CONDITION_CAP: f64 = 1e8;
const COLUMN_NORM_FLOOR: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("ill-conditioned frame (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("eigenvector extraction failed: {0}")]
    EigenFailure(String),
    #[error("graph is not a single strongly connected component")]
    NotSingleScc,
    #[error("no seeded frames to spread from")]
    NoSeeds,
    #[error("frame matrix not verifiably invertible: {0}")]
    Inverse(#[from] IntervalError),
    #[error("malformed frame dump: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    PeriodicSeed,
    Spread,
}

/// An invertible coordinate system attached to a vertex, with a rigorous
/// enclosure of its inverse.
#[derive(Debug, Clone)]
pub struct CoordinateFrame {
    pub c: DMatrix<f64>,
    pub inv_enclosure: IntervalMatrix,
    pub provenance: Provenance,
}

impl CoordinateFrame {
    pub fn new(c: DMatrix<f64>, provenance: Provenance) -> Result<Self, FrameError> {
        let inv_enclosure = verified_inverse(&c)?;
        Ok(CoordinateFrame {
            c,
            inv_enclosure,
            provenance,
        })
    }
}

/// Frame slots per graph vertex; `None` until assigned.
#[derive(Debug, Clone, Default)]
pub struct FrameAssignment {
    frames: Vec<Option<CoordinateFrame>>,
}

impl FrameAssignment {
    pub fn new(vertex_count: usize) -> Self {
        FrameAssignment {
            frames: vec![None; vertex_count],
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&CoordinateFrame> {
        self.frames.get(id as usize).and_then(|f| f.as_ref())
    }

    pub fn set(&mut self, id: u32, frame: CoordinateFrame) {
        self.frames[id as usize] = Some(frame);
    }

    pub fn assigned_count(&self) -> usize {
        self.frames.iter().filter(|f| f.is_some()).count()
    }

    pub fn unassigned_ids(&self) -> Vec<u32> {
        self.frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_none())
            .map(|(i, _)| i as u32)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Eigen machinery: eigenvalues from nalgebra, eigenvectors from null-space
// extraction with full-pivot elimination. Small dense matrices only.
// ---------------------------------------------------------------------------

/// Null-space basis of `m` via Gaussian elimination with full pivoting.
/// Entries below `tol` count as zero; returns `want` basis vectors or None.
fn null_space<T>(mut m: DMatrix<T>, want: usize, tol: f64) -> Option<Vec<DVector<T>>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for s in 0..n {
        // find the largest remaining entry
        let mut best = (s, s, 0.0f64);
        for i in s..n {
            for j in s..n {
                let mag = m[(i, j)].modulus();
                if mag > best.2 {
                    best = (i, j, mag);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        m.swap_rows(s, best.0);
        m.swap_columns(s, best.1);
        col_perm.swap(s, best.1);
        let pivot = m[(s, s)];
        for i in (s + 1)..n {
            let factor = m[(i, s)] / pivot;
            for j in s..n {
                let v = m[(i, j)] - factor * m[(s, j)];
                m[(i, j)] = v;
            }
        }
        rank += 1;
    }
    let free = n - rank;
    if free < want {
        return None;
    }
    let mut basis = Vec::with_capacity(want);
    for f in 0..want {
        let free_col = rank + f;
        let mut y = DVector::<T>::zeros(n);
        y[free_col] = T::one();
        for i in (0..rank).rev() {
            let mut s = T::zero();
            for j in (i + 1)..n {
                s += m[(i, j)] * y[j];
            }
            y[i] = -s / m[(i, i)];
        }
        // undo the column permutation
        let mut v = DVector::<T>::zeros(n);
        for i in 0..n {
            v[col_perm[i]] = y[i];
        }
        basis.push(v);
    }
    Some(basis)
}

/// Deterministic sign: first significantly nonzero component positive.
fn fix_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            *v *= -1.0;
        }
    }
}

/// Matrix of normalized eigenvectors of `a`, columns sorted by decreasing
/// |eigenvalue|; complex pairs are replaced by the real/imaginary basis of
/// their invariant plane, kept adjacent.
pub fn eigenvector_matrix(a: &DMatrix<f64>) -> Result<DMatrix<f64>, FrameError> {
    let n = a.nrows();
    let scale = a.amax().max(1e-300);
    let tol = scale * 1e-9 * n as f64;
    let eigs = a.clone().complex_eigenvalues();

    // group eigenvalues: conjugate pairs once, near-equal reals together
    #[derive(Debug)]
    enum Group {
        Real { value: f64, multiplicity: usize },
        Pair { value: Complex<f64> },
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let l = eigs[i];
        if l.im.abs() > tol {
            // find and consume the conjugate partner
            let partner = (0..n).find(|&j| {
                !used[j] && j != i && (eigs[j] - l.conj()).norm() <= 10.0 * tol
            });
            let Some(j) = partner else {
                return Err(FrameError::EigenFailure(format!(
                    "unpaired complex eigenvalue {l}"
                )));
            };
            used[i] = true;
            used[j] = true;
            groups.push(Group::Pair {
                value: if l.im > 0.0 { l } else { l.conj() },
            });
        } else {
            used[i] = true;
            let mut mult = 1;
            let mut sum = l.re;
            for j in (i + 1)..n {
                if !used[j] && eigs[j].im.abs() <= tol && (eigs[j].re - l.re).abs() <= 10.0 * tol {
                    used[j] = true;
                    mult += 1;
                    sum += eigs[j].re;
                }
            }
            groups.push(Group::Real {
                value: sum / mult as f64,
                multiplicity: mult,
            });
        }
    }
    groups.sort_by(|a, b| {
        let ma = match a {
            Group::Real { value, .. } => value.abs(),
            Group::Pair { value } => value.norm(),
        };
        let mb = match b {
            Group::Real { value, .. } => value.abs(),
            Group::Pair { value } => value.norm(),
        };
        mb.partial_cmp(&ma).unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(n);
    for g in &groups {
        match *g {
            Group::Real { value, multiplicity } => {
                let shifted = a - DMatrix::<f64>::identity(n, n) * value;
                let basis = null_space(shifted, multiplicity, tol).ok_or_else(|| {
                    FrameError::EigenFailure(format!(
                        "defective eigenvalue {value} (wanted multiplicity {multiplicity})"
                    ))
                })?;
                for mut v in basis {
                    let norm = v.norm();
                    if norm < COLUMN_NORM_FLOOR {
                        return Err(FrameError::EigenFailure("zero eigenvector".into()));
                    }
                    v /= norm;
                    fix_sign(&mut v);
                    columns.push(v);
                }
            }
            Group::Pair { value } => {
                let ac: DMatrix<Complex<f64>> = a.map(|x| Complex::new(x, 0.0));
                let shifted = ac - DMatrix::<Complex<f64>>::identity(n, n) * value;
                let basis = null_space(shifted, 1, tol).ok_or_else(|| {
                    FrameError::EigenFailure(format!("no eigenvector for pair {value}"))
                })?;
                let v = &basis[0];
                let mut re = DVector::from_iterator(n, v.iter().map(|z| z.re));
                let mut im = DVector::from_iterator(n, v.iter().map(|z| z.im));
                let (rn, inorm) = (re.norm(), im.norm());
                if rn < COLUMN_NORM_FLOOR || inorm < COLUMN_NORM_FLOOR {
                    return Err(FrameError::EigenFailure(
                        "degenerate invariant plane basis".into(),
                    ));
                }
                re /= rn;
                im /= inorm;
                fix_sign(&mut re);
                fix_sign(&mut im);
                columns.push(re);
                columns.push(im);
            }
        }
    }
    debug_assert_eq!(columns.len(), n);
    Ok(DMatrix::from_columns(&columns))
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    match m.clone().lu().try_inverse() {
        Some(inv) => {
            let norm = |x: &DMatrix<f64>| {
                (0..x.nrows())
                    .map(|i| (0..x.ncols()).map(|j| x[(i, j)].abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            norm(m) * norm(&inv)
        }
        None => f64::INFINITY,
    }
}

fn wrap_into(periods: &[Option<f64>], x: &mut [f64]) {
    for (v, p) in x.iter_mut().zip(periods) {
        if let Some(p) = p {
            *v = v.rem_euclid(*p);
        }
    }
}

/// Eigen-adapted frame at an approximate `period`-periodic point: the
/// stored matrix is the INVERSE of the sorted eigenvector matrix of
/// `Df^period(y)`.
pub fn eigen_frame(
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    y: &[f64],
    period: usize,
) -> Result<CoordinateFrame, FrameError> {
    let n = map.dim();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut u = y.to_vec();
    for _ in 0..period {
        a = map.jac(&u) * a;
        u = map.eval(&u);
        wrap_into(periods, &mut u);
    }
    let m_y = eigenvector_matrix(&a)?;
    let cond = condition_estimate(&m_y);
    if !(cond < CONDITION_CAP) {
        return Err(FrameError::IllConditioned(cond));
    }
    let c = m_y
        .clone()
        .lu()
        .try_inverse()
        .ok_or(FrameError::IllConditioned(f64::INFINITY))?;
    CoordinateFrame::new(c, Provenance::PeriodicSeed)
}

/// Seed frames at the cubes of periodic candidates, lowest period first;
/// already-set vertices are skipped, as are candidates whose orbit
/// derivative does not yield a usable eigenbasis. Errors only when no
/// candidate could be seeded at all.
pub fn seed_frames(
    assignment: &mut FrameAssignment,
    candidate_sets: &[Vec<PeriodicCandidate>],
    grid: &GridSpec,
    map: &dyn MapSystem,
) -> Result<Vec<u32>, FrameError> {
    let periods = grid.periods();
    let mut seeded = Vec::new();
    let mut last_err = None;
    for set in candidate_sets {
        for cand in set {
            if assignment.get(cand.cube_id).is_some() {
                continue;
            }
            match eigen_frame(map, &periods, &cand.point, cand.period) {
                Ok(frame) => {
                    assignment.set(cand.cube_id, frame);
                    seeded.push(cand.cube_id);
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    if seeded.is_empty() {
        if let Some(e) = last_err {
            return Err(e);
        }
    }
    Ok(seeded)
}

/// Counters reported by [`spread_frames`].
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SpreadStats {
    pub passes: usize,
    /// Vertices whose push-forward fell back to the orthonormalized frame
    /// because a derivative along the centre orbit was not invertible.
    pub fallbacks: usize,
}

/// Modified Gram-Schmidt on columns; None when a column collapses.
fn gram_schmidt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    let mut q = m.clone();
    for j in 0..cols {
        for i in 0..j {
            let qi = q.column(i).clone_owned();
            let proj = qi.dot(&q.column(j));
            for r in 0..rows {
                q[(r, j)] -= proj * qi[r];
            }
        }
        let norm = q.column(j).norm();
        if norm < COLUMN_NORM_FLOOR {
            return None;
        }
        for r in 0..rows {
            q[(r, j)] /= norm;
        }
    }
    Some(q)
}

fn normalize_columns(m: &mut DMatrix<f64>) -> bool {
    for j in 0..m.ncols() {
        let norm = m.column(j).norm();
        if norm < COLUMN_NORM_FLOOR {
            return false;
        }
        for r in 0..m.nrows() {
            m[(r, j)] /= norm;
        }
    }
    true
}

/// Push the frame vectors of vertex `v` forward `k` steps along the centre
/// orbit, re-orthonormalize, pull back `k-1` steps, and return the new
/// coordinate matrix (inverse of the resulting vectors) to assign to
/// out-neighbors. The bool reports a fallback.
fn pushed_frame(
    graph: &DiGraph,
    grid: &GridSpec,
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    frame: &CoordinateFrame,
    v: u32,
    k: usize,
) -> Result<(DMatrix<f64>, bool), FrameError> {
    // frame vectors = columns of C^{-1}; the midpoint of the rigorous
    // enclosure is the best float representative.
    let mut vectors = frame.inv_enclosure.midpoint();
    let mut u = grid.centre(graph.cube_of(v));
    let mut derivs: Vec<DMatrix<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let a = map.jac(&u);
        vectors = &a * &vectors;
        derivs.push(a);
        u = map.eval(&u);
        wrap_into(periods, &mut u);
    }
    let ortho = gram_schmidt(&vectors)
        .ok_or_else(|| FrameError::EigenFailure("frame collapsed under push-forward".into()))?;
    let mut current = ortho.clone();
    let mut fallback = false;
    for a in derivs[1..].iter().rev() {
        match a.clone().lu().solve(&current) {
            Some(next) => current = next,
            None => {
                fallback = true;
                current = ortho.clone();
                break;
            }
        }
    }
    if !normalize_columns(&mut current) {
        fallback = true;
        current = ortho;
    }
    let c_w = current
        .clone()
        .lu()
        .try_inverse()
        .ok_or(FrameError::IllConditioned(f64::INFINITY))?;
    Ok((c_w, fallback))
}

/// Breadth-layer propagation of frames from the seeded set over a single
/// strongly connected graph; terminates with every vertex assigned.
pub fn spread_frames(
    graph: &DiGraph,
    grid: &GridSpec,
    map: &dyn MapSystem,
    assignment: &mut FrameAssignment,
    k: usize,
    mode: ExecMode,
) -> Result<SpreadStats, FrameError> {
    assert!(k >= 2, "spread needs at least two forward iterates");
    if assignment.assigned_count() == 0 {
        return Err(FrameError::NoSeeds);
    }
    if !graph.is_single_scc() {
        return Err(FrameError::NotSingleScc);
    }
    let periods = grid.periods();
    let mut frontier: Vec<u32> = (0..graph.vertex_count() as u32)
        .filter(|&v| assignment.get(v).is_some())
        .collect();
    let mut stats = SpreadStats::default();
    while !frontier.is_empty() {
        stats.passes += 1;
        if stats.passes > graph.vertex_count() + 1 {
            return Err(FrameError::EigenFailure(
                "spread exceeded the vertex-count pass bound".into(),
            ));
        }
        let pushed = par_map(&frontier, mode, |&v| {
            let frame = assignment.get(v).expect("frontier vertices are assigned");
            pushed_frame(graph, grid, map, &periods, frame, v, k)
        });
        let mut next = Vec::new();
        for (&v, res) in frontier.iter().zip(pushed) {
            let (c_w, fb) = res?;
            if fb {
                stats.fallbacks += 1;
            }
            let mut frame_cache: Option<CoordinateFrame> = None;
            for &w in graph.out_ids(v) {
                if assignment.get(w).is_none() {
                    let frame = match &frame_cache {
                        Some(f) => f.clone(),
                        None => {
                            let f = CoordinateFrame::new(c_w.clone(), Provenance::Spread)?;
                            frame_cache = Some(f.clone());
                            f
                        }
                    };
                    assignment.set(w, frame);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    Ok(stats)
}

// ---------------------------------------------------------------------------
// Frame dump: per vertex id, provenance tag and the row-major hex-float
// matrix C.
// ---------------------------------------------------------------------------

pub fn write_frames<W: Write>(
    w: &mut W,
    assignment: &FrameAssignment,
    dim: usize,
) -> std::io::Result<()> {
    writeln!(w, "# dim={dim}")?;
    for id in 0..assignment.len() as u32 {
        let Some(frame) = assignment.get(id) else {
            continue;
        };
        let tag = match frame.provenance {
            Provenance::PeriodicSeed => "periodic-seed",
            Provenance::Spread => "spread",
        };
        let entries: Vec<String> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| format_hex_f64(frame.c[(i, j)]))
            .collect();
        writeln!(w, "{id},{tag},{}", entries.join(","))?;
    }
    Ok(())
}

pub fn read_frames<R: BufRead>(
    r: &mut R,
    vertex_count: usize,
) -> Result<FrameAssignment, FrameError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| FrameError::Format("empty frame dump".into()))?
        .map_err(|e| FrameError::Format(e.to_string()))?;
    let dim: usize = header
        .trim()
        .strip_prefix("# dim=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FrameError::Format("bad frame dump header".into()))?;
    let mut assignment = FrameAssignment::new(vertex_count);
    for line in lines {
        let line = line.map_err(|e| FrameError::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let id: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| FrameError::Format(line.into()))?;
        if id as usize >= vertex_count {
            return Err(FrameError::Format(format!("vertex id {id} out of range")));
        }
        let provenance = match parts.next() {
            Some("periodic-seed") => Provenance::PeriodicSeed,
            Some("spread") => Provenance::Spread,
            other => return Err(FrameError::Format(format!("bad provenance {other:?}"))),
        };
        let entries: Vec<f64> = parts
            .map(|t| parse_hex_f64(t).ok_or_else(|| FrameError::Format(line.into())))
            .collect::<Result<_, _>>()?;
        if entries.len() != dim * dim {
            return Err(FrameError::Format(format!(
                "vertex {id}: expected {} entries, found {}",
                dim * dim,
                entries.len()
            )));
        }
        let c = DMatrix::from_row_slice(dim, dim, &entries);
        let mut frame = CoordinateFrame::new(c, provenance)?;
        frame.provenance = provenance;
        assignment.set(id, frame);
    }
    Ok(assignment)
}
