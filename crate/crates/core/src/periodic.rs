//! Periodic points: heuristic Newton refinement of graph cycles and
//! rigorous interval-Newton existence/uniqueness proofs.
//!
//! The refinement stage is plain float arithmetic; nothing downstream
//! depends on its accuracy. The proof stage is rigorous: a verified
//! interval Newton operator mapped strictly into the interior of its ball
//! proves existence and local uniqueness of the zero.


use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::GridSpec;
use crate::digraph::DiGraph;
use crate::dynsys::MapSystem;
use crate::hexfloat::{format_hex_slice, parse_hex_slice};
use crate::interval::{solve_gauss, Interval, IntervalError, IntervalMatrix, IntervalVector};
use crate::{par_map, ExecMode};

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error("Newton operator undefined: {0}")]
    NewtonOperatorUndefined(#[from] IntervalError),
    #[error("period-two centers closer than 2r; distinctness cannot be concluded")]
    CentersTooClose,
    #[error("dimension mismatch in residual system")]
    DimensionMismatch,
}

/// Tolerances for the float Newton stage. All configurable; the defaults
/// leave double-precision headroom for the rigorous stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewtonParams {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedup_tol: f64,
    pub period_sep_tol: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            newton_tol: 1e-12,
            max_iter: 50,
            dedup_tol: 1e-8,
            period_sep_tol: 1e-6,
        }
    }
}

/// An approximate periodic point of principal period `period`, living in
/// the cube `cube_id` of the enclosure graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCandidate {
    pub point: Vec<f64>,
    pub period: usize,
    pub cube_id: u32,
}

/// Outcome of an interval Newton run over the ball `center +- radius`.
///
/// `verified == true` means the Newton image was proved to lie in the open
/// interior of the ball: the residual system has exactly one zero there,
/// and that zero lies in `newton_image`.
#[derive(Debug, Clone)]
pub struct RigorousOrbitProof {
    pub center: Vec<f64>,
    pub radius: f64,
    pub newton_image: IntervalVector,
    pub verified: bool,
}

/// A zero-finding problem `g(x) = 0` with interval value and Jacobian
/// enclosures.
pub trait ResidualSystem: Sync {
    fn dim(&self) -> usize;
    fn eval_box(&self, x: &IntervalVector) -> IntervalVector;
    fn jac_box(&self, x: &IntervalVector) -> IntervalMatrix;
}

/// The interval Newton operator `N = c - [Dg(X)]^{-1} g(c)` over the ball
/// `X = c +- r`, with the linear system solved by interval elimination.
pub fn interval_newton(
    res: &dyn ResidualSystem,
    center: &[f64],
    radius: f64,
) -> Result<RigorousOrbitProof, PeriodicError> {
    if center.len() != res.dim() {
        return Err(PeriodicError::DimensionMismatch);
    }
    let x_box = IntervalVector::ball(center, radius);
    let jac = res.jac_box(&x_box);
    let g_center = res.eval_box(&IntervalVector::from_point(center));
    let correction = solve_gauss(&jac, &g_center)?;
    let newton_image = &IntervalVector::from_point(center) - &correction;
    let verified = x_box.contains_in_interior(&newton_image);
    Ok(RigorousOrbitProof {
        center: center.to_vec(),
        radius,
        newton_image,
        verified,
    })
}

fn wrap_nearest(v: f64, period: f64) -> f64 {
    v - period * (v / period).round()
}

/// Max-norm distance honoring periodic dimensions.
pub fn dist_max(a: &[f64], b: &[f64], periods: &[Option<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .zip(periods)
        .map(|((&x, &y), p)| match p {
            Some(p) => wrap_nearest(x - y, *p).abs(),
            None => (x - y).abs(),
        })
        .fold(0.0, f64::max)
}

/// Residual `f - Id`, shifted by the integer deck transformation closest to
/// the seed in each periodic dimension so Newton works in a smooth chart.
pub struct FixedPointResidual<'a> {
    map: &'a dyn MapSystem,
    shift: Vec<f64>,
}

impl<'a> FixedPointResidual<'a> {
    pub fn new(map: &'a dyn MapSystem, periods: &[Option<f64>], center: &[f64]) -> Self {
        let fx = map.eval(center);
        let shift = periods
            .iter()
            .enumerate()
            .map(|(d, p)| match p {
                Some(p) => p * ((fx[d] - center[d]) / p).round(),
                None => 0.0,
            })
            .collect();
        FixedPointResidual { map, shift }
    }
}

impl ResidualSystem for FixedPointResidual<'_> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn eval_box(&self, x: &IntervalVector) -> IntervalVector {
        let img = self.map.eval_i(x);
        (0..self.dim())
            .map(|d| img[d] - x[d] - Interval::point(self.shift[d]))
            .collect()
    }

    fn jac_box(&self, x: &IntervalVector) -> IntervalMatrix {
        &self.map.jac_i(x) - &IntervalMatrix::identity(self.dim())
    }
}

/// The doubled residual `F(x, y) = (f(x) - y, f(y) - x)` over the product
/// ball, with per-block periodic shifts as in [`FixedPointResidual`].
pub struct PeriodTwoResidual<'a> {
    map: &'a dyn MapSystem,
    shift1: Vec<f64>,
    shift2: Vec<f64>,
}

impl<'a> PeriodTwoResidual<'a> {
    pub fn new(
        map: &'a dyn MapSystem,
        periods: &[Option<f64>],
        x_center: &[f64],
        y_center: &[f64],
    ) -> Self {
        let shift_for = |from: &[f64], to: &[f64]| -> Vec<f64> {
            let img = map.eval(from);
            periods
                .iter()
                .enumerate()
                .map(|(d, p)| match p {
                    Some(p) => p * ((img[d] - to[d]) / p).round(),
                    None => 0.0,
                })
                .collect()
        };
        PeriodTwoResidual {
            map,
            shift1: shift_for(x_center, y_center),
            shift2: shift_for(y_center, x_center),
        }
    }
}

impl ResidualSystem for PeriodTwoResidual<'_> {
    fn dim(&self) -> usize {
        2 * self.map.dim()
    }

    fn eval_box(&self, z: &IntervalVector) -> IntervalVector {
        let n = self.map.dim();
        let x: IntervalVector = (0..n).map(|d| z[d]).collect();
        let y: IntervalVector = (0..n).map(|d| z[n + d]).collect();
        let fx = self.map.eval_i(&x);
        let fy = self.map.eval_i(&y);
        (0..n)
            .map(|d| fx[d] - y[d] - Interval::point(self.shift1[d]))
            .chain((0..n).map(|d| fy[d] - x[d] - Interval::point(self.shift2[d])))
            .collect()
    }

    fn jac_box(&self, z: &IntervalVector) -> IntervalMatrix {
        let n = self.map.dim();
        let x: IntervalVector = (0..n).map(|d| z[d]).collect();
        let y: IntervalVector = (0..n).map(|d| z[n + d]).collect();
        let jx = self.map.jac_i(&x);
        let jy = self.map.jac_i(&y);
        let mut out = IntervalMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = jx[(i, j)];
                out[(n + i, n + j)] = jy[(i, j)];
            }
            out[(i, n + i)] = Interval::point(-1.0);
            out[(n + i, i)] = Interval::point(-1.0);
        }
        out
    }
}

/// Prove existence and uniqueness of a fixed point in the max-norm ball of
/// radius `r` around `center` (residual `f - Id`).
pub fn prove_fixed_point(
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    center: &[f64],
    radius: f64,
) -> Result<RigorousOrbitProof, PeriodicError> {
    let res = FixedPointResidual::new(map, periods, center);
    interval_newton(&res, center, radius)
}

/// Prove a genuine period-two orbit through the doubled system. The
/// centers must be separated by more than `2r` (periodic-aware max norm),
/// which makes the two proved points distinct.
pub fn prove_period_two(
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    x_center: &[f64],
    y_center: &[f64],
    radius: f64,
) -> Result<RigorousOrbitProof, PeriodicError> {
    if !(dist_max(x_center, y_center, periods) > 2.0 * radius) {
        return Err(PeriodicError::CentersTooClose);
    }
    let res = PeriodTwoResidual::new(map, periods, x_center, y_center);
    let center: Vec<f64> = x_center.iter().chain(y_center).copied().collect();
    interval_newton(&res, &center, radius)
}

fn newton_orbit(
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    seed: &[f64],
    period: usize,
    params: &NewtonParams,
) -> Option<Vec<f64>> {
    let n = map.dim();
    let mut x = seed.to_vec();
    for _ in 0..params.max_iter {
        let mut a = DMatrix::<f64>::identity(n, n);
        let mut u = x.clone();
        for _ in 0..period {
            a = map.jac(&u) * a;
            u = map.eval(&u);
        }
        let g: Vec<f64> = (0..n)
            .map(|d| {
                let r = u[d] - x[d];
                match periods[d] {
                    Some(p) => wrap_nearest(r, p),
                    None => r,
                }
            })
            .collect();
        if g.iter().all(|v| v.abs() <= params.newton_tol) {
            return Some(x);
        }
        let dg = a - DMatrix::identity(n, n);
        let dx = dg.lu().solve(&DVector::from_vec(g))?;
        for d in 0..n {
            x[d] -= dx[d];
            if let Some(p) = periods[d] {
                x[d] = x[d].rem_euclid(p);
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    None
}

fn principal_period_is(
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    y: &[f64],
    period: usize,
    sep_tol: f64,
) -> bool {
    let mut u = y.to_vec();
    for _ in 1..period {
        u = map.eval(&u);
        for (d, p) in periods.iter().enumerate() {
            if let Some(p) = p {
                u[d] = u[d].rem_euclid(*p);
            }
        }
        if dist_max(&u, y, periods) <= sep_tol {
            return false;
        }
    }
    true
}

/// Refine graph cycles to approximate periodic points.
///
/// For each vertex on a shortest closed walk of length `i`, run Newton on
/// `g = f^i - Id` seeded at the cube center; accept converged points that
/// stay in the support of the vertex set and have principal period `i`,
/// deduplicating near-identical points. Levels are processed ascending.
pub fn refine_cycles(
    graph: &DiGraph,
    grid: &GridSpec,
    map: &dyn MapSystem,
    n_max: usize,
    params: &NewtonParams,
    mode: ExecMode,
) -> Vec<Vec<PeriodicCandidate>> {
    let cycle_sets = graph.cycle_vertex_sets(n_max);
    refine_cycle_sets(graph, grid, map, &cycle_sets, params, mode)
}

/// Newton refinement over precomputed cycle vertex sets (one set per
/// period, ascending).
pub fn refine_cycle_sets(
    graph: &DiGraph,
    grid: &GridSpec,
    map: &dyn MapSystem,
    cycle_sets: &[Vec<u32>],
    params: &NewtonParams,
    mode: ExecMode,
) -> Vec<Vec<PeriodicCandidate>> {
    let periods = grid.periods();
    let mut result: Vec<Vec<PeriodicCandidate>> = Vec::with_capacity(cycle_sets.len());
    for (idx, seeds) in cycle_sets.iter().enumerate() {
        let period = idx + 1;
        let refined = par_map(seeds, mode, |&v| {
            let centre = grid.centre(graph.cube_of(v));
            newton_orbit(map, &periods, &centre, period, params)
        });
        let mut accepted: Vec<PeriodicCandidate> = Vec::new();
        for y in refined.into_iter().flatten() {
            // membership in the support of the vertex set
            let cover = match grid.min_cover(&IntervalVector::from_point(&y)) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let Some(cube_id) = cover.iter().find_map(|c| graph.id_of(c)) else {
                continue;
            };
            if !principal_period_is(map, &periods, &y, period, params.period_sep_tol) {
                continue;
            }
            if accepted
                .iter()
                .any(|c| dist_max(&c.point, &y, &periods) < params.dedup_tol)
            {
                continue;
            }
            accepted.push(PeriodicCandidate {
                point: y,
                period,
                cube_id,
            });
        }
        result.push(accepted);
    }
    result
}

// ---------------------------------------------------------------------------
// JSON report: candidates and proofs with full-precision hex floats.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub period: usize,
    pub cube_id: u32,
    pub point_hex: Vec<String>,
    pub point: Vec<f64>,
}

impl CandidateRecord {
    pub fn new(c: &PeriodicCandidate) -> Self {
        CandidateRecord {
            period: c.period,
            cube_id: c.cube_id,
            point_hex: format_hex_slice(&c.point),
            point: c.point.clone(),
        }
    }

    pub fn to_candidate(&self) -> Option<PeriodicCandidate> {
        Some(PeriodicCandidate {
            point: parse_hex_slice(&self.point_hex)?,
            period: self.period,
            cube_id: self.cube_id,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofRecord {
    pub kind: String,
    pub radius: f64,
    pub verified: bool,
    pub center_hex: Vec<String>,
    pub newton_lo_hex: Vec<String>,
    pub newton_hi_hex: Vec<String>,
    pub center: Vec<f64>,
}

impl ProofRecord {
    pub fn new(kind: &str, p: &RigorousOrbitProof) -> Self {
        let lo: Vec<f64> = p.newton_image.iter().map(|i| i.lo()).collect();
        let hi: Vec<f64> = p.newton_image.iter().map(|i| i.hi()).collect();
        ProofRecord {
            kind: kind.to_string(),
            radius: p.radius,
            verified: p.verified,
            center_hex: format_hex_slice(&p.center),
            newton_lo_hex: format_hex_slice(&lo),
            newton_hi_hex: format_hex_slice(&hi),
            center: p.center.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PeriodicReport {
    pub candidates: Vec<CandidateRecord>,
    pub proofs: Vec<ProofRecord>,
}

impl PeriodicReport {
    pub fn from_candidates(sets: &[Vec<PeriodicCandidate>]) -> Self {
        PeriodicReport {
            candidates: sets
                .iter()
                .flatten()
                .map(CandidateRecord::new)
                .collect(),
            proofs: Vec::new(),
        }
    }

    pub fn candidate_sets(&self, n_max: usize) -> Option<Vec<Vec<PeriodicCandidate>>> {
        let mut sets = vec![Vec::new(); n_max];
        for rec in &self.candidates {
            let c = rec.to_candidate()?;
            if c.period == 0 || c.period > n_max {
                return None;
            }
            sets[c.period - 1].push(c);
        }
        Some(sets)
    }
}

// GridSpec helper lives here to keep cover independent of the Newton stage.
impl GridSpec {
    /// Circumference of each periodic dimension (None for bounded ones).
    pub fn periods(&self) -> Vec<Option<f64>> {
        let s = self.cell_side();
        self.dims()
            .iter()
            .map(|d| match *d {
                crate::cover::DimSpec::Periodic { modulus } => Some(modulus as f64 * s),
                crate::cover::DimSpec::Bounded { .. } => None,
            })
            .collect()
    }
}

/// Group same-period candidates into orbits by following the map.
pub fn group_into_orbits(
    candidates: &[PeriodicCandidate],
    map: &dyn MapSystem,
    periods: &[Option<f64>],
    tol: f64,
) -> Vec<Vec<usize>> {
    let mut assigned = vec![false; candidates.len()];
    let mut orbits = Vec::new();
    for i in 0..candidates.len() {
        if assigned[i] {
            continue;
        }
        let mut orbit = vec![i];
        assigned[i] = true;
        let mut u = candidates[i].point.clone();
        for _ in 1..candidates[i].period {
            u = map.eval(&u);
            for (d, p) in periods.iter().enumerate() {
                if let Some(p) = p {
                    u[d] = u[d].rem_euclid(*p);
                }
            }
            if let Some(j) = (0..candidates.len()).find(|&j| {
                !assigned[j]
                    && candidates[j].period == candidates[i].period
                    && dist_max(&candidates[j].point, &u, periods) < tol
            }) {
                assigned[j] = true;
                orbit.push(j);
            }
        }
        orbits.push(orbit);
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::DimSpec;
    use crate::dynsys::{AffineMap, HenonMap};
    use crate::enclose::{enclose_attractor, full_cover};

    struct SquareMinusTwo;

    impl ResidualSystem for SquareMinusTwo {
        fn dim(&self) -> usize {
            1
        }
        fn eval_box(&self, x: &IntervalVector) -> IntervalVector {
            IntervalVector::new(vec![x[0].sqr() - Interval::point(2.0)])
        }
        fn jac_box(&self, x: &IntervalVector) -> IntervalMatrix {
            IntervalMatrix::from_rows(vec![vec![Interval::point(2.0) * x[0]]])
        }
    }

    struct Square;

    impl ResidualSystem for Square {
        fn dim(&self) -> usize {
            1
        }
        fn eval_box(&self, x: &IntervalVector) -> IntervalVector {
            IntervalVector::new(vec![x[0].sqr()])
        }
        fn jac_box(&self, x: &IntervalVector) -> IntervalMatrix {
            IntervalMatrix::from_rows(vec![vec![Interval::point(2.0) * x[0]]])
        }
    }

    struct IdentityResidual;

    impl ResidualSystem for IdentityResidual {
        fn dim(&self) -> usize {
            1
        }
        fn eval_box(&self, x: &IntervalVector) -> IntervalVector {
            IntervalVector::new(vec![x[0]])
        }
        fn jac_box(&self, _x: &IntervalVector) -> IntervalMatrix {
            IntervalMatrix::identity(1)
        }
    }

    #[test]
    fn interval_newton_sqrt2_worked_example() {
        let proof = interval_newton(&SquareMinusTwo, &[1.4], 0.1).unwrap();
        assert!(proof.verified);
        let n = proof.newton_image[0];
        assert!(n.lo() >= 1.4133 && n.hi() <= 1.4155, "N = {n}");
        assert!(n.contains(std::f64::consts::SQRT_2));
        // contraction: re-run with half radius around the image midpoint
        let again = interval_newton(&SquareMinusTwo, &[n.mid()], 0.05).unwrap();
        assert!(again.verified);
    }

    #[test]
    fn interval_newton_sqrt2_unique_zero_grid_scan() {
        // independent uniqueness oracle: scan X at step r/100 for sign changes
        let (center, r) = (1.4f64, 0.1f64);
        let g = |x: f64| x * x - 2.0;
        let mut sign_changes = 0;
        let mut x = center - r;
        let step = r / 100.0;
        while x < center + r {
            if g(x) * g(x + step) < 0.0 {
                sign_changes += 1;
            }
            x += step;
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn interval_newton_zero_at_origin() {
        let proof = interval_newton(&IdentityResidual, &[0.0], 1.0).unwrap();
        assert!(proof.verified);
        assert_eq!(proof.newton_image[0].lo(), 0.0);
        assert_eq!(proof.newton_image[0].hi(), 0.0);
    }

    #[test]
    fn interval_newton_double_root_fails_containment() {
        let proof = interval_newton(&Square, &[1.0], 0.1).unwrap();
        assert!(!proof.verified);
        // jacobian was invertible, image just isn't contained
        assert!(proof.newton_image[0].lo() < 0.9);
    }

    #[test]
    fn henon_fixed_points_proved() {
        let map = HenonMap::new(5.4, -1.0);
        let periods = [None, None];
        for sign in [1.0, -1.0] {
            let x = (-2.0 + sign * (4.0 + 4.0 * 5.4f64).sqrt()) / (2.0 * 5.4);
            let proof = prove_fixed_point(&map, &periods, &[x, -x], 1e-6).unwrap();
            assert!(proof.verified, "fixed point at x = {x}");
            assert!(proof.newton_image.contains_point(&[x, -x]));
            // Newton contraction: half the radius around the image midpoint
            // verifies again
            let mid = proof.newton_image.midpoint();
            let again = prove_fixed_point(&map, &periods, &mid, 0.5e-6).unwrap();
            assert!(again.verified);
        }
        // far from any fixed point
        let bad = prove_fixed_point(&map, &periods, &[0.0, 0.0], 1e-6).unwrap();
        assert!(!bad.verified);
    }

    #[test]
    fn henon_period_two_proved_from_closed_form() {
        let a = 5.4;
        let map = HenonMap::new(a, -1.0);
        let s = (a - 3.0f64).sqrt();
        let x1 = (1.0 + s) / a;
        let x2 = (1.0 - s) / a;
        let z1 = [x1, -x2];
        let z2 = [x2, -x1];
        let periods = [None, None];
        let proof = prove_period_two(&map, &periods, &z1, &z2, 1e-8).unwrap();
        assert!(proof.verified);
        // same point twice violates the separation precondition
        assert!(matches!(
            prove_period_two(&map, &periods, &z1, &z1, 1e-8),
            Err(PeriodicError::CentersTooClose)
        ));
    }

    #[test]
    fn refine_identity_map_yields_all_centers() {
        let grid = GridSpec::new(1, vec![DimSpec::Bounded { lo: -2, hi: 2 }]).unwrap();
        let map = AffineMap::linear(nalgebra::DMatrix::identity(1, 1));
        // identity: every cell maps onto itself only
        let res = crate::enclose::enclose_invariant_outer(
            &grid,
            &map,
            full_cover(&grid),
            0,
            ExecMode::Deterministic,
        )
        .unwrap();
        let sets = refine_cycles(
            &res.graph,
            &grid,
            &map,
            2,
            &NewtonParams::default(),
            ExecMode::Deterministic,
        );
        assert_eq!(sets[0].len(), res.graph.vertex_count());
        assert!(sets[1].is_empty());
        // all candidates distinct (nothing for dedup to merge)
        for (i, a) in sets[0].iter().enumerate() {
            for b in &sets[0][i + 1..] {
                assert!(dist_max(&a.point, &b.point, &grid.periods()) > 1e-3);
            }
        }
    }

    #[test]
    fn refine_contraction_finds_fixed_point() {
        let grid = GridSpec::new(2, vec![DimSpec::Bounded { lo: -4, hi: 4 }]).unwrap();
        // f(x) = 0.5 x + 0.25, fixed point at 0.5
        let map = AffineMap::new(nalgebra::DMatrix::from_row_slice(1, 1, &[0.5]), vec![0.25]);
        let seed = grid.locate(&[0.5]).unwrap();
        let enc = enclose_attractor(seed, &grid, &map, ExecMode::Deterministic).unwrap();
        let sets = refine_cycles(
            &enc.graph,
            &grid,
            &map,
            2,
            &NewtonParams::default(),
            ExecMode::Deterministic,
        );
        assert_eq!(sets[0].len(), 1);
        assert!((sets[0][0].point[0] - 0.5).abs() < 1e-12);
        assert!(sets[1].is_empty(), "fixed point must not reappear at period 2");
    }

    #[test]
    fn report_round_trips_through_json() {
        let cand = PeriodicCandidate {
            point: vec![5.0 / 9.0, 0.0, 0.1],
            period: 3,
            cube_id: 7,
        };
        let report = PeriodicReport::from_candidates(&[vec![], vec![], vec![cand.clone()]]);
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: PeriodicReport = serde_json::from_str(&json).unwrap();
        let sets = back.candidate_sets(3).unwrap();
        assert_eq!(sets[2], vec![cand]);
    }
}
