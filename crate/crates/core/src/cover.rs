//! Dyadic uniform cubical covers of a box domain.
//!
//! A grid at resolution `k` tiles the domain with closed cubes of side
//! `2^-k`; a [`Cube`] is an integer lattice cell. Dimensions are either
//! bounded lattice ranges or periodic (circle) directions, where cell
//! indices are stored reduced mod the modulus. All cell geometry is exact:
//! the resolution cap and coordinate bounds keep every dyadic endpoint
//! representable in an f64 with no rounding.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalVector};

/// Resolutions are capped so `coord * 2^-k` is always exact.
pub const MAX_RESOLUTION: u32 = 26;
/// Lattice coordinates are capped at `2^25` in magnitude.
pub const MAX_COORD: i64 = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cube {0:?} out of range for grid")]
    CubeOutOfRange(Vec<i64>),
    #[error("box escapes the bounded domain in dimension {dim}")]
    Escape { dim: usize },
    #[error("box has invalid (non-finite or huge) endpoints")]
    BadBox,
    #[error("empty cube set")]
    EmptySet,
    #[error("malformed box-list file: {0}")]
    Format(String),
}

/// Per-dimension lattice descriptor at resolution `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimSpec {
    /// Cells `lo..hi-1`; support `[lo, hi] / 2^k`.
    Bounded { lo: i64, hi: i64 },
    /// Cells `0..modulus-1` on a circle of circumference `modulus / 2^k`.
    Periodic { modulus: i64 },
}

/// A uniform dyadic cover of a box domain with optionally periodic
/// dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    k: u32,
    dims: Vec<DimSpec>,
}

/// An integer lattice cell of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    coords: Vec<i64>,
}

impl Cube {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl GridSpec {
    pub fn new(k: u32, dims: Vec<DimSpec>) -> Result<Self, CoverError> {
        if k > MAX_RESOLUTION {
            return Err(CoverError::InvalidGrid(format!(
                "resolution k={k} exceeds cap {MAX_RESOLUTION}"
            )));
        }
        if dims.is_empty() {
            return Err(CoverError::InvalidGrid("zero-dimensional grid".into()));
        }
        for (i, d) in dims.iter().enumerate() {
            match *d {
                DimSpec::Bounded { lo, hi } => {
                    if lo >= hi {
                        return Err(CoverError::InvalidGrid(format!(
                            "dimension {i}: lo {lo} >= hi {hi}"
                        )));
                    }
                    if lo.abs() > MAX_COORD || hi.abs() > MAX_COORD {
                        return Err(CoverError::InvalidGrid(format!(
                            "dimension {i}: bounds exceed {MAX_COORD}"
                        )));
                    }
                }
                DimSpec::Periodic { modulus } => {
                    if modulus < 1 || modulus > MAX_COORD {
                        return Err(CoverError::InvalidGrid(format!(
                            "dimension {i}: modulus {modulus} out of range"
                        )));
                    }
                }
            }
        }
        Ok(GridSpec { k, dims })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[DimSpec] {
        &self.dims
    }

    /// Cube side length `2^-k`, exact.
    pub fn cell_side(&self) -> f64 {
        (-(self.k as i32) as f64).exp2()
    }

    /// The grid refined one level: every cell splits in `2^n` children.
    pub fn refined(&self) -> Result<GridSpec, CoverError> {
        let dims = self
            .dims
            .iter()
            .map(|d| match *d {
                DimSpec::Bounded { lo, hi } => DimSpec::Bounded { lo: 2 * lo, hi: 2 * hi },
                DimSpec::Periodic { modulus } => DimSpec::Periodic { modulus: 2 * modulus },
            })
            .collect();
        GridSpec::new(self.k + 1, dims)
    }

    /// Validate coordinates (reducing periodic ones) into a cube.
    pub fn cube(&self, coords: Vec<i64>) -> Result<Cube, CoverError> {
        if coords.len() != self.dims.len() {
            return Err(CoverError::CubeOutOfRange(coords));
        }
        let mut out = coords.clone();
        for (c, d) in out.iter_mut().zip(&self.dims) {
            match *d {
                DimSpec::Bounded { lo, hi } => {
                    if *c < lo || *c >= hi {
                        return Err(CoverError::CubeOutOfRange(coords));
                    }
                }
                DimSpec::Periodic { modulus } => {
                    *c = c.rem_euclid(modulus);
                }
            }
        }
        Ok(Cube { coords: out })
    }

    /// The `2^n` children of a cube in the refined grid.
    pub fn children(&self, cube: &Cube) -> Vec<Cube> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u32 << n) {
            let coords = cube
                .coords
                .iter()
                .enumerate()
                .map(|(d, &c)| 2 * c + ((mask >> d) & 1) as i64)
                .collect();
            out.push(Cube { coords });
        }
        out
    }

    /// Exact geometric realization: the product of `[c, c+1] / 2^k`.
    pub fn realize(&self, cube: &Cube) -> IntervalVector {
        let s = self.cell_side();
        cube.coords
            .iter()
            .map(|&c| Interval::raw(c as f64 * s, (c + 1) as f64 * s))
            .collect()
    }

    /// Midpoint of the realization, exact dyadic.
    pub fn centre(&self, cube: &Cube) -> Vec<f64> {
        let s = self.cell_side();
        cube.coords.iter().map(|&c| (c as f64 + 0.5) * s).collect()
    }

    /// Support of the full cover as an interval box. Periodic dimensions
    /// report one fundamental domain `[0, modulus/2^k]`.
    pub fn support(&self) -> IntervalVector {
        let s = self.cell_side();
        self.dims
            .iter()
            .map(|d| match *d {
                DimSpec::Bounded { lo, hi } => Interval::raw(lo as f64 * s, hi as f64 * s),
                DimSpec::Periodic { modulus } => Interval::raw(0.0, modulus as f64 * s),
            })
            .collect()
    }

    /// Reduce the periodic coordinates of a point into the fundamental
    /// domain; bounded coordinates pass through.
    pub fn wrap_point(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        let s = self.cell_side();
        for (v, d) in x.iter_mut().zip(&self.dims) {
            if let DimSpec::Periodic { modulus } = *d {
                let period = modulus as f64 * s;
                let mut r = *v - period * (*v / period).floor();
                if r >= period {
                    r -= period;
                }
                if r < 0.0 {
                    r += period;
                }
                *v = r;
            }
        }
    }

    /// The cube containing a point, or `None` if it lies outside a bounded
    /// dimension. Points exactly on a cell boundary go to the lower cell
    /// only at the domain's upper face, otherwise to the upper cell.
    pub fn locate(&self, x: &[f64]) -> Option<Cube> {
        if x.len() != self.dim() {
            return None;
        }
        let scale = (self.k as f64).exp2();
        let mut coords = Vec::with_capacity(x.len());
        for (&v, d) in x.iter().zip(&self.dims) {
            if !v.is_finite() {
                return None;
            }
            let scaled = v * scale;
            if scaled.abs() > 4.0e18 {
                return None;
            }
            let mut idx = scaled.floor() as i64;
            match *d {
                DimSpec::Bounded { lo, hi } => {
                    if idx == hi && scaled == hi as f64 {
                        idx = hi - 1;
                    }
                    if idx < lo || idx >= hi {
                        return None;
                    }
                }
                DimSpec::Periodic { modulus } => {
                    idx = idx.rem_euclid(modulus);
                }
            }
            coords.push(idx);
        }
        Some(Cube { coords })
    }

    fn dim_index_range(&self, d: usize, iv: Interval) -> Result<DimRange, CoverError> {
        let (lo, hi) = (iv.lo(), iv.hi());
        if !lo.is_finite() || !hi.is_finite() {
            return Err(CoverError::BadBox);
        }
        // Scaling by 2^k is exact; the overflow guard keeps the i64 cast safe.
        let scale = (self.k as f64).exp2();
        let (slo, shi) = (lo * scale, hi * scale);
        if slo.abs() > 4.0e18 || shi.abs() > 4.0e18 {
            return Err(CoverError::BadBox);
        }
        // Minimal cover of the closed box by closed cells: a boundary-
        // tangent cell is never needed, so an endpoint exactly on a grid
        // plane excludes the cell on its far side.
        let i_lo = slo.floor() as i64;
        let f_hi = shi.floor();
        let mut i_hi = if f_hi == shi { f_hi as i64 - 1 } else { f_hi as i64 };
        if i_hi < i_lo {
            // Degenerate box on a grid plane still needs one covering cell.
            i_hi = i_lo;
        }
        match self.dims[d] {
            DimSpec::Bounded { lo: dlo, hi: dhi } => {
                if slo < dlo as f64 || shi > dhi as f64 {
                    return Err(CoverError::Escape { dim: d });
                }
                Ok(DimRange::Bounded(i_lo.max(dlo), i_hi.min(dhi - 1)))
            }
            DimSpec::Periodic { modulus } => {
                if i_hi - i_lo + 1 >= modulus {
                    Ok(DimRange::Bounded(0, modulus - 1))
                } else {
                    Ok(DimRange::Wrapped(i_lo, i_hi, modulus))
                }
            }
        }
    }

    /// Minimal cover of `bx` by grid cells, in a deterministic order.
    /// Errors with [`CoverError::Escape`] when the box leaves the support
    /// of a bounded dimension.
    pub fn min_cover(&self, bx: &IntervalVector) -> Result<Vec<Cube>, CoverError> {
        if bx.dim() != self.dim() {
            return Err(CoverError::BadBox);
        }
        let ranges = (0..self.dim())
            .map(|d| self.dim_index_range(d, bx[d]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(cartesian(&ranges))
    }

    /// Cover of the in-domain part of `bx`, plus a flag telling whether the
    /// box exceeded a bounded dimension. Used by the outer (pruning)
    /// enclosure strategy, where leaving the domain is not a failure.
    pub fn min_cover_clipped(&self, bx: &IntervalVector) -> Result<(Vec<Cube>, bool), CoverError> {
        if bx.dim() != self.dim() {
            return Err(CoverError::BadBox);
        }
        let mut escaped = false;
        let mut ranges = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            match self.dim_index_range(d, bx[d]) {
                Ok(r) => ranges.push(r),
                Err(CoverError::Escape { .. }) => {
                    escaped = true;
                    let DimSpec::Bounded { lo, hi } = self.dims[d] else {
                        unreachable!("escape only happens in bounded dims")
                    };
                    let scale = (self.k as f64).exp2();
                    let (slo, shi) = (bx[d].lo() * scale, bx[d].hi() * scale);
                    if shi < lo as f64 || slo > hi as f64 {
                        return Ok((Vec::new(), true));
                    }
                    let i_lo = (slo.floor() as i64).max(lo);
                    let f_hi = shi.floor();
                    let i_hi = if f_hi == shi { f_hi as i64 - 1 } else { f_hi as i64 };
                    let i_hi = i_hi.min(hi - 1);
                    if i_hi < i_lo {
                        return Ok((Vec::new(), true));
                    }
                    ranges.push(DimRange::Bounded(i_lo, i_hi));
                }
                Err(e) => return Err(e),
            }
        }
        Ok((cartesian(&ranges), escaped))
    }

    /// Whether the union of the cubes' closed realizations is connected.
    ///
    /// Cubes are adjacent when their closed cells intersect (vertex
    /// adjacency), with periodic wrap honored; the check is a union-find
    /// over neighbor offsets.
    pub fn is_connected(&self, cubes: &[Cube]) -> Result<bool, CoverError> {
        if cubes.is_empty() {
            return Err(CoverError::EmptySet);
        }
        let index: HashMap<&Cube, usize> =
            cubes.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut uf = UnionFind::new(cubes.len());
        let n = self.dim();
        for (i, cube) in cubes.iter().enumerate() {
            let mut offsets = vec![-1i64; n];
            loop {
                if offsets.iter().any(|&o| o != 0) {
                    let mut neighbor = cube.coords.clone();
                    let mut valid = true;
                    for (dd, spec) in self.dims.iter().enumerate() {
                        let c = &mut neighbor[dd];
                        *c += offsets[dd];
                        match *spec {
                            DimSpec::Bounded { lo, hi } => {
                                if *c < lo || *c >= hi {
                                    valid = false;
                                    break;
                                }
                            }
                            DimSpec::Periodic { modulus } => {
                                *c = c.rem_euclid(modulus);
                            }
                        }
                    }
                    if valid {
                        if let Some(&j) = index.get(&Cube { coords: neighbor }) {
                            uf.union(i, j);
                        }
                    }
                }
                // next offset vector in {-1,0,1}^n
                let mut d = 0;
                while d < n {
                    offsets[d] += 1;
                    if offsets[d] <= 1 {
                        break;
                    }
                    offsets[d] = -1;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        }
        let root = uf.find(0);
        Ok((1..cubes.len()).all(|i| uf.find(i) == root))
    }
}

#[derive(Debug, Clone, Copy)]
enum DimRange {
    Bounded(i64, i64),
    Wrapped(i64, i64, i64),
}

impl DimRange {
    fn indices(&self) -> Vec<i64> {
        match *self {
            DimRange::Bounded(a, b) => (a..=b).collect(),
            DimRange::Wrapped(a, b, m) => {
                let mut v: Vec<i64> = (a..=b).map(|i| i.rem_euclid(m)).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

fn cartesian(ranges: &[DimRange]) -> Vec<Cube> {
    let lists: Vec<Vec<i64>> = ranges.iter().map(|r| r.indices()).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let total: usize = lists.iter().map(|l| l.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; lists.len()];
    'outer: loop {
        out.push(Cube {
            coords: idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect(),
        });
        for d in (0..lists.len()).rev() {
            idx[d] += 1;
            if idx[d] < lists[d].len() {
                continue 'outer;
            }
            idx[d] = 0;
            if d == 0 {
                break 'outer;
            }
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

// ---------------------------------------------------------------------------
// Box-list file format: a header comment with the grid, then one CSV line of
// integer coordinates per cube. Integers are bit-exact, so the file
// round-trips.
// ---------------------------------------------------------------------------

fn domain_descriptor(dims: &[DimSpec]) -> String {
    dims.iter()
        .map(|d| match *d {
            DimSpec::Bounded { lo, hi } => format!("B:{lo}:{hi}"),
            DimSpec::Periodic { modulus } => format!("P:{modulus}"),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_domain_descriptor(s: &str) -> Result<Vec<DimSpec>, CoverError> {
    s.split(',')
        .map(|tok| {
            let parts: Vec<&str> = tok.split(':').collect();
            match parts.as_slice() {
                ["B", lo, hi] => Ok(DimSpec::Bounded {
                    lo: lo.parse().map_err(|_| bad_tok(tok))?,
                    hi: hi.parse().map_err(|_| bad_tok(tok))?,
                }),
                ["P", m] => Ok(DimSpec::Periodic {
                    modulus: m.parse().map_err(|_| bad_tok(tok))?,
                }),
                _ => Err(bad_tok(tok)),
            }
        })
        .collect()
}

fn bad_tok(tok: &str) -> CoverError {
    CoverError::Format(format!("bad domain descriptor token {tok:?}"))
}

pub fn grid_header(grid: &GridSpec) -> String {
    format!(
        "# dim={} k={} domain={}",
        grid.dim(),
        grid.k(),
        domain_descriptor(grid.dims())
    )
}

pub fn parse_grid_header(line: &str) -> Result<GridSpec, CoverError> {
    let line = line.trim();
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| CoverError::Format("missing '#' header".into()))?
        .trim();
    let mut dim = None;
    let mut k = None;
    let mut dims = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("dim=") {
            dim = Some(v.parse::<usize>().map_err(|_| CoverError::Format(field.into()))?);
        } else if let Some(v) = field.strip_prefix("k=") {
            k = Some(v.parse::<u32>().map_err(|_| CoverError::Format(field.into()))?);
        } else if let Some(v) = field.strip_prefix("domain=") {
            dims = Some(parse_domain_descriptor(v)?);
        }
    }
    let (dim, k, dims) = match (dim, k, dims) {
        (Some(d), Some(k), Some(ds)) => (d, k, ds),
        _ => return Err(CoverError::Format("incomplete header".into())),
    };
    if dims.len() != dim {
        return Err(CoverError::Format("header dim mismatch".into()));
    }
    GridSpec::new(k, dims)
}

/// Write a box list. Cubes are emitted in sorted order for determinism.
pub fn write_box_list<W: Write>(w: &mut W, grid: &GridSpec, cubes: &[Cube]) -> std::io::Result<()> {
    writeln!(w, "{}", grid_header(grid))?;
    let mut sorted: Vec<&Cube> = cubes.iter().collect();
    sorted.sort();
    for c in sorted {
        let line = c
            .coords
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_box_list<R: BufRead>(r: &mut R) -> Result<(GridSpec, Vec<Cube>), CoverError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoverError::Format("empty file".into()))?
        .map_err(|e| CoverError::Format(e.to_string()))?;
    let grid = parse_grid_header(&header)?;
    let mut cubes = Vec::new();
    for line in lines {
        let line = line.map_err(|e| CoverError::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| CoverError::Format(line.into())))
            .collect::<Result<Vec<i64>, _>>()?;
        cubes.push(grid.cube(coords)?);
    }
    Ok((grid, cubes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d_bounded(k: u32) -> GridSpec {
        GridSpec::new(k, vec![DimSpec::Bounded { lo: -4, hi: 4 }]).unwrap()
    }

    #[test]
    fn realize_unit_cube_at_origin() {
        let g = GridSpec::new(
            0,
            vec![DimSpec::Bounded { lo: 0, hi: 2 }, DimSpec::Bounded { lo: 0, hi: 2 }],
        )
        .unwrap();
        let c = g.cube(vec![0, 0]).unwrap();
        let b = g.realize(&c);
        assert_eq!((b[0].lo(), b[0].hi()), (0.0, 1.0));
        assert_eq!((b[1].lo(), b[1].hi()), (0.0, 1.0));
    }

    #[test]
    fn realize_negative_cell() {
        let g = grid_1d_bounded(2);
        let c = g.cube(vec![-4]).unwrap();
        let b = g.realize(&c);
        assert_eq!((b[0].lo(), b[0].hi()), (-1.0, -0.75));
    }

    #[test]
    fn realize_periodic_last_cell() {
        let g = GridSpec::new(4, vec![DimSpec::Periodic { modulus: 16 }]).unwrap();
        let c = g.cube(vec![15]).unwrap();
        let b = g.realize(&c);
        assert_eq!((b[0].lo(), b[0].hi()), (15.0 / 16.0, 1.0));
    }

    #[test]
    fn min_cover_interior_box() {
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::new(0.1, 0.3).unwrap()]);
        let cover = g.min_cover(&bx).unwrap();
        let coords: Vec<i64> = cover.iter().map(|c| c.coords()[0]).collect();
        assert_eq!(coords, vec![0, 1]);
    }

    #[test]
    fn min_cover_periodic_wrap() {
        let g = GridSpec::new(2, vec![DimSpec::Periodic { modulus: 4 }]).unwrap();
        let bx = IntervalVector::new(vec![Interval::new(0.9, 1.1).unwrap()]);
        let mut coords: Vec<i64> = g
            .min_cover(&bx)
            .unwrap()
            .iter()
            .map(|c| c.coords()[0])
            .collect();
        coords.sort_unstable();
        assert_eq!(coords, vec![0, 3]);
    }

    #[test]
    fn min_cover_escape() {
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::new(0.95, 1.05).unwrap()]);
        assert_eq!(g.min_cover(&bx), Err(CoverError::Escape { dim: 0 }));
    }

    #[test]
    fn min_cover_exact_plane_endpoints_minimal() {
        // [0, 0.5] at k=2 is covered by exactly cells 0 and 1; the tangent
        // cells -1 and 2 are not needed.
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::new(0.0, 0.5).unwrap()]);
        let coords: Vec<i64> = g
            .min_cover(&bx)
            .unwrap()
            .iter()
            .map(|c| c.coords()[0])
            .collect();
        assert_eq!(coords, vec![0, 1]);
    }

    #[test]
    fn min_cover_degenerate_point_on_plane() {
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::point(0.25)]);
        let cover = g.min_cover(&bx).unwrap();
        assert_eq!(cover.len(), 1);
        assert!(g.realize(&cover[0]).contains_point(&[0.25]));
    }

    #[test]
    fn min_cover_full_circle_when_wider_than_modulus() {
        let g = GridSpec::new(2, vec![DimSpec::Periodic { modulus: 4 }]).unwrap();
        let bx = IntervalVector::new(vec![Interval::new(0.3, 1.5).unwrap()]);
        assert_eq!(g.min_cover(&bx).unwrap().len(), 4);
    }

    #[test]
    fn min_cover_boundary_touch_inside_domain_no_escape() {
        // hi lands exactly on the domain edge: inside, covered by the last cell.
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::new(0.9, 1.0).unwrap()]);
        let coords: Vec<i64> = g
            .min_cover(&bx)
            .unwrap()
            .iter()
            .map(|c| c.coords()[0])
            .collect();
        assert_eq!(coords, vec![3]);
    }

    #[test]
    fn clipped_cover_reports_escape() {
        let g = grid_1d_bounded(2);
        let bx = IntervalVector::new(vec![Interval::new(0.9, 1.3).unwrap()]);
        let (cover, escaped) = g.min_cover_clipped(&bx).unwrap();
        assert!(escaped);
        assert_eq!(cover.len(), 1);
        assert_eq!(cover[0].coords()[0], 3);
        let bx2 = IntervalVector::new(vec![Interval::new(5.0, 6.0).unwrap()]);
        let (cover2, escaped2) = g.min_cover_clipped(&bx2).unwrap();
        assert!(escaped2 && cover2.is_empty());
    }

    #[test]
    fn connectivity_single_and_gap() {
        let g = grid_1d_bounded(2);
        let single = vec![g.cube(vec![0]).unwrap()];
        assert!(g.is_connected(&single).unwrap());
        let gap = vec![g.cube(vec![0]).unwrap(), g.cube(vec![2]).unwrap()];
        assert!(!g.is_connected(&gap).unwrap());
        let touching = vec![g.cube(vec![0]).unwrap(), g.cube(vec![1]).unwrap()];
        assert!(g.is_connected(&touching).unwrap());
        assert_eq!(g.is_connected(&[]), Err(CoverError::EmptySet));
    }

    #[test]
    fn connectivity_periodic_wrap() {
        let g = GridSpec::new(2, vec![DimSpec::Periodic { modulus: 4 }]).unwrap();
        let ends = vec![g.cube(vec![0]).unwrap(), g.cube(vec![3]).unwrap()];
        assert!(g.is_connected(&ends).unwrap());
    }

    #[test]
    fn connectivity_diagonal_counts() {
        let g = GridSpec::new(
            1,
            vec![DimSpec::Bounded { lo: 0, hi: 4 }, DimSpec::Bounded { lo: 0, hi: 4 }],
        )
        .unwrap();
        // Vertex-adjacent diagonal cells are connected.
        let diag = vec![g.cube(vec![0, 0]).unwrap(), g.cube(vec![1, 1]).unwrap()];
        assert!(g.is_connected(&diag).unwrap());
    }

    #[test]
    fn locate_points() {
        let g = grid_1d_bounded(2);
        assert_eq!(g.locate(&[0.3]).unwrap().coords(), &[1]);
        assert_eq!(g.locate(&[1.0]).unwrap().coords(), &[3]); // upper face
        assert!(g.locate(&[1.1]).is_none());
        let p = GridSpec::new(2, vec![DimSpec::Periodic { modulus: 4 }]).unwrap();
        assert_eq!(p.locate(&[1.3]).unwrap().coords(), &[1]);
        assert_eq!(p.locate(&[-0.1]).unwrap().coords(), &[3]);
    }

    #[test]
    fn refined_grid_and_children() {
        let g = grid_1d_bounded(2);
        let r = g.refined().unwrap();
        assert_eq!(r.k(), 3);
        assert_eq!(r.dims()[0], DimSpec::Bounded { lo: -8, hi: 8 });
        let c = g.cube(vec![-2]).unwrap();
        let kids = g.children(&c);
        let mut coords: Vec<i64> = kids.iter().map(|k| k.coords()[0]).collect();
        coords.sort_unstable();
        assert_eq!(coords, vec![-4, -3]);
        // children tile the parent exactly
        let parent = g.realize(&c);
        for kid in &kids {
            let kb = r.realize(kid);
            assert!(parent.contains_box(&kb));
        }
    }

    #[test]
    fn wrap_point_reduces_periodic() {
        let g = GridSpec::new(4, vec![DimSpec::Periodic { modulus: 16 }]).unwrap();
        let mut p = [1.75];
        g.wrap_point(&mut p);
        assert!((p[0] - 0.75).abs() < 1e-15);
        let mut q = [-0.25];
        g.wrap_point(&mut q);
        assert!((q[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn box_list_round_trip() {
        let g = GridSpec::new(
            4,
            vec![
                DimSpec::Bounded { lo: -16, hi: 16 },
                DimSpec::Bounded { lo: -16, hi: 16 },
                DimSpec::Periodic { modulus: 16 },
            ],
        )
        .unwrap();
        let cubes = vec![
            g.cube(vec![0, -3, 5]).unwrap(),
            g.cube(vec![-16, 15, 0]).unwrap(),
            g.cube(vec![7, 7, 15]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_box_list(&mut buf, &g, &cubes).unwrap();
        let (g2, cubes2) = read_box_list(&mut buf.as_slice()).unwrap();
        assert_eq!(g, g2);
        let mut sorted = cubes.clone();
        sorted.sort();
        assert_eq!(cubes2, sorted);
        // byte-identical on rewrite
        let mut buf2 = Vec::new();
        write_box_list(&mut buf2, &g2, &cubes2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(27, vec![DimSpec::Bounded { lo: 0, hi: 1 }]).is_err());
        assert!(GridSpec::new(2, vec![DimSpec::Bounded { lo: 3, hi: 3 }]).is_err());
        assert!(GridSpec::new(2, vec![DimSpec::Periodic { modulus: 0 }]).is_err());
        assert!(GridSpec::new(2, vec![]).is_err());
    }
}
