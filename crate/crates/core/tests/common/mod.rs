//! Shared helpers for the integration and acceptance suites: exact
//! rational oracles for interval soundness, randomized property sweeps,
//! and pipeline builders for the two study systems.

#![allow(dead_code)]

use conecert::cover::{Cube, DimSpec, GridSpec};
use conecert::digraph::DiGraph;
use conecert::dynsys::{HenonMap, SmaleMap};
use conecert::enclose::{enclose_attractor, find_seed, EnclosureResult};
use conecert::interval::{is_positive_definite, Interval, IntervalMatrix, IntervalVector};
use conecert::ExecMode;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------------------
// Exact rational oracle
// ---------------------------------------------------------------------------

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn rat_pow10(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(n))
}

/// pi to 50 decimal digits as a rational bracket of width 1e-49.
fn pi_bracket() -> (BigRational, BigRational) {
    let digits = "31415926535897932384626433832795028841971693993751";
    let num: BigInt = digits.parse().unwrap();
    let den = BigInt::from(10u32).pow(49);
    let lo = BigRational::new(num, den.clone());
    let hi = lo.clone() + BigRational::new(BigInt::one(), den);
    (lo, hi)
}

/// Enclosure of cos(x) for rational x of moderate size: Taylor after
/// reduction by a multiple of 2 pi, remainder from the alternating series.
pub fn cos_oracle(x: &BigRational) -> (BigRational, BigRational) {
    let (pi_lo, pi_hi) = pi_bracket();
    let tau_mid = &pi_lo + &pi_hi;
    let xf: f64 = {
        let n = x.numer().to_string().parse::<f64>().unwrap_or(0.0);
        let d = x.denom().to_string().parse::<f64>().unwrap_or(1.0);
        n / d
    };
    let k = (xf / std::f64::consts::TAU).round();
    let kr = rat(k);
    // reduced argument; the pi bracket contributes |k| * 2e-49 of slack
    let xr = x - &kr * &tau_mid;
    let arg_err = BigRational::from_integer(2.into()) * kr.abs() * rat_pow10(49) + rat_pow10(45);
    let z = &xr * &xr;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut j: u64 = 0;
    let eps = rat_pow10(40);
    loop {
        j += 1;
        let d = BigRational::from_integer(((2 * j - 1) * (2 * j)).into());
        term = term * &z / d;
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        if term.abs() < eps && j >= 3 {
            break;
        }
        assert!(j < 200, "taylor oracle failed to converge");
    }
    let rem = term.abs() + arg_err;
    (&sum - &rem, sum + rem)
}

pub fn sin_oracle(x: &BigRational) -> (BigRational, BigRational) {
    let (pi_lo, pi_hi) = pi_bracket();
    let quarter = BigRational::new(1.into(), 4.into());
    let shift = (&pi_lo + &pi_hi) * quarter;
    let (lo, hi) = cos_oracle(&(x - shift));
    let slack = rat_pow10(45);
    (lo - &slack, hi + slack)
}

pub fn iv_contains_rat(iv: Interval, exact: &BigRational) -> bool {
    &rat(iv.lo()) <= exact && exact <= &rat(iv.hi())
}

fn rand_interval(rng: &mut StdRng, scale: f64) -> Interval {
    let a = (rng.gen::<f64>() - 0.5) * 2.0 * scale;
    let w = rng.gen::<f64>() * scale * 0.5;
    Interval::new(a, a + w).unwrap()
}

fn sample_inside(rng: &mut StdRng, iv: Interval) -> f64 {
    let t: f64 = rng.gen();
    (iv.lo() + t * (iv.hi() - iv.lo())).clamp(iv.lo(), iv.hi())
}

/// Randomized enclosure soundness for +,-,*,/ and sqr/sqrt against the
/// exact rational oracle. Returns the number of checks performed; panics
/// on the first violation.
pub fn arithmetic_soundness_sweep(seed: u64) -> u64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = 0u64;
    for _ in 0..25_000 {
        let (a, b) = (rand_interval(&mut rng, 10.0), rand_interval(&mut rng, 10.0));
        let (x, y) = (sample_inside(&mut rng, a), sample_inside(&mut rng, b));
        let (rx, ry) = (rat(x), rat(y));
        assert!(iv_contains_rat(a + b, &(&rx + &ry)), "add {a} + {b} at {x}+{y}");
        assert!(iv_contains_rat(a - b, &(&rx - &ry)), "sub {a} - {b}");
        assert!(iv_contains_rat(a * b, &(&rx * &ry)), "mul {a} * {b}");
        checks += 3;
    }
    for _ in 0..10_000 {
        let a = rand_interval(&mut rng, 10.0);
        let off = 0.25 + rng.gen::<f64>() * 5.0;
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let (e1, e2) = (sign * off, sign * (off + rng.gen::<f64>()));
        let b = Interval::new(e1.min(e2), e1.max(e2)).unwrap();
        let (x, y) = (sample_inside(&mut rng, a), sample_inside(&mut rng, b));
        let q = a.div(b).expect("denominator excludes zero");
        assert!(iv_contains_rat(q, &(rat(x) / rat(y))), "div {a} / {b}");
        checks += 1;
    }
    for _ in 0..10_000 {
        let a = rand_interval(&mut rng, 20.0);
        let x = sample_inside(&mut rng, a);
        assert!(iv_contains_rat(a.sqr(), &(rat(x) * rat(x))), "sqr {a} at {x}");
        checks += 1;
        let pos = Interval::new(a.lo().abs(), a.lo().abs() + a.width()).unwrap();
        let x = sample_inside(&mut rng, pos);
        let s = pos.sqrt().unwrap();
        let rx = rat(x);
        assert!(rat(s.lo()) * rat(s.lo()) <= rx, "sqrt lower bound {pos}");
        assert!(rx <= rat(s.hi()) * rat(s.hi()), "sqrt upper bound {pos}");
        checks += 1;
    }
    checks
}

/// Trig enclosures against the rational Taylor oracle.
pub fn trig_soundness_sweep(seed: u64, samples: usize) -> u64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = 0u64;
    for i in 0..samples {
        let a = rand_interval(&mut rng, if i % 3 == 0 { 30.0 } else { 4.0 });
        let x = sample_inside(&mut rng, a);
        let rx = rat(x);
        let (clo, chi) = cos_oracle(&rx);
        let c = a.cos();
        assert!(
            rat(c.lo()) <= clo && chi <= rat(c.hi()),
            "cos({a}) = {c} misses oracle at x={x}"
        );
        let (slo, shi) = sin_oracle(&rx);
        let s = a.sin();
        assert!(
            rat(s.lo()) <= slo && shi <= rat(s.hi()),
            "sin({a}) = {s} misses oracle at x={x}"
        );
        checks += 2;
    }
    checks
}

/// Positive-definiteness conservativeness sweep vs a float eigen oracle.
/// Returns (matrices tested, matrices verified PD).
pub fn pd_conservative_sweep(seed: u64, matrices: usize) -> (usize, usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut verified = 0;
    for _ in 0..matrices {
        let n = rng.gen_range(2..=4usize);
        let mut center = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (rng.gen::<f64>() - 0.5) * 4.0;
                center[(i, j)] = v;
                center[(j, i)] = v;
            }
        }
        if rng.gen::<bool>() {
            for i in 0..n {
                center[(i, i)] += n as f64;
            }
        }
        let width: f64 = rng.gen::<f64>() * 0.2;
        let mut a = IntervalMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = Interval::point(center[(i, j)]).inflate(width);
            }
        }
        if !is_positive_definite(&a) {
            continue;
        }
        verified += 1;
        for _ in 0..100 {
            let mut member = center.clone();
            for i in 0..n {
                for j in 0..=i {
                    let v = center[(i, j)] + (rng.gen::<f64>() - 0.5) * 2.0 * width;
                    member[(i, j)] = v;
                    member[(j, i)] = v;
                }
            }
            let eig = nalgebra::SymmetricEigen::new(member);
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > -1e-12, "false positive: member eigenvalue {min}");
        }
    }
    (matrices, verified)
}

// ---------------------------------------------------------------------------
// Cover property sweep
// ---------------------------------------------------------------------------

fn random_grid(rng: &mut StdRng) -> GridSpec {
    let dim = rng.gen_range(1..=3usize);
    let k = rng.gen_range(0..=6u32);
    let dims = (0..dim)
        .map(|_| {
            if rng.gen::<f64>() < 0.4 {
                DimSpec::Periodic {
                    modulus: rng.gen_range(1..=24i64),
                }
            } else {
                let lo = rng.gen_range(-40..20i64);
                let hi = lo + rng.gen_range(1..=60i64);
                DimSpec::Bounded { lo, hi }
            }
        })
        .collect();
    GridSpec::new(k, dims).unwrap()
}

fn random_box(rng: &mut StdRng, grid: &GridSpec) -> IntervalVector {
    let side = grid.cell_side();
    grid.dims()
        .iter()
        .map(|d| match *d {
            DimSpec::Bounded { lo, hi } => {
                let (flo, fhi) = (lo as f64 * side, hi as f64 * side);
                let a = flo + rng.gen::<f64>() * (fhi - flo);
                let w = rng.gen::<f64>() * (fhi - a);
                Interval::new(a, a + w).unwrap()
            }
            DimSpec::Periodic { modulus } => {
                let circumference = modulus as f64 * side;
                let a = rng.gen::<f64>() * circumference * 3.0 - circumference;
                let w = rng.gen::<f64>() * circumference * 1.5;
                Interval::new(a, a + w).unwrap()
            }
        })
        .collect()
}

fn in_supp(grid: &GridSpec, cubes: &[Cube], point: &[f64]) -> bool {
    let mut wrapped = point.to_vec();
    grid.wrap_point(&mut wrapped);
    cubes
        .iter()
        .any(|c| grid.realize(c).contains_point(&wrapped))
}

fn open_overlap(grid: &GridSpec, cube: &Cube, bx: &IntervalVector) -> bool {
    let side = grid.cell_side();
    let cell = grid.realize(cube);
    for d in 0..grid.dim() {
        let (blo, bhi) = (bx[d].lo(), bx[d].hi());
        let (clo, chi) = (cell[d].lo(), cell[d].hi());
        let overlaps = match grid.dims()[d] {
            DimSpec::Bounded { .. } => blo.max(clo) < bhi.min(chi),
            DimSpec::Periodic { modulus } => {
                let circ = modulus as f64 * side;
                let m0 = ((blo - chi) / circ).floor() as i64;
                let m1 = ((bhi - clo) / circ).ceil() as i64;
                (m0..=m1).any(|m| {
                    let s = m as f64 * circ;
                    blo.max(clo + s) < bhi.min(chi + s)
                })
            }
        };
        if !overlaps {
            return false;
        }
    }
    true
}

/// Soundness and minimality of `min_cover` over random boxes (periodic
/// wrap included). Returns the number of boxes exercised.
pub fn min_cover_property_sweep(seed: u64, boxes: usize) -> usize {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut tested = 0usize;
    while tested < boxes {
        let grid = random_grid(&mut rng);
        let bx = random_box(&mut rng, &grid);
        if (0..bx.dim()).any(|d| bx[d].width() == 0.0) {
            continue;
        }
        let Ok(cover) = grid.min_cover(&bx) else {
            continue;
        };
        tested += 1;
        assert!(!cover.is_empty());
        for _ in 0..20 {
            let p: Vec<f64> = (0..bx.dim())
                .map(|d| bx[d].lo() + rng.gen::<f64>() * (bx[d].hi() - bx[d].lo()))
                .collect();
            assert!(in_supp(&grid, &cover, &p), "point {p:?} uncovered");
        }
        for c in &cover {
            assert!(
                open_overlap(&grid, c, &bx),
                "cube {:?} redundant for box in grid {grid:?}",
                c.coords()
            );
        }
    }
    tested
}

// ---------------------------------------------------------------------------
// Graph cycle oracle sweep
// ---------------------------------------------------------------------------

fn random_graph(rng: &mut StdRng, max_n: usize, edge_p: f64) -> DiGraph {
    let grid = GridSpec::new(5, vec![DimSpec::Bounded { lo: -16, hi: 16 }]).unwrap();
    let n = rng.gen_range(1..=max_n);
    let mut g = DiGraph::new();
    for i in 0..n {
        g.add_vertex(grid.cube(vec![i as i64 - 16]).unwrap());
    }
    for s in 0..n as u32 {
        for d in 0..n as u32 {
            if rng.gen::<f64>() < edge_p {
                g.add_edge(s, d);
            }
        }
    }
    g
}

fn adjacency_power_oracle(g: &DiGraph, n_max: usize) -> Vec<Vec<u32>> {
    let n = g.vertex_count();
    let mut adj = vec![vec![false; n]; n];
    for v in 0..n as u32 {
        for &w in g.out_ids(v) {
            adj[v as usize][w as usize] = true;
        }
    }
    let mut power = adj.clone();
    let mut found: Vec<Option<usize>> = vec![None; n];
    for step in 1..=n_max {
        if step > 1 {
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if power[i][k] {
                        for (j, cell) in next[i].iter_mut().enumerate() {
                            *cell |= adj[k][j];
                        }
                    }
                }
            }
            power = next;
        }
        for v in 0..n {
            if power[v][v] && found[v].is_none() {
                found[v] = Some(step);
            }
        }
    }
    let mut sets = vec![Vec::new(); n_max];
    for (v, f) in found.iter().enumerate() {
        if let Some(step) = f {
            sets[step - 1].push(v as u32);
        }
    }
    sets
}

/// `cycle_vertex_sets` against adjacency powers on random graphs.
pub fn cycle_sets_oracle_sweep(seed: u64, graphs: usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    for trial in 0..graphs {
        let g = random_graph(&mut rng, 10, 0.25);
        let n_max = rng.gen_range(1..=4usize);
        assert_eq!(
            g.cycle_vertex_sets(n_max),
            adjacency_power_oracle(&g, n_max),
            "trial {trial}"
        );
    }
}

// ---------------------------------------------------------------------------
// Pipeline builders
// ---------------------------------------------------------------------------

pub fn smale_grid(k: u32) -> GridSpec {
    let m = 1i64 << k;
    GridSpec::new(
        k,
        vec![
            DimSpec::Bounded { lo: -m, hi: m },
            DimSpec::Bounded { lo: -m, hi: m },
            DimSpec::Periodic { modulus: m },
        ],
    )
    .unwrap()
}

pub fn smale_enclosure(k: u32, mode: ExecMode) -> (GridSpec, EnclosureResult) {
    let grid = smale_grid(k);
    let map = SmaleMap::new();
    let seed = find_seed(&grid, &map, &[0.1, 0.1, 0.1], 1000).expect("seed in domain");
    let enc = enclose_attractor(seed, &grid, &map, mode).expect("enclosure terminates");
    (grid, enc)
}

pub fn henon_grid0() -> GridSpec {
    GridSpec::new(
        0,
        vec![DimSpec::Bounded { lo: -2, hi: 2 }, DimSpec::Bounded { lo: -2, hi: 2 }],
    )
    .unwrap()
}

pub fn henon_map() -> HenonMap {
    HenonMap::new(5.4, -1.0)
}
