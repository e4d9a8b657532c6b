//! Self-contained rigorous enclosures of cos and sin.
//!
//! Strategy: reduce the argument by an integer multiple of the 2*pi
//! enclosure, evaluate the cosine Taylor series in interval arithmetic with
//! an alternating-series remainder, and handle interval arguments by
//! combining endpoint enclosures with conservative detection of interior
//! extrema (multiples of pi).

use super::Interval;

// Series truncation: terms z^j/(2j)! for j = 0..=N_TERMS, remainder bounded
// by the first omitted term. Valid while z < (2N+3)(2N+4); after reduction
// z = x^2 <= ~11, far below that.
const N_TERMS: usize = 14;

// Signed interval coefficients (-1)^j / (2j)!.
fn coefficients() -> &'static [Interval; N_TERMS + 2] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Interval; N_TERMS + 2]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Interval::ZERO; N_TERMS + 2];
        let mut inv = Interval::ONE; // 1/(2j)! built incrementally
        t[0] = Interval::ONE;
        for j in 1..=N_TERMS + 1 {
            let f1 = Interval::point((2 * j - 1) as f64);
            let f2 = Interval::point((2 * j) as f64);
            inv = inv.div(f1 * f2).expect("factorial factors are positive");
            t[j] = if j % 2 == 0 { inv } else { -inv };
        }
        t
    })
}

/// Enclosure of cos over a reduced interval argument (|x| a few multiples
/// of pi at most). Sound for any argument; precision degrades with |x|.
fn cos_reduced(x: Interval) -> Interval {
    let z = x.sqr();
    let coef = coefficients();
    let mut acc = coef[N_TERMS];
    for j in (0..N_TERMS).rev() {
        acc = acc * z + coef[j];
    }
    // First omitted term bounds the remainder (alternating, decreasing).
    let zm = Interval::raw(0.0, z.hi());
    let mut zp = Interval::ONE;
    for _ in 0..=N_TERMS {
        zp = zp * zm;
    }
    let rem = (zp * coef[N_TERMS + 1]).mag();
    let enclosed = acc.inflate(rem);
    enclosed
        .intersect(&Interval::UNIT)
        .expect("cos enclosure intersects [-1,1]")
}

/// Tight enclosure of cos at a single float argument.
pub(super) fn cos_point(x: f64) -> Interval {
    debug_assert!(x.is_finite());
    if x.abs() > 1e15 {
        return Interval::UNIT;
    }
    let k = (x / std::f64::consts::TAU).round();
    let xr = Interval::point(x) - Interval::TWO_PI * Interval::point(k);
    cos_reduced(xr)
}

pub(super) fn cos_interval(a: Interval) -> Interval {
    if !a.lo().is_finite() || !a.hi().is_finite() {
        return Interval::UNIT;
    }
    if a.width() >= Interval::TWO_PI.lo() || a.lo().abs() > 1e15 || a.hi().abs() > 1e15 {
        return Interval::UNIT;
    }
    let mut res = cos_point(a.lo()).hull(&cos_point(a.hi()));
    // Force the extremal values for any multiple of pi that may lie inside.
    let m_lo = (a.lo() / std::f64::consts::PI).floor() as i64 - 1;
    let m_hi = (a.hi() / std::f64::consts::PI).ceil() as i64 + 1;
    for m in m_lo..=m_hi {
        let mpi = Interval::PI * Interval::point(m as f64);
        if mpi.hi() >= a.lo() && mpi.lo() <= a.hi() {
            if m.rem_euclid(2) == 0 {
                res = res.hull(&Interval::ONE);
            } else {
                res = res.hull(&Interval::point(-1.0));
            }
        }
    }
    res.intersect(&Interval::UNIT)
        .expect("cos enclosure intersects [-1,1]")
}

pub(super) fn sin_interval(a: Interval) -> Interval {
    // sin x = cos(x - pi/2); the shift costs one ulp of width.
    cos_interval(a - Interval::HALF_PI)
}
