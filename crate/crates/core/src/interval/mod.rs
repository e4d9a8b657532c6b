//! Outward-rounded interval arithmetic and verified linear algebra.
//!
//! Every operation on [`Interval`] values returns an interval that contains
//! the exact real image of all points of its operands. Endpoint rounding is
//! handled by one-ulp outward inflation of the correctly rounded result,
//! with an exactness test (two-sum / fma residual) that keeps dyadic
//! arithmetic exact. Exact dyadic endpoints matter downstream: grid geometry
//! and the doubling of the solenoid angle coordinate must not pick up
//! spurious width.

mod linalg;
mod matrix;
mod trig;
mod vector;

pub use linalg::{is_positive_definite, pd_margin, solve_gauss, verified_inverse};
pub use matrix::IntervalMatrix;
pub use vector::IntervalVector;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval endpoints [{0}, {1}]")]
    InvalidEndpoints(f64, f64),
    #[error("division by zero-containing interval")]
    DivisionByZero,
    #[error("domain violation: {0}")]
    Domain(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inverse not verifiable (residual norm {0} >= 1)")]
    InverseNotVerifiable(f64),
    #[error("interval linear solve failed: pivot contains zero")]
    SingularPivot,
}

/// A closed interval `[lo, hi]` of reals with `lo <= hi`.
///
/// Endpoints are finite for constructor inputs; arithmetic may saturate to
/// infinite endpoints on overflow, which remains a sound (if useless)
/// enclosure. NaN endpoints never occur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

// Bit patterns bracketing pi: the f64 constant rounds down, so the real
// value lies strictly between it and its successor.
const PI_LO_BITS: u64 = 0x400921FB54442D18;
const TAU_LO_BITS: u64 = 0x401921FB54442D18;
const FRAC_PI_2_LO_BITS: u64 = 0x3FF921FB54442D18;

impl Interval {
    /// Tight enclosure of pi.
    pub const PI: Interval = Interval {
        lo: f64::from_bits(PI_LO_BITS),
        hi: f64::from_bits(PI_LO_BITS + 1),
    };
    /// Tight enclosure of 2*pi.
    pub const TWO_PI: Interval = Interval {
        lo: f64::from_bits(TAU_LO_BITS),
        hi: f64::from_bits(TAU_LO_BITS + 1),
    };
    /// Tight enclosure of pi/2.
    pub const HALF_PI: Interval = Interval {
        lo: f64::from_bits(FRAC_PI_2_LO_BITS),
        hi: f64::from_bits(FRAC_PI_2_LO_BITS + 1),
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::InvalidEndpoints(lo, hi))
        }
    }

    /// `[x, x]`. Panics on non-finite input.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval from non-finite {x}");
        Interval { lo: x, hi: x }
    }

    /// One-ulp bracket around `x`; encloses any real that rounds to `x`.
    ///
    /// Used for map constants written as decimal literals (`0.1`, `5.4`)
    /// whose exact real value is not representable.
    pub fn around(x: f64) -> Self {
        assert!(x.is_finite());
        Interval {
            lo: x.next_down(),
            hi: x.next_up(),
        }
    }

    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi);
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        add_hi(self.hi, -self.lo)
    }

    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    /// Magnitude: `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Strict containment in the interior.
    pub fn contains_in_interior(&self, other: &Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.contains_interval(self)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::raw(lo, hi))
    }

    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(IntervalError::DivisionByZero);
        }
        if self.lo == 0.0 && self.hi == 0.0 {
            return Ok(Interval::ZERO);
        }
        let c = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = c.iter().map(|&(a, b)| div_lo(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| div_hi(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::raw(lo, hi))
    }

    /// Reciprocal `1/self`; same precondition as [`Interval::div`].
    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.div(self)
    }

    /// Enclosure of `{x^2 : x in self}`. Tighter than `self * self` because
    /// the dependency between the two factors is kept.
    pub fn sqr(self) -> Interval {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            let m = self.mag();
            Interval::raw(0.0, mul_hi(m, m))
        } else {
            let (a, b) = (self.mig(), self.mag());
            Interval::raw(mul_lo(a, a).max(0.0), mul_hi(b, b))
        }
    }

    /// Enclosure of the square root; requires `lo >= 0`.
    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::Domain(
                "sqrt of interval with negative lower bound",
            ));
        }
        Ok(Interval::raw(sqrt_lo(self.lo), sqrt_hi(self.hi)))
    }

    /// Enclosure of `{cos x : x in self}` with interior extrema detected.
    pub fn cos(self) -> Interval {
        trig::cos_interval(self)
    }

    /// Enclosure of `{sin x : x in self}` with interior extrema detected.
    pub fn sin(self) -> Interval {
        trig::sin_interval(self)
    }

    /// Inflation of the interval by a nonnegative float on both sides.
    pub fn inflate(self, r: f64) -> Interval {
        debug_assert!(r >= 0.0);
        Interval::raw(add_lo(self.lo, -r), add_hi(self.hi, r))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::raw(add_lo(self.lo, rhs.lo), add_hi(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::raw(add_lo(self.lo, -rhs.hi), add_hi(self.hi, -rhs.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = c.iter().map(|&(a, b)| mul_lo(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| mul_hi(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::raw(lo, hi)
    }
}

// ---------------------------------------------------------------------------
// Directed endpoint arithmetic.
//
// Round-to-nearest results are corrected outward by one ulp unless the
// residual proves them exact. The two-sum residual is exact for any finite
// addition; the fma residual of a product is exact whenever the product is
// comfortably normal, hence the magnitude guard.
// ---------------------------------------------------------------------------

const FMA_EXACT_GUARD: f64 = 1e-250;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    let aa = s - bb;
    (a - aa) + (b - bb)
}

#[inline]
pub(crate) fn add_lo(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && two_sum_err(a, b, s) >= 0.0 {
        s
    } else {
        s.next_down()
    }
}

#[inline]
pub(crate) fn add_hi(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && two_sum_err(a, b, s) <= 0.0 {
        s
    } else {
        s.next_up()
    }
}

#[inline]
pub(crate) fn mul_lo(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_finite() && p.abs() > FMA_EXACT_GUARD && a.mul_add(b, -p) >= 0.0 {
        p
    } else {
        p.next_down()
    }
}

#[inline]
pub(crate) fn mul_hi(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_finite() && p.abs() > FMA_EXACT_GUARD && a.mul_add(b, -p) <= 0.0 {
        p
    } else {
        p.next_up()
    }
}

#[inline]
fn div_lo(a: f64, b: f64) -> f64 {
    (a / b).next_down()
}

#[inline]
fn div_hi(a: f64, b: f64) -> f64 {
    (a / b).next_up()
}

#[inline]
fn sqrt_lo(x: f64) -> f64 {
    let r = x.sqrt();
    if r.abs() > FMA_EXACT_GUARD && r.mul_add(r, -x) == 0.0 {
        r
    } else {
        r.next_down().max(0.0)
    }
}

#[inline]
fn sqrt_hi(x: f64) -> f64 {
    let r = x.sqrt();
    if r.abs() > FMA_EXACT_GUARD && r.mul_add(r, -x) == 0.0 {
        r
    } else {
        r.next_up()
    }
}
