use std::ops::{Add, Index, Sub};

use super::Interval;

/// A fixed-dimension vector of intervals: an axis-aligned box in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalVector {
    data: Vec<Interval>,
}

impl IntervalVector {
    pub fn new(data: Vec<Interval>) -> Self {
        IntervalVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        IntervalVector {
            data: vec![Interval::ZERO; dim],
        }
    }

    /// Point box `[x, x]` componentwise.
    pub fn from_point(x: &[f64]) -> Self {
        IntervalVector {
            data: x.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    /// Closed max-norm ball of radius `r` around `center`, rounded outward.
    pub fn ball(center: &[f64], r: f64) -> Self {
        assert!(r >= 0.0 && r.is_finite());
        IntervalVector {
            data: center
                .iter()
                .map(|&c| Interval::point(c).inflate(r))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.data.iter()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.data.iter().map(|i| i.mid()).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.data.len() == x.len() && self.data.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn contains_box(&self, other: &IntervalVector) -> bool {
        self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.contains_interval(b))
    }

    /// Strict componentwise containment in the interior.
    pub fn contains_in_interior(&self, other: &IntervalVector) -> bool {
        self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.contains_in_interior(b))
    }

    /// Max-norm upper bound over the box.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|i| i.mag()).fold(0.0, f64::max)
    }

    pub fn hull(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), other.dim());
        IntervalVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.hull(b))
                .collect(),
        }
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.data[i]
    }
}

impl Add for &IntervalVector {
    type Output = IntervalVector;
    fn add(self, rhs: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), rhs.dim());
        IntervalVector {
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl Sub for &IntervalVector {
    type Output = IntervalVector;
    fn sub(self, rhs: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), rhs.dim());
        IntervalVector {
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalVector {
            data: iter.into_iter().collect(),
        }
    }
}
