use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use super::{Interval, IntervalVector};

/// A dense rows x cols matrix of intervals.
///
/// Products and sums enclose all pointwise real matrix products and sums of
/// member matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>, // row-major
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        IntervalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Point-interval image of an exact float matrix.
    pub fn from_point(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = Interval::point(m[(i, j)]);
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn midpoint(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mid())
    }

    pub fn transpose(&self) -> IntervalMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Entrywise intersection; `None` if any entry pair is disjoint.
    pub fn intersect(&self, other: &IntervalMatrix) -> Option<IntervalMatrix> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = Self::zeros(self.rows, self.cols);
        for (k, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            out.data[k] = a.intersect(b)?;
        }
        Some(out)
    }

    pub fn contains_matrix(&self, m: &DMatrix<f64>) -> bool {
        self.rows == m.nrows()
            && self.cols == m.ncols()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)].contains(m[(i, j)])))
    }

    /// Matrix-vector product enclosure.
    pub fn mul_vec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(self.cols, v.dim());
        (0..self.rows)
            .map(|i| {
                let mut acc = Interval::ZERO;
                for j in 0..self.cols {
                    acc = acc + self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    /// Upper bound on the max-row-sum (infinity) operator norm.
    pub fn norm_inf_upper(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                let mut acc = Interval::ZERO;
                for j in 0..self.cols {
                    acc = acc + Interval::raw(0.0, self[(i, j)].mag());
                }
                acc.hi()
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound on the max-column-sum (1) operator norm.
    pub fn norm_one_upper(&self) -> f64 {
        (0..self.cols)
            .map(|j| {
                let mut acc = Interval::ZERO;
                for i in 0..self.rows {
                    acc = acc + Interval::raw(0.0, self[(i, j)].mag());
                }
                acc.hi()
            })
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for IntervalMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntervalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntervalMatrix {
    type Output = IntervalMatrix;
    fn mul(self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimensions disagree: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = IntervalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Interval::ZERO;
                for k in 0..self.cols {
                    acc = acc + self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl Add for &IntervalMatrix {
    type Output = IntervalMatrix;
    fn add(self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = IntervalMatrix::zeros(self.rows, self.cols);
        for (k, (a, b)) in self.data.iter().zip(&rhs.data).enumerate() {
            out.data[k] = *a + *b;
        }
        out
    }
}

impl Sub for &IntervalMatrix {
    type Output = IntervalMatrix;
    fn sub(self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = IntervalMatrix::zeros(self.rows, self.cols);
        for (k, (a, b)) in self.data.iter().zip(&rhs.data).enumerate() {
            out.data[k] = *a - *b;
        }
        out
    }
}
