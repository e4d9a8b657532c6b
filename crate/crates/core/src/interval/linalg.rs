//! Verified linear algebra: rigorous matrix inverse enclosures, interval
//! Cholesky positive-definiteness tests, and interval Gaussian elimination.

use nalgebra::DMatrix;

use super::{Interval, IntervalError, IntervalMatrix, IntervalVector};

/// Rigorous enclosure of `C^{-1}` for an exact float matrix `C`.
///
/// Computes an approximate inverse `B` in floats, then bounds the true
/// inverse with the Neumann series: if `r = ||I - BC||_inf < 1` then
/// `||C^{-1} - B||_inf <= r/(1-r) * ||B||_inf`, and every entry of the
/// difference is bounded by that norm.
pub fn verified_inverse(c: &DMatrix<f64>) -> Result<IntervalMatrix, IntervalError> {
    if !c.is_square() {
        return Err(IntervalError::DimensionMismatch(format!(
            "verified_inverse of {}x{} matrix",
            c.nrows(),
            c.ncols()
        )));
    }
    let n = c.nrows();
    let b = c
        .clone()
        .lu()
        .try_inverse()
        .ok_or(IntervalError::InverseNotVerifiable(f64::INFINITY))?;
    if b.iter().any(|x| !x.is_finite()) {
        return Err(IntervalError::InverseNotVerifiable(f64::INFINITY));
    }
    let bi = IntervalMatrix::from_point(&b);
    let ci = IntervalMatrix::from_point(c);
    let residual = &IntervalMatrix::identity(n) - &(&bi * &ci);
    let r = residual.norm_inf_upper();
    if !(r < 1.0) {
        return Err(IntervalError::InverseNotVerifiable(r));
    }
    let b_norm = bi.norm_inf_upper();
    // delta >= r/(1-r) * ||B||, rounded up.
    let ri = Interval::raw(0.0, r);
    let denom = Interval::ONE - ri;
    let delta = (ri.div(denom)? * Interval::raw(0.0, b_norm)).hi();
    let mut out = IntervalMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = Interval::point(b[(i, j)]).inflate(delta);
        }
    }
    Ok(out)
}

/// Lower bound on the smallest Cholesky pivot if positive definiteness of
/// every symmetric member could be verified, `None` otherwise.
///
/// The matrix is symmetrized by intersecting with its transpose first; the
/// true matrix being enclosed is symmetric, so the intersection is nonempty
/// and only tightens the input. A `None` means "could not verify", never
/// "indefinite".
pub fn pd_margin(a: &IntervalMatrix) -> Option<f64> {
    if !a.is_square() {
        return None;
    }
    let sym = a.intersect(&a.transpose())?;
    cholesky_min_pivot(&sym)
}

/// True if every symmetric real matrix contained in `a` is positive
/// definite, proved by interval Cholesky factorization.
pub fn is_positive_definite(a: &IntervalMatrix) -> bool {
    pd_margin(a).is_some()
}

fn cholesky_min_pivot(a: &IntervalMatrix) -> Option<f64> {
    let n = a.nrows();
    let mut l = IntervalMatrix::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot = pivot - l[(j, k)].sqr();
        }
        if !(pivot.lo() > 0.0) {
            return None;
        }
        min_pivot = min_pivot.min(pivot.lo());
        let ljj = pivot.sqrt().ok()?;
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s.div(ljj).ok()?;
        }
    }
    Some(min_pivot)
}

/// Solve `A x = b` with interval Gaussian elimination (mignitude pivoting).
///
/// A successful solve proves that every real member of `A` is invertible and
/// returns an enclosure of the solution set.
pub fn solve_gauss(a: &IntervalMatrix, b: &IntervalVector) -> Result<IntervalVector, IntervalError> {
    if !a.is_square() || a.nrows() != b.dim() {
        return Err(IntervalError::DimensionMismatch(format!(
            "solve of {}x{} against {}-vector",
            a.nrows(),
            a.ncols(),
            b.dim()
        )));
    }
    let n = a.nrows();
    let mut m = a.clone();
    let mut rhs: Vec<Interval> = (0..n).map(|i| b[i]).collect();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                m[(perm[r1], col)]
                    .mig()
                    .partial_cmp(&m[(perm[r2], col)].mig())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        perm.swap(col, pivot_row);
        let p = m[(perm[col], col)];
        if p.contains(0.0) {
            return Err(IntervalError::SingularPivot);
        }
        for row in (col + 1)..n {
            let factor = m[(perm[row], col)].div(p)?;
            for k in col..n {
                let v = m[(perm[row], k)] - factor * m[(perm[col], k)];
                m[(perm[row], k)] = v;
            }
            rhs[perm[row]] = rhs[perm[row]] - factor * rhs[perm[col]];
        }
    }

    let mut x = vec![Interval::ZERO; n];
    for col in (0..n).rev() {
        let mut s = rhs[perm[col]];
        for k in (col + 1)..n {
            s = s - m[(perm[col], k)] * x[k];
        }
        x[col] = s.div(m[(perm[col], col)])?;
    }
    Ok(x.into_iter().collect())
}
