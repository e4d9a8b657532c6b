//! The abstract map interface and the concrete test systems.
//!
//! Every system carries four evaluations: float value and Jacobian for the
//! heuristic stages, interval value and Jacobian for the rigorous stages.
//! The interval forms must enclose the exact image of every point of the
//! argument box; the float forms are ordinary double arithmetic.

use nalgebra::DMatrix;

use crate::interval::{Interval, IntervalMatrix, IntervalVector};

/// A smooth map of R^n with computable values and derivatives.
///
/// Implementations must guarantee `eval_i(B)` contains `f(x)` and
/// `jac_i(B)` contains `Df(x)` entrywise for every real `x in B`. Maps
/// defined through rigorous ODE solvers (Poincare maps) can plug in behind
/// this same interface.
pub trait MapSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> &str;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn jac(&self, x: &[f64]) -> DMatrix<f64>;
    fn eval_i(&self, bx: &IntervalVector) -> IntervalVector;
    fn jac_i(&self, bx: &IntervalVector) -> IntervalMatrix;
}

/// The solid-torus solenoid map
/// `s(x, y, t) = (0.1 x + 0.5 cos 2 pi t, 0.1 y + 0.5 sin 2 pi t, 2 t)`.
///
/// The angle coordinate is returned unreduced; reduction mod 1 is owned by
/// the cover's periodic dimension, keeping the map itself a smooth record.
#[derive(Debug, Clone, Copy)]
pub struct SmaleMap {
    contraction: f64,
    radius: f64,
}

impl SmaleMap {
    pub fn new() -> Self {
        SmaleMap {
            contraction: 0.1,
            radius: 0.5,
        }
    }
}

impl Default for SmaleMap {
    fn default() -> Self {
        Self::new()
    }
}

impl MapSystem for SmaleMap {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> &str {
        "smale"
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let phase = std::f64::consts::TAU * x[2];
        vec![
            self.contraction * x[0] + self.radius * phase.cos(),
            self.contraction * x[1] + self.radius * phase.sin(),
            2.0 * x[2],
        ]
    }

    fn jac(&self, x: &[f64]) -> DMatrix<f64> {
        let phase = std::f64::consts::TAU * x[2];
        let pi = std::f64::consts::PI;
        DMatrix::from_row_slice(
            3,
            3,
            &[
                self.contraction,
                0.0,
                -pi * phase.sin(),
                0.0,
                self.contraction,
                pi * phase.cos(),
                0.0,
                0.0,
                2.0,
            ],
        )
    }

    fn eval_i(&self, bx: &IntervalVector) -> IntervalVector {
        let c = Interval::around(self.contraction);
        let r = Interval::point(self.radius);
        let phase = Interval::TWO_PI * bx[2];
        IntervalVector::new(vec![
            c * bx[0] + r * phase.cos(),
            c * bx[1] + r * phase.sin(),
            Interval::point(2.0) * bx[2],
        ])
    }

    fn jac_i(&self, bx: &IntervalVector) -> IntervalMatrix {
        let c = Interval::around(self.contraction);
        let phase = Interval::TWO_PI * bx[2];
        let z = Interval::ZERO;
        IntervalMatrix::from_rows(vec![
            vec![c, z, -(Interval::PI * phase.sin())],
            vec![z, c, Interval::PI * phase.cos()],
            vec![z, z, Interval::point(2.0)],
        ])
    }
}

/// The Henon family `H_{a,b}(x, y) = (1 + y - a x^2, b x)`.
#[derive(Debug, Clone, Copy)]
pub struct HenonMap {
    pub a: f64,
    pub b: f64,
}

impl HenonMap {
    pub fn new(a: f64, b: f64) -> Self {
        HenonMap { a, b }
    }
}

impl MapSystem for HenonMap {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "henon"
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![1.0 + x[1] - self.a * x[0] * x[0], self.b * x[0]]
    }

    fn jac(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-2.0 * self.a * x[0], 1.0, self.b, 0.0])
    }

    fn eval_i(&self, bx: &IntervalVector) -> IntervalVector {
        let a = Interval::around(self.a);
        let b = Interval::around(self.b);
        // x^2 through the dedicated square kernel keeps the dependency.
        IntervalVector::new(vec![
            Interval::ONE + bx[1] - a * bx[0].sqr(),
            b * bx[0],
        ])
    }

    fn jac_i(&self, bx: &IntervalVector) -> IntervalMatrix {
        let a = Interval::around(self.a);
        let b = Interval::around(self.b);
        IntervalMatrix::from_rows(vec![
            vec![-(Interval::point(2.0) * a * bx[0]), Interval::ONE],
            vec![b, Interval::ZERO],
        ])
    }
}

/// Affine test system `f(x) = A x + b` with exact interval forms.
///
/// Not a study target; it gives the pipeline stages closed-form behavior to
/// test against (constant Jacobian, known fixed point).
#[derive(Debug, Clone)]
pub struct AffineMap {
    a: DMatrix<f64>,
    b: Vec<f64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Self {
        assert!(a.is_square() && a.nrows() == b.len());
        AffineMap { a, b }
    }

    pub fn linear(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self::new(a, vec![0.0; n])
    }
}

impl MapSystem for AffineMap {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn name(&self) -> &str {
        "affine"
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.b[i];
                for j in 0..n {
                    s += self.a[(i, j)] * x[j];
                }
                s
            })
            .collect()
    }

    fn jac(&self, _x: &[f64]) -> DMatrix<f64> {
        self.a.clone()
    }

    fn eval_i(&self, bx: &IntervalVector) -> IntervalVector {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = Interval::point(self.b[i]);
                for j in 0..n {
                    s = s + Interval::point(self.a[(i, j)]) * bx[j];
                }
                s
            })
            .collect()
    }

    fn jac_i(&self, _bx: &IntervalVector) -> IntervalMatrix {
        IntervalMatrix::from_point(&self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn smale_fixed_point_five_ninths() {
        let s = SmaleMap::new();
        let fp = [5.0 / 9.0, 0.0, 0.0];
        let img = s.eval(&fp);
        assert_vec_close(&img, &fp, 1e-15);
    }

    #[test]
    fn smale_jacobian_at_zero_phase() {
        let s = SmaleMap::new();
        let j = s.jac(&[5.0 / 9.0, 0.0, 0.0]);
        let pi = std::f64::consts::PI;
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.1, 0.0, 0.0, 0.0, 0.1, pi, 0.0, 0.0, 2.0]);
        assert!((j - expected).abs().max() < 1e-12);
    }

    #[test]
    fn smale_interval_image_of_cube() {
        use crate::cover::{DimSpec, GridSpec};
        let g = GridSpec::new(
            4,
            vec![
                DimSpec::Bounded { lo: -16, hi: 16 },
                DimSpec::Bounded { lo: -16, hi: 16 },
                DimSpec::Periodic { modulus: 16 },
            ],
        )
        .unwrap();
        let cube = g.cube(vec![0, 0, 0]).unwrap();
        let s = SmaleMap::new();
        let img = s.eval_i(&g.realize(&cube));
        // t image is exactly [0, 1/8]
        assert_eq!((img[2].lo(), img[2].hi()), (0.0, 0.125));
        // x, y widths bounded by contraction of the cell plus the arc width
        let arc = std::f64::consts::TAU / 16.0;
        assert!(img[0].width() <= 0.1 / 16.0 + 0.5 * arc + 1e-12);
        assert!(img[1].width() <= 0.1 / 16.0 + 0.5 * arc + 1e-12);
    }

    #[test]
    fn henon_trivial_values() {
        let h = HenonMap::new(5.4, -1.0);
        assert_vec_close(&h.eval(&[0.0, 0.0]), &[1.0, 0.0], 0.0);
        let j = h.jac(&[0.0, 0.0]);
        assert_eq!(j[(0, 0)], 0.0);
        assert_eq!(j[(0, 1)], 1.0);
        assert_eq!(j[(1, 0)], -1.0);
        assert_eq!(j[(1, 1)], 0.0);
    }

    #[test]
    fn henon_fixed_point_from_quadratic_formula() {
        // x solves a x^2 + 2x - 1 = 0 when b = -1, y = -x.
        let (a, b) = (5.4, -1.0);
        let h = HenonMap::new(a, b);
        let x = (-2.0 + (4.0 + 4.0 * a).sqrt()) / (2.0 * a);
        let fp = [x, -x];
        let img = h.eval(&fp);
        assert_vec_close(&img, &fp, 1e-12);
        let x2 = (-2.0 - (4.0 + 4.0 * a).sqrt()) / (2.0 * a);
        let fp2 = [x2, -x2];
        assert_vec_close(&h.eval(&fp2), &fp2, 1e-12);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let systems: Vec<Box<dyn MapSystem>> = vec![
            Box::new(SmaleMap::new()),
            Box::new(HenonMap::new(5.4, -1.0)),
        ];
        let h = 1e-5;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for sys in &systems {
            let n = sys.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| rnd()).collect();
                let j = sys.jac(&x);
                for e in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[e] += h;
                    xm[e] -= h;
                    let fp = sys.eval(&xp);
                    let fm = sys.eval(&xm);
                    for r in 0..n {
                        let fd = (fp[r] - fm[r]) / (2.0 * h);
                        assert!(
                            (fd - j[(r, e)]).abs() <= 1e-6,
                            "{} d{r}/d{e} at {x:?}: fd {fd} vs {}",
                            sys.name(),
                            j[(r, e)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn interval_point_consistency_sampled() {
        let systems: Vec<Box<dyn MapSystem>> = vec![
            Box::new(SmaleMap::new()),
            Box::new(HenonMap::new(5.4, -1.0)),
        ];
        let mut seed = 0xdeadbeefcafef00du64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for sys in &systems {
            let n = sys.dim();
            for _ in 0..50 {
                let lo: Vec<f64> = (0..n).map(|_| rnd() * 2.0 - 1.0).collect();
                let w: Vec<f64> = (0..n).map(|_| rnd() * 0.2).collect();
                let bx: IntervalVector = lo
                    .iter()
                    .zip(&w)
                    .map(|(&l, &wd)| Interval::new(l, l + wd).unwrap())
                    .collect();
                let img = sys.eval_i(&bx);
                let jim = sys.jac_i(&bx);
                for _ in 0..50 {
                    let x: Vec<f64> = lo.iter().zip(&w).map(|(&l, &wd)| l + rnd() * wd).collect();
                    let fx = sys.eval(&x);
                    assert!(img.contains_point(&fx), "{}: f({x:?}) outside image", sys.name());
                    let j = sys.jac(&x);
                    assert!(jim.contains_matrix(&j), "{}: Df({x:?}) outside enclosure", sys.name());
                }
            }
        }
    }

    #[test]
    fn smale_xy_contraction_keeps_domain() {
        // images of in-domain cubes stay strictly inside |x|,|y| < 1
        let s = SmaleMap::new();
        let bx = IntervalVector::new(vec![
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(0.0, 1.0).unwrap(),
        ]);
        let img = s.eval_i(&bx);
        assert!(img[0].mag() < 1.0);
        assert!(img[1].mag() < 1.0);
    }

    #[test]
    fn affine_map_forms_agree() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let m = AffineMap::new(a, vec![0.25, -0.5]);
        let x = [0.3, 0.7];
        let fx = m.eval(&x);
        let img = m.eval_i(&IntervalVector::from_point(&x));
        assert!(img.contains_point(&fx));
        assert!(m.jac_i(&img).contains_matrix(&m.jac(&x)));
    }
}
