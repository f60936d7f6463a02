//! Dense complex linear algebra used by the engine.
//!
//! The steady-state moment equation `A X + X Aᵀ + D = 0` is solved by
//! vectorizing into an `n² × n²` system and factoring it once. Realistic
//! parameter sets span ten or more decades of rates, so the first LU solution
//! is refined with residuals accumulated in double-double arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_REFINEMENTS: usize = 6;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    fn add(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let e = e + self.lo;
        let hi = s + e;
        Self { hi, lo: e - (hi - s) }
    }

    #[inline]
    fn add_prod(self, a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        self.add(p).add(e)
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    #[inline]
    fn add(self, z: Complex64) -> Self {
        Self { re: self.re.add(z.re), im: self.im.add(z.im) }
    }

    #[inline]
    fn add_prod(self, a: Complex64, b: Complex64) -> Self {
        Self {
            re: self.re.add_prod(a.re, b.re).add_prod(-a.im, b.im),
            im: self.im.add_prod(a.re, b.im).add_prod(a.im, b.re),
        }
    }

    #[inline]
    fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `A X + X Aᵀ + D` with every entry accumulated in double-double.
pub fn lyapunov_residual(a: &CMatrix, x: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = CDd::default().add(d[(i, j)]);
        for k in 0..n {
            acc = acc.add_prod(a[(i, k)], x[(k, j)]);
            acc = acc.add_prod(x[(i, k)], a[(j, k)]);
        }
        acc.value()
    })
}

/// Row-major vectorization of `X ↦ A X + X Aᵀ`.
pub fn kronecker_sum(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut l = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                l[(row, k * n + j)] += a[(i, k)];
                l[(row, i * n + k)] += a[(j, k)];
            }
        }
    }
    l
}

fn vec_rows(m: &CMatrix) -> CVector {
    let n = m.nrows();
    CVector::from_fn(n * n, |idx, _| m[(idx / n, idx % n)])
}

fn unvec_rows(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    pub x: CMatrix,
    /// `‖A X + X Aᵀ + D‖_F / ‖D‖_F` (absolute when `D = 0`).
    pub relative_residual: f64,
    /// Ratio of the largest to smallest LU pivot magnitude.
    pub condition_estimate: f64,
    pub refinements: usize,
}

/// Solves `A X + X Aᵀ + D = 0`. Returns `None` if the vectorized operator is
/// exactly singular.
pub fn solve_lyapunov(a: &CMatrix, d: &CMatrix) -> Option<LyapunovSolution> {
    let n = a.nrows();
    assert_eq!(a.shape(), (n, n));
    assert_eq!(d.shape(), (n, n));

    let lu = kronecker_sum(a).lu();
    let u = lu.u();
    let pivots: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
    let max_pivot = pivots.iter().cloned().fold(0.0, f64::max);
    let min_pivot = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_pivot == 0.0 || !min_pivot.is_finite() {
        return None;
    }

    let mut rhs = vec_rows(d);
    rhs.neg_mut();
    let mut x = unvec_rows(&lu.solve(&rhs)?, n);

    let d_norm = d.norm();
    let scale = if d_norm > 0.0 { d_norm } else { 1.0 };
    let mut residual = lyapunov_residual(a, &x, d);
    let mut refinements = 0;
    for _ in 0..MAX_REFINEMENTS {
        let mut r = vec_rows(&residual);
        r.neg_mut();
        let dx = unvec_rows(&lu.solve(&r)?, n);
        let step = dx.norm();
        x += dx;
        refinements += 1;
        residual = lyapunov_residual(a, &x, d);
        if step <= f64::EPSILON * x.norm() {
            break;
        }
    }

    Some(LyapunovSolution {
        x,
        relative_residual: residual.norm() / scale,
        condition_estimate: max_pivot / min_pivot,
        refinements,
    })
}

/// Eigenvalues from a complex Schur decomposition.
pub fn eigenvalues(a: &CMatrix) -> Option<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 100_000)?;
    let (_, t) = schur.unpack();
    Some(t.diagonal().iter().copied().collect())
}

/// `a⁻¹ b` by LU; `None` when `a` is singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().solve(b)
}

/// Similarity transform `S⁻¹ A S` for diagonal `S = diag(scale)`.
pub fn scale_drift(a: &CMatrix, scale: &[f64]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (scale[j] / scale[i]))
}

/// `S⁻¹ D S⁻¹` for diagonal `S = diag(scale)`.
pub fn scale_noise(d: &CMatrix, scale: &[f64]) -> CMatrix {
    CMatrix::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)] / (scale[i] * scale[j]))
}

/// `S X S` for diagonal `S = diag(scale)`; inverse of [`scale_noise`].
pub fn unscale_moments(x: &CMatrix, scale: &[f64]) -> CMatrix {
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * (scale[i] * scale[j]))
}
