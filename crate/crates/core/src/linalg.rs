//! Small dense linear-algebra kernels shared by the scan and dissection code.
//!
//! Everything here is single-threaded and deterministic. The matrices involved
//! are small (designs with a handful of columns, trait cross-products up to
//! ~100×100), so hand-rolled Cholesky factorizations are both fast enough and
//! keep results bit-reproducible at any thread count.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Relative pivot tolerance for declaring a design column collinear.
pub const COLLINEARITY_TOL: f64 = 1e-10;

/// A design matrix with its kept-column Gram factor.
///
/// Columns whose Cholesky pivot falls below `tol` times the original diagonal
/// are dropped from the fit; their coefficients are reported as zero. The
/// factorization is done once and can be reused to fit many response matrices
/// against the same design.
#[derive(Debug, Clone)]
pub struct FactoredDesign {
    x: Array2<f64>,
    /// Lower Cholesky factor of the kept-column Gram matrix, row-major, k×k.
    l: Array2<f64>,
    kept: Vec<usize>,
}

impl FactoredDesign {
    pub fn new(x: Array2<f64>, tol: f64) -> Self {
        let q = x.ncols();
        let gram = x.t().dot(&x);
        let mut kept: Vec<usize> = Vec::with_capacity(q);
        let mut l = Array2::<f64>::zeros((q, q));
        for j in 0..q {
            let k = kept.len();
            // Forward-solve the new column against the factor built so far.
            let mut z = vec![0.0_f64; k];
            for (i, &ci) in kept.iter().enumerate() {
                let mut s = gram[(j, ci)];
                for (m, zm) in z.iter().enumerate().take(i) {
                    s -= l[(i, m)] * zm;
                }
                z[i] = s / l[(i, i)];
            }
            let d = gram[(j, j)] - z.iter().map(|v| v * v).sum::<f64>();
            if d <= tol * gram[(j, j)].max(f64::MIN_POSITIVE) {
                continue; // collinear with earlier columns
            }
            for (i, zi) in z.iter().enumerate() {
                l[(k, i)] = *zi;
            }
            l[(k, k)] = d.sqrt();
            kept.push(j);
        }
        FactoredDesign { x, l, kept }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of columns in the original design.
    pub fn q(&self) -> usize {
        self.x.ncols()
    }

    /// Number of columns actually used in the fit.
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// Least-squares coefficients for each column of `y`; q×p with zero rows
    /// for dropped design columns.
    pub fn solve(&self, y: ArrayView2<f64>) -> Array2<f64> {
        let xty = self.x.t().dot(&y);
        self.solve_from_xty(&xty)
    }

    /// Coefficients from a precomputed `X' y` (full q rows).
    pub fn solve_from_xty(&self, xty: &Array2<f64>) -> Array2<f64> {
        let k = self.kept.len();
        let p = xty.ncols();
        let mut b = Array2::<f64>::zeros((k, p));
        for (i, &ci) in self.kept.iter().enumerate() {
            b.row_mut(i).assign(&xty.row(ci));
        }
        solve_lower_inplace(&self.l.view(), &mut b, k);
        solve_lower_transpose_inplace(&self.l.view(), &mut b, k);
        let mut beta = Array2::<f64>::zeros((self.x.ncols(), p));
        for (i, &ci) in self.kept.iter().enumerate() {
            beta.row_mut(ci).assign(&b.row(i));
        }
        beta
    }

    /// Residual matrix `y - x beta`.
    pub fn residuals(&self, y: ArrayView2<f64>, beta: &Array2<f64>) -> Array2<f64> {
        let mut r = y.to_owned();
        r -= &self.x.dot(beta);
        r
    }

    /// Fit and return `(beta, residuals)`.
    pub fn fit(&self, y: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
        let beta = self.solve(y);
        let resid = self.residuals(y, &beta);
        (beta, resid)
    }
}

/// Forward substitution `L z = b` for the leading `k` rows, in place.
fn solve_lower_inplace(l: &ArrayView2<f64>, b: &mut Array2<f64>, k: usize) {
    let p = b.ncols();
    for i in 0..k {
        for jp in 0..p {
            let mut s = b[(i, jp)];
            for m in 0..i {
                s -= l[(i, m)] * b[(m, jp)];
            }
            b[(i, jp)] = s / l[(i, i)];
        }
    }
}

/// Back substitution `L' z = b` for the leading `k` rows, in place.
fn solve_lower_transpose_inplace(l: &ArrayView2<f64>, b: &mut Array2<f64>, k: usize) {
    let p = b.ncols();
    for i in (0..k).rev() {
        for jp in 0..p {
            let mut s = b[(i, jp)];
            for m in (i + 1)..k {
                s -= l[(m, i)] * b[(m, jp)];
            }
            b[(i, jp)] = s / l[(i, i)];
        }
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(a: ArrayView2<f64>, context: &str) -> Result<Array2<f64>> {
    let mut l = a.to_owned();
    if cholesky_lower_inplace(&mut l) {
        Ok(l)
    } else {
        Err(Error::Singular {
            context: context.to_string(),
            suggestion: "matrix is not positive definite".to_string(),
        })
    }
}

/// In-place lower Cholesky; returns false on a non-positive pivot.
/// On success the strict upper triangle is zeroed.
pub fn cholesky_lower_inplace(a: &mut Array2<f64>) -> bool {
    cholesky_lower_inplace_tol(a, 0.0)
}

/// In-place lower Cholesky that also fails when a pivot falls below
/// `rel_tol` times the original diagonal entry, catching numerically
/// rank-deficient matrices whose pivots round to a tiny positive value.
fn cholesky_lower_inplace_tol(a: &mut Array2<f64>, rel_tol: f64) -> bool {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let diag0: Vec<f64> = (0..n).map(|j| a[(j, j)]).collect();
    for j in 0..n {
        let mut d = a[(j, j)];
        for m in 0..j {
            d -= a[(j, m)] * a[(j, m)];
        }
        if !(d > rel_tol * diag0[j].max(f64::MIN_POSITIVE)) {
            return false;
        }
        let dj = d.sqrt();
        a[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for m in 0..j {
                s -= a[(i, m)] * a[(j, m)];
            }
            a[(i, j)] = s / dj;
        }
        for m in (j + 1)..n {
            a[(j, m)] = 0.0;
        }
    }
    true
}

/// Relative pivot floor for declaring a cross-product matrix singular.
const DET_REL_TOL: f64 = 1e-12;

/// log10 of the determinant of a symmetric positive-definite matrix,
/// destroying the workspace. `None` when the matrix is singular to working
/// precision (an exactly duplicated column rounds to a tiny pivot).
pub fn log10_det_spd_inplace(work: &mut Array2<f64>) -> Option<f64> {
    let n = work.nrows();
    if !cholesky_lower_inplace_tol(work, DET_REL_TOL) {
        return None;
    }
    let mut acc = 0.0;
    for j in 0..n {
        acc += work[(j, j)].log10();
    }
    Some(2.0 * acc)
}

/// log10 determinant of a symmetric positive-definite matrix.
pub fn log10_det_spd(a: ArrayView2<f64>, context: &str, suggestion: &str) -> Result<f64> {
    let mut work = a.to_owned();
    log10_det_spd_inplace(&mut work).ok_or_else(|| Error::Singular {
        context: context.to_string(),
        suggestion: suggestion.to_string(),
    })
}

/// Forward-solve `L z = b` for a full square lower-triangular factor.
pub fn solve_lower(l: &Array2<f64>, b: &mut Array2<f64>) {
    let k = l.nrows();
    solve_lower_inplace(&l.view(), b, k);
}

/// Back-solve `L' z = b` for a full square lower-triangular factor.
pub fn solve_lower_transpose(l: &Array2<f64>, b: &mut Array2<f64>) {
    let k = l.nrows();
    solve_lower_transpose_inplace(&l.view(), b, k);
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching eigenvector columns.
pub fn jacobi_eigh(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * frob.max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let vals = Array1::from_iter(order.iter().map(|&i| m[(i, i)]));
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (out, &i) in order.iter().enumerate() {
        vecs.column_mut(out).assign(&v.column(i));
    }
    (vals, vecs)
}
