//! Dense decompositions sized for this library: symmetric Jacobi
//! eigendecomposition, one-sided Jacobi SVD, and Cholesky. Matrices here are
//! at most a few hundred rows, where Jacobi methods are simple, accurate,
//! and fast enough.

use super::matrix::{dot, Matrix};
use crate::{Error, Real, Result};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `A = V diag(values) Vᵀ` of a symmetric matrix.
/// Eigenvalues ascend; `vectors` holds eigenvectors as columns.
pub struct SymEigen<R> {
    pub values: Vec<R>,
    pub vectors: Matrix<R>,
}

/// Cyclic two-sided Jacobi for symmetric matrices.
pub fn sym_eigen<R: Real>(m: &Matrix<R>) -> Result<SymEigen<R>> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidMatrix("eigen of non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        return Ok(SymEigen {
            values: (0..n).map(|i| a[(i, i)]).collect(),
            vectors: v,
        });
    }
    let eps = R::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)] * a[(p, q)];
            }
        }
        let scale = a.max_abs().max(R::one());
        if off.sqrt() <= eps * scale * R::of(n as f64) {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= eps * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (R::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + R::one()).sqrt());
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                let tau = s / (R::one() + c);
                a[(p, p)] = a[(p, p)] - t * apq;
                a[(q, q)] = a[(q, q)] + t * apq;
                a[(p, q)] = R::zero();
                a[(q, p)] = R::zero();
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip - s * (aiq + tau * aip);
                    a[(p, i)] = a[(i, p)];
                    a[(i, q)] = aiq + s * (aip - tau * aiq);
                    a[(q, i)] = a[(i, q)];
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<R> = (0..n).map(|i| a[(i, i)]).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| vals[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new)] = v[(r, old)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Thin SVD `M = U diag(sigma) Vᵀ`; singular values descend.
pub struct Svd<R> {
    pub u: Matrix<R>,
    pub sigma: Vec<R>,
    pub v: Matrix<R>,
}

/// One-sided (Hestenes) Jacobi SVD. Works on the taller orientation and
/// swaps factors back, so any shape is accepted.
pub fn svd<R: Real>(m: &Matrix<R>) -> Svd<R> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let rows = m.rows();
    let n = m.cols();
    // Column-major working copy: w[j] is the j-th column.
    let mut w: Vec<Vec<R>> = (0..n)
        .map(|j| (0..rows).map(|i| m[(i, j)]).collect())
        .collect();
    let mut v = Matrix::identity(n);
    let eps = R::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == R::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (R::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + R::one()).sqrt());
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let wp = w[p][i];
                    let wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<R> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    // Sort singular values descending, permuting U and V alike.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        sigma[j]
            .partial_cmp(&sigma[i])
            .expect("finite singular values")
    });
    let sigma_sorted: Vec<R> = order.iter().map(|&i| sigma[i]).collect();
    let mut u = Matrix::zeros(rows, n);
    let mut vs = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let s = sigma[old];
        if s > R::zero() {
            for i in 0..rows {
                u[(i, new)] = w[old][i] / s;
            }
        }
        for i in 0..n {
            vs[(i, new)] = v[(i, old)];
        }
    }
    sigma = sigma_sorted;
    Svd { u, sigma, v: vs }
}

/// Cholesky factorization `A = L Lᵀ` of a symmetric positive definite matrix.
pub struct Cholesky<R> {
    l: Matrix<R>,
}

impl<R: Real> Cholesky<R> {
    pub fn new(a: &Matrix<R>) -> Result<Self> {
        Self::with_pivot_tol(a, R::zero())
    }

    /// Factorization that rejects near-singular matrices: fails when any
    /// pivot falls at or below `rel_tol` times the largest diagonal entry.
    /// Callers use the failure as their cue to take a pseudo-inverse path.
    pub fn with_pivot_tol(a: &Matrix<R>, rel_tol: R) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidMatrix("cholesky of non-square matrix".into()));
        }
        let n = a.rows();
        let mut diag_max = R::zero();
        for i in 0..n {
            diag_max = diag_max.max(a[(i, i)].abs());
        }
        let floor = rel_tol * diag_max;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[(i, j)];
                for k in 0..j {
                    sum = sum - l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= floor || sum <= R::zero() {
                        return Err(Error::InvalidMatrix("matrix not positive definite".into()));
                    }
                    l[(i, j)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(Self { l })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[R]) -> Vec<R> {
        let n = self.l.rows();
        debug_assert_eq!(b.len(), n);
        // Forward: L y = b
        let mut y = vec![R::zero(); n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum = sum - self.l[(i, k)] * y[k];
            }
            y[i] = sum / self.l[(i, i)];
        }
        // Backward: Lᵀ x = y
        let mut x = vec![R::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum = sum - self.l[(k, i)] * x[k];
            }
            x[i] = sum / self.l[(i, i)];
        }
        x
    }

    /// Quadratic form `xᵀ A⁻¹ x = ‖L⁻¹x‖²` via one forward substitution.
    pub fn inv_quad_form(&self, x: &[R]) -> R {
        let n = self.l.rows();
        debug_assert_eq!(x.len(), n);
        let mut y = vec![R::zero(); n];
        let mut acc = R::zero();
        for i in 0..n {
            let mut sum = x[i];
            for k in 0..i {
                sum = sum - self.l[(i, k)] * y[k];
            }
            y[i] = sum / self.l[(i, i)];
            acc = acc + y[i] * y[i];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eigen_of_known_matrix() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!(approx(e.values[0], 1.0, 1e-12));
        assert!(approx(e.values[1], 3.0, 1e-12));
        // Reconstruct V diag Vᵀ.
        let d = Matrix::diag(&e.values);
        let rec = e.vectors.matmul(&d).matmul(&e.vectors.transpose());
        for i in 0..2 {
            for j in 0..2 {
                assert!(approx(rec[(i, j)], m[(i, j)], 1e-12));
            }
        }
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let m: Matrix<f64> =
            Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]]).unwrap();
        let s = svd(&m);
        let rec = s.u.matmul(&Matrix::diag(&s.sigma)).matmul(&s.v.transpose());
        for i in 0..3 {
            for j in 0..2 {
                assert!(approx(rec[(i, j)], m[(i, j)], 1e-12));
            }
        }
        assert!(s.sigma[0] >= s.sigma[1]);
    }

    #[test]
    fn svd_wide_matrix() {
        let m: Matrix<f64> =
            Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]]).unwrap();
        let s = svd(&m);
        let rec = s.u.matmul(&Matrix::diag(&s.sigma)).matmul(&s.v.transpose());
        for i in 0..2 {
            for j in 0..3 {
                assert!(approx(rec[(i, j)], m[(i, j)], 1e-12));
            }
        }
    }

    #[test]
    fn cholesky_solves() {
        let a: Matrix<f64> = Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let ch = Cholesky::new(&a).unwrap();
        let x = ch.solve(&[1.0, 2.0]);
        let b = a.matvec(&x);
        assert!(approx(b[0], 1.0, 1e-12));
        assert!(approx(b[1], 2.0, 1e-12));
        // inv_quad_form vs explicit solve
        let q = ch.inv_quad_form(&[1.0, 2.0]);
        assert!(approx(q, x[0] + 2.0 * x[1], 1e-12));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a: Matrix<f64> = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(Cholesky::new(&a).is_err());
    }
}
