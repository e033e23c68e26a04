//! Deterministic linear-algebra and distribution kernels: pseudo-inverse,
//! numerical rank, extremal eigenvalues, and chi-square CDFs/quantiles.
//! Everything here is a pure function of its inputs.

mod chi2;
mod decomp;
mod matrix;

pub use chi2::{
    central_chi2_cdf, chi2_quantile, hoeffding_margin, ln_gamma, min_eig_lower_bound,
    noncentral_chi2_cdf, reg_lower_gamma,
};
pub use decomp::{svd, sym_eigen, Cholesky, Svd, SymEigen};
pub use matrix::{axpy, dot, norm2, Matrix};

use crate::{Error, Real, Result};

/// Relative cutoff deciding which singular values count as zero.
///
/// Default 1e-10, close to the double-precision limit, so rank decisions on
/// exact-arithmetic-rank-deficient inputs stay stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance<R> {
    pub rel_tol: R,
}

impl<R: Real> RankTolerance<R> {
    pub fn new(rel_tol: R) -> Result<Self> {
        if !(rel_tol > R::zero()) || !rel_tol.is_finite() {
            return Err(Error::InvalidMatrix(
                "rank tolerance must be positive".into(),
            ));
        }
        Ok(Self { rel_tol })
    }
}

impl<R: Real> Default for RankTolerance<R> {
    fn default() -> Self {
        Self {
            rel_tol: R::of(1e-10),
        }
    }
}

fn require_finite<R: Real>(m: &Matrix<R>) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    Ok(())
}

/// Moore-Penrose pseudo-inverse via SVD; singular values at or below
/// `rel_tol * sigma_max` are treated as zero.
pub fn pseudo_inverse<R: Real>(m: &Matrix<R>, tol: RankTolerance<R>) -> Result<Matrix<R>> {
    Ok(pinv_and_rank(m, tol)?.0)
}

/// Pseudo-inverse and numerical rank from a single decomposition (the hot
/// path computes both for every test).
pub fn pinv_and_rank<R: Real>(m: &Matrix<R>, tol: RankTolerance<R>) -> Result<(Matrix<R>, usize)> {
    require_finite(m)?;
    let dec = svd(m);
    let smax = dec.sigma.first().copied().unwrap_or_else(R::zero);
    let cutoff = tol.rel_tol * smax;
    // pinv = V diag(1/sigma) Uᵀ, restricted to retained singular values.
    let k = dec.sigma.len();
    let mut rank = 0;
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for j in 0..k {
        let s = dec.sigma[j];
        if s <= cutoff || s == R::zero() {
            continue;
        }
        rank += 1;
        let inv = R::one() / s;
        for r in 0..m.cols() {
            let vr = dec.v[(r, j)] * inv;
            if vr == R::zero() {
                continue;
            }
            for c in 0..m.rows() {
                out[(r, c)] = out[(r, c)] + vr * dec.u[(c, j)];
            }
        }
    }
    Ok((out, rank))
}

/// Number of singular values above `rel_tol * sigma_max`; 0 for the zero
/// matrix.
pub fn numerical_rank<R: Real>(m: &Matrix<R>, tol: RankTolerance<R>) -> Result<usize> {
    require_finite(m)?;
    let dec = svd(m);
    let smax = dec.sigma.first().copied().unwrap_or_else(R::zero);
    if smax == R::zero() {
        return Ok(0);
    }
    let cutoff = tol.rel_tol * smax;
    Ok(dec.sigma.iter().filter(|&&s| s > cutoff).count())
}

/// Smallest eigenvalue of a symmetric matrix; values within -1e-9 of zero
/// are clipped up to 0 (positive semidefinite inputs may round slightly
/// negative).
pub fn min_eigenvalue<R: Real>(m: &Matrix<R>) -> Result<R> {
    require_finite(m)?;
    let scale = m.max_abs().max(R::one());
    if !m.is_symmetric(R::of(1e-9) * scale) {
        return Err(Error::InvalidMatrix(
            "asymmetric input to min_eigenvalue".into(),
        ));
    }
    let eig = sym_eigen(m)?;
    let min = eig.values.first().copied().unwrap_or_else(R::zero);
    if min < R::zero() && min > R::of(-1e-9) {
        Ok(R::zero())
    } else {
        Ok(min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256pp;
    use proptest::prelude::*;

    fn tol64() -> RankTolerance<f64> {
        RankTolerance::default()
    }

    fn random_matrix(rng: &mut Xoshiro256pp, rows: usize, cols: usize) -> Matrix<f64> {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = rng.next_gaussian();
            }
        }
        m
    }

    /// Random `n x n` matrix of the given rank, as a product of gaussian
    /// factors.
    fn random_with_rank(rng: &mut Xoshiro256pp, n: usize, rank: usize) -> Matrix<f64> {
        if rank >= n {
            return random_matrix(rng, n, n);
        }
        let a = random_matrix(rng, n, rank);
        let b = random_matrix(rng, rank, n);
        a.matmul(&b)
    }

    fn assert_close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64, what: &str) {
        assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
        let scale = a.max_abs().max(b.max_abs()).max(1.0);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let diff = (a[(i, j)] - b[(i, j)]).abs();
                assert!(
                    diff <= tol * scale,
                    "{what}: entry ({i},{j}) differs by {diff} (scale {scale})"
                );
            }
        }
    }

    #[test]
    fn pseudo_inverse_examples() {
        let id: Matrix<f64> = Matrix::identity(3);
        let p = pseudo_inverse(&id, tol64()).unwrap();
        assert_close(&p, &id, 1e-12, "identity");

        let z: Matrix<f64> = Matrix::zeros(2, 2);
        let pz = pseudo_inverse(&z, tol64()).unwrap();
        assert_close(&pz, &z, 0.0, "zero");

        let d = Matrix::diag(&[2.0, 0.0]);
        let pd = pseudo_inverse(&d, tol64()).unwrap();
        assert_close(&pd, &Matrix::diag(&[0.5, 0.0]), 1e-12, "diag");
    }

    #[test]
    fn pseudo_inverse_rejects_non_finite() {
        let mut m: Matrix<f64> = Matrix::identity(2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(
            pseudo_inverse(&m, tol64()),
            Err(crate::Error::InvalidMatrix(_))
        ));
        assert!(numerical_rank(&m, tol64()).is_err());
    }

    // All four Moore-Penrose identities on random 50x50 matrices of varying
    // rank, to 1e-8 relative tolerance.
    #[test]
    fn moore_penrose_identities_50x50() {
        let mut rng = Xoshiro256pp::seed_from_u64(2024);
        for &rank in &[5usize, 20, 35, 50] {
            let m = random_with_rank(&mut rng, 50, rank);
            let p = pseudo_inverse(&m, tol64()).unwrap();
            let mp = m.matmul(&p);
            let pm = p.matmul(&m);
            assert_close(&m.matmul(&pm), &m, 1e-8, "M P M = M");
            assert_close(&p.matmul(&mp), &p, 1e-8, "P M P = P");
            assert_close(&mp.transpose(), &mp, 1e-8, "(M P)ᵀ = M P");
            assert_close(&pm.transpose(), &pm, 1e-8, "(P M)ᵀ = P M");
        }
    }

    #[test]
    fn rank_examples() {
        let z: Matrix<f64> = Matrix::zeros(3, 2);
        assert_eq!(numerical_rank(&z, tol64()).unwrap(), 0);
        let id: Matrix<f64> = Matrix::identity(4);
        assert_eq!(numerical_rank(&id, tol64()).unwrap(), 4);
        // Outer product u uᵀ with u = (1, 2): rank one.
        let mut m: Matrix<f64> = Matrix::zeros(2, 2);
        m.add_outer(&[1.0, 2.0]);
        assert_eq!(numerical_rank(&m, tol64()).unwrap(), 1);
        assert_eq!(
            numerical_rank(&m, tol64()).unwrap(),
            rank_by_elimination(&m),
            "independent elimination oracle"
        );
    }

    /// Gaussian-elimination rank oracle with partial pivoting.
    fn rank_by_elimination(m: &Matrix<f64>) -> usize {
        let mut a = m.clone();
        let (rows, cols) = (a.rows(), a.cols());
        let mut rank = 0;
        let mut row = 0;
        for col in 0..cols {
            if row >= rows {
                break;
            }
            let mut pivot = row;
            for r in row..rows {
                if a[(r, col)].abs() > a[(pivot, col)].abs() {
                    pivot = r;
                }
            }
            if a[(pivot, col)].abs() < 1e-9 {
                continue;
            }
            for c in 0..cols {
                let tmp = a[(row, c)];
                a[(row, c)] = a[(pivot, c)];
                a[(pivot, c)] = tmp;
            }
            for r in (row + 1)..rows {
                let f = a[(r, col)] / a[(row, col)];
                for c in col..cols {
                    a[(r, c)] = a[(r, c)] - f * a[(row, c)];
                }
            }
            row += 1;
            rank += 1;
        }
        rank
    }

    #[test]
    fn min_eigenvalue_examples() {
        let id: Matrix<f64> = Matrix::identity(5);
        assert_eq!(min_eigenvalue(&id).unwrap(), 1.0);
        let d = Matrix::diag(&[3.0, 7.0]);
        assert_eq!(min_eigenvalue(&d).unwrap(), 3.0);
        let m: Matrix<f64> = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((min_eigenvalue(&m).unwrap() - 1.0f64).abs() < 1e-12);
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(min_eigenvalue(&asym).is_err());
    }

    #[test]
    fn min_eigenvalue_clips_tiny_negative() {
        // PSD up to rounding: eigenvalues {0, 2} with a tiny negative wobble.
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 - 1e-12]]).unwrap();
        let v = min_eigenvalue(&m).unwrap();
        assert!(v >= 0.0);
    }

    proptest! {
        #[test]
        fn rank_matches_transpose(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
            let mut rng = Xoshiro256pp::seed_from_u64(seed);
            // Mix of full-rank and deficient shapes.
            let r = (rows.min(cols)).max(1);
            let keep = 1 + (seed as usize % r);
            let a = random_matrix(&mut rng, rows, keep);
            let b = random_matrix(&mut rng, keep, cols);
            let m = a.matmul(&b);
            let rk = numerical_rank(&m, tol64()).unwrap();
            let rk_t = numerical_rank(&m.transpose(), tol64()).unwrap();
            prop_assert_eq!(rk, rk_t);
            prop_assert!(rk <= keep);
        }

        #[test]
        fn pinv_identity_on_random_psd(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = Xoshiro256pp::seed_from_u64(seed);
            let x = random_matrix(&mut rng, n + 2, n);
            let a = x.transpose().matmul(&x); // PSD, almost surely full rank
            let p = pseudo_inverse(&a, tol64()).unwrap();
            let apa = a.matmul(&p).matmul(&a);
            let scale = a.max_abs().max(1.0);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((apa[(i,j)] - a[(i,j)]).abs() <= 1e-8 * scale);
                }
            }
        }
    }
}
