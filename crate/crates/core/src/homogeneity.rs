//! Chi-square test of homogeneity between two observation sets.
//!
//! Two datasets with design matrices X1, X2 and rewards y1, y2 are judged
//! homogeneous by the statistic
//!
//! ```text
//! s = (‖X1 (th1 - th12)‖² + ‖X2 (th2 - th12)‖²) / sigma²
//! ```
//!
//! where `th1`, `th2` are the per-dataset least-squares estimates, and
//! `th12` is the estimate on the concatenation. Under a shared parameter,
//! `s` is central chi-square with `df = rank(X1) + rank(X2) - rank(stack)`;
//! under distinct parameters it is noncentral, which is what the type-II
//! bound exploits.
//!
//! The statistic is computed from cached sufficient statistics only:
//! `‖X (v)‖² = vᵀ (XᵀX) v`, so datasets never need to materialize their
//! design matrices, and ranks are taken on the correlation matrices (which
//! share their rank with the design matrices).

use crate::numerics::{
    central_chi2_cdf, dot, noncentral_chi2_cdf, pinv_and_rank, pseudo_inverse, Cholesky, Matrix,
    RankTolerance,
};
use crate::{Error, Real, Result};

/// Least-squares solve of the normal equations `A theta = b` for a PSD
/// correlation matrix, with the numerical rank of `A`: Cholesky when the
/// matrix is safely positive definite (the steady-state case), minimum-norm
/// pseudo-inverse otherwise. Both routes agree on full-rank inputs; the
/// pivot tolerance matches the rank cutoff so borderline matrices take the
/// pseudo-inverse path.
fn psd_solve<R: Real>(a: &Matrix<R>, b: &[R]) -> Result<(Vec<R>, usize)> {
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    match Cholesky::with_pivot_tol(a, R::of(1e-10)) {
        Ok(chol) => Ok((chol.solve(b), a.rows())),
        Err(_) => {
            let (pinv, rank) = pinv_and_rank(a, RankTolerance::default())?;
            Ok((pinv.matvec(b), rank))
        }
    }
}

/// Reward noise model: known variance of the Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<R> {
    sigma2: R,
}

impl<R: Real> NoiseModel<R> {
    pub fn new(sigma2: R) -> Result<Self> {
        if !(sigma2 > R::zero()) || !sigma2.is_finite() {
            return Err(Error::InvalidObservation(
                "sigma2 must be positive and finite".into(),
            ));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> R {
        self.sigma2
    }

    pub fn sigma(&self) -> R {
        self.sigma2.sqrt()
    }
}

/// Ordered observations with cached sufficient statistics
/// `A = Σ x xᵀ` and `b = Σ x y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<R> {
    dim: usize,
    observations: Vec<(Vec<R>, R)>,
    a: Matrix<R>,
    b: Vec<R>,
}

const NORM_SLACK: f64 = 1e-9;

impl<R: Real> Dataset<R> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            observations: Vec::new(),
            a: Matrix::zeros(dim, dim),
            b: vec![R::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[(Vec<R>, R)] {
        &self.observations
    }

    /// Correlation matrix `A = Σ x xᵀ`.
    pub fn corr(&self) -> &Matrix<R> {
        &self.a
    }

    /// Moment vector `b = Σ x y`.
    pub fn moment(&self) -> &[R] {
        &self.b
    }

    /// Append an observation. Contexts must be finite with norm at most 1
    /// (plus rounding slack), rewards finite.
    pub fn push(&mut self, context: &[R], reward: R) -> Result<()> {
        if context.len() != self.dim {
            return Err(Error::InvalidObservation(format!(
                "context has dimension {}, dataset has {}",
                context.len(),
                self.dim
            )));
        }
        if !context.iter().all(|v| v.is_finite()) || !reward.is_finite() {
            return Err(Error::InvalidObservation("non-finite entries".into()));
        }
        let norm2: R = dot(context, context);
        if norm2 > R::one() + R::of(2.0 * NORM_SLACK) {
            return Err(Error::InvalidObservation(format!(
                "context norm {} exceeds 1",
                norm2.sqrt()
            )));
        }
        self.a.add_outer(context);
        for (bi, &xi) in self.b.iter_mut().zip(context) {
            *bi = *bi + xi * reward;
        }
        self.observations.push((context.to_vec(), reward));
        Ok(())
    }

    pub fn from_observations(dim: usize, obs: &[(Vec<R>, R)]) -> Result<Self> {
        let mut d = Self::new(dim);
        for (x, y) in obs {
            d.push(x, *y)?;
        }
        Ok(d)
    }

    /// Recompute `A` and `b` from raw observations and compare against the
    /// caches; used by consistency checks.
    pub fn caches_consistent(&self, tol: R) -> bool {
        let mut a = Matrix::zeros(self.dim, self.dim);
        let mut b = vec![R::zero(); self.dim];
        for (x, y) in &self.observations {
            a.add_outer(x);
            for (bi, &xi) in b.iter_mut().zip(x) {
                *bi = *bi + xi * *y;
            }
        }
        let da = self
            .a
            .data()
            .iter()
            .zip(a.data())
            .fold(R::zero(), |m, (&u, &v)| m.max((u - v).abs()));
        let db = self
            .b
            .iter()
            .zip(&b)
            .fold(R::zero(), |m, (&u, &v)| m.max((u - v).abs()));
        da <= tol && db <= tol
    }
}

/// Outcome of a thresholded homogeneity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult<R> {
    pub statistic: R,
    pub df: usize,
    pub threshold: R,
    pub reject: bool,
}

impl<R: Real> TestResult<R> {
    pub fn evaluate(statistic: R, df: usize, threshold: R) -> Self {
        Self {
            statistic,
            df,
            threshold,
            reject: statistic > threshold,
        }
    }
}

/// Least-squares estimate `(XᵀX)⁻ Xᵀ y` from the dataset's cached
/// statistics (the minimum-norm solution when the design is rank
/// deficient).
pub fn mle<R: Real>(data: &Dataset<R>) -> Result<Vec<R>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pinv = pseudo_inverse(data.corr(), RankTolerance::default())?;
    Ok(pinv.matvec(data.moment()))
}

/// Internal form of the statistic over cached parts; `theta`/`rank` of each
/// side are supplied so callers holding per-model caches avoid recomputing
/// them.
#[allow(clippy::too_many_arguments)]
pub(crate) fn statistic_from_parts<R: Real>(
    a1: &Matrix<R>,
    b1: &[R],
    theta1: &[R],
    rank1: usize,
    a2: &Matrix<R>,
    b2: &[R],
    theta2: &[R],
    rank2: usize,
    sigma2: R,
) -> Result<(R, usize)> {
    let pooled_a = a1.add(a2);
    let pooled_b: Vec<R> = b1.iter().zip(b2).map(|(&u, &v)| u + v).collect();
    let (pooled_theta, pooled_rank) = psd_solve(&pooled_a, &pooled_b)?;

    let quad = |a: &Matrix<R>, th: &[R]| -> R {
        let diff: Vec<R> = th.iter().zip(&pooled_theta).map(|(&u, &v)| u - v).collect();
        dot(&diff, &a.matvec(&diff))
    };
    let raw = (quad(a1, theta1) + quad(a2, theta2)) / sigma2;
    // Cancellation can round marginally negative; report 0 for anything in
    // (-1e-9, 0).
    let statistic = if raw < R::zero() && raw > R::of(-1e-9) {
        R::zero()
    } else {
        raw.max(R::zero())
    };
    let df = (rank1 + rank2).saturating_sub(pooled_rank);
    Ok((statistic, df))
}

pub(crate) fn theta_and_rank<R: Real>(data: &Dataset<R>) -> Result<(Vec<R>, usize)> {
    psd_solve(data.corr(), data.moment())
}

/// Homogeneity statistic between two datasets, with its degrees of freedom.
/// Symmetric in its dataset arguments.
pub fn homogeneity_statistic<R: Real>(
    d1: &Dataset<R>,
    d2: &Dataset<R>,
    noise: &NoiseModel<R>,
) -> Result<(R, usize)> {
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (theta1, rank1) = theta_and_rank(d1)?;
    let (theta2, rank2) = theta_and_rank(d2)?;
    statistic_from_parts(
        d1.corr(),
        d1.moment(),
        &theta1,
        rank1,
        d2.corr(),
        d2.moment(),
        &theta2,
        rank2,
        noise.sigma2(),
    )
}

/// One-sample variant: tests a single observation against a dataset.
pub fn one_sample_statistic<R: Real>(
    data: &Dataset<R>,
    context: &[R],
    reward: R,
    noise: &NoiseModel<R>,
) -> Result<(R, usize)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let norm2: R = dot(context, context);
    if norm2 <= R::zero() {
        return Err(Error::DegenerateObservation);
    }
    let (theta1, rank1) = theta_and_rank(data)?;
    one_sample_from_parts(
        data.corr(),
        data.moment(),
        &theta1,
        rank1,
        context,
        reward,
        noise.sigma2(),
    )
}

/// One-sample statistic over cached parts (hot path for the learners).
pub(crate) fn one_sample_from_parts<R: Real>(
    a1: &Matrix<R>,
    b1: &[R],
    theta1: &[R],
    rank1: usize,
    context: &[R],
    reward: R,
    sigma2: R,
) -> Result<(R, usize)> {
    let norm2: R = dot(context, context);
    if norm2 <= R::zero() {
        return Err(Error::DegenerateObservation);
    }
    let d = context.len();
    let mut a2 = Matrix::zeros(d, d);
    a2.add_outer(context);
    let b2: Vec<R> = context.iter().map(|&x| x * reward).collect();
    // Singleton least squares: theta2 = x y / ‖x‖².
    let theta2: Vec<R> = context.iter().map(|&x| x * reward / norm2).collect();
    statistic_from_parts(a1, b1, theta1, rank1, &a2, &b2, &theta2, 1, sigma2)
}

/// Type-I bound: probability that a homogeneous pair exceeds `upsilon`,
/// i.e. `1 - F(upsilon; df, 0)`.
pub fn type1_bound<R: Real>(upsilon: R, df: usize) -> Result<R> {
    Ok(R::one() - central_chi2_cdf(upsilon, df)?)
}

/// Type-II bound: probability that a pair with parameter gap `gap` stays
/// below `upsilon`. With both correlation matrices positive definite
/// (minimum eigenvalues `lmin1`, `lmin2`) the statistic is noncentral with
/// `psi = (gap²/sigma²) / (1/lmin1 + 1/lmin2)`; otherwise only the vacuous
/// central bound holds.
pub fn type2_bound<R: Real>(
    upsilon: R,
    d: usize,
    lmin1: R,
    lmin2: R,
    gap: R,
    noise: &NoiseModel<R>,
) -> Result<R> {
    if !(gap > R::zero()) {
        return Err(Error::InvalidGap);
    }
    if d == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if lmin1 > R::zero() && lmin2 > R::zero() {
        let psi = (gap * gap / noise.sigma2()) / (R::one() / lmin1 + R::one() / lmin2);
        noncentral_chi2_cdf(upsilon, d, psi)
    } else {
        central_chi2_cdf(upsilon, d)
    }
}
