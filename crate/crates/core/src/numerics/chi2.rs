//! Chi-square distribution kernels: central and noncentral CDFs, quantiles,
//! and the concentration bounds used by change detection.

use crate::{Error, Real, Result};

/// Natural log of the gamma function (Lanczos, g = 7), valid for z >= 0.5.
/// Every call site here has z >= 0.5 (half-integer degrees of freedom).
pub fn ln_gamma<R: Real>(z: R) -> R {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z >= R::of(0.5));
    let g = R::of(7.0);
    let mut x = R::of(COEFFS[0]);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        x = x + R::of(c) / (z - R::one() + R::of(i as f64));
    }
    let t = z + g - R::of(0.5);
    let half_ln_two_pi = R::of(0.918_938_533_204_672_7);
    half_ln_two_pi + (z - R::of(0.5)) * t.ln() - t + x.ln()
}

/// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
/// continued fraction otherwise.
pub fn reg_lower_gamma<R: Real>(a: R, x: R) -> R {
    debug_assert!(a > R::zero());
    if x <= R::zero() {
        return R::zero();
    }
    if x < a + R::one() {
        gamma_series(a, x)
    } else {
        R::one() - gamma_cont_frac(a, x)
    }
}

fn gamma_series<R: Real>(a: R, x: R) -> R {
    let max_iter = 10_000;
    let tol = R::of(1e-16);
    let mut ap = a;
    let mut sum = R::one() / a;
    let mut del = sum;
    for _ in 0..max_iter {
        ap = ap + R::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * tol {
            break;
        }
    }
    let ln_prefix = a * x.ln() - x - ln_gamma(a);
    clamp01(sum * ln_prefix.exp())
}

fn gamma_cont_frac<R: Real>(a: R, x: R) -> R {
    let max_iter = 10_000;
    let tol = R::of(1e-16);
    let fpmin = R::of(1e-300);
    let mut b = x + R::one() - a;
    let mut c = R::one() / fpmin;
    let mut d = R::one() / b;
    let mut h = d;
    for i in 1..=max_iter {
        let an = -R::of(i as f64) * (R::of(i as f64) - a);
        b = b + R::of(2.0);
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = R::one() / d;
        let del = d * c;
        h = h * del;
        if (del - R::one()).abs() < tol {
            break;
        }
    }
    let ln_prefix = a * x.ln() - x - ln_gamma(a);
    clamp01(ln_prefix.exp() * h)
}

fn clamp01<R: Real>(v: R) -> R {
    v.max(R::zero()).min(R::one())
}

/// CDF of the central chi-square distribution with `df` degrees of freedom.
pub fn central_chi2_cdf<R: Real>(x: R, df: usize) -> Result<R> {
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if x.is_nan() {
        return Err(Error::Internal("chi2 cdf of NaN".into()));
    }
    if x <= R::zero() {
        return Ok(R::zero());
    }
    if x == R::infinity() {
        return Ok(R::one());
    }
    let a = R::of(df as f64) / R::of(2.0);
    Ok(clamp01(reg_lower_gamma(a, x / R::of(2.0))))
}

/// CDF of the noncentral chi-square distribution, computed as a
/// Poisson-weighted mixture of central CDFs. Terms are accumulated outward
/// from the Poisson mode (so large noncentralities do not underflow) and
/// truncated once the remaining Poisson tail mass is below 1e-12.
pub fn noncentral_chi2_cdf<R: Real>(x: R, df: usize, psi: R) -> Result<R> {
    if psi < R::zero() || psi.is_nan() {
        return Err(Error::InvalidNoncentrality);
    }
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if x.is_nan() {
        return Err(Error::Internal("chi2 cdf of NaN".into()));
    }
    if x <= R::zero() {
        return Ok(R::zero());
    }
    if psi == R::zero() {
        return central_chi2_cdf(x, df);
    }

    let half = psi / R::of(2.0);
    let mode = half.floor().as_f64() as usize;
    let ln_w_mode = if mode == 0 {
        -half
    } else {
        -half + R::of(mode as f64) * half.ln() - ln_gamma(R::of(mode as f64 + 1.0))
    };
    let w_mode = ln_w_mode.exp();

    let tail_tol = R::of(1e-12);
    let mut total = w_mode * central_chi2_cdf(x, df + 2 * mode)?;
    let mut mass = w_mode;

    let mut w_up = w_mode;
    let mut j_up = mode;
    let mut w_dn = w_mode;
    let mut j_dn = mode;

    let max_terms = 200_000;
    for _ in 0..max_terms {
        if mass >= R::one() - tail_tol {
            break;
        }
        let next_up = w_up * half / R::of((j_up + 1) as f64);
        let next_dn = if j_dn > 0 {
            w_dn * R::of(j_dn as f64) / half
        } else {
            R::zero()
        };
        if next_up <= R::zero() && next_dn <= R::zero() {
            break;
        }
        if next_up >= next_dn {
            j_up += 1;
            w_up = next_up;
            total = total + w_up * central_chi2_cdf(x, df + 2 * j_up)?;
            mass = mass + w_up;
        } else {
            j_dn -= 1;
            w_dn = next_dn;
            total = total + w_dn * central_chi2_cdf(x, df + 2 * j_dn)?;
            mass = mass + w_dn;
        }
    }
    Ok(clamp01(total))
}

/// Quantile of the central chi-square distribution, by bracketing bisection
/// on the CDF. Converges to the scalar type's resolution (well inside 1e-9
/// for f64).
pub fn chi2_quantile<R: Real>(p: R, df: usize) -> Result<R> {
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if !(p > R::zero() && p < R::one()) {
        return Err(Error::InvalidProbability);
    }
    let mut hi = R::of(df as f64) + R::of(10.0);
    let mut guard = 0;
    while central_chi2_cdf(hi, df)? < p {
        hi = hi * R::of(2.0);
        guard += 1;
        if guard > 300 {
            return Err(Error::Internal("chi2 quantile bracket failed".into()));
        }
    }
    let mut lo = R::zero();
    for _ in 0..500 {
        let mid = (lo + hi) / R::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if central_chi2_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= R::of(1e-12) * hi.max(R::one()) {
            break;
        }
    }
    Ok((lo + hi) / R::of(2.0))
}

/// Hoeffding deviation of the mean of `tau` indicator variables at
/// confidence `delta_e`: sqrt(ln(1/delta_e) / (2 tau)).
pub fn hoeffding_margin<R: Real>(delta_e: R, tau: usize) -> Result<R> {
    if tau == 0 {
        return Err(Error::InvalidWindow);
    }
    if !(delta_e > R::zero() && delta_e <= R::one()) {
        return Err(Error::InvalidProbability);
    }
    Ok(((R::one() / delta_e).ln() / (R::of(2.0) * R::of(tau as f64))).sqrt())
}

/// High-probability lower bound on the minimum eigenvalue of a correlation
/// matrix built from `n_obs` i.i.d. sub-Gaussian contexts whose population
/// second moment has minimum eigenvalue `lambda_prime`:
/// (lambda'/4) n - 8 (ln(d n / delta') + sqrt(n ln(d n / delta'))).
/// May be negative for small `n_obs`; callers treat negative as vacuous.
pub fn min_eig_lower_bound<R: Real>(n_obs: usize, lambda_prime: R, d: usize, delta_prime: R) -> R {
    assert!(n_obs >= 1, "n_obs must be at least 1");
    assert!(lambda_prime > R::zero(), "lambda_prime must be positive");
    assert!(
        delta_prime > R::zero() && delta_prime < R::one(),
        "delta_prime must lie in (0, 1)"
    );
    let n = R::of(n_obs as f64);
    let log_term = (R::of(d as f64) * n / delta_prime).ln();
    lambda_prime / R::of(4.0) * n - R::of(8.0) * (log_term + (n * log_term).sqrt())
}
