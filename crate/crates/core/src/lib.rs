//! Contextual linear bandits in piecewise-stationary, clustered environments.
//!
//! The library is organized around a chi-square test of homogeneity between
//! observation sets, which drives both change detection (is the incoming
//! observation consistent with the model's history?) and model clustering
//! (do two user models share a reward parameter?). On top of the test sit:
//!
//! - [`numerics`]: matrix kernels (pseudo-inverse, numerical rank, symmetric
//!   eigenvalues) and chi-square distribution functions,
//! - [`homogeneity`]: datasets with cached sufficient statistics, the test
//!   statistic, and its type-I/type-II error bounds,
//! - [`dyclu`]: the DyClu learner — per-user model lifecycle, neighborhood
//!   clustering, and UCB arm selection over aggregated statistics,
//! - [`baselines`]: LinUCB (shared and per-user), oracle-LinUCB, a
//!   restart-on-detection learner, and a CLUB-style graph learner,
//! - [`environment`]: the synthetic ground-truth world (unique parameter
//!   pool, per-user change schedules, candidate arms, rewards and regret)
//!   plus a replay loader for logged interactions,
//! - [`rng`]: a portable, seedable generator so runs are bit-reproducible.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases are exported at the crate root.

pub mod baselines;
pub mod dyclu;
pub mod environment;
mod error;
pub mod homogeneity;
pub mod learner;
pub mod numerics;
pub mod rng;

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};
pub use learner::{Learner, StepTruth};

/// Scalar type the numeric core is generic over (`f32`, `f64`).
///
/// The blanket impl covers any float with the needed conversions; `of` is
/// the one extra convenience for lifting literal constants.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Lossy view as `f64`, for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Identifier of a user served by the environment (1-based in generated
/// environments; replay logs may use arbitrary ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub usize);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Matrix64 = numerics::Matrix<f64>;
pub type Dataset64 = homogeneity::Dataset<f64>;
pub type DyCluConfig64 = dyclu::DyCluConfig<f64>;
pub type DyCluLearner64 = dyclu::DyCluLearner<f64>;
pub type EnvSpec64 = environment::EnvSpec<f64>;
