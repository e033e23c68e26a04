//! Experiment harness for the dyclu bandit library: JSON-configured
//! simulation runs over the synthetic environment, per-step CSV records,
//! JSON summaries, and offline replay evaluation. The `dyclu` binary wraps
//! this as a CLI.

pub mod config;
pub mod replay_eval;
pub mod runner;
pub mod summary;

use serde::Serialize;

use dyclu_core::environment::EnvSpec;

/// Serializable mirror of a generated environment, for `gen-env`
/// inspection output.
#[derive(Debug, Serialize)]
pub struct EnvSpecJson {
    pub d: usize,
    pub n_users: usize,
    pub m: usize,
    pub unique_params: Vec<Vec<f64>>,
    pub arm_pool: Vec<Vec<f64>>,
    /// Per user: (start of period in user-local steps, parameter index).
    pub schedules: Vec<Vec<(usize, usize)>>,
    pub sigma2: f64,
    pub gamma: f64,
    pub smin: usize,
    pub smax: usize,
    pub candidate_size: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl EnvSpecJson {
    pub fn from_spec(env: &EnvSpec<f64>) -> Self {
        Self {
            d: env.d,
            n_users: env.n_users,
            m: env.m,
            unique_params: env.unique_params.clone(),
            arm_pool: env.arm_pool.clone(),
            schedules: env
                .schedules
                .iter()
                .map(|s| s.iter().map(|e| (e.start, e.param)).collect())
                .collect(),
            sigma2: env.sigma2,
            gamma: env.gamma,
            smin: env.smin,
            smax: env.smax,
            candidate_size: env.candidate_size,
            horizon: env.horizon,
            seed: env.seed,
        }
    }
}
