//! Experiment configuration: strict JSON schema (unknown keys rejected — a
//! silently ignored typo in a threshold name would invalidate a whole
//! experiment), validation with field paths, and the learner factory.

use serde::Deserialize;

use dyclu_core::baselines::{
    BaselineConfig, ClusterGraph, DetectorConfig, LinUcbPerUser, LinUcbShared, OracleLinUcb,
    RestartDetect,
};
use dyclu_core::dyclu::{DyCluConfig, DyCluLearner};
use dyclu_core::environment::{EnvConfig, EnvSpec};
use dyclu_core::numerics::chi2_quantile;
use dyclu_core::{Error, Learner, Result, UserId};

/// The slice of environment information learners are built against.
#[derive(Debug, Clone, Copy)]
pub struct LearnerEnv {
    pub d: usize,
    pub n_users: usize,
    pub m: usize,
    pub sigma2: f64,
}

impl LearnerEnv {
    pub fn from_spec(env: &EnvSpec<f64>) -> Self {
        Self {
            d: env.d,
            n_users: env.n_users,
            m: env.m,
            sigma2: env.sigma2,
        }
    }

    pub fn from_block(block: &EnvironmentBlock) -> Self {
        Self {
            d: block.d,
            n_users: block.n_users,
            m: block.m,
            sigma2: block.sigma * block.sigma,
        }
    }
}

pub const LEARNER_NAMES: [&str; 6] = [
    "dyclu",
    "linucb-one",
    "linucb-ind",
    "oracle-linucb",
    "dlinucb-restart",
    "club",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentBlock {
    pub d: usize,
    pub n_users: usize,
    pub m: usize,
    pub arm_pool_size: usize,
    pub candidate_size: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub smin: usize,
    pub smax: usize,
    pub horizon: usize,
}

impl EnvironmentBlock {
    pub fn to_env_config(&self) -> EnvConfig<f64> {
        EnvConfig {
            d: self.d,
            n_users: self.n_users,
            m: self.m,
            arm_pool_size: self.arm_pool_size,
            candidate_size: self.candidate_size,
            gamma: self.gamma,
            sigma: self.sigma,
            smin: self.smin,
            smax: self.smax,
            horizon: self.horizon,
        }
    }
}

/// One learner entry; optional fields fall back to defaults derived from
/// the environment block.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerBlock {
    pub name: String,
    #[serde(default)]
    pub tau: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta_e: Option<f64>,
    #[serde(default)]
    pub upsilon_e: Option<f64>,
    #[serde(default)]
    pub upsilon_c: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Override of the noise level the learner assumes (defaults to the
    /// environment's sigma).
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub outdated_cap: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentBlock,
    pub learners: Vec<LearnerBlock>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.environment
            .to_env_config()
            .validate()
            .map_err(|e| match e {
                Error::Config(msg) => Error::Config(msg),
                other => Error::Config(other.to_string()),
            })?;
        if self.learners.is_empty() {
            return Err(Error::Config(
                "learners: at least one learner required".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds: at least one seed required".into()));
        }
        for (i, l) in self.learners.iter().enumerate() {
            if l.name == "adts" {
                return Err(Error::Unsupported(
                    "learner `adts` is not provided by this library".into(),
                ));
            }
            if !LEARNER_NAMES.contains(&l.name.as_str()) {
                return Err(Error::Config(format!(
                    "learners[{i}].name: unknown learner `{}` (expected one of {})",
                    l.name,
                    LEARNER_NAMES.join(", ")
                )));
            }
            for (field, v) in [("delta", l.delta), ("delta_e", l.delta_e)] {
                if let Some(v) = v {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::Config(format!(
                            "learners[{i}].{field}: must lie in (0, 1)"
                        )));
                    }
                }
            }
            if let Some(v) = l.lambda {
                if !(v > 0.0) {
                    return Err(Error::Config(format!(
                        "learners[{i}].lambda: must be positive"
                    )));
                }
            }
            if l.tau == Some(0) {
                return Err(Error::Config(format!(
                    "learners[{i}].tau: must be at least 1"
                )));
            }
        }
        Ok(())
    }
}

/// Parse a config file that holds either one experiment object or an array
/// of them (grids like the bundled Table-1 mirror use the array form).
pub fn parse_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    let configs: Vec<ExperimentConfig> = if value.is_array() {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?
    } else {
        vec![serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?]
    };
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(configs)
}

pub struct LearnerDefaults {
    pub tau: usize,
    pub delta: f64,
    pub delta_e: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl Default for LearnerDefaults {
    fn default() -> Self {
        Self {
            tau: 30,
            delta: 0.05,
            delta_e: 0.01,
            lambda: 1.0,
            beta: 1.0,
        }
    }
}

/// Instantiate a learner against an environment's dimensions.
pub fn build_learner(
    block: &LearnerBlock,
    env: &LearnerEnv,
) -> Result<Box<dyn Learner<f64> + Send>> {
    let defaults = LearnerDefaults::default();
    let sigma2 = block.sigma.map(|s| s * s).unwrap_or(env.sigma2);
    if !(sigma2 > 0.0) {
        return Err(Error::Config(format!(
            "learner `{}` needs a positive noise level; set learners[].sigma or environment.sigma",
            block.name
        )));
    }
    let base = BaselineConfig {
        d: env.d,
        lambda: block.lambda.unwrap_or(defaults.lambda),
        delta: block.delta.unwrap_or(defaults.delta),
        sigma2,
    };
    let tau = block.tau.unwrap_or(defaults.tau);
    let delta_e = block.delta_e.unwrap_or(defaults.delta_e);
    let upsilon_e = match block.upsilon_e {
        Some(v) => v,
        None => chi2_quantile(0.95, 1)?,
    };
    match block.name.as_str() {
        "dyclu" => {
            let upsilon_c = match block.upsilon_c {
                Some(v) => v,
                None => chi2_quantile(0.95, env.d)?,
            };
            let cfg = DyCluConfig {
                d: env.d,
                tau,
                delta: base.delta,
                delta_e,
                upsilon_e,
                upsilon_c,
                lambda: base.lambda,
                sigma2,
                outdated_cap: block.outdated_cap,
            };
            let users: Vec<UserId> = (1..=env.n_users).map(UserId).collect();
            Ok(Box::new(DyCluLearner::new(cfg, &users)?))
        }
        "linucb-one" => Ok(Box::new(LinUcbShared::new(base)?)),
        "linucb-ind" => Ok(Box::new(LinUcbPerUser::new(base)?)),
        "oracle-linucb" => Ok(Box::new(OracleLinUcb::new(env.m, base)?)),
        "dlinucb-restart" => {
            let det = DetectorConfig {
                tau,
                delta_e,
                upsilon_e,
            };
            Ok(Box::new(RestartDetect::new(base, det)?))
        }
        "club" => Ok(Box::new(ClusterGraph::new(
            base,
            block.beta.unwrap_or(defaults.beta),
        )?)),
        "adts" => Err(Error::Unsupported(
            "learner `adts` is not provided by this library".into(),
        )),
        other => Err(Error::Config(format!("unknown learner `{other}`"))),
    }
}
