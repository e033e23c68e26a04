//! Offline evaluation on logged interactions: rejection-sampling replay.
//! A learner is credited only on steps where its choice matches the logged
//! one (and only those steps update it). Rewards are reported as the
//! matched-step mean, normalized by the log's uniform-random baseline
//! column when present.

use serde::Serialize;

use dyclu_core::environment::ReplayRow;
use dyclu_core::{Error, Learner, Result, StepTruth};

use crate::config::{build_learner, ExperimentConfig, LearnerEnv};

#[derive(Debug, Clone, Serialize)]
pub struct ReplaySummary {
    pub learner: String,
    pub rows: usize,
    pub matched: usize,
    pub accum_reward: f64,
    pub mean_matched_reward: f64,
    /// mean matched reward / mean random reward, when the log carries the
    /// random baseline column.
    pub normalized: Option<f64>,
}

pub fn evaluate_replay_learner(
    learner: &mut dyn Learner<f64>,
    name: &str,
    rows: &[ReplayRow<f64>],
) -> Result<ReplaySummary> {
    let truth = StepTruth { param_index: 0 };
    let mut matched = 0usize;
    let mut accum = 0.0f64;
    for (t, row) in rows.iter().enumerate() {
        let choice = learner.select(row.user, &row.candidates, &truth)?;
        if choice == row.chosen {
            matched += 1;
            accum += row.reward;
            learner.observe(row.user, &row.candidates[choice], row.reward, t + 1, &truth)?;
        }
    }
    let mean_matched = if matched == 0 {
        0.0
    } else {
        accum / matched as f64
    };
    let random_mean = {
        let with: Vec<f64> = rows.iter().filter_map(|r| r.random_reward).collect();
        if with.len() == rows.len() && !rows.is_empty() {
            Some(with.iter().sum::<f64>() / with.len() as f64)
        } else {
            None
        }
    };
    let normalized = random_mean.and_then(|rm| {
        if rm.abs() > 1e-12 && matched > 0 {
            Some(mean_matched / rm)
        } else {
            None
        }
    });
    Ok(ReplaySummary {
        learner: name.to_string(),
        rows: rows.len(),
        matched,
        accum_reward: accum,
        mean_matched_reward: mean_matched,
        normalized,
    })
}

/// Evaluate every learner in the config against a replay log. The config's
/// environment block supplies the context dimension (validated against the
/// log) and the assumed noise level; ground-truth-dependent learners are
/// rejected since logs carry no ground truth.
pub fn evaluate_replay(
    cfg: &ExperimentConfig,
    rows: &[ReplayRow<f64>],
) -> Result<Vec<ReplaySummary>> {
    cfg.validate()?;
    if let Some(row) = rows.first() {
        let d = row.candidates[0].len();
        if d != cfg.environment.d {
            return Err(Error::Config(format!(
                "environment.d: config says {} but the log has dimension {d}",
                cfg.environment.d
            )));
        }
    }
    let env = LearnerEnv::from_block(&cfg.environment);
    let mut out = Vec::new();
    for block in &cfg.learners {
        if block.name == "oracle-linucb" {
            return Err(Error::Unsupported(
                "oracle-linucb cannot replay logs (no ground truth in logs)".into(),
            ));
        }
        let mut learner = build_learner(block, &env)?;
        out.push(evaluate_replay_learner(
            learner.as_mut(),
            &block.name,
            rows,
        )?);
    }
    Ok(out)
}
