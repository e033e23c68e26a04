//! Shared interface the experiment harness drives: select an arm, then
//! observe the reward. Ground truth about the current step is passed along
//! so oracle learners can route by the true parameter; ordinary learners
//! ignore it.

use crate::dyclu::StepEvent;
use crate::{Real, Result, UserId};

/// Per-step ground truth supplied by the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepTruth {
    /// Index of the unique parameter generating this step's reward.
    pub param_index: usize,
}

pub trait Learner<R: Real> {
    fn name(&self) -> &str;

    /// Pick a candidate index given the disclosed contexts.
    fn select(&mut self, user: UserId, candidates: &[Vec<R>], truth: &StepTruth) -> Result<usize>;

    /// Consume the observed reward for the chosen context.
    fn observe(
        &mut self,
        user: UserId,
        context: &[R],
        reward: R,
        t: usize,
        truth: &StepTruth,
    ) -> Result<StepEvent>;
}
