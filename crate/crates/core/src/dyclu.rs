//! The DyClu learner: per-user model lifecycle (change detection,
//! retirement, re-creation), clustering of user models into neighborhoods,
//! and UCB arm selection over aggregated sufficient statistics.
//!
//! Each user owns one up-to-date model holding the observations of the
//! current stationary period. Every incoming observation is tested against
//! that history with a one-sample homogeneity test; the windowed mean of
//! the resulting indicators drives change detection. On detection the model
//! retires into the outdated set and a fresh one takes its place — outdated
//! models are kept because a later period (of any user) may share their
//! parameter and reuse their observations through the neighborhood test.

use std::collections::{BTreeMap, VecDeque};

use crate::homogeneity::{one_sample_from_parts, statistic_from_parts, theta_and_rank, Dataset};
use crate::numerics::{central_chi2_cdf, chi2_quantile, dot, hoeffding_margin, Cholesky, Matrix};
use crate::{Error, Real, Result, UserId};

/// Parameters of a DyClu learner.
#[derive(Debug, Clone, PartialEq)]
pub struct DyCluConfig<R> {
    /// Context dimension.
    pub d: usize,
    /// Sliding window size for the change detector.
    pub tau: usize,
    /// UCB confidence level.
    pub delta: R,
    /// Detector confidence level.
    pub delta_e: R,
    /// One-sample test threshold (change detection).
    pub upsilon_e: R,
    /// Cross-model test threshold (neighborhood identification).
    pub upsilon_c: R,
    /// Ridge regularizer.
    pub lambda: R,
    /// Known reward noise variance.
    pub sigma2: R,
    /// Optional cap on retained outdated models (oldest dropped first).
    /// `None` keeps everything, matching the algorithm as written.
    pub outdated_cap: Option<usize>,
}

impl<R: Real> DyCluConfig<R> {
    /// Construct with the default thresholds: 95% chi-square quantiles at
    /// 1 and `d` degrees of freedom for detection and clustering.
    pub fn with_default_thresholds(
        d: usize,
        tau: usize,
        delta: R,
        delta_e: R,
        lambda: R,
        sigma2: R,
    ) -> Result<Self> {
        let cfg = Self {
            d,
            tau,
            delta,
            delta_e,
            upsilon_e: chi2_quantile(R::of(0.95), 1)?,
            upsilon_c: chi2_quantile(R::of(0.95), d.max(1))?,
            lambda,
            sigma2,
            outdated_cap: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.tau == 0 {
            return Err(Error::InvalidWindow);
        }
        for (name, p) in [("delta", self.delta), ("delta_e", self.delta_e)] {
            if !(p > R::zero() && p < R::one()) {
                return Err(Error::Config(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.lambda > R::zero()) || !self.lambda.is_finite() {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if !(self.sigma2 > R::zero()) || !self.sigma2.is_finite() {
            return Err(Error::Config("sigma2 must be positive".into()));
        }
        if !(self.upsilon_e >= R::zero() && self.upsilon_e.is_finite()) {
            return Err(Error::Config("upsilon_e must be nonnegative".into()));
        }
        if !(self.upsilon_c >= R::zero() && self.upsilon_c.is_finite()) {
            return Err(Error::Config("upsilon_c must be nonnegative".into()));
        }
        Ok(())
    }
}

/// What happened during one `observe` call; exactly one of the three branch
/// flags is set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepEvent {
    /// Observation failed the one-sample test and was dropped.
    pub observation_discarded: bool,
    /// Windowed detector fired: model retired, fresh model created.
    pub change_detected: bool,
    /// Observation appended to the model.
    pub model_updated: bool,
    /// Size of the neighborhood recomputed after this step.
    pub neighborhood_size: usize,
}

/// One stationary-period model for one user.
#[derive(Debug, Clone)]
pub struct UserModel<R> {
    owner: UserId,
    data: Dataset<R>,
    window: VecDeque<bool>,
    window_ones: usize,
    created_at: usize,
    retired_at: Option<usize>,
    // Cached least-squares estimate and rank of the correlation matrix,
    // refreshed on every append.
    theta: Vec<R>,
    rank: usize,
    // Ground-truth parameter label, maintained only in oracle mode.
    param_label: Option<usize>,
}

impl<R: Real> UserModel<R> {
    fn new(owner: UserId, d: usize, created_at: usize) -> Self {
        Self {
            owner,
            data: Dataset::new(d),
            window: VecDeque::new(),
            window_ones: 0,
            created_at,
            retired_at: None,
            theta: vec![R::zero(); d],
            rank: 0,
            param_label: None,
        }
    }

    pub fn owner(&self) -> UserId {
        self.owner
    }

    pub fn data(&self) -> &Dataset<R> {
        &self.data
    }

    pub fn created_at(&self) -> usize {
        self.created_at
    }

    pub fn retired_at(&self) -> Option<usize> {
        self.retired_at
    }

    pub fn is_retired(&self) -> bool {
        self.retired_at.is_some()
    }

    /// Mean of the indicator window; 0 when the window is empty.
    pub fn e_mean(&self) -> R {
        if self.window.is_empty() {
            R::zero()
        } else {
            R::of(self.window_ones as f64) / R::of(self.window.len() as f64)
        }
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    fn push_indicator(&mut self, e: bool, tau: usize) {
        if self.window.len() == tau {
            if let Some(old) = self.window.pop_front() {
                if old {
                    self.window_ones -= 1;
                }
            }
        }
        self.window.push_back(e);
        if e {
            self.window_ones += 1;
        }
    }

    fn append(&mut self, context: &[R], reward: R) -> Result<()> {
        self.data.push(context, reward)?;
        let (theta, rank) = theta_and_rank(&self.data)?;
        self.theta = theta;
        self.rank = rank;
        Ok(())
    }
}

/// The set of user models: one up-to-date model per user plus every retired
/// model, and the most recently computed neighborhood per user.
#[derive(Debug, Clone)]
pub struct ModelPool<R> {
    models: Vec<Option<UserModel<R>>>,
    current: BTreeMap<UserId, usize>,
    neighborhoods: BTreeMap<UserId, Vec<usize>>,
    detections: usize,
    dropped: usize,
}

impl<R: Real> ModelPool<R> {
    pub fn new(users: &[UserId], d: usize) -> Self {
        let mut pool = Self {
            models: Vec::new(),
            current: BTreeMap::new(),
            neighborhoods: BTreeMap::new(),
            detections: 0,
            dropped: 0,
        };
        for &u in users {
            pool.ensure_user(u, 0, d);
        }
        pool
    }

    /// Create the user's first model if this user is new.
    pub fn ensure_user(&mut self, user: UserId, t: usize, d: usize) {
        if self.current.contains_key(&user) {
            return;
        }
        let idx = self.models.len();
        self.models.push(Some(UserModel::new(user, d, t)));
        self.current.insert(user, idx);
        self.neighborhoods.insert(user, vec![idx]);
    }

    pub fn model(&self, idx: usize) -> Option<&UserModel<R>> {
        self.models.get(idx).and_then(|m| m.as_ref())
    }

    pub fn current_model(&self, user: UserId) -> Result<&UserModel<R>> {
        let idx = self.current_index(user)?;
        self.model(idx)
            .ok_or_else(|| Error::Internal("current model slot empty".into()))
    }

    fn current_index(&self, user: UserId) -> Result<usize> {
        self.current
            .get(&user)
            .copied()
            .ok_or(Error::UnknownUser(user))
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.current.keys().copied()
    }

    pub fn up_to_date_count(&self) -> usize {
        self.current.len()
    }

    pub fn outdated_count(&self) -> usize {
        self.models
            .iter()
            .flatten()
            .filter(|m| m.is_retired())
            .count()
    }

    /// Total detections fired since construction.
    pub fn detections(&self) -> usize {
        self.detections
    }

    /// Outdated models dropped under `outdated_cap`.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn outdated(&self) -> impl Iterator<Item = &UserModel<R>> {
        self.models.iter().flatten().filter(|m| m.is_retired())
    }

    fn retire(&mut self, user: UserId, t: usize, d: usize, cap: Option<usize>) -> Result<()> {
        let idx = self.current_index(user)?;
        let model = self.models[idx]
            .as_mut()
            .ok_or_else(|| Error::Internal("current model slot empty".into()))?;
        model.retired_at = Some(t);
        let fresh_idx = self.models.len();
        self.models.push(Some(UserModel::new(user, d, t)));
        self.current.insert(user, fresh_idx);
        self.detections += 1;
        if let Some(cap) = cap {
            while self.outdated_count() > cap {
                // Drop the earliest-retired model.
                let victim = self
                    .models
                    .iter()
                    .enumerate()
                    .filter_map(|(i, m)| m.as_ref().and_then(|mm| mm.retired_at.map(|r| (r, i))))
                    .min();
                match victim {
                    Some((_, i)) => {
                        self.models[i] = None;
                        self.dropped += 1;
                    }
                    None => break,
                }
            }
        }
        Ok(())
    }
}

/// Detection threshold for the windowed indicator mean:
/// `1 - F(upsilon_e; 1, 0) + sqrt(ln(1/delta_e) / (2 tau))`.
pub fn detection_threshold<R: Real>(cfg: &DyCluConfig<R>) -> Result<R> {
    let base = R::one() - central_chi2_cdf(cfg.upsilon_e, 1)?;
    Ok(base + hoeffding_margin(cfg.delta_e, cfg.tau)?)
}

/// UCB exploration width used by every learner in this crate:
/// `sigma sqrt(d ln(1 + N / (d lambda)) + 2 ln(1/delta)) + sqrt(lambda)`.
pub(crate) fn ucb_alpha<R: Real>(sigma: R, d: usize, n_obs: usize, lambda: R, delta: R) -> R {
    let dr = R::of(d as f64);
    let n = R::of(n_obs as f64);
    let inside = dr * (R::one() + n / (dr * lambda)).ln() + R::of(2.0) * (R::one() / delta).ln();
    sigma * inside.sqrt() + lambda.sqrt()
}

/// Score candidates and return the argmax; ties go to the lowest index.
pub(crate) fn argmax_scores<R: Real>(scores: &[R]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn check_candidates<R: Real>(candidates: &[Vec<R>], d: usize) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    for x in candidates {
        if x.len() != d {
            return Err(Error::InvalidObservation(format!(
                "candidate has dimension {}, learner expects {}",
                x.len(),
                d
            )));
        }
        let n2: R = dot(x, x);
        if !n2.is_finite() || n2 > R::one() + R::of(1e-6) {
            return Err(Error::InvalidObservation("candidate norm exceeds 1".into()));
        }
    }
    Ok(())
}

/// Aggregated sufficient statistics over a neighborhood:
/// `(lambda I + Σ A_j, Σ b_j, Σ |H_j|)`. Dropped models are skipped.
pub fn aggregate_statistics<R: Real>(
    pool: &ModelPool<R>,
    neighborhood: &[usize],
    cfg: &DyCluConfig<R>,
) -> Result<(Matrix<R>, Vec<R>, usize)> {
    if neighborhood.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let mut a = Matrix::zeros(cfg.d, cfg.d);
    a.add_diag(cfg.lambda);
    let mut b = vec![R::zero(); cfg.d];
    let mut n = 0usize;
    let mut seen = 0usize;
    for &idx in neighborhood {
        let Some(model) = pool.model(idx) else {
            continue;
        };
        seen += 1;
        a.add_assign(model.data.corr());
        for (bi, &mi) in b.iter_mut().zip(model.data.moment()) {
            *bi = *bi + mi;
        }
        n += model.data.len();
    }
    if seen == 0 {
        return Err(Error::EmptyNeighborhood);
    }
    Ok((a, b, n))
}

/// UCB scores for each candidate under the user's stored neighborhood.
pub fn ucb_scores<R: Real>(
    pool: &ModelPool<R>,
    user: UserId,
    candidates: &[Vec<R>],
    cfg: &DyCluConfig<R>,
) -> Result<Vec<R>> {
    check_candidates(candidates, cfg.d)?;
    let nb = pool
        .neighborhoods
        .get(&user)
        .ok_or(Error::UnknownUser(user))?;
    let (a, b, n) = aggregate_statistics(pool, nb, cfg)?;
    scores_from_statistics(&a, &b, n, candidates, cfg)
}

fn scores_from_statistics<R: Real>(
    a: &Matrix<R>,
    b: &[R],
    n_obs: usize,
    candidates: &[Vec<R>],
    cfg: &DyCluConfig<R>,
) -> Result<Vec<R>> {
    let chol = Cholesky::new(a)?;
    let theta = chol.solve(b);
    let alpha = ucb_alpha(cfg.sigma2.sqrt(), cfg.d, n_obs, cfg.lambda, cfg.delta);
    Ok(candidates
        .iter()
        .map(|x| dot(x, &theta) + alpha * chol.inv_quad_form(x).sqrt())
        .collect())
}

/// Pick the arm maximizing the UCB score under the neighborhood computed at
/// the user's previous interaction; ties break to the lowest index.
pub fn select_arm<R: Real>(
    pool: &ModelPool<R>,
    user: UserId,
    candidates: &[Vec<R>],
    cfg: &DyCluConfig<R>,
) -> Result<usize> {
    let scores = ucb_scores(pool, user, candidates, cfg)?;
    Ok(argmax_scores(&scores))
}

/// Most recently computed neighborhood for this user (model indices into
/// the pool). Always contains the user's own up-to-date model.
pub fn neighborhood_of<R: Real>(pool: &ModelPool<R>, user: UserId) -> Result<Vec<usize>> {
    pool.neighborhoods
        .get(&user)
        .cloned()
        .ok_or(Error::UnknownUser(user))
}

fn compute_neighborhood<R: Real>(
    pool: &ModelPool<R>,
    user: UserId,
    cfg: &DyCluConfig<R>,
) -> Result<Vec<usize>> {
    let own_idx = pool.current_index(user)?;
    let own = pool
        .model(own_idx)
        .ok_or_else(|| Error::Internal("current model slot empty".into()))?;
    let mut nb = vec![own_idx];
    // A model with no observations matches nothing but itself: a zero-df
    // statistic of zero would spuriously merge everything.
    if own.data.is_empty() {
        return Ok(nb);
    }
    for (idx, slot) in pool.models.iter().enumerate() {
        if idx == own_idx {
            continue;
        }
        let Some(other) = slot.as_ref() else { continue };
        if other.data.is_empty() {
            continue;
        }
        let (s, _df) = statistic_from_parts(
            own.data.corr(),
            own.data.moment(),
            &own.theta,
            own.rank,
            other.data.corr(),
            other.data.moment(),
            &other.theta,
            other.rank,
            cfg.sigma2,
        )?;
        if s <= cfg.upsilon_c {
            nb.push(idx);
        }
    }
    Ok(nb)
}

/// Feed one observation through the change detector and model update, then
/// refresh the user's neighborhood.
pub fn observe<R: Real>(
    pool: &mut ModelPool<R>,
    user: UserId,
    context: &[R],
    reward: R,
    cfg: &DyCluConfig<R>,
    t: usize,
) -> Result<StepEvent> {
    let idx = pool.current_index(user)?;
    let threshold = detection_threshold(cfg)?;
    let mut event = StepEvent::default();

    let model = pool.models[idx]
        .as_mut()
        .ok_or_else(|| Error::Internal("current model slot empty".into()))?;
    let e = if model.data.is_empty() {
        false
    } else {
        let (s, _df) = one_sample_from_parts(
            model.data.corr(),
            model.data.moment(),
            &model.theta,
            model.rank,
            context,
            reward,
            cfg.sigma2,
        )?;
        s > cfg.upsilon_e
    };
    model.push_indicator(e, cfg.tau);

    if model.e_mean() > threshold {
        // Change: retire the model; the triggering observation is dropped.
        pool.retire(user, t, cfg.d, cfg.outdated_cap)?;
        event.change_detected = true;
    } else if !e {
        model.append(context, reward)?;
        event.model_updated = true;
    } else {
        event.observation_discarded = true;
    }

    let nb = compute_neighborhood(pool, user, cfg)?;
    event.neighborhood_size = nb.len();
    pool.neighborhoods.insert(user, nb);
    Ok(event)
}

/// Oracle-mode selection: aggregate exactly the models labeled with the
/// true parameter, bypassing the statistical neighborhood.
pub fn select_arm_oracle<R: Real>(
    pool: &ModelPool<R>,
    true_param: usize,
    candidates: &[Vec<R>],
    cfg: &DyCluConfig<R>,
) -> Result<usize> {
    check_candidates(candidates, cfg.d)?;
    let mut a = Matrix::zeros(cfg.d, cfg.d);
    a.add_diag(cfg.lambda);
    let mut b = vec![R::zero(); cfg.d];
    let mut n = 0usize;
    for model in pool.models.iter().flatten() {
        if model.param_label == Some(true_param) {
            a.add_assign(model.data.corr());
            for (bi, &mi) in b.iter_mut().zip(model.data.moment()) {
                *bi = *bi + mi;
            }
            n += model.data.len();
        }
    }
    let scores = scores_from_statistics(&a, &b, n, candidates, cfg)?;
    Ok(argmax_scores(&scores))
}

/// Oracle-mode observation: retire exactly at true change points and store
/// every observation.
pub fn observe_oracle<R: Real>(
    pool: &mut ModelPool<R>,
    user: UserId,
    true_param: usize,
    context: &[R],
    reward: R,
    cfg: &DyCluConfig<R>,
    t: usize,
) -> Result<StepEvent> {
    let idx = pool.current_index(user)?;
    let mut event = StepEvent::default();
    let label = pool.models[idx]
        .as_ref()
        .ok_or_else(|| Error::Internal("current model slot empty".into()))?
        .param_label;
    if matches!(label, Some(l) if l != true_param) {
        pool.retire(user, t, cfg.d, cfg.outdated_cap)?;
        event.change_detected = true;
    } else {
        event.model_updated = true;
    }
    let idx = pool.current_index(user)?;
    let model = pool.models[idx]
        .as_mut()
        .ok_or_else(|| Error::Internal("current model slot empty".into()))?;
    model.append(context, reward)?;
    model.param_label = Some(true_param);
    event.neighborhood_size = 1;
    Ok(event)
}

/// DyClu bundled behind the shared [`crate::Learner`] interface.
#[derive(Debug, Clone)]
pub struct DyCluLearner<R> {
    cfg: DyCluConfig<R>,
    pool: ModelPool<R>,
    oracle: bool,
}

impl<R: Real> DyCluLearner<R> {
    pub fn new(cfg: DyCluConfig<R>, users: &[UserId]) -> Result<Self> {
        cfg.validate()?;
        let pool = ModelPool::new(users, cfg.d);
        Ok(Self {
            cfg,
            pool,
            oracle: false,
        })
    }

    /// Ground-truth variant: detection fires exactly at true change points
    /// and clustering is replaced by the true parameter map. Used to audit
    /// the added regret of the statistical machinery.
    pub fn new_with_oracle(cfg: DyCluConfig<R>, users: &[UserId]) -> Result<Self> {
        let mut l = Self::new(cfg, users)?;
        l.oracle = true;
        Ok(l)
    }

    pub fn pool(&self) -> &ModelPool<R> {
        &self.pool
    }

    pub fn config(&self) -> &DyCluConfig<R> {
        &self.cfg
    }
}

impl<R: Real> crate::Learner<R> for DyCluLearner<R> {
    fn name(&self) -> &str {
        if self.oracle {
            "dyclu-oracle"
        } else {
            "dyclu"
        }
    }

    fn select(
        &mut self,
        user: UserId,
        candidates: &[Vec<R>],
        truth: &crate::StepTruth,
    ) -> Result<usize> {
        self.pool.ensure_user(user, 0, self.cfg.d);
        if self.oracle {
            select_arm_oracle(&self.pool, truth.param_index, candidates, &self.cfg)
        } else {
            select_arm(&self.pool, user, candidates, &self.cfg)
        }
    }

    fn observe(
        &mut self,
        user: UserId,
        context: &[R],
        reward: R,
        t: usize,
        truth: &crate::StepTruth,
    ) -> Result<StepEvent> {
        self.pool.ensure_user(user, t, self.cfg.d);
        if self.oracle {
            observe_oracle(
                &mut self.pool,
                user,
                truth.param_index,
                context,
                reward,
                &self.cfg,
                t,
            )
        } else {
            observe(&mut self.pool, user, context, reward, &self.cfg, t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, axis: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        v
    }

    fn cfg(d: usize) -> DyCluConfig<f64> {
        DyCluConfig::with_default_thresholds(d, 10, 0.05, 0.01, 1.0, 1.0).unwrap()
    }

    fn users(n: usize) -> Vec<UserId> {
        (1..=n).map(UserId).collect()
    }

    #[test]
    fn detection_threshold_examples() {
        // delta_e = 1 kills the margin; quantile threshold leaves 0.05.
        let mut c = cfg(2);
        c.upsilon_e = chi2_quantile(0.95, 1).unwrap();
        c.delta_e = 1.0;
        let thr = detection_threshold(&c).unwrap();
        assert!((thr - 0.05).abs() < 1e-10, "thr = {thr}");

        c.upsilon_e = 1e6;
        let thr = detection_threshold(&c).unwrap();
        assert!(thr.abs() < 1e-10, "thr = {thr}");

        c.upsilon_e = 3.841;
        c.delta_e = (-2.0f64).exp();
        c.tau = 50;
        let thr = detection_threshold(&c).unwrap();
        assert!((thr - 0.1914).abs() < 1e-3, "thr = {thr}");
    }

    #[test]
    fn select_arm_fresh_pool_score() {
        // Empty pool, d = 2, lambda = 1, sigma = 1, delta = exp(-1/2):
        // alpha = sqrt(0 + 2 * 1/2) + 1 = 2, CB(e1) = 2 * sqrt(1) = 2.
        let mut c = cfg(2);
        c.delta = (-0.5f64).exp();
        let pool = ModelPool::new(&users(1), 2);
        let cands = vec![unit(2, 0)];
        let scores = ucb_scores(&pool, UserId(1), &cands, &c).unwrap();
        assert!((scores[0] - 2.0).abs() < 1e-12, "score = {}", scores[0]);
        assert_eq!(select_arm(&pool, UserId(1), &cands, &c).unwrap(), 0);
    }

    #[test]
    fn select_arm_tie_breaks_low_index() {
        let c = cfg(2);
        let pool = ModelPool::new(&users(1), 2);
        let cands = vec![unit(2, 1), unit(2, 1), unit(2, 0)];
        assert_eq!(select_arm(&pool, UserId(1), &cands, &c).unwrap(), 0);
        assert!(matches!(
            select_arm(&pool, UserId(1), &[], &c),
            Err(Error::NoCandidates)
        ));
        assert!(matches!(
            select_arm(&pool, UserId(9), &cands, &c),
            Err(Error::UnknownUser(UserId(9)))
        ));
    }

    #[test]
    fn select_arm_ridge_shrinkage() {
        // 99 observations of (e1, 1.0): theta along e1 is 99/100 with
        // lambda = 1.
        let c = cfg(2);
        let mut pool = ModelPool::new(&users(1), 2);
        for t in 1..=99 {
            observe(&mut pool, UserId(1), &unit(2, 0), 1.0, &c, t).unwrap();
        }
        let cands = vec![unit(2, 0)];
        let scores = ucb_scores(&pool, UserId(1), &cands, &c).unwrap();
        let alpha = ucb_alpha(1.0, 2, 99, 1.0, c.delta);
        let expect = 0.99 + alpha * (1.0f64 / 100.0).sqrt();
        assert!((scores[0] - expect).abs() < 1e-9, "score = {}", scores[0]);
    }

    #[test]
    fn observe_empty_model_appends() {
        let c = cfg(2);
        let mut pool = ModelPool::new(&users(1), 2);
        let ev = observe(&mut pool, UserId(1), &unit(2, 0), 0.7, &c, 1).unwrap();
        assert!(ev.model_updated);
        assert!(!ev.observation_discarded);
        assert!(!ev.change_detected);
        assert_eq!(pool.current_model(UserId(1)).unwrap().data().len(), 1);
        assert_eq!(ev.neighborhood_size, 1);
    }

    #[test]
    fn observe_contradiction_discards_without_detection() {
        // tau = 1, delta_e = 0.01: margin = sqrt(ln(100)/2) > 1, so a lone
        // indicator cannot fire the detector.
        let mut c = cfg(2);
        c.sigma2 = 0.09 * 0.09;
        c.upsilon_e = 3.841;
        c.tau = 1;
        c.delta_e = 0.01;
        let mut pool = ModelPool::new(&users(1), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 1.0, &c, 1).unwrap();
        let ev = observe(&mut pool, UserId(1), &unit(2, 0), -1.0, &c, 2).unwrap();
        assert!(ev.observation_discarded);
        assert!(!ev.change_detected);
        assert!(!ev.model_updated);
        let model = pool.current_model(UserId(1)).unwrap();
        assert_eq!(model.data().len(), 1, "discarded observation not stored");
        assert_eq!(model.e_mean(), 1.0);
    }

    #[test]
    fn observe_full_window_of_ones_detects_change() {
        // tau = 10, delta_e = 0.1: threshold ~ 0.05 + sqrt(ln(10)/20) ~ 0.389.
        let mut c = cfg(2);
        c.sigma2 = 0.09 * 0.09;
        c.upsilon_e = 3.841;
        c.tau = 10;
        c.delta_e = 0.1;
        let thr = detection_threshold(&c).unwrap();
        assert!((thr - 0.389).abs() < 1e-3, "thr = {thr}");

        let mut pool = ModelPool::new(&users(1), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 1.0, &c, 1).unwrap();
        // Contradictory stream; first e = 1 already pushes the mean to 1.
        let ev = observe(&mut pool, UserId(1), &unit(2, 0), -1.0, &c, 2).unwrap();
        assert!(ev.change_detected);
        assert!(!ev.model_updated);
        assert_eq!(pool.outdated_count(), 1);
        assert_eq!(pool.detections(), 1);
        let fresh = pool.current_model(UserId(1)).unwrap();
        assert!(fresh.data().is_empty());
        assert_eq!(fresh.e_mean(), 0.0, "window reset with the fresh model");
        assert_eq!(fresh.created_at(), 2);
    }

    #[test]
    fn neighborhood_examples() {
        let mut c = cfg(2);
        c.sigma2 = 1.0;
        // Fresh pool: own model only.
        let pool: ModelPool<f64> = ModelPool::new(&users(2), 2);
        assert_eq!(neighborhood_of(&pool, UserId(1)).unwrap().len(), 1);

        // Identical single-observation datasets merge (statistic 0).
        let mut pool = ModelPool::new(&users(2), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 1.0, &c, 1).unwrap();
        let ev = observe(&mut pool, UserId(2), &unit(2, 0), 1.0, &c, 2).unwrap();
        assert_eq!(ev.neighborhood_size, 2);

        // Far-apart datasets stay singletons: statistic 2 > upsilon_c = 1.
        let mut c1 = c.clone();
        c1.upsilon_c = 1.0;
        let mut pool = ModelPool::new(&users(2), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 0.0, &c1, 1).unwrap();
        let ev = observe(&mut pool, UserId(2), &unit(2, 0), 2.0, &c1, 2).unwrap();
        assert_eq!(ev.neighborhood_size, 1);
        assert_eq!(neighborhood_of(&pool, UserId(2)).unwrap().len(), 1);
    }

    #[test]
    fn aggregate_examples() {
        let c = cfg(2);
        let pool = ModelPool::new(&users(3), 2);
        // All-empty neighborhood: (lambda I, 0, 0).
        let nb = neighborhood_of(&pool, UserId(1)).unwrap();
        let (a, b, n) = aggregate_statistics(&pool, &nb, &c).unwrap();
        assert_eq!(n, 0);
        assert_eq!(a[(0, 0)], c.lambda);
        assert_eq!(a[(0, 1)], 0.0);
        assert!(b.iter().all(|&v| v == 0.0));
        assert!(matches!(
            aggregate_statistics(&pool, &[], &c),
            Err(Error::EmptyNeighborhood)
        ));

        // Single model with one observation (e1, 2).
        let mut pool = ModelPool::new(&users(3), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 2.0, &c, 1).unwrap();
        let nb = neighborhood_of(&pool, UserId(1)).unwrap();
        let (a, b, n) = aggregate_statistics(&pool, &nb, &c).unwrap();
        assert_eq!(n, 1);
        assert_eq!(a[(0, 0)], c.lambda + 1.0);
        assert_eq!(b[0], 2.0);

        // Two disjoint models each holding (e1, 1): aggregation equals the
        // pooled-dataset statistics plus the ridge term.
        let mut pool = ModelPool::new(&users(2), 2);
        observe(&mut pool, UserId(1), &unit(2, 0), 1.0, &c, 1).unwrap();
        observe(&mut pool, UserId(2), &unit(2, 0), 1.0, &c, 2).unwrap();
        let all: Vec<usize> = (0..2).collect();
        let (a_all, b_all, n_all) = aggregate_statistics(&pool, &all, &c).unwrap();
        assert_eq!(n_all, 2);
        let pooled =
            Dataset::from_observations(2, &[(unit(2, 0), 1.0), (unit(2, 0), 1.0)]).unwrap();
        for i in 0..2 {
            assert_eq!(b_all[i], pooled.moment()[i]);
            for j in 0..2 {
                let ridge = if i == j { c.lambda } else { 0.0 };
                assert_eq!(a_all[(i, j)], pooled.corr()[(i, j)] + ridge);
            }
        }
        assert_eq!(b_all[0], 2.0);
    }

    #[test]
    fn pool_size_invariants() {
        let mut c = cfg(2);
        c.sigma2 = 0.0081;
        c.tau = 2;
        c.delta_e = 0.4;
        let n_users = 3;
        let mut pool = ModelPool::new(&users(n_users), 2);
        let mut t = 0;
        for round in 0..30 {
            for u in 1..=n_users {
                t += 1;
                // Alternate regimes to force detections.
                let y = if (round / 10) % 2 == 0 { 1.0 } else { -1.0 };
                observe(&mut pool, UserId(u), &unit(2, 0), y, &c, t).unwrap();
            }
        }
        assert_eq!(pool.up_to_date_count(), n_users);
        assert_eq!(pool.outdated_count(), pool.detections());
        assert!(pool.detections() > 0, "regime flips should fire detections");
    }

    #[test]
    fn outdated_cap_drops_oldest() {
        let mut c = cfg(2);
        c.sigma2 = 0.0081;
        c.tau = 1;
        c.delta_e = 0.9; // margin < 1: single contradiction fires
        c.outdated_cap = Some(2);
        let mut pool = ModelPool::new(&users(1), 2);
        let mut t = 0;
        for flip in 0..6 {
            let y = if flip % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..3 {
                t += 1;
                observe(&mut pool, UserId(1), &unit(2, 0), y, &c, t).unwrap();
            }
        }
        assert!(pool.detections() >= 3);
        assert!(pool.outdated_count() <= 2, "cap enforced");
        assert_eq!(
            pool.dropped(),
            pool.detections() - pool.outdated_count(),
            "dropped + retained = detections"
        );
    }

    #[test]
    fn argmax_positive_scaling_invariance() {
        let scores = vec![0.3f64, 1.7, 1.1, 1.7];
        let best = argmax_scores(&scores);
        let scaled: Vec<f64> = scores.iter().map(|s| s * 3.5).collect();
        assert_eq!(best, argmax_scores(&scaled));
        assert_eq!(best, 1, "first of the tied maxima");
    }

    #[test]
    fn learner_stack_works_in_f32() {
        let c = DyCluConfig::<f32>::with_default_thresholds(2, 5, 0.05, 0.01, 1.0, 0.01).unwrap();
        let mut pool: ModelPool<f32> = ModelPool::new(&users(1), 2);
        for t in 1..=20 {
            let axis = t % 2;
            let mut x = vec![0.0f32; 2];
            x[axis] = 1.0;
            let choice = select_arm(&pool, UserId(1), &[x.clone()], &c).unwrap();
            assert_eq!(choice, 0);
            let reward = 0.5f32;
            observe(&mut pool, UserId(1), &x, reward, &c, t).unwrap();
        }
        assert_eq!(pool.current_model(UserId(1)).unwrap().data().len(), 20);
        assert_eq!(pool.detections(), 0);
    }

    #[test]
    fn oracle_mode_retires_on_label_change() {
        let c = cfg(2);
        let mut pool = ModelPool::new(&users(1), 2);
        observe_oracle(&mut pool, UserId(1), 0, &unit(2, 0), 1.0, &c, 1).unwrap();
        observe_oracle(&mut pool, UserId(1), 0, &unit(2, 1), 0.5, &c, 2).unwrap();
        assert_eq!(pool.outdated_count(), 0);
        let ev = observe_oracle(&mut pool, UserId(1), 1, &unit(2, 0), -1.0, &c, 3).unwrap();
        assert!(ev.change_detected);
        assert_eq!(pool.outdated_count(), 1);
        // The new observation seeds the fresh model.
        assert_eq!(pool.current_model(UserId(1)).unwrap().data().len(), 1);
    }
}
