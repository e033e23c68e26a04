//! Comparison learners sharing the environment interface: LinUCB with one
//! shared model or one model per user, oracle-LinUCB routing on the true
//! parameter, a restart-on-detection learner ("dLinUCB-style"), and a
//! CLUB-style graph learner that only ever deletes edges.

use std::collections::{BTreeMap, VecDeque};

use crate::dyclu::{argmax_scores, ucb_alpha, StepEvent};
use crate::homogeneity::{one_sample_from_parts, theta_and_rank, Dataset};
use crate::numerics::{central_chi2_cdf, dot, hoeffding_margin, Cholesky, Matrix};
use crate::{Error, Learner, Real, Result, StepTruth, UserId};

/// Parameters shared by the baseline learners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig<R> {
    pub d: usize,
    pub lambda: R,
    pub delta: R,
    pub sigma2: R,
}

impl<R: Real> BaselineConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if !(self.lambda > R::zero()) || !self.lambda.is_finite() {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if !(self.delta > R::zero() && self.delta < R::one()) {
            return Err(Error::Config("delta must lie in (0, 1)".into()));
        }
        if !(self.sigma2 > R::zero()) || !self.sigma2.is_finite() {
            return Err(Error::Config("sigma2 must be positive".into()));
        }
        Ok(())
    }
}

/// Ridge regression state `A = lambda I + Σ x xᵀ`, `b = Σ x y`.
#[derive(Debug, Clone)]
pub struct RidgeModel<R> {
    a: Matrix<R>,
    b: Vec<R>,
    n_obs: usize,
    lambda: R,
}

impl<R: Real> RidgeModel<R> {
    pub fn new(d: usize, lambda: R) -> Self {
        let mut a = Matrix::zeros(d, d);
        a.add_diag(lambda);
        Self {
            a,
            b: vec![R::zero(); d],
            n_obs: 0,
            lambda,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn corr(&self) -> &Matrix<R> {
        &self.a
    }

    pub fn moment(&self) -> &[R] {
        &self.b
    }

    /// Raw correlation `Σ x xᵀ` without the ridge term.
    fn raw_corr(&self) -> Matrix<R> {
        let mut a = self.a.clone();
        a.add_diag(-self.lambda);
        a
    }

    pub fn theta(&self) -> Result<Vec<R>> {
        Ok(Cholesky::new(&self.a)?.solve(&self.b))
    }

    pub fn update(&mut self, context: &[R], reward: R) {
        self.a.add_outer(context);
        for (bi, &xi) in self.b.iter_mut().zip(context) {
            *bi = *bi + xi * reward;
        }
        self.n_obs += 1;
    }

    pub fn reset(&mut self) {
        let d = self.b.len();
        *self = Self::new(d, self.lambda);
    }

    /// UCB selection over candidates with `N = n_obs` in the width term.
    pub fn select(&self, candidates: &[Vec<R>], cfg: &BaselineConfig<R>) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let chol = Cholesky::new(&self.a)?;
        let theta = chol.solve(&self.b);
        let alpha = ucb_alpha(cfg.sigma2.sqrt(), cfg.d, self.n_obs, self.lambda, cfg.delta);
        let scores: Vec<R> = candidates
            .iter()
            .map(|x| dot(x, &theta) + alpha * chol.inv_quad_form(x).sqrt())
            .collect();
        Ok(argmax_scores(&scores))
    }
}

/// LinUCB with one model shared by all users ("linucb-one").
#[derive(Debug, Clone)]
pub struct LinUcbShared<R> {
    cfg: BaselineConfig<R>,
    model: RidgeModel<R>,
}

impl<R: Real> LinUcbShared<R> {
    pub fn new(cfg: BaselineConfig<R>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            model: RidgeModel::new(cfg.d, cfg.lambda),
            cfg,
        })
    }

    pub fn model(&self) -> &RidgeModel<R> {
        &self.model
    }
}

impl<R: Real> Learner<R> for LinUcbShared<R> {
    fn name(&self) -> &str {
        "linucb-one"
    }

    fn select(&mut self, _user: UserId, candidates: &[Vec<R>], _t: &StepTruth) -> Result<usize> {
        self.model.select(candidates, &self.cfg)
    }

    fn observe(
        &mut self,
        _user: UserId,
        context: &[R],
        reward: R,
        _t: usize,
        _truth: &StepTruth,
    ) -> Result<StepEvent> {
        self.model.update(context, reward);
        Ok(StepEvent {
            model_updated: true,
            neighborhood_size: 1,
            ..StepEvent::default()
        })
    }
}

/// LinUCB with one model per user ("linucb-ind").
#[derive(Debug, Clone)]
pub struct LinUcbPerUser<R> {
    cfg: BaselineConfig<R>,
    models: BTreeMap<UserId, RidgeModel<R>>,
}

impl<R: Real> LinUcbPerUser<R> {
    pub fn new(cfg: BaselineConfig<R>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            models: BTreeMap::new(),
        })
    }

    fn model_mut(&mut self, user: UserId) -> &mut RidgeModel<R> {
        let (d, lambda) = (self.cfg.d, self.cfg.lambda);
        self.models
            .entry(user)
            .or_insert_with(|| RidgeModel::new(d, lambda))
    }

    pub fn model(&self, user: UserId) -> Option<&RidgeModel<R>> {
        self.models.get(&user)
    }
}

impl<R: Real> Learner<R> for LinUcbPerUser<R> {
    fn name(&self) -> &str {
        "linucb-ind"
    }

    fn select(&mut self, user: UserId, candidates: &[Vec<R>], _t: &StepTruth) -> Result<usize> {
        let cfg = self.cfg;
        self.model_mut(user).select(candidates, &cfg)
    }

    fn observe(
        &mut self,
        user: UserId,
        context: &[R],
        reward: R,
        _t: usize,
        _truth: &StepTruth,
    ) -> Result<StepEvent> {
        self.model_mut(user).update(context, reward);
        Ok(StepEvent {
            model_updated: true,
            neighborhood_size: 1,
            ..StepEvent::default()
        })
    }
}

/// Reference learner holding one LinUCB instance per unique ground-truth
/// parameter; the environment supplies the routing index.
#[derive(Debug, Clone)]
pub struct OracleLinUcb<R> {
    cfg: BaselineConfig<R>,
    m: usize,
    models: Vec<RidgeModel<R>>,
    /// Steps routed to each parameter, for audits.
    routed: Vec<usize>,
}

impl<R: Real> OracleLinUcb<R> {
    pub fn new(m: usize, cfg: BaselineConfig<R>) -> Result<Self> {
        cfg.validate()?;
        if m == 0 {
            return Err(Error::Config("oracle-linucb needs m >= 1".into()));
        }
        Ok(Self {
            m,
            models: (0..m).map(|_| RidgeModel::new(cfg.d, cfg.lambda)).collect(),
            routed: vec![0; m],
            cfg,
        })
    }

    pub fn model(&self, k: usize) -> Result<&RidgeModel<R>> {
        self.models.get(k).ok_or(Error::UnknownParameter(k))
    }

    pub fn routed(&self, k: usize) -> usize {
        self.routed.get(k).copied().unwrap_or(0)
    }
}

impl<R: Real> Learner<R> for OracleLinUcb<R> {
    fn name(&self) -> &str {
        "oracle-linucb"
    }

    fn select(&mut self, _user: UserId, candidates: &[Vec<R>], truth: &StepTruth) -> Result<usize> {
        let k = truth.param_index;
        if k >= self.m {
            return Err(Error::UnknownParameter(k));
        }
        self.models[k].select(candidates, &self.cfg)
    }

    fn observe(
        &mut self,
        _user: UserId,
        context: &[R],
        reward: R,
        _t: usize,
        truth: &StepTruth,
    ) -> Result<StepEvent> {
        let k = truth.param_index;
        if k >= self.m {
            return Err(Error::UnknownParameter(k));
        }
        self.models[k].update(context, reward);
        self.routed[k] += 1;
        Ok(StepEvent {
            model_updated: true,
            neighborhood_size: 1,
            ..StepEvent::default()
        })
    }
}

/// Detector parameters shared with DyClu's change detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig<R> {
    pub tau: usize,
    pub delta_e: R,
    pub upsilon_e: R,
}

#[derive(Debug, Clone)]
struct RestartState<R> {
    model: RidgeModel<R>,
    data: Dataset<R>,
    theta: Vec<R>,
    rank: usize,
    window: VecDeque<bool>,
    ones: usize,
}

impl<R: Real> RestartState<R> {
    fn new(d: usize, lambda: R) -> Self {
        Self {
            model: RidgeModel::new(d, lambda),
            data: Dataset::new(d),
            theta: vec![R::zero(); d],
            rank: 0,
            window: VecDeque::new(),
            ones: 0,
        }
    }

    fn e_mean(&self) -> R {
        if self.window.is_empty() {
            R::zero()
        } else {
            R::of(self.ones as f64) / R::of(self.window.len() as f64)
        }
    }

    fn push(&mut self, e: bool, tau: usize) {
        if self.window.len() == tau {
            if let Some(old) = self.window.pop_front() {
                if old {
                    self.ones -= 1;
                }
            }
        }
        self.window.push_back(e);
        if e {
            self.ones += 1;
        }
    }
}

/// Per-user LinUCB with the same windowed one-sample change detector as
/// DyClu; on detection the user's state resets to scratch. No cross-user
/// sharing, no reuse of outdated observations.
#[derive(Debug, Clone)]
pub struct RestartDetect<R> {
    cfg: BaselineConfig<R>,
    det: DetectorConfig<R>,
    states: BTreeMap<UserId, RestartState<R>>,
    detections: usize,
}

impl<R: Real> RestartDetect<R> {
    pub fn new(cfg: BaselineConfig<R>, det: DetectorConfig<R>) -> Result<Self> {
        cfg.validate()?;
        if det.tau == 0 {
            return Err(Error::InvalidWindow);
        }
        Ok(Self {
            cfg,
            det,
            states: BTreeMap::new(),
            detections: 0,
        })
    }

    fn threshold(&self) -> Result<R> {
        let base = R::one() - central_chi2_cdf(self.det.upsilon_e, 1)?;
        Ok(base + hoeffding_margin(self.det.delta_e, self.det.tau)?)
    }

    fn state_mut(&mut self, user: UserId) -> &mut RestartState<R> {
        let (d, lambda) = (self.cfg.d, self.cfg.lambda);
        self.states
            .entry(user)
            .or_insert_with(|| RestartState::new(d, lambda))
    }

    pub fn detections(&self) -> usize {
        self.detections
    }

    pub fn model(&self, user: UserId) -> Option<&RidgeModel<R>> {
        self.states.get(&user).map(|s| &s.model)
    }
}

impl<R: Real> Learner<R> for RestartDetect<R> {
    fn name(&self) -> &str {
        "dlinucb-restart"
    }

    fn select(&mut self, user: UserId, candidates: &[Vec<R>], _t: &StepTruth) -> Result<usize> {
        let cfg = self.cfg;
        self.state_mut(user).model.select(candidates, &cfg)
    }

    fn observe(
        &mut self,
        user: UserId,
        context: &[R],
        reward: R,
        _t: usize,
        _truth: &StepTruth,
    ) -> Result<StepEvent> {
        let threshold = self.threshold()?;
        let (tau, upsilon_e, sigma2) = (self.det.tau, self.det.upsilon_e, self.cfg.sigma2);
        let state = self.state_mut(user);
        let e = if state.data.is_empty() {
            false
        } else {
            let (s, _df) = one_sample_from_parts(
                state.data.corr(),
                state.data.moment(),
                &state.theta,
                state.rank,
                context,
                reward,
                sigma2,
            )?;
            s > upsilon_e
        };
        state.push(e, tau);
        if state.e_mean() > threshold {
            let (d, lambda) = (state.data.dim(), state.model.lambda);
            *state = RestartState::new(d, lambda);
            self.detections += 1;
            return Ok(StepEvent {
                change_detected: true,
                neighborhood_size: 1,
                ..StepEvent::default()
            });
        }
        // The indicator only feeds the window; every observation is kept, so
        // a run without detections is state-identical to linucb-ind.
        state.data.push(context, reward)?;
        let (theta, rank) = theta_and_rank(&state.data)?;
        state.theta = theta;
        state.rank = rank;
        state.model.update(context, reward);
        Ok(StepEvent {
            model_updated: true,
            neighborhood_size: 1,
            ..StepEvent::default()
        })
    }
}

/// Graph-based clustering learner: users start fully connected, edges are
/// deleted when estimates separate beyond their confidence widths, and arm
/// selection aggregates the user's connected component.
#[derive(Debug, Clone)]
pub struct ClusterGraph<R> {
    cfg: BaselineConfig<R>,
    beta: R,
    ids: Vec<UserId>,
    index: BTreeMap<UserId, usize>,
    models: Vec<RidgeModel<R>>,
    adj: Vec<Vec<bool>>,
}

impl<R: Real> ClusterGraph<R> {
    pub fn new(cfg: BaselineConfig<R>, beta: R) -> Result<Self> {
        cfg.validate()?;
        if !(beta > R::zero()) || !beta.is_finite() {
            return Err(Error::Config("club beta must be positive".into()));
        }
        Ok(Self {
            cfg,
            beta,
            ids: Vec::new(),
            index: BTreeMap::new(),
            models: Vec::new(),
            adj: Vec::new(),
        })
    }

    fn ensure_user(&mut self, user: UserId) -> usize {
        if let Some(&i) = self.index.get(&user) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(user);
        self.index.insert(user, i);
        self.models
            .push(RidgeModel::new(self.cfg.d, self.cfg.lambda));
        for row in &mut self.adj {
            row.push(true);
        }
        let mut row = vec![true; i + 1];
        row[i] = false;
        self.adj.push(row);
        i
    }

    fn component(&self, start: usize) -> Vec<usize> {
        let n = self.ids.len();
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        let mut out = Vec::new();
        seen[start] = true;
        while let Some(u) = stack.pop() {
            out.push(u);
            for v in 0..n {
                if self.adj[u][v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn component_count(&self) -> usize {
        let n = self.ids.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            for u in self.component(s) {
                seen[u] = true;
            }
        }
        count
    }

    pub fn component_of(&self, user: UserId) -> Option<Vec<UserId>> {
        let &i = self.index.get(&user)?;
        Some(self.component(i).into_iter().map(|j| self.ids[j]).collect())
    }

    fn conf_width(&self, n_obs: usize) -> R {
        let n = R::of(n_obs as f64);
        self.beta * ((R::one() + (R::one() + n).ln()) / (R::one() + n)).sqrt()
    }
}

impl<R: Real> Learner<R> for ClusterGraph<R> {
    fn name(&self) -> &str {
        "club"
    }

    fn select(&mut self, user: UserId, candidates: &[Vec<R>], _t: &StepTruth) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let i = self.ensure_user(user);
        let comp = self.component(i);
        // Aggregate raw correlations plus a single ridge term.
        let mut a = Matrix::zeros(self.cfg.d, self.cfg.d);
        a.add_diag(self.cfg.lambda);
        let mut b = vec![R::zero(); self.cfg.d];
        let mut n = 0usize;
        for &u in &comp {
            a.add_assign(&self.models[u].raw_corr());
            for (bi, &mi) in b.iter_mut().zip(self.models[u].moment()) {
                *bi = *bi + mi;
            }
            n += self.models[u].n_obs();
        }
        let chol = Cholesky::new(&a)?;
        let theta = chol.solve(&b);
        let alpha = ucb_alpha(
            self.cfg.sigma2.sqrt(),
            self.cfg.d,
            n,
            self.cfg.lambda,
            self.cfg.delta,
        );
        let scores: Vec<R> = candidates
            .iter()
            .map(|x| dot(x, &theta) + alpha * chol.inv_quad_form(x).sqrt())
            .collect();
        Ok(argmax_scores(&scores))
    }

    fn observe(
        &mut self,
        user: UserId,
        context: &[R],
        reward: R,
        _t: usize,
        _truth: &StepTruth,
    ) -> Result<StepEvent> {
        let i = self.ensure_user(user);
        self.models[i].update(context, reward);
        let theta_i = self.models[i].theta()?;
        let w_i = self.conf_width(self.models[i].n_obs());
        let n = self.ids.len();
        for j in 0..n {
            if !self.adj[i][j] {
                continue;
            }
            let theta_j = self.models[j].theta()?;
            let gap = theta_i
                .iter()
                .zip(&theta_j)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<R>()
                .sqrt();
            if gap > w_i + self.conf_width(self.models[j].n_obs()) {
                self.adj[i][j] = false;
                self.adj[j][i] = false;
            }
        }
        Ok(StepEvent {
            model_updated: true,
            neighborhood_size: self.component(i).len(),
            ..StepEvent::default()
        })
    }
}
