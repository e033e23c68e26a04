//! Synthetic ground-truth world: a pool of separated unit-norm parameters,
//! per-user piecewise-stationary schedules over those parameters, random
//! candidate arms disclosed each round, reward sampling, and regret
//! accounting. Also a CSV replay loader for logged interactions.
//!
//! Everything is a deterministic function of the generation config and its
//! seed:
//! parameters, arms, and schedules are fixed at generation time, candidate
//! subsets are drawn from a per-step substream, and only reward noise
//! consumes the caller's RNG.

use std::fs;
use std::path::Path;

use crate::numerics::dot;
use crate::rng::Xoshiro256pp;
use crate::{Error, Real, Result, UserId};

const STREAM_PARAMS: u64 = 1;
const STREAM_ARMS: u64 = 2;
const STREAM_SCHEDULES: u64 = 3;
const STREAM_CANDIDATES: u64 = 4;
/// Reward-noise substream tag; used by harnesses to build the RNG passed
/// into [`realize_reward`].
pub const STREAM_NOISE: u64 = 5;

/// Inputs to environment generation.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig<R> {
    pub d: usize,
    pub n_users: usize,
    /// Number of unique parameters shared across users and time.
    pub m: usize,
    /// Arm pool size.
    pub arm_pool_size: usize,
    /// Arms disclosed per round.
    pub candidate_size: usize,
    /// Minimum pairwise distance between unique parameters.
    pub gamma: R,
    /// Reward noise standard deviation.
    pub sigma: R,
    /// Stationary-period length range, in user-local interaction counts.
    pub smin: usize,
    pub smax: usize,
    /// Total interaction steps.
    pub horizon: usize,
}

impl<R: Real> EnvConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("environment.d must be at least 1".into()));
        }
        if self.n_users == 0 {
            return Err(Error::Config(
                "environment.n_users must be at least 1".into(),
            ));
        }
        if self.m == 0 {
            return Err(Error::Config("environment.m must be at least 1".into()));
        }
        if self.arm_pool_size == 0 {
            return Err(Error::Config(
                "environment.arm_pool_size must be at least 1".into(),
            ));
        }
        if self.candidate_size == 0 || self.candidate_size > self.arm_pool_size {
            return Err(Error::Config(
                "environment.candidate_size must lie in 1..=arm_pool_size".into(),
            ));
        }
        if !(self.gamma >= R::zero()) || self.gamma >= R::of(2.0) {
            return Err(Error::Config("environment.gamma must lie in [0, 2)".into()));
        }
        if !(self.sigma >= R::zero()) || !self.sigma.is_finite() {
            return Err(Error::Config(
                "environment.sigma must be nonnegative".into(),
            ));
        }
        if self.smin == 0 || self.smin > self.smax {
            return Err(Error::Config(
                "environment.smin must lie in 1..=smax".into(),
            ));
        }
        if self.horizon < self.n_users {
            return Err(Error::Config(
                "environment.horizon must be at least n_users".into(),
            ));
        }
        Ok(())
    }
}

/// One stationary period of a user's schedule: the parameter index takes
/// effect at user-local interaction `start` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub start: usize,
    pub param: usize,
}

/// Fully realized environment: ground-truth parameters, arm pool, and
/// per-user change schedules. Immutable after generation.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec<R> {
    pub d: usize,
    pub n_users: usize,
    pub m: usize,
    pub unique_params: Vec<Vec<R>>,
    pub arm_pool: Vec<Vec<R>>,
    /// Per user (0-based slot for user id `u = slot + 1`).
    pub schedules: Vec<Vec<ScheduleEntry>>,
    pub sigma2: R,
    pub gamma: R,
    pub smin: usize,
    pub smax: usize,
    pub candidate_size: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// What the learner sees at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepContext<R> {
    pub t: usize,
    pub user: UserId,
    pub candidates: Vec<Vec<R>>,
    /// Hidden from learners except the oracles.
    pub true_param_index: usize,
}

/// One per-step log row produced by an experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: usize,
    pub user: UserId,
    pub algorithm: String,
    pub chosen_index: usize,
    pub reward: f64,
    pub instantaneous_regret: f64,
    pub cumulative_regret: f64,
    pub discarded: bool,
    pub change_detected: bool,
    pub model_updated: bool,
    pub neighborhood_size: usize,
}

fn random_unit_vector<R: Real>(rng: &mut Xoshiro256pp, d: usize) -> Vec<R> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|&x| R::of(x / norm)).collect();
        }
    }
}

const SEPARATION_BUDGET: usize = 1_000_000;

/// Generate an environment from a config and seed. Unique parameters are
/// unit-norm gaussian directions accepted only when `gamma`-separated from
/// all previously accepted ones; schedules tile each user's local horizon
/// with interval lengths drawn uniformly from `[smin, smax]` and parameter
/// indices re-drawn whenever they would repeat the previous interval's.
pub fn generate_environment<R: Real>(cfg: &EnvConfig<R>, seed: u64) -> Result<EnvSpec<R>> {
    cfg.validate()?;
    let mut param_rng = Xoshiro256pp::from_stream(seed, STREAM_PARAMS, 0);
    let mut unique_params: Vec<Vec<R>> = Vec::with_capacity(cfg.m);
    let mut attempts = 0usize;
    while unique_params.len() < cfg.m {
        attempts += 1;
        if attempts > SEPARATION_BUDGET {
            return Err(Error::InfeasibleSeparation);
        }
        let cand = random_unit_vector::<R>(&mut param_rng, cfg.d);
        let separated = unique_params.iter().all(|p| {
            let d2: R = p.iter().zip(&cand).map(|(&a, &b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= cfg.gamma
        });
        if separated {
            unique_params.push(cand);
        }
    }

    let mut arm_rng = Xoshiro256pp::from_stream(seed, STREAM_ARMS, 0);
    let arm_pool: Vec<Vec<R>> = (0..cfg.arm_pool_size)
        .map(|_| random_unit_vector::<R>(&mut arm_rng, cfg.d))
        .collect();

    let mut schedules = Vec::with_capacity(cfg.n_users);
    for u in 0..cfg.n_users {
        let mut rng = Xoshiro256pp::from_stream(seed, STREAM_SCHEDULES, u as u64);
        let local_horizon = local_horizon(cfg.horizon, cfg.n_users, u + 1);
        let mut entries: Vec<ScheduleEntry> = Vec::new();
        let mut start = 1usize;
        let mut prev_param: Option<usize> = None;
        while start <= local_horizon {
            let len = rng.next_range(cfg.smin as u64, cfg.smax as u64) as usize;
            let param = loop {
                let k = rng.next_below(cfg.m as u64) as usize;
                if cfg.m == 1 || Some(k) != prev_param {
                    break k;
                }
            };
            // With a single unique parameter every draw repeats it; the
            // periods merge into one, keeping entry boundaries true change
            // points.
            if prev_param != Some(param) {
                entries.push(ScheduleEntry { start, param });
            }
            prev_param = Some(param);
            start += len;
        }
        schedules.push(entries);
    }

    Ok(EnvSpec {
        d: cfg.d,
        n_users: cfg.n_users,
        m: cfg.m,
        unique_params,
        arm_pool,
        schedules,
        sigma2: cfg.sigma * cfg.sigma,
        gamma: cfg.gamma,
        smin: cfg.smin,
        smax: cfg.smax,
        candidate_size: cfg.candidate_size,
        horizon: cfg.horizon,
        seed,
    })
}

/// Number of interactions user `u` (1-based) gets in `horizon` steps of
/// round-robin service over `n` users.
pub fn local_horizon(horizon: usize, n: usize, u: usize) -> usize {
    if u > horizon {
        0
    } else {
        (horizon - u) / n + 1
    }
}

impl<R: Real> EnvSpec<R> {
    /// User served at step `t` (round-robin, 1-based).
    pub fn user_at(&self, t: usize) -> UserId {
        UserId((t - 1) % self.n_users + 1)
    }

    /// User-local interaction count at global step `t`.
    pub fn local_count(&self, t: usize) -> usize {
        (t - 1) / self.n_users + 1
    }

    /// Parameter index governing user `user` at their `local`-th
    /// interaction.
    pub fn param_at(&self, user: UserId, local: usize) -> usize {
        let sched = &self.schedules[user.0 - 1];
        let mut param = sched[0].param;
        for e in sched {
            if e.start <= local {
                param = e.param;
            } else {
                break;
            }
        }
        param
    }

    /// True change points of a user, as local interaction counts (the first
    /// interaction of each period after the first).
    pub fn change_points(&self, user: UserId) -> Vec<usize> {
        let lh = local_horizon(self.horizon, self.n_users, user.0);
        self.schedules[user.0 - 1]
            .iter()
            .skip(1)
            .map(|e| e.start)
            .filter(|&s| s <= lh)
            .collect()
    }

    /// Number of stationary periods of a user within the horizon.
    pub fn period_count(&self, user: UserId) -> usize {
        self.change_points(user).len() + 1
    }
}

/// Environment state visible to the learner at step `t`: the served user,
/// the disclosed candidate subset, and (for oracles) the true parameter.
/// Pure in `(env, t)`; candidate subsets come from a per-step substream.
pub fn next_step<R: Real>(env: &EnvSpec<R>, t: usize) -> Result<StepContext<R>> {
    if t == 0 || t > env.horizon {
        return Err(Error::OutOfHorizon {
            t,
            horizon: env.horizon,
        });
    }
    let user = env.user_at(t);
    let local = env.local_count(t);
    let true_param_index = env.param_at(user, local);
    let k = env.arm_pool.len();
    let candidates = if env.candidate_size >= k {
        // Full disclosure keeps pool order.
        env.arm_pool.clone()
    } else {
        let mut rng = Xoshiro256pp::from_stream(env.seed, STREAM_CANDIDATES, t as u64);
        let mut indices: Vec<usize> = (0..k).collect();
        for i in 0..env.candidate_size {
            let j = i + rng.next_below((k - i) as u64) as usize;
            indices.swap(i, j);
        }
        indices[..env.candidate_size]
            .iter()
            .map(|&i| env.arm_pool[i].clone())
            .collect()
    };
    Ok(StepContext {
        t,
        user,
        candidates,
        true_param_index,
    })
}

/// Sample the reward of the chosen candidate and return it with the
/// noiseless instantaneous regret against the best disclosed arm.
pub fn realize_reward<R: Real>(
    env: &EnvSpec<R>,
    step: &StepContext<R>,
    chosen: usize,
    rng: &mut Xoshiro256pp,
) -> Result<(R, R)> {
    let x = step
        .candidates
        .get(chosen)
        .ok_or_else(|| Error::Internal(format!("chosen index {chosen} out of range")))?;
    let phi = &env.unique_params[step.true_param_index];
    let mean = dot(x, phi);
    let noise = R::of(rng.next_gaussian()) * env.sigma2.sqrt();
    let best = step
        .candidates
        .iter()
        .map(|c| dot(c, phi))
        .fold(R::neg_infinity(), |a, b| a.max(b));
    Ok((mean + noise, best - mean))
}

/// One logged interaction from a replay file.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRow<R> {
    pub user: UserId,
    pub candidates: Vec<Vec<R>>,
    pub chosen: usize,
    pub reward: R,
    pub random_reward: Option<R>,
}

/// Load a replay log. Schema (header required on nonempty files):
/// `user,context,chosen,reward[,random_reward]` where `context` is
/// semicolon-separated candidate groups of comma-separated reals. Yields
/// rows in file order.
pub fn load_replay<R: Real>(path: &Path) -> Result<Vec<ReplayRow<R>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_replay(&text)
}

pub fn parse_replay<R: Real>(text: &str) -> Result<Vec<ReplayRow<R>>> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Ok(rows),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((no, l)) => break (no, l.trim()),
        }
    };
    let has_random = match header.1 {
        "user,context,chosen,reward" => false,
        "user,context,chosen,reward,random_reward" => true,
        other => {
            return Err(Error::Parse {
                line: header.0 + 1,
                msg: format!("unrecognized header `{other}`"),
            })
        }
    };
    let mut dim: Option<usize> = None;
    for (no, raw) in lines {
        let line_no = no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        let (user_tok, rest) = line
            .split_once(',')
            .ok_or_else(|| parse_err("missing fields".into()))?;
        let user: usize = user_tok
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad user id `{user_tok}`")))?;
        let groups: Vec<&str> = rest.split(';').collect();
        let tail_extras = if has_random { 3 } else { 2 };
        let mut candidates: Vec<Vec<R>> = Vec::with_capacity(groups.len());
        let mut tail: Vec<&str> = Vec::new();
        for (gi, group) in groups.iter().enumerate() {
            let toks: Vec<&str> = group.split(',').map(str::trim).collect();
            let is_last = gi + 1 == groups.len();
            let ctx_toks: &[&str] = if is_last {
                if toks.len() < tail_extras + 1 {
                    return Err(parse_err("row too short for chosen/reward fields".into()));
                }
                tail = toks[toks.len() - tail_extras..].to_vec();
                &toks[..toks.len() - tail_extras]
            } else {
                &toks
            };
            let mut ctx = Vec::with_capacity(ctx_toks.len());
            for tok in ctx_toks {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(format!("bad real `{tok}` in context")))?;
                ctx.push(R::of(v));
            }
            match dim {
                None => dim = Some(ctx.len()),
                Some(d) if d != ctx.len() => {
                    return Err(parse_err(format!(
                        "context group has {} entries, expected {d}",
                        ctx.len()
                    )))
                }
                _ => {}
            }
            candidates.push(ctx);
        }
        let chosen: usize = tail[0]
            .parse()
            .map_err(|_| parse_err(format!("bad chosen index `{}`", tail[0])))?;
        if chosen >= candidates.len() {
            return Err(parse_err(format!(
                "chosen index {chosen} out of range for {} candidates",
                candidates.len()
            )));
        }
        let reward: f64 = tail[1]
            .parse()
            .map_err(|_| parse_err(format!("bad reward `{}`", tail[1])))?;
        let random_reward = if has_random {
            let v: f64 = tail[2]
                .parse()
                .map_err(|_| parse_err(format!("bad random_reward `{}`", tail[2])))?;
            Some(R::of(v))
        } else {
            None
        };
        rows.push(ReplayRow {
            user: UserId(user),
            candidates,
            chosen,
            reward: R::of(reward),
            random_reward,
        });
    }
    Ok(rows)
}
