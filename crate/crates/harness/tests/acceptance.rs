//! Acceptance suite: every release-gating criterion, one test each, with a
//! printed PASS/FAIL line (visible under `cargo test -- --nocapture`).
//! Simulation-heavy criteria share one batch of environment-3 runs.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use dyclu_cli::config::{build_learner, EnvironmentBlock, LearnerBlock, LearnerEnv};
use dyclu_cli::runner::{run_experiment, run_single};
use dyclu_core::environment::{generate_environment, EnvConfig, RunRecord};
use dyclu_core::homogeneity::{homogeneity_statistic, type2_bound, Dataset, NoiseModel};
use dyclu_core::numerics::{
    central_chi2_cdf, chi2_quantile, dot, noncentral_chi2_cdf, norm2, pseudo_inverse, Matrix,
    RankTolerance,
};
use dyclu_core::rng::Xoshiro256pp;

fn report(criterion: &str, pass: bool, detail: &str, started: Instant) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "criterion {criterion}: {} — {detail} [{secs:.1}s]",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn unit_sphere(rng: &mut Xoshiro256pp, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let n = norm2(&v);
        if n > 1e-9 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn learner_block(name: &str) -> LearnerBlock {
    LearnerBlock {
        name: name.to_string(),
        tau: Some(30),
        delta: None,
        delta_e: Some(0.01),
        upsilon_e: None,
        upsilon_c: None,
        lambda: None,
        beta: None,
        sigma: None,
        outdated_cap: None,
    }
}

fn env_block(
    d: usize,
    n_users: usize,
    m: usize,
    sigma: f64,
    smin: usize,
    smax: usize,
    horizon: usize,
) -> EnvironmentBlock {
    EnvironmentBlock {
        d,
        n_users,
        m,
        arm_pool_size: 100,
        candidate_size: 25,
        gamma: 0.9,
        sigma,
        smin,
        smax,
        horizon,
    }
}

fn run_learner(block: &LearnerBlock, env_cfg: &EnvConfig<f64>, seed: u64) -> Vec<RunRecord> {
    let env = generate_environment(env_cfg, seed).expect("environment generation");
    let mut learner =
        build_learner(block, &LearnerEnv::from_spec(&env)).expect("learner construction");
    run_single(&env, learner.as_mut(), &block.name).expect("simulation run")
}

// ---------------------------------------------------------------------------
// Criterion 1: type-I calibration of the homogeneity test.
// ---------------------------------------------------------------------------
#[test]
fn criterion_1_type1_calibration() {
    let started = Instant::now();
    let d = 5;
    let t_each = 20;
    let sigma = 0.1;
    let noise = NoiseModel::new(sigma * sigma).unwrap();
    let trials = 100_000;
    let mut rng = Xoshiro256pp::seed_from_u64(0xACCE01);
    let mut quantiles: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rejections = 0usize;
    for _ in 0..trials {
        let theta = unit_sphere(&mut rng, d);
        let mut build = || {
            let mut data = Dataset::new(d);
            for _ in 0..t_each {
                let x = unit_sphere(&mut rng, d);
                let y = dot(&x, &theta) + sigma * rng.next_gaussian();
                data.push(&x, y).unwrap();
            }
            data
        };
        let d1 = build();
        let d2 = build();
        let (s, df) = homogeneity_statistic(&d1, &d2, &noise).unwrap();
        let upsilon = *quantiles
            .entry(df.max(1))
            .or_insert_with(|| chi2_quantile(0.95, df.max(1)).unwrap());
        if df > 0 && s > upsilon {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    let limit = 0.05 + 0.007;
    let in_budget = started.elapsed().as_secs_f64() < 120.0;
    let pass = rate <= limit && in_budget;
    report(
        "1 (type-I calibration)",
        pass,
        &format!("rejection rate {rate:.4} <= {limit:.3} over {trials} homogeneous pairs"),
        started,
    );
    assert!(rate <= limit, "empirical type-I rate {rate} above {limit}");
    assert!(in_budget, "runtime budget of 2 minutes exceeded");
}

// ---------------------------------------------------------------------------
// Criterion 2: type-II bound on separated, well-conditioned pairs.
// ---------------------------------------------------------------------------
#[test]
fn criterion_2_type2_bound() {
    let started = Instant::now();
    let d = 5;
    let gap = 0.9;
    let sigma = 0.09;
    let reps = 12; // each basis direction observed 12 times: lambda_min = 12
    let noise = NoiseModel::new(sigma * sigma).unwrap();
    let upsilon = chi2_quantile(0.95, d).unwrap();
    let trials = 10_000;
    let mut rng = Xoshiro256pp::seed_from_u64(0xACCE02);
    let mut accepts = 0usize;
    for _ in 0..trials {
        // Unit-norm parameter pair at exact distance `gap`.
        let u = unit_sphere(&mut rng, d);
        let mut w = unit_sphere(&mut rng, d);
        let proj = dot(&u, &w);
        for (wi, ui) in w.iter_mut().zip(&u) {
            *wi -= proj * ui;
        }
        let wn = norm2(&w).max(1e-12);
        let c = (1.0f64 - gap * gap / 4.0).sqrt();
        let theta1: Vec<f64> = u
            .iter()
            .zip(&w)
            .map(|(&ui, &wi)| c * ui + 0.5 * gap * wi / wn)
            .collect();
        let theta2: Vec<f64> = u
            .iter()
            .zip(&w)
            .map(|(&ui, &wi)| c * ui - 0.5 * gap * wi / wn)
            .collect();
        let mut build = |theta: &[f64]| {
            let mut data = Dataset::new(d);
            for axis in 0..d {
                let mut x = vec![0.0; d];
                x[axis] = 1.0;
                for _ in 0..reps {
                    let y = dot(&x, theta) + sigma * rng.next_gaussian();
                    data.push(&x, y).unwrap();
                }
            }
            data
        };
        let d1 = build(&theta1);
        let d2 = build(&theta2);
        let (s, _) = homogeneity_statistic(&d1, &d2, &noise).unwrap();
        if s <= upsilon {
            accepts += 1;
        }
    }
    let rate = accepts as f64 / trials as f64;
    let bound = type2_bound(upsilon, d, reps as f64, reps as f64, gap, &noise).unwrap();
    let limit = bound + 0.01;
    let in_budget = started.elapsed().as_secs_f64() < 120.0;
    let pass = rate <= limit && in_budget;
    report(
        "2 (type-II bound)",
        pass,
        &format!("acceptance rate {rate:.5} <= bound {bound:.2e} + 0.01 over {trials} trials"),
        started,
    );
    assert!(rate <= limit, "empirical type-II rate {rate} above {limit}");
    assert!(in_budget, "runtime budget of 2 minutes exceeded");
}

// ---------------------------------------------------------------------------
// Criterion 3: noncentral chi-square CDF against a Monte Carlo oracle.
// ---------------------------------------------------------------------------
#[test]
fn criterion_3_noncentral_kernel() {
    let started = Instant::now();
    let cases = [(2.0f64, 1usize, 1.0f64), (5.0, 3, 2.0), (10.0, 5, 8.0)];
    let draws = 1_000_000;
    let mut rng = Xoshiro256pp::seed_from_u64(0xACCE03);
    let mut worst: f64 = 0.0;
    for &(x, df, psi) in &cases {
        let mut below = 0usize;
        for _ in 0..draws {
            let mut v = (rng.next_gaussian() + psi.sqrt()).powi(2);
            for _ in 1..df {
                v += rng.next_gaussian().powi(2);
            }
            if v <= x {
                below += 1;
            }
        }
        let mc = below as f64 / draws as f64;
        let cdf = noncentral_chi2_cdf(x, df, psi).unwrap();
        worst = worst.max((mc - cdf).abs());
    }
    let in_budget = started.elapsed().as_secs_f64() < 60.0;
    let pass = worst <= 0.005 && in_budget;
    report(
        "3 (noncentral chi-square kernel)",
        pass,
        &format!("max |MC - CDF| = {worst:.5} <= 0.005 over {draws} draws x 3 points"),
        started,
    );
    assert!(worst <= 0.005, "Monte Carlo disagreement {worst}");
    assert!(in_budget, "runtime budget of 1 minute exceeded");
}

// ---------------------------------------------------------------------------
// Criterion 4: ground-truth-oracle DyClu reproduces oracle-LinUCB exactly.
// ---------------------------------------------------------------------------
#[test]
fn criterion_4_oracle_equivalence() {
    use dyclu_core::baselines::{BaselineConfig, OracleLinUcb};
    use dyclu_core::dyclu::{DyCluConfig, DyCluLearner};
    use dyclu_core::environment::{next_step, realize_reward, STREAM_NOISE};
    use dyclu_core::{Learner, StepTruth, UserId};

    let started = Instant::now();
    let cfg = EnvConfig {
        d: 8,
        n_users: 10,
        m: 4,
        arm_pool_size: 50,
        candidate_size: 20,
        gamma: 0.9,
        sigma: 0.09,
        smin: 100,
        smax: 200,
        horizon: 10_000,
    };
    let mut all_equal = true;
    let mut checked = 0usize;
    for seed in 1..=5u64 {
        let env = generate_environment(&cfg, seed).unwrap();
        let users: Vec<UserId> = (1..=cfg.n_users).map(UserId).collect();
        let dy_cfg =
            DyCluConfig::with_default_thresholds(cfg.d, 30, 0.05, 0.01, 1.0, env.sigma2).unwrap();
        let mut dy = DyCluLearner::new_with_oracle(dy_cfg, &users).unwrap();
        let mut ol = OracleLinUcb::new(
            cfg.m,
            BaselineConfig {
                d: cfg.d,
                lambda: 1.0,
                delta: 0.05,
                sigma2: env.sigma2,
            },
        )
        .unwrap();
        let mut rng_a = Xoshiro256pp::from_stream(seed, STREAM_NOISE, 0);
        let mut rng_b = Xoshiro256pp::from_stream(seed, STREAM_NOISE, 0);
        for t in 1..=cfg.horizon {
            let step = next_step(&env, t).unwrap();
            let truth = StepTruth {
                param_index: step.true_param_index,
            };
            let a = dy.select(step.user, &step.candidates, &truth).unwrap();
            let b = ol.select(step.user, &step.candidates, &truth).unwrap();
            if a != b {
                all_equal = false;
                break;
            }
            checked += 1;
            let (ra, _): (f64, f64) = realize_reward(&env, &step, a, &mut rng_a).unwrap();
            let (rb, _): (f64, f64) = realize_reward(&env, &step, b, &mut rng_b).unwrap();
            assert_eq!(ra.to_bits(), rb.to_bits());
            dy.observe(step.user, &step.candidates[a], ra, t, &truth)
                .unwrap();
            ol.observe(step.user, &step.candidates[b], rb, t, &truth)
                .unwrap();
        }
    }
    report(
        "4 (oracle equivalence)",
        all_equal,
        &format!("{checked} steps x 5 seeds, arm indices identical"),
        started,
    );
    assert!(all_equal, "oracle DyClu diverged from oracle-LinUCB");
    assert_eq!(checked, 50_000);
}

// ---------------------------------------------------------------------------
// Shared environment-3 batch (criteria 5 and 8).
// ---------------------------------------------------------------------------
struct Env3Seed {
    final_regret: BTreeMap<String, f64>,
    dyclu_early_mean: f64,
    dyclu_late_mean: f64,
}

struct Env3Batch {
    seeds: Vec<Env3Seed>,
    elapsed_secs: f64,
}

fn env3_batch() -> &'static Env3Batch {
    static BATCH: OnceLock<Env3Batch> = OnceLock::new();
    BATCH.get_or_init(|| {
        let started = Instant::now();
        let env_cfg = env_block(10, 20, 5, 0.09, 120, 180, 5000).to_env_config();
        let names = [
            "dyclu",
            "linucb-ind",
            "oracle-linucb",
            "dlinucb-restart",
            "club",
        ];
        let mut seeds = Vec::new();
        for seed in 1..=10u64 {
            let mut final_regret = BTreeMap::new();
            let mut dyclu_early = 0.0;
            let mut dyclu_late = 0.0;
            for name in names {
                let records = run_learner(&learner_block(name), &env_cfg, seed);
                final_regret.insert(name.to_string(), records.last().unwrap().cumulative_regret);
                if name == "dyclu" {
                    let k = records.len() / 10;
                    dyclu_early = records[..k]
                        .iter()
                        .map(|r| r.instantaneous_regret)
                        .sum::<f64>()
                        / k as f64;
                    dyclu_late = records[records.len() - k..]
                        .iter()
                        .map(|r| r.instantaneous_regret)
                        .sum::<f64>()
                        / k as f64;
                }
            }
            seeds.push(Env3Seed {
                final_regret,
                dyclu_early_mean: dyclu_early,
                dyclu_late_mean: dyclu_late,
            });
        }
        Env3Batch {
            seeds,
            elapsed_secs: started.elapsed().as_secs_f64(),
        }
    })
}

// ---------------------------------------------------------------------------
// Criterion 5: qualitative regret orderings at desk scale.
// ---------------------------------------------------------------------------
#[test]
fn criterion_5_qualitative_orderings() {
    let started = Instant::now();
    let batch = env3_batch();
    let mut env3_ok = 0usize;
    for s in &batch.seeds {
        let r = &s.final_regret;
        let others = r["dlinucb-restart"].min(r["linucb-ind"]).min(r["club"]);
        if r["oracle-linucb"] < r["dyclu"] && r["dyclu"] < others {
            env3_ok += 1;
        }
    }

    // Environment-1 analogue: no changes, shared parameters.
    let env1_cfg = env_block(10, 20, 5, 0.09, 250, 250, 5000).to_env_config();
    let mut env1_ok = 0usize;
    for seed in 1..=10u64 {
        let dy = run_learner(&learner_block("dyclu"), &env1_cfg, seed)
            .last()
            .unwrap()
            .cumulative_regret;
        let club = run_learner(&learner_block("club"), &env1_cfg, seed)
            .last()
            .unwrap()
            .cumulative_regret;
        if dy <= 1.2 * club {
            env1_ok += 1;
        }
    }
    let total_secs = batch.elapsed_secs + started.elapsed().as_secs_f64();
    let in_budget = total_secs < 600.0;
    let pass = env3_ok >= 8 && env1_ok >= 8 && in_budget;
    report(
        "5 (qualitative orderings)",
        pass,
        &format!(
            "env-3 ordering {env3_ok}/10 seeds, env-1 dyclu <= 1.2x club {env1_ok}/10 seeds, {total_secs:.0}s total"
        ),
        started,
    );
    assert!(
        env3_ok >= 8,
        "env-3 ordering held on only {env3_ok}/10 seeds"
    );
    assert!(
        env1_ok >= 8,
        "env-1 comparison held on only {env1_ok}/10 seeds"
    );
    assert!(in_budget, "runtime budget of 10 minutes exceeded");
}

// ---------------------------------------------------------------------------
// Criterion 6: nonstationarity harms plain per-user LinUCB.
// ---------------------------------------------------------------------------
#[test]
fn criterion_6_nonstationarity_harm() {
    let started = Instant::now();
    // One change per user at mid-horizon, no parameter sharing to speak of.
    let mut block = env_block(10, 20, 40, 0.05, 125, 125, 5000);
    block.gamma = 0.9;
    let env_cfg = block.to_env_config();
    let mut ok = 0usize;
    let mut ratios = Vec::new();
    for seed in 1..=10u64 {
        let slope = |records: &[RunRecord]| {
            let t = records.len();
            let start = 4 * t / 5;
            (records[t - 1].cumulative_regret - records[start - 1].cumulative_regret)
                / (t - start) as f64
        };
        let dy = run_learner(&learner_block("dyclu"), &env_cfg, seed);
        let lin = run_learner(&learner_block("linucb-ind"), &env_cfg, seed);
        let ratio = slope(&lin) / slope(&dy).max(1e-12);
        ratios.push(ratio);
        if ratio > 5.0 {
            ok += 1;
        }
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = ok >= 8;
    report(
        "6 (nonstationarity harm)",
        pass,
        &format!("final-20% slope ratio > 5 on {ok}/10 seeds (min ratio {min_ratio:.1})"),
        started,
    );
    assert!(ok >= 8, "slope ratio exceeded 5 on only {ok}/10 seeds");
}

// ---------------------------------------------------------------------------
// Criterion 7: detection quality under large, crisp changes.
// ---------------------------------------------------------------------------
#[test]
fn criterion_7_detection_behavior() {
    let started = Instant::now();
    let n_users = 8usize;
    let tau = 30usize;
    let window = 3 * tau; // detection credited within 3 tau user-local steps
    let env_cfg = env_block(10, n_users, 4, 0.05, 100, 160, 3200).to_env_config();
    let mut total_changes = 0usize;
    let mut total_detected = 0usize;
    let mut total_false = 0usize;
    let mut total_periods = 0usize;
    for seed in 1..=10u64 {
        let env = generate_environment(&env_cfg, seed).unwrap();
        let records = run_learner(&learner_block("dyclu"), &env_cfg, seed);
        for u in 1..=n_users {
            let user = dyclu_core::UserId(u);
            let changes = env.change_points(user);
            total_changes += changes.len();
            total_periods += changes.len() + 1;
            let detections: Vec<usize> = records
                .iter()
                .filter(|r| r.change_detected && r.user == user)
                .map(|r| (r.t - 1) / n_users + 1)
                .collect();
            let mut credited = vec![false; changes.len()];
            for &dloc in &detections {
                let mut hit = false;
                for (i, &c) in changes.iter().enumerate() {
                    if !credited[i] && c <= dloc && dloc < c + window {
                        credited[i] = true;
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    total_false += 1;
                }
            }
            total_detected += credited.iter().filter(|&&c| c).count();
        }
    }
    let detection_rate = total_detected as f64 / total_changes as f64;
    let false_per_period = total_false as f64 / total_periods as f64;
    let pass = detection_rate >= 0.9 && false_per_period < 0.2;
    report(
        "7 (detection behavior)",
        pass,
        &format!(
            "{total_detected}/{total_changes} changes within 3*tau ({detection_rate:.3}), {false_per_period:.3} false detections per period"
        ),
        started,
    );
    assert!(
        detection_rate >= 0.9,
        "detected only {detection_rate:.3} of changes within 3 tau"
    );
    assert!(
        false_per_period < 0.2,
        "false detections per period {false_per_period:.3} >= 0.2"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: empirical sublinearity of the per-step regret.
// ---------------------------------------------------------------------------
#[test]
fn criterion_8_sublinearity() {
    let started = Instant::now();
    let batch = env3_batch();
    let mut ok = 0usize;
    let mut worst: f64 = 0.0;
    for s in &batch.seeds {
        let ratio = s.dyclu_late_mean / s.dyclu_early_mean.max(1e-12);
        worst = worst.max(ratio);
        if ratio < 0.25 {
            ok += 1;
        }
    }
    let pass = ok >= 8;
    report(
        "8 (sublinearity)",
        pass,
        &format!("final-10% per-step regret < 25% of first-10% on {ok}/10 seeds (worst ratio {worst:.3})"),
        started,
    );
    assert!(ok >= 8, "sublinearity held on only {ok}/10 seeds");
}

// ---------------------------------------------------------------------------
// Criterion 9: property suites (heavy invariants re-run here; the rest of
// the workspace test suite covers the module-level properties).
// ---------------------------------------------------------------------------
#[test]
fn criterion_9_property_suites() {
    let started = Instant::now();
    let mut failures: Vec<String> = Vec::new();

    // Moore-Penrose identities on random 50x50 matrices of varying rank.
    {
        let mut rng = Xoshiro256pp::seed_from_u64(0xACCE09);
        let tol = RankTolerance::default();
        for &rank in &[10usize, 25, 50] {
            let gauss = |rng: &mut Xoshiro256pp, r: usize, c: usize| {
                let mut m = Matrix::zeros(r, c);
                for i in 0..r {
                    for j in 0..c {
                        m[(i, j)] = rng.next_gaussian();
                    }
                }
                m
            };
            let m = if rank >= 50 {
                gauss(&mut rng, 50, 50)
            } else {
                gauss(&mut rng, 50, rank).matmul(&gauss(&mut rng, rank, 50))
            };
            let p = pseudo_inverse(&m, tol).unwrap();
            let mp = m.matmul(&p);
            let pm = p.matmul(&m);
            let checks = [
                (m.matmul(&pm), &m, "M P M = M"),
                (p.matmul(&mp), &p, "P M P = P"),
                (mp.transpose(), &mp, "(M P)' = M P"),
                (pm.transpose(), &pm, "(P M)' = P M"),
            ];
            for (got, want, what) in checks {
                let scale = want.max_abs().max(1.0);
                let mut worst = 0.0f64;
                for i in 0..got.rows() {
                    for j in 0..got.cols() {
                        worst = worst.max((got[(i, j)] - want[(i, j)]).abs());
                    }
                }
                if worst > 1e-8 * scale {
                    failures.push(format!("pseudo-inverse identity {what} off by {worst:.2e}"));
                }
            }
        }
    }

    // Statistic symmetry and nonnegativity (exact, 500 random pairs).
    {
        let mut rng = Xoshiro256pp::seed_from_u64(0xACCE10);
        let noise = NoiseModel::new(1.0).unwrap();
        for _ in 0..500 {
            let d = 3;
            let th1 = unit_sphere(&mut rng, d);
            let th2 = unit_sphere(&mut rng, d);
            let build = |rng: &mut Xoshiro256pp, theta: &[f64], t: usize| {
                let mut data = Dataset::new(d);
                for _ in 0..t {
                    let x = unit_sphere(rng, d);
                    data.push(&x, dot(&x, theta) + rng.next_gaussian()).unwrap();
                }
                data
            };
            let ta = 1 + (rng.next_below(6) as usize);
            let tb = 1 + (rng.next_below(6) as usize);
            let a = build(&mut rng, &th1, ta);
            let b = build(&mut rng, &th2, tb);
            let (s_ab, df_ab) = homogeneity_statistic(&a, &b, &noise).unwrap();
            let (s_ba, df_ba) = homogeneity_statistic(&b, &a, &noise).unwrap();
            if s_ab.to_bits() != s_ba.to_bits() || df_ab != df_ba || s_ab < 0.0 {
                failures.push("statistic symmetry/nonnegativity violated".to_string());
                break;
            }
        }
    }

    // Chi-square calibration: KS distance over 1e5 homogeneous draws.
    {
        let mut rng = Xoshiro256pp::seed_from_u64(0xACCE11);
        let d = 5;
        let sigma = 0.1;
        let noise = NoiseModel::new(sigma * sigma).unwrap();
        let n = 100_000;
        let mut stats = Vec::with_capacity(n);
        for _ in 0..n {
            let theta = unit_sphere(&mut rng, d);
            let mut build = || {
                let mut data = Dataset::new(d);
                for _ in 0..20 {
                    let x = unit_sphere(&mut rng, d);
                    data.push(&x, dot(&x, &theta) + sigma * rng.next_gaussian())
                        .unwrap();
                }
                data
            };
            let (s, df) = homogeneity_statistic(&build(), &build(), &noise).unwrap();
            debug_assert_eq!(df, d);
            stats.push(s);
        }
        stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, &s) in stats.iter().enumerate() {
            let f = central_chi2_cdf(s, d).unwrap();
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max((f - (i + 1) as f64 / n as f64).abs());
        }
        if ks >= 0.01 {
            failures.push(format!("KS distance vs central chi-square: {ks:.4}"));
        }
    }

    // Determinism: identical experiment runs produce byte-identical CSVs,
    // and the portable generator matches its frozen reference draw.
    {
        let mut rng = Xoshiro256pp::seed_from_u64(42);
        if rng.next_u64() != 15021278609987233951 {
            failures.push("portable RNG reference output changed".to_string());
        }
        let base = std::env::temp_dir().join(format!("dyclu-accept-{}", std::process::id()));
        let cfg_json = |dir: &std::path::Path| {
            format!(
                r#"{{
  "environment": {{
    "d": 4, "n_users": 4, "m": 2, "arm_pool_size": 20, "candidate_size": 8,
    "gamma": 0.9, "sigma": 0.09, "smin": 40, "smax": 60, "horizon": 400
  }},
  "learners": [{{"name": "dyclu", "tau": 20}}, {{"name": "linucb-ind"}}],
  "seeds": [1, 2],
  "output_dir": "{}"
}}"#,
                dir.display()
            )
        };
        let run_into = |dir: &std::path::Path| {
            let cfg: dyclu_cli::config::ExperimentConfig =
                serde_json::from_str(&cfg_json(dir)).unwrap();
            run_experiment(&cfg).unwrap();
        };
        let dir_a = base.join("a");
        let dir_b = base.join("b");
        run_into(&dir_a);
        run_into(&dir_b);
        // CSVs are the determinism contract; summaries additionally carry
        // wall-clock measurements.
        for name in [
            "dyclu_seed1.csv",
            "dyclu_seed2.csv",
            "linucb-ind_seed1.csv",
            "linucb-ind_seed2.csv",
        ] {
            let a = std::fs::read(dir_a.join(name)).unwrap();
            let b = std::fs::read(dir_b.join(name)).unwrap();
            if a != b {
                failures.push(format!(
                    "run artifacts differ between identical runs: {name}"
                ));
            }
        }
        let _ = std::fs::remove_dir_all(&base);
    }

    let pass = failures.is_empty();
    report(
        "9 (property suites)",
        pass,
        if pass {
            "pseudo-inverse identities, symmetry, KS calibration, determinism golden hashes"
        } else {
            &failures[0]
        },
        started,
    );
    assert!(pass, "property failures: {failures:?}");
}
