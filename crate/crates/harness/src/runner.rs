//! Experiment execution: per-(learner, seed) simulation runs, one CSV of
//! per-step records each, plus a JSON summary. Runs are independent and
//! execute on a small worker pool (`DYCLU_THREADS` caps it); outputs are
//! byte-identical across repeat invocations.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use dyclu_core::environment::{
    generate_environment, next_step, realize_reward, EnvSpec, RunRecord, STREAM_NOISE,
};
use dyclu_core::rng::Xoshiro256pp;
use dyclu_core::{Error, Learner, Result, StepTruth};

use crate::config::{build_learner, ExperimentConfig, LearnerEnv};
use crate::summary::{RunSummary, SummaryReport};

pub const CSV_HEADER: &str =
    "t,user,algorithm,chosen_index,reward,inst_regret,cum_regret,discarded,change_detected,model_updated,neighborhood_size";

/// Drive one learner across the environment horizon.
pub fn run_single(
    env: &EnvSpec<f64>,
    learner: &mut dyn Learner<f64>,
    algorithm: &str,
) -> Result<Vec<RunRecord>> {
    let mut noise_rng = Xoshiro256pp::from_stream(env.seed, STREAM_NOISE, 0);
    let mut records = Vec::with_capacity(env.horizon);
    let mut cum = 0.0;
    for t in 1..=env.horizon {
        let step = next_step(env, t)?;
        let truth = StepTruth {
            param_index: step.true_param_index,
        };
        let chosen = learner.select(step.user, &step.candidates, &truth)?;
        let (reward, inst) = realize_reward(env, &step, chosen, &mut noise_rng)?;
        let event = learner.observe(step.user, &step.candidates[chosen], reward, t, &truth)?;
        cum += inst;
        records.push(RunRecord {
            t,
            user: step.user,
            algorithm: algorithm.to_string(),
            chosen_index: chosen,
            reward,
            instantaneous_regret: inst,
            cumulative_regret: cum,
            discarded: event.observation_discarded,
            change_detected: event.change_detected,
            model_updated: event.model_updated,
            neighborhood_size: event.neighborhood_size,
        });
    }
    Ok(records)
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.user,
            r.algorithm,
            r.chosen_index,
            r.reward,
            r.instantaneous_regret,
            r.cumulative_regret,
            r.discarded as u8,
            r.change_detected as u8,
            r.model_updated as u8,
            r.neighborhood_size
        ));
    }
    out
}

pub fn summarize_records(records: &[RunRecord]) -> (f64, usize, f64) {
    let final_regret = records.last().map(|r| r.cumulative_regret).unwrap_or(0.0);
    let detections = records.iter().filter(|r| r.change_detected).count();
    let mean_neighborhood = if records.is_empty() {
        0.0
    } else {
        records
            .iter()
            .map(|r| r.neighborhood_size as f64)
            .sum::<f64>()
            / records.len() as f64
    };
    (final_regret, detections, mean_neighborhood)
}

pub fn csv_path(dir: &Path, learner: &str, seed: u64) -> PathBuf {
    dir.join(format!("{learner}_seed{seed}.csv"))
}

fn worker_count(jobs: usize) -> usize {
    let default = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let configured = std::env::var("DYCLU_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(default);
    configured.min(jobs).max(1)
}

/// Run every (learner, seed) pair of the experiment, writing one CSV per
/// run and `summary.json` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SummaryReport> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        msg: e.to_string(),
    })?;

    struct Job {
        index: usize,
        learner_index: usize,
        seed: u64,
    }
    let mut jobs = VecDeque::new();
    let mut index = 0;
    for (learner_index, _) in cfg.learners.iter().enumerate() {
        for &seed in &cfg.seeds {
            jobs.push_back(Job {
                index,
                learner_index,
                seed,
            });
            index += 1;
        }
    }
    let total = jobs.len();
    let queue = Mutex::new(jobs);
    let results: Mutex<Vec<Option<Result<RunSummary>>>> = Mutex::new(vec![None; total]);

    let workers = worker_count(total);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = match queue.lock().expect("queue lock").pop_front() {
                    Some(j) => j,
                    None => break,
                };
                let outcome = (|| -> Result<RunSummary> {
                    let block = &cfg.learners[job.learner_index];
                    let env = generate_environment(&cfg.environment.to_env_config(), job.seed)?;
                    let mut learner = build_learner(block, &LearnerEnv::from_spec(&env))?;
                    let started = Instant::now();
                    let records = run_single(&env, learner.as_mut(), &block.name)?;
                    let wall_ms = started.elapsed().as_millis() as u64;
                    let csv = records_to_csv(&records);
                    let path = csv_path(&out_dir, &block.name, job.seed);
                    fs::write(&path, csv).map_err(|e| Error::Io {
                        path: path.display().to_string(),
                        msg: e.to_string(),
                    })?;
                    let (final_regret, detections, mean_neighborhood) = summarize_records(&records);
                    Ok(RunSummary {
                        learner: block.name.clone(),
                        seed: job.seed,
                        final_regret,
                        detections,
                        mean_neighborhood,
                        wall_ms,
                    })
                })();
                results.lock().expect("results lock")[job.index] = Some(outcome);
            });
        }
    });

    let collected = results.into_inner().expect("results lock");
    let mut runs = Vec::with_capacity(total);
    for slot in collected {
        match slot {
            Some(Ok(summary)) => runs.push(summary),
            Some(Err(e)) => return Err(e),
            None => return Err(Error::Internal("worker dropped a job".into())),
        }
    }
    let report = SummaryReport::from_runs(runs);
    report.write(&out_dir)?;
    Ok(report)
}
