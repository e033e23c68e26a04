//! Run summaries: per-(learner, seed) aggregates plus per-learner
//! mean/std over seeds, written as `summary.json` and rebuildable from the
//! per-run CSVs alone.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dyclu_core::{Error, Result};

use crate::runner::CSV_HEADER;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub learner: String,
    pub seed: u64,
    pub final_regret: f64,
    pub detections: usize,
    pub mean_neighborhood: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerAggregate {
    pub learner: String,
    pub runs: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub runs: Vec<RunSummary>,
    pub by_learner: Vec<LearnerAggregate>,
}

impl SummaryReport {
    /// Canonical ordering (learner, seed) so repeat runs and `summarize`
    /// produce identical bytes.
    pub fn from_runs(mut runs: Vec<RunSummary>) -> Self {
        runs.sort_by(|a, b| a.learner.cmp(&b.learner).then(a.seed.cmp(&b.seed)));
        let mut by_learner: Vec<LearnerAggregate> = Vec::new();
        let mut i = 0;
        while i < runs.len() {
            let name = runs[i].learner.clone();
            let group: Vec<f64> = runs[i..]
                .iter()
                .take_while(|r| r.learner == name)
                .map(|r| r.final_regret)
                .collect();
            let n = group.len();
            let mean = group.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (group.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            by_learner.push(LearnerAggregate {
                learner: name,
                runs: n,
                mean_regret: mean,
                std_regret: std,
            });
            i += n;
        }
        Self { runs, by_learner }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialization")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("summary.json");
        fs::write(&path, self.to_json()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("summary.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("summary.json: {e}"),
        })
    }
}

/// Rebuild the summary from the per-run CSVs in `dir`. Wall-clock times are
/// not recomputable from records, so they carry over from an existing
/// `summary.json` when present (0 otherwise).
pub fn summarize_dir(dir: &Path) -> Result<SummaryReport> {
    let previous = SummaryReport::load(dir).ok();
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        msg: e.to_string(),
    })?;
    let mut runs = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io {
            path: dir.display().to_string(),
            msg: e.to_string(),
        })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".csv") && name.contains("_seed") {
            names.push(name);
        }
    }
    names.sort();
    for name in names {
        let stem = name.trim_end_matches(".csv");
        let Some((learner, seed_str)) = stem.rsplit_once("_seed") else {
            continue;
        };
        let Ok(seed) = seed_str.parse::<u64>() else {
            continue;
        };
        let path = dir.join(&name);
        let text = fs::read_to_string(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let (final_regret, detections, mean_neighborhood) = summarize_csv(&text, &name)?;
        let wall_ms = previous
            .as_ref()
            .and_then(|p| {
                p.runs
                    .iter()
                    .find(|r| r.learner == learner && r.seed == seed)
                    .map(|r| r.wall_ms)
            })
            .unwrap_or(0);
        runs.push(RunSummary {
            learner: learner.to_string(),
            seed,
            final_regret,
            detections,
            mean_neighborhood,
            wall_ms,
        });
    }
    Ok(SummaryReport::from_runs(runs))
}

fn summarize_csv(text: &str, name: &str) -> Result<(f64, usize, f64)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("{name}: unexpected CSV header"),
            })
        }
    }
    let mut final_regret = 0.0;
    let mut detections = 0usize;
    let mut nb_sum = 0.0f64;
    let mut rows = 0usize;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("{name}: expected 11 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: i + 2,
            msg: format!("{name}: bad {what}"),
        };
        final_regret = fields[6].parse::<f64>().map_err(|_| bad("cum_regret"))?;
        if fields[8] == "1" {
            detections += 1;
        }
        nb_sum += fields[10]
            .parse::<f64>()
            .map_err(|_| bad("neighborhood_size"))?;
        rows += 1;
    }
    let mean_nb = if rows == 0 { 0.0 } else { nb_sum / rows as f64 };
    Ok((final_regret, detections, mean_nb))
}
