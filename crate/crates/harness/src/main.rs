//! `dyclu` command line: run experiments, inspect generated environments,
//! evaluate replay logs, and rebuild summaries.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use dyclu_cli::config::parse_configs;
use dyclu_cli::replay_eval::evaluate_replay;
use dyclu_cli::runner::run_experiment;
use dyclu_cli::summary::summarize_dir;
use dyclu_cli::EnvSpecJson;
use dyclu_core::environment::{generate_environment, load_replay};
use dyclu_core::{Error, Result};

const USAGE: &str = "dyclu — piecewise-stationary clustered bandit simulator

USAGE:
    dyclu run <config.json> [--seed S]     run every (learner, seed) pair
    dyclu gen-env <config.json> --seed S   print the generated environment
    dyclu replay <log.csv> <config.json>   offline evaluation on a log
    dyclu summarize <dir>                  rebuild summary.json from CSVs

Exit codes: 0 success, 1 configuration/parse error, 2 internal error.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::from(0),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_)
                | Error::Parse { .. }
                | Error::Unsupported(_)
                | Error::Io { .. }
                | Error::InvalidWindow
                | Error::InvalidProbability => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return Err(Error::Config("missing subcommand".into()));
    };
    match cmd.as_str() {
        "run" => cmd_run(&args[1..]),
        "gen-env" => cmd_gen_env(&args[1..]),
        "replay" => cmd_replay(&args[1..]),
        "summarize" => cmd_summarize(&args[1..]),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => {
            eprintln!("{USAGE}");
            Err(Error::Config(format!("unknown subcommand `{other}`")))
        }
    }
}

fn read_config_text(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_string(),
        msg: e.to_string(),
    })
}

/// Parse a `--seed S` override anywhere in the argument tail.
fn take_seed(args: &[String]) -> Result<(Vec<String>, Option<u64>)> {
    let mut rest = Vec::new();
    let mut seed = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--seed" {
            let v = args
                .get(i + 1)
                .ok_or_else(|| Error::Config("--seed requires a value".into()))?;
            seed =
                Some(v.parse::<u64>().map_err(|_| {
                    Error::Config(format!("--seed: `{v}` is not an unsigned integer"))
                })?);
            i += 2;
        } else {
            rest.push(args[i].clone());
            i += 1;
        }
    }
    Ok((rest, seed))
}

fn cmd_run(args: &[String]) -> Result<()> {
    let (rest, seed_override) = take_seed(args)?;
    let [path] = rest.as_slice() else {
        return Err(Error::Config(
            "usage: dyclu run <config.json> [--seed S]".into(),
        ));
    };
    let text = read_config_text(path)?;
    let mut configs = parse_configs(&text)?;
    if let Some(seed) = seed_override {
        for cfg in &mut configs {
            cfg.seeds = vec![seed];
        }
    }
    let multi = configs.len() > 1;
    for (i, mut cfg) in configs.into_iter().enumerate() {
        if multi {
            cfg.output_dir = format!("{}/row{}", cfg.output_dir.trim_end_matches('/'), i + 1);
        }
        let report = run_experiment(&cfg)?;
        println!("wrote {}/summary.json", cfg.output_dir);
        for agg in &report.by_learner {
            println!(
                "  {:<16} runs {:>3}  regret {:>10.2} +- {:.2}",
                agg.learner, agg.runs, agg.mean_regret, agg.std_regret
            );
        }
    }
    Ok(())
}

fn cmd_gen_env(args: &[String]) -> Result<()> {
    let (rest, seed) = take_seed(args)?;
    let [path] = rest.as_slice() else {
        return Err(Error::Config(
            "usage: dyclu gen-env <config.json> --seed S".into(),
        ));
    };
    let seed = seed.ok_or_else(|| Error::Config("gen-env requires --seed S".into()))?;
    let text = read_config_text(path)?;
    let configs = parse_configs(&text)?;
    let cfg = configs
        .first()
        .ok_or_else(|| Error::Config("empty config".into()))?;
    let env = generate_environment(&cfg.environment.to_env_config(), seed)?;
    let json = serde_json::to_string_pretty(&EnvSpecJson::from_spec(&env))
        .map_err(|e| Error::Internal(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn cmd_replay(args: &[String]) -> Result<()> {
    let [log, config] = args else {
        return Err(Error::Config(
            "usage: dyclu replay <log.csv> <config.json>".into(),
        ));
    };
    let rows = load_replay::<f64>(Path::new(log))?;
    let text = read_config_text(config)?;
    let configs = parse_configs(&text)?;
    let cfg = configs
        .first()
        .ok_or_else(|| Error::Config("empty config".into()))?;
    let summaries = evaluate_replay(cfg, &rows)?;
    let json =
        serde_json::to_string_pretty(&summaries).map_err(|e| Error::Internal(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn cmd_summarize(args: &[String]) -> Result<()> {
    let [dir] = args else {
        return Err(Error::Config("usage: dyclu summarize <dir>".into()));
    };
    let report = summarize_dir(Path::new(dir))?;
    report.write(Path::new(dir))?;
    println!("{}", report.to_json());
    Ok(())
}
