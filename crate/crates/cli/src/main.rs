//! Batch front-end. One subcommand per experiment family; all activity is
//! driven by a sectioned key-value config file, every value of which can be
//! overridden by a flag of the same dotted name:
//!
//! ```text
//! repulsion green --config model.cfg --grid.l 32 --out results/
//! ```
//!
//! Exit codes: 0 success, 2 unconverged, 1 error.

mod commands;
mod config;
mod svg;

use commands::{Ctx, Outcome};
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
usage: repulsion <command> [--config FILE] [--seed N] [--workers N] [--out DIR]
                 [--plot] [--<section>.<key> VALUE ...]

commands:
  validate     check the model requirements (dimension bound, symbol positivity)
  green        Green's function tables and the decay-constant ratio table
  sample       exact field draws and empirical covariances vs the Green table
  conditional  conditional-variance curve G_L and the screening residual
  capacity     obstacle and kernel capacity routes with extrapolation
  repulsion    hard-wall probabilities and the normalized rate table
  height       conditioned block heights from hard-wall chains
  check-c      entrywise positivity scan of the inverse precision operator
  print-config write a starter config file to the output directory

environment: REPULSION_OUT overrides the output directory,
             REPULSION_WORKERS the worker count.
";

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Unconverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<Outcome, Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{USAGE}");
        return Ok(Outcome::Success);
    }
    let command = args[0].as_str();
    let mut config_path: Option<String> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut out_dir: Option<String> = std::env::var("REPULSION_OUT").ok();
    let mut workers: Option<usize> = std::env::var("REPULSION_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut plot = false;

    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let Some(name) = arg.strip_prefix("--") else {
            return Err(format!("unexpected argument `{arg}` (flags start with --)").into());
        };
        let take_value = |i: &mut usize| -> Result<String, String> {
            if let Some((_, v)) = arg.split_once('=') {
                return Ok(v.to_string());
            }
            *i += 1;
            args.get(*i)
                .cloned()
                .ok_or_else(|| format!("flag --{name} needs a value"))
        };
        let bare = name.split('=').next().unwrap();
        match bare {
            "plot" => plot = true,
            "config" => config_path = Some(take_value(&mut i)?),
            "out" => out_dir = Some(take_value(&mut i)?),
            "seed" => overrides.push(("run.seed".into(), take_value(&mut i)?)),
            "workers" => {
                workers = Some(
                    take_value(&mut i)?
                        .parse()
                        .map_err(|_| "--workers: expected integer")?,
                )
            }
            dotted => {
                let value = take_value(&mut i)?;
                overrides.push((dotted.to_string(), value));
            }
        }
        i += 1;
    }

    let mut cfg = match &config_path {
        Some(p) => Config::parse_file(p)?,
        None => Config::default(),
    };
    for (key, value) in &overrides {
        cfg.set(key, value)?;
    }
    // resolve the universal sections so output headers carry them even when
    // they came from defaults
    let model = cfg.model()?;
    let grid = cfg.grid(model.d)?;
    let seed = cfg.seed()?;
    cfg.set("model.d", &model.d.to_string())?;
    cfg.set("model.k", &model.q.min_degree().to_string())?;
    cfg.set(
        "model.q",
        &model
            .q
            .coeffs()
            .iter()
            .map(|c| format!("{c:?}"))
            .collect::<Vec<_>>()
            .join(","),
    )?;
    cfg.set("grid.l", &grid.l.to_string())?;
    cfg.set("grid.eps", &format!("{:?}", grid.eps))?;
    cfg.set("run.seed", &seed.to_string())?;
    if let Some(dir) = cfg.get("output.dir") {
        let dir = dir.to_string();
        if out_dir.is_none() {
            out_dir = Some(dir);
        }
    }
    let out_dir = PathBuf::from(out_dir.unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out_dir)?;

    let workers = workers.unwrap_or(cfg.usize_or("run.workers", 0)?);
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }
    let plot = plot || cfg.bool_or("output.plot", false)?;

    let run_cmd = |name: &'static str,
                   f: fn(&Ctx) -> Result<Outcome, Box<dyn std::error::Error>>|
     -> Result<Outcome, Box<dyn std::error::Error>> {
        let ctx = Ctx::new(cfg.clone(), out_dir.clone(), plot, name);
        f(&ctx)
    };

    match command {
        "validate" => run_cmd("validate", commands::run_validate),
        "green" => run_cmd("green", commands::run_green),
        "sample" => run_cmd("sample", commands::run_sample),
        "conditional" => run_cmd("conditional", commands::run_conditional),
        "capacity" => run_cmd("capacity", commands::run_capacity),
        "repulsion" => run_cmd("repulsion", commands::run_repulsion),
        "height" => run_cmd("height", commands::run_height),
        "check-c" => run_cmd("check-c", commands::run_check_c),
        "print-config" => {
            let path = out_dir.join("example.cfg");
            commands::write_example_config(&path)?;
            println!("wrote {}", path.display());
            Ok(Outcome::Success)
        }
        other => Err(format!("unknown command `{other}`\n{USAGE}").into()),
    }
}
