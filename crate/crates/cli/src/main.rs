use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wbpc_core::harness::{self, ScenarioConfig, WbLength};
use wbpc_core::solver::StepReport;
use wbpc_core::Error;

#[derive(Parser)]
#[command(name = "wbpc", version, about = "Well-balanced path-conservative finite volume solvers")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run a scenario and write CSV snapshots.
    Run(Common),
    /// Empirical convergence study over successive mesh doublings.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        refinements: usize,
    },
    /// Start from the discrete stationary solution and report the drift.
    WbCheck {
        #[command(flatten)]
        common: Common,
        /// Number of steps; defaults to running until the final time.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Single-threaded timings against L2 errors.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        refinements: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario: burgers-steady, s1, s2 or s3.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_parser = ["2", "3"])]
    order: Option<String>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    wb: Option<Switch>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Log every n-th step on stderr (0 disables step events).
    #[arg(long, default_value_t = 0)]
    log_every: usize,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => ScenarioConfig::load(path)?,
            (None, Some(name)) => ScenarioConfig::preset(name)?,
            (None, None) => return Err(Error::Usage("either --config or --scenario is required".into())),
        };
        if let Some(order) = &self.order {
            cfg.model.order = order.parse().map_err(|_| Error::Usage(format!("invalid order {order}")))?;
        }
        if let Some(cells) = self.cells {
            cfg.grid.cells = cells;
        }
        if let Some(wb) = self.wb {
            cfg.model.well_balanced = matches!(wb, Switch::On);
        }
        if let Some(out) = &self.out {
            cfg.output.dir = std::env::current_dir()?.join(out);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn log(value: serde_json::Value) {
    eprintln!("{value}");
}

fn step_event(r: &StepReport) -> serde_json::Value {
    json!({
        "event": "step",
        "step": r.step,
        "time": r.time,
        "dt": r.dt,
        "nu": r.nu,
        "newton": r.max_newton_iterations,
        "fallbacks": r.fallbacks,
        "max_deviation": r.max_deviation,
    })
}

fn output_file(cfg: &ScenarioConfig, name: &str) -> Result<(PathBuf, File), Error> {
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, file))
}

fn wb_tag(on: bool) -> &'static str {
    if on {
        "wb"
    } else {
        "nowb"
    }
}

fn execute(verb: &Verb) -> Result<(), Error> {
    let common = match verb {
        Verb::Run(c) => c,
        Verb::Converge { common, .. } | Verb::WbCheck { common, .. } | Verb::Bench { common, .. } => common,
    };
    let cfg = common.load()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.max(1))
        .build_global()
        .map_err(|e| Error::Usage(e.to_string()))?;
    log(json!({
        "event": "start",
        "scenario": cfg.model.scenario,
        "order": cfg.model.order,
        "well_balanced": cfg.model.well_balanced,
        "cells": cfg.grid.cells,
        "t_final": cfg.time.t_final,
    }));
    match verb {
        Verb::Run(c) => {
            let every = c.log_every;
            let out = harness::run(&cfg, &mut |r| {
                if every > 0 && r.step % every == 0 {
                    log(step_event(r));
                }
            })?;
            let s = &out.summary;
            log(json!({
                "event": "done",
                "steps": s.steps,
                "time": s.time,
                "seconds": s.seconds,
                "max_newton_iterations": s.max_newton_iterations,
                "fallbacks": s.fallbacks,
            }));
            for path in &out.snapshots {
                println!("{}", path.display());
            }
        }
        Verb::Converge { refinements, .. } => {
            let report = harness::converge(&cfg, *refinements)?;
            let name = format!("{}_converge_o{}_{}.csv", cfg.model.scenario, cfg.model.order, wb_tag(cfg.model.well_balanced));
            let (path, file) = output_file(&cfg, &name)?;
            report.write_csv(file)?;
            report.write_csv(std::io::stdout().lock())?;
            log(json!({"event": "done", "report": path}));
        }
        Verb::WbCheck { steps, .. } => {
            let length = steps.map_or(WbLength::Until(cfg.time.t_final), WbLength::Steps);
            let report = harness::wb_check(&cfg, length)?;
            println!("variable,drift");
            for (v, d) in report.variables.iter().zip(&report.drift) {
                println!("{v},{}", harness::fmt_float(*d));
            }
            log(json!({"event": "done", "steps": report.steps, "time": report.time}));
        }
        Verb::Bench { refinements, .. } => {
            let switches = match common.wb {
                Some(wb) => vec![matches!(wb, Switch::On)],
                None => vec![true, false],
            };
            let mut cfgs = Vec::new();
            for &on in &switches {
                for r in 0..*refinements {
                    let mut c = cfg.clone();
                    c.model.well_balanced = on;
                    c.grid.cells = cfg.grid.cells << r;
                    cfgs.push(c);
                }
            }
            let rows = harness::bench(&cfgs)?;
            let name = format!("{}_bench_o{}.csv", cfg.model.scenario, cfg.model.order);
            let (path, file) = output_file(&cfg, &name)?;
            harness::write_bench_csv(&rows, file)?;
            harness::write_bench_csv(&rows, std::io::stdout().lock())?;
            log(json!({"event": "done", "report": path}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_config() { 2 } else { 3 };
            log(json!({"event": "error", "kind": kind(&e), "message": e.to_string(), "exit_code": code}));
            ExitCode::from(code)
        }
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Sonic { .. } => "sonic",
        Error::Newton { .. } => "newton",
        Error::Regime { .. } => "regime",
        Error::Predictor { .. } => "predictor",
        Error::Step { .. } => "step",
        Error::Config(_) => "config",
        Error::Usage(_) => "usage",
        Error::Io(_) => "io",
    }
}
