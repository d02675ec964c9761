//! Scenario runs, convergence studies, well-balance checks and timings.

pub mod case;
pub mod config;
pub mod norms;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bfe::BfeModel;
use crate::burgers::Burgers;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::Order;
use crate::solver::{Boundary, Solver, SolverOptions, StepReport};
use crate::state::StateVector;

use case::{initial_data, projected, Case, InitialData};
pub use case::vessel_profile;
pub use config::{
    BcSpec, GravitySpec, InitialCondition, ModelKind, ReferenceSpec, ScenarioConfig,
};
pub use norms::{empirical_orders, ErrorReport, ErrorRow, Norms};

/// Diagnostics accumulated over a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub max_newton_iterations: usize,
    /// Number of (cell, step) pairs whose stationary solve fell back.
    pub fallbacks: usize,
    pub max_deviation: f64,
    /// Wall-clock seconds spent stepping (setup and output excluded).
    pub seconds: f64,
}

impl RunSummary {
    fn absorb(&mut self, r: &StepReport) {
        self.steps = r.step;
        self.time = r.time;
        self.max_newton_iterations = self.max_newton_iterations.max(r.max_newton_iterations);
        self.fallbacks += r.fallbacks.len();
        self.max_deviation = self.max_deviation.max(r.max_deviation);
    }
}

/// Final state of a run in a model-independent layout.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    /// State component names, then derived quantities.
    pub columns: Vec<String>,
    /// Number of leading state components in `columns`.
    pub components: usize,
    /// Indices of the evolved state components.
    pub evolved: Vec<usize>,
    pub x: Vec<f64>,
    /// Per cell: state components followed by derived quantities.
    pub cells: Vec<Vec<f64>>,
    pub summary: RunSummary,
    pub snapshots: Vec<PathBuf>,
}

impl RunOutput {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.cells.iter().map(|row| row[k]).collect())
    }
}

/// Length of a well-balance check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WbLength {
    Steps(usize),
    Until(f64),
}

/// Largest change `|Q_i^n − Q_i^0|` over all cells and steps.
#[derive(Clone, Debug, PartialEq)]
pub struct WbReport {
    pub scenario: String,
    pub well_balanced: bool,
    /// Evolved components, then derived quantities.
    pub variables: Vec<String>,
    pub drift: Vec<f64>,
    pub steps: usize,
    pub time: f64,
}

impl WbReport {
    pub fn drift_of(&self, name: &str) -> Option<f64> {
        self.variables.iter().position(|v| v == name).map(|k| self.drift[k])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub scenario: String,
    pub order: u8,
    pub well_balanced: bool,
    pub cells: usize,
    pub seconds: f64,
    pub variables: Vec<String>,
    pub l2: Vec<f64>,
}

/// Runs `cfg` and writes the snapshot CSV files.
pub fn run(cfg: &ScenarioConfig, observe: &mut dyn FnMut(&StepReport)) -> Result<RunOutput> {
    dispatch_run(cfg, Some(&cfg.output_dir()), observe)
}

/// Runs `cfg` without writing anything.
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    dispatch_run(cfg, None, &mut |_| {})
}

fn dispatch_run(cfg: &ScenarioConfig, out: Option<&Path>, observe: &mut dyn FnMut(&StepReport)) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.model.kind {
        ModelKind::Burgers => run_case::<Burgers, 1>(cfg, out, observe),
        ModelKind::Bfe => run_case::<BfeModel, 8>(cfg, out, observe),
    }
}

fn solver_for<'m, M: Case<V>, const V: usize>(
    model: &'m M,
    cfg: &ScenarioConfig,
    grid: Grid,
    order: Order,
    data: InitialData<V>,
) -> Result<Solver<'m, M, V>> {
    let left = model.boundary(&cfg.bc.left)?;
    let mut right = model.boundary(&cfg.bc.right)?;
    // impose the pressure the marched profile actually reaches
    if let (Some(nodes), Boundary::Pressure(_)) = (&data.nodes, right) {
        let last = nodes.last().expect("non-empty march");
        let p = model.derived(last)?;
        right = Boundary::Pressure(p[model.derived_names().iter().position(|&n| n == "p").expect("pressure column")]);
    }
    let options = SolverOptions {
        order,
        well_balanced: cfg.model.well_balanced,
        cfl: cfg.cfl(),
        dt_max: cfg.time.dt_max,
    };
    Solver::new(model, grid, options, (left, right), data.means, data.cache)
}

fn snapshot_times(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut times = cfg.output.snapshots.clone();
    times.push(cfg.time.t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

fn table<M: Case<V>, const V: usize>(model: &M, means: &[StateVector<V>]) -> Result<Vec<Vec<f64>>> {
    means
        .iter()
        .map(|q| {
            let mut row = q.0.to_vec();
            row.extend(model.derived(q)?);
            Ok(row)
        })
        .collect()
}

fn run_case<M: Case<V>, const V: usize>(
    cfg: &ScenarioConfig,
    out: Option<&Path>,
    observe: &mut dyn FnMut(&StepReport),
) -> Result<RunOutput> {
    let model = M::build(cfg)?;
    let order = cfg.order()?;
    let grid = cfg.grid()?;
    let data = initial_data(&model, cfg, &grid, order)?;
    let mut solver = solver_for(&model, cfg, grid, order, data)?;
    let mut columns: Vec<String> = model.component_names().iter().map(|s| s.to_string()).collect();
    columns.extend(model.derived_names().iter().map(|s| s.to_string()));
    let x: Vec<f64> = (0..grid.n).map(|i| grid.center(i)).collect();

    let mut summary = RunSummary::default();
    let mut elapsed = Duration::ZERO;
    let mut snapshots = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    for t in snapshot_times(cfg) {
        let start = Instant::now();
        solver.run_until(t, |_, r| {
            summary.absorb(r);
            observe(r);
        })?;
        elapsed += start.elapsed();
        if let Some(dir) = out {
            let path = dir.join(snapshot_name(&cfg.model.scenario, t));
            write_table(&path, &columns, &x, &table(&model, &solver.means)?)?;
            snapshots.push(path);
        }
    }
    summary.time = solver.time;
    summary.seconds = elapsed.as_secs_f64();
    Ok(RunOutput {
        scenario: cfg.model.scenario.clone(),
        components: V,
        evolved: model.evolved_components().to_vec(),
        cells: table(&model, &solver.means)?,
        columns,
        x,
        summary,
        snapshots,
    })
}

/// `<scenario>_t<time>.csv`.
pub fn snapshot_name(scenario: &str, t: f64) -> String {
    format!("{scenario}_t{t}.csv")
}

/// Round-trip exact decimal rendering (17 significant digits).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_table(path: &Path, columns: &[String], x: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec!["x_center".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for (xc, row) in x.iter().zip(rows) {
        let record: Vec<String> = std::iter::once(xc).chain(row).map(|&v| fmt_float(v)).collect();
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn with_cells(cfg: &ScenarioConfig, cells: usize) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.grid.cells = cells;
    c.output.snapshots.clear();
    c
}

/// Reference cell values of the evolved components for each mesh in `cells`.
fn references(cfg: &ScenarioConfig, cells: &[usize]) -> Result<Vec<Vec<Vec<f64>>>> {
    match cfg.reference {
        ReferenceSpec::Analytic => cells
            .iter()
            .map(|&n| match cfg.model.kind {
                ModelKind::Burgers => analytic::<Burgers, 1>(&with_cells(cfg, n)),
                ModelKind::Bfe => analytic::<BfeModel, 8>(&with_cells(cfg, n)),
            })
            .collect(),
        ReferenceSpec::Fine { factor } => {
            let finest = cells.iter().copied().max().unwrap_or(0) * factor;
            let fine = simulate(&with_cells(cfg, finest))?;
            let values: Vec<Vec<f64>> = fine.cells.iter().map(|row| fine.evolved.iter().map(|&c| row[c]).collect()).collect();
            cells.iter().map(|&n| block_average(&values, n)).collect()
        }
    }
}

fn analytic<M: Case<V>, const V: usize>(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>> {
    let model = M::build(cfg)?;
    let (order, grid) = (cfg.order()?, cfg.grid()?);
    (0..grid.n)
        .map(|i| {
            let q = projected(order, &grid, i, |x| model.exact(cfg, x))?;
            Ok(model.evolved_components().iter().map(|&c| q[c]).collect())
        })
        .collect()
}

/// Averages consecutive blocks of a fine-mesh solution onto `n` cells.
pub fn block_average(fine: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 || fine.len() % n != 0 {
        return Err(Error::Usage(format!("cannot average {} cells onto {n}", fine.len())));
    }
    let r = fine.len() / n;
    Ok(fine
        .chunks(r)
        .map(|block| {
            (0..block[0].len())
                .map(|k| block.iter().map(|row| row[k]).sum::<f64>() / r as f64)
                .collect()
        })
        .collect())
}

fn evolved_names(out: &RunOutput) -> Vec<String> {
    out.evolved.iter().map(|&c| out.columns[c].clone()).collect()
}

fn error_row(out: &RunOutput, reference: &[Vec<f64>], dx: f64) -> ErrorRow {
    let norms = out
        .evolved
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let e: Vec<f64> = out.cells.iter().zip(reference).map(|(row, r)| row[c] - r[k]).collect();
            Norms::of(&e, dx)
        })
        .collect();
    ErrorRow { cells: out.cells.len(), norms, seconds: out.summary.seconds, steps: out.summary.steps }
}

/// Runs `N, 2N, …, 2^{k−1} N` cells and measures the errors at the final time.
pub fn converge(cfg: &ScenarioConfig, refinements: usize) -> Result<ErrorReport> {
    cfg.validate()?;
    if refinements == 0 {
        return Err(Error::Usage("at least one refinement is needed".into()));
    }
    let cells: Vec<usize> = (0..refinements).map(|r| cfg.grid.cells << r).collect();
    let reference = references(cfg, &cells)?;
    let outputs: Vec<RunOutput> =
        cells.par_iter().map(|&n| simulate(&with_cells(cfg, n))).collect::<Result<_>>()?;
    let length = cfg.grid.x_b - cfg.grid.x_a;
    let rows = outputs
        .iter()
        .zip(&reference)
        .map(|(out, r)| error_row(out, r, length / out.cells.len() as f64))
        .collect();
    Ok(ErrorReport {
        scenario: cfg.model.scenario.clone(),
        order: cfg.model.order,
        well_balanced: cfg.model.well_balanced,
        length,
        variables: evolved_names(&outputs[0]),
        rows,
    })
}

/// Starts from the discrete stationary solution and records the largest drift.
pub fn wb_check(cfg: &ScenarioConfig, length: WbLength) -> Result<WbReport> {
    let mut cfg = cfg.clone();
    cfg.initial = InitialCondition::Steady;
    cfg.validate()?;
    match cfg.model.kind {
        ModelKind::Burgers => wb_case::<Burgers, 1>(&cfg, length),
        ModelKind::Bfe => wb_case::<BfeModel, 8>(&cfg, length),
    }
}

fn wb_case<M: Case<V>, const V: usize>(cfg: &ScenarioConfig, length: WbLength) -> Result<WbReport> {
    let model = M::build(cfg)?;
    let order = cfg.order()?;
    let grid = cfg.grid()?;
    let data = initial_data(&model, cfg, &grid, order)?;
    let mut solver = solver_for(&model, cfg, grid, order, data)?;
    let evolved = model.evolved_components();
    let initial = table(&model, &solver.means)?;
    let columns: Vec<usize> = evolved.iter().copied().chain(V..V + model.derived_names().len()).collect();
    let mut drift = vec![0.0; columns.len()];
    let mut failure = None;
    let mut track = |s: &Solver<M, V>| match table(&model, &s.means) {
        Ok(now) => {
            for (row, init) in now.iter().zip(&initial) {
                for (d, &c) in drift.iter_mut().zip(&columns) {
                    *d = f64::max(*d, (row[c] - init[c]).abs());
                }
            }
        }
        Err(e) => {
            failure.get_or_insert(e);
        }
    };
    match length {
        WbLength::Steps(n) => solver.run_steps(n, |s, _| track(s))?,
        WbLength::Until(t) => solver.run_until(t, |s, _| track(s))?,
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let mut variables: Vec<String> = evolved.iter().map(|&c| model.component_names()[c].to_string()).collect();
    variables.extend(model.derived_names().iter().map(|s| s.to_string()));
    Ok(WbReport {
        scenario: cfg.model.scenario.clone(),
        well_balanced: cfg.model.well_balanced,
        variables,
        drift,
        steps: solver.steps,
        time: solver.time,
    })
}

/// Times each configuration on a single thread and measures its `L²` errors.
pub fn bench(cfgs: &[ScenarioConfig]) -> Result<Vec<BenchRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Usage(e.to_string()))?;
    pool.install(|| {
        cfgs.iter()
            .map(|cfg| {
                let report = converge(cfg, 1)?;
                let row = &report.rows[0];
                Ok(BenchRow {
                    scenario: report.scenario.clone(),
                    order: report.order,
                    well_balanced: report.well_balanced,
                    cells: row.cells,
                    seconds: row.seconds,
                    l2: row.norms.iter().map(|n| n.l2).collect(),
                    variables: report.variables.clone(),
                })
            })
            .collect()
    })
}

/// Writes bench rows as CSV.
pub fn write_bench_csv(rows: &[BenchRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = rows.first() else { return Ok(()) };
    let mut header: Vec<String> = ["scenario", "order", "wb", "cells", "seconds"].iter().map(|s| s.to_string()).collect();
    header.extend(first.variables.iter().map(|v| format!("l2_{v}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![
            r.scenario.clone(),
            r.order.to_string(),
            if r.well_balanced { "on" } else { "off" }.to_string(),
            r.cells.to_string(),
            fmt_float(r.seconds),
        ];
        rec.extend(r.l2.iter().map(|&v| fmt_float(v)));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
