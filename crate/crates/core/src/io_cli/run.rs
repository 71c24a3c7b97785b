//! Mode dispatch, artifact writing and the exit-code contract.

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::{parse_config, EvolveSpec, Experiment, InitSpec, InitialData, Mode, RunConfig};
use super::csv_out::{dcurve_table, monitor_table, outcome_table, region_table, summary_table, write_table};
use super::fieldfile::{read_field, write_field, Expect, FieldFile};
use super::config::default_p_grid;
use crate::error::{Error, Result};
use crate::evolution::{
    evolve, smooth_random_field, stability_experiment, strong_instability_experiment, BlowupCriteria, EvolutionState, EvolveConfig,
    Monitors, OrbitReference,
};
use crate::functionals::{region_map, Functionals, KParams};
use crate::groundstate::{continuation, petviashvili_solve, speed_path, GroundStateResult, InitialGuess, SolveConfig};
use crate::spectral::{make_grid, Field, Grid};
use crate::stability::{dcurve_grid, trace_dcurve};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Accepted for the interface; every reduction is already sequential.
    pub deterministic: bool,
    pub threads: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// 1 for bad input or I/O, 2 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Lock> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(".bwave.lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Lock(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path.display().to_string())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

struct Out<'a> {
    cfg: &'a RunConfig,
    report: RunReport,
}

impl Out<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(format!("{}{}", self.cfg.prefix, name))
    }

    fn table(&mut self, name: &str, (header, rows): (Vec<String>, Vec<Vec<String>>)) -> Result<()> {
        let p = self.path(name);
        write_table(&p, &header, &rows)?;
        self.report.written.push(p);
        Ok(())
    }

    fn field(&mut self, name: &str, field: &Field<f64>, c: &[f64], p: f64) -> Result<()> {
        let path = self.path(name);
        write_field(&path, &FieldFile { field: field.clone(), c: c.to_vec(), p })?;
        self.report.written.push(path);
        Ok(())
    }
}

pub fn run_text(mode: Mode, text: &str, opts: RunOptions) -> Result<RunReport> {
    run(&parse_config(mode, text)?, opts)
}

pub fn run(cfg: &RunConfig, _opts: RunOptions) -> Result<RunReport> {
    let _lock = Lock::acquire(&cfg.out_dir)?;
    let mut out = Out { cfg, report: RunReport::default() };
    match cfg.mode {
        Mode::Solve => solve_mode(cfg, &mut out)?,
        Mode::DCurve => dcurve_mode(cfg, &mut out)?,
        Mode::Evolve => evolve_mode(cfg, &mut out)?,
        Mode::Regions => regions_mode(cfg, &mut out)?,
    }
    Ok(out.report)
}

fn grid(cfg: &RunConfig) -> Result<Arc<Grid<f64>>> {
    make_grid(cfg.sizes.len(), &cfg.sizes, &cfg.half_widths)
}

fn solve_config(cfg: &RunConfig, grid: &Arc<Grid<f64>>) -> Result<SolveConfig<f64>> {
    let s = &cfg.solver;
    let init = match &s.init {
        InitSpec::Gaussian { width, amplitude } => InitialGuess::Gaussian { width: *width, amplitude: *amplitude },
        InitSpec::Field(path) => {
            let expect = Expect { sizes: Some(grid.sizes().to_vec()), half_widths: Some(grid.half_widths().to_vec()), ..Default::default() };
            InitialGuess::Field(read_field(path, Some(&expect))?.field)
        }
        InitSpec::Continuation { .. } => InitialGuess::Gaussian { width: 1.0, amplitude: None },
    };
    Ok(SolveConfig { tol: s.tol, max_iter: s.max_iter, gamma: s.gamma, init, dealias: s.dealias, fault_speed_limit: s.fault_speed_limit })
}

/// Every state along the configured path; the last one is the target.
fn ground_states(cfg: &RunConfig, grid: &Arc<Grid<f64>>) -> Result<Vec<GroundStateResult<f64>>> {
    let params = cfg.params.as_ref().expect("validated");
    let sc = solve_config(cfg, grid)?;
    match &cfg.solver.init {
        InitSpec::Continuation { from, step } => {
            continuation(&speed_path(from, params.c(), *step), params, grid, &sc).map_err(|f| f.error)
        }
        _ => Ok(vec![petviashvili_solve(params, grid, &sc)?]),
    }
}

fn solve_mode(cfg: &RunConfig, out: &mut Out) -> Result<()> {
    let g = grid(cfg)?;
    let states = ground_states(cfg, &g)?;
    let last = states.last().expect("non-empty path");
    out.field("profile.bwf", &last.phi, last.params.c(), last.params.p())?;
    out.table("summary.csv", summary_table(g.n(), &states))?;
    out.report.notes.push(format!("residual {:e} after {} iterations", last.residual, last.iters));
    Ok(())
}

fn dcurve_mode(cfg: &RunConfig, out: &mut Out) -> Result<()> {
    let base = cfg.params.as_ref().expect("validated");
    let zetas = cfg.zetas.as_ref().expect("validated");
    let dir = cfg.direction.as_ref().expect("validated");
    let g = dcurve_grid(&grid(cfg)?, zetas[zetas.len() - 1])?;
    let sc = solve_config(cfg, &g)?;
    match trace_dcurve(dir, zetas, base, &g, &sc) {
        Ok(curve) => {
            out.table("dcurve.csv", dcurve_table(&curve))?;
            out.report.notes.push(format!("{} points, {} monotonicity violations", curve.points.len(), curve.monotonicity_violations().len()));
            Ok(())
        }
        Err(f) => {
            // keep what was traced before the failure
            out.table("dcurve.csv", dcurve_table(&f.partial))?;
            Err(f.error)
        }
    }
}

fn evolve_config(e: &EvolveSpec) -> EvolveConfig<f64> {
    EvolveConfig { monitor_every: e.monitor_every, adaptive_cfl: e.adaptive_cfl, band: e.band, ..EvolveConfig::new(e.t_final, e.dt) }
}

fn evolve_mode(cfg: &RunConfig, out: &mut Out) -> Result<()> {
    let e = cfg.evolve.as_ref().expect("validated");
    let params = cfg.params.as_ref().expect("validated");
    let g = grid(cfg)?;
    let n = g.n();
    let ec = evolve_config(e);
    let ground = match e.initial {
        InitialData::GroundState { .. } => Some(ground_states(cfg, &g)?.pop().expect("non-empty path")),
        _ => None,
    };
    match e.experiment {
        Experiment::Stability => {
            let gs = ground.as_ref().expect("experiments start from the ground state");
            let (outcome, series) = stability_experiment(gs, e.epsilon, &ec, e.seed)?;
            out.table("monitor.csv", monitor_table(n, &series))?;
            out.table("outcome.csv", outcome_table(&outcome))?;
            out.report.notes.push(format!("{}: {}", outcome.kind.as_str(), outcome.details));
            return Ok(());
        }
        Experiment::StrongInstability => {
            let gs = ground.as_ref().expect("experiments start from the ground state");
            let criteria = BlowupCriteria { h1_factor: e.h1_factor, window: e.window, gap_tol: e.gap_tol };
            let (outcome, series) = strong_instability_experiment(gs, e.lambda, &ec, &criteria)?;
            out.table("monitor.csv", monitor_table(n, &series))?;
            out.table("outcome.csv", outcome_table(&outcome))?;
            out.report.notes.push(format!("{}: {}", outcome.kind.as_str(), outcome.details));
            return Ok(());
        }
        Experiment::None => {}
    }
    let mut monitors = Monitors::default();
    let (u, v) = match &e.initial {
        InitialData::GroundState { forward } => {
            let gs = ground.as_ref().unwrap();
            let (phi, psi) = gs.traveling_pair()?;
            let psi = if *forward { psi } else { psi.scale(-1.0) };
            monitors.reference = Some(OrbitReference::from_pair(&phi, &psi));
            (phi.scale(e.lambda), psi.scale(e.lambda))
        }
        InitialData::Random { seed, amplitude } => {
            let u = smooth_random_field(&g, *seed, 1.0)?.scale(*amplitude);
            let v = smooth_random_field(&g, seed.wrapping_add(1), 1.0)?.scale(*amplitude);
            (u, v)
        }
        InitialData::Fields { u, v } => {
            let expect = Expect {
                sizes: Some(cfg.sizes.clone()),
                half_widths: Some(cfg.half_widths.clone()),
                ..Default::default()
            };
            (read_field(u, Some(&expect))?.field, read_field(v, Some(&expect))?.field)
        }
    };
    if e.membership {
        let d = match &ground {
            Some(gs) => gs.pair_action()?,
            None => return Err(Error::RangeViolation { path: "evolve.membership".into(), msg: "needs the ground state for d(c)".into() }),
        };
        monitors.membership = Some((KParams::nehari(), d));
    }
    if e.snapshots {
        out.field("u0.bwf", &u, params.c(), params.p())?;
        out.field("v0.bwf", &v, params.c(), params.p())?;
    }
    let initial = EvolutionState { u, v, t: 0.0 };
    match evolve(&initial, params, &ec, monitors) {
        Ok((last, series)) => {
            out.table("monitor.csv", monitor_table(n, &series))?;
            if e.snapshots {
                out.field("u_final.bwf", &last.u, params.c(), params.p())?;
                out.field("v_final.bwf", &last.v, params.c(), params.p())?;
            }
            let f = Functionals::new(&g, params)?;
            out.report.notes.push(format!(
                "t = {}, energy drift {:e}, final energy {:e}",
                last.t,
                series.energy_drift(),
                f.energy(&last.u, &last.v)?
            ));
            Ok(())
        }
        Err(f) => {
            out.table("monitor.csv", monitor_table(n, &f.series))?;
            Err(f.error)
        }
    }
}

fn regions_mode(cfg: &RunConfig, out: &mut Out) -> Result<()> {
    let r = cfg.regions.as_ref().expect("validated");
    for &n in &r.dims {
        let p_grid = r.p_grid.clone().unwrap_or_else(|| default_p_grid(n));
        let cells = region_map(n, &p_grid, &r.c_grid);
        out.table(&format!("regions_n{n}.csv"), region_table(&cells))?;
    }
    Ok(())
}
