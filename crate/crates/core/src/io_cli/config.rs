//! INI-style run configuration with strict key checking.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ini::Ini;

use crate::error::{Error, Result};
use crate::functionals::{critical_exponent, WaveParams};
use crate::spectral::ZeroModeRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Solve,
    DCurve,
    Evolve,
    Regions,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "solve" => Some(Mode::Solve),
            "dcurve" => Some(Mode::DCurve),
            "evolve" => Some(Mode::Evolve),
            "regions" => Some(Mode::Regions),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Gaussian { width: f64, amplitude: Option<f64> },
    Field(PathBuf),
    /// Continue from `from` to the target speed in steps of at most `step`.
    Continuation { from: Vec<f64>, step: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub gamma: Option<f64>,
    pub init: InitSpec,
    pub dealias: bool,
    pub fault_speed_limit: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Plain evolution of the configured initial data.
    None,
    Stability,
    StrongInstability,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `λ(φ, ∓Aφ)`; `forward` selects `-Aφ`, the wave moving along `c`.
    GroundState { forward: bool },
    Random { seed: u64, amplitude: f64 },
    Fields { u: PathBuf, v: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveSpec {
    pub experiment: Experiment,
    pub initial: InitialData,
    pub t_final: f64,
    pub dt: f64,
    pub monitor_every: usize,
    pub adaptive_cfl: Option<f64>,
    pub band: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub membership: bool,
    pub h1_factor: f64,
    pub window: usize,
    pub gap_tol: f64,
    pub snapshots: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionsSpec {
    pub dims: Vec<usize>,
    /// `None` selects the default grid per dimension.
    pub p_grid: Option<Vec<f64>>,
    pub c_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: Option<WaveParams<f64>>,
    /// dcurve only: unit direction and ζ grid.
    pub direction: Option<Vec<f64>>,
    pub zetas: Option<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub half_widths: Vec<f64>,
    pub solver: SolverSpec,
    pub evolve: Option<EvolveSpec>,
    pub regions: Option<RegionsSpec>,
    pub out_dir: PathBuf,
    pub prefix: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("params", &["n", "p", "c", "direction", "zeta", "zero_mode"]),
    ("grid", &["N", "L"]),
    (
        "solver",
        &["tol", "max_iter", "gamma", "init", "width", "amplitude", "init_field", "continuation_from", "continuation_step", "dealias", "fault_speed_limit"],
    ),
    (
        "evolve",
        &[
            "experiment", "initial", "T", "dt", "monitor_every", "adaptive_cfl", "band", "lambda", "epsilon", "seed", "amplitude", "u_field",
            "v_field", "membership", "h1_factor", "window", "gap_tol", "snapshots",
        ],
    ),
    ("regions", &["n", "p_grid", "c_grid"]),
    ("output", &["dir", "prefix"]),
];

/// Flattened `section.key -> value` table after the unknown-key check.
struct Table(BTreeMap<String, String>);

fn range(path: &str, msg: impl Into<String>) -> Error {
    Error::RangeViolation { path: path.into(), msg: msg.into() }
}

impl Table {
    fn parse(text: &str) -> Result<Table> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::ParseValue { path: "config".into(), value: e.to_string() })?;
        let mut map = BTreeMap::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::UnknownKey(k.to_string()));
                }
                continue;
            };
            let Some((_, allowed)) = KEYS.iter().find(|(s, _)| *s == section) else {
                return Err(Error::UnknownKey(format!("[{section}]")));
            };
            for (k, v) in props.iter() {
                let path = format!("{section}.{k}");
                if !allowed.contains(&k) {
                    return Err(Error::UnknownKey(path));
                }
                if map.insert(path.clone(), v.trim().to_string()).is_some() {
                    return Err(range(&path, "given twice"));
                }
            }
        }
        Ok(Table(map))
    }

    fn raw(&self, path: &str) -> Option<&str> {
        self.0.get(path).map(String::as_str)
    }

    fn req(&self, path: &str) -> Result<&str> {
        self.raw(path).ok_or_else(|| Error::MissingKey(path.into()))
    }

    fn num<V: std::str::FromStr>(path: &str, s: &str) -> Result<V> {
        s.parse().map_err(|_| Error::ParseValue { path: path.into(), value: s.into() })
    }

    fn opt<V: std::str::FromStr>(&self, path: &str) -> Result<Option<V>> {
        self.raw(path).map(|s| Self::num(path, s)).transpose()
    }

    fn get<V: std::str::FromStr>(&self, path: &str) -> Result<V> {
        Self::num(path, self.req(path)?)
    }

    fn or<V: std::str::FromStr>(&self, path: &str, default: V) -> Result<V> {
        Ok(self.opt(path)?.unwrap_or(default))
    }

    fn flag(&self, path: &str, default: bool) -> Result<bool> {
        match self.raw(path) {
            None => Ok(default),
            Some("on" | "true" | "yes" | "1") => Ok(true),
            Some("off" | "false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::ParseValue { path: path.into(), value: v.into() }),
        }
    }

    fn list<V: std::str::FromStr>(path: &str, s: &str) -> Result<Vec<V>> {
        s.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty()).map(|t| Self::num(path, t)).collect()
    }

    fn vec<V: std::str::FromStr>(&self, path: &str) -> Result<Vec<V>> {
        Self::list(path, self.req(path)?)
    }

    /// A list, or `start:step:stop` with the stop included when it is hit.
    fn grid(&self, path: &str) -> Result<Vec<f64>> {
        let s = self.req(path)?;
        if !s.contains(':') {
            return Self::list(path, s);
        }
        let parts: Vec<f64> = s.split(':').map(|t| Self::num(path, t.trim())).collect::<Result<_>>()?;
        let [a, h, b] = parts[..] else {
            return Err(range(path, "range must be start:step:stop"));
        };
        if !(h > 0.0) || !(b >= a) {
            return Err(range(path, "range needs a positive step and stop >= start"));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(range(path, "range has too many points"));
        }
        Ok((0..count).map(|k| a + k as f64 * h).collect())
    }
}

fn check_len<V>(path: &str, v: &[V], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(range(path, format!("expected {n} values, got {}", v.len())));
    }
    Ok(())
}

fn solver_spec(t: &Table) -> Result<SolverSpec> {
    let tol = t.or("solver.tol", 1e-10)?;
    if !(tol > 0.0) {
        return Err(range("solver.tol", "must be positive"));
    }
    let max_iter = t.or("solver.max_iter", 3000usize)?;
    if max_iter == 0 {
        return Err(range("solver.max_iter", "must be at least 1"));
    }
    let gamma: Option<f64> = t.opt("solver.gamma")?;
    if gamma.is_some_and(|g| !(g > 0.0 && g.is_finite())) {
        return Err(range("solver.gamma", "must be positive"));
    }
    let init = match t.raw("solver.init").unwrap_or("gaussian") {
        "gaussian" => {
            let width = t.or("solver.width", 1.0)?;
            if !(width > 0.0) {
                return Err(range("solver.width", "must be positive"));
            }
            InitSpec::Gaussian { width, amplitude: t.opt("solver.amplitude")? }
        }
        "field" => InitSpec::Field(PathBuf::from(t.req("solver.init_field")?)),
        "continuation" => {
            let step = t.or("solver.continuation_step", 0.1)?;
            if !(step > 0.0) {
                return Err(range("solver.continuation_step", "must be positive"));
            }
            InitSpec::Continuation { from: t.vec("solver.continuation_from")?, step }
        }
        other => return Err(Error::ParseValue { path: "solver.init".into(), value: other.into() }),
    };
    Ok(SolverSpec {
        tol,
        max_iter,
        gamma,
        init,
        dealias: t.flag("solver.dealias", true)?,
        fault_speed_limit: t.opt("solver.fault_speed_limit")?,
    })
}

fn wave_params(t: &Table, n: usize, c: Vec<f64>) -> Result<WaveParams<f64>> {
    let p: f64 = t.get("params.p")?;
    if !(p > 1.0) || !(p < critical_exponent(n)) {
        return Err(range("params.p", format!("p = {p} outside (1, {})", critical_exponent(n))));
    }
    let speed2: f64 = c.iter().map(|x| x * x).sum();
    if !(speed2 < 1.0) {
        return Err(range("params.c", format!("|c| = {} must be below 1", speed2.sqrt())));
    }
    let mut params = WaveParams::new(c, p).map_err(|e| range("params", e.to_string()))?;
    match t.raw("params.zero_mode") {
        None => {}
        Some("zero") => params = params.with_zero_mode(ZeroModeRule::Zero),
        Some("angular_mean") => params = params.with_zero_mode(ZeroModeRule::AngularMean),
        Some(v) => return Err(Error::ParseValue { path: "params.zero_mode".into(), value: v.into() }),
    }
    Ok(params)
}

fn evolve_spec(t: &Table) -> Result<EvolveSpec> {
    let experiment = match t.raw("evolve.experiment").unwrap_or("none") {
        "none" => Experiment::None,
        "stability" => Experiment::Stability,
        "strong_instability" => Experiment::StrongInstability,
        v => return Err(Error::ParseValue { path: "evolve.experiment".into(), value: v.into() }),
    };
    let seed = t.or("evolve.seed", 1u64)?;
    let initial = match t.raw("evolve.initial").unwrap_or("ground_state") {
        "ground_state" => InitialData::GroundState { forward: true },
        "ground_state_backward" => InitialData::GroundState { forward: false },
        "random" => InitialData::Random { seed, amplitude: t.or("evolve.amplitude", 1.0)? },
        "fields" => InitialData::Fields { u: t.req("evolve.u_field")?.into(), v: t.req("evolve.v_field")?.into() },
        v => return Err(Error::ParseValue { path: "evolve.initial".into(), value: v.into() }),
    };
    if experiment != Experiment::None && initial != (InitialData::GroundState { forward: true }) {
        return Err(range("evolve.initial", "experiments start from the ground state"));
    }
    let t_final: f64 = t.get("evolve.T")?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(range("evolve.T", "must be positive"));
    }
    let dt: f64 = t.get("evolve.dt")?;
    if !(dt > 0.0 && dt <= t_final) {
        return Err(range("evolve.dt", "must lie in (0, T]"));
    }
    let monitor_every = t.or("evolve.monitor_every", 10usize)?;
    if monitor_every == 0 {
        return Err(range("evolve.monitor_every", "must be at least 1"));
    }
    let adaptive_cfl: Option<f64> = t.opt("evolve.adaptive_cfl")?;
    if adaptive_cfl.is_some_and(|c| !(c > 0.0)) {
        return Err(range("evolve.adaptive_cfl", "must be positive"));
    }
    let band = t.or("evolve.band", 3usize)?;
    if band < 2 {
        return Err(range("evolve.band", "must be at least 2"));
    }
    let lambda = t.or("evolve.lambda", 1.0)?;
    if !(lambda > 0.0) {
        return Err(range("evolve.lambda", "must be positive"));
    }
    let epsilon = t.or("evolve.epsilon", 1e-3)?;
    if !(epsilon > 0.0) {
        return Err(range("evolve.epsilon", "must be positive"));
    }
    let h1_factor = t.or("evolve.h1_factor", 10.0)?;
    let window = t.or("evolve.window", 4usize)?;
    let gap_tol = t.or("evolve.gap_tol", 1e-8)?;
    if !(h1_factor > 1.0) || window < 2 || !(gap_tol >= 0.0) {
        return Err(range("evolve", "blow-up criteria need h1_factor > 1, window >= 2, gap_tol >= 0"));
    }
    Ok(EvolveSpec {
        experiment,
        initial,
        t_final,
        dt,
        monitor_every,
        adaptive_cfl,
        band,
        lambda,
        epsilon,
        seed,
        membership: t.flag("evolve.membership", experiment == Experiment::StrongInstability)?,
        h1_factor,
        window,
        gap_tol,
        snapshots: t.flag("evolve.snapshots", false)?,
    })
}

fn regions_spec(t: &Table) -> Result<RegionsSpec> {
    let dims: Vec<usize> = match t.raw("regions.n") {
        Some(s) => Table::list("regions.n", s)?,
        None => vec![2, 5, 8],
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(range("regions.n", "dimensions must be positive"));
    }
    let p_grid = if t.raw("regions.p_grid").is_some() { Some(t.grid("regions.p_grid")?) } else { None };
    if p_grid.as_ref().is_some_and(|g| g.is_empty() || g.iter().any(|&p| !(p > 1.0))) {
        return Err(range("regions.p_grid", "exponents must exceed 1"));
    }
    let c_grid = if t.raw("regions.c_grid").is_some() { t.grid("regions.c_grid")? } else { default_c_grid() };
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(0.0..1.0).contains(&c)) {
        return Err(range("regions.c_grid", "speeds must lie in [0, 1)"));
    }
    Ok(RegionsSpec { dims, p_grid, c_grid })
}

pub fn default_c_grid() -> Vec<f64> {
    (0..100).map(|k| k as f64 / 100.0).collect()
}

/// 100 exponents in `(1, min(2*-1, 7)]`.
pub fn default_p_grid(n: usize) -> Vec<f64> {
    let top = critical_exponent(n).min(7.0);
    (1..=100).map(|k| 1.0 + (top - 1.0) * k as f64 / 100.0).filter(|&p| p < critical_exponent(n)).collect()
}

pub fn parse_config(mode: Mode, text: &str) -> Result<RunConfig> {
    let t = Table::parse(text)?;
    let out_dir = PathBuf::from(t.req("output.dir")?);
    let prefix = t.raw("output.prefix").unwrap_or("").to_string();
    if prefix.contains(['/', '\\']) {
        return Err(range("output.prefix", "must not contain path separators"));
    }
    let solver = solver_spec(&t)?;
    let mut cfg = RunConfig {
        mode,
        params: None,
        direction: None,
        zetas: None,
        sizes: Vec::new(),
        half_widths: Vec::new(),
        solver,
        evolve: None,
        regions: None,
        out_dir,
        prefix,
    };
    if mode == Mode::Regions {
        cfg.regions = Some(regions_spec(&t)?);
        return Ok(cfg);
    }
    let n: usize = t.get("params.n")?;
    if !(1..=3).contains(&n) {
        return Err(range("params.n", "dimension must be 1, 2 or 3"));
    }
    let sizes: Vec<usize> = t.vec("grid.N")?;
    check_len("grid.N", &sizes, n)?;
    if sizes.iter().any(|&s| s < 8 || s % 2 == 1) {
        return Err(range("grid.N", "sizes must be even and at least 8"));
    }
    let half_widths: Vec<f64> = t.vec("grid.L")?;
    check_len("grid.L", &half_widths, n)?;
    if half_widths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(range("grid.L", "half widths must be positive"));
    }
    cfg.sizes = sizes;
    cfg.half_widths = half_widths;
    if mode == Mode::DCurve {
        let dir: Vec<f64> = t.vec("params.direction")?;
        check_len("params.direction", &dir, n)?;
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(range("params.direction", "must be a non-zero vector"));
        }
        let zetas = t.grid("params.zeta")?;
        if zetas.windows(2).any(|w| !(w[1] > w[0])) || zetas[0] < 0.0 || zetas[zetas.len() - 1] >= 1.0 {
            return Err(range("params.zeta", "must increase within [0, 1)"));
        }
        cfg.params = Some(wave_params(&t, n, vec![0.0; n])?);
        cfg.direction = Some(dir.iter().map(|x| x / norm).collect());
        cfg.zetas = Some(zetas);
        return Ok(cfg);
    }
    let c: Vec<f64> = t.vec("params.c")?;
    check_len("params.c", &c, n)?;
    cfg.params = Some(wave_params(&t, n, c)?);
    if let InitSpec::Continuation { from, .. } = &cfg.solver.init {
        check_len("solver.continuation_from", from, n)?;
        if !(from.iter().map(|x| x * x).sum::<f64>() < 1.0) {
            return Err(range("solver.continuation_from", "|c| must be below 1"));
        }
    }
    if mode == Mode::Evolve {
        cfg.evolve = Some(evolve_spec(&t)?);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[params]\nn = 2\np = 2\nc = 0.8 0\n[grid]\nN = 256 256\nL = 40 40\n[output]\ndir = out\n";

    #[test]
    fn minimal_solve_config() {
        let cfg = parse_config(Mode::Solve, MINIMAL).unwrap();
        assert_eq!(cfg.sizes, vec![256, 256]);
        assert_eq!(cfg.params.unwrap().c(), &[0.8, 0.0]);
        assert!(cfg.solver.dealias);
    }

    #[test]
    fn named_failures() {
        let fast = MINIMAL.replace("c = 0.8 0", "c = 1.2 0");
        assert!(matches!(parse_config(Mode::Solve, &fast), Err(Error::RangeViolation { path, .. }) if path == "params.c"));
        let typo = format!("{MINIMAL}[solver]\ngama = 1.5\n");
        assert!(matches!(parse_config(Mode::Solve, &typo), Err(Error::UnknownKey(k)) if k == "solver.gama"));
        let missing = MINIMAL.replace("p = 2\n", "");
        assert!(matches!(parse_config(Mode::Solve, &missing), Err(Error::MissingKey(k)) if k == "params.p"));
        let short = MINIMAL.replace("N = 256 256", "N = 256");
        assert!(matches!(parse_config(Mode::Solve, &short), Err(Error::RangeViolation { path, .. }) if path == "grid.N"));
        assert!(matches!(parse_config(Mode::Solve, "[bogus]\nx = 1\n"), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn ranges_include_the_endpoint() {
        let text = "[params]\nn = 2\np = 2\ndirection = 3 4\nzeta = 0:0.05:0.8\n[grid]\nN = 64 64\nL = 10 10\n[output]\ndir = o\n";
        let cfg = parse_config(Mode::DCurve, text).unwrap();
        let z = cfg.zetas.unwrap();
        assert_eq!(z.len(), 17);
        assert!((z[16] - 0.8).abs() < 1e-15);
        assert_eq!(cfg.direction.unwrap(), vec![0.6, 0.8]);
    }

    #[test]
    fn regions_defaults() {
        let cfg = parse_config(Mode::Regions, "[output]\ndir = o\n").unwrap();
        let r = cfg.regions.unwrap();
        assert_eq!(r.dims, vec![2, 5, 8]);
        assert!(default_p_grid(8).iter().all(|&p| p < 10.0 / 6.0));
        assert_eq!(default_p_grid(2).last().copied(), Some(7.0));
    }
}
