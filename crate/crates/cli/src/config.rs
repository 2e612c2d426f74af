//! Flat `key = value` manifests with `[section]` headers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tcm_core::data::{loglog, DataCase, PerturbationSpec, SmallnessConstants};
use tcm_core::diagnostics::{BootstrapConfig, IntegralOptions, ProbeOptions};
use tcm_core::flow::PhysicalParams;
use tcm_core::solver::SolverConfig;
use tcm_core::spectral::DEFAULT_DEALIAS_FRACTION;
use tcm_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    BuildData,
    Run,
    Verify,
    Sweep,
}

impl Workflow {
    pub fn as_str(&self) -> &'static str {
        match self {
            Workflow::BuildData => "build-data",
            Workflow::Run => "run",
            Workflow::Verify => "verify",
            Workflow::Sweep => "sweep",
        }
    }
}

impl FromStr for Workflow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "build-data" => Ok(Workflow::BuildData),
            "run" => Ok(Workflow::Run),
            "verify" => Ok(Workflow::Verify),
            "sweep" => Ok(Workflow::Sweep),
            _ => Err(Error::InvalidParameter(format!("unknown workflow `{s}`"))),
        }
    }
}

impl fmt::Display for Workflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which background data to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundKind {
    Annulus,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
    pub dealias_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub c: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub lattice_factor: f64,
    pub max_grid_points: usize,
    pub simulate: bool,
    pub sim_t_end: f64,
    pub sim_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub probe_samples: usize,
    pub probe_n: Vec<usize>,
    pub probe_l: f64,
    pub probe: ProbeOptions,
    pub integrals: IntegralOptions,
    /// Explicit horizon for the time integrals; chosen automatically when absent.
    pub horizon: Option<f64>,
}

/// Everything a workflow needs, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub workflow: Option<Workflow>,
    pub case: DataCase,
    pub eps: f64,
    pub params: PhysicalParams,
    pub s: f64,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub background: BackgroundKind,
    pub perturbation: PerturbationSpec,
    pub constants: Constants,
    pub out_dir: Option<PathBuf>,
    pub sweep: SweepSpec,
    pub verify: VerifySpec,
    /// `[J^s]` spacing of the background norm series behind the envelope.
    pub envelope_kappa: f64,
}

impl RunManifest {
    pub fn dim(&self) -> usize {
        self.case.dim()
    }

    pub fn smallness_constants(&self) -> SmallnessConstants {
        SmallnessConstants { c: self.constants.c, c2: self.constants.c2 }
    }

    pub fn bootstrap(&self) -> Result<BootstrapConfig> {
        BootstrapConfig::new(self.constants.c2, self.constants.c3, self.constants.c4, &self.params)
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["workflow", "out_dir"]),
    ("physics", &["nu", "eta", "lambda", "s"]),
    ("grid", &["n", "l", "dealias_fraction"]),
    ("solver", &["dt", "t_end", "diag_every", "snapshot_every", "cfl", "max_halvings", "tail_threshold", "envelope_kappa"]),
    ("seeds", &["perturbation", "norm", "seed"]),
    ("constants", &["c", "c2", "c3", "c4"]),
    ("data", &["case", "eps", "pairs", "background"]),
    ("sweep", &["eps", "lattice_factor", "max_grid_points", "simulate", "t_end", "dt"]),
    ("verify", &["probe_samples", "probe_n", "probe_l", "probe_seed", "kappa_linear", "kappa_forcing", "tail", "horizon"]),
];

/// Raw `section.key → value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn known(section: &str, key: &str) -> bool {
    KEYS.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = lineno + 1;
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::InvalidParameter(format!("line {at}: unterminated section header")))?
                    .trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(Error::InvalidParameter(format!("line {at}: unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {at}: expected `key = value`")))?;
            let sec = section
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter(format!("line {at}: key outside any section")))?;
            let key = key.trim();
            if !known(sec, key) {
                return Err(Error::InvalidParameter(format!("line {at}: unknown key `{key}` in [{sec}]")));
            }
            let full = format!("{sec}.{key}");
            if entries.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(Error::InvalidParameter(format!("line {at}: duplicate key `{full}`")));
            }
        }
        Ok(Self { entries })
    }

    /// Applies `section.key=value`, replacing any value from the file.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("override `{spec}` is not KEY=VALUE")))?;
        let key = key.trim();
        let (sec, name) = key
            .split_once('.')
            .ok_or_else(|| Error::InvalidParameter(format!("override key `{key}` must be section.key")))?;
        if !known(sec, name) {
            return Err(Error::InvalidParameter(format!("unknown override key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParameter(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| Error::InvalidParameter(format!("`{key}`: cannot parse `{p}`")))
                })
                .collect(),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

/// `all` for every pair, or 1-based pairs such as `12,13`.
fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    if text == "all" {
        return Ok(tcm_core::data::all_pairs(3));
    }
    text.split(',')
        .map(|p| {
            let digits: Vec<usize> =
                p.trim().chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect();
            match digits.as_slice() {
                [a, b] if (1..=3).contains(a) && (1..=3).contains(b) && a != b => Ok((a - 1, b - 1)),
                _ => Err(Error::InvalidParameter(format!("bad pair `{p}` (use e.g. 12,13)"))),
            }
        })
        .collect()
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl RunManifest {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let workflow = raw.str("run.workflow").map(str::parse).transpose()?;
        let case = match raw.str("data.case").unwrap_or("2d") {
            "2d" => DataCase::TwoD,
            "3d" => DataCase::ThreeD { pairs: parse_pairs(raw.str("data.pairs").unwrap_or("all"))? },
            other => return Err(Error::InvalidParameter(format!("data.case must be 2d or 3d, got `{other}`"))),
        };
        if matches!(case, DataCase::TwoD) && raw.str("data.pairs").is_some() {
            return Err(Error::InvalidParameter("data.pairs only applies to the 3d case".into()));
        }
        let three_d = case.dim() == 3;
        let eps = raw.get_or("data.eps", 0.1)?;
        loglog(eps)?;
        let params = PhysicalParams::new(
            raw.get_or("physics.nu", 1.0)?,
            raw.get_or("physics.eta", 1.0)?,
            raw.get_or("physics.lambda", 1.0)?,
        )?;
        let s = raw.get_or("physics.s", if three_d { 3.0 } else { 2.5 })?;
        if three_d && !(s > 2.5) {
            return Err(Error::InvalidParameter(format!(
                "the 3D global existence result requires s > 5/2 (got s = {s})"
            )));
        }
        if !three_d && !(s > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "the 2D global existence result requires s > 2 (got s = {s})"
            )));
        }
        let grid = GridSpec {
            n: raw.get_or("grid.n", 400)?,
            l: raw.get_or("grid.l", 80.0)?,
            dealias_fraction: raw.get_or("grid.dealias_fraction", DEFAULT_DEALIAS_FRACTION)?,
        };
        let defaults = SolverConfig { dt: 1e-3, t_end: 10.0, ..SolverConfig::default() };
        let solver = SolverConfig {
            dt: raw.get_or("solver.dt", defaults.dt)?,
            t_end: raw.get_or("solver.t_end", defaults.t_end)?,
            diag_every: raw.get_or("solver.diag_every", defaults.diag_every)?,
            snapshot_every: raw.get("solver.snapshot_every")?,
            cfl: raw.get_or("solver.cfl", defaults.cfl)?,
            max_halvings: raw.get_or("solver.max_halvings", defaults.max_halvings)?,
            tail_threshold: raw.get_or("solver.tail_threshold", defaults.tail_threshold)?,
            ..defaults
        };
        solver.validate()?;
        let background = match raw.str("data.background").unwrap_or("annulus") {
            "annulus" => BackgroundKind::Annulus,
            "zero" => BackgroundKind::Zero,
            other => {
                return Err(Error::InvalidParameter(format!("data.background must be annulus or zero, got `{other}`")))
            }
        };
        let perturbation = match raw.str("seeds.perturbation").unwrap_or("zero") {
            "zero" => PerturbationSpec::Zero,
            "random" => {
                let norm: f64 = raw.get_or("seeds.norm", 1e-3)?;
                if !(norm >= 0.0 && norm.is_finite()) {
                    return Err(Error::InvalidParameter(format!("seeds.norm must be ≥ 0, got {norm}")));
                }
                PerturbationSpec::Random { seed: raw.get_or("seeds.seed", 0)?, norm, s }
            }
            other => {
                return Err(Error::InvalidParameter(format!("seeds.perturbation must be zero or random, got `{other}`")))
            }
        };
        let constants = Constants {
            c: positive("constants.c", raw.get_or("constants.c", 1.0)?)?,
            c2: positive("constants.c2", raw.get_or("constants.c2", 1.0)?)?,
            c3: positive("constants.c3", raw.get_or("constants.c3", 1.0)?)?,
            c4: positive("constants.c4", raw.get_or("constants.c4", 1.0)?)?,
        };
        let sweep = SweepSpec {
            eps: raw.list("sweep.eps", vec![0.3, 0.2, 0.1, 0.05])?,
            lattice_factor: positive("sweep.lattice_factor", raw.get_or("sweep.lattice_factor", 8.0)?)?,
            max_grid_points: raw.get_or("sweep.max_grid_points", 1 << 22)?,
            simulate: raw.get_or("sweep.simulate", false)?,
            sim_t_end: positive("sweep.t_end", raw.get_or("sweep.t_end", 1.0)?)?,
            sim_dt: positive("sweep.dt", raw.get_or("sweep.dt", 0.1)?)?,
        };
        for &e in &sweep.eps {
            loglog(e)?;
        }
        let integrals = IntegralOptions {
            kappa_linear: positive("verify.kappa_linear", raw.get_or("verify.kappa_linear", 1e-3)?)?,
            kappa_forcing: positive("verify.kappa_forcing", raw.get_or("verify.kappa_forcing", 0.05)?)?,
            tail: positive("verify.tail", raw.get_or("verify.tail", 1e-8)?)?,
        };
        let verify = VerifySpec {
            probe_samples: raw.get_or("verify.probe_samples", 200)?,
            probe_n: raw.list("verify.probe_n", vec![128, 256])?,
            probe_l: positive("verify.probe_l", raw.get_or("verify.probe_l", 2.0)?)?,
            probe: ProbeOptions { seed: raw.get_or("verify.probe_seed", 7)?, ..ProbeOptions::default() },
            integrals,
            horizon: raw.get("verify.horizon")?,
        };
        if verify.probe_samples == 0 {
            return Err(Error::InvalidParameter("verify.probe_samples must be at least 1".into()));
        }
        Ok(Self {
            workflow,
            case,
            eps,
            params,
            s,
            grid,
            solver,
            background,
            perturbation,
            constants,
            out_dir: raw.str("run.out_dir").map(PathBuf::from),
            sweep,
            verify,
            envelope_kappa: positive("solver.envelope_kappa", raw.get_or("solver.envelope_kappa", 0.05)?)?,
        })
    }
}

/// Reads, overrides and validates a manifest. A missing path means all defaults.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunManifest> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut raw = RawConfig::parse(&text)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    RunManifest::from_raw(&raw)
}
