//! Reports across a range of `ε`, each on a grid sized for that `ε`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::bootstrap::{bootstrap_monitor, BootstrapConfig, BootstrapFlag};
use super::energy::energy_breakdown_at;
use super::estimates::{lemma_bound_report, EstimateReport, EstimateRow, IntegralOptions};
use crate::data::{
    assemble_background_initial, largeness_report, smallness_condition_lhs, support_sets, synthesize_seed_fields,
    DataCase, InitialTriple, LargenessReport, Perturbation, SmallnessConstants, SmallnessReport,
};
use crate::error::{Error, Result};
use crate::flow::{BackgroundFlow, PhysicalParams};
use crate::io::atomic_write;
use crate::solver::{integrate_perturbation_cached, BackgroundCache, OutputKind, PerturbationState, SolverConfig};
use crate::spectral::TorusGrid;

/// A short perturbation run attached to each sweep entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSimulation {
    pub solver: SolverConfig,
    pub bootstrap: BootstrapConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub case: DataCase,
    pub params: PhysicalParams,
    pub s: f64,
    pub smallness: SmallnessConstants,
    pub integrals: IntegralOptions,
    /// `L = ceil(lattice_factor / ε)`.
    pub lattice_factor: f64,
    /// Grids with more points than this are refused.
    pub max_grid_points: usize,
    pub workers: usize,
    pub simulation: Option<SweepSimulation>,
}

impl SweepConfig {
    pub fn new(eps: Vec<f64>, case: DataCase, params: PhysicalParams, s: f64) -> Self {
        Self {
            eps,
            case,
            params,
            s,
            smallness: SmallnessConstants::default(),
            integrals: IntegralOptions::default(),
            lattice_factor: 8.0,
            max_grid_points: 1 << 22,
            workers: 1,
            simulation: None,
        }
    }
}

/// Outcome for one `ε`; `error` is set when the entry could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub n: usize,
    pub l: f64,
    pub support_empty: bool,
    pub largeness: Option<LargenessReport>,
    pub smallness: Option<SmallnessReport>,
    pub estimate: Option<EstimateRow>,
    /// Worst bootstrap flag seen in the optional run.
    pub worst_flag: Option<BootstrapFlag>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Fits over the rows that produced an estimate.
    pub estimates: EstimateReport,
}

/// Smallest `2^a 3^b 5^c` that is even and at least `n`.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

/// Grid for one sweep entry: `L = ceil(factor/ε)` and the smallest FFT-friendly
/// `N > 4K + 1`, where `K` is the largest integer wavenumber in the support. The
/// product of two fields then stays below `N/2`, so nothing needs truncating.
///
/// Returns `None` when the support has no lattice point.
pub fn sweep_grid(eps: f64, case: &DataCase, factor: f64, max_points: usize) -> Result<Option<TorusGrid>> {
    let l = (factor / eps).ceil();
    let (primary, thermal) = support_sets(case, eps)?;
    let d = case.dim();
    let k = primary
        .lattice_points(l)
        .into_iter()
        .chain(thermal.lattice_points(l))
        .map(|p| p[..d].iter().map(|v| v.unsigned_abs()).max().unwrap_or(0))
        .max();
    let Some(k) = k else { return Ok(None) };
    let n = fft_friendly(4 * k as usize + 2);
    let points = n.checked_pow(d as u32).unwrap_or(usize::MAX);
    if points > max_points {
        return Err(Error::ResourceLimit(format!(
            "ε = {eps} needs a {d}D grid with N = {n} ({points} points, limit {max_points})"
        )));
    }
    TorusGrid::with_dealias(d, n, l, 1.0).map(Some)
}

fn empty_row(eps: f64, l: f64) -> SweepRow {
    SweepRow {
        eps,
        n: 0,
        l,
        support_empty: false,
        largeness: None,
        smallness: None,
        estimate: None,
        worst_flag: None,
        error: None,
    }
}

fn worse(a: BootstrapFlag, b: BootstrapFlag) -> BootstrapFlag {
    let rank = |f: BootstrapFlag| match f {
        BootstrapFlag::WithinHalfM => 0,
        BootstrapFlag::WithinM => 1,
        BootstrapFlag::Violated => 2,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn run_entry(config: &SweepConfig, eps: f64, row: &mut SweepRow) -> Result<()> {
    let Some(grid) = sweep_grid(eps, &config.case, config.lattice_factor, config.max_grid_points)? else {
        row.support_empty = true;
        return Ok(());
    };
    row.n = grid.n();
    let seeds = synthesize_seed_fields(&grid, eps, &config.case)?;
    let background = assemble_background_initial(&seeds)?;
    let triple = InitialTriple::new(background, Perturbation::zeros(&grid))?;
    row.largeness = Some(largeness_report(&triple, &seeds, config.s)?);
    row.smallness =
        Some(smallness_condition_lhs(&triple.perturbation, &seeds, config.s, config.smallness, &config.params)?);
    row.estimate = Some(lemma_bound_report(&seeds, &config.params, config.s, None, &config.integrals)?);
    if let Some(sim) = &config.simulation {
        // The run needs truncated products, so it uses the same lattice with the 2/3 rule.
        let run_grid = TorusGrid::new(grid.dim(), grid.n(), grid.l())?;
        let seeds = synthesize_seed_fields(&run_grid, eps, &config.case)?;
        let flow = BackgroundFlow::new(config.params, seeds)?;
        let cache = BackgroundCache::new(&flow);
        let mut worst = BootstrapFlag::WithinHalfM;
        let mut observe = |state: &PerturbationState, _kind: OutputKind| {
            let bg = cache.get(state.t)?;
            let record = energy_breakdown_at(state, &bg, &config.params, config.s)?;
            worst = worse(worst, bootstrap_monitor(&record, &sim.bootstrap).flag);
            Ok(())
        };
        integrate_perturbation_cached(&PerturbationState::zeros(&run_grid), &sim.solver, &cache, &mut observe)?;
        row.worst_flag = Some(worst);
    }
    Ok(())
}

/// Runs every `ε` of the configuration on up to `workers` threads; an entry that
/// fails keeps whatever it finished and records the error.
pub fn epsilon_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.eps.is_empty() {
        return Err(Error::InvalidParameter("sweep has no ε values".into()));
    }
    if !(config.lattice_factor > 0.0) {
        return Err(Error::InvalidParameter("lattice factor must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        config
            .eps
            .par_iter()
            .map(|&eps| {
                let mut row = empty_row(eps, (config.lattice_factor / eps).ceil());
                if let Err(e) = run_entry(config, eps, &mut row) {
                    log::warn!("sweep entry ε = {eps} failed: {e}");
                    row.error = Some(e.to_string());
                }
                row
            })
            .collect()
    });
    let estimates = EstimateReport::from_rows(rows.iter().filter_map(|r| r.estimate.clone()).collect());
    Ok(SweepReport { rows, estimates })
}

pub const SWEEP_HEADER: &str =
    "eps,u0_Hs,v0_Hs,theta0_Hs,loglog_ratio,smallness_lhs,fitted_C_f,fitted_C_g,fitted_C_h,support_empty_flag";

pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &report.rows {
            let (u, v, th, ratio) = match &r.largeness {
                Some(l) => (l.u0_hs, l.v0_hs, l.theta0_hs, l.u0_ratio),
                None if r.support_empty => (0.0, 0.0, 0.0, 0.0),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            let lhs = r.smallness.as_ref().map_or(if r.support_empty { 0.0 } else { f64::NAN }, |s| s.lhs);
            let (cf, cg, ch) = match &r.estimate {
                Some(e) => (e.constants.f, e.constants.g, e.constants.h),
                None if r.support_empty => (0.0, 0.0, 0.0),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            writeln!(w, "{},{u},{v},{th},{ratio},{lhs},{cf},{cg},{ch},{}", r.eps, r.support_empty as u8)?;
        }
        Ok(())
    })
}
