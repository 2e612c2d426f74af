//! The four workflows. Each writes its artifacts under an output directory.

use std::path::{Path, PathBuf};

use tcm_core::data::{
    assemble_background_initial, build_perturbation, largeness_report, smallness_condition_lhs,
    synthesize_seed_fields, InitialTriple, SeedFields,
};
use tcm_core::diagnostics::{
    bootstrap_monitor, energy_breakdown_at, epsilon_sweep, finalize_residuals, gronwall_envelope, kato_ponce_probe,
    lemma_bound_report, norm_series_including, write_diagnostics_csv, write_sweep_csv, BootstrapFlag,
    DiagnosticsRecord, EstimateReport, LemmaQuantities, ProbeReport, SweepConfig, SweepSimulation,
};
use tcm_core::flow::{write_norm_series_csv, BackgroundFlow};
use tcm_core::io::{atomic_write, write_report};
use tcm_core::solver::{integrate_perturbation_cached, BackgroundCache, OutputKind, PerturbationState};
use tcm_core::spectral::{save_snapshot, SpectralField, TorusGrid};
use tcm_core::{Error, Result};

use crate::config::{BackgroundKind, RunManifest, Workflow};

/// What a workflow produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn wrote(&mut self, path: PathBuf) {
        log::info!("wrote {}", path.display());
        self.files.push(path);
    }
}

pub fn execute(manifest: &RunManifest, workflow: Workflow, out: &Path, workers: usize) -> Result<Outcome> {
    std::fs::create_dir_all(out)?;
    match workflow {
        Workflow::BuildData => build_data(manifest, out),
        Workflow::Run => run(manifest, out),
        Workflow::Verify => verify(manifest, out),
        Workflow::Sweep => sweep(manifest, out, workers),
    }
}

fn grid_of(m: &RunManifest) -> Result<TorusGrid> {
    TorusGrid::with_dealias(m.dim(), m.grid.n, m.grid.l, m.grid.dealias_fraction)
}

fn seeds_of(m: &RunManifest, grid: &TorusGrid) -> Result<SeedFields> {
    let seeds = synthesize_seed_fields(grid, m.eps, &m.case)?;
    Ok(match m.background {
        BackgroundKind::Annulus => seeds,
        BackgroundKind::Zero => seeds.zeroed(),
    })
}

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn manifest_entries(m: &RunManifest) -> Vec<(String, String)> {
    vec![
        entry("dim", m.dim()),
        entry("eps", m.eps),
        entry("nu", m.params.nu),
        entry("eta", m.params.eta),
        entry("lambda", m.params.lambda),
        entry("s", m.s),
        entry("N", m.grid.n),
        entry("L", m.grid.l),
        entry("dealias_fraction", m.grid.dealias_fraction),
    ]
}

fn save(out: &mut Outcome, dir: &Path, name: &str, field: &SpectralField) -> Result<()> {
    let path = dir.join(format!("{name}.tcmf"));
    save_snapshot(&path, field)?;
    out.wrote(path);
    Ok(())
}

/// Seeds, initial fields and the largeness and smallness report.
pub fn build_data(m: &RunManifest, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = grid_of(m)?;
    let seeds = seeds_of(m, &grid)?;
    let background = assemble_background_initial(&seeds)?;
    let triple = InitialTriple::new(background, build_perturbation(&grid, m.perturbation)?)?;
    for (name, field) in [("m0", &seeds.m0), ("n0", &seeds.n0), ("r0", &seeds.r0)] {
        save(&mut out, dir, name, field)?;
    }
    for (name, field) in [("u0", triple.u0()), ("v0", triple.v0()), ("theta0", triple.theta0())] {
        save(&mut out, dir, name, &field)?;
    }
    let p = &triple.perturbation;
    for (name, field) in [("w0", &p.w), ("z0", &p.z), ("psi0", &p.psi)] {
        save(&mut out, dir, name, field)?;
    }
    let mut entries = manifest_entries(m);
    entries.push(entry("support_points", seeds.primary.lattice_points(grid.l()).len()));
    entries.push(entry("support_empty", seeds.primary.lattice_is_empty(grid.l())));
    let largeness = largeness_report(&triple, &seeds, m.s)?.entries();
    entries.extend(largeness.into_iter().filter(|(k, _)| k != "eps" && k != "s"));
    entries.extend(smallness_condition_lhs(p, &seeds, m.s, m.smallness_constants(), &m.params)?.entries());
    let path = dir.join("data_report.txt");
    write_report(&path, &entries)?;
    out.wrote(path);
    Ok(out)
}

fn worse(a: BootstrapFlag, b: BootstrapFlag) -> BootstrapFlag {
    let rank = |f: BootstrapFlag| f as u8;
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// Perturbation run with diagnostics, bootstrap margins and the envelope check.
pub fn run(m: &RunManifest, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = grid_of(m)?;
    let flow = BackgroundFlow::new(m.params, seeds_of(m, &grid)?)?;
    let p = build_perturbation(&grid, m.perturbation)?;
    let initial = PerturbationState::new(0.0, p.w, p.z, p.psi)?;
    let bootstrap = m.bootstrap()?;
    let snap_dir = dir.join("snapshots");
    if m.solver.snapshot_every.is_some() {
        std::fs::create_dir_all(&snap_dir)?;
    }

    let cache = BackgroundCache::new(&flow);
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut snapshots: Vec<PathBuf> = Vec::new();
    let mut observe = |state: &PerturbationState, kind: OutputKind| {
        if kind.diagnostic {
            let bg = cache.get(state.t)?;
            records.push(energy_breakdown_at(state, &bg, &m.params, m.s)?);
        }
        if kind.snapshot {
            for (name, field) in [("w", &state.w), ("z", &state.z), ("psi", &state.psi)] {
                let path = snap_dir.join(format!("t{:012.6}_{name}.tcmf", state.t));
                save_snapshot(&path, field)?;
                snapshots.push(path);
            }
        }
        Ok(())
    };
    let trajectory = integrate_perturbation_cached(&initial, &m.solver, &cache, &mut observe)?;
    out.warnings.extend(trajectory.warnings.iter().cloned());
    for path in snapshots {
        out.wrote(path);
    }

    if records.len() >= 2 {
        finalize_residuals(&mut records)?;
    }
    let mut worst = BootstrapFlag::WithinHalfM;
    for r in records.iter_mut() {
        let status = bootstrap_monitor(r, &bootstrap);
        r.margin = status.margin;
        worst = worse(worst, status.flag);
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let series = norm_series_including(&flow, m.s, &times, m.envelope_kappa)?;
    let envelope = gronwall_envelope(&records, &series, &bootstrap)?;
    for (r, e) in records.iter_mut().zip(&envelope.rows) {
        r.envelope = e.envelope;
    }

    let path = dir.join("diagnostics.csv");
    write_diagnostics_csv(&path, &records)?;
    out.wrote(path);
    let path = dir.join("norm_series.csv");
    write_norm_series_csv(&path, &series)?;
    out.wrote(path);

    let u0 = flow.evaluate(0.0)?;
    let scale = (u0.u.sobolev_norm_sq(m.s)? + u0.v().sobolev_norm_sq(m.s)? + u0.theta.sobolev_norm_sq(m.s)?).sqrt();
    let final_norm = records.last().map_or(f64::NAN, DiagnosticsRecord::norm);
    let peak = records.iter().map(DiagnosticsRecord::norm).fold(0.0, f64::max);
    let mut entries = manifest_entries(m);
    entries.extend([
        entry("dt", m.solver.dt),
        entry("t_end", m.solver.t_end),
        entry("steps", trajectory.steps),
        entry("rejections", trajectory.rejections),
        entry("final_dt", trajectory.dt),
        entry("resolution_warnings", trajectory.warnings.len()),
        entry("records", records.len()),
        entry("background_norm_t0", scale),
        entry("peak_norm", peak),
        entry("final_norm", final_norm),
        entry("final_norm_relative", if scale > 0.0 { final_norm / scale } else { f64::NAN }),
        entry("M", bootstrap.m()),
        entry("worst_bootstrap_flag", worst.as_str()),
        entry("envelope_dominates", envelope.all_dominated),
        entry("restoring_constant", envelope.restoring_constant),
    ]);
    let path = dir.join("run_report.txt");
    write_report(&path, &entries)?;
    out.wrote(path);
    Ok(out)
}

fn lemma_entries(prefix: &str, q: &LemmaQuantities) -> Vec<(String, String)> {
    LemmaQuantities::NAMES.iter().zip(q.as_array()).map(|(n, v)| entry(&format!("{prefix}_{n}"), v)).collect()
}

fn probe_entries(r: &ProbeReport) -> Vec<(String, String)> {
    let mut e = vec![entry("samples", r.samples), entry("s", r.s), entry("N", r.n)];
    for (name, st) in [("commutator", &r.commutator), ("bilinear", &r.bilinear)] {
        e.extend([
            entry(&format!("{name}_max"), st.max),
            entry(&format!("{name}_mean"), st.mean),
            entry(&format!("{name}_median"), st.median),
            entry(&format!("{name}_p90"), st.p90),
        ]);
    }
    e
}

/// Lemma report for the manifest's seeds and commutator probes at each probe size.
pub fn verify(m: &RunManifest, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = grid_of(m)?;
    let seeds = seeds_of(m, &grid)?;
    let row = lemma_bound_report(&seeds, &m.params, m.s, m.verify.horizon, &m.verify.integrals)?;
    let mut entries = manifest_entries(m);
    entries.push(entry("horizon", row.horizon));
    entries.extend(lemma_entries("measured", &row.measured));
    entries.extend(lemma_entries("cap", &row.caps));
    entries.extend(lemma_entries("constant", &row.constants));
    let path = dir.join("lemma_report.txt");
    write_report(&path, &entries)?;
    out.wrote(path);

    for &n in &m.verify.probe_n {
        let probe_grid = TorusGrid::new(m.dim(), n, m.verify.probe_l)?;
        let report = kato_ponce_probe(m.verify.probe_samples, m.s, &probe_grid, &m.verify.probe)?;
        let path = dir.join(format!("probe_N{n}.txt"));
        write_report(&path, &probe_entries(&report))?;
        out.wrote(path);
        let path = dir.join(format!("probe_N{n}.csv"));
        atomic_write(&path, |w| {
            use std::io::Write;
            writeln!(w, "sample,commutator_ratio,bilinear_ratio")?;
            for (k, (c, b)) in report.commutator_ratios.iter().zip(&report.bilinear_ratios).enumerate() {
                writeln!(w, "{k},{c},{b}")?;
            }
            Ok(())
        })?;
        out.wrote(path);
    }
    Ok(out)
}

pub const ESTIMATES_HEADER: &str = "eps,horizon,measured_U,measured_V,measured_Theta,measured_f,measured_g,measured_h,\
cap_U,cap_V,cap_Theta,cap_f,cap_g,cap_h";

fn write_estimates_csv(path: &Path, report: &EstimateReport) -> Result<()> {
    atomic_write(path, |w| {
        use std::io::Write;
        writeln!(w, "{ESTIMATES_HEADER}")?;
        for r in &report.rows {
            write!(w, "{},{}", r.eps, r.horizon)?;
            for v in r.measured.as_array().iter().chain(r.caps.as_array().iter()) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// `ε` sweep on grids sized per entry; entries run on up to `workers` threads.
pub fn sweep(m: &RunManifest, dir: &Path, workers: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut config = SweepConfig::new(m.sweep.eps.clone(), m.case.clone(), m.params, m.s);
    config.smallness = m.smallness_constants();
    config.integrals = m.verify.integrals;
    config.lattice_factor = m.sweep.lattice_factor;
    config.max_grid_points = m.sweep.max_grid_points;
    config.workers = workers;
    if m.sweep.simulate {
        let solver = tcm_core::solver::SolverConfig {
            dt: m.sweep.sim_dt,
            t_end: m.sweep.sim_t_end,
            diag_every: m.sweep.sim_t_end,
            snapshot_every: None,
            ..m.solver.clone()
        };
        config.simulation = Some(SweepSimulation { solver, bootstrap: m.bootstrap()? });
    }
    let report = epsilon_sweep(&config)?;
    for r in &report.rows {
        if let Some(e) = &r.error {
            out.warnings.push(format!("ε = {}: {e}", r.eps));
        }
    }
    let path = dir.join("sweep.csv");
    write_sweep_csv(&path, &report)?;
    out.wrote(path);
    let path = dir.join("sweep_estimates.csv");
    write_estimates_csv(&path, &report.estimates)?;
    out.wrote(path);
    let mut entries = vec![entry("entries", report.rows.len())];
    entries.extend(lemma_entries("slope", &report.estimates.slopes));
    entries.extend(lemma_entries("constant_spread", &report.estimates.constant_spread));
    for r in &report.rows {
        entries.push(entry(&format!("eps_{}_grid", r.eps), format!("{}x{}", r.n, r.l)));
        if let Some(f) = r.worst_flag {
            entries.push(entry(&format!("eps_{}_worst_flag", r.eps), f.as_str()));
        }
        if let Some(e) = &r.error {
            entries.push(entry(&format!("eps_{}_error", r.eps), e));
        }
    }
    let path = dir.join("sweep_report.txt");
    write_report(&path, &entries)?;
    out.wrote(path);
    if report.rows.iter().all(|r| r.error.is_some()) {
        return Err(Error::Unresolvable("every sweep entry failed".into()));
    }
    Ok(out)
}
