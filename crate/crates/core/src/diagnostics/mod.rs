//! Energy bookkeeping, bootstrap and envelope checks, lemma bounds, estimate
//! probes, and `ε` sweeps.

mod bootstrap;
mod energy;
mod estimates;
mod probe;
mod sweep;

use std::io::Write;
use std::path::Path;

pub use bootstrap::{
    bootstrap_monitor, gronwall_envelope, BootstrapConfig, BootstrapFlag, BootstrapStatus, EnvelopeReport,
    EnvelopeRow,
};
pub use energy::{energy_breakdown, energy_breakdown_at, finalize_residuals, DiagnosticsRecord, ResidualKind};
pub use estimates::{
    analytic_caps, decay_rates, fit_slope, integration_horizon, lemma_bound_report, norm_series_including,
    DecayRates, EstimateReport, EstimateRow, IntegralOptions, LemmaQuantities,
};
pub use probe::{kato_ponce_probe, probe_ratios, ProbeOptions, ProbeReport, RatioStats};
pub use sweep::{
    epsilon_sweep, fft_friendly, sweep_grid, write_sweep_csv, SweepConfig, SweepReport, SweepRow, SweepSimulation,
    SWEEP_HEADER,
};

use crate::error::Result;
use crate::io::atomic_write;

pub const DIAGNOSTICS_HEADER: &str =
    "t,w_Hs,z_Hs,z_Hs1,psi_Hs,diss_w,diss_z,diss_psi,I1,I2,I3,I4,I5,I6,I7,residual,margin,envelope";

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "{DIAGNOSTICS_HEADER}")?;
        for r in records {
            write!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.t, r.w_hs, r.z_hs, r.z_hs1, r.psi_hs, r.diss_w, r.diss_z, r.diss_psi
            )?;
            for v in r.i {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{},{},{}", r.residual, r.margin, r.envelope)?;
        }
        Ok(())
    })
}
