//! The ansatz `‖(w,z,ψ)‖_{H^s} ≤ M` and the exponential envelope.

use crate::error::{Error, Result};
use crate::flow::{NormSeries, PhysicalParams};

use super::energy::DiagnosticsRecord;

/// Unnamed constants of the energy estimate, with the rate they are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// `min{ν, η, λ}`.
    pub min_rate: f64,
}

impl BootstrapConfig {
    pub fn new(c2: f64, c3: f64, c4: f64, params: &PhysicalParams) -> Result<Self> {
        for (name, c) in [("C2", c2), ("C3", c3), ("C4", c4)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {c}")));
            }
        }
        Ok(Self { c2, c3, c4, min_rate: params.min_rate() })
    }

    /// All constants equal to one.
    pub fn unit(params: &PhysicalParams) -> Self {
        Self { c2: 1.0, c3: 1.0, c4: 1.0, min_rate: params.min_rate() }
    }

    /// `δ = 1/(4C₂)`.
    pub fn delta(&self) -> f64 {
        1.0 / (4.0 * self.c2)
    }

    /// `M = min{ν,η,λ}/(2C₂)`.
    pub fn m(&self) -> f64 {
        self.min_rate / (2.0 * self.c2)
    }

    /// The alternative closing threshold `min{ν,η,λ}/(4C₃)`.
    pub fn c3_threshold(&self) -> f64 {
        self.min_rate / (4.0 * self.c3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapFlag {
    WithinHalfM,
    WithinM,
    Violated,
}

impl BootstrapFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BootstrapFlag::WithinHalfM => "within_half_M",
            BootstrapFlag::WithinM => "within_M",
            BootstrapFlag::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapStatus {
    pub margin: f64,
    pub flag: BootstrapFlag,
    pub within_c3_threshold: bool,
}

/// Classifies the record's norm against `M/2` and `M`; both bounds are closed.
pub fn bootstrap_monitor(record: &DiagnosticsRecord, config: &BootstrapConfig) -> BootstrapStatus {
    let norm = record.norm();
    let m = config.m();
    let flag = if norm <= 0.5 * m {
        BootstrapFlag::WithinHalfM
    } else if norm <= m {
        BootstrapFlag::WithinM
    } else {
        BootstrapFlag::Violated
    };
    BootstrapStatus { margin: m - norm, flag, within_c3_threshold: norm <= config.c3_threshold() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub t: f64,
    pub norm: f64,
    pub envelope: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub rows: Vec<EnvelopeRow>,
    pub all_dominated: bool,
    /// Smallest common value of `C₃ = C₄` for which the envelope dominates every
    /// record; infinite when none up to `1e12` does.
    pub restoring_constant: f64,
}

/// `e^{2C₃A(t)} (‖X₀‖ + 2C₄B(t))` from the growth integral `A` and forcing integral `B`.
fn envelope_value(c3: f64, c4: f64, x0: f64, growth: f64, forcing: f64) -> f64 {
    (2.0 * c3 * growth).exp() * (x0 + 2.0 * c4 * forcing)
}

/// Grönwall envelope at each record time.
///
/// `series` must contain every record time; its running integrals supply
/// `∫(‖U‖+‖V‖+‖Θ‖+‖V‖²)_{H^{s+1}}` and `∫(‖f‖+‖g‖+‖h‖)_{H^s}`.
pub fn gronwall_envelope(
    records: &[DiagnosticsRecord],
    series: &NormSeries,
    config: &BootstrapConfig,
) -> Result<EnvelopeReport> {
    let Some(first) = records.first() else {
        return Ok(EnvelopeReport { rows: Vec::new(), all_dominated: true, restoring_constant: 0.0 });
    };
    let x0 = first.norm();
    let mut inputs = Vec::with_capacity(records.len());
    for r in records {
        let tol = 1e-12 * r.t.abs().max(1.0);
        let row = series.rows.iter().find(|row| (row.t - r.t).abs() <= tol).ok_or_else(|| {
            Error::InvalidParameter(format!("norm series has no entry at diagnostic time {}", r.t))
        })?;
        let growth = row.cum_u + row.cum_v + row.cum_theta + row.cum_v_sq;
        let forcing = row.cum_f + row.cum_g + row.cum_h;
        inputs.push((r.t, r.norm(), growth, forcing));
    }
    let dominated_by = |c3: f64, c4: f64| {
        inputs.iter().all(|&(_, norm, g, f)| norm <= envelope_value(c3, c4, x0, g, f))
    };
    let rows: Vec<EnvelopeRow> = inputs
        .iter()
        .map(|&(t, norm, g, f)| {
            let envelope = envelope_value(config.c3, config.c4, x0, g, f);
            EnvelopeRow { t, norm, envelope, dominated: norm <= envelope }
        })
        .collect();
    let all_dominated = rows.iter().all(|r| r.dominated);
    let restoring_constant = smallest_restoring(|c| dominated_by(c, c));
    Ok(EnvelopeReport { rows, all_dominated, restoring_constant })
}

/// Smallest `c` with `ok(c)`, for a predicate monotone in `c`, by bisection on a log scale.
fn smallest_restoring(ok: impl Fn(f64) -> bool) -> f64 {
    const HI: f64 = 1e12;
    if !ok(HI) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (1e-12f64, HI);
    if ok(lo) {
        return lo;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    hi
}
