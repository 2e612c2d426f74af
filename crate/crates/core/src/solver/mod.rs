//! Time integration of the perturbation system and of the full system.

mod rhs;
mod stepper;

pub use rhs::{add_linear, full_nonlinear, perturbation_nonlinear, RhsOutput, TermMask, Triple};
pub use stepper::{
    advance_full, advance_perturbation, full_rhs, integrate_full, integrate_perturbation, integrate_perturbation_cached,
    perturbation_rhs,
    BackgroundCache, OutputKind, Trajectory,
};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, DEFAULT_TAIL_THRESHOLD};

/// `(w, z, ψ)` at time `t`; `w` is divergence-free.
#[derive(Debug, Clone)]
pub struct PerturbationState {
    pub t: f64,
    pub w: SpectralField,
    pub z: SpectralField,
    pub psi: SpectralField,
}

/// `(u, v, θ)` at time `t`; `u` is divergence-free.
#[derive(Debug, Clone)]
pub struct FullState {
    pub t: f64,
    pub u: SpectralField,
    pub v: SpectralField,
    pub theta: SpectralField,
}

impl PerturbationState {
    pub fn new(t: f64, w: SpectralField, z: SpectralField, psi: SpectralField) -> Result<Self> {
        check_shapes(&w, &z, &psi)?;
        Ok(Self { t, w, z, psi })
    }

    pub fn zeros(grid: &crate::spectral::TorusGrid) -> Self {
        Self {
            t: 0.0,
            w: SpectralField::vector_zeros(grid),
            z: SpectralField::vector_zeros(grid),
            psi: SpectralField::scalar_zeros(grid),
        }
    }

    pub(crate) fn triple(&self) -> Triple {
        Triple { x: self.w.clone(), y: self.z.clone(), s: self.psi.clone() }
    }

    pub(crate) fn from_triple(t: f64, v: Triple) -> Self {
        Self { t, w: v.x, z: v.y, psi: v.s }
    }

    /// `‖(w, z, ψ)‖_{H^s}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        Ok((self.w.sobolev_norm_sq(s)? + self.z.sobolev_norm_sq(s)? + self.psi.sobolev_norm_sq(s)?).sqrt())
    }
}

impl FullState {
    pub fn new(t: f64, u: SpectralField, v: SpectralField, theta: SpectralField) -> Result<Self> {
        check_shapes(&u, &v, &theta)?;
        Ok(Self { t, u, v, theta })
    }

    pub(crate) fn triple(&self) -> Triple {
        Triple { x: self.u.clone(), y: self.v.clone(), s: self.theta.clone() }
    }

    pub(crate) fn from_triple(t: f64, v: Triple) -> Self {
        Self { t, u: v.x, v: v.y, theta: v.s }
    }
}

fn check_shapes(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> Result<()> {
    a.same_grid(b)?;
    a.same_grid(c)?;
    let d = a.grid().dim();
    for (f, want) in [(a, d), (b, d), (c, 1)] {
        if f.n_components() != want {
            return Err(Error::ComponentMismatch { expected: want, got: f.n_components() });
        }
    }
    Ok(())
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical RK4 in the integrating-factor variables of the diagonal linear part.
    IntegratingFactorRk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub tail_threshold: f64,
    /// Spacing of observer calls (diagnostic records).
    pub diag_every: f64,
    /// Spacing of snapshot requests; `None` disables snapshots.
    pub snapshot_every: Option<f64>,
    pub cfl: f64,
    /// Maximum number of step halvings after CFL rejections.
    pub max_halvings: u32,
    pub mask: TermMask,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 10.0,
            scheme: Scheme::IntegratingFactorRk4,
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
            diag_every: 0.1,
            snapshot_every: None,
            cfl: 0.5,
            max_halvings: 20,
            mask: TermMask::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("Δt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be non-negative, got {}", self.t_end)));
        }
        if !(self.diag_every > 0.0) {
            return Err(Error::InvalidParameter("diagnostic cadence must be positive".into()));
        }
        if let Some(s) = self.snapshot_every {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter("snapshot cadence must be positive".into()));
            }
        }
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidParameter("CFL constant must be positive".into()));
        }
        if !(self.tail_threshold > 0.0) {
            return Err(Error::InvalidParameter("tail threshold must be positive".into()));
        }
        Ok(())
    }

    /// Output times `k · diag_every` below `t_end`, then `t_end`, starting at 0.
    pub fn output_times(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut k = 1u64;
        loop {
            let t = k as f64 * self.diag_every;
            if t >= self.t_end * (1.0 - 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
        if self.t_end > 0.0 {
            out.push(self.t_end);
        }
        out
    }
}
