//! Term-by-term reconstruction of the `H^s` energy balance of the perturbation.

use crate::error::{Error, Result};
use crate::flow::{BackgroundFlow, BackgroundSnapshot, PhysicalParams};
use crate::solver::PerturbationState;
use crate::spectral::jet::accumulate_advection;
use crate::spectral::{PhysicalJet, SpectralField, TorusGrid};

/// How the time derivative behind `residual` was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// Not computed yet.
    Pending,
    /// Three-point centered difference.
    Centered,
    /// One-sided difference at the first or last record.
    OneSided,
}

/// Norms, dissipations and the seven transfer terms at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub w_hs: f64,
    pub z_hs: f64,
    pub z_hs1: f64,
    pub psi_hs: f64,
    /// `ν‖w‖²_{H^s}`.
    pub diss_w: f64,
    /// `η‖∇z‖²_{H^s}`.
    pub diss_z: f64,
    /// `λ‖ψ‖²_{H^s}`.
    pub diss_psi: f64,
    /// `I₁ … I₇`.
    pub i: [f64; 7],
    /// `⟨J^s∇ψ, J^s z⟩ + ⟨J^s∇·z, J^sψ⟩`, zero up to round-off.
    pub coupling: f64,
    /// `|d/dt ½‖(w,z,ψ)‖²_{H^s} + dissipation − ΣIᵢ|`; NaN until finalized.
    pub residual: f64,
    pub residual_kind: ResidualKind,
    /// `M − ‖(w,z,ψ)‖_{H^s}`; NaN until a monitor fills it in.
    pub margin: f64,
    /// Grönwall envelope; NaN until computed.
    pub envelope: f64,
}

impl DiagnosticsRecord {
    /// `‖(w, z, ψ)‖_{H^s}`.
    pub fn norm(&self) -> f64 {
        (self.w_hs * self.w_hs + self.z_hs * self.z_hs + self.psi_hs * self.psi_hs).sqrt()
    }

    /// `½‖(w, z, ψ)‖²_{H^s}`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.w_hs * self.w_hs + self.z_hs * self.z_hs + self.psi_hs * self.psi_hs)
    }

    pub fn dissipation(&self) -> f64 {
        self.diss_w + self.diss_z + self.diss_psi
    }

    pub fn transfer(&self) -> f64 {
        self.i.iter().sum()
    }
}

/// `⟨J^s P, J^s target⟩` for a quadratic term `P` given by physical samples.
fn pair(grid: &TorusGrid, comps: &[Vec<f64>], target: &SpectralField, s: f64) -> Result<f64> {
    if comps.iter().all(|c| c.iter().all(|&v| v == 0.0)) {
        return Ok(0.0);
    }
    SpectralField::from_physical(grid, comps)?.sobolev_inner(target, s)
}

fn zeros(grid: &TorusGrid, m: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; grid.len()]; m]
}

/// `(a·∇)b` in physical space, one array per component of `b`.
fn advect(grid: &TorusGrid, a: &PhysicalJet, b: &PhysicalJet) -> Vec<Vec<f64>> {
    let mut out = zeros(grid, b.values.len());
    for (c, o) in out.iter_mut().enumerate() {
        accumulate_advection(o, 1.0, a, b, c);
    }
    out
}

/// `x · d` componentwise for a vector `x` and a scalar array `d`.
fn times(x: &PhysicalJet, d: &[f64]) -> Vec<Vec<f64>> {
    x.values.iter().map(|xc| xc.iter().zip(d).map(|(a, b)| a * b).collect()).collect()
}

fn add(mut a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for (x, y) in a.iter_mut().zip(b) {
        x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
    }
    a
}

/// The jet of `V = (n, …, n)`.
fn replicate_jet(n: &PhysicalJet, d: usize) -> PhysicalJet {
    PhysicalJet {
        values: vec![n.values[0].clone(); d],
        grads: vec![n.grads[0].clone(); d],
        zero: n.zero,
    }
}

/// `−⟨[J^s, a·∇]X, J^sX⟩` for one evolved field `X`.
fn commutator_term(
    grid: &TorusGrid,
    a: &PhysicalJet,
    x: &SpectralField,
    xj: &PhysicalJet,
    jsx: &SpectralField,
    jsxj: &PhysicalJet,
    s: f64,
) -> Result<f64> {
    if a.zero || xj.zero {
        return Ok(0.0);
    }
    let whole = pair(grid, &advect(grid, a, xj), x, s)?;
    let transported = pair(grid, &advect(grid, a, jsxj), jsx, 0.0)?;
    Ok(-(whole - transported))
}

/// Energy breakdown of `state` against the background snapshot at the same time.
pub fn energy_breakdown_at(
    state: &PerturbationState,
    bg: &BackgroundSnapshot,
    params: &PhysicalParams,
    s: f64,
) -> Result<DiagnosticsRecord> {
    let grid = state.w.grid().clone();
    bg.state.u.same_grid(&state.w)?;
    if (bg.state.t - state.t).abs() > 1e-12 * state.t.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "background at t = {} used for a state at t = {}",
            bg.state.t, state.t
        )));
    }
    let d = grid.dim();
    let (w, z, psi) = (&state.w, &state.z, &state.psi);
    let (jsw, jsz, jspsi) = (w.js_apply(s), z.js_apply(s), psi.js_apply(s));
    let wj = PhysicalJet::of(w);
    let zj = PhysicalJet::of(z);
    let psij = PhysicalJet::of(psi);
    let jswj = PhysicalJet::of(&jsw);
    let jszj = PhysicalJet::of(&jsz);
    let jspsij = PhysicalJet::of(&jspsi);
    let u = &bg.physical.u;
    let theta = &bg.physical.theta;
    let v = replicate_jet(&bg.physical.n, d);
    let div_z = zj.divergence();
    let div_v = v.divergence();

    let fields = [(w, &wj, &jsw, &jswj), (z, &zj, &jsz, &jszj), (psi, &psij, &jspsi, &jspsij)];
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for (x, xj, jsx, jsxj) in fields {
        i1 += commutator_term(&grid, &wj, x, xj, jsx, jsxj, s)?;
        i2 += commutator_term(&grid, u, x, xj, jsx, jsxj, s)?;
    }

    let i3 = -pair(&grid, &add(advect(&grid, &zj, &zj), times(&zj, &div_z)), w, s)?
        - pair(&grid, &advect(&grid, &zj, &wj), z, s)?;
    let i4 = -pair(&grid, &advect(&grid, &wj, u), w, s)?
        - pair(&grid, &advect(&grid, &zj, u), z, s)?
        - pair(&grid, &advect(&grid, &wj, theta), psi, s)?;
    let i5 = -pair(&grid, &add(advect(&grid, &v, &zj), times(&v, &div_z)), w, s)?
        - pair(&grid, &advect(&grid, &v, &wj), z, s)?;
    let i6 = -pair(&grid, &add(advect(&grid, &zj, &v), times(&zj, &div_v)), w, s)?
        - pair(&grid, &advect(&grid, &wj, &v), z, s)?;
    let f = &bg.forcing;
    let i7 = f.f.sobolev_inner(w, s)? + f.g.sobolev_inner(z, s)? + f.h.sobolev_inner(psi, s)?;
    let coupling = psi.gradient()?.sobolev_inner(z, s)? + z.divergence()?.sobolev_inner(psi, s)?;

    let w_hs2 = w.sobolev_norm_sq(s)?;
    let z_hs2 = z.sobolev_norm_sq(s)?;
    let psi_hs2 = psi.sobolev_norm_sq(s)?;
    let record = DiagnosticsRecord {
        t: state.t,
        w_hs: w_hs2.sqrt(),
        z_hs: z_hs2.sqrt(),
        z_hs1: z.sobolev_norm_sq(s + 1.0)?.sqrt(),
        psi_hs: psi_hs2.sqrt(),
        diss_w: params.nu * w_hs2,
        diss_z: params.eta * z.gradient_norm_sq(s)?,
        diss_psi: params.lambda * psi_hs2,
        i: [i1, i2, i3, i4, i5, i6, i7],
        coupling,
        residual: f64::NAN,
        residual_kind: ResidualKind::Pending,
        margin: f64::NAN,
        envelope: f64::NAN,
    };
    if !record.i.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(format!("energy transfer terms at t = {}", state.t)));
    }
    Ok(record)
}

/// Energy breakdown of `state`, evaluating the background at `state.t`.
pub fn energy_breakdown(state: &PerturbationState, flow: &BackgroundFlow, s: f64) -> Result<DiagnosticsRecord> {
    let bg = flow.snapshot(state.t)?;
    energy_breakdown_at(state, &bg, flow.params(), s)
}

/// Derivative of `y` at `x[k]` from the Lagrange interpolant through three nodes.
fn three_point(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let p = x[at];
    let mut acc = 0.0;
    for j in 0..3 {
        // d/dx of the j-th basis polynomial at p.
        let mut denom = 1.0;
        for m in 0..3 {
            if m != j {
                denom *= x[j] - x[m];
            }
        }
        let mut num = 0.0;
        for m in 0..3 {
            if m == j {
                continue;
            }
            let mut prod = 1.0;
            for q in 0..3 {
                if q != j && q != m {
                    prod *= p - x[q];
                }
            }
            num += prod;
        }
        acc += y[j] * num / denom;
    }
    acc
}

/// Fills in `residual` for records sorted by time.
///
/// Interior records use the centered three-point derivative of `½‖(w,z,ψ)‖²_{H^s}`;
/// the first and last use one-sided three-point formulas (two-point when only two
/// records exist) and are flagged [`ResidualKind::OneSided`].
pub fn finalize_residuals(records: &mut [DiagnosticsRecord]) -> Result<()> {
    let n = records.len();
    if n < 2 {
        return Err(Error::MissingData(format!(
            "the energy residual needs at least two diagnostic records, got {n}"
        )));
    }
    if records.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidParameter("diagnostic records must be strictly increasing in t".into()));
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.energy()).collect();
    for k in 0..n {
        let (de, kind) = if n == 2 {
            ((e[1] - e[0]) / (t[1] - t[0]), ResidualKind::OneSided)
        } else if k == 0 {
            (three_point([t[0], t[1], t[2]], [e[0], e[1], e[2]], 0), ResidualKind::OneSided)
        } else if k == n - 1 {
            (three_point([t[k - 2], t[k - 1], t[k]], [e[k - 2], e[k - 1], e[k]], 2), ResidualKind::OneSided)
        } else {
            (three_point([t[k - 1], t[k], t[k + 1]], [e[k - 1], e[k], e[k + 1]], 1), ResidualKind::Centered)
        };
        let r = &mut records[k];
        r.residual = (de + r.dissipation() - r.transfer()).abs();
        r.residual_kind = kind;
    }
    Ok(())
}
