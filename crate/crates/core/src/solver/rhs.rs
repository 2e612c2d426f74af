//! Right-hand sides with every quadratic term accumulated in physical space.

use crate::error::Result;
use crate::flow::{BackgroundSnapshot, PhysicalParams};
use crate::spectral::jet::{accumulate_advection, accumulate_product, dealiased_from_physical};
use crate::spectral::{PhysicalJet, SpectralField};

/// Switches for groups of terms; everything is on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermMask {
    /// Diagonal damping and diffusion `−νw`, `ηΔz`, `−λψ`.
    pub linear: bool,
    /// Linear coupling `−∇ψ`, `−∇·z`.
    pub coupling: bool,
    /// Terms quadratic in the evolved fields.
    pub nonlinear: bool,
    /// Terms bilinear in background and perturbation.
    pub background: bool,
    /// The forcing `(f, g, h)`.
    pub forcing: bool,
}

impl Default for TermMask {
    fn default() -> Self {
        Self { linear: true, coupling: true, nonlinear: true, background: true, forcing: true }
    }
}

impl TermMask {
    /// Only the diagonal linear terms.
    pub fn linear_only() -> Self {
        Self { linear: true, coupling: false, nonlinear: false, background: false, forcing: false }
    }
}

/// Three evolved fields: a divergence-free vector, a vector, and a scalar.
#[derive(Debug, Clone)]
pub struct Triple {
    pub x: SpectralField,
    pub y: SpectralField,
    pub s: SpectralField,
}

impl Triple {
    pub fn zeros_like(other: &Triple) -> Triple {
        Triple { x: other.x.scale(0.0), y: other.y.scale(0.0), s: other.s.scale(0.0) }
    }

    pub fn axpy(&mut self, a: f64, other: &Triple) -> Result<()> {
        self.x.axpy(a, &other.x)?;
        self.y.axpy(a, &other.y)?;
        self.s.axpy(a, &other.s)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.s.is_finite()
    }

    pub fn project(&mut self) -> Result<()> {
        self.x = self.x.leray_project()?;
        Ok(())
    }
}

/// Nonlinear part of a right-hand side and the largest transport speed seen.
pub struct RhsOutput {
    pub value: Triple,
    pub speed: f64,
}

fn pointwise_speed(a: &[Vec<f64>], b: Option<&[Vec<f64>]>, p: usize) -> f64 {
    let mut s2 = 0.0;
    for (i, ai) in a.iter().enumerate() {
        let v = ai[p] + b.map_or(0.0, |b| b[i][p]);
        s2 += v * v;
    }
    s2.sqrt()
}

/// Largest `max(|A + a|, |B + b|, 1)` over the grid, where the unit floor is the
/// speed of the `∇ψ`, `∇·z` coupling waves.
fn max_speed(u: (&PhysicalJet, Option<&PhysicalJet>), v: (&[Vec<f64>], Option<&[Vec<f64>]>)) -> f64 {
    let len = u.0.values[0].len();
    let mut best: f64 = 1.0;
    for p in 0..len {
        let su = pointwise_speed(&u.0.values, u.1.map(|j| j.values.as_slice()), p);
        let sv = pointwise_speed(v.0, v.1, p);
        best = best.max(su).max(sv);
    }
    best
}

/// `(w, z, ψ)` equations without the diagonal linear part:
/// `P[f − (w·∇)w − (z·∇)z − z(∇·z) − (U·∇)w − (w·∇)U − (V·∇)z − (z·∇)V − z(∇·V) − V(∇·z)]`,
/// `g − (w·∇)z − (z·∇)w − ∇ψ − (U·∇)z − (w·∇)V − (V·∇)w − (z·∇)U`,
/// `h − (w·∇)ψ − ∇·z − (w·∇)Θ − (U·∇)ψ`.
pub fn perturbation_nonlinear(state: &Triple, bg: &BackgroundSnapshot, mask: TermMask) -> Result<RhsOutput> {
    let grid = state.x.grid().clone();
    bg.state.u.same_grid(&state.x)?;
    let d = grid.dim();
    let len = grid.len();
    let w = PhysicalJet::of(&state.x);
    let z = PhysicalJet::of(&state.y);
    let psi = PhysicalJet::of(&state.s);
    let u = &bg.physical.u;
    let nj = &bg.physical.n;
    let theta = &bg.physical.theta;
    let n = &nj.values[0];
    let div_z = z.divergence();
    let sum_n = nj.derivative_sum(0);
    let v_values: Vec<Vec<f64>> = vec![n.clone(); d];

    let mut dx = vec![vec![0.0; len]; d];
    let mut dy = vec![vec![0.0; len]; d];
    let mut ds = vec![0.0; len];
    for i in 0..d {
        if mask.nonlinear {
            accumulate_advection(&mut dx[i], -1.0, &w, &w, i);
            accumulate_advection(&mut dx[i], -1.0, &z, &z, i);
            accumulate_product(&mut dx[i], -1.0, &z.values[i], &div_z);
            accumulate_advection(&mut dy[i], -1.0, &w, &z, i);
            accumulate_advection(&mut dy[i], -1.0, &z, &w, i);
        }
        if mask.background {
            accumulate_advection(&mut dx[i], -1.0, u, &w, i);
            accumulate_advection(&mut dx[i], -1.0, &w, u, i);
            if !z.zero {
                accumulate_product(&mut dx[i], -1.0, n, &z.derivative_sum(i));
            }
            accumulate_advection(&mut dx[i], -1.0, &z, nj, 0);
            accumulate_product(&mut dx[i], -1.0, &z.values[i], &sum_n);
            accumulate_product(&mut dx[i], -1.0, n, &div_z);

            accumulate_advection(&mut dy[i], -1.0, u, &z, i);
            accumulate_advection(&mut dy[i], -1.0, &w, nj, 0);
            if !w.zero {
                accumulate_product(&mut dy[i], -1.0, n, &w.derivative_sum(i));
            }
            accumulate_advection(&mut dy[i], -1.0, &z, u, i);
        }
    }
    if mask.nonlinear {
        accumulate_advection(&mut ds, -1.0, &w, &psi, 0);
    }
    if mask.background {
        accumulate_advection(&mut ds, -1.0, &w, theta, 0);
        accumulate_advection(&mut ds, -1.0, u, &psi, 0);
    }

    let quadratic = mask.nonlinear || mask.background;
    let mut out = if quadratic {
        Triple {
            x: dealiased_from_physical(&grid, &dx)?,
            y: dealiased_from_physical(&grid, &dy)?,
            s: dealiased_from_physical(&grid, &[ds])?,
        }
    } else {
        Triple::zeros_like(state)
    };
    if mask.forcing {
        out.x.axpy(1.0, &bg.forcing.f)?;
        out.y.axpy(1.0, &bg.forcing.g)?;
        out.s.axpy(1.0, &bg.forcing.h)?;
    }
    if mask.coupling {
        out.y.axpy(-1.0, &state.s.gradient()?)?;
        out.s.axpy(-1.0, &state.y.divergence()?)?;
    }
    out.project()?;
    let speed = max_speed((u, Some(&w)), (&v_values, Some(&z.values)));
    Ok(RhsOutput { value: out, speed })
}

/// `(u, v, θ)` equations without the diagonal linear part:
/// `P[−(u·∇)u − (v·∇)v − v(∇·v)]`, `−(u·∇)v − (v·∇)u − ∇θ`, `−(u·∇)θ − ∇·v`.
pub fn full_nonlinear(state: &Triple, mask: TermMask) -> Result<RhsOutput> {
    let grid = state.x.grid().clone();
    let d = grid.dim();
    let len = grid.len();
    let u = PhysicalJet::of(&state.x);
    let v = PhysicalJet::of(&state.y);
    let th = PhysicalJet::of(&state.s);
    let div_v = v.divergence();
    let mut dx = vec![vec![0.0; len]; d];
    let mut dy = vec![vec![0.0; len]; d];
    let mut ds = vec![0.0; len];
    if mask.nonlinear {
        for i in 0..d {
            accumulate_advection(&mut dx[i], -1.0, &u, &u, i);
            accumulate_advection(&mut dx[i], -1.0, &v, &v, i);
            accumulate_product(&mut dx[i], -1.0, &v.values[i], &div_v);
            accumulate_advection(&mut dy[i], -1.0, &u, &v, i);
            accumulate_advection(&mut dy[i], -1.0, &v, &u, i);
        }
        accumulate_advection(&mut ds, -1.0, &u, &th, 0);
    }
    let mut out = if mask.nonlinear {
        Triple {
            x: dealiased_from_physical(&grid, &dx)?,
            y: dealiased_from_physical(&grid, &dy)?,
            s: dealiased_from_physical(&grid, &[ds])?,
        }
    } else {
        Triple::zeros_like(state)
    };
    if mask.coupling {
        out.y.axpy(-1.0, &state.s.gradient()?)?;
        out.s.axpy(-1.0, &state.y.divergence()?)?;
    }
    out.project()?;
    let speed = max_speed((&u, None), (&v.values, None));
    Ok(RhsOutput { value: out, speed })
}

/// Adds the diagonal linear terms `−νx`, `ηΔy`, `−λs` to `rhs`.
pub fn add_linear(rhs: &mut Triple, state: &Triple, params: &PhysicalParams) -> Result<()> {
    rhs.x.axpy(-params.nu, &state.x)?;
    rhs.y.axpy(params.eta, &state.y.laplacian())?;
    rhs.s.axpy(-params.lambda, &state.s)
}
