use num_complex::Complex64;

use super::{duhamel_unchecked, PhysicalParams};
use crate::data::{assemble_background_initial, SeedFields};
use crate::error::{Error, Result};
use crate::spectral::jet::{accumulate_advection, accumulate_product, dealiased_from_physical};
use crate::spectral::{PhysicalJet, SpectralField, TorusGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One lattice mode where `n₀` or `r₀` is nonzero.
#[derive(Debug, Clone, Copy)]
struct Mode {
    flat: usize,
    /// `η|ξ|²`.
    a: f64,
    /// `ξ₁ + … + ξ_d`.
    xi_sum: f64,
    n0: Complex64,
    r0: Complex64,
}

/// Background `(U, V, Θ)` solving the linear system
/// `∂ₜU + νU = 0`, `∂ₜV − ηΔV + ∇Θ + 𝔸Θ = 0`, `∂ₜΘ + λΘ = 0`
/// from `(U₀, V₀, Θ₀)`, with every component of `V` equal to one scalar `n`.
#[derive(Debug, Clone)]
pub struct BackgroundFlow {
    params: PhysicalParams,
    seeds: SeedFields,
    u0: SpectralField,
    modes: Vec<Mode>,
    /// Parts of the background that only rescale in time.
    fixed: FixedParts,
}

#[derive(Debug, Clone)]
struct FixedParts {
    u0: PhysicalJet,
    theta0: PhysicalJet,
    /// `−(U₀·∇)U₀`, `−U₀·∇Θ₀`, `𝔸Θ₀`.
    uu0: SpectralField,
    ut0: SpectralField,
    a_theta0: SpectralField,
}

impl FixedParts {
    fn new(u0: &SpectralField, theta0: &SpectralField) -> Result<Self> {
        let grid = u0.grid();
        let d = grid.dim();
        let len = grid.len();
        let uj = PhysicalJet::of(u0);
        let tj = PhysicalJet::of(theta0);
        let mut uu = vec![vec![0.0; len]; d];
        for (i, out) in uu.iter_mut().enumerate() {
            accumulate_advection(out, -1.0, &uj, &uj, i);
        }
        let mut ut = vec![0.0; len];
        accumulate_advection(&mut ut, -1.0, &uj, &tj, 0);
        Ok(Self {
            uu0: dealiased_from_physical(grid, &uu)?,
            ut0: dealiased_from_physical(grid, &[ut])?,
            a_theta0: operator_a(theta0)?,
            u0: uj,
            theta0: tj,
        })
    }
}

fn scaled_jet(jet: &PhysicalJet, a: f64) -> PhysicalJet {
    let scale = |v: &Vec<f64>| v.iter().map(|x| a * x).collect::<Vec<_>>();
    PhysicalJet {
        values: jet.values.iter().map(scale).collect(),
        grads: jet.grads.iter().map(|g| g.iter().map(scale).collect()).collect(),
        zero: jet.zero,
    }
}

/// Background fields at one time; `V = (n, …, n)`.
#[derive(Debug, Clone)]
pub struct BackgroundState {
    pub t: f64,
    pub u: SpectralField,
    pub n: SpectralField,
    pub theta: SpectralField,
}

impl BackgroundState {
    /// `V` as a vector field.
    pub fn v(&self) -> SpectralField {
        self.n.replicate(self.u.grid().dim())
    }
}

/// Physical-space samples of the background and its first derivatives.
#[derive(Debug, Clone)]
pub struct BackgroundPhysical {
    pub u: PhysicalJet,
    pub n: PhysicalJet,
    pub theta: PhysicalJet,
}

/// `(f, g, h)` at time `t`.
#[derive(Debug, Clone)]
pub struct ForcingTriple {
    pub t: f64,
    pub f: SpectralField,
    pub g: SpectralField,
    pub h: SpectralField,
}

/// Everything the perturbation equations need from the background at one time.
#[derive(Debug, Clone)]
pub struct BackgroundSnapshot {
    pub state: BackgroundState,
    pub physical: BackgroundPhysical,
    pub forcing: ForcingTriple,
}

/// `𝔸r`: component `i` is `Σ_{j≠i} ∂_j r`; in 2D this is `(∂₂r, ∂₁r)`.
pub fn operator_a(r: &SpectralField) -> Result<SpectralField> {
    if !r.is_scalar() {
        return Err(Error::ComponentMismatch { expected: 1, got: r.n_components() });
    }
    let d = r.grid().dim();
    let parts = (0..d)
        .map(|i| {
            let coeffs: Vec<f64> = (0..d).map(|j| if j == i { 0.0 } else { 1.0 }).collect();
            r.directional_derivative(&coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralField::stack(&parts)
}

impl BackgroundFlow {
    pub fn new(params: PhysicalParams, seeds: SeedFields) -> Result<Self> {
        params.validate()?;
        let init = assemble_background_initial(&seeds)?;
        let grid = seeds.grid().clone();
        let n0 = seeds.n0.component(0);
        let r0 = seeds.r0.component(0);
        let modes = (0..grid.len())
            .filter(|&f| n0[f] != ZERO || r0[f] != ZERO)
            .map(|flat| {
                let xi = grid.xi_vec(flat);
                Mode {
                    flat,
                    a: params.eta * grid.xi_sq(flat),
                    xi_sum: xi[..grid.dim()].iter().sum(),
                    n0: n0[flat],
                    r0: r0[flat],
                }
            })
            .collect();
        let fixed = FixedParts::new(&init.u, &seeds.r0)?;
        Ok(Self { params, seeds, u0: init.u, modes, fixed })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn seeds(&self) -> &SeedFields {
        &self.seeds
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u0.grid()
    }

    pub fn is_zero(&self) -> bool {
        self.seeds.is_zero()
    }

    /// Number of lattice modes carrying `n` or `r`.
    pub fn support_mode_count(&self) -> usize {
        self.modes.len()
    }

    /// `(flat, η|ξ|², ξ₁+…+ξ_d, n̂₀, r̂₀)` for every mode in the support of `n₀` or `r₀`.
    pub(crate) fn mode_table(&self) -> impl Iterator<Item = (usize, f64, f64, Complex64, Complex64)> + '_ {
        self.modes.iter().map(|m| (m.flat, m.a, m.xi_sum, m.n0, m.r0))
    }

    /// `n̂(t, ξ) = e^{−η|ξ|²t} n̂₀ − i(ξ₁+…+ξ_d) D(t) r̂₀`.
    pub(crate) fn n_hat(&self, t: f64, a: f64, xi_sum: f64, n0: Complex64, r0: Complex64) -> Complex64 {
        let mut v = n0 * (-a * t).exp();
        if r0 != ZERO {
            let d = duhamel_unchecked(t, a, self.params.lambda);
            v -= Complex64::new(0.0, xi_sum * d) * r0;
        }
        v
    }

    /// Closed-form `(U, V, Θ)` at time `t`.
    pub fn evaluate(&self, t: f64) -> Result<BackgroundState> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let p = &self.params;
        let grid = self.grid();
        let mut n = SpectralField::scalar_zeros(grid);
        {
            let data = n.component_mut(0);
            for m in &self.modes {
                data[m.flat] = self.n_hat(t, m.a, m.xi_sum, m.n0, m.r0);
            }
        }
        Ok(BackgroundState {
            t,
            u: self.u0.scale((-p.nu * t).exp()),
            n,
            theta: self.seeds.r0.scale((-p.lambda * t).exp()),
        })
    }

    /// Background state, its physical samples, and the forcing at time `t`.
    pub fn snapshot(&self, t: f64) -> Result<BackgroundSnapshot> {
        let state = self.evaluate(t)?;
        let p = &self.params;
        let eu = (-p.nu * t).exp();
        let physical = BackgroundPhysical {
            u: scaled_jet(&self.fixed.u0, eu),
            n: PhysicalJet::of(&state.n),
            theta: scaled_jet(&self.fixed.theta0, (-p.lambda * t).exp()),
        };
        let forcing = self.forcing_from(&state, &physical)?;
        Ok(BackgroundSnapshot { state, physical, forcing })
    }

    /// `f = −(U·∇)U − (V·∇)V − V(∇·V)`, `g = −(U·∇)V − (V·∇)U + 𝔸Θ`,
    /// `h = −∇·V − (U·∇)Θ`, products dealiased.
    pub fn compute_forcing(&self, t: f64) -> Result<ForcingTriple> {
        Ok(self.snapshot(t)?.forcing)
    }
}

impl BackgroundFlow {
    fn forcing_from(&self, state: &BackgroundState, ph: &BackgroundPhysical) -> Result<ForcingTriple> {
        let grid = state.u.grid();
        let d = grid.dim();
        let len = grid.len();
        let p = &self.params;
        let t = state.t;
        let s_n = ph.n.derivative_sum(0);
        let n = &ph.n.values[0];

        // (V·∇)V_i = V(∇·V)_i = n Σ_j ∂_j n for every i, so f needs one transform
        // beyond the rescaled (U·∇)U.
        let mut nn = vec![0.0; len];
        accumulate_product(&mut nn, -2.0, n, &s_n);
        let mut g = vec![vec![0.0; len]; d];
        for (i, gi) in g.iter_mut().enumerate() {
            accumulate_advection(gi, -1.0, &ph.u, &ph.n, 0);
            accumulate_product(gi, -1.0, n, &ph.u.derivative_sum(i));
        }
        let nn = dealiased_from_physical(grid, &[nn])?;
        let mut f = self.fixed.uu0.scale((-2.0 * p.nu * t).exp());
        for i in 0..d {
            f.component_mut(i).iter_mut().zip(nn.component(0)).for_each(|(a, b)| *a += b);
        }
        let mut g = dealiased_from_physical(grid, &g)?;
        g.axpy((-p.lambda * t).exp(), &self.fixed.a_theta0)?;
        let mut h = self.fixed.ut0.scale((-(p.nu + p.lambda) * t).exp());
        let ones = vec![1.0; d];
        h.axpy(-1.0, &state.n.directional_derivative(&ones)?)?;
        Ok(ForcingTriple { t, f, g, h })
    }
}
