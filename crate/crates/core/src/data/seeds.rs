//! Seed fields, their amplitude laws, and the assembled initial data.

use num_complex::Complex64;

use super::support::{all_pairs, CutoffSpec, Region, SupportSet};
use crate::error::{Error, Result};
use crate::spectral::random::{band_limited_scalar, band_limited_vector, divergence_free, BandSpec};
use crate::spectral::{SpectralField, TorusGrid};

/// Which family of seed data to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataCase {
    /// Scalar stream function `m̄₀` on the `[1,2]` set, `r̄₀` on the `[ε,2ε]` set.
    TwoD,
    /// Vector potential `m₀` with the given pair constraints (0-based indices).
    ThreeD { pairs: Vec<(usize, usize)> },
}

impl DataCase {
    pub fn three_d_as_written() -> Self {
        DataCase::ThreeD { pairs: all_pairs(3) }
    }

    pub fn dim(&self) -> usize {
        match self {
            DataCase::TwoD => 2,
            DataCase::ThreeD { .. } => 3,
        }
    }
}

/// `ln ln(1/ε)`, defined for `0 < ε < e^{-1}`.
pub fn loglog(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < (-1.0f64).exp()) {
        return Err(Error::InvalidParameter(format!(
            "ε < e^{{-1}} required for log log positivity (got ε = {eps})"
        )));
    }
    Ok((1.0 / eps).ln().ln())
}

/// Plateau amplitudes of `m̂₀`, `n̂₀`, `r̂₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub m: f64,
    pub n: f64,
    pub r: f64,
}

pub fn amplitudes(eps: f64, dim: usize) -> Result<Amplitudes> {
    let ll = loglog(eps)?;
    match dim {
        3 => Ok(Amplitudes { m: ll / eps, n: ll.sqrt() / eps, r: ll.sqrt() / eps }),
        2 => Ok(Amplitudes { m: ll / eps.sqrt(), n: ll.sqrt() / eps.sqrt(), r: ll.sqrt() / eps }),
        _ => Err(Error::InvalidParameter(format!("dimension must be 2 or 3, got {dim}"))),
    }
}

/// The seed triple `(m₀, n₀, r₀)` on a grid.
#[derive(Debug, Clone)]
pub struct SeedFields {
    pub case: DataCase,
    pub eps: f64,
    /// Three components in 3D, scalar in 2D.
    pub m0: SpectralField,
    pub n0: SpectralField,
    pub r0: SpectralField,
    /// Support of `m₀` and `n₀`.
    pub primary: SupportSet,
    /// Support of `r₀`.
    pub thermal: SupportSet,
}

impl SeedFields {
    pub fn grid(&self) -> &TorusGrid {
        self.n0.grid()
    }

    pub fn dim(&self) -> usize {
        self.case.dim()
    }

    /// Whether every seed vanishes identically.
    pub fn is_zero(&self) -> bool {
        [&self.m0, &self.n0, &self.r0].iter().all(|f| f.max_abs_coefficient() == 0.0)
    }

    /// Seeds of the same case with every coefficient zero.
    pub fn zeroed(&self) -> SeedFields {
        let mut out = self.clone();
        out.m0 = self.m0.scale(0.0);
        out.n0 = self.n0.scale(0.0);
        out.r0 = self.r0.scale(0.0);
        out
    }
}

/// Support sets `(primary, thermal)` for a data case.
pub fn support_sets(case: &DataCase, eps: f64) -> Result<(SupportSet, SupportSet)> {
    match case {
        DataCase::TwoD => Ok((SupportSet::planar(eps)?, SupportSet::planar_low(eps)?)),
        DataCase::ThreeD { pairs } => {
            let c = SupportSet::spatial(eps, pairs.clone())?;
            Ok((c.clone(), c))
        }
    }
}

/// Scalar field with coefficients `amplitude · cutoff(ξ)` on the lattice.
fn cutoff_field(grid: &TorusGrid, cutoff: &CutoffSpec, amplitude: f64) -> Result<SpectralField> {
    let mut field = SpectralField::scalar_zeros(grid);
    let l = grid.l();
    let data = field.component_mut(0);
    for k in cutoff.support.lattice_points(l) {
        let k = &k[..grid.dim()];
        let xi: Vec<f64> = k.iter().map(|&v| v as f64 / l).collect();
        let value = cutoff.value(&xi);
        if value == 0.0 {
            continue;
        }
        let flat = grid
            .flat_index(k)
            .filter(|&f| grid.is_kept(f))
            .ok_or_else(|| {
                Error::Unresolvable(format!(
                    "support point ξ = {xi:?} lies outside the dealiased band |ξ_j| ≤ {}",
                    grid.kept_xi_max()
                ))
            })?;
        data[flat] = Complex64::new(amplitude * value, 0.0);
    }
    Ok(field)
}

/// Builds the seed triple on `grid`.
///
/// Requires `0 < ε < e^{-1}` and `1/L ≤ ε/8`; every lattice point where a cutoff
/// is nonzero must sit inside the dealiased band.
pub fn synthesize_seed_fields(grid: &TorusGrid, eps: f64, case: &DataCase) -> Result<SeedFields> {
    if grid.dim() != case.dim() {
        return Err(Error::DimensionMismatch { expected: case.dim(), got: grid.dim() });
    }
    let amp = amplitudes(eps, grid.dim())?;
    grid.check_resolves(eps)?;
    let (primary, thermal) = support_sets(case, eps)?;
    let chi = CutoffSpec::new(primary.clone());
    let chi_bar = CutoffSpec::new(thermal.clone());
    let unit = cutoff_field(grid, &chi, 1.0)?;
    let m0 = match case {
        DataCase::TwoD => unit.scale(amp.m),
        DataCase::ThreeD { .. } => unit.scale(amp.m).replicate(3),
    };
    let n0 = unit.scale(amp.n);
    let r0 = if thermal == primary {
        unit.scale(amp.r)
    } else {
        cutoff_field(grid, &chi_bar, amp.r)?
    };
    if primary.lattice_is_empty(grid.l()) {
        log::warn!("support set is empty on this lattice; seeds are identically zero");
    }
    Ok(SeedFields { case: case.clone(), eps, m0, n0, r0, primary, thermal })
}

/// Background initial data `(U₀, V₀, Θ₀)`.
#[derive(Debug, Clone)]
pub struct BackgroundInitial {
    pub u: SpectralField,
    pub v: SpectralField,
    pub theta: SpectralField,
}

/// `U₀ = ∇×m₀` (3D) or `∇^⊥m̄₀ = (−∂₂m̄₀, ∂₁m̄₀)` (2D); `V₀ = (n₀, …, n₀)`; `Θ₀ = r₀`.
pub fn assemble_background_initial(seeds: &SeedFields) -> Result<BackgroundInitial> {
    let d = seeds.dim();
    let u = if d == 3 { seeds.m0.curl()? } else { seeds.m0.perp_gradient()? };
    Ok(BackgroundInitial { u, v: seeds.n0.replicate(d), theta: seeds.r0.clone() })
}

/// Choice of perturbation seeds `(w₀, z₀, ψ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationSpec {
    Zero,
    /// Random band-limited seeds with `‖(w₀,z₀,ψ₀)‖_{H^s} = norm`, split evenly.
    Random { seed: u64, norm: f64, s: f64 },
}

/// Perturbation seeds; `w` is divergence-free.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub w: SpectralField,
    pub z: SpectralField,
    pub psi: SpectralField,
}

impl Perturbation {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            w: SpectralField::vector_zeros(grid),
            z: SpectralField::vector_zeros(grid),
            psi: SpectralField::scalar_zeros(grid),
        }
    }

    /// `‖(w,z,ψ)‖_{H^s}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        Ok((self.w.sobolev_norm_sq(s)? + self.z.sobolev_norm_sq(s)? + self.psi.sobolev_norm_sq(s)?).sqrt())
    }
}

pub fn build_perturbation(grid: &TorusGrid, spec: PerturbationSpec) -> Result<Perturbation> {
    match spec {
        PerturbationSpec::Zero => Ok(Perturbation::zeros(grid)),
        PerturbationSpec::Random { seed, norm, s } => {
            if !(norm >= 0.0 && norm.is_finite()) {
                return Err(Error::InvalidParameter(format!("perturbation norm must be ≥ 0, got {norm}")));
            }
            let band = BandSpec { max_xi: 0.5 * grid.kept_xi_max(), decay: s + 2.0 };
            let part = norm / 3f64.sqrt();
            let fit = |f: SpectralField| crate::spectral::random::with_sobolev_norm(&f, s, part);
            Ok(Perturbation {
                w: fit(divergence_free(grid, seed, 0, band))?,
                z: fit(band_limited_vector(grid, seed, 1, band))?,
                psi: fit(band_limited_scalar(grid, seed, 2, band))?,
            })
        }
    }
}

/// Initial data `u₀ = U₀ + w₀`, `v₀ = V₀ + z₀`, `θ₀ = Θ₀ + ψ₀`.
#[derive(Debug, Clone)]
pub struct InitialTriple {
    pub background: BackgroundInitial,
    pub perturbation: Perturbation,
}

impl InitialTriple {
    pub fn new(background: BackgroundInitial, perturbation: Perturbation) -> Result<Self> {
        let scale = perturbation.w.l2_norm()?.max(1.0);
        let div = perturbation.w.divergence()?.l2_norm()?;
        if div > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!("perturbation w₀ must be divergence-free (‖∇·w₀‖ = {div:e})")));
        }
        Ok(Self { background, perturbation })
    }

    pub fn u0(&self) -> SpectralField {
        &self.background.u + &self.perturbation.w
    }

    pub fn v0(&self) -> SpectralField {
        &self.background.v + &self.perturbation.z
    }

    pub fn theta0(&self) -> SpectralField {
        &self.background.theta + &self.perturbation.psi
    }
}

/// Coefficients of `field` restricted to the inner set of `set`.
pub fn restrict_to_inner(field: &SpectralField, set: &SupportSet) -> SpectralField {
    let grid = field.grid().clone();
    let d = grid.dim();
    field.restricted(|flat| {
        let xi = grid.xi_vec(flat);
        set.contains(&xi[..d], Region::Inner).unwrap_or(false)
    })
}
