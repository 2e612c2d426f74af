//! Empirical constants of the commutator and product estimates for `J^s`,
//! with `L²` on the left and `L^∞` factors taken as grid maxima.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::random::{band_limited_scalar, BandSpec};
use crate::spectral::{commutator_js, dealiased_product, SpectralField, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub seed: u64,
    /// Range of band limits as fractions of the dealiased band.
    pub band_fraction: [f64; 2],
    /// Range of spectral decay exponents.
    pub decay: [f64; 2],
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { seed: 7, band_fraction: [0.1, 0.5], decay: [0.5, 4.0] }
    }
}

/// Summary of a sample of ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
}

impl RatioStats {
    fn of(mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let at = |q: f64| v[((q * (n - 1) as f64).round() as usize).min(n - 1)];
        Self { max: v[n - 1], mean: v.iter().sum::<f64>() / n as f64, median: at(0.5), p90: at(0.9) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub samples: usize,
    pub s: f64,
    pub n: usize,
    /// `‖[J^s,F]G‖ / (‖J^sF‖‖G‖_∞ + ‖J^{s−1}G‖‖∇F‖_∞)`.
    pub commutator: RatioStats,
    /// `‖J^s(FG)‖ / (‖J^sF‖‖G‖_∞ + ‖J^sG‖‖F‖_∞)`.
    pub bilinear: RatioStats,
    pub commutator_ratios: Vec<f64>,
    pub bilinear_ratios: Vec<f64>,
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest `|∇F|` over the grid points.
fn sup_gradient(f: &SpectralField) -> Result<f64> {
    let g = f.gradient()?.to_physical();
    let len = g[0].len();
    Ok((0..len).map(|p| g.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt()).fold(0.0, f64::max))
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// The two ratios for one pair of scalar fields.
pub fn probe_ratios(f: &SpectralField, g: &SpectralField, s: f64) -> Result<(f64, f64)> {
    let f_sup = sup(&f.component_physical(0));
    let g_sup = sup(&g.component_physical(0));
    let js_f = f.sobolev_norm_sq(s)?.sqrt();
    let js_g = g.sobolev_norm_sq(s)?.sqrt();
    let js1_g = g.sobolev_norm_sq(s - 1.0)?.sqrt();
    let comm = commutator_js(f, g, s)?.sobolev_norm_sq(0.0)?.sqrt();
    let prod = dealiased_product(f, g)?.sobolev_norm_sq(s)?.sqrt();
    let c = ratio(comm, js_f * g_sup + js1_g * sup_gradient(f)?);
    let b = ratio(prod, js_f * g_sup + js_g * f_sup);
    Ok((c, b))
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    range[0] + u * (range[1] - range[0])
}

/// Ratios over `sample_count` random pairs of band-limited scalars on `grid`.
///
/// Band limits are drawn relative to the grid's dealiased band, so a finer grid
/// probes finer fields.
pub fn kato_ponce_probe(sample_count: usize, s: f64, grid: &TorusGrid, options: &ProbeOptions) -> Result<ProbeReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("the probe needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut comm = Vec::with_capacity(sample_count);
    let mut bil = Vec::with_capacity(sample_count);
    for k in 0..sample_count as u64 {
        let band = |rng: &mut ChaCha8Rng| BandSpec {
            max_xi: uniform(rng, options.band_fraction) * grid.kept_xi_max(),
            decay: uniform(rng, options.decay),
        };
        let (bf, bg) = (band(&mut rng), band(&mut rng));
        let f = band_limited_scalar(grid, options.seed, 2 * k + 1, bf);
        let g = band_limited_scalar(grid, options.seed, 2 * k + 2, bg);
        let (c, b) = probe_ratios(&f, &g, s)?;
        if !(c.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite(format!("probe ratio for sample {k}")));
        }
        comm.push(c);
        bil.push(b);
    }
    Ok(ProbeReport {
        samples: sample_count,
        s,
        n: grid.n(),
        commutator: RatioStats::of(comm.clone()),
        bilinear: RatioStats::of(bil.clone()),
        commutator_ratios: comm,
        bilinear_ratios: bil,
    })
}
