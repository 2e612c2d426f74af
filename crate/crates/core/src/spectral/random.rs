//! Reproducible random band-limited fields.
//!
//! Every lattice mode draws from a ChaCha stream positioned by a grid-independent
//! index of its integer wavevector, so the same `(seed, stream)` yields the same
//! coefficients at a given wavevector on any grid sharing `L`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Shape of a random band-limited spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    /// Modes with `|ξ| > max_xi` (or outside the dealias band) are zero.
    pub max_xi: f64,
    /// Amplitudes are scaled by `(1 + |ξ|²)^{-decay/2}`.
    pub decay: f64,
}

impl BandSpec {
    pub fn flat(max_xi: f64) -> Self {
        Self { max_xi, decay: 0.0 }
    }
}

fn zigzag(k: i64) -> u128 {
    if k >= 0 {
        (2 * k) as u128
    } else {
        (-2 * k - 1) as u128
    }
}

fn pair(a: u128, b: u128) -> u128 {
    (a + b) * (a + b + 1) / 2 + b
}

fn mode_key(grid: &TorusGrid, flat: usize) -> u128 {
    let mut key = zigzag(grid.wavenumber(flat, 0));
    for axis in 1..grid.dim() {
        key = pair(key, zigzag(grid.wavenumber(flat, axis)));
    }
    key
}

fn unit_open(x: u64) -> f64 {
    // (0, 1], never zero so the logarithm below is finite.
    ((x >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

/// Standard complex Gaussian for one mode (Box–Muller on two 64-bit draws).
fn mode_gaussian(rng: &mut ChaCha8Rng, key: u128) -> Complex64 {
    rng.set_word_pos(key * 4);
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_open(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let phase = 2.0 * PI * u2;
    Complex64::new(r * phase.cos(), r * phase.sin())
}

/// Random real scalar field with the given band shape.
pub fn band_limited_scalar(grid: &TorusGrid, seed: u64, stream: u64, band: BandSpec) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let max_sq = band.max_xi * band.max_xi;
    let mut field = SpectralField::scalar_zeros(grid);
    {
        let data = field.component_mut(0);
        for (flat, v) in data.iter_mut().enumerate() {
            let x2 = grid.xi_sq(flat);
            if !grid.is_kept(flat) || x2 > max_sq {
                continue;
            }
            let amp = (1.0 + x2).powf(-0.5 * band.decay);
            *v = mode_gaussian(&mut rng, mode_key(grid, flat)) * amp;
        }
    }
    field.symmetrize();
    field
}

/// Random real vector field, one independent stream per component.
pub fn band_limited_vector(grid: &TorusGrid, seed: u64, stream: u64, band: BandSpec) -> SpectralField {
    let parts: Vec<SpectralField> = (0..grid.dim() as u64)
        .map(|j| band_limited_scalar(grid, seed, stream * 8 + j + 1, band))
        .collect();
    SpectralField::stack(&parts).expect("components share a grid")
}

/// Random real divergence-free vector field.
pub fn divergence_free(grid: &TorusGrid, seed: u64, stream: u64, band: BandSpec) -> SpectralField {
    band_limited_vector(grid, seed, stream, band)
        .leray_project()
        .expect("vector field")
}

/// Rescales `field` so that its `H^s` norm equals `target`.
pub fn with_sobolev_norm(field: &SpectralField, s: f64, target: f64) -> Result<SpectralField> {
    let current = field.sobolev_norm_sq(s)?.sqrt();
    if current == 0.0 {
        if target == 0.0 {
            return Ok(field.clone());
        }
        return Err(Error::InvalidParameter("cannot rescale a zero field to a nonzero norm".into()));
    }
    Ok(field.scale(target / current))
}
