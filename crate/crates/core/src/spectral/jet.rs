//! Physical-space values and first derivatives of a field, for assembling
//! quadratic terms with one forward transform per output component.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::Result;

/// Samples of each component and of each of its first partial derivatives.
#[derive(Debug, Clone)]
pub struct PhysicalJet {
    /// `values[c]` is component `c`.
    pub values: Vec<Vec<f64>>,
    /// `grads[c][j]` is `∂_j` of component `c`.
    pub grads: Vec<Vec<Vec<f64>>>,
    /// True when the source field was identically zero (no transforms were done).
    pub zero: bool,
}

/// Coefficients of `∂_axis` applied to one component.
pub fn derivative_coefficients(grid: &TorusGrid, coeffs: &[Complex64], axis: usize) -> Vec<Complex64> {
    let nyq = grid.nyquist_xi();
    coeffs
        .iter()
        .zip(grid.xi_table(axis))
        .map(|(&c, &x)| if x == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(-c.im * x, c.re * x) })
        .collect()
}

impl PhysicalJet {
    pub fn of(field: &SpectralField) -> PhysicalJet {
        let grid = field.grid();
        let d = grid.dim();
        let zero = field.max_abs_coefficient() == 0.0;
        let len = grid.len();
        if zero {
            let m = field.n_components();
            return PhysicalJet { values: vec![vec![0.0; len]; m], grads: vec![vec![vec![0.0; len]; d]; m], zero };
        }
        // Per component: the values, then each partial derivative.
        let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(field.n_components() * (d + 1));
        for c in field.components() {
            spectra.push(c.clone());
            spectra.extend((0..d).map(|j| derivative_coefficients(grid, c, j)));
        }
        let refs: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
        let mut samples = grid.inverse_many(&refs).into_iter();
        let mut values = Vec::with_capacity(field.n_components());
        let mut grads = Vec::with_capacity(field.n_components());
        for _ in field.components() {
            values.push(samples.next().expect("one sample array per spectrum"));
            grads.push(samples.by_ref().take(d).collect());
        }
        PhysicalJet { values, grads, zero }
    }

    /// `Σ_j ∂_j` of component `c` at every point.
    pub fn derivative_sum(&self, c: usize) -> Vec<f64> {
        let len = self.values[c].len();
        let mut out = vec![0.0; len];
        for g in &self.grads[c] {
            out.iter_mut().zip(g).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// Divergence of a vector jet, `Σ_j ∂_j v_j`.
    pub fn divergence(&self) -> Vec<f64> {
        let len = self.values[0].len();
        let mut out = vec![0.0; len];
        for (j, g) in self.grads.iter().enumerate() {
            out.iter_mut().zip(&g[j]).for_each(|(o, v)| *o += v);
        }
        out
    }
}

/// Transforms physical samples to spectral space and truncates to the dealias band.
pub fn dealiased_from_physical(grid: &TorusGrid, comps: &[Vec<f64>]) -> Result<SpectralField> {
    let mut out = SpectralField::from_physical(grid, comps)?;
    out.dealias_in_place();
    Ok(out)
}

/// `Σ_j a_j ∂_j b_c` accumulated into `out` with weight `sign`.
pub fn accumulate_advection(out: &mut [f64], sign: f64, a: &PhysicalJet, b: &PhysicalJet, c: usize) {
    if a.zero || b.zero {
        return;
    }
    for (j, aj) in a.values.iter().enumerate() {
        let g = &b.grads[c][j];
        for ((o, x), y) in out.iter_mut().zip(aj).zip(g) {
            *o += sign * x * y;
        }
    }
}

/// `out += sign · x · y` pointwise.
pub fn accumulate_product(out: &mut [f64], sign: f64, x: &[f64], y: &[f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
        *o += sign * a * b;
    }
}
