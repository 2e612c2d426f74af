use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar or vector field stored as continuous-convention Fourier coefficients
/// `f̂(ξ) ≈ ∫ e^{-ix·ξ} f(x) dx` on the lattice of a [`TorusGrid`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &TorusGrid, components: usize) -> Self {
        Self {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; components],
        }
    }

    pub fn scalar_zeros(grid: &TorusGrid) -> Self {
        Self::zeros(grid, 1)
    }

    pub fn vector_zeros(grid: &TorusGrid) -> Self {
        Self::zeros(grid, grid.dim())
    }

    pub fn from_coefficients(grid: &TorusGrid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::ComponentMismatch { expected: 1, got: 0 });
        }
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::InvalidParameter(format!(
                    "coefficient array has {} entries, grid has {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid: grid.clone(), comps })
    }

    /// Transforms physical samples (one array per component) to spectral space.
    pub fn from_physical(grid: &TorusGrid, comps: &[Vec<f64>]) -> Result<Self> {
        if let Some(c) = comps.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "physical array has {} samples, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        let refs: Vec<&[f64]> = comps.iter().map(|c| c.as_slice()).collect();
        Self::from_coefficients(grid, grid.forward_many(&refs))
    }

    /// Builds a scalar field by sampling `f` at the physical grid points.
    pub fn scalar_from_fn(grid: &TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data: Vec<f64> = (0..grid.len()).map(|p| f(grid.position(p))).collect();
        Self { grid: grid.clone(), comps: vec![grid.forward(&data)] }
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| self.grid.inverse(c)).collect()
    }

    pub fn component_physical(&self, i: usize) -> Vec<f64> {
        self.grid.inverse(&self.comps[i])
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.comps.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.comps.len() == 1
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.comps[i]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Extracts component `i` as a scalar field.
    pub fn scalar_component(&self, i: usize) -> SpectralField {
        Self { grid: self.grid.clone(), comps: vec![self.comps[i].clone()] }
    }

    /// Stacks scalar fields into a vector field.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let first = parts.first().ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?;
        let mut comps = Vec::new();
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::GridMismatch);
            }
            comps.extend(p.comps.iter().cloned());
        }
        Ok(Self { grid: first.grid.clone(), comps })
    }

    /// Vector field whose every component is a copy of the scalar `self`.
    pub fn replicate(&self, count: usize) -> SpectralField {
        Self { grid: self.grid.clone(), comps: vec![self.comps[0].clone(); count] }
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    fn same_shape(&self, other: &SpectralField) -> Result<()> {
        self.same_grid(other)?;
        if self.comps.len() != other.comps.len() {
            return Err(Error::ComponentMismatch {
                expected: self.comps.len(),
                got: other.comps.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_vector(&self) -> Result<()> {
        if self.comps.len() != self.grid.dim() {
            return Err(Error::ComponentMismatch { expected: self.grid.dim(), got: self.comps.len() });
        }
        Ok(())
    }

    pub(crate) fn require_scalar(&self) -> Result<()> {
        if self.comps.len() != 1 {
            return Err(Error::ComponentMismatch { expected: 1, got: self.comps.len() });
        }
        Ok(())
    }

    /// Multiplies every coefficient by a real per-mode multiplier.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> SpectralField {
        let mut out = self.clone();
        out.apply_multiplier_in_place(m);
        out
    }

    pub fn apply_multiplier_in_place(&mut self, m: impl Fn(usize) -> f64) {
        for c in &mut self.comps {
            for (flat, v) in c.iter_mut().enumerate() {
                *v *= m(flat);
            }
        }
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        self.apply_multiplier(|_| a)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.same_shape(other)?;
        for (dst, src) in self.comps.iter_mut().zip(&other.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * a;
            }
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn try_sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Zeroes every mode outside the dealiasing band.
    pub fn dealias_in_place(&mut self) {
        let grid = self.grid.clone();
        for c in &mut self.comps {
            for (flat, v) in c.iter_mut().enumerate() {
                if !grid.is_kept(flat) {
                    *v = ZERO;
                }
            }
        }
    }

    pub fn dealiased(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what.to_string()))
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.comps.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `f̂(-ξ) = conj(f̂(ξ))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.comps {
            for flat in 0..c.len() {
                let m = self.grid.mirror(flat);
                worst = worst.max((c[flat] - c[m].conj()).norm());
            }
        }
        worst
    }

    /// Projects onto Hermitian-symmetric coefficients (real physical field).
    pub fn symmetrize(&mut self) {
        let grid = self.grid.clone();
        for c in &mut self.comps {
            for flat in 0..c.len() {
                let m = grid.mirror(flat);
                if m < flat {
                    continue;
                }
                let avg = (c[flat] + c[m].conj()) * 0.5;
                c[flat] = avg;
                c[m] = avg.conj();
            }
        }
    }

    /// Restricts the field to modes where `keep(flat)` holds.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.comps {
            for (flat, v) in c.iter_mut().enumerate() {
                if !keep(flat) {
                    *v = ZERO;
                }
            }
        }
        out
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.try_add(rhs).expect("field shapes must agree")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.try_sub(rhs).expect("field shapes must agree")
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scale(a)
    }
}
