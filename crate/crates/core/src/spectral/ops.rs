//! Differential, norm, projection and product operators on [`SpectralField`]s.

use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Fraction of the kept band treated as its outer shell by [`tail_energy`].
pub const TAIL_SHELL: f64 = 0.9;

/// Tail fraction above which a field is reported as under-resolved.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-8;

/// Bessel-potential weight `(1 + |ξ|²)^{s/2}`.
#[inline]
pub fn bessel_weight(xi_sq: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (1.0 + xi_sq).powf(0.5 * s)
    }
}

impl SpectralField {
    /// `∂_axis` applied componentwise: multiplies mode `k` by `i k_axis / L`.
    ///
    /// The unpaired Nyquist plane is zeroed so the result stays Hermitian.
    pub fn partial_derivative(&self, axis: usize) -> Result<SpectralField> {
        let grid = self.grid().clone();
        if axis >= grid.dim() {
            return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
        }
        let mut out = self.clone();
        let nyq = grid.nyquist_xi();
        let xi = grid.xi_table(axis);
        for c in 0..out.n_components() {
            for (v, &x) in out.component_mut(c).iter_mut().zip(xi) {
                *v = if x == nyq { ZERO } else { *v * I * x };
            }
        }
        Ok(out)
    }

    /// Applies `Σ_j coeffs[j] ∂_j` (a constant-coefficient first-order operator).
    pub fn directional_derivative(&self, coeffs: &[f64]) -> Result<SpectralField> {
        let grid = self.grid().clone();
        if coeffs.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: coeffs.len() });
        }
        let nyq_xi = grid.nyquist_xi();
        let symbol: Vec<f64> = (0..grid.len())
            .map(|flat| {
                let mut sym = 0.0;
                for (axis, &a) in coeffs.iter().enumerate() {
                    if a != 0.0 {
                        let x = grid.xi(flat, axis);
                        if x == nyq_xi {
                            return 0.0;
                        }
                        sym += a * x;
                    }
                }
                sym
            })
            .collect();
        let mut out = self.clone();
        for c in 0..out.n_components() {
            for (v, &m) in out.component_mut(c).iter_mut().zip(&symbol) {
                *v *= I * m;
            }
        }
        Ok(out)
    }

    /// Gradient of a scalar field.
    pub fn gradient(&self) -> Result<SpectralField> {
        self.require_scalar()?;
        let parts = (0..self.grid().dim())
            .map(|a| self.partial_derivative(a))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::stack(&parts)
    }

    /// Divergence of a vector field.
    pub fn divergence(&self) -> Result<SpectralField> {
        self.require_vector()?;
        let grid = self.grid().clone();
        let mut out = SpectralField::scalar_zeros(&grid);
        for axis in 0..grid.dim() {
            let d = self.scalar_component(axis).partial_derivative(axis)?;
            out.axpy(1.0, &d)?;
        }
        Ok(out)
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> SpectralField {
        let grid = self.grid().clone();
        self.apply_multiplier(|flat| -grid.xi_sq(flat))
    }

    /// Curl of a 3D vector field.
    pub fn curl(&self) -> Result<SpectralField> {
        self.require_vector()?;
        if self.grid().dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: self.grid().dim() });
        }
        let c = |i: usize| self.scalar_component(i);
        let d = |f: &SpectralField, a: usize| f.partial_derivative(a);
        let x = d(&c(2), 1)?.try_sub(&d(&c(1), 2)?)?;
        let y = d(&c(0), 2)?.try_sub(&d(&c(2), 0)?)?;
        let z = d(&c(1), 0)?.try_sub(&d(&c(0), 1)?)?;
        SpectralField::stack(&[x, y, z])
    }

    /// Perpendicular gradient `(−∂₂, ∂₁)` of a 2D scalar field.
    pub fn perp_gradient(&self) -> Result<SpectralField> {
        self.require_scalar()?;
        if self.grid().dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.grid().dim() });
        }
        let x = self.partial_derivative(1)?.scale(-1.0);
        let y = self.partial_derivative(0)?;
        SpectralField::stack(&[x, y])
    }

    /// `J^s f`, the multiplier `(1 + |ξ|²)^{s/2}`. Any real `s` is accepted.
    pub fn js_apply(&self, s: f64) -> SpectralField {
        let grid = self.grid().clone();
        self.apply_multiplier(|flat| bessel_weight(grid.xi_sq(flat), s))
    }

    /// `‖f‖²_{H^s}` by midpoint quadrature over the frequency lattice.
    pub fn sobolev_norm_sq(&self, s: f64) -> Result<f64> {
        let grid = self.grid();
        let table = grid.xi_sq_table();
        let mut acc = 0.0;
        for c in self.components() {
            for (v, &x2) in c.iter().zip(table) {
                let a = v.norm_sqr();
                if a != 0.0 {
                    acc += (1.0 + x2).powf(s) * a;
                }
            }
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("Sobolev norm".into()));
        }
        Ok(acc * grid.quadrature_weight())
    }

    /// `‖f‖_{H^s}`; logs a warning when the field looks under-resolved.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        let n2 = self.sobolev_norm_sq(s)?;
        if n2 > 0.0 {
            let tail = tail_energy(self);
            if tail > DEFAULT_TAIL_THRESHOLD {
                log::warn!("H^{s} norm of an under-resolved field (tail-energy fraction {tail:.3e})");
            }
        }
        Ok(n2.sqrt())
    }

    /// `‖f‖_{L²}`.
    pub fn l2_norm(&self) -> Result<f64> {
        self.sobolev_norm(0.0)
    }

    /// Homogeneous seminorm `‖∇f‖²_{H^s}` (dissipation of `−Δ`).
    pub fn gradient_norm_sq(&self, s: f64) -> Result<f64> {
        let grid = self.grid();
        let table = grid.xi_sq_table();
        let mut acc = 0.0;
        for c in self.components() {
            for (v, &x2) in c.iter().zip(table) {
                let a = v.norm_sqr();
                if a != 0.0 {
                    acc += x2 * (1.0 + x2).powf(s) * a;
                }
            }
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("gradient seminorm".into()));
        }
        Ok(acc * grid.quadrature_weight())
    }

    /// `∫ f · g dx` for real fields of equal shape (componentwise dot product).
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64> {
        self.same_grid(other)?;
        if self.n_components() != other.n_components() {
            return Err(Error::ComponentMismatch {
                expected: self.n_components(),
                got: other.n_components(),
            });
        }
        let mut acc = 0.0;
        for (a, b) in self.components().iter().zip(other.components()) {
            for (x, y) in a.iter().zip(b) {
                acc += x.re * y.re + x.im * y.im;
            }
        }
        Ok(acc * self.grid().quadrature_weight())
    }

    /// `∫ J^s f · J^s g dx`.
    pub fn sobolev_inner(&self, other: &SpectralField, s: f64) -> Result<f64> {
        self.same_grid(other)?;
        if self.n_components() != other.n_components() {
            return Err(Error::ComponentMismatch {
                expected: self.n_components(),
                got: other.n_components(),
            });
        }
        let table = self.grid().xi_sq_table();
        let mut acc = 0.0;
        for (a, b) in self.components().iter().zip(other.components()) {
            for ((x, y), &x2) in a.iter().zip(b).zip(table) {
                let p = x.re * y.re + x.im * y.im;
                if p != 0.0 {
                    acc += (1.0 + x2).powf(s) * p;
                }
            }
        }
        Ok(acc * self.grid().quadrature_weight())
    }

    /// Leray projection onto divergence-free fields, mode by mode.
    pub fn leray_project(&self) -> Result<SpectralField> {
        self.require_vector()?;
        let grid = self.grid().clone();
        let dim = grid.dim();
        let mut comps = self.components().to_vec();
        for flat in 0..grid.len() {
            let x2 = grid.xi_sq(flat);
            if x2 == 0.0 {
                continue;
            }
            let xi = grid.xi_vec(flat);
            let mut dot = ZERO;
            for a in 0..dim {
                dot += comps[a][flat] * xi[a];
            }
            let dot = dot / x2;
            for a in 0..dim {
                comps[a][flat] -= dot * xi[a];
            }
        }
        SpectralField::from_coefficients(&grid, comps)
    }
}

/// Fraction of spectral energy carried by modes with any `|k_j|` beyond
/// `0.9 · fraction · N/2`.
pub fn tail_energy(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let shell = TAIL_SHELL * grid.dealias_fraction() * (grid.n() / 2) as f64;
    let dim = grid.dim();
    let mut total = 0.0;
    let mut tail = 0.0;
    for c in field.components() {
        for (flat, v) in c.iter().enumerate() {
            let a = v.norm_sqr();
            if a == 0.0 {
                continue;
            }
            total += a;
            if (0..dim).any(|ax| grid.wavenumber(flat, ax).unsigned_abs() as f64 > shell) {
                tail += a;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Pointwise product of two fields, truncated to the dealiasing band.
///
/// Scalar×scalar, scalar×vector (either order), or componentwise vector×vector.
pub fn dealiased_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.same_grid(b)?;
    let grid = a.grid().clone();
    let pa = a.to_physical();
    let pb = b.to_physical();
    let comps: Vec<Vec<f64>> = match (pa.len(), pb.len()) {
        (1, _) => pb.iter().map(|y| mul(&pa[0], y)).collect(),
        (_, 1) => pa.iter().map(|x| mul(x, &pb[0])).collect(),
        (m, n) if m == n => pa.iter().zip(&pb).map(|(x, y)| mul(x, y)).collect(),
        (m, n) => return Err(Error::ComponentMismatch { expected: m, got: n }),
    };
    let mut out = SpectralField::from_physical(&grid, &comps)?;
    out.dealias_in_place();
    Ok(out)
}

fn mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a * b).collect()
}

/// `[J^s, F] G = J^s(FG) − F (J^s G)`, both products dealiased.
pub fn commutator_js(f: &SpectralField, g: &SpectralField, s: f64) -> Result<SpectralField> {
    let first = dealiased_product(f, g)?.js_apply(s);
    let second = dealiased_product(f, &g.js_apply(s))?;
    first.try_sub(&second)
}

/// `(a · ∇) b` for a vector field `a` and a scalar or vector field `b`, dealiased.
pub fn advection(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.require_vector()?;
    a.same_grid(b)?;
    let dim = a.grid().dim();
    let mut out = SpectralField::zeros(a.grid(), b.n_components());
    for j in 0..dim {
        let term = dealiased_product(&a.scalar_component(j), &b.partial_derivative(j)?)?;
        out.axpy(1.0, &term)?;
    }
    Ok(out)
}
