//! Closed-form background flow driven by the seed fields, and the forcing it
//! exerts on the perturbation.

mod background;
mod series;

pub use background::{
    operator_a, BackgroundFlow, BackgroundPhysical, BackgroundSnapshot, BackgroundState, ForcingTriple,
};
pub use series::{
    background_norm_series, cumulative_integral, graded_time_grid, linear_norm_series, write_norm_series_csv,
    LinearNormRow, NormRow,
    NormSeries,
};

use crate::error::{Error, Result};

/// Damping and diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Barotropic damping.
    pub nu: f64,
    /// Baroclinic diffusivity.
    pub eta: f64,
    /// Thermal damping.
    pub lambda: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { nu: 1.0, eta: 1.0, lambda: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(nu: f64, eta: f64, lambda: f64) -> Result<Self> {
        let p = Self { nu, eta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("ν must be non-negative, got {}", self.nu)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("η must be positive, got {}", self.eta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }

    /// `min{ν, η, λ}`.
    pub fn min_rate(&self) -> f64 {
        self.nu.min(self.eta).min(self.lambda)
    }
}

/// `x ↦ (1 − e^{−x}) / x`, equal to 1 at 0.
fn relative_expm1(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `∫₀ᵗ e^{−a(t−τ)} e^{−λτ} dτ` with `a = η|ξ|²`.
///
/// Written as `e^{−min(a,λ)t} · t · (1 − e^{−|a−λ|t}) / (|a−λ|t)`, which has no
/// cancellation at or near the resonance `a = λ`.
pub fn duhamel_factor(t: f64, xi_sq: f64, eta: f64, lambda: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(duhamel_unchecked(t, eta * xi_sq, lambda))
}

pub(crate) fn duhamel_unchecked(t: f64, a: f64, lambda: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let low = a.min(lambda);
    let gap = (a - lambda).abs();
    let tol = 1e-6 * a.max(lambda);
    let x = gap * t;
    let g = if gap <= tol && x < 1e-4 {
        // Resonant limit t·e^{−λt} with its first corrections.
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        relative_expm1(x)
    };
    (-low * t).exp() * t * g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duhamel_closed_forms() {
        assert_eq!(duhamel_factor(0.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
        let res = duhamel_factor(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((res - (-1.0f64).exp()).abs() < 1e-15);
        let off = duhamel_factor(1.0, 4.0, 1.0, 1.0).unwrap();
        let exact = ((-1.0f64).exp() - (-4.0f64).exp()) / 3.0;
        assert!((off - exact).abs() < 1e-15);
        assert!(duhamel_factor(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(0.0, 1.0, 0.0).is_ok());
        assert!(PhysicalParams::new(1.0, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(-1.0, 1.0, 1.0).is_err());
        assert_eq!(PhysicalParams::new(2.0, 0.5, 3.0).unwrap().min_rate(), 0.5);
    }
}
