use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default fraction of the resolved band kept after a quadratic product.
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Lines gathered per batch when transforming along a strided axis.
const LINE_BATCH: usize = 16;

/// Periodic box of side `2πL` sampled by `N` points per axis.
///
/// Frequencies live on the lattice `ξ = k / L` with integer `k` in FFT order.
/// The grid carries its FFT plans and per-mode lookup tables; clones share them.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    l: f64,
    dealias_fraction: f64,
    kept_max: i64,
    strides: [usize; 3],
    wavenumbers: Vec<i64>,
    xi_sq: Vec<f64>,
    /// `xi[axis][flat]`.
    xi: Vec<Vec<f64>>,
    mirror: Vec<usize>,
    kept: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("l", &self.l())
            .field("dealias_fraction", &self.dealias_fraction())
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.n() == other.n()
                && self.l() == other.l()
                && self.dealias_fraction() == other.dealias_fraction())
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, l: f64) -> Result<Self> {
        Self::with_dealias(dim, n, l, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(dim: usize, n: usize, l: f64, dealias_fraction: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 2 or 3, got {dim}"
            )));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be even and at least 16, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lattice scale L must be positive, got {l}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }

        let half = (n / 2) as i64;
        let wavenumbers: Vec<i64> = (0..n)
            .map(|i| if (i as i64) < half { i as i64 } else { i as i64 - n as i64 })
            .collect();
        // Largest integer strictly below fraction * N/2. The strict bound keeps the
        // 2/3 rule alias-free when N is divisible by 3, and drops the Nyquist mode.
        let kept_max = ((dealias_fraction * half as f64).ceil() as i64 - 1).max(0);

        let total = n.pow(dim as u32);
        let mut xi_sq = Vec::with_capacity(total);
        let mut kept = Vec::with_capacity(total);
        let inv_l2 = 1.0 / (l * l);
        for flat in 0..total {
            let mut k2 = 0i64;
            let mut inside = true;
            let mut rest = flat;
            for _ in 0..dim {
                let k = wavenumbers[rest % n];
                rest /= n;
                k2 += k * k;
                inside &= k.abs() <= kept_max;
            }
            xi_sq.push(k2 as f64 * inv_l2);
            kept.push(inside);
        }

        let mut strides = [0usize; 3];
        for (axis, st) in strides.iter_mut().enumerate().take(dim) {
            *st = n.pow((dim - 1 - axis) as u32);
        }
        let xi: Vec<Vec<f64>> = (0..dim)
            .map(|axis| (0..total).map(|f| wavenumbers[(f / strides[axis]) % n] as f64 / l).collect())
            .collect();
        let mirror = (0..total)
            .map(|flat| {
                (0..dim).fold(0usize, |acc, axis| {
                    let i = (flat / strides[axis]) % n;
                    acc * n + (n - i) % n
                })
            })
            .collect();

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                l,
                dealias_fraction,
                kept_max,
                strides,
                wavenumbers,
                xi_sq,
                xi,
                mirror,
                kept,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn l(&self) -> f64 {
        self.inner.l
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.dealias_fraction
    }

    /// Number of lattice points (equal to the number of physical samples).
    pub fn len(&self) -> usize {
        self.inner.xi_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequency spacing `Δξ = 1/L`.
    pub fn delta_xi(&self) -> f64 {
        1.0 / self.inner.l
    }

    /// Largest representable frequency per axis, `N/(2L)`.
    pub fn xi_max(&self) -> f64 {
        self.inner.n as f64 / (2.0 * self.inner.l)
    }

    /// Largest integer wavenumber per axis that survives dealiasing.
    pub fn kept_max(&self) -> i64 {
        self.inner.kept_max
    }

    /// Largest frequency per axis that survives dealiasing.
    pub fn kept_xi_max(&self) -> f64 {
        self.inner.kept_max as f64 / self.inner.l
    }

    pub fn side(&self) -> f64 {
        2.0 * PI * self.inner.l
    }

    /// Physical grid spacing `2πL/N`.
    pub fn spacing(&self) -> f64 {
        self.side() / self.inner.n as f64
    }

    /// Weight turning a lattice sum of `|f̂|²` into `∫|f|² dx`: `Δξ^d / (2π)^d`.
    pub fn quadrature_weight(&self) -> f64 {
        (self.delta_xi() / (2.0 * PI)).powi(self.inner.dim as i32)
    }

    /// Row-major stride of `axis` (the last axis is contiguous).
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.inner.strides[axis]
    }

    /// Integer wavenumber of lattice point `flat` along `axis`.
    #[inline]
    pub fn wavenumber(&self, flat: usize, axis: usize) -> i64 {
        self.inner.wavenumbers[(flat / self.stride(axis)) % self.inner.n]
    }

    #[inline]
    pub fn xi(&self, flat: usize, axis: usize) -> f64 {
        self.inner.xi[axis][flat]
    }

    /// `ξ_axis` at every lattice point.
    pub fn xi_table(&self, axis: usize) -> &[f64] {
        &self.inner.xi[axis]
    }

    /// `ξ_axis` of the Nyquist plane, `−N/(2L)`.
    pub fn nyquist_xi(&self) -> f64 {
        -((self.inner.n / 2) as f64) / self.inner.l
    }

    /// Frequency vector of a lattice point; unused trailing entries are zero.
    pub fn xi_vec(&self, flat: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (axis, slot) in out.iter_mut().enumerate().take(self.inner.dim) {
            *slot = self.xi(flat, axis);
        }
        out
    }

    #[inline]
    pub fn xi_sq(&self, flat: usize) -> f64 {
        self.inner.xi_sq[flat]
    }

    pub fn xi_sq_table(&self) -> &[f64] {
        &self.inner.xi_sq
    }

    #[inline]
    pub fn is_kept(&self, flat: usize) -> bool {
        self.inner.kept[flat]
    }

    /// True when `|k_axis| = N/2` (the unpaired Nyquist plane).
    #[inline]
    pub fn is_nyquist(&self, flat: usize, axis: usize) -> bool {
        self.wavenumber(flat, axis) == -((self.inner.n / 2) as i64)
    }

    /// Flat index of the lattice point with integer wavenumbers `k` (FFT order).
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.inner.dim {
            return None;
        }
        let n = self.inner.n as i64;
        let mut flat = 0usize;
        for &kj in k {
            if kj < -n / 2 || kj >= n / 2 {
                return None;
            }
            let idx = if kj < 0 { kj + n } else { kj };
            flat = flat * self.inner.n + idx as usize;
        }
        Some(flat)
    }

    /// Flat index of `-k` for the lattice point `flat`.
    #[inline]
    pub fn mirror(&self, flat: usize) -> usize {
        self.inner.mirror[flat]
    }

    /// Physical coordinates of sample `flat`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut out = [0.0; 3];
        for (axis, slot) in out.iter_mut().enumerate().take(self.inner.dim) {
            *slot = ((flat / self.stride(axis)) % self.inner.n) as f64 * h;
        }
        out
    }

    /// Grid resolves annulus data of thinness `eps` when `Δξ ≤ eps/8`.
    pub fn check_resolves(&self, eps: f64) -> Result<()> {
        if self.delta_xi() > eps / 8.0 * (1.0 + 1e-12) {
            return Err(Error::Unresolvable(format!(
                "frequency spacing 1/L = {} exceeds eps/8 = {} (need L >= {})",
                self.delta_xi(),
                eps / 8.0,
                8.0 / eps
            )));
        }
        Ok(())
    }

    /// Physical samples to continuous-transform coefficients: `(2πL/N)^d · DFT`.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, true);
        let scale = self.spacing().powi(self.inner.dim as i32);
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Coefficients to physical samples, discarding the (round-off) imaginary part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.side().powi(self.inner.dim as i32);
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// `forward` of several real arrays, two per complex transform.
    pub fn forward_many(&self, data: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let scale = self.spacing().powi(self.inner.dim as i32);
        let mut out = Vec::with_capacity(data.len());
        for pair in data.chunks(2) {
            if pair.len() == 1 {
                out.push(self.forward(pair[0]));
                continue;
            }
            let mut buf: Vec<Complex64> =
                pair[0].iter().zip(pair[1]).map(|(&a, &b)| Complex64::new(a, b)).collect();
            self.transform(&mut buf, true);
            // a + ib transforms to A + iB with A, B Hermitian.
            let half = 0.5 * scale;
            let mirror = &self.inner.mirror;
            let (a, b): (Vec<_>, Vec<_>) = (0..buf.len())
                .map(|f| {
                    let c = buf[f];
                    let m = buf[mirror[f]].conj();
                    ((c + m) * half, Complex64::new((c - m).im, -(c - m).re) * half)
                })
                .unzip();
            out.push(a);
            out.push(b);
        }
        out
    }

    /// `inverse` of several Hermitian coefficient arrays, two per complex transform.
    pub fn inverse_many(&self, coeffs: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let scale = 1.0 / self.side().powi(self.inner.dim as i32);
        let mut out = Vec::with_capacity(coeffs.len());
        for pair in coeffs.chunks(2) {
            if pair.len() == 1 {
                out.push(self.inverse(pair[0]));
                continue;
            }
            let mut buf: Vec<Complex64> =
                pair[0].iter().zip(pair[1]).map(|(&a, &b)| a + Complex64::new(-b.im, b.re)).collect();
            self.transform(&mut buf, false);
            out.push(buf.iter().map(|c| c.re * scale).collect());
            out.push(buf.iter().map(|c| c.im * scale).collect());
        }
        out
    }

    /// Inverse transform keeping the imaginary part, for realness checks.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.side().powi(self.inner.dim as i32);
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Unnormalized multi-dimensional DFT in place.
    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.inner.n;
        let plan = if forward { &self.inner.forward } else { &self.inner.inverse };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];

        // Contiguous last axis: rustfft walks the buffer in chunks of length n.
        plan.process_with_scratch(buf, &mut scratch);

        let mut lines = vec![Complex64::new(0.0, 0.0); n * LINE_BATCH];
        for axis in 0..self.inner.dim - 1 {
            let stride = self.stride(axis);
            let block = stride * n;
            for base in (0..buf.len()).step_by(block) {
                let mut inner = 0;
                while inner < stride {
                    let batch = LINE_BATCH.min(stride - inner);
                    for b in 0..batch {
                        let start = base + inner + b;
                        for j in 0..n {
                            lines[b * n + j] = buf[start + j * stride];
                        }
                    }
                    plan.process_with_scratch(&mut lines[..batch * n], &mut scratch);
                    for b in 0..batch {
                        let start = base + inner + b;
                        for j in 0..n {
                            buf[start + j * stride] = lines[b * n + j];
                        }
                    }
                    inner += batch;
                }
            }
        }
    }
}
