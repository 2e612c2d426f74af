//! Thin frequency sets and their cutoff functions.

use crate::error::{Error, Result};

/// Relative slack on the pair-sum bound so lattice points sitting exactly on
/// `|ξ_i + ξ_j| = ε` are not lost to rounding in `k / L`.
const PAIR_SLACK: f64 = 1e-12;

/// Inner or outer member of a nested pair of sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inner,
    Outer,
}

/// `{ξ : |ξ_i + ξ_j| ≤ ε for (i,j) in pairs, ρ_lo ≤ |ξ| ≤ ρ_hi}` and its inner
/// companion with radial band `[4ρ_lo/3, 5ρ_hi/6]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    dim: usize,
    eps: f64,
    pairs: Vec<(usize, usize)>,
    outer: [f64; 2],
    inner: [f64; 2],
}

/// Every index pair `(i, j)`, `i < j`, of a `dim`-dimensional vector.
pub fn all_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push((i, j));
        }
    }
    out
}

impl SupportSet {
    pub fn new(dim: usize, eps: f64, pairs: Vec<(usize, usize)>, rho_lo: f64, rho_hi: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("thinness ε must be positive, got {eps}")));
        }
        if !(rho_lo > 0.0 && rho_hi > rho_lo) {
            return Err(Error::InvalidParameter(format!(
                "radial band [{rho_lo}, {rho_hi}] must satisfy 0 < lo < hi"
            )));
        }
        let inner = [rho_lo * 4.0 / 3.0, rho_hi * 5.0 / 6.0];
        if !(inner[0] < inner[1]) {
            return Err(Error::InvalidParameter(format!(
                "radial band [{rho_lo}, {rho_hi}] too narrow for an inner band"
            )));
        }
        let mut clean = Vec::with_capacity(pairs.len());
        for (i, j) in pairs {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if i == j || j >= dim {
                return Err(Error::InvalidParameter(format!(
                    "pair ({}, {}) invalid in dimension {dim}",
                    i + 1,
                    j + 1
                )));
            }
            if !clean.contains(&(i, j)) {
                clean.push((i, j));
            }
        }
        clean.sort_unstable();
        Ok(Self { dim, eps, pairs: clean, outer: [rho_lo, rho_hi], inner })
    }

    /// The 3D set with radial band `[1, 2]` and the given pair constraints.
    pub fn spatial(eps: f64, pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(3, eps, pairs, 1.0, 2.0)
    }

    /// The 3D set exactly as stated, with all three pair constraints.
    pub fn spatial_all_pairs(eps: f64) -> Result<Self> {
        Self::spatial(eps, all_pairs(3))
    }

    /// The planar set with radial band `[1, 2]`.
    pub fn planar(eps: f64) -> Result<Self> {
        Self::new(2, eps, vec![(0, 1)], 1.0, 2.0)
    }

    /// The planar set with radial band `[ε, 2ε]`.
    pub fn planar_low(eps: f64) -> Result<Self> {
        Self::new(2, eps, vec![(0, 1)], eps, 2.0 * eps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn radial_band(&self, region: Region) -> [f64; 2] {
        match region {
            Region::Inner => self.inner,
            Region::Outer => self.outer,
        }
    }

    fn pairs_hold(&self, xi: &[f64]) -> bool {
        let bound = self.eps * (1.0 + PAIR_SLACK);
        self.pairs.iter().all(|&(i, j)| (xi[i] + xi[j]).abs() <= bound)
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: xi.len() });
        }
        Ok(())
    }

    /// Membership of `ξ` in the inner or outer set.
    pub fn contains(&self, xi: &[f64], region: Region) -> Result<bool> {
        self.check_dim(xi)?;
        let r = norm(xi);
        let [lo, hi] = self.radial_band(region);
        Ok(self.pairs_hold(xi) && r >= lo && r <= hi)
    }

    /// Smallest `|ξ|` in the outer set (its radial lower bound).
    pub fn min_radius(&self) -> f64 {
        self.outer[0]
    }

    /// Integer lattice points `k` (with `ξ = k/L`) inside the outer set.
    pub fn lattice_points(&self, l: f64) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        self.scan(l, |k| {
            out.push(k);
            true
        });
        out
    }

    /// Whether the outer set contains no point of the lattice `k/L`.
    pub fn lattice_is_empty(&self, l: f64) -> bool {
        let mut empty = true;
        self.scan(l, |_| {
            empty = false;
            false
        });
        empty
    }

    /// Visits lattice points of the outer set until `visit` returns false.
    ///
    /// The last axis is pruned with the pair constraints that involve it, so sets
    /// whose pair bounds confine every direction are scanned in near-linear time.
    fn scan(&self, l: f64, mut visit: impl FnMut([i64; 3]) -> bool) {
        let kmax = (self.outer[1] * l).floor() as i64 + 1;
        let e = (self.eps * l * (1.0 + 1e-9)).floor() as i64 + 1;
        let hi2 = self.outer[1] * self.outer[1];
        let check = |k: [i64; 3]| -> bool {
            let xi: Vec<f64> = k[..self.dim].iter().map(|&v| v as f64 / l).collect();
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            r2 <= hi2 * (1.0 + 1e-12) && self.contains(&xi, Region::Outer).unwrap_or(false)
        };
        let last = self.dim - 1;
        for k0 in -kmax..=kmax {
            for k1 in -kmax..=kmax {
                if self.dim == 2 {
                    if check([k0, k1, 0]) && !visit([k0, k1, 0]) {
                        return;
                    }
                    continue;
                }
                if self.pairs.contains(&(0, 1)) && (k0 + k1).abs() > e {
                    continue;
                }
                let mut lo = -kmax;
                let mut hi = kmax;
                for &(i, j) in &self.pairs {
                    if j == last {
                        let other = if i == 0 { k0 } else { k1 };
                        lo = lo.max(-other - e);
                        hi = hi.min(-other + e);
                    }
                }
                for k2 in lo..=hi {
                    if check([k0, k1, k2]) && !visit([k0, k1, k2]) {
                        return;
                    }
                }
            }
        }
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, monotone in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = bump(x);
        a / (a + bump(1.0 - x))
    }
}

/// Cutoff equal to 1 on the inner set and 0 off the outer set.
///
/// The radial factor rises smoothly across `[ρ_lo, 4ρ_lo/3]` and falls across
/// `[5ρ_hi/6, ρ_hi]`. Inner and outer sets share the same pair-sum bound, so the
/// pair factor is the indicator of `|ξ_i + ξ_j| ≤ ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpec {
    pub support: SupportSet,
}

impl CutoffSpec {
    pub fn new(support: SupportSet) -> Self {
        Self { support }
    }

    pub fn radial_profile(&self, r: f64) -> f64 {
        let [lo, hi] = self.support.outer;
        let [ilo, ihi] = self.support.inner;
        if r <= lo || r >= hi {
            0.0
        } else if r < ilo {
            smooth_step((r - lo) / (ilo - lo))
        } else if r <= ihi {
            1.0
        } else {
            smooth_step((hi - r) / (hi - ihi))
        }
    }

    /// Cutoff value at `ξ`; zero when the dimension does not match.
    pub fn value(&self, xi: &[f64]) -> f64 {
        if xi.len() != self.support.dim || !self.support.pairs_hold(xi) {
            return 0.0;
        }
        self.radial_profile(norm(xi))
    }
}

/// Cutoff value of `spec` at `ξ`.
pub fn cutoff_value(xi: &[f64], spec: &CutoffSpec) -> f64 {
    spec.value(xi)
}

/// Membership test of `ξ` in the outer set.
pub fn support_membership(xi: &[f64], set: &SupportSet) -> Result<bool> {
    set.contains(xi, Region::Outer)
}
