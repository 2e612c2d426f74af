//! Size reports for the assembled data.

use super::seeds::{loglog, restrict_to_inner, InitialTriple, Perturbation, SeedFields};
use crate::error::{Error, Result};
use crate::flow::PhysicalParams;

/// `H^s` sizes of the initial data against `log log(1/ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargenessReport {
    pub eps: f64,
    pub s: f64,
    pub loglog: f64,
    pub u0_hs: f64,
    pub v0_hs: f64,
    pub theta0_hs: f64,
    pub u0_ratio: f64,
    pub v0_ratio: f64,
    pub theta0_ratio: f64,
    /// `‖U₀‖_{H^s}` counting only the inner set, a lower bound for `‖U₀‖_{H^s}`.
    pub u0_inner_hs: f64,
}

impl LargenessReport {
    pub fn entries(&self) -> Vec<(String, String)> {
        [
            ("eps", self.eps),
            ("s", self.s),
            ("loglog", self.loglog),
            ("u0_Hs", self.u0_hs),
            ("v0_Hs", self.v0_hs),
            ("theta0_Hs", self.theta0_hs),
            ("u0_ratio", self.u0_ratio),
            ("v0_ratio", self.v0_ratio),
            ("theta0_ratio", self.theta0_ratio),
            ("U0_inner_Hs", self.u0_inner_hs),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
    }
}

pub fn largeness_report(triple: &InitialTriple, seeds: &SeedFields, s: f64) -> Result<LargenessReport> {
    let ll = loglog(seeds.eps)?;
    let u0_hs = triple.u0().sobolev_norm(s)?;
    let v0_hs = triple.v0().sobolev_norm(s)?;
    let theta0_hs = triple.theta0().sobolev_norm(s)?;
    let u0_inner_hs = restrict_to_inner(&triple.background.u, &seeds.primary).sobolev_norm(s)?;
    Ok(LargenessReport {
        eps: seeds.eps,
        s,
        loglog: ll,
        u0_hs,
        v0_hs,
        theta0_hs,
        u0_ratio: u0_hs / ll,
        v0_ratio: v0_hs / ll,
        theta0_ratio: theta0_hs / ll,
        u0_inner_hs,
    })
}

/// The unnamed constants of the smallness condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessConstants {
    pub c: f64,
    pub c2: f64,
}

impl Default for SmallnessConstants {
    fn default() -> Self {
        Self { c: 1.0, c2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessReport {
    pub perturbation_hs: f64,
    /// `‖(m₀, n₀, r₀)‖_{H^{s+2}}`.
    pub seeds_hs2: f64,
    /// `‖(n₀, r₀)‖_{H^{s+2}}`.
    pub nr_hs2: f64,
    pub lhs: f64,
    /// Natural log of `lhs`, finite even when `lhs` overflows.
    pub ln_lhs: f64,
    pub delta: f64,
    /// `δ · min{ν, η, λ}`.
    pub threshold: f64,
    pub satisfied: bool,
}

impl SmallnessReport {
    pub fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("perturbation_Hs".into(), self.perturbation_hs.to_string()),
            ("seeds_Hs2".into(), self.seeds_hs2.to_string()),
            ("nr_Hs2".into(), self.nr_hs2.to_string()),
            ("smallness_lhs".into(), self.lhs.to_string()),
            ("smallness_ln_lhs".into(), self.ln_lhs.to_string()),
            ("delta".into(), self.delta.to_string()),
            ("smallness_threshold".into(), self.threshold.to_string()),
            ("smallness_satisfied".into(), self.satisfied.to_string()),
        ]
    }
}

/// `[‖(w₀,z₀,ψ₀)‖_{H^s} + Cε(‖(m₀,n₀,r₀)‖²_{H^{s+2}} + ‖(n₀,r₀)‖_{H^{s+2}})]
/// · exp(C(‖(m₀,n₀,r₀)‖_{H^{s+2}} + ‖(n₀,r₀)‖²_{H^{s+2}}))` against `δ min{ν,η,λ}`
/// with `δ = 1/(4C₂)`.
pub fn smallness_condition_lhs(
    perturbation: &Perturbation,
    seeds: &SeedFields,
    s: f64,
    constants: SmallnessConstants,
    params: &PhysicalParams,
) -> Result<SmallnessReport> {
    if !(constants.c > 0.0 && constants.c2 > 0.0) {
        return Err(Error::InvalidParameter("constants C and C₂ must be positive".into()));
    }
    let s2 = s + 2.0;
    let m2 = seeds.m0.sobolev_norm_sq(s2)?;
    let n2 = seeds.n0.sobolev_norm_sq(s2)?;
    let r2 = seeds.r0.sobolev_norm_sq(s2)?;
    let a = (m2 + n2 + r2).sqrt();
    let b = (n2 + r2).sqrt();
    let p = perturbation.sobolev_norm(s)?;
    let c = constants.c;
    let bracket = p + c * seeds.eps * (a * a + b);
    let exponent = c * (a + b * b);
    let lhs = bracket * exponent.exp();
    let ln_lhs = bracket.ln() + exponent;
    let delta = 1.0 / (4.0 * constants.c2);
    let threshold = delta * params.min_rate();
    Ok(SmallnessReport {
        perturbation_hs: p,
        seeds_hs2: a,
        nr_hs2: b,
        lhs,
        ln_lhs,
        delta,
        threshold,
        satisfied: lhs <= threshold,
    })
}
