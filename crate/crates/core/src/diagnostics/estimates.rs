//! Time integrals of the background and forcing against their analytic caps.

use crate::data::SeedFields;
use crate::error::{Error, Result};
use crate::flow::{background_norm_series, graded_time_grid, linear_norm_series, BackgroundFlow, NormSeries};
use crate::flow::PhysicalParams;

/// Grid grading and truncation used for the time integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOptions {
    /// Grading of the grid for `U, V, Θ`, which only touches the support modes.
    pub kappa_linear: f64,
    /// Grading of the grid for `f, g, h`, which needs transforms at every node.
    pub kappa_forcing: f64,
    /// Tail left out by the finite horizon, `e^{−(slowest rate)·T}`.
    pub tail: f64,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self { kappa_linear: 1e-3, kappa_forcing: 0.05, tail: 1e-8 }
    }
}

/// Slowest and fastest exponential rates present in the background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub slowest: f64,
    pub fastest: f64,
}

pub fn decay_rates(flow: &BackgroundFlow) -> DecayRates {
    let p = flow.params();
    let seeds = flow.seeds();
    let mut slowest = f64::INFINITY;
    let mut fastest: f64 = p.nu.max(p.lambda).max(p.eta);
    if seeds.m0.max_abs_coefficient() > 0.0 {
        slowest = slowest.min(p.nu);
    }
    if seeds.r0.max_abs_coefficient() > 0.0 {
        slowest = slowest.min(p.lambda);
    }
    for (_, a, _, n0, r0) in flow.mode_table() {
        if n0.norm() > 0.0 || r0.norm() > 0.0 {
            slowest = slowest.min(a);
        }
        fastest = fastest.max(a);
    }
    DecayRates { slowest, fastest }
}

/// `T` with `e^{−(slowest rate)·T} = tail`; zero for vanishing data.
pub fn integration_horizon(flow: &BackgroundFlow, tail: f64) -> Result<f64> {
    let rates = decay_rates(flow);
    if rates.slowest.is_infinite() {
        return Ok(0.0);
    }
    if !(rates.slowest > 0.0) {
        return Err(Error::InvalidParameter(
            "a background component does not decay; its time integral over [0, ∞) diverges".into(),
        ));
    }
    Ok((1.0 / tail).ln() / rates.slowest)
}

/// The six quantities bounded by the lemma: `L¹ₜH^{s+1}` of `U, V, Θ` and
/// `L¹ₜH^s` of `f, g, h`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LemmaQuantities {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl LemmaQuantities {
    pub const NAMES: [&'static str; 6] = ["U", "V", "Theta", "f", "g", "h"];

    pub fn as_array(&self) -> [f64; 6] {
        [self.u, self.v, self.theta, self.f, self.g, self.h]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self { u: a[0], v: a[1], theta: a[2], f: a[3], g: a[4], h: a[5] }
    }
}

/// Measured integrals, caps without their constant, and the implied constants at one `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub eps: f64,
    pub s: f64,
    pub horizon: f64,
    pub measured: LemmaQuantities,
    pub caps: LemmaQuantities,
    /// `measured / cap`, zero when both vanish.
    pub constants: LemmaQuantities,
}

/// Right-hand sides of the bounds with every constant set to one.
pub fn analytic_caps(seeds: &SeedFields, s: f64) -> Result<LemmaQuantities> {
    let eps = seeds.eps;
    let m = |f: &crate::spectral::SpectralField, k: f64| f.sobolev_norm_sq(s + k).map(f64::sqrt);
    let (m2, n2, r2) = (m(&seeds.m0, 2.0)?, m(&seeds.n0, 2.0)?, m(&seeds.r0, 2.0)?);
    let (m1, r1) = (m(&seeds.m0, 1.0)?, m(&seeds.r0, 1.0)?);
    let (n0s, r0s) = (m(&seeds.n0, 0.0)?, m(&seeds.r0, 0.0)?);
    let quad = eps * (m2 * m2 + n2 * n2 + r2 * r2);
    let three_d = seeds.dim() == 3;
    Ok(LemmaQuantities {
        u: m2,
        v: n2 + r2,
        theta: if three_d { r2 } else { r1 },
        f: quad,
        g: if three_d { quad + eps * r0s } else { quad },
        h: eps * (n0s + r1 + m1 * m1 + r1 * r1),
    })
}

/// Measures the lemma's time integrals over `[0, T]` and compares them with the caps.
///
/// `horizon = None` picks `T` so the neglected tail is `options.tail`; an explicit
/// horizon shorter than that is rejected.
pub fn lemma_bound_report(
    seeds: &SeedFields,
    params: &PhysicalParams,
    s: f64,
    horizon: Option<f64>,
    options: &IntegralOptions,
) -> Result<EstimateRow> {
    let flow = BackgroundFlow::new(*params, seeds.clone())?;
    let needed = integration_horizon(&flow, options.tail)?;
    let horizon = match horizon {
        Some(t) if t < needed * (1.0 - 1e-12) => {
            return Err(Error::InvalidParameter(format!(
                "horizon {t} leaves a tail above {}; need T ≥ {needed}",
                options.tail
            )))
        }
        Some(t) => t,
        None => needed,
    };
    let caps = analytic_caps(seeds, s)?;
    let measured = if flow.is_zero() || horizon == 0.0 {
        LemmaQuantities::default()
    } else {
        let tau0 = 1.0 / decay_rates(&flow).fastest;
        let fine = graded_time_grid(tau0, options.kappa_linear, horizon)?;
        let lin = linear_norm_series(&flow, s + 1.0, &fine)?;
        let t: Vec<f64> = lin.iter().map(|r| r.t).collect();
        let integral = |y: Vec<f64>| *crate::flow::cumulative_integral(&t, &y).last().unwrap_or(&0.0);
        let u = integral(lin.iter().map(|r| r.u).collect());
        let v = integral(lin.iter().map(|r| r.v).collect());
        let theta = integral(lin.iter().map(|r| r.theta).collect());
        let coarse = graded_time_grid(tau0, options.kappa_forcing, horizon)?;
        let forcing = background_norm_series(&flow, s, &coarse)?;
        let last = forcing.last().expect("graded grid is nonempty");
        LemmaQuantities { u, v, theta, f: last.cum_f, g: last.cum_g, h: last.cum_h }
    };
    let ratio = |m: f64, c: f64| if m == 0.0 { 0.0 } else if c == 0.0 { f64::INFINITY } else { m / c };
    let (mv, cv) = (measured.as_array(), caps.as_array());
    let constants = LemmaQuantities::from_array(std::array::from_fn(|k| ratio(mv[k], cv[k])));
    Ok(EstimateRow { eps: seeds.eps, s, horizon, measured, caps, constants })
}

/// Rows for several `ε`, with log-log slopes of the measured integrals and the
/// spread `max/min` of each implied constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
    /// Least-squares slope of `ln measured` against `ln ε`; NaN when undefined.
    pub slopes: LemmaQuantities,
    pub constant_spread: LemmaQuantities,
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return f64::NAN;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

impl EstimateReport {
    pub fn from_rows(rows: Vec<EstimateRow>) -> Self {
        let mut slopes = [f64::NAN; 6];
        let mut spread = [f64::NAN; 6];
        for k in 0..6 {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.measured.as_array()[k] > 0.0)
                .map(|r| (r.eps.ln(), r.measured.as_array()[k].ln()))
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            slopes[k] = fit_slope(&x, &y);
            let c: Vec<f64> = rows.iter().map(|r| r.constants.as_array()[k]).collect();
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            spread[k] = if c.is_empty() || hi == 0.0 { 1.0 } else { hi / lo };
        }
        Self { rows, slopes: LemmaQuantities::from_array(slopes), constant_spread: LemmaQuantities::from_array(spread) }
    }
}

/// Background norm series on a graded grid refined to contain every time in `times`.
pub fn norm_series_including(flow: &BackgroundFlow, s: f64, times: &[f64], kappa: f64) -> Result<NormSeries> {
    let end = times.iter().cloned().fold(0.0, f64::max);
    let tau0 = 1.0 / decay_rates(flow).fastest;
    let mut grid = graded_time_grid(tau0, kappa, end)?;
    grid.extend(times.iter().copied().filter(|&t| t >= 0.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    background_norm_series(flow, s, &grid)
}
