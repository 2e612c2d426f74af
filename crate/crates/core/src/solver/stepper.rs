use std::cell::RefCell;
use std::sync::Arc;

use super::rhs::{add_linear, full_nonlinear, perturbation_nonlinear, RhsOutput, Triple};
use super::{FullState, PerturbationState, SolverConfig};
use crate::error::{Error, Result};
use crate::flow::{BackgroundFlow, BackgroundSnapshot, PhysicalParams};
use crate::spectral::{tail_energy, TorusGrid};

const CACHE_SLOTS: usize = 4;

/// Background snapshots keyed by the exact stage time, so the end of one step
/// and the start of the next share one evaluation.
pub struct BackgroundCache<'a> {
    flow: &'a BackgroundFlow,
    entries: RefCell<Vec<(f64, Arc<BackgroundSnapshot>)>>,
}

impl<'a> BackgroundCache<'a> {
    pub fn new(flow: &'a BackgroundFlow) -> Self {
        Self { flow, entries: RefCell::new(Vec::new()) }
    }

    pub fn flow(&self) -> &BackgroundFlow {
        self.flow
    }

    pub fn get(&self, t: f64) -> Result<Arc<BackgroundSnapshot>> {
        if let Some((_, s)) = self.entries.borrow().iter().find(|(k, _)| *k == t) {
            return Ok(s.clone());
        }
        let snap = Arc::new(self.flow.snapshot(t)?);
        let mut entries = self.entries.borrow_mut();
        if entries.len() == CACHE_SLOTS {
            entries.remove(0);
        }
        entries.push((t, snap.clone()));
        Ok(snap)
    }
}

/// Exact propagators of the diagonal linear part over `h/2` and `h`.
struct Factors {
    h: f64,
    x: [f64; 2],
    s: [f64; 2],
    y: [Vec<f64>; 2],
}

impl Factors {
    fn new(grid: &TorusGrid, params: &PhysicalParams, h: f64, linear: bool) -> Self {
        let (nu, eta, lambda) = if linear { (params.nu, params.eta, params.lambda) } else { (0.0, 0.0, 0.0) };
        let table = grid.xi_sq_table();
        let y = [0.5 * h, h].map(|tau| table.iter().map(|&x2| (-eta * x2 * tau).exp()).collect());
        Self {
            h,
            x: [(-nu * 0.5 * h).exp(), (-nu * h).exp()],
            s: [(-lambda * 0.5 * h).exp(), (-lambda * h).exp()],
            y,
        }
    }

    /// Applies `E(h/2)` (`full = false`) or `E(h)`.
    fn apply(&self, v: &mut Triple, full: bool) {
        let i = full as usize;
        v.x.apply_multiplier_in_place(|_| self.x[i]);
        let y = &self.y[i];
        v.y.apply_multiplier_in_place(|f| y[f]);
        v.s.apply_multiplier_in_place(|_| self.s[i]);
    }

    fn applied(&self, v: &Triple, full: bool) -> Triple {
        let mut out = v.clone();
        self.apply(&mut out, full);
        out
    }
}

fn combine(a: &Triple, coef: f64, b: &Triple) -> Result<Triple> {
    let mut out = a.clone();
    out.axpy(coef, b)?;
    Ok(out)
}

/// One integrating-factor RK4 step:
/// `y⁺ = E(h)y + h/6 [E(h)k₁ + 2E(h/2)(k₂ + k₃) + k₄]`.
fn if_rk4_step(
    nl: &mut dyn FnMut(f64, &Triple) -> Result<RhsOutput>,
    t: f64,
    t_next: f64,
    y: &Triple,
    fac: &Factors,
    speed_limit: impl Fn(f64) -> f64,
) -> Result<Triple> {
    let h = fac.h;
    let k1 = nl(t, y)?;
    let allowed = speed_limit(k1.speed);
    if h > allowed * (1.0 + 1e-12) {
        return Err(Error::StepRejected(format!(
            "Δt = {h} exceeds the CFL bound {allowed} (max speed {})",
            k1.speed
        )));
    }
    let k1 = k1.value;
    let half = t + 0.5 * h;

    let mut y2 = combine(y, 0.5 * h, &k1)?;
    fac.apply(&mut y2, false);
    y2.project()?;
    let k2 = nl(half, &y2)?.value;

    let ey_half = fac.applied(y, false);
    let mut y3 = combine(&ey_half, 0.5 * h, &k2)?;
    y3.project()?;
    let k3 = nl(half, &y3)?.value;

    let mut y4 = fac.applied(y, true);
    y4.axpy(h, &fac.applied(&k3, false))?;
    y4.project()?;
    let k4 = nl(t_next, &y4)?.value;

    let mut out = combine(y, h / 6.0, &k1)?;
    fac.apply(&mut out, true);
    let mut mid = combine(&k2, 1.0, &k3)?;
    fac.apply(&mut mid, false);
    out.axpy(h / 3.0, &mid)?;
    out.axpy(h / 6.0, &k4)?;
    out.project()?;
    if !out.is_finite() {
        return Err(Error::NonFinite(format!("state after step at t = {t}")));
    }
    Ok(out)
}

fn speed_limit(grid: &TorusGrid, cfl: f64) -> impl Fn(f64) -> f64 {
    let k = grid.kept_xi_max().max(f64::MIN_POSITIVE);
    move |speed: f64| cfl / (k * speed.max(f64::MIN_POSITIVE))
}

/// Full right-hand side `(∂ₜw, ∂ₜz, ∂ₜψ)` of the perturbation system at `state.t`.
pub fn perturbation_rhs(state: &PerturbationState, flow: &BackgroundFlow) -> Result<PerturbationState> {
    let bg = flow.snapshot(state.t)?;
    let y = state.triple();
    let mask = super::TermMask::default();
    let mut out = perturbation_nonlinear(&y, &bg, mask)?.value;
    add_linear(&mut out, &y, flow.params())?;
    Ok(PerturbationState::from_triple(state.t, out))
}

/// Full right-hand side `(∂ₜu, ∂ₜv, ∂ₜθ)` of the full system.
pub fn full_rhs(state: &FullState, params: &PhysicalParams) -> Result<FullState> {
    let y = state.triple();
    let mut out = full_nonlinear(&y, super::TermMask::default())?.value;
    add_linear(&mut out, &y, params)?;
    Ok(FullState::from_triple(state.t, out))
}

/// One step of size `dt` of the perturbation system.
pub fn advance_perturbation(
    state: &PerturbationState,
    dt: f64,
    config: &SolverConfig,
    cache: &BackgroundCache,
) -> Result<PerturbationState> {
    let grid = state.w.grid();
    let fac = Factors::new(grid, cache.flow().params(), dt, config.mask.linear);
    let mask = config.mask;
    let mut nl = |t: f64, y: &Triple| perturbation_nonlinear(y, &*cache.get(t)?, mask);
    let out = if_rk4_step(&mut nl, state.t, state.t + dt, &state.triple(), &fac, speed_limit(grid, config.cfl))?;
    Ok(PerturbationState::from_triple(state.t + dt, out))
}

/// One step of size `dt` of the full system.
pub fn advance_full(state: &FullState, dt: f64, config: &SolverConfig, params: &PhysicalParams) -> Result<FullState> {
    let grid = state.u.grid();
    let fac = Factors::new(grid, params, dt, config.mask.linear);
    let mask = config.mask;
    let mut nl = |_t: f64, y: &Triple| full_nonlinear(y, mask);
    let out = if_rk4_step(&mut nl, state.t, state.t + dt, &state.triple(), &fac, speed_limit(grid, config.cfl))?;
    Ok(FullState::from_triple(state.t + dt, out))
}

/// Result of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub final_state: S,
    pub steps: usize,
    pub rejections: usize,
    /// Step size in force at the end (after any CFL halvings).
    pub dt: f64,
    pub warnings: Vec<String>,
}

/// What an output time is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputKind {
    pub diagnostic: bool,
    pub snapshot: bool,
}

fn output_events(config: &SolverConfig, t0: f64) -> Vec<(f64, OutputKind)> {
    let mut events: Vec<(f64, OutputKind)> = config
        .output_times()
        .into_iter()
        .map(|t| (t0 + t, OutputKind { diagnostic: true, snapshot: false }))
        .collect();
    if let Some(every) = config.snapshot_every {
        let mut k = 0u64;
        loop {
            let t = k as f64 * every;
            if t > config.t_end * (1.0 + 1e-12) {
                break;
            }
            let t = t0 + t;
            match events.iter_mut().find(|(e, _)| (e - t).abs() <= 1e-9 * every) {
                Some((_, kind)) => kind.snapshot = true,
                None => events.push((t, OutputKind { diagnostic: false, snapshot: true })),
            }
            k += 1;
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    events
}

type Observer<'o, S> = dyn FnMut(&S, OutputKind) -> Result<()> + 'o;

fn integrate_generic<S>(
    initial: Triple,
    t0: f64,
    config: &SolverConfig,
    params: &PhysicalParams,
    nl: &mut dyn FnMut(f64, &Triple) -> Result<RhsOutput>,
    wrap: impl Fn(f64, Triple) -> S,
    observer: &mut Observer<'_, S>,
) -> Result<Trajectory<S>> {
    config.validate()?;
    let grid = initial.x.grid().clone();
    let limit = speed_limit(&grid, config.cfl);
    let mut warnings = Vec::new();
    let mut warned = [false; 3];
    let mut check_tail = |t: f64, y: &Triple, warnings: &mut Vec<String>| {
        for (i, (name, f)) in [("vector 1", &y.x), ("vector 2", &y.y), ("scalar", &y.s)].iter().enumerate() {
            let tail = tail_energy(f);
            if tail > config.tail_threshold && !warned[i] {
                warned[i] = true;
                let msg = format!("under-resolved {name} field at t = {t}: tail-energy fraction {tail:.3e}");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    };

    let events = output_events(config, t0);
    let mut y = initial;
    let mut t = t0;
    let mut dt = config.dt;
    let mut steps = 0usize;
    let mut rejections = 0usize;
    let mut fac: Option<Factors> = None;
    for (te, kind) in events {
        while t < te {
            let remaining = te - t;
            let n = (remaining / dt - 1e-9).ceil().max(1.0);
            let h = remaining / n;
            if fac.as_ref().is_none_or(|f| f.h != h) {
                fac = Some(Factors::new(&grid, params, h, config.mask.linear));
            }
            let t_next = if n == 1.0 { te } else { t + h };
            match if_rk4_step(nl, t, t_next, &y, fac.as_ref().unwrap(), &limit) {
                Ok(next) => {
                    y = next;
                    steps += 1;
                    t = t_next;
                }
                Err(Error::StepRejected(msg)) => {
                    rejections += 1;
                    if rejections as u32 > config.max_halvings {
                        return Err(Error::StepRejected(format!("{msg}; giving up after {rejections} halvings")));
                    }
                    dt = h / 2.0;
                    log::info!("{msg}; halving Δt to {dt}");
                }
                Err(e) => return Err(e),
            }
        }
        check_tail(t, &y, &mut warnings);
        observer(&wrap(t, y.clone()), kind)?;
    }
    Ok(Trajectory { final_state: wrap(t, y), steps, rejections, dt, warnings })
}

/// Integrates the perturbation system from `initial` to `initial.t + config.t_end`,
/// calling `observer` at every diagnostic and snapshot time (including the start).
pub fn integrate_perturbation(
    initial: &PerturbationState,
    config: &SolverConfig,
    flow: &BackgroundFlow,
    observer: &mut Observer<'_, PerturbationState>,
) -> Result<Trajectory<PerturbationState>> {
    integrate_perturbation_cached(initial, config, &BackgroundCache::new(flow), observer)
}

/// [`integrate_perturbation`] drawing background snapshots from `cache`, which the
/// observer may share.
pub fn integrate_perturbation_cached(
    initial: &PerturbationState,
    config: &SolverConfig,
    cache: &BackgroundCache,
    observer: &mut Observer<'_, PerturbationState>,
) -> Result<Trajectory<PerturbationState>> {
    let flow = cache.flow();
    initial.w.same_grid(&flow.seeds().n0)?;
    let mask = config.mask;
    let mut nl = |t: f64, y: &Triple| perturbation_nonlinear(y, &*cache.get(t)?, mask);
    integrate_generic(
        initial.triple(),
        initial.t,
        config,
        flow.params(),
        &mut nl,
        PerturbationState::from_triple,
        observer,
    )
}

/// Integrates the full system.
pub fn integrate_full(
    initial: &FullState,
    config: &SolverConfig,
    params: &PhysicalParams,
    observer: &mut Observer<'_, FullState>,
) -> Result<Trajectory<FullState>> {
    let mask = config.mask;
    let mut nl = |_t: f64, y: &Triple| full_nonlinear(y, mask);
    integrate_generic(initial.triple(), initial.t, config, params, &mut nl, FullState::from_triple, observer)
}
