#![allow(dead_code)]

use tcm_core::data::{synthesize_seed_fields, DataCase, SeedFields};
use tcm_core::flow::{BackgroundFlow, ForcingTriple, PhysicalParams};
use tcm_core::spectral::{advection, dealiased_product, SpectralField, TorusGrid};

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    refine(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 40)
}

/// `∫₀ᵗ e^{−a(t−τ)} e^{−λτ} dτ` by quadrature.
pub fn duhamel_oracle(t: f64, a: f64, lambda: f64) -> f64 {
    let f = move |tau: f64| (-a * (t - tau) - lambda * tau).exp();
    if t == 0.0 {
        return 0.0;
    }
    // The integrand peaks at e^{−min(a,λ)t}; asking for more than round-off of
    // the peak would never terminate.
    let peak = (-(a.min(lambda)) * t).exp();
    adaptive_simpson(&f, 0.0, t, 1e-14 * peak * t)
}

pub fn flow_for(grid: &TorusGrid, eps: f64, case: &DataCase, params: PhysicalParams) -> BackgroundFlow {
    BackgroundFlow::new(params, seeds_for(grid, eps, case)).unwrap()
}

pub fn seeds_for(grid: &TorusGrid, eps: f64, case: &DataCase) -> SeedFields {
    synthesize_seed_fields(grid, eps, case).unwrap()
}

pub fn two_pair() -> DataCase {
    DataCase::ThreeD { pairs: vec![(0, 1), (0, 2)] }
}

fn l2(f: &SpectralField) -> f64 {
    f.sobolev_norm_sq(0.0).unwrap().sqrt()
}

fn combine(parts: &[(f64, &SpectralField)]) -> SpectralField {
    let mut out = parts[0].1.scale(parts[0].0);
    for (a, f) in &parts[1..] {
        out.axpy(*a, f).unwrap();
    }
    out
}

/// Relative `L²` residuals of the three background equations at `t`, with `∂ₜ`
/// taken by a five-point difference of step `h` applied to `evaluate`.
pub fn background_residuals(flow: &BackgroundFlow, t: f64, h: f64) -> [f64; 3] {
    let p = *flow.params();
    let at = |dt: f64| flow.evaluate(t + dt).unwrap();
    let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
    let now = flow.evaluate(t).unwrap();
    let k = 1.0 / (12.0 * h);
    let ddt = |f: fn(&tcm_core::flow::BackgroundState) -> &SpectralField| {
        combine(&[(k, f(&m2)), (-8.0 * k, f(&m1)), (8.0 * k, f(&p1)), (-k, f(&p2))])
    };
    let u_t = ddt(|s| &s.u);
    let n_t = ddt(|s| &s.n);
    let th_t = ddt(|s| &s.theta);

    let rel = |res: SpectralField, terms: &[&SpectralField]| {
        let scale: f64 = terms.iter().map(|f| l2(f)).sum();
        if scale == 0.0 {
            0.0
        } else {
            l2(&res) / scale
        }
    };
    let nu_u = now.u.scale(p.nu);
    let r_u = rel(combine(&[(1.0, &u_t), (1.0, &nu_u)]), &[&u_t, &nu_u]);
    let lam_th = now.theta.scale(p.lambda);
    let r_th = rel(combine(&[(1.0, &th_t), (1.0, &lam_th)]), &[&th_t, &lam_th]);

    // Component i of ∇Θ + 𝔸Θ is Σ_j ∂_jΘ, the same for every i; V is (n, …, n).
    let d = flow.grid().dim();
    let mut coupling = SpectralField::scalar_zeros(flow.grid());
    for j in 0..d {
        coupling.axpy(1.0, &now.theta.partial_derivative(j).unwrap()).unwrap();
    }
    let diff = now.n.laplacian().scale(-p.eta);
    let r_v = rel(combine(&[(1.0, &n_t), (1.0, &diff), (1.0, &coupling)]), &[&n_t, &diff, &coupling]);
    [r_u, r_v, r_th]
}

/// Forcing built from `evaluate(t)` with the generic product and advection routines.
pub fn forcing_oracle(flow: &BackgroundFlow, t: f64) -> ForcingTriple {
    let st = flow.evaluate(t).unwrap();
    let d = flow.grid().dim();
    let v = st.v();
    let div_v = v.divergence().unwrap();
    let mut f = advection(&st.u, &st.u).unwrap().scale(-1.0);
    f.axpy(-1.0, &advection(&v, &v).unwrap()).unwrap();
    f.axpy(-1.0, &dealiased_product(&div_v, &v).unwrap()).unwrap();

    let mut g = advection(&st.u, &v).unwrap().scale(-1.0);
    g.axpy(-1.0, &advection(&v, &st.u).unwrap()).unwrap();
    let grad_theta = st.theta.gradient().unwrap();
    let mut a_theta = SpectralField::vector_zeros(flow.grid());
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            let dj = grad_theta.component(j).to_vec();
            a_theta.component_mut(i).iter_mut().zip(dj).for_each(|(x, y)| *x += y);
        }
    }
    g.axpy(1.0, &a_theta).unwrap();

    let mut h = div_v.scale(-1.0);
    h.axpy(-1.0, &advection(&st.u, &st.theta).unwrap()).unwrap();
    ForcingTriple { t, f, g, h }
}

pub fn max_rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let scale = a.max_abs_coefficient().max(b.max_abs_coefficient());
    if scale == 0.0 {
        return 0.0;
    }
    a.try_sub(b).unwrap().max_abs_coefficient() / scale
}

pub fn observe_nothing<S>() -> impl FnMut(&S, tcm_core::solver::OutputKind) -> tcm_core::Result<()> {
    |_: &S, _| Ok(())
}

pub fn solver_config(dt: f64, t_end: f64) -> tcm_core::solver::SolverConfig {
    tcm_core::solver::SolverConfig { dt, t_end, diag_every: t_end.max(1e-300), ..Default::default() }
}

/// Perturbation state at `t = 0` from a random seed of the given `H^s` norm.
pub fn random_state(grid: &TorusGrid, seed: u64, norm: f64, s: f64) -> tcm_core::solver::PerturbationState {
    use tcm_core::data::{build_perturbation, PerturbationSpec};
    let p = build_perturbation(grid, PerturbationSpec::Random { seed, norm, s }).unwrap();
    tcm_core::solver::PerturbationState::new(0.0, p.w, p.z, p.psi).unwrap()
}

/// `‖x_full(T) − (X(T) + x(T))‖_{H^s} / ‖X₀‖_{H^s}` for the three pairs of fields,
/// integrating the full system from background plus perturbation.
pub fn cross_solver_gaps(
    flow: &BackgroundFlow,
    initial: &tcm_core::solver::PerturbationState,
    s: f64,
    config: &tcm_core::solver::SolverConfig,
) -> [f64; 3] {
    use tcm_core::solver::{integrate_full, integrate_perturbation, FullState};
    let bg0 = flow.evaluate(0.0).unwrap();
    let full0 = FullState::new(
        0.0,
        bg0.u.try_add(&initial.w).unwrap(),
        bg0.v().try_add(&initial.z).unwrap(),
        bg0.theta.try_add(&initial.psi).unwrap(),
    )
    .unwrap();
    let full = integrate_full(&full0, config, flow.params(), &mut observe_nothing()).unwrap().final_state;
    let pert = integrate_perturbation(initial, config, flow, &mut observe_nothing()).unwrap().final_state;
    let bg = flow.evaluate(pert.t).unwrap();
    let gap = |a: &SpectralField, b: &SpectralField, c: &SpectralField, scale: &SpectralField| {
        let diff = a.try_sub(&b.try_add(c).unwrap()).unwrap();
        diff.sobolev_norm(s).unwrap() / scale.sobolev_norm(s).unwrap()
    };
    [
        gap(&full.u, &bg.u, &pert.w, &bg0.u),
        gap(&full.v, &bg.v(), &pert.z, &bg0.v()),
        gap(&full.theta, &bg.theta, &pert.psi, &bg0.theta),
    ]
}

/// `w(T)` of the perturbation run with step `dt`.
pub fn final_w(flow: &BackgroundFlow, initial: &tcm_core::solver::PerturbationState, dt: f64, t_end: f64) -> SpectralField {
    let config = solver_config(dt, t_end);
    tcm_core::solver::integrate_perturbation(initial, &config, flow, &mut observe_nothing()).unwrap().final_state.w
}

/// Observed orders `log₂(e_k / e_{k+1})` with `e_k = ‖w_{Δt_k} − w_{Δt_{k+1}}‖_{L²}`
/// for the step sequence `dts` (each half the previous).
pub fn observed_orders(flow: &BackgroundFlow, initial: &tcm_core::solver::PerturbationState, dts: &[f64], t_end: f64) -> Vec<f64> {
    let w: Vec<SpectralField> = dts.iter().map(|&dt| final_w(flow, initial, dt, t_end)).collect();
    let e: Vec<f64> = w.windows(2).map(|p| l2(&p[0].try_sub(&p[1]).unwrap())).collect();
    e.windows(2).map(|p| (p[0] / p[1]).log2()).collect()
}

/// Finalized energy records of a perturbation run sampled every `diag_every`.
pub fn energy_records(
    flow: &BackgroundFlow,
    initial: &tcm_core::solver::PerturbationState,
    s: f64,
    dt: f64,
    t_end: f64,
    diag_every: f64,
) -> Vec<tcm_core::diagnostics::DiagnosticsRecord> {
    use tcm_core::solver::{integrate_perturbation_cached, BackgroundCache, SolverConfig};
    let cache = BackgroundCache::new(flow);
    let mut records = Vec::new();
    let mut observe = |st: &tcm_core::solver::PerturbationState, _| {
        let bg = cache.get(st.t)?;
        records.push(tcm_core::diagnostics::energy_breakdown_at(st, &bg, flow.params(), s)?);
        Ok(())
    };
    let config = SolverConfig { diag_every, ..solver_config(dt, t_end) };
    integrate_perturbation_cached(initial, &config, &cache, &mut observe).unwrap();
    tcm_core::diagnostics::finalize_residuals(&mut records).unwrap();
    records
}

/// Residual of the record at time `t`.
pub fn residual_at(records: &[tcm_core::diagnostics::DiagnosticsRecord], t: f64) -> f64 {
    records.iter().find(|r| (r.t - t).abs() < 1e-9).map(|r| r.residual).unwrap()
}
