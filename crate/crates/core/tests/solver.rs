mod common;

use common::{cross_solver_gaps, flow_for, observe_nothing, observed_orders, random_state, solver_config};
use tcm_core::data::DataCase;
use tcm_core::flow::PhysicalParams;
use tcm_core::solver::{
    advance_perturbation, integrate_perturbation, perturbation_rhs, BackgroundCache, OutputKind, PerturbationState,
    SolverConfig, TermMask,
};
use tcm_core::spectral::TorusGrid;
use tcm_core::Error;

fn small_grid() -> TorusGrid {
    TorusGrid::new(2, 180, 27.0).unwrap()
}

#[test]
fn perturbation_plus_background_solves_the_full_system() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let initial = random_state(&grid, 3, 1e-3, 2.5);
    let gaps = cross_solver_gaps(&flow, &initial, 2.5, &solver_config(0.05, 0.5));
    assert!(gaps.iter().all(|&g| g <= 1e-9), "{gaps:?}");
}

#[test]
fn diagonal_terms_alone_decay_exactly() {
    let grid = small_grid();
    let p = PhysicalParams::new(0.6, 1.4, 0.3).unwrap();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, p);
    let initial = random_state(&grid, 5, 0.5, 2.5);
    let config = SolverConfig { mask: TermMask::linear_only(), ..solver_config(0.3, 1.5) };
    let out = integrate_perturbation(&initial, &config, &flow, &mut observe_nothing()).unwrap().final_state;
    let t = 1.5;
    let w = initial.w.scale((-p.nu * t).exp());
    let z = initial.z.apply_multiplier(|f| (-p.eta * grid.xi_sq(f) * t).exp());
    let psi = initial.psi.scale((-p.lambda * t).exp());
    assert!(common::max_rel_diff(&out.w, &w) <= 1e-13);
    assert!(common::max_rel_diff(&out.z, &z) <= 1e-13);
    assert!(common::max_rel_diff(&out.psi, &psi) <= 1e-13);
}

#[test]
fn zero_data_stays_zero() {
    let grid = small_grid();
    let seeds = common::seeds_for(&grid, 0.3, &DataCase::TwoD).zeroed();
    let flow = tcm_core::flow::BackgroundFlow::new(PhysicalParams::default(), seeds).unwrap();
    let out = integrate_perturbation(&PerturbationState::zeros(&grid), &solver_config(0.25, 1.0), &flow, &mut observe_nothing())
        .unwrap()
        .final_state;
    assert_eq!(out.sobolev_norm(0.0).unwrap(), 0.0);
}

#[test]
fn velocity_perturbation_stays_divergence_free() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let initial = random_state(&grid, 9, 1e-2, 2.5);
    let mut worst: f64 = 0.0;
    let mut calls = Vec::new();
    let config = SolverConfig { diag_every: 0.2, snapshot_every: Some(0.3), ..solver_config(0.1, 0.6) };
    let mut observe = |s: &PerturbationState, kind: OutputKind| {
        let div = s.w.divergence()?.max_abs_coefficient();
        worst = worst.max(div / s.w.max_abs_coefficient().max(f64::MIN_POSITIVE));
        calls.push((s.t, kind.diagnostic, kind.snapshot));
        Ok(())
    };
    integrate_perturbation(&initial, &config, &flow, &mut observe).unwrap();
    assert!(worst <= 1e-12, "{worst}");
    let times: Vec<f64> = calls.iter().map(|c| c.0).collect();
    let want = [0.0, 0.2, 0.3, 0.4, 0.6];
    assert_eq!(times.len(), want.len());
    assert!(times.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{times:?}");
    assert_eq!(calls[2], (times[2], false, true));
    assert_eq!(calls[4], (times[4], true, true));
}

#[test]
fn oversized_steps_are_halved_or_rejected() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let state = PerturbationState::zeros(&grid);
    let config = SolverConfig { max_halvings: 30, ..solver_config(50.0, 50.0) };
    let traj = integrate_perturbation(&state, &config, &flow, &mut observe_nothing()).unwrap();
    assert!(traj.rejections > 0);
    assert!(traj.dt < 50.0);
    assert!(traj.final_state.sobolev_norm(2.5).unwrap().is_finite());

    let strict = SolverConfig { max_halvings: 0, ..solver_config(50.0, 50.0) };
    let err = integrate_perturbation(&state, &strict, &flow, &mut observe_nothing()).unwrap_err();
    assert!(matches!(err, Error::StepRejected(_)), "{err}");
    let cache = BackgroundCache::new(&flow);
    assert!(matches!(advance_perturbation(&state, 50.0, &strict, &cache), Err(Error::StepRejected(_))));
}

#[test]
fn rk4_converges_at_fourth_order() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let initial = random_state(&grid, 21, 1e-2, 2.5);
    let orders = observed_orders(&flow, &initial, &[0.2, 0.1, 0.05], 0.8);
    assert!(orders.iter().all(|&q| q >= 3.5), "{orders:?}");
}

#[test]
fn rhs_of_zero_state_is_the_forcing() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let mut state = PerturbationState::zeros(&grid);
    state.t = 0.4;
    let rhs = perturbation_rhs(&state, &flow).unwrap();
    let forcing = flow.compute_forcing(0.4).unwrap();
    // Only the velocity forcing is projected.
    assert!(common::max_rel_diff(&rhs.w, &forcing.f.leray_project().unwrap()) <= 1e-13);
    assert!(common::max_rel_diff(&rhs.z, &forcing.g) <= 1e-13);
    assert!(common::max_rel_diff(&rhs.psi, &forcing.h) <= 1e-13);
}

#[test]
fn invalid_configurations_are_rejected() {
    let grid = small_grid();
    let flow = flow_for(&grid, 0.3, &DataCase::TwoD, PhysicalParams::default());
    let state = PerturbationState::zeros(&grid);
    for config in [solver_config(0.0, 1.0), solver_config(0.1, -1.0), SolverConfig { cfl: 0.0, ..solver_config(0.1, 1.0) }] {
        assert!(integrate_perturbation(&state, &config, &flow, &mut observe_nothing()).is_err());
    }
    let other = TorusGrid::new(2, 16, 1.0).unwrap();
    assert!(integrate_perturbation(&PerturbationState::zeros(&other), &solver_config(0.1, 1.0), &flow, &mut observe_nothing())
        .is_err());
}

/// Fourth-order centred difference along `axis` with periodic wrap.
fn fd(grid: &TorusGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let stride = grid.stride(axis);
    let h = grid.spacing();
    let at = |flat: usize, shift: isize| {
        let idx = (flat / stride) % n;
        let moved = (idx as isize + shift).rem_euclid(n as isize) as usize;
        f[flat + moved * stride - idx * stride]
    };
    (0..f.len())
        .map(|p| (-at(p, 2) + 8.0 * at(p, 1) - 8.0 * at(p, -1) + at(p, -2)) / (12.0 * h))
        .collect()
}

type Comps = Vec<Vec<f64>>;

/// `(a·∇)b` with stencil derivatives.
fn fd_advect(grid: &TorusGrid, a: &Comps, b: &Comps) -> Comps {
    b.iter()
        .map(|bc| {
            let mut out = vec![0.0; bc.len()];
            for (j, aj) in a.iter().enumerate() {
                let d = fd(grid, bc, j);
                out.iter_mut().zip(aj).zip(d).for_each(|((o, x), y)| *o += x * y);
            }
            out
        })
        .collect()
}

fn fd_div(grid: &TorusGrid, a: &Comps) -> Vec<f64> {
    let mut out = vec![0.0; a[0].len()];
    for (j, aj) in a.iter().enumerate() {
        out.iter_mut().zip(fd(grid, aj, j)).for_each(|(o, v)| *o += v);
    }
    out
}

fn times(a: &Comps, s: &[f64]) -> Comps {
    a.iter().map(|c| c.iter().zip(s).map(|(x, y)| x * y).collect()).collect()
}

/// `−Σ terms`.
fn neg_sum(terms: &[Comps]) -> Comps {
    let mut out = vec![vec![0.0; terms[0][0].len()]; terms[0].len()];
    for t in terms {
        for (o, c) in out.iter_mut().zip(t) {
            o.iter_mut().zip(c).for_each(|(x, y)| *x -= y);
        }
    }
    out
}

fn rel_l2(got: &tcm_core::spectral::SpectralField, want: &tcm_core::spectral::SpectralField) -> f64 {
    let diff = got.try_sub(want).unwrap().l2_norm().unwrap();
    let scale = want.l2_norm().unwrap();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

struct StencilCase {
    grid: TorusGrid,
    w: Comps,
    z: Comps,
    psi: Comps,
    u: Comps,
    v: Comps,
    theta: Comps,
    state: tcm_core::solver::Triple,
    bg: tcm_core::flow::BackgroundSnapshot,
}

fn stencil_case() -> StencilCase {
    use tcm_core::flow::{BackgroundPhysical, BackgroundSnapshot, BackgroundState, ForcingTriple};
    use tcm_core::spectral::random::{band_limited_scalar, band_limited_vector, divergence_free, BandSpec};
    use tcm_core::spectral::{PhysicalJet, SpectralField};
    let grid = TorusGrid::new(2, 128, 1.0).unwrap();
    let band = BandSpec { max_xi: 4.0, decay: 1.0 };
    let w = divergence_free(&grid, 1, 0, band);
    let z = band_limited_vector(&grid, 1, 1, band);
    let psi = band_limited_scalar(&grid, 1, 2, band);
    let u = divergence_free(&grid, 1, 3, band);
    let n = band_limited_scalar(&grid, 1, 4, band);
    let theta = band_limited_scalar(&grid, 1, 5, band);
    let bg = BackgroundSnapshot {
        state: BackgroundState { t: 0.0, u: u.clone(), n: n.clone(), theta: theta.clone() },
        physical: BackgroundPhysical { u: PhysicalJet::of(&u), n: PhysicalJet::of(&n), theta: PhysicalJet::of(&theta) },
        forcing: ForcingTriple {
            t: 0.0,
            f: SpectralField::vector_zeros(&grid),
            g: SpectralField::vector_zeros(&grid),
            h: SpectralField::scalar_zeros(&grid),
        },
    };
    let v = n.replicate(2);
    StencilCase {
        w: w.to_physical(),
        z: z.to_physical(),
        psi: psi.to_physical(),
        u: u.to_physical(),
        v: v.to_physical(),
        theta: theta.to_physical(),
        state: tcm_core::solver::Triple { x: w, y: z, s: psi },
        bg,
        grid,
    }
}

fn check_group(c: &StencilCase, mask: TermMask, x: Comps, y: Comps, s: Comps) {
    use tcm_core::spectral::SpectralField;
    let got = tcm_core::solver::perturbation_nonlinear(&c.state, &c.bg, mask).unwrap().value;
    let want_x = SpectralField::from_physical(&c.grid, &x).unwrap().leray_project().unwrap();
    let want_y = SpectralField::from_physical(&c.grid, &y).unwrap();
    let want_s = SpectralField::from_physical(&c.grid, &s).unwrap();
    for (name, got, want) in [("w", &got.x, &want_x), ("z", &got.y, &want_y), ("psi", &got.s, &want_s)] {
        let e = rel_l2(got, want);
        assert!(e <= 1e-4, "{mask:?} {name}: {e:.2e}");
    }
}

#[test]
fn rhs_terms_match_finite_difference_stencils() {
    let c = stencil_case();
    let g = &c.grid;
    let off = TermMask { linear: false, coupling: false, nonlinear: false, background: false, forcing: false };

    let div_z = fd_div(g, &c.z);
    check_group(
        &c,
        TermMask { nonlinear: true, ..off },
        neg_sum(&[fd_advect(g, &c.w, &c.w), fd_advect(g, &c.z, &c.z), times(&c.z, &div_z)]),
        neg_sum(&[fd_advect(g, &c.w, &c.z), fd_advect(g, &c.z, &c.w)]),
        neg_sum(&[fd_advect(g, &c.w, &c.psi)]),
    );

    let div_v = fd_div(g, &c.v);
    check_group(
        &c,
        TermMask { background: true, ..off },
        neg_sum(&[
            fd_advect(g, &c.u, &c.w),
            fd_advect(g, &c.w, &c.u),
            fd_advect(g, &c.v, &c.z),
            fd_advect(g, &c.z, &c.v),
            times(&c.z, &div_v),
            times(&c.v, &div_z),
        ]),
        neg_sum(&[fd_advect(g, &c.u, &c.z), fd_advect(g, &c.w, &c.v), fd_advect(g, &c.v, &c.w), fd_advect(g, &c.z, &c.u)]),
        neg_sum(&[fd_advect(g, &c.w, &c.theta), fd_advect(g, &c.u, &c.psi)]),
    );

    let grad_psi: Comps = (0..2).map(|j| fd(g, &c.psi[0], j)).collect();
    check_group(
        &c,
        TermMask { coupling: true, ..off },
        vec![vec![0.0; g.len()]; 2],
        neg_sum(&[grad_psi]),
        neg_sum(&[vec![div_z.clone()]]),
    );
}
