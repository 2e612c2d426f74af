use proptest::prelude::*;
use tcm_core::data::{
    all_pairs, amplitudes, assemble_background_initial, build_perturbation, cutoff_value, largeness_report, loglog,
    restrict_to_inner, smallness_condition_lhs, smooth_step, support_membership, support_sets, synthesize_seed_fields,
    CutoffSpec, DataCase, InitialTriple, Perturbation, PerturbationSpec, Region, SmallnessConstants, SupportSet,
};
use tcm_core::flow::PhysicalParams;
use tcm_core::spectral::random::{band_limited_vector, BandSpec};
use tcm_core::spectral::TorusGrid;

/// Lattice points of `{|ξ_i + ξ_j| ≤ ε, lo ≤ |ξ| ≤ hi}` by scanning the whole cube.
fn brute_force(dim: usize, eps: f64, pairs: &[(usize, usize)], lo: f64, hi: f64, l: f64) -> Vec<Vec<i64>> {
    let r = (hi * l).ceil() as i64;
    let mut out = Vec::new();
    let mut k = vec![-r; dim];
    loop {
        let xi: Vec<f64> = k.iter().map(|&v| v as f64 / l).collect();
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pairs_ok = pairs.iter().all(|&(i, j)| (xi[i] + xi[j]).abs() <= eps * (1.0 + 1e-12));
        if pairs_ok && norm >= lo && norm <= hi {
            out.push(k.clone());
        }
        let mut axis = 0;
        loop {
            if axis == dim {
                return out;
            }
            k[axis] += 1;
            if k[axis] <= r {
                break;
            }
            k[axis] = -r;
            axis += 1;
        }
    }
}

fn sorted(points: Vec<[i64; 3]>, dim: usize) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = points.into_iter().map(|p| p[..dim].to_vec()).collect();
    v.sort();
    v
}

#[test]
fn lattice_scans_match_brute_force() {
    let planar = SupportSet::planar(0.2).unwrap();
    let mut want = brute_force(2, 0.2, &[(0, 1)], 1.0, 2.0, 40.0);
    want.sort();
    assert_eq!(sorted(planar.lattice_points(40.0), 2), want);

    let low = SupportSet::planar_low(0.2).unwrap();
    let mut want = brute_force(2, 0.2, &[(0, 1)], 0.2, 0.4, 40.0);
    want.sort();
    assert_eq!(sorted(low.lattice_points(40.0), 2), want);

    let two_pair = SupportSet::spatial(0.35, vec![(0, 1), (0, 2)]).unwrap();
    let mut want = brute_force(3, 0.35, &[(0, 1), (0, 2)], 1.0, 2.0, 12.0);
    want.sort();
    assert!(!want.is_empty());
    assert_eq!(sorted(two_pair.lattice_points(12.0), 3), want);
}

#[test]
fn all_pair_constraints_leave_nothing_in_the_shell() {
    // |ξ_i| ≤ 3ε/2 whenever all three pair sums are at most ε, so |ξ| ≤ 3√3ε/2 < 1.
    for eps in [0.3, 0.2, 0.1, 0.05] {
        let set = SupportSet::spatial_all_pairs(eps).unwrap();
        assert!(3.0 * 3f64.sqrt() * eps / 2.0 < set.min_radius());
        let l = (8.0 / eps).ceil();
        assert!(set.lattice_is_empty(l), "eps {eps}");
        assert!(set.lattice_points(l).is_empty());
    }
    assert_eq!(all_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
}

#[test]
fn amplitude_laws() {
    let eps: f64 = 0.05;
    let ll = (1.0 / eps).ln().ln();
    let a2 = amplitudes(eps, 2).unwrap();
    assert_eq!((a2.m, a2.n, a2.r), (ll / eps.sqrt(), ll.sqrt() / eps.sqrt(), ll.sqrt() / eps));
    let a3 = amplitudes(eps, 3).unwrap();
    assert_eq!((a3.m, a3.n, a3.r), (ll / eps, ll.sqrt() / eps, ll.sqrt() / eps));
    assert!(amplitudes(eps, 4).is_err());
    for bad in [0.0, -0.1, (-1.0f64).exp(), 0.5, f64::NAN] {
        assert!(loglog(bad).is_err(), "{bad}");
    }
    assert!(loglog(0.3678).unwrap() > 0.0);
}

#[test]
fn seeds_sit_on_the_support_with_plateau_amplitudes() {
    let eps = 0.2;
    let grid = TorusGrid::new(2, 256, 40.0).unwrap();
    let seeds = synthesize_seed_fields(&grid, eps, &DataCase::TwoD).unwrap();
    let amp = amplitudes(eps, 2).unwrap();
    let (primary, thermal) = support_sets(&DataCase::TwoD, eps).unwrap();
    let mut plateau = 0;
    for flat in 0..grid.len() {
        let xi = grid.xi_vec(flat);
        let xi = &xi[..2];
        let m = seeds.m0.component(0)[flat];
        let r = seeds.r0.component(0)[flat];
        assert_eq!(m.im, 0.0);
        if !primary.contains(xi, Region::Outer).unwrap() {
            assert_eq!(m.re, 0.0);
        }
        if primary.contains(xi, Region::Inner).unwrap() {
            assert_eq!(m.re, amp.m);
            assert_eq!(seeds.n0.component(0)[flat].re, amp.n);
            plateau += 1;
        }
        if !thermal.contains(xi, Region::Outer).unwrap() {
            assert_eq!(r.re, 0.0);
        }
        if thermal.contains(xi, Region::Inner).unwrap() {
            assert_eq!(r.re, amp.r);
        }
    }
    assert!(plateau > 0);
    let inner = restrict_to_inner(&seeds.m0, &primary);
    assert!(inner.sobolev_norm_sq(0.0).unwrap() <= seeds.m0.sobolev_norm_sq(0.0).unwrap());
}

#[test]
fn background_initial_data() {
    let grid = TorusGrid::new(2, 256, 40.0).unwrap();
    let seeds = synthesize_seed_fields(&grid, 0.2, &DataCase::TwoD).unwrap();
    let bg = assemble_background_initial(&seeds).unwrap();
    let scale = bg.u.max_abs_coefficient();
    assert!(scale > 0.0);
    assert!(bg.u.divergence().unwrap().max_abs_coefficient() <= 1e-12 * scale);
    assert_eq!(bg.v.component(0), seeds.n0.component(0));
    assert_eq!(bg.v.component(1), seeds.n0.component(0));
    assert_eq!(bg.theta.component(0), seeds.r0.component(0));

    let grid3 = TorusGrid::with_dealias(3, 72, 24.0, 1.0).unwrap();
    let case = DataCase::ThreeD { pairs: vec![(0, 1), (0, 2)] };
    let seeds3 = synthesize_seed_fields(&grid3, 0.35, &case).unwrap();
    let bg3 = assemble_background_initial(&seeds3).unwrap();
    assert!(bg3.u.max_abs_coefficient() > 0.0);
    assert!(bg3.u.divergence().unwrap().max_abs_coefficient() <= 1e-12 * bg3.u.max_abs_coefficient());
}

#[test]
fn as_written_3d_seeds_are_zero() {
    let grid = TorusGrid::with_dealias(3, 32, 27.0, 1.0).unwrap();
    let seeds = synthesize_seed_fields(&grid, 0.3, &DataCase::three_d_as_written()).unwrap();
    assert!(seeds.is_zero());
}

#[test]
fn grid_must_resolve_the_support() {
    let coarse = TorusGrid::new(2, 256, 20.0).unwrap();
    assert!(synthesize_seed_fields(&coarse, 0.2, &DataCase::TwoD).is_err());
    // Fine enough lattice but the band cannot hold |ξ| = 2.
    let narrow = TorusGrid::new(2, 64, 40.0).unwrap();
    assert!(synthesize_seed_fields(&narrow, 0.2, &DataCase::TwoD).is_err());
    let wrong_dim = TorusGrid::new(3, 16, 40.0).unwrap();
    assert!(synthesize_seed_fields(&wrong_dim, 0.2, &DataCase::TwoD).is_err());
}

#[test]
fn largeness_and_smallness_reports() {
    let eps: f64 = 0.2;
    let s = 2.5;
    let grid = TorusGrid::new(2, 256, 40.0).unwrap();
    let seeds = synthesize_seed_fields(&grid, eps, &DataCase::TwoD).unwrap();
    let bg = assemble_background_initial(&seeds).unwrap();
    let pert = build_perturbation(&grid, PerturbationSpec::Random { seed: 4, norm: 1e-3, s }).unwrap();
    let triple = InitialTriple::new(bg, pert).unwrap();
    let large = largeness_report(&triple, &seeds, s).unwrap();
    let ll = (1.0 / eps).ln().ln();
    let u0 = triple.u0().sobolev_norm_sq(s).unwrap().sqrt();
    assert!((large.u0_hs - u0).abs() <= 1e-15 * u0);
    assert!((large.u0_ratio - u0 / ll).abs() <= 1e-15 * u0 / ll);
    assert!(large.u0_inner_hs <= large.u0_hs);

    let params = PhysicalParams::new(1.0, 0.5, 2.0).unwrap();
    let constants = SmallnessConstants { c: 0.3, c2: 2.0 };
    let small = smallness_condition_lhs(&triple.perturbation, &seeds, s, constants, &params).unwrap();
    let h = |f: &tcm_core::spectral::SpectralField| f.sobolev_norm_sq(s + 2.0).unwrap();
    let a = (h(&seeds.m0) + h(&seeds.n0) + h(&seeds.r0)).sqrt();
    let b = (h(&seeds.n0) + h(&seeds.r0)).sqrt();
    let p = triple.perturbation.sobolev_norm(s).unwrap();
    assert!((p - 1e-3).abs() <= 1e-15);
    let bracket = p + 0.3 * eps * (a * a + b);
    let ln_lhs = bracket.ln() + 0.3 * (a + b * b);
    assert!((small.ln_lhs - ln_lhs).abs() <= 1e-12 * ln_lhs.abs());
    assert_eq!(small.delta, 1.0 / 8.0);
    assert_eq!(small.threshold, 0.5 / 8.0);
    assert_eq!(small.satisfied, small.lhs <= small.threshold);
    let bad = SmallnessConstants { c: 0.0, c2: 1.0 };
    assert!(smallness_condition_lhs(&triple.perturbation, &seeds, s, bad, &params).is_err());
}

#[test]
fn perturbations_are_reproducible() {
    let grid = TorusGrid::new(2, 32, 2.0).unwrap();
    let spec = PerturbationSpec::Random { seed: 17, norm: 0.25, s: 2.5 };
    let a = build_perturbation(&grid, spec).unwrap();
    let b = build_perturbation(&grid, spec).unwrap();
    assert_eq!(a.w.components(), b.w.components());
    assert_eq!(a.psi.components(), b.psi.components());
    let c = build_perturbation(&grid, PerturbationSpec::Random { seed: 18, norm: 0.25, s: 2.5 }).unwrap();
    assert_ne!(a.z.components(), c.z.components());
    assert!((a.sobolev_norm(2.5).unwrap() - 0.25).abs() <= 1e-14);
    assert!(a.w.divergence().unwrap().max_abs_coefficient() <= 1e-12 * a.w.max_abs_coefficient());
    assert_eq!(build_perturbation(&grid, PerturbationSpec::Zero).unwrap().sobolev_norm(3.0).unwrap(), 0.0);
    let neg = PerturbationSpec::Random { seed: 1, norm: -1.0, s: 2.5 };
    assert!(build_perturbation(&grid, neg).is_err());
}

#[test]
fn compressible_perturbations_are_rejected() {
    let grid = TorusGrid::new(2, 256, 40.0).unwrap();
    let seeds = synthesize_seed_fields(&grid, 0.2, &DataCase::TwoD).unwrap();
    let bg = assemble_background_initial(&seeds).unwrap();
    let mut p = Perturbation::zeros(&grid);
    p.w = band_limited_vector(&grid, 2, 0, BandSpec::flat(3.0));
    assert!(InitialTriple::new(bg, p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sets_are_symmetric_and_nested(x in -2.5..2.5f64, y in -2.5..2.5f64, z in -2.5..2.5f64, eps in 0.01..0.36f64) {
        let set = SupportSet::spatial(eps, vec![(0, 1), (0, 2)]).unwrap();
        let xi = [x, y, z];
        let neg = [-x, -y, -z];
        prop_assert_eq!(support_membership(&xi, &set).unwrap(), support_membership(&neg, &set).unwrap());
        let inner = set.contains(&xi, Region::Inner).unwrap();
        let outer = set.contains(&xi, Region::Outer).unwrap();
        prop_assert!(!inner || outer);
        let chi = cutoff_value(&xi, &CutoffSpec::new(set.clone()));
        prop_assert!((0.0..=1.0).contains(&chi));
        if inner {
            prop_assert_eq!(chi, 1.0);
        }
        if !outer {
            prop_assert_eq!(chi, 0.0);
        }
        prop_assert_eq!(chi, cutoff_value(&neg, &CutoffSpec::new(set)));
    }

    #[test]
    fn smooth_step_is_monotone(a in -0.5..1.5f64, b in -0.5..1.5f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(smooth_step(lo) <= smooth_step(hi));
        prop_assert!((smooth_step(a) + smooth_step(1.0 - a) - 1.0).abs() <= 1e-15);
    }
}
