use proptest::prelude::*;
use tcm_core::spectral::random::{band_limited_scalar, band_limited_vector, divergence_free, with_sobolev_norm, BandSpec};
use tcm_core::spectral::{
    advection, bessel_weight, commutator_js, dealiased_product, load_snapshot, save_snapshot, SpectralField, TorusGrid,
};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `∫|f|² dx` by the rectangle rule on the samples, exact for trigonometric polynomials.
fn physical_l2_sq(grid: &TorusGrid, samples: &[Vec<f64>]) -> f64 {
    let cell = grid.spacing().powi(grid.dim() as i32);
    samples.iter().flatten().map(|v| v * v).sum::<f64>() * cell
}

fn phase(k: &[i64], l: f64, p: [f64; 3]) -> f64 {
    k.iter().zip(p).map(|(&kj, x)| kj as f64 * x / l).sum()
}

#[test]
fn pure_mode_derivatives_are_exact() {
    for (dim, k) in [(2usize, vec![3i64, -5]), (3, vec![2, -1, 4])] {
        let l = 1.7;
        let grid = TorusGrid::new(dim, 24, l).unwrap();
        let f = SpectralField::scalar_from_fn(&grid, |p| phase(&k, l, p).sin());
        for axis in 0..dim {
            let got = f.partial_derivative(axis).unwrap().component_physical(0);
            let want: Vec<f64> =
                (0..grid.len()).map(|i| k[axis] as f64 / l * phase(&k, l, grid.position(i)).cos()).collect();
            assert!(max_diff(&got, &want) <= 1e-12, "dim {dim} axis {axis}: {}", max_diff(&got, &want));
        }
        let lap = f.laplacian().component_physical(0);
        let k2: f64 = k.iter().map(|&v| (v as f64 / l).powi(2)).sum();
        let want: Vec<f64> = (0..grid.len()).map(|i| -k2 * phase(&k, l, grid.position(i)).sin()).collect();
        assert!(max_diff(&lap, &want) <= 1e-12 * k2.max(1.0));
    }
}

#[test]
fn nyquist_plane_has_no_derivative() {
    let grid = TorusGrid::new(2, 16, 1.0).unwrap();
    // cos(8x) is the Nyquist mode of a 16-point axis.
    let f = SpectralField::scalar_from_fn(&grid, |p| (8.0 * p[0]).cos());
    assert!(max_abs(&f.partial_derivative(0).unwrap().component_physical(0)) == 0.0);
    assert!(f.partial_derivative(2).is_err());
}

#[test]
fn sobolev_norm_matches_physical_quadrature() {
    let grid = TorusGrid::new(2, 32, 1.3).unwrap();
    let f = band_limited_scalar(&grid, 3, 0, BandSpec { max_xi: 8.0, decay: 1.0 });
    let l2_sq = physical_l2_sq(&grid, &f.to_physical());
    let spectral = f.sobolev_norm_sq(0.0).unwrap();
    assert!((spectral - l2_sq).abs() <= 1e-12 * l2_sq);

    // A single real mode: ‖J^s f‖ = (1 + |ξ|²)^{s/2} ‖f‖.
    let k = [4i64, -2];
    let g = SpectralField::scalar_from_fn(&grid, |p| phase(&k, 1.3, p).cos());
    let xi_sq = (4.0f64 / 1.3).powi(2) + (2.0f64 / 1.3).powi(2);
    let base = physical_l2_sq(&grid, &g.to_physical());
    for s in [0.5, 2.5, 3.0] {
        let want = base * (1.0 + xi_sq).powf(s);
        assert!((g.sobolev_norm_sq(s).unwrap() - want).abs() <= 1e-12 * want);
        assert!((g.gradient_norm_sq(s).unwrap() - xi_sq * want).abs() <= 1e-12 * xi_sq * want);
    }
    assert_eq!(bessel_weight(xi_sq, 0.0), 1.0);
}

#[test]
fn leray_projection_on_explicit_fields() {
    let grid = TorusGrid::new(3, 16, 1.0).unwrap();
    let phi = SpectralField::scalar_from_fn(&grid, |p| (p[0] + 2.0 * p[1]).sin() * (3.0 * p[2]).cos());
    let grad = phi.gradient().unwrap();
    let killed = grad.leray_project().unwrap();
    assert!(killed.max_abs_coefficient() <= 1e-12 * grad.max_abs_coefficient());

    let psi = band_limited_vector(&grid, 5, 0, BandSpec::flat(4.0));
    let curl = psi.curl().unwrap();
    let kept = curl.leray_project().unwrap();
    assert!(kept.try_sub(&curl).unwrap().max_abs_coefficient() <= 1e-12 * curl.max_abs_coefficient());
    assert!(curl.divergence().unwrap().max_abs_coefficient() <= 1e-12 * curl.max_abs_coefficient());
}

#[test]
fn perp_gradient_is_divergence_free() {
    let grid = TorusGrid::new(2, 32, 2.0).unwrap();
    let m = band_limited_scalar(&grid, 1, 0, BandSpec::flat(5.0));
    let u = m.perp_gradient().unwrap();
    assert!(u.divergence().unwrap().max_abs_coefficient() <= 1e-12 * u.max_abs_coefficient());
    // (−∂₂m, ∂₁m) componentwise.
    let dx = m.partial_derivative(0).unwrap();
    let dy = m.partial_derivative(1).unwrap();
    assert_eq!(u.component(0), dy.scale(-1.0).component(0));
    assert_eq!(u.component(1), dx.component(0));
}

#[test]
fn band_limited_products_need_no_truncation() {
    let l = 1.0;
    let grid = TorusGrid::new(2, 48, l).unwrap();
    let a = SpectralField::scalar_from_fn(&grid, |p| (3.0 * p[0]).sin() + (2.0 * p[1]).cos());
    let b = SpectralField::scalar_from_fn(&grid, |p| (4.0 * p[0] - p[1]).cos());
    let prod = dealiased_product(&a, &b).unwrap().component_physical(0);
    let want: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.position(i);
            ((3.0 * p[0]).sin() + (2.0 * p[1]).cos()) * (4.0 * p[0] - p[1]).cos()
        })
        .collect();
    assert!(max_diff(&prod, &want) <= 1e-12);
}

#[test]
fn advection_of_explicit_fields() {
    let grid = TorusGrid::new(2, 32, 1.0).unwrap();
    let a0 = SpectralField::scalar_from_fn(&grid, |p| p[1].sin());
    let a1 = SpectralField::scalar_from_fn(&grid, |p| (2.0 * p[0]).cos());
    let a = SpectralField::stack(&[a0, a1]).unwrap();
    let b = SpectralField::scalar_from_fn(&grid, |p| (p[0] + p[1]).sin());
    let got = advection(&a, &b).unwrap().component_physical(0);
    let want: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.position(i);
            (p[1].sin() + (2.0 * p[0]).cos()) * (p[0] + p[1]).cos()
        })
        .collect();
    assert!(max_diff(&got, &want) <= 1e-12);
}

#[test]
fn commutator_of_two_modes() {
    // F = cos(a·x), G = cos(b·x): [J^s, F]G = ½Σ± (w(a±b) − w(b)) cos((a±b)·x).
    let grid = TorusGrid::new(2, 48, 1.0).unwrap();
    let (a, b) = ([3.0, 1.0], [-2.0, 4.0]);
    let f = SpectralField::scalar_from_fn(&grid, |p| (a[0] * p[0] + a[1] * p[1]).cos());
    let g = SpectralField::scalar_from_fn(&grid, |p| (b[0] * p[0] + b[1] * p[1]).cos());
    let s = 2.5;
    let w = |k: [f64; 2]| (1.0 + k[0] * k[0] + k[1] * k[1]).powf(s / 2.0);
    let plus = [a[0] + b[0], a[1] + b[1]];
    let minus = [a[0] - b[0], a[1] - b[1]];
    let got = commutator_js(&f, &g, s).unwrap().component_physical(0);
    let want: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.position(i);
            0.5 * (w(plus) - w(b)) * (plus[0] * p[0] + plus[1] * p[1]).cos()
                + 0.5 * (w(minus) - w(b)) * (minus[0] * p[0] + minus[1] * p[1]).cos()
        })
        .collect();
    assert!(max_diff(&got, &want) <= 1e-10 * max_abs(&want));

    let one = SpectralField::scalar_from_fn(&grid, |_| 1.0);
    assert!(commutator_js(&one, &g, s).unwrap().max_abs_coefficient() <= 1e-12 * g.js_apply(s).max_abs_coefficient());
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(3, 16, 2.5).unwrap();
    let f = divergence_free(&grid, 9, 2, BandSpec { max_xi: 2.0, decay: 1.0 });
    let path = dir.path().join("f.tcmf");
    save_snapshot(&path, &f).unwrap();
    let back = load_snapshot(&path, grid.dealias_fraction()).unwrap();
    assert_eq!(back.components(), f.components());
    assert_eq!(back.grid(), &grid);
    std::fs::write(&path, b"not a snapshot").unwrap();
    assert!(load_snapshot(&path, grid.dealias_fraction()).is_err());
}

#[test]
fn grids_reject_bad_shapes() {
    assert!(TorusGrid::new(1, 16, 1.0).is_err());
    assert!(TorusGrid::new(2, 15, 1.0).is_err());
    assert!(TorusGrid::new(2, 16, 0.0).is_err());
    assert!(TorusGrid::with_dealias(2, 16, 1.0, 0.0).is_err());
}

fn samples(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0e3..1.0e3f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(data in samples(16 * 16)) {
        let grid = TorusGrid::new(2, 16, 0.9).unwrap();
        let f = SpectralField::from_physical(&grid, &[data.clone()]).unwrap();
        let back = f.component_physical(0);
        prop_assert!(max_diff(&back, &data) <= 1e-12 * max_abs(&data).max(1.0));
        prop_assert!(f.hermitian_defect() <= 1e-12 * f.max_abs_coefficient().max(1.0));
    }

    #[test]
    fn paired_transforms_match_single(a in samples(16 * 16 * 16), b in samples(16 * 16 * 16), c in samples(16 * 16 * 16)) {
        let grid = TorusGrid::new(3, 16, 1.0).unwrap();
        let many = grid.forward_many(&[&a, &b, &c]);
        for (one, data) in many.iter().zip([&a, &b, &c]) {
            let single = grid.forward(data);
            let err = one.iter().zip(&single).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
            let scale = single.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            prop_assert!(err <= 1e-13 * scale);
        }
        let refs: Vec<&[_]> = many.iter().map(|v| v.as_slice()).collect();
        let back = grid.inverse_many(&refs);
        for (x, data) in back.iter().zip([&a, &b, &c]) {
            prop_assert!(max_diff(x, data) <= 1e-12 * max_abs(data));
            prop_assert!(max_diff(x, &grid.inverse(&grid.forward(data))) <= 1e-12 * max_abs(data));
        }
    }

    #[test]
    fn leray_is_an_idempotent_divergence_free_projection(seed in 0u64..1000, dim in 2usize..=3) {
        let grid = TorusGrid::new(dim, 16, 1.1).unwrap();
        let v = band_limited_vector(&grid, seed, 0, BandSpec::flat(4.0));
        let p = v.leray_project().unwrap();
        let pp = p.leray_project().unwrap();
        let scale = v.max_abs_coefficient();
        prop_assert!(pp.try_sub(&p).unwrap().max_abs_coefficient() <= 1e-12 * scale);
        prop_assert!(p.divergence().unwrap().max_abs_coefficient() <= 1e-12 * scale);
        // Orthogonal: ⟨Pv, v − Pv⟩ = 0.
        let rest = v.try_sub(&p).unwrap();
        let cross = p.inner_product(&rest).unwrap();
        prop_assert!(cross.abs() <= 1e-12 * v.inner_product(&v).unwrap());
    }

    #[test]
    fn derivatives_commute_and_are_skew(seed in 0u64..1000) {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let f = band_limited_scalar(&grid, seed, 0, BandSpec::flat(5.0));
        let g = band_limited_scalar(&grid, seed, 1, BandSpec::flat(5.0));
        let fxy = f.partial_derivative(0).unwrap().partial_derivative(1).unwrap();
        let fyx = f.partial_derivative(1).unwrap().partial_derivative(0).unwrap();
        prop_assert!(fxy.try_sub(&fyx).unwrap().max_abs_coefficient() <= 1e-12 * fxy.max_abs_coefficient().max(1e-300));
        // ⟨∂f, g⟩ = −⟨f, ∂g⟩.
        let lhs = f.partial_derivative(0).unwrap().inner_product(&g).unwrap();
        let rhs = -f.inner_product(&g.partial_derivative(0).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + 1.0));
    }

    #[test]
    fn rescaling_hits_the_target_norm(seed in 0u64..1000, s in 0.0..4.0f64, target in 1e-6..1e3f64) {
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let w = divergence_free(&grid, seed, 0, BandSpec { max_xi: 4.0, decay: s });
        let r = with_sobolev_norm(&w, s, target).unwrap();
        prop_assert!((r.sobolev_norm_sq(s).unwrap().sqrt() - target).abs() <= 1e-12 * target);
        prop_assert!(r.divergence().unwrap().max_abs_coefficient() <= 1e-12 * r.max_abs_coefficient());
    }
}
