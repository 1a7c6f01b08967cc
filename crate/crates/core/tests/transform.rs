use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use jacobi_isp::quadrature::composite_gauss_legendre;
use jacobi_isp::specfun::{jacobi_phi, weight_a, JacobiParams};
use jacobi_isp::transform::{
    build_spatial_grid, build_spectral_grid, forward_transform, inverse_transform, norm_h, norm_l2_mu, norm_l2_nu,
    FourierJacobi, SampledFunction, SpectralFunction,
};
use proptest::prelude::*;

fn pair(p: JacobiParams, x_max: f64, n_x: usize, l_max: f64, n_l: usize) -> FourierJacobi {
    let xg = build_spatial_grid(&p, x_max, n_x).unwrap();
    let sg = build_spectral_grid(&p, l_max, n_l).unwrap();
    FourierJacobi::new(xg, sg).unwrap()
}

fn cosine_pair() -> FourierJacobi {
    pair(JacobiParams::cosine(), 10.0, 512, 30.0, 512)
}

fn gaussian(ft: &FourierJacobi) -> SampledFunction {
    SampledFunction::from_fn(ft.spatial().clone(), |x| (-x * x).exp()).unwrap()
}

fn rel_l2_mu(a: &SampledFunction, b: &SampledFunction) -> f64 {
    norm_l2_mu(&a.combine(1.0, b, -1.0).unwrap()) / norm_l2_mu(b)
}

#[test]
fn gaussian_cosine_transform_closed_form() {
    let ft = cosine_pair();
    let g = ft.forward(&gaussian(&ft)).unwrap();
    for (l, v) in ft.spectral().nodes().iter().zip(g.values()) {
        if *l <= 10.0 {
            assert!((v - (-l * l / 4.0).exp() / (2.0 * 2f64.sqrt())).abs() < 1e-6);
        }
    }
}

#[test]
fn cosine_forward_matches_independent_quadrature() {
    // plain cosine quadrature on a differently sized grid
    let ft = cosine_pair();
    let g = ft.forward(&gaussian(&ft)).unwrap();
    let (xs, ws) = composite_gauss_legendre(12.0, 80);
    let c = 1.0 / (2.0 * PI).sqrt();
    for (l, v) in ft.spectral().nodes().iter().zip(g.values()).step_by(7) {
        let want: f64 = xs.iter().zip(&ws).map(|(x, w)| w * c * (-x * x).exp() * (l * x).cos()).sum();
        assert!((v - want).abs() < 1e-8);
    }
}

#[test]
fn narrow_gaussian_samples_phi() {
    // f ≈ δ at x0 with μ-mass m: f̂(λ) ≈ m φ_λ(x0)
    let p = JacobiParams::new(0.0, 0.0).unwrap();
    let (x0, s) = (1.0, 0.01);
    let ft = pair(p, 2.0, 2048, 5.0, 64);
    let f = SampledFunction::from_fn(ft.spatial().clone(), |x| (-((x - x0) / s).powi(2)).exp()).unwrap();
    let fh = ft.forward(&f).unwrap();
    let (xs, ws) = composite_gauss_legendre(2.0, 4 * 2048 / 16);
    let c = 1.0 / (2.0 * PI).sqrt();
    let mass: f64 = xs.iter().zip(&ws).map(|(&x, w)| w * c * weight_a(&p, x).unwrap() * (-((x - x0) / s).powi(2)).exp()).sum();
    for (l, v) in ft.spectral().nodes().iter().zip(fh.values()) {
        let want = mass * jacobi_phi(&p, *l, x0).unwrap();
        // the bump's width smears φ by O(s²)
        assert!((v - want).abs() < 1e-3 * mass, "lambda={l}: {v} vs {want}");
    }
}

#[test]
fn round_trip_cosine_and_zero_zero() {
    let ft = cosine_pair();
    let f = gaussian(&ft);
    let back = ft.inverse(&ft.forward(&f).unwrap()).unwrap();
    assert!(rel_l2_mu(&back, &f) <= 1e-5);

    let ft = pair(JacobiParams::new(0.0, 0.0).unwrap(), 10.0, 512, 30.0, 512);
    let f = gaussian(&ft);
    let back = ft.inverse(&ft.forward(&f).unwrap()).unwrap();
    let err = rel_l2_mu(&back, &f);
    assert!(err <= 1e-3, "{err}");
}

#[test]
fn free_functions_agree_with_cached_kernel() {
    let ft = pair(JacobiParams::new(0.5, 0.0).unwrap(), 6.0, 128, 12.0, 96);
    let f = SampledFunction::from_fn(ft.spatial().clone(), |x| (-2.0 * x * x).exp() * (1.0 + x)).unwrap();
    let a = ft.forward(&f).unwrap();
    let b = forward_transform(&f, ft.spectral()).unwrap();
    for (u, v) in a.values().iter().zip(b.values()) {
        assert!((u - v).abs() < 1e-14);
    }
    let a = ft.inverse(&b).unwrap();
    let c = inverse_transform(&b, ft.spatial()).unwrap();
    for (u, v) in a.values().iter().zip(c.values()) {
        assert!((u - v).abs() < 1e-14);
    }
}

#[test]
fn norm_examples() {
    let ft = cosine_pair();
    let f = gaussian(&ft);
    assert!((norm_l2_mu(&f).powi(2) - 0.25).abs() < 1e-12);
    let g = SpectralFunction::from_fn(ft.spectral().clone(), |l| (-l * l / 4.0).exp()).unwrap();
    assert!((norm_h(&g).powi(2) - 6.0).abs() < 1e-9);
    let g3 = SpectralFunction::from_fn(ft.spectral().clone(), |l| -3.0 * (-l * l / 4.0).exp()).unwrap();
    assert!((norm_h(&g3) - 3.0 * norm_h(&g)).abs() < 1e-12 * norm_h(&g3));
    let zero = SpectralFunction::from_fn(ft.spectral().clone(), |_| 0.0).unwrap();
    assert_eq!(norm_h(&zero), 0.0);
    assert_eq!(norm_l2_nu(&zero), 0.0);
}

#[test]
fn spectral_weights_cosine_case() {
    let sg = build_spectral_grid(&JacobiParams::cosine(), 20.0, 256).unwrap();
    let (nodes, w) = composite_gauss_legendre(20.0, 16);
    let k = 4.0 / (2.0 * PI).sqrt();
    for i in 0..nodes.len() {
        assert!((sg.nodes()[i] - nodes[i]).abs() < 1e-15);
        assert!((sg.weights()[i] - k * w[i]).abs() <= 1e-12 * k * w[i]);
    }
}

#[test]
fn csv_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let ft = pair(JacobiParams::new(0.0, 0.0).unwrap(), 5.0, 64, 10.0, 32);
    let f = SampledFunction::from_fn(ft.spatial().clone(), |x| (x * 0.3).sin() / (1.0 + x)).unwrap();
    let path = dir.path().join("f.csv");
    f.write_csv(&path).unwrap();
    let back = SampledFunction::read_csv(&path, ft.spatial().clone()).unwrap();
    assert_eq!(back.values(), f.values());
    let g = ft.forward(&f).unwrap();
    let path = dir.path().join("g.csv");
    g.write_csv(&path).unwrap();
    assert_eq!(SpectralFunction::read_csv(&path, ft.spectral().clone()).unwrap().values(), g.values());
    // reading onto another grid is refused
    let other = build_spatial_grid(&JacobiParams::new(0.0, 0.0).unwrap(), 6.0, 64).unwrap();
    assert!(SampledFunction::read_csv(&dir.path().join("f.csv"), other).unwrap_err().is_usage());
}

#[test]
fn refinement_converges() {
    // forward transform of a Gaussian at the (0,0) case: error against a
    // fine reference shrinks when the spatial grid doubles
    let p = JacobiParams::new(0.0, 0.0).unwrap();
    let sg = build_spectral_grid(&p, 10.0, 32).unwrap();
    let transform = |n: usize| {
        let xg = build_spatial_grid(&p, 8.0, n).unwrap();
        let f = SampledFunction::from_fn(xg, |x| (-2.0 * x * x).exp()).unwrap();
        forward_transform(&f, &sg).unwrap().values().to_vec()
    };
    let reference = transform(1024);
    let err = |v: Vec<f64>| v.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (e16, e32) = (err(transform(16)), err(transform(32)));
    assert!(e32 < 0.1 * e16, "{e16} -> {e32}");
    assert!(err(transform(128)) < 1e-12);
}

fn plancherel_defect(cosine: bool, f: impl Fn(f64) -> f64) -> f64 {
    static PAIRS: [OnceLock<FourierJacobi>; 2] = [OnceLock::new(), OnceLock::new()];
    let ft = PAIRS[cosine as usize].get_or_init(|| {
        let p = if cosine { JacobiParams::cosine() } else { JacobiParams::new(0.0, 0.0).unwrap() };
        pair(p, 10.0, 512, 30.0, 512)
    });
    let f = SampledFunction::from_fn(ft.spatial().clone(), f).unwrap();
    let n = norm_l2_mu(&f);
    (norm_l2_nu(&ft.forward(&f).unwrap()) - n).abs() / n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plancherel_gaussians(width in 0.6f64..2.0, cosine in any::<bool>()) {
        let d = plancherel_defect(cosine, |x| (-(x / width).powi(2)).exp());
        prop_assert!(d < 1e-5, "defect {d}");
    }

    #[test]
    fn linearity(a in -5.0f64..5.0, b in -5.0f64..5.0, w in 0.5f64..2.0) {
        let ft = pair(JacobiParams::new(0.5, -0.5).unwrap(), 8.0, 128, 16.0, 128);
        let f = SampledFunction::from_fn(ft.spatial().clone(), |x| (-x * x).exp()).unwrap();
        let g = SampledFunction::from_fn(ft.spatial().clone(), |x| (-(x / w).powi(2)).exp() * x).unwrap();
        let lhs = ft.forward(&f.combine(a, &g, b).unwrap()).unwrap();
        let rhs = ft.forward(&f).unwrap().combine(a, &ft.forward(&g).unwrap(), b).unwrap();
        let scale = norm_l2_nu(&lhs).max(1e-300);
        let d = norm_l2_nu(&lhs.combine(1.0, &rhs, -1.0).unwrap());
        prop_assert!(d <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn forward_of_zero_and_tiny_grid() {
    let xg = build_spatial_grid(&JacobiParams::cosine(), 1.0, 8).unwrap();
    assert_eq!(xg.len(), 16);
    let sg = build_spectral_grid(&JacobiParams::cosine(), 1.0, 8).unwrap();
    let z = SampledFunction::zeros(Arc::clone(&xg));
    assert!(forward_transform(&z, &sg).unwrap().values().iter().all(|v| *v == 0.0));
    assert!(build_spatial_grid(&JacobiParams::cosine(), 0.0, 64).is_err());
}
