use std::f64::consts::PI;

use jacobi_isp::specfun::{
    gamma, gamma_complex, gauss_2f1, harish_chandra_c, jacobi_phi, mittag_leffler, plancherel_density, weight_a,
    JacobiParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

// Reference values below were produced with mpmath at 40 digits.

#[test]
fn gamma_complex_reference_values() {
    let cases = [
        ((1.0, 1.0), (0.498_015_668_118_356_04, -0.154_949_828_301_810_69)),
        ((0.5, 2.0), (0.089_855_176_706_431_636, -0.060_493_760_292_887_568)),
        ((-2.5, 0.3), (-0.613_822_997_437_741_49, -0.211_232_614_937_041_78)),
        ((7.0, -3.0), (311.635_558_099_522_27, 197.569_776_954_401_2)),
    ];
    for ((re, im), (gr, gi)) in cases {
        let g = gamma_complex(Complex64::new(re, im)).unwrap();
        let want = Complex64::new(gr, gi);
        assert!((g - want).norm() <= 1e-13 * want.norm(), "Γ({re}+{im}i) = {g}");
    }
    assert_eq!(gamma(1.0).unwrap(), 1.0);
    assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-15);
}

#[test]
fn gauss_2f1_reference_values() {
    let c = |x: f64| Complex64::new(x, 0.0);
    let v = gauss_2f1(c(1.0), c(1.0), c(2.0), 0.5).unwrap();
    assert!(rel(v.re, 2.0 * 2f64.ln()) < 1e-14);
    let v = gauss_2f1(c(0.5), c(0.75), c(0.75), -1.0).unwrap();
    assert!(rel(v.re, 0.5f64.sqrt()) < 1e-14);
    let v = gauss_2f1(c(0.5), c(1.5), c(2.5), -3.0).unwrap();
    assert!(rel(v.re, 0.619_827_001_849_526_83) < 1e-13);
    let v = gauss_2f1(Complex64::new(1.0, 2.0), Complex64::new(1.0, -2.0), c(1.5), 0.6).unwrap();
    assert!(rel(v.re, 8.825_014_378_587_477_9) < 1e-12 && v.im.abs() < 1e-12);
    // large imaginary parameters well beyond z = −1
    let v = gauss_2f1(Complex64::new(0.5, 10.0), Complex64::new(0.5, -10.0), c(1.0), -(1.5f64.sinh().powi(2))).unwrap();
    assert!((v.re + 0.047_804_153_138_213_360).abs() < 1e-13 && v.im.abs() < 1e-13, "{v}");
    let v = gauss_2f1(Complex64::new(1.5, 7.0), Complex64::new(0.25, -3.0), c(2.5), -20.0).unwrap();
    let want = Complex64::new(0.027_378_252_075_726_668, -0.001_320_975_504_447_216_2);
    assert!((v - want).norm() < 1e-10 * want.norm(), "{v}");
    let v = gauss_2f1(c(3.3), c(-1.2), c(0.7), 0.0).unwrap();
    assert_eq!(v, c(1.0));
}

#[test]
fn jacobi_phi_reference_values() {
    let cases = [
        ((0.0, 0.0), 1.5, 0.7, 0.664_976_914_764_183_09),
        ((1.0, 0.5), 3.0, 2.0, -0.009_435_058_660_075_368_8),
        ((0.5, -0.5), 0.25, 4.0, 0.123_338_004_835_934_18),
        ((2.0, 1.0), 10.0, 0.3, 0.382_183_363_106_272_67),
        ((0.0, 0.0), 0.0, 1.0, 0.795_651_695_605_974_02),
    ];
    for ((a, b), l, x, want) in cases {
        let p = JacobiParams::new(a, b).unwrap();
        let v = jacobi_phi(&p, l, x).unwrap();
        assert!((v - want).abs() < 1e-12, "phi^({a},{b})_{l}({x}) = {v}, want {want}");
    }
    let v = jacobi_phi(&JacobiParams::cosine(), 2.0, 0.5).unwrap();
    assert!((v - 1f64.cos()).abs() < 1e-13);
    let v = jacobi_phi(&JacobiParams::new(0.0, 0.0).unwrap(), 1.0, 1.0).unwrap();
    assert!(v.abs() <= 1.0);
}

#[test]
fn weight_and_c_function_reference_values() {
    let p00 = JacobiParams::new(0.0, 0.0).unwrap();
    assert!(rel(weight_a(&p00, 1.0).unwrap(), 4.0 * 1f64.sinh() * 1f64.cosh()) < 1e-15);
    assert_eq!(weight_a(&p00, 0.0).unwrap(), 0.0);
    assert_eq!(weight_a(&JacobiParams::cosine(), 3.7).unwrap(), 1.0);
    let cases = [
        ((0.0, 0.0), 1.3, (0.385_578_601_379_715_21, -0.598_173_287_908_431_95), 1.974_403_282_190_978_2),
        ((1.0, 0.5), 2.0, (-0.878_777_239_061_068_87, -1.274_540_498_435_234_7), 0.417_239_864_178_243_71),
        ((0.5, -0.5), 0.7, (0.0, -1.428_571_428_571_428_7), 0.49),
    ];
    for ((a, b), l, (cr, ci), dens) in cases {
        let p = JacobiParams::new(a, b).unwrap();
        let c = harish_chandra_c(&p, l).unwrap();
        assert!((c - Complex64::new(cr, ci)).norm() < 1e-13, "c = {c}");
        assert!(rel(plancherel_density(&p, l).unwrap(), dens) < 1e-13);
    }
    for l in [0.1, 1.0, 10.0, 50.0] {
        let c = harish_chandra_c(&JacobiParams::cosine(), l).unwrap();
        assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }
    assert_eq!(plancherel_density(&p00, 0.0).unwrap(), 0.0);
    assert!(plancherel_density(&p00, 1e-4).unwrap() < 1e-6);
}

#[test]
fn mittag_leffler_reference_values() {
    let cases = [
        (0.5, 1.0, -1.0, 0.427_583_576_155_807_0),
        (0.5, 1.0, -2.0, 0.255_395_676_310_505_74),
        (0.8, 1.8, -0.5, 0.793_952_568_274_392_6),
        (0.3, 1.3, 0.7, 3.106_885_893_379_177_4),
        (0.9, 1.0, -1.0, 0.376_066_021_424_641_88),
        (1.0, 1.0, 1.0, std::f64::consts::E),
    ];
    for (g, b, t, want) in cases {
        let v = mittag_leffler(g, b, t).unwrap();
        assert!(rel(v, want) < 1e-12, "E_({g},{b})({t}) = {v}, want {want}");
    }
    for g in [0.1, 0.5, 1.0] {
        assert_eq!(mittag_leffler(g, 1.0, 0.0).unwrap(), 1.0);
    }
}

/// lower and upper bounds 1/(1 + Γ(1−γ)t) ≤ E_{γ,1}(−t) ≤ 1/(1 + t/Γ(1+γ))
fn simon(g: f64, t: f64) -> (f64, f64) {
    (1.0 / (1.0 + gamma(1.0 - g).unwrap() * t), 1.0 / (1.0 + t / gamma(1.0 + g).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_reflection(re in -4.5f64..4.5, im in 0.05f64..4.0) {
        let z = Complex64::new(re, im);
        let lhs = gamma_complex(z).unwrap() * gamma_complex(Complex64::new(1.0, 0.0) - z).unwrap();
        let rhs = Complex64::new(PI, 0.0) / (z * PI).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn gamma_recurrence(re in 0.1f64..20.0, im in -5.0f64..5.0) {
        let z = Complex64::new(re, im);
        let lhs = gamma_complex(z + 1.0).unwrap();
        let rhs = z * gamma_complex(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn phi_bounded_and_even(alpha in -0.5f64..2.0, d in 0.0f64..1.0, l in 0.0f64..20.0, x in 0.0f64..3.0) {
        let beta = (alpha - d * (alpha + 0.5)).max(-0.5);
        let p = JacobiParams::new(alpha, beta).unwrap();
        let v = jacobi_phi(&p, l, x).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12, "|phi| = {}", v.abs());
        // λ → −λ swaps the first two ₂F₁ parameters
        let rho = p.rho();
        let z = -(x.sinh().powi(2));
        let swapped = gauss_2f1(
            Complex64::new(rho / 2.0, -l / 2.0),
            Complex64::new(rho / 2.0, l / 2.0),
            Complex64::new(alpha + 1.0, 0.0),
            z,
        );
        if let Ok(w) = swapped {
            prop_assert!((v - w.re).abs() <= 1e-10 * (1.0 + w.re.abs()), "{v} vs {}", w.re);
        }
    }

    #[test]
    fn ml_in_unit_interval_on_negative_axis(g in 0.05f64..1.0, t in 0.0f64..200.0) {
        let v = mittag_leffler(g, 1.0, -t - 1e-3).unwrap();
        prop_assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn ml_simon_bounds(g in 0.05f64..0.99, t in 0.01f64..50.0) {
        let v = mittag_leffler(g, 1.0, -t).unwrap();
        let (lo, hi) = simon(g, t);
        prop_assert!(lo < v && v < hi, "{lo} < {v} < {hi}");
    }

    /// E_{γ,β}(t) = 1/Γ(β) + t E_{γ,γ+β}(t)
    #[test]
    fn ml_shift_identity(g in 0.1f64..1.0, b in 0.5f64..2.5, t in -40.0f64..1.0) {
        let lhs = mittag_leffler(g, b, t).unwrap();
        let rhs = 1.0 / gamma(b).unwrap() + t * mittag_leffler(g, g + b, t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    /// d/dt E_{γ,1}(−t^γ) = −t^{γ−1} E_{γ,γ}(−t^γ), checked by central differences
    #[test]
    fn ml_derivative_identity(g in 0.2f64..1.0, t in 0.2f64..5.0) {
        let e = |s: f64| mittag_leffler(g, 1.0, -(s.powf(g))).unwrap();
        let h = 1e-5 * t;
        let fd = (e(t + h) - e(t - h)) / (2.0 * h);
        let exact = -t.powf(g - 1.0) * mittag_leffler(g, g, -(t.powf(g))).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-7 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }
}
