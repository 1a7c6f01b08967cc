//! Gamma function for real and complex arguments.
//!
//! Lanczos approximation with g = 7 and nine coefficients, continued to the
//! left half-plane by the reflection formula Γ(z)Γ(1−z) = π / sin(πz).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for gamma values and complex hypergeometric parameters.
pub type ComplexValue = Complex64;

/// Distance from a non-positive integer inside which an argument counts as a pole.
pub const POLE_GUARD: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// True if `z` lies within [`POLE_GUARD`] of 0, −1, −2, ...
pub fn is_near_pole(z: Complex64) -> bool {
    let n = z.re.round();
    n <= 0.0 && (z.re - n).abs() < POLE_GUARD && z.im.abs() < POLE_GUARD
}

fn pole_error(z: Complex64) -> Error {
    Error::Pole(format!("{}{:+}i", z.re, z.im))
}

/// ln Γ(z) for Re z ≥ 1/2 via Lanczos.
fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + series.ln() + LN_SQRT_2PI
}

/// ln sin(w), stable for large |Im w| where sin itself overflows.
fn ln_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im > 20.0 {
        // sin w ≈ (i/2) e^{-iw}
        Complex64::new(-std::f64::consts::LN_2, PI / 2.0) - i * w
    } else if w.im < -20.0 {
        Complex64::new(-std::f64::consts::LN_2, -PI / 2.0) + i * w
    } else {
        w.sin().ln()
    }
}

/// Logarithm of the complex gamma function.
///
/// The imaginary part is on some branch of the logarithm; only `exp` of the
/// result is meaningful, which is how the c-function uses it.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite gamma argument {z}")));
    }
    if is_near_pole(z) {
        return Err(pole_error(z));
    }
    if z.re < 0.5 {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin(z * PI) - ln_gamma_lanczos(one_minus))
    } else {
        Ok(ln_gamma_lanczos(z))
    }
}

/// Complex gamma function Γ(z).
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite gamma argument {z}")));
    }
    if is_near_pole(z) {
        return Err(pole_error(z));
    }
    let value = if z.re < 0.5 {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        PI / ((z * PI).sin() * ln_gamma_lanczos(one_minus).exp())
    } else {
        ln_gamma_lanczos(z).exp()
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("gamma({z})")))
    }
}

fn lanczos_real(x: f64) -> f64 {
    // Γ(x) for x ≥ 1/2, computed directly to avoid the complex log.
    if x == x.round() && x <= 171.0 {
        // exact factorial; products of integers below 2^53 are exact up to 22!
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * series
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the argument in the Lanczos range.
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// Real gamma function. Poles map to `Err(Pole)`.
pub fn gamma(x: f64) -> Result<f64> {
    if is_near_pole(Complex64::new(x, 0.0)) {
        return Err(pole_error(Complex64::new(x, 0.0)));
    }
    let value = if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x)?)
    } else if x > 140.0 {
        ln_gamma(x).exp()
    } else {
        lanczos_real(x)
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("gamma({x})")))
    }
}

/// Reciprocal gamma 1/Γ(x), an entire function: zero at the poles of Γ and
/// underflowing smoothly for large positive x.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    if x >= 0.5 {
        if x > 140.0 {
            return (-ln_gamma(x)).exp();
        }
        return 1.0 / lanczos_real(x);
    }
    // 1/Γ(x) = sin(πx) Γ(1−x) / π
    let one_minus = 1.0 - x;
    let g = if one_minus > 140.0 {
        ln_gamma(one_minus).exp()
    } else {
        lanczos_real(one_minus)
    };
    (PI * x).sin() * g / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_one_and_half() {
        let g1 = gamma_complex(Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(g1.re, 1.0, max_relative = 1e-14);
        assert!(g1.im.abs() < 1e-15);
        let gh = gamma_complex(Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(gh.re, PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn gamma_one_plus_i() {
        // Reference from a 30-digit evaluation.
        let g = gamma_complex(Complex64::new(1.0, 1.0)).unwrap();
        let expected = Complex64::new(0.498_015_668_118_356_04, -0.154_949_828_301_810_69);
        assert!((g - expected).norm() / expected.norm() < 1e-13);
    }

    #[test]
    fn poles_are_rejected() {
        for n in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma_complex(Complex64::new(n, 0.0)), Err(Error::Pole(_))));
            assert!(matches!(gamma(n), Err(Error::Pole(_))));
        }
        assert!(gamma_complex(Complex64::new(-1.0 + 1e-9, 0.0)).is_ok());
    }

    #[test]
    fn real_and_reciprocal_agree() {
        for &x in &[0.1, 0.5, 1.5, 3.7, 10.2, -0.5, -3.3, 150.5] {
            let g = gamma(x).unwrap();
            assert_relative_eq!(rgamma(x) * g, 1.0, max_relative = 1e-12);
        }
        assert_eq!(rgamma(-4.0), 0.0);
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(0.25), 3.625_609_908_221_908_3_f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &(re, im) in &[(0.3, 2.0), (-2.5, 0.7), (4.0, -9.0), (0.0, 30.0)] {
            let z = Complex64::new(re, im);
            let direct = gamma_complex(z).unwrap();
            let via_log = ln_gamma_complex(z).unwrap().exp();
            assert!((direct - via_log).norm() / direct.norm() < 1e-12, "{z}");
        }
    }
}
