//! Gauss hypergeometric function ₂F₁(a, b; c; z) on the real line z < 1.
//!
//! Negative arguments are mapped into [0, 1) by the Pfaff transformation
//! ₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)) before summing the
//! power series. For z < −1 the 1/(1−z) connection formula is tried as well
//! and the route with the smaller rounding estimate is kept: with large
//! parameters the Pfaff series cancels badly as z/(z−1) approaches 1.

use num_complex::Complex64;

use super::gamma::{is_near_pole, ln_gamma_complex};
use crate::error::{Error, Result};

/// Series iteration cap.
pub const MAX_TERMS: usize = 10_000;
/// Relative tail tolerance for series termination.
pub const TAIL_TOL: f64 = 1e-14;

/// Result of a summed series together with the largest term seen, which
/// bounds the rounding error of the sum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesSum {
    pub value: Complex64,
    pub max_term: f64,
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

#[inline]
pub(crate) fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Sums Σ (a)_k (b)_k / ((c)_k k!) w^k for 0 ≤ w < 1.
pub(crate) fn hyp2f1_series(a: Complex64, b: Complex64, c: Complex64, w: f64) -> Result<SeriesSum> {
    debug_assert!((0.0..1.0).contains(&w));
    let mut acc = CompensatedSum::default();
    let mut term = Complex64::new(1.0, 0.0);
    acc.add(term);
    let mut max_term = 1.0_f64;
    let mut prev_norm = 1.0_f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * w;
        let norm = term.norm();
        if norm == 0.0 {
            // terminating (polynomial) case
            return Ok(SeriesSum { value: acc.value(), max_term });
        }
        acc.add(term);
        max_term = max_term.max(norm);
        let ratio = norm / prev_norm;
        prev_norm = norm;
        let scale = acc.value().norm().max(f64::MIN_POSITIVE);
        if ratio < 1.0 && norm * ratio / (1.0 - ratio) <= TAIL_TOL * scale && norm <= TAIL_TOL * scale {
            return Ok(SeriesSum { value: acc.value(), max_term });
        }
        if !norm.is_finite() {
            return Err(Error::Overflow("hypergeometric series term".into()));
        }
    }
    Err(Error::Convergence { what: "2F1 series", iterations: MAX_TERMS })
}

fn check_c(c: Complex64) -> Result<()> {
    if is_near_pole(c) {
        Err(Error::Pole(format!("2F1 lower parameter c = {c}")))
    } else {
        Ok(())
    }
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real z < 1.
///
/// ```
/// use jacobi_isp::specfun::{gauss_2f1, ComplexValue};
/// let one = ComplexValue::new(1.0, 0.0);
/// let two = ComplexValue::new(2.0, 0.0);
/// let v = gauss_2f1(one, one, two, 0.5).unwrap();
/// assert!((v.re - 2.0 * 2f64.ln()).abs() < 1e-12);
/// ```
pub fn gauss_2f1(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    check_c(c)?;
    if !z.is_finite() || z >= 1.0 {
        return Err(Error::Domain(format!("2F1 argument z = {z} outside z < 1")));
    }
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if z > 0.0 {
        return Ok(hyp2f1_series(a, b, c, z)?.value);
    }
    let w = z / (z - 1.0);
    let pfaff = if w < 1.0 {
        let prefactor = (-a * (1.0 - z).ln()).exp();
        hyp2f1_series(a, c - b, c, w).map(|s| (prefactor * s.value, prefactor.norm() * s.max_term))
    } else {
        Err(Error::Convergence { what: "2F1 Pfaff argument rounds to 1", iterations: 0 })
    };
    let connection = if z < -1.0 { connection_1_over_1mz(a, b, c, z) } else { None };
    match (pfaff, connection) {
        (Ok((v, e)), Some((vc, ec))) => Ok(if ec < e { vc } else { v }),
        (Ok((v, _)), None) => Ok(v),
        (Err(_), Some((vc, _))) => Ok(vc),
        (Err(e), None) => Err(e),
    }
}

/// ₂F₁(a,b;c;z) = Γ(c)Γ(b−a)/(Γ(b)Γ(c−a)) (1−z)^{−a} ₂F₁(a, c−b; a−b+1; 1/(1−z))
///              + Γ(c)Γ(a−b)/(Γ(a)Γ(c−b)) (1−z)^{−b} ₂F₁(b, c−a; b−a+1; 1/(1−z)),
/// with a rounding scale. `None` when a − b is (near) an integer or a gamma
/// factor sits on a pole; the caller then keeps the Pfaff route.
fn connection_1_over_1mz(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Option<(Complex64, f64)> {
    let one = Complex64::new(1.0, 0.0);
    let d = a - b;
    if (d.re - d.re.round()).abs() < 1e-3 && d.im.abs() < 1e-3 {
        return None;
    }
    let ln1mz = (1.0 - z).ln();
    let w = 1.0 / (1.0 - z);
    let half = |a: Complex64, b: Complex64| -> Option<(Complex64, f64)> {
        if is_near_pole(a) || is_near_pole(c - b) {
            // 1/Γ vanishes: the half does not contribute
            return Some((Complex64::new(0.0, 0.0), 0.0));
        }
        let ln_coef = ln_gamma_complex(c).ok()? + ln_gamma_complex(b - a).ok()?
            - ln_gamma_complex(b).ok()?
            - ln_gamma_complex(c - a).ok()?
            - a * ln1mz;
        let coef = ln_coef.exp();
        let s = hyp2f1_series(a, c - b, a - b + one, w).ok()?;
        let v = coef * s.value;
        (v.re.is_finite() && v.im.is_finite()).then(|| (v, coef.norm() * s.max_term))
    };
    let (v1, e1) = half(a, b)?;
    let (v2, e2) = half(b, a)?;
    Some((v1 + v2, e1 + e2))
}
