//! Two-parameter Mittag-Leffler function E_{γ,β}(t) = Σ t^k / Γ(γk + β)
//! for 0 < γ ≤ 1 on the real line, in particular the negative half-axis.
//!
//! Evaluation strategy for t < 0:
//! - |t| ≤ 1: power series with compensated summation;
//! - 0 < β < 1 + γ, γ < 1: the real integral representation obtained by
//!   collapsing the Laplace-inversion contour onto the branch cut,
//!       E_{γ,β}(−x) = 1/(πγ) ∫₀^∞ e^{−u^{1/γ}} u^{(1−β)/γ}
//!                     · [u sin πβ − x sin π(γ−β)] / (u² + 2xu cos πγ + x²) du,
//!   unless the asymptotic series already meets the tolerance;
//! - β ≥ 1 + γ/2: the recurrence E_{γ,β}(t) = (E_{γ,β−γ}(t) − 1/Γ(β−γ)) / t.

use std::f64::consts::PI;

use super::gamma::{ln_gamma, rgamma};
use super::hypergeometric::neumaier;
use super::jacobi::JacobiParams;
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::solvers::ProblemParams;

const SERIES_RADIUS: f64 = 1.0;
const SERIES_MAX_TERMS: usize = 20_000;
const QUAD_REL_TOL: f64 = 1e-14;
const ASYMPTOTIC_TERMS: usize = 10;
// Asymptotic branch is accepted when its last term is below this fraction.
const ASYMPTOTIC_ACCEPT: f64 = 1e-16;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Mittag-Leffler order gamma = {gamma} outside (0, 1]")))
    }
}

struct Series {
    value: f64,
    max_term: f64,
}

fn series(gamma: f64, beta: f64, t: f64) -> Result<Series> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut power = 1.0;
    let mut max_term = 0.0_f64;
    let mut prev = f64::INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let arg = gamma * k as f64 + beta;
        let term = power * rgamma(arg);
        neumaier(&mut sum, &mut comp, term);
        let mag = term.abs();
        max_term = max_term.max(mag);
        let total = (sum + comp).abs();
        if arg > 2.0 && mag <= prev && mag <= 1e-17 * total.max(f64::MIN_POSITIVE) {
            return Ok(Series { value: sum + comp, max_term });
        }
        prev = mag;
        power *= t;
        if !power.is_finite() || !sum.is_finite() {
            return Err(Error::Overflow(format!("Mittag-Leffler series at t = {t}")));
        }
    }
    Err(Error::Convergence { what: "Mittag-Leffler series", iterations: SERIES_MAX_TERMS })
}

/// Leading terms of E_{γ,β}(−s) ~ Σ_{k=1}^{terms} (−1)^{k+1} s^{−k} / Γ(β − γk)
/// as s → +∞ (valid for 0 < γ < 1).
pub fn mittag_leffler_asymptotic(gamma: f64, beta: f64, s: f64, terms: usize) -> f64 {
    asymptotic(gamma, beta, s, terms).0
}

/// Bound on |1/Γ(z)| that does not dip near the poles:
/// |1/Γ(z)| = |sin πz| Γ(1−z)/π ≤ Γ(1−z)/π for z < 1.
fn rgamma_envelope(z: f64) -> f64 {
    if z >= 1.0 {
        rgamma(z)
    } else {
        ln_gamma(1.0 - z).exp() / PI
    }
}

/// (sum, envelope of the first omitted term). The envelope replaces the
/// actual terms because 1/Γ(β − γk) can vanish by accident at a pole.
fn asymptotic(gamma: f64, beta: f64, s: f64, terms: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut inv_pow = 1.0;
    for k in 1..=terms {
        inv_pow /= s;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * inv_pow * rgamma(beta - gamma * k as f64);
    }
    let next = terms + 1;
    let tail = (inv_pow / s) * rgamma_envelope(beta - gamma * next as f64);
    (sum, tail)
}

/// sin(πx), exact at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round(); // r ∈ [−1, 1]
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// cos(πx) = sin(π(x + 1/2)), exact at the half-integers.
fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

fn integral_representation(gamma: f64, beta: f64, x: f64) -> Result<f64> {
    let (sin_b, sin_gb) = (sin_pi(beta), sin_pi(gamma - beta));
    let (cos_g, sin_g) = (cos_pi(gamma), sin_pi(gamma));
    let power = (1.0 - beta) / gamma;
    let inv_gamma = gamma.recip();
    let kernel = move |u: f64| {
        let num = u * sin_b - x * sin_gb;
        // u² + 2xu cos πγ + x², written without cancellation near γ = 1
        let shifted = u + x * cos_g;
        let den = shifted * shifted + (x * sin_g) * (x * sin_g);
        (-u.powf(inv_gamma)).exp() * num / den
    };
    // e^{−u^{1/γ}} < e^{−745} beyond this point
    let u_max = 745f64.powf(gamma);
    let mut breaks = vec![0.0, u_max];
    for candidate in [1.0, x, -x * cos_g, 0.5 * x, 2.0 * x] {
        if candidate > 0.0 && candidate < u_max {
            breaks.push(candidate);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let integral = if power < 0.0 {
        // u = v^{1/(p+1)} removes the integrable u^p singularity at 0
        let q = power + 1.0;
        let inv_q = q.recip();
        let vbreaks: Vec<f64> = breaks.iter().map(|u| u.powf(q)).collect();
        integrate_adaptive(|v: f64| kernel(v.powf(inv_q)), &vbreaks, QUAD_REL_TOL, 0.0, 4000)? * inv_q
    } else {
        integrate_adaptive(|u: f64| u.powf(power) * kernel(u), &breaks, QUAD_REL_TOL, 0.0, 4000)?
    };
    Ok(integral / (PI * gamma))
}

/// Two-parameter Mittag-Leffler function E_{γ,β}(t) for γ ∈ (0, 1] and real t.
///
/// E_{1,1} is evaluated as `exp` directly.
pub fn mittag_leffler(gamma: f64, beta: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !beta.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler arguments beta = {beta}, t = {t}")));
    }
    if gamma == 1.0 && beta == 1.0 {
        return Ok(t.exp());
    }
    if t == 0.0 {
        return Ok(rgamma(beta));
    }
    if t >= -SERIES_RADIUS {
        return Ok(series(gamma, beta, t)?.value);
    }
    let x = -t;
    // recurse down to β < 1 + γ/2, where the integral's endpoint exponent
    // (1 − β)/γ stays above −1/2
    if beta >= 1.0 + 0.5 * gamma {
        let lower = mittag_leffler(gamma, beta - gamma, t)?;
        return Ok((lower - rgamma(beta - gamma)) / t);
    }
    if gamma < 1.0 {
        let (asym, last) = asymptotic(gamma, beta, x, ASYMPTOTIC_TERMS);
        if last <= ASYMPTOTIC_ACCEPT * asym.abs() {
            return Ok(asym);
        }
        if beta > 0.0 {
            return integral_representation(gamma, beta, x);
        }
    }
    // remaining cases: series guarded against cancellation
    let s = series(gamma, beta, t)?;
    if s.max_term * f64::EPSILON * 64.0 <= 1e-11 * s.value.abs() {
        return Ok(s.value);
    }
    if gamma < 1.0 {
        let (asym, last) = asymptotic(gamma, beta, x, ASYMPTOTIC_TERMS);
        if last <= 1e-12 * asym.abs() {
            return Ok(asym);
        }
    }
    Err(Error::Convergence { what: "Mittag-Leffler evaluation", iterations: ASYMPTOTIC_TERMS })
}

/// 1 − E_{γ,1}(−s) for s ≥ 0, computed as s·E_{γ,1+γ}(−s) so that small s
/// keeps full relative accuracy.
pub fn ml_one_minus(gamma: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("ml_one_minus requires s >= 0, got {s}")));
    }
    if gamma == 1.0 {
        return Ok(-(-s).exp_m1());
    }
    if s == 0.0 {
        check_gamma(gamma)?;
        return Ok(0.0);
    }
    Ok(s * mittag_leffler(gamma, 1.0 + gamma, -s)?)
}

/// Mode rate B(λ) = (λ² + ρ² + m) / (1 + a(λ² + ρ²)) of the transformed equation.
pub fn ml_kernel_b(p: &JacobiParams, q: &ProblemParams, lambda: f64) -> f64 {
    let eig = lambda * lambda + p.rho() * p.rho();
    (eig + q.m()) / (1.0 + q.a() * eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn value_at_zero() {
        for g in [0.1, 0.5, 1.0] {
            assert_eq!(mittag_leffler(g, 1.0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn exponential_case() {
        assert_eq!(mittag_leffler(1.0, 1.0, 1.0).unwrap(), std::f64::consts::E);
        assert_relative_eq!(mittag_leffler(1.0, 2.0, -3.0).unwrap(), -(-3f64).exp_m1() / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn half_order_closed_form() {
        // E_{1/2,1}(−1) = e·erfc(1)
        assert_relative_eq!(mittag_leffler(0.5, 1.0, -1.0).unwrap(), 0.427_583_576_155_807, max_relative = 1e-13);
        // E_{1/2,1}(−3) = e^9 erfc(3)
        assert_relative_eq!(mittag_leffler(0.5, 1.0, -3.0).unwrap(), 0.179_001_151_181_389_95, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(mittag_leffler(0.0, 1.0, -1.0).is_err());
        assert!(mittag_leffler(1.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn one_minus_small_argument() {
        let s = 1e-12;
        let v = ml_one_minus(0.5, s).unwrap();
        assert_relative_eq!(v, s * rgamma(1.5), max_relative = 1e-6);
        assert_relative_eq!(ml_one_minus(1.0, 0.5).unwrap(), 1.0 - (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn kernel_b_examples() {
        let c = JacobiParams::cosine();
        assert_eq!(ml_kernel_b(&c, &ProblemParams::new(1.0, 0.0, 0.0, 1.0).unwrap(), 2.0), 4.0);
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        let q = ProblemParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        assert_relative_eq!(ml_kernel_b(&p, &q, 1.0), 2.0, max_relative = 1e-15);
        let q = ProblemParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(ml_kernel_b(&c, &q, 1e8), 1.0, max_relative = 1e-12);
    }
}
