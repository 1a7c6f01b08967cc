//! Jacobi functions, the Jacobi weight and the Harish-Chandra c-function.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::ln_gamma_complex;
use super::hypergeometric::{hyp2f1_series, SeriesSum};
use crate::error::{Error, Result};

/// Parameters (α, β) of the Jacobi operator, with α ≥ β ≥ −1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJacobiParams", into = "RawJacobiParams")]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawJacobiParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawJacobiParams> for JacobiParams {
    type Error = Error;
    fn try_from(raw: RawJacobiParams) -> Result<Self> {
        JacobiParams::new(raw.alpha, raw.beta)
    }
}

impl From<JacobiParams> for RawJacobiParams {
    fn from(p: JacobiParams) -> Self {
        RawJacobiParams { alpha: p.alpha, beta: p.beta }
    }
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || !(alpha >= beta && beta >= -0.5) {
            return Err(Error::Domain("alpha >= beta >= -1/2 violated".into()));
        }
        Ok(JacobiParams { alpha, beta })
    }

    /// α = β = −1/2, where the Jacobi transform is the Fourier-cosine transform.
    pub fn cosine() -> Self {
        JacobiParams { alpha: -0.5, beta: -0.5 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// ρ = α + β + 1.
    pub fn rho(&self) -> f64 {
        self.alpha + self.beta + 1.0
    }
}

/// ln A_{α,β}(x), or −∞ where A vanishes (x = 0 and 2α+1 > 0).
fn ln_weight_a(p: &JacobiParams, x: f64) -> f64 {
    let sinh_exp = 2.0 * p.alpha + 1.0;
    let cosh_exp = 2.0 * p.beta + 1.0;
    // ln sinh x and ln cosh x, stable for large x
    let ln_sinh = if x > 20.0 { x - LN_2 + (-(-2.0 * x).exp()).ln_1p() } else { x.sinh().ln() };
    let ln_cosh = if x > 20.0 { x - LN_2 + (-2.0 * x).exp().ln_1p() } else { x.cosh().ln() };
    let sinh_part = if sinh_exp == 0.0 { 0.0 } else { sinh_exp * ln_sinh };
    2.0 * p.rho() * LN_2 + sinh_part + cosh_exp * ln_cosh
}

/// Jacobi weight A_{α,β}(x) = 2^{2ρ} (sinh x)^{2α+1} (cosh x)^{2β+1}.
pub fn weight_a(p: &JacobiParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("weight A requires x >= 0, got {x}")));
    }
    let ln_a = ln_weight_a(p, x);
    if ln_a > f64::MAX.ln() {
        return Err(Error::Overflow(format!("A_{{alpha,beta}}({x})")));
    }
    Ok(ln_a.exp())
}

/// Harish-Chandra c-function
/// c(λ) = 2^{ρ−iλ} Γ(iλ) Γ(α+1) / (Γ((ρ+iλ)/2) Γ((α−β+1+iλ)/2)),
/// principal branch for 2^{ρ−iλ}.
pub fn harish_chandra_c(p: &JacobiParams, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Pole(format!("c-function at lambda = {lambda}")));
    }
    let il = Complex64::new(0.0, lambda);
    let ln_c = (Complex64::new(p.rho(), 0.0) - il) * LN_2
        + ln_gamma_complex(il)?
        + ln_gamma_complex(Complex64::new(p.alpha + 1.0, 0.0))?
        - ln_gamma_complex((il + p.rho()) * 0.5)?
        - ln_gamma_complex((il + (p.alpha - p.beta + 1.0)) * 0.5)?;
    let c = ln_c.exp();
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::Overflow(format!("c-function at lambda = {lambda}")))
    }
}

/// Spectral density |c(λ)|^{−2}, extended by continuity with value 0 at λ = 0.
pub fn plancherel_density(p: &JacobiParams, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(harish_chandra_c(p, lambda)?.norm_sqr().recip())
}

/// Jacobi-function value together with an estimate of its rounding error.
#[derive(Debug, Clone, Copy)]
struct Evaluation {
    value: f64,
    error: f64,
}

// Route boundaries: the Pfaff series in tanh²x is used up to PFAFF_MAX_TANH2,
// the Harish-Chandra expansion in sech²x from HC_MIN_X on.
const PFAFF_MAX_TANH2: f64 = 0.95;
const HC_MIN_X: f64 = 0.25;
// Below this λ the Harish-Chandra route interpolates in λ² from λ = h, 2h, 3h.
const HC_SMALL_LAMBDA: f64 = 2e-3;
const ACCEPT_ERROR: f64 = 1e-14;
const IMAG_TOL: f64 = 1e-10;

fn rounding_error(series: &SeriesSum, scale: f64) -> f64 {
    16.0 * f64::EPSILON * series.max_term * scale
}

/// φ_λ(x) = (cosh x)^{−ρ−iλ} ₂F₁((ρ+iλ)/2, α+1−(ρ−iλ)/2; α+1; tanh²x).
fn phi_pfaff(p: &JacobiParams, lambda: f64, x: f64) -> Result<Evaluation> {
    let rho = p.rho();
    let a = Complex64::new(rho, lambda) * 0.5;
    let b = Complex64::new(rho, -lambda) * 0.5;
    let c = Complex64::new(p.alpha + 1.0, 0.0);
    let w = x.tanh().powi(2);
    let series = hyp2f1_series(a, c - b, c, w)?;
    let ln_cosh = x.cosh().ln();
    let prefactor = (Complex64::new(-rho, -lambda) * ln_cosh).exp();
    let value = prefactor * series.value;
    let scale = prefactor.norm();
    let error = rounding_error(&series, scale);
    if value.im.abs() > IMAG_TOL.max(4.0 * error) {
        return Err(Error::ImaginaryResidue { what: "Jacobi function", residue: value.im.abs() });
    }
    Ok(Evaluation { value: value.re, error })
}

/// φ_λ(x) = 2 Re[c(λ) Φ_λ(x)] with
/// Φ_λ(x) = (2cosh x)^{iλ−ρ} ₂F₁((ρ−iλ)/2, (α−β+1−iλ)/2; 1−iλ; cosh^{−2}x).
fn phi_harish_chandra_direct(p: &JacobiParams, lambda: f64, x: f64) -> Result<Evaluation> {
    let rho = p.rho();
    let a = Complex64::new(rho, -lambda) * 0.5;
    let b = Complex64::new(p.alpha - p.beta + 1.0, -lambda) * 0.5;
    let c = Complex64::new(1.0, -lambda);
    let sech2 = x.cosh().powi(-2);
    let series = hyp2f1_series(a, b, c, sech2)?;
    let ln_2cosh = LN_2 + x.cosh().ln();
    let prefactor = (Complex64::new(-rho, lambda) * ln_2cosh).exp();
    let cf = harish_chandra_c(p, lambda)?;
    let value = 2.0 * (cf * prefactor * series.value).re;
    let error = rounding_error(&series, 2.0 * cf.norm() * prefactor.norm());
    Ok(Evaluation { value, error })
}

fn phi_harish_chandra(p: &JacobiParams, lambda: f64, x: f64) -> Result<Evaluation> {
    if lambda >= HC_SMALL_LAMBDA {
        return phi_harish_chandra_direct(p, lambda, x);
    }
    // φ is even and analytic in λ: quadratic interpolation in s = λ².
    let h = HC_SMALL_LAMBDA;
    let nodes = [h * h, 4.0 * h * h, 9.0 * h * h];
    let s = lambda * lambda;
    let mut value = 0.0;
    let mut error = 0.0;
    for (i, &si) in nodes.iter().enumerate() {
        let mut weight = 1.0;
        for (j, &sj) in nodes.iter().enumerate() {
            if i != j {
                weight *= (s - sj) / (si - sj);
            }
        }
        let e = phi_harish_chandra_direct(p, si.sqrt(), x)?;
        value += weight * e.value;
        error += weight.abs() * e.error;
    }
    Ok(Evaluation { value, error })
}

/// Jacobi function φ_λ^{α,β}(x) = ₂F₁((ρ+iλ)/2, (ρ−iλ)/2; α+1; −sinh²x)
/// for real λ ≥ 0 and x ≥ 0.
///
/// Small x uses the Pfaff-transformed series in tanh²x. Large x uses the
/// Harish-Chandra expansion φ_λ = c(λ)Φ_λ + c(−λ)Φ_{−λ}, whose series in
/// cosh^{−2}x converges fast there. Where both apply the one with the
/// smaller rounding estimate wins.
pub fn jacobi_phi(p: &JacobiParams, lambda: f64, x: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("jacobi_phi requires lambda >= 0, got {lambda}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("jacobi_phi requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let pfaff_ok = x.tanh().powi(2) <= PFAFF_MAX_TANH2;
    let hc_ok = x >= HC_MIN_X;
    let pfaff = if pfaff_ok { Some(phi_pfaff(p, lambda, x)) } else { None };
    if let Some(Ok(e)) = pfaff {
        if e.error <= ACCEPT_ERROR || !hc_ok {
            return Ok(e.value);
        }
    }
    if !hc_ok {
        // pfaff_ok holds whenever hc_ok fails, so the Pfaff result is an error here
        return pfaff.expect("Pfaff route covers small x").map(|e| e.value);
    }
    let hc = phi_harish_chandra(p, lambda, x);
    match (pfaff, hc) {
        (Some(Ok(a)), Ok(b)) => Ok(if a.error <= b.error { a.value } else { b.value }),
        (Some(Ok(a)), Err(_)) => Ok(a.value),
        (_, Ok(b)) => Ok(b.value),
        (_, Err(e)) => Err(e),
    }
}
