//! Fractional calculus on uniform time grids: Riemann-Liouville integrals and
//! derivatives, the L1 Caputo derivative, an implicit L1 stepper for the mode
//! equation 𝔻^γ u + B u = r(t), and the Mittag-Leffler ratio bounds.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::io::{read_two_columns, write_columns};
use crate::specfun::{ml_one_minus, rgamma};

/// Uniform nodes t_k = k·dt on [0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    dt: f64,
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// `n` nodes including both endpoints.
    pub fn uniform(t_final: f64, n: usize) -> Result<Arc<TimeGrid>> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Domain(format!("T must be positive and finite, got {t_final}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("time grid needs at least 2 nodes, got {n}")));
        }
        let dt = t_final / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        nodes[n - 1] = t_final;
        Ok(Arc::new(TimeGrid { t_final, dt, nodes }))
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Values at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} time nodes", values.len(), grid.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite time sample {v}")));
        }
        Ok(TimeSeries { grid, values })
    }

    pub fn from_fn(grid: Arc<TimeGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<TimeGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("time grid has at least two nodes")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["t", "value"], &[&self.grid.nodes, &self.values])
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let (ts, vs) = read_two_columns(path, "t")?;
        if ts.len() < 2 {
            return Err(Error::Parse(format!("{}: need at least two rows", path.display())));
        }
        let grid = TimeGrid::uniform(*ts.last().unwrap(), ts.len())?;
        for (a, b) in ts.iter().zip(&grid.nodes) {
            if (a - b).abs() > 1e-12 * grid.t_final {
                return Err(Error::GridMismatch(format!("{}: time nodes are not uniform", path.display())));
            }
        }
        Self::new(grid, vs)
    }
}

fn check_order(gamma: f64, upper: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= upper {
        Ok(())
    } else {
        Err(Error::Domain(format!("fractional order {gamma} outside (0, {upper}]")))
    }
}

/// I^γ f(t_n) = (1/Γ(γ)) ∫₀^{t_n} (t_n − s)^{γ−1} f(s) ds with f replaced by
/// its piecewise-linear interpolant (product trapezoidal rule). Exact for
/// piecewise-linear f. Any order γ > 0 is accepted.
pub fn rl_integral_left(f: &TimeSeries, gamma: f64) -> Result<TimeSeries> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("integral order {gamma} must be positive")));
    }
    let fv = &f.values;
    let n_nodes = fv.len();
    let g1 = gamma + 1.0;
    // pw[k] = k^{γ+1}
    let pw: Vec<f64> = (0..=n_nodes).map(|k| (k as f64).powf(g1)).collect();
    let scale = f.grid.dt.powf(gamma) * rgamma(gamma + 2.0);
    let mut out = vec![0.0; n_nodes];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let nf = n as f64;
        let mut s = (pw[n - 1] - (nf - 1.0 - gamma) * nf.powf(gamma)) * fv[0];
        for j in 1..n {
            let k = n - j;
            s += (pw[k + 1] - 2.0 * pw[k] + pw[k - 1]) * fv[j];
        }
        s += fv[n];
        *slot = scale * s;
    }
    TimeSeries::new(f.grid.clone(), out)
}

/// Second-order finite-difference derivative; one-sided at the ends.
fn differentiate(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    if n == 2 {
        let d = (v[1] - v[0]) / dt;
        return vec![d, d];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    for k in 1..n - 1 {
        d[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    d
}

/// D^γ f = d/dt I^{1−γ} f for γ ∈ (0, 1], by finite differences of the
/// product-trapezoid integral. The RL derivative is singular at t = 0 unless
/// f(0) = 0; there the one-sided difference is returned.
pub fn rl_derivative_left(f: &TimeSeries, gamma: f64) -> Result<TimeSeries> {
    check_order(gamma, 1.0)?;
    let inner = if gamma == 1.0 { f.clone() } else { rl_integral_left(f, 1.0 - gamma)? };
    TimeSeries::new(f.grid.clone(), differentiate(&inner.values, f.grid.dt))
}

/// L1 weights b_k = (k+1)^{1−γ} − k^{1−γ}.
fn l1_weights(gamma: f64, n: usize) -> Vec<f64> {
    let e = 1.0 - gamma;
    (0..n).map(|k| (k as f64 + 1.0).powf(e) - (k as f64).powf(e)).collect()
}

/// Caputo derivative of order γ ∈ (0, 1]. For γ < 1 the L1 scheme
/// dt^{−γ}/Γ(2−γ) Σ_j b_{n−1−j}(f_{j+1} − f_j), zero at t = 0; for γ = 1 the
/// classical derivative by central differences.
pub fn caputo_derivative(f: &TimeSeries, gamma: f64) -> Result<TimeSeries> {
    check_order(gamma, 1.0)?;
    let dt = f.grid.dt;
    if gamma == 1.0 {
        return TimeSeries::new(f.grid.clone(), differentiate(&f.values, dt));
    }
    let fv = &f.values;
    let n_nodes = fv.len();
    let b = l1_weights(gamma, n_nodes);
    let c = dt.powf(-gamma) * rgamma(2.0 - gamma);
    let diffs: Vec<f64> = fv.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![0.0; n_nodes];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let s: f64 = (0..n).map(|j| b[n - 1 - j] * diffs[j]).sum();
        *slot = c * s;
    }
    TimeSeries::new(f.grid.clone(), out)
}

/// Implicit L1 (backward Euler at γ = 1) solution of 𝔻^γ u + B u = r,
/// u(0) = phi0. Independent of the Mittag-Leffler machinery.
pub fn mode_ode_oracle(b_rate: f64, rhs: &TimeSeries, phi0: f64, gamma: f64) -> Result<TimeSeries> {
    check_order(gamma, 1.0)?;
    if !(b_rate > 0.0 && b_rate.is_finite()) {
        return Err(Error::Domain(format!("mode rate B must be positive, got {b_rate}")));
    }
    let n_nodes = rhs.values.len();
    let c = rhs.grid.dt.powf(-gamma) * rgamma(2.0 - gamma);
    let b = l1_weights(gamma, n_nodes);
    let mut u = vec![0.0; n_nodes];
    let mut diffs = Vec::with_capacity(n_nodes);
    u[0] = phi0;
    for n in 1..n_nodes {
        // history Σ_{j=0}^{n−2} b_{n−1−j}(u_{j+1} − u_j); vanishes at γ = 1
        let mut hist = 0.0;
        if gamma < 1.0 {
            for (j, d) in diffs.iter().enumerate() {
                hist += b[n - 1 - j] * d;
            }
        }
        u[n] = (rhs.values[n] + c * (u[n - 1] - hist)) / (c + b_rate);
        diffs.push(u[n] - u[n - 1]);
    }
    TimeSeries::new(rhs.grid.clone(), u)
}

fn check_lemma_args(gamma: f64, lambda_b: f64, t: f64, t_final: f64) -> Result<()> {
    check_order(gamma, 1.0)?;
    if !(lambda_b > 0.0 && lambda_b.is_finite()) {
        return Err(Error::Domain(format!("lambda_B must be positive, got {lambda_b}")));
    }
    if !(t > 0.0 && t < t_final && t_final.is_finite()) {
        return Err(Error::Domain(format!("t = {t} not in (0, T = {t_final})")));
    }
    Ok(())
}

/// (r1, r2) with r1 = (1 − E(−λt^γ))/(1 − E(−λT^γ)) and
/// r2 = (E(−λT^γ) − E(−λt^γ))/(1 − E(−λT^γ)), E = E_{γ,1}.
pub fn lemma_ratio(gamma: f64, lambda_b: f64, t: f64, t_final: f64) -> Result<(f64, f64)> {
    check_lemma_args(gamma, lambda_b, t, t_final)?;
    let om_t = ml_one_minus(gamma, lambda_b * t.powf(gamma))?;
    let om_t_final = ml_one_minus(gamma, lambda_b * t_final.powf(gamma))?;
    Ok((om_t / om_t_final, (om_t - om_t_final) / om_t_final))
}

/// Logarithmic witnesses of the strict lemma bounds: ln r1 and ln(−r2).
/// Both finite means 0 < r1 < 1 and −1 < r2 < 0 hold exactly, even where the
/// ratios themselves round to an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaMargins {
    pub ln_r1: f64,
    pub ln_neg_r2: f64,
}

impl LemmaMargins {
    /// r1 > 0 ⇔ 1 − E_t > 0, witnessed by a finite ln r1; r1 < 1 ⇔ E_t > E_T,
    /// witnessed by a finite ln(−r2). Either logarithm may round to 0.
    pub fn strict(&self) -> bool {
        self.ln_r1.is_finite() && self.ln_neg_r2.is_finite() && self.ln_r1 <= 0.0 && self.ln_neg_r2 <= 0.0
    }

    /// Margins from s_t = λt^γ, s_T = λT^γ and the corresponding values of
    /// 1 − E_{γ,1}(−s). E_t − E_T is formed in log space at γ = 1, where
    /// e^{−s} underflows long before the difference stops being positive.
    pub(crate) fn from_parts(gamma: f64, s_t: f64, s_final: f64, om_t: f64, om_final: f64) -> Self {
        let ln_om_final = om_final.ln();
        let ln_diff = if gamma == 1.0 {
            -s_t + (-(s_t - s_final).exp()).ln_1p()
        } else {
            (om_final - om_t).ln()
        };
        LemmaMargins { ln_r1: om_t.ln() - ln_om_final, ln_neg_r2: ln_diff - ln_om_final }
    }
}

pub fn lemma_margins(gamma: f64, lambda_b: f64, t: f64, t_final: f64) -> Result<LemmaMargins> {
    check_lemma_args(gamma, lambda_b, t, t_final)?;
    let s_t = lambda_b * t.powf(gamma);
    let s_final = lambda_b * t_final.powf(gamma);
    let om_t = ml_one_minus(gamma, s_t)?;
    let om_final = ml_one_minus(gamma, s_final)?;
    Ok(LemmaMargins::from_parts(gamma, s_t, s_final, om_t, om_final))
}
