//! Quadrature grids for the μ and ν measures, the Fourier-Jacobi transform
//! pair and the associated norms.
//!
//! dμ(x) = (2π)^{−1/2} A_{α,β}(x) dx on [0, x_max] and
//! dν(λ) = (2π)^{−1/2} |c(λ)|^{−2} dλ on [0, λ_max], each discretised by a
//! composite 16-point Gauss-Legendre rule with the density folded into the
//! weights.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{read_two_columns, write_columns};
use crate::quadrature::{composite_gauss_legendre, PANEL_NODES};
use crate::specfun::{jacobi_phi, plancherel_density, weight_a, JacobiParams};

/// Default truncation of the spatial half-line.
pub const DEFAULT_X_MAX: f64 = 10.0;
/// Default truncation of the spectral half-line.
pub const DEFAULT_LAMBDA_MAX: f64 = 30.0;

fn inv_sqrt_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).sqrt().recip()
}

fn panel_count(n: usize) -> usize {
    n.div_ceil(PANEL_NODES).max(1)
}

/// Quadrature rule for ∫₀^{x_max} · dμ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    params: JacobiParams,
    x_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpatialGrid {
    pub fn params(&self) -> &JacobiParams {
        &self.params
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Quadrature rule for ∫₀^{λ_max} · dν.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    params: JacobiParams,
    lambda_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn params(&self) -> &JacobiParams {
        &self.params
    }
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_extent(name: &str, extent: f64) -> Result<()> {
    if extent > 0.0 && extent.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {extent}")))
    }
}

/// Composite Gauss-Legendre grid on [0, x_max] with at least `n` nodes
/// (rounded up to whole 16-node panels) and μ-weights.
pub fn build_spatial_grid(p: &JacobiParams, x_max: f64, n: usize) -> Result<Arc<SpatialGrid>> {
    check_extent("x_max", x_max)?;
    if n < 8 {
        return Err(Error::Domain(format!("spatial grid needs n >= 8, got {n}")));
    }
    weight_a(p, x_max)?;
    let (nodes, gl) = composite_gauss_legendre(x_max, panel_count(n));
    let c = inv_sqrt_2pi();
    let weights = nodes
        .iter()
        .zip(&gl)
        .map(|(&x, &w)| Ok(w * c * weight_a(p, x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(SpatialGrid { params: *p, x_max, nodes, weights }))
}

/// Composite Gauss-Legendre grid on [0, λ_max] with ν-weights.
pub fn build_spectral_grid(p: &JacobiParams, lambda_max: f64, n: usize) -> Result<Arc<SpectralGrid>> {
    check_extent("lambda_max", lambda_max)?;
    if n < 8 {
        return Err(Error::Domain(format!("spectral grid needs n >= 8, got {n}")));
    }
    let (nodes, gl) = composite_gauss_legendre(lambda_max, panel_count(n));
    let c = inv_sqrt_2pi();
    let weights = nodes
        .iter()
        .zip(&gl)
        .map(|(&l, &w)| Ok(w * c * plancherel_density(p, l)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(SpectralGrid { params: *p, lambda_max, nodes, weights }))
}

fn check_values(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::GridMismatch(format!("{} values for {expected} nodes", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample {v}")));
    }
    Ok(())
}

/// Values of a function of x at the nodes of a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.len())?;
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        SampledFunction { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// a·self + b·other on a shared grid.
    pub fn combine(&self, a: f64, other: &SampledFunction, b: f64) -> Result<SampledFunction> {
        same_spatial(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        SampledFunction::new(self.grid.clone(), values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["x", "value"], &[&self.grid.nodes, &self.values])
    }

    /// Reads a `x,value` file whose x column must match the grid nodes.
    pub fn read_csv(path: &Path, grid: Arc<SpatialGrid>) -> Result<Self> {
        let (xs, vs) = read_two_columns(path, "x")?;
        match_nodes(&xs, &grid.nodes, path)?;
        Self::new(grid, vs)
    }
}

/// Values of a function of λ at the nodes of a [`SpectralGrid`].
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    grid: Arc<SpectralGrid>,
    values: Vec<f64>,
}

impl SpectralFunction {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.len())?;
        Ok(SpectralFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&l| f(l)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn combine(&self, a: f64, other: &SpectralFunction, b: f64) -> Result<SpectralFunction> {
        same_spectral(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        SpectralFunction::new(self.grid.clone(), values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["lambda", "value"], &[&self.grid.nodes, &self.values])
    }

    pub fn read_csv(path: &Path, grid: Arc<SpectralGrid>) -> Result<Self> {
        let (ls, vs) = read_two_columns(path, "lambda")?;
        match_nodes(&ls, &grid.nodes, path)?;
        Self::new(grid, vs)
    }
}

fn match_nodes(read: &[f64], nodes: &[f64], path: &Path) -> Result<()> {
    if read.len() != nodes.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows, grid has {} nodes",
            path.display(),
            read.len(),
            nodes.len()
        )));
    }
    for (i, (a, b)) in read.iter().zip(nodes).enumerate() {
        if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("{}: row {} node {a} differs from {b}", path.display(), i + 2)));
        }
    }
    Ok(())
}

pub(crate) fn same_spatial(a: &Arc<SpatialGrid>, b: &Arc<SpatialGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else if a.params != b.params {
        Err(Error::ParamMismatch)
    } else {
        Err(Error::GridMismatch("spatial grids differ".into()))
    }
}

pub(crate) fn same_spectral(a: &Arc<SpectralGrid>, b: &Arc<SpectralGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else if a.params != b.params {
        Err(Error::ParamMismatch)
    } else {
        Err(Error::GridMismatch("spectral grids differ".into()))
    }
}

fn kernel_row(p: &JacobiParams, lambda: f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| jacobi_phi(p, lambda, x)).collect()
}

/// Fourier-Jacobi transform pair between two fixed grids, with the kernel
/// φ_{λ_j}(x_i) tabulated once.
#[derive(Debug, Clone)]
pub struct FourierJacobi {
    spatial: Arc<SpatialGrid>,
    spectral: Arc<SpectralGrid>,
    /// row-major, one row of length n_x per spectral node
    kernel: Vec<f64>,
}

impl FourierJacobi {
    pub fn new(spatial: Arc<SpatialGrid>, spectral: Arc<SpectralGrid>) -> Result<Self> {
        if spatial.params != spectral.params {
            return Err(Error::ParamMismatch);
        }
        let p = spatial.params;
        let rows: Vec<Vec<f64>> = spectral
            .nodes
            .par_iter()
            .map(|&l| kernel_row(&p, l, &spatial.nodes))
            .collect::<Result<_>>()?;
        Ok(FourierJacobi { spatial, spectral, kernel: rows.concat() })
    }

    pub fn spatial(&self) -> &Arc<SpatialGrid> {
        &self.spatial
    }

    pub fn spectral(&self) -> &Arc<SpectralGrid> {
        &self.spectral
    }

    pub fn params(&self) -> &JacobiParams {
        &self.spatial.params
    }

    /// φ_{λ_j}(x_i) for all x nodes.
    pub fn kernel_row(&self, j: usize) -> &[f64] {
        let n = self.spatial.len();
        &self.kernel[j * n..(j + 1) * n]
    }

    /// f̂(λ_j) = Σ_i w_i f(x_i) φ_{λ_j}(x_i).
    pub fn forward(&self, f: &SampledFunction) -> Result<SpectralFunction> {
        same_spatial(&self.spatial, &f.grid)?;
        let weighted: Vec<f64> = f.values.iter().zip(&self.spatial.weights).map(|(v, w)| v * w).collect();
        let values = (0..self.spectral.len())
            .into_par_iter()
            .map(|j| dot(self.kernel_row(j), &weighted))
            .collect();
        SpectralFunction::new(self.spectral.clone(), values)
    }

    /// g(x_i) = Σ_j ν_j g(λ_j) φ_{λ_j}(x_i).
    pub fn inverse(&self, g: &SpectralFunction) -> Result<SampledFunction> {
        same_spectral(&self.spectral, &g.grid)?;
        let nx = self.spatial.len();
        let weighted: Vec<f64> = g.values.iter().zip(&self.spectral.weights).map(|(v, w)| v * w).collect();
        let values = (0..nx)
            .into_par_iter()
            .map(|i| {
                let mut s = 0.0;
                for (j, c) in weighted.iter().enumerate() {
                    s += c * self.kernel[j * nx + i];
                }
                s
            })
            .collect();
        SampledFunction::new(self.spatial.clone(), values)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward transform onto `sg`, evaluating the kernel on the fly.
pub fn forward_transform(f: &SampledFunction, sg: &Arc<SpectralGrid>) -> Result<SpectralFunction> {
    let xg = &f.grid;
    if xg.params != sg.params {
        return Err(Error::ParamMismatch);
    }
    let p = xg.params;
    let weighted: Vec<f64> = f.values.iter().zip(&xg.weights).map(|(v, w)| v * w).collect();
    let values = sg
        .nodes
        .par_iter()
        .map(|&l| Ok(dot(&kernel_row(&p, l, &xg.nodes)?, &weighted)))
        .collect::<Result<Vec<_>>>()?;
    SpectralFunction::new(sg.clone(), values)
}

/// Inverse transform onto `xg`, evaluating the kernel on the fly.
pub fn inverse_transform(g: &SpectralFunction, xg: &Arc<SpatialGrid>) -> Result<SampledFunction> {
    let sg = &g.grid;
    if xg.params != sg.params {
        return Err(Error::ParamMismatch);
    }
    let p = xg.params;
    let weighted: Vec<f64> = g.values.iter().zip(&sg.weights).map(|(v, w)| v * w).collect();
    let values = xg
        .nodes
        .par_iter()
        .map(|&x| {
            let mut s = 0.0;
            for (&l, c) in sg.nodes.iter().zip(&weighted) {
                s += c * jacobi_phi(&p, l, x)?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(xg.clone(), values)
}

/// ‖f‖_{2,μ}.
pub fn norm_l2_mu(f: &SampledFunction) -> f64 {
    f.values.iter().zip(&f.grid.weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
}

/// ‖g‖_{2,ν}.
pub fn norm_l2_nu(g: &SpectralFunction) -> f64 {
    g.values.iter().zip(&g.grid.weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
}

/// ‖g‖_𝓗 = (∫ |(λ² + ρ²) g(λ)|² dν)^{1/2}.
pub fn norm_h(g: &SpectralFunction) -> f64 {
    let rho2 = g.grid.params.rho().powi(2);
    g.values
        .iter()
        .zip(g.grid.nodes.iter().zip(&g.grid.weights))
        .map(|(v, (l, w))| {
            let s = (l * l + rho2) * v;
            w * s * s
        })
        .sum::<f64>()
        .sqrt()
}
