//! Direct and inverse source problems for time-fractional pseudo-parabolic
//! equations driven by the Jacobi operator
//!
//! ```text
//! D_t^γ (u − a Δ_{α,β} u) − Δ_{α,β} u + m u = f,   u(0,·) = φ,   u(T,·) = ψ,
//! ```
//!
//! solved spectrally through the Fourier-Jacobi transform. The crate is
//! organised bottom-up:
//!
//! - [`specfun`]: gamma, ₂F₁, Mittag-Leffler, Jacobi functions, c-function;
//! - [`transform`]: quadrature grids carrying the μ and ν measures, the
//!   transform pair and the L²(μ), L²(ν), 𝓗 norms;
//! - [`fractional`]: Riemann-Liouville/Caputo operators on uniform time grids
//!   and an L1 time stepper used as an independent check;
//! - [`solvers`]: the direct and inverse solvers and stability functionals;
//! - [`experiments`]: the stability table and the acceptance suite.

pub mod error;
pub mod experiments;
pub mod fractional;
pub mod io;
pub mod quadrature;
pub mod solvers;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
