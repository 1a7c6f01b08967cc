//! Scalar special-function kernels.

mod gamma;
mod hypergeometric;
mod jacobi;
mod mittag_leffler;

pub use gamma::{gamma, gamma_complex, is_near_pole, ln_gamma, ln_gamma_complex, rgamma, ComplexValue, POLE_GUARD};
pub use hypergeometric::{gauss_2f1, MAX_TERMS, TAIL_TOL};
pub use jacobi::{harish_chandra_c, jacobi_phi, plancherel_density, weight_a, JacobiParams};
pub use mittag_leffler::{ml_one_minus, mittag_leffler, mittag_leffler_asymptotic, ml_kernel_b};

