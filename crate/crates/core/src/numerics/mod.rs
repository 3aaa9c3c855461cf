//! Shared numerical kernels.

mod eigen;
mod hermite;
mod quad;
mod special;

pub use eigen::{
    max_eigenpair, symmetric_eigen, Constraint, Eigenpair, SymmetricMatrix, RESIDUAL_TOL as EIGEN_RESIDUAL_TOL,
    STATIONARITY_TOL as KKT_RESIDUAL_TOL,
};
pub use hermite::{hermite_eval, hermite_function};
pub use quad::{integrate_1d, integrate_1d_with, QuadConfig, QuadResult, DEFAULT_QUAD_TOL};
pub use special::{ln_abs_gamma, reciprocal_gamma, reciprocal_gamma_log, LogSignedReal};
