//! Numerical engine for Mermin-Klyshko Bell tests on multimode
//! continuous-variable states measured with homodyne detectors.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: special functions, quadrature and a symmetric eigensolver.
//! * [`mk`]: symbolic expansion of the Mermin-Klyshko Bell operator.
//! * [`sign_binning`]: photon-number-correlated states with sign-binned quadratures.
//! * [`root_binning`]: parity function pairs, root binning and the cat-state family.
//! * [`erasure`]: the probabilistic erasure channel.
//! * [`cat_prep`]: conditional generation of the three-mode cat state with linear optics.
//!
//! Quadratures follow the convention `<x|n> = H_n(x) exp(-x^2/2) / (pi^(1/4) sqrt(2^n n!))`,
//! so a real coherent amplitude `a` is centred at `x = sqrt(2) a`.

pub mod binned;
pub mod cat_prep;
pub mod coherent;
pub mod erasure;
mod error;
pub mod mk;
pub mod numerics;
pub mod root_binning;
pub mod sign_binning;

pub use error::{Error, Result};
