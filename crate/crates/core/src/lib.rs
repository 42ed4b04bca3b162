//! Discrete Fourier quadratures for functions whose spectrum lives in a
//! compact region R (interval, triangle, tetrahedron, cone, ball, ...).
//!
//! The crate is `no_std` + `alloc`; everything here is pure numerics.
//! File formats, the verification suite and the command line live in the
//! companion `rlimit` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod kernels;
pub mod moments;
pub mod numkit;
pub mod projection;
pub mod prolate;
pub mod sincapprox;

mod linalg;

use alloc::string::String;

pub use num_complex::Complex64;
pub use numkit::ComplexValue;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Hankel matrix has numerical rank {found} < {requested} requested terms")]
    RankDeficient { requested: usize, found: usize },
    #[error("moment problem ill-conditioned: residual {residual:e} exceeds tolerance {tol:e}")]
    IllConditioned { residual: f64, tol: f64 },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("adaptive integration did not converge (estimated error {estimate:e})")]
    NoConvergence { estimate: f64 },
    #[error("singular denominator {value:e} at {location}")]
    Singular { value: f64, location: String },
    #[error("overflow computing {0}")]
    Overflow(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
