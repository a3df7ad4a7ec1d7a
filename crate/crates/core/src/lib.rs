//! Tensor I-spline sieve maximum likelihood estimation of a bivariate
//! distribution function from bivariate current-status data.
//!
//! The crate is organized bottom-up:
//!
//! - [`spline`]: knot sequences and M-, I- and B-spline bases.
//! - [`model`]: the sieve coefficients, `(F, F1, F2)` evaluation and the
//!   log-likelihood with its exact gradient and Hessian.
//! - [`optim`]: generalized gradient projection with an active set.
//! - [`sim`]: Clayton-copula data generation and Monte-Carlo bias/RMSE
//!   reporting.
//!
//! With the default `parallel` feature, Monte-Carlo replications run on
//! rayon through [`exec::Execution`]; without it they run sequentially and
//! give bitwise-identical results.

pub mod error;
pub mod exec;
pub mod model;
pub mod optim;
pub mod sim;
pub mod spline;

pub use error::{Error, Result};
pub use model::{AffineLogLik, Dataset, Domain, Observation, SieveSpec, Theta};
pub use optim::{fit, maximize, FitOptions, FitResult, SieveFit};
pub use spline::{BasisFamily, BasisKind, KnotVector};
