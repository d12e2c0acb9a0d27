//! Gaussian parameter estimation from noisy uniformly sampled data.
//!
//! The log of a Gaussian is a quadratic, so `(A, μ, σ)` follow from a weighted
//! least-squares fit of `ln y` against `x`. Five estimators are provided:
//!
//! | id | estimator |
//! |----|-----------|
//! | M1 | peak sample and total area |
//! | M2 | M1 followed by two reweighted log-domain fits |
//! | M3 | windowed peak and split-area width combination |
//! | M4 | M3 followed by two reweighted log-domain fits |
//! | M5 | log-domain fit iterated from the raw samples |
//!
//! [`bench`] runs the seeded Monte Carlo comparison and [`io`] reads and
//! writes the CSV formats used by the command line tool.

pub mod bench;
pub mod crlb;
pub mod erf;
pub mod error;
pub mod fit;
pub mod initfit;
pub mod io;
pub mod linfit;
pub mod methods;
pub mod noise;
pub mod signal;

pub use error::{FitError, Result};
pub use fit::{Diagnostics, FitResult, FitStatus, MethodId};
pub use methods::{run_method, MethodSpec};
pub use signal::{ClampPolicy, GaussianParams, SampledSignal};
