//! q-Hermite and Al-Salam-Chihara polynomial families, exact arithmetic in
//! Q(sqrt D), and the discrete transition kernels of stationary fields with
//! linear regressions for `q > 1`.
//!
//! - [`qcore`]: q-combinatorics and three-term recurrences.
//! - [`exactnum`]: rationals, the quadratic field, the exact linear solver.
//! - [`spectra`]: index sets, the support points `chi_k`, factor families and
//!   identity verifiers.
//! - [`markov`]: conditional distributions, composition, simulation.
//! - [`cli`]: the `qchain` command-line surface.

pub mod cli;
pub mod error;
pub mod exactnum;
pub mod format;
pub mod markov;
pub mod qcore;
pub mod report;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use exactnum::{QuadField, QuadraticNumber, Rational};
pub use qcore::QParams;
pub use report::Report;
pub use scalar::{RealScalar, Scalar};
