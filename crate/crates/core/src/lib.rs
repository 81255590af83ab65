//! Two-level atom driven by far-detuned few-cycle pulses.
//!
//! The crate integrates the exact amplitude equations (no rotating-wave or
//! slowly-varying-envelope approximation), evaluates the first-order
//! closed-form solution for square pulses together with its CEP-dependent
//! final-inversion law, and runs the analytic-versus-numeric comparison
//! campaigns that produce tabular data.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod numeric;
pub mod pulse;
pub mod quadrature;
pub mod validation;

pub use error::{Error, Result};
pub use pulse::{derive_params, DerivedParams, PulseSpec, Shape, TlsParams};
