//! Exponential stability certificates for the coupled delay system
//!
//! ```text
//! x''(t) + a1(t) x'(h1(t)) + a2(t) x(h2(t)) + a3(t) u(h3(t)) = 0
//! u'(t)  + b1(t) u(g1(t))  + b2(t) x(g2(t))                  = 0
//! ```
//!
//! with indirect feedback control `u`, plus a method-of-steps simulator to
//! check certificates empirically.
//!
//! * [`expr`]: coefficient expressions in `t`
//! * [`model`]: system description, hypothesis validation, sup-norm table
//! * [`stability`]: 5x5 majorant, spectral radius, M-matrix test, certificates
//! * [`simulate`]: RK4 method of steps, fundamental functions, probes
//! * [`decay`]: exponential envelope fitting
//! * [`config`], [`cli`]: JSON configuration and command dispatch

pub mod cli;
pub mod config;
pub mod decay;
pub mod expr;
pub mod model;
pub mod simulate;
pub mod stability;

pub use expr::Expr;
pub use model::{CoefficientSpec, DelaySpec, NormMode, NormTable, SystemSpec, ValidationGrid};
pub use stability::{Certificate, StabilityMatrix, Verdict};
