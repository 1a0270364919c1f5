//! Sensitivity analysis for Kerr quantum non-demolition photon-number
//! measurement with a squeezed, anti-squeezed probe.
//!
//! The probe beam is squeezed, acquires the signal through cross-phase
//! modulation (XPM) and parasitic noise through self-phase modulation (SPM)
//! in a microresonator, is anti-squeezed and finally read out by a lossy
//! homodyne detector. [`chain`] evaluates this numerically, [`analytic`]
//! holds the closed forms, and [`optimizer`] and [`montecarlo`] are
//! independent checks of both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod chain;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod optimizer;
pub mod resonator;
pub mod signal_loss;
pub mod thresholds;

pub use chain::{ChainConfig, ChainOutput};
pub use error::{Error, Result};
