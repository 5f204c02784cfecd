//! Dynamical-decoupling laboratory.
//!
//! Exact density-matrix simulation of small qubit registers, phenomenological
//! idle/MCM/pulse noise, construction and ALAP scheduling of CPMG, XY4, UR6 and
//! learned (LDD) decoupling sequences, Bell-correlator cost estimation, SPSA
//! optimisation, and the experiment harness that ties them together.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod execute;
pub mod harness;
pub mod noise;
pub mod optimizer;
pub mod rng;
pub mod sequences;
pub mod simcore;

pub use error::{Error, Result};
pub use rng::RngStream;
