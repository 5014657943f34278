//! Dynamical decoupling for qutrit memories and two-qutrit gates.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod experiment;
pub mod format;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod sequence;
pub mod system;

pub use error::{Error, Result};
