//! Simultaneous wireless information and power transfer through two
//! reconfigurable reflecting panels: geometry, channels, receiver models,
//! near-field joint optimization, hybrid-field closed forms and a Monte
//! Carlo harness.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod hybridfield;
pub mod linalg;
pub mod nearfield_opt;
pub mod receiver;
pub mod rng;

pub use error::{Result, SwiptError};
