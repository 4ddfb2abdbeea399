//! Honest times of benchmarked portfolios: simulation of jump-diffusion
//! markets and their growth optimal portfolio, running-maximum analytics,
//! pricing and hedging of payoffs on the global maximum, and the laws of the
//! last time a benchmarked price sits at its maximum.

// comparisons are written negated so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod hedging;
pub mod laws;
pub mod maxima;
pub mod numerics;
pub mod path_stats;
pub mod sde;
pub mod validation;

pub use error::{Assumption, Error, Result};
