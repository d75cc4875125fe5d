//! Exact simulation of one-dimensional discrete- and continuous-time quantum
//! walks and their classical counterparts, with the closed-form limit laws
//! and the statistics needed to check weak convergence against them.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod coin;
pub mod config;
pub mod dirac;
pub mod ctqw;
pub mod distribution;
pub mod dtqw;
pub mod error;
pub mod laws;
pub mod momentum;
pub mod output;
pub mod quad;
pub mod specfun;
pub mod stats;

pub use coin::{dirac_coin, ftd_coin, hadamard, make_coin, validate_unitary, Coin2, CoinField, CoinState};
pub use distribution::Distribution;
pub use dtqw::{evolve, step, WalkerState};
pub use error::{Error, Result};
