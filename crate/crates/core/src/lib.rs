//! Tempered (power-posterior) predictive inference for conjugate models.
//!
//! The crate is organised bottom-up:
//!
//! - [`dists`]: univariate kernels that every other module passes around;
//! - [`models`]: closed-form tempered posteriors and predictives;
//! - [`divergences`]: TVD, Hellinger and KL between predictive laws;
//! - [`selection`]: leave-one-out scoring, temperature grids and schedules,
//!   and the analytic normal-location risk;
//! - [`experiments`]: data generators and the seeded replication harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dists;
pub mod divergences;
pub mod error;
pub mod experiments;
pub mod models;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
