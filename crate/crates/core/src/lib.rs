//! Bioenergetic Nile tilapia growth model and receding-horizon feeding
//! controllers.
//!
//! * [`growth`]: the growth ODE, its limiting factors and an RK4 integrator.
//! * [`reference`]: desired weight trajectories.
//! * [`cost`]: stage and terminal costs of the three controllers.
//! * [`mpc`]: single-shooting optimal control and the closed loop.
//! * [`metrics`]: FCR, cost ledger and tracking error of finished runs.
//! * [`experiment`]: configuration, batch runs and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod experiment;
pub mod growth;
pub mod metrics;
pub mod mpc;
pub mod reference;

pub use error::{Error, ErrorClass, Result};
