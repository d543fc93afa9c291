//! Simulator for a fluid-driven penny-shaped fracture with a lagging fluid front.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elasticity;
pub mod cli;
pub mod config;
pub mod error;
pub mod front;
pub mod kernels;
pub mod lubrication;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod solver;
pub mod units;
pub mod validation;

pub use error::{Error, ErrorKind, Result};
