//! Reference computations and the acceptance suite.

pub mod oracle;

pub mod acceptance;
