//! Experiment harness and file tooling around the `bbmh-core` sketches.
//!
//! The library half of the `bbmh` binary: spec-file parsing, corpus loading,
//! the Monte Carlo and precision/recall harnesses, theory-table expansion,
//! and the subcommand dispatch itself. Everything the binary does is
//! callable from here, which is what the integration and acceptance tests
//! use.

pub mod cli;
pub mod corpus;
pub mod csvfmt;
pub mod err;
pub mod pr;
pub mod sim;
pub mod specfile;
pub mod theory_table;
