//! File formats and the command-line front end for `trilayer-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use trilayer_core as core;
