#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod evolution;
pub mod interfaces;
pub mod model;
pub mod ode;
pub mod radial;
pub mod roots;
pub mod stationary;
