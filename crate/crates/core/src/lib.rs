//! Cognitive TD-LTE operating in TV white space.

// Validation writes `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cenb;
pub mod exec;
pub mod geodb;
pub mod harness;
pub mod ini;
pub mod interference;
pub mod occupancy;
pub mod radio_env;
pub mod sensing;
pub mod units;
