//! Command-line front end for the `pe3d` solver: `run`, `bench` and
//! `selftest`. All concurrency lives in the solver library; this crate only
//! orchestrates and writes files.

pub mod args;
pub mod commands;
pub mod kernel_bench;
pub mod output;
pub mod selftest;

pub use args::{dispatch, Cli};
