//! Configuration-driven sweeps of the dissipative Rabi model family.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;
