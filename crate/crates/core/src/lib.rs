//! Ginzburg–Landau relaxation of the Ericksen–Leslie nematic system on
//! periodic boxes.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod experiments;
pub mod grid;
pub mod leslie;
pub mod oseen_frank;
pub mod params;
pub mod solver;
