//! Front end for the `annealed-ldp` binary: argument grids, configuration
//! files and table output.

pub mod commands;
pub mod config;
pub mod grid;
pub mod table;
