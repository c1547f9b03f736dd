//! Command implementations behind the `mnls` binary.

pub mod commands;
pub mod config;
pub mod svg;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_CONFIG: u8 = 64;
