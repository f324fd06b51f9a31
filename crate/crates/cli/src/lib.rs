//! Command-line front end for the qmeter engine simulator.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod verify;
