//! Configuration, experiment drivers and the acceptance suite behind the
//! `ccshock` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
