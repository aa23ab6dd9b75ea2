//! Configuration, experiment runner and benchmark suites behind the
//! `adaprox` command-line tool.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod inspect;
pub mod output;
pub mod verify;
