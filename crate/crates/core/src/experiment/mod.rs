//! Declarative experiment runner behind the `sim` binary.

pub mod config;
pub mod recipes;
pub mod runner;
pub mod table;

pub use config::{ConfigError, Format, Protocol, RunConfig};
pub use recipes::{Recipe, RECIPES};
pub use runner::{run, write_tables, RunError};
pub use table::{Column, Metadata, ResultTable};
