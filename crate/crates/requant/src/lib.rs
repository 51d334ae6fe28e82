//! File formats and the command-line front end for `requant-core`.
//!
//! Coefficient dumps, 8-bit PNG heatmaps and masks, corpus manifests,
//! fusion weight files, and the `requant` subcommands built on them.

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod dump;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod weights;

pub use error::{AppError, AppResult};
