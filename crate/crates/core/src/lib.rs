//! Quantized DCT coefficient recovery and recompression-instability analysis
//! for JPEG double-compression forensics.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, image output
//! and the command-line front end live in the `requant` crate.
//!
//! The pipeline, end to end:
//!
//! 1. [`jpeg::parse_jpeg`] pulls the luma plane of quantized coefficients and
//!    its quantization table straight out of a baseline bitstream.
//! 2. [`codec::recompression_trace`] repeatedly decodes and re-encodes the plane
//!    with the same table; [`codec::residual_map`] summarizes the drift.
//! 3. [`localization::instability_heatmap`] turns the per-block count of
//!    changing coefficients into a tamper heatmap.
//! 4. [`metrics`] scores heatmaps against ground truth masks.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codec;
pub mod corpus;
mod error;
pub mod features;
pub mod fusion;
pub mod grid;
pub mod jpeg;
pub mod localization;
pub mod metrics;
pub mod qmatrix;

pub use codec::{
    change_mask, recompress_once, recompression_trace, residual_map, CoefficientPlane,
    RecompressionTrace, ResidualPlane,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use jpeg::{parse_jpeg, CoefficientImage, ParseError};
pub use localization::{BinaryMask, Heatmap};
pub use qmatrix::{estimate_quality, quality_to_qmatrix, QMatrix};

/// Number of coefficients in an 8x8 block.
pub const BLOCK_LEN: usize = 64;

/// Quantized coefficients of one 8x8 block, natural (row-major) order.
pub type Block = [i32; BLOCK_LEN];
