//! Block-domain compression math: 8x8 DCT, (de)quantization and the
//! decode/re-encode recompression chain used to probe coefficient stability.
//!
//! One recompression step takes a plane of quantized coefficients `Q` and a
//! quantization matrix `q` and produces
//!
//! ```text
//! D = Q * q                  (dequantize)
//! B = IDCT(D)                (level-shifted pixel block)
//! I = clamp(round(B + 128))  (decoded pixels, 0..=255)
//! Q' = round(DCT(I - 128) / q)
//! ```
//!
//! Rounding is to nearest with ties away from zero throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Grid;
use crate::qmatrix::QMatrix;
use crate::{Block, Error, Result, BLOCK_LEN};

/// Recompression count used when none is given.
pub const DEFAULT_K: usize = 7;
/// Largest accepted recompression count.
pub const MAX_K: usize = 16;

/// Decoded 8-bit samples, one per pixel.
pub type PixelPlane = Grid<u8>;

const C1: f64 = 0.9807852804032304;
const C2: f64 = 0.9238795325112867;
const C3: f64 = 0.8314696123025452;
const C5: f64 = 0.5555702330196023;
const C6: f64 = 0.38268343236508984;
const C7: f64 = 0.19509032201612833;

// cos((2x + 1) u pi / 16), with the sqrt(2)/2 of rows 0 and 4 moved into
// PAIR_SCALE so that those rows are exactly +-1.
const COS: [[f64; 8]; 8] = [
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    [C1, C3, C5, C7, -C7, -C5, -C3, -C1],
    [C2, C6, -C6, -C2, -C2, -C6, C6, C2],
    [C3, -C7, -C1, -C5, C5, C1, C7, -C3],
    [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    [C5, -C1, C7, C3, -C3, -C7, C1, -C5],
    [C6, -C2, C2, -C6, -C6, C2, -C2, C6],
    [C7, -C5, C3, -C1, C1, -C3, C5, -C7],
];

// 1 / (4 sqrt 2)
const S_MIXED: f64 = 0.17677669529663687;

// Product of the two 1-D normalizations for frequency pair (u, v). Exactly
// 1/8 whenever both frequencies are 0 or 4.
const PAIR_SCALE: [[f64; 8]; 8] = {
    let mut t = [[0.0; 8]; 8];
    let mut u = 0;
    while u < 8 {
        let mut v = 0;
        while v < 8 {
            let a = u == 0 || u == 4;
            let b = v == 0 || v == 4;
            t[u][v] = match (a, b) {
                (true, true) => 0.125,
                (false, false) => 0.25,
                _ => S_MIXED,
            };
            v += 1;
        }
        u += 1;
    }
    t
};

/// Orthonormal 2-D type-II DCT of a level-shifted 8x8 block.
///
/// A constant block of value `c` yields `8c` at DC and zero elsewhere.
pub fn fdct_block(pixels: &[f64; BLOCK_LEN]) -> [f64; BLOCK_LEN] {
    // columns: tmp[u][x] = sum_y cos[u][y] f[y][x]
    let mut tmp = [0.0f64; BLOCK_LEN];
    for u in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for y in 0..8 {
                acc += COS[u][y] * pixels[y * 8 + x];
            }
            tmp[u * 8 + x] = acc;
        }
    }
    let mut out = [0.0f64; BLOCK_LEN];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += COS[v][x] * tmp[u * 8 + x];
            }
            out[u * 8 + v] = PAIR_SCALE[u][v] * acc;
        }
    }
    out
}

/// Inverse of [`fdct_block`].
pub fn idct_block(coeffs: &[f64; BLOCK_LEN]) -> [f64; BLOCK_LEN] {
    let mut scaled = [0.0f64; BLOCK_LEN];
    for u in 0..8 {
        for v in 0..8 {
            scaled[u * 8 + v] = PAIR_SCALE[u][v] * coeffs[u * 8 + v];
        }
    }
    // tmp[y][v] = sum_u cos[u][y] a[u][v]
    let mut tmp = [0.0f64; BLOCK_LEN];
    for y in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += COS[u][y] * scaled[u * 8 + v];
            }
            tmp[y * 8 + v] = acc;
        }
    }
    let mut out = [0.0f64; BLOCK_LEN];
    for y in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += COS[v][x] * tmp[y * 8 + v];
            }
            out[y * 8 + x] = acc;
        }
    }
    out
}

/// Element-wise `round(D / q)`, ties away from zero.
pub fn quantize(coeffs: &[f64; BLOCK_LEN], q: &QMatrix) -> Block {
    let mut out = [0i32; BLOCK_LEN];
    for (i, o) in out.iter_mut().enumerate() {
        *o = libm::round(coeffs[i] / q.get(i) as f64) as i32;
    }
    out
}

/// Element-wise `Q * q`.
pub fn dequantize(block: &Block, q: &QMatrix) -> [f64; BLOCK_LEN] {
    let mut out = [0.0f64; BLOCK_LEN];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (block[i] * q.get(i) as i32) as f64;
    }
    out
}

/// How decoded samples are brought back to integers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Truncation {
    /// Round, then clamp to `0..=255`, as a real decoder does.
    #[default]
    Clamp,
    /// Round only; samples may leave the 8-bit range.
    RoundOnly,
}

/// `clamp(round(B + 128), 0, 255)` for a level-shifted IDCT output block.
pub fn round_truncate(block: &[f64; BLOCK_LEN]) -> [u8; BLOCK_LEN] {
    let mut out = [0u8; BLOCK_LEN];
    for (o, &b) in out.iter_mut().zip(block.iter()) {
        *o = libm::round(b + 128.0).clamp(0.0, 255.0) as u8;
    }
    out
}

fn round_samples(block: &[f64; BLOCK_LEN], mode: Truncation) -> [f64; BLOCK_LEN] {
    let mut out = [0.0f64; BLOCK_LEN];
    for (o, &b) in out.iter_mut().zip(block.iter()) {
        let r = libm::round(b + 128.0);
        *o = match mode {
            Truncation::Clamp => r.clamp(0.0, 255.0),
            Truncation::RoundOnly => r,
        };
    }
    out
}

/// One decode/re-encode cycle of a single block with the same table.
pub fn recompress_block(block: &Block, q: &QMatrix, mode: Truncation) -> Block {
    let pixels = round_samples(&idct_block(&dequantize(block, q)), mode);
    let mut shifted = [0.0f64; BLOCK_LEN];
    for (s, &p) in shifted.iter_mut().zip(pixels.iter()) {
        *s = p - 128.0;
    }
    quantize(&fdct_block(&shifted), q)
}

/// Quantized coefficients of one image plane, stored block by block.
///
/// Blocks are row-major over the block grid; coefficients are row-major
/// within each block. Viewed as a pixel-sized grid, coefficient `(u, v)` of
/// block `(bx, by)` sits at row `8 * by + u`, column `8 * bx + v`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPlane {
    blocks_wide: usize,
    blocks_high: usize,
    blocks: Vec<Block>,
    q: QMatrix,
}

impl CoefficientPlane {
    /// An all-zero plane (a mid-gray image).
    pub fn zeros(blocks_wide: usize, blocks_high: usize, q: QMatrix) -> Self {
        Self {
            blocks_wide,
            blocks_high,
            blocks: vec![[0; BLOCK_LEN]; blocks_wide * blocks_high],
            q,
        }
    }

    pub fn from_blocks(
        blocks_wide: usize,
        blocks_high: usize,
        blocks: Vec<Block>,
        q: QMatrix,
    ) -> Result<Self> {
        if blocks.len() != blocks_wide * blocks_high {
            return Err(Error::LengthMismatch {
                expected: blocks_wide * blocks_high,
                actual: blocks.len(),
            });
        }
        Ok(Self {
            blocks_wide,
            blocks_high,
            blocks,
            q,
        })
    }

    /// Builds a plane from a pixel-sized coefficient grid.
    pub fn from_grid(grid: &Grid<i32>, q: QMatrix) -> Result<Self> {
        let (w, h) = (grid.width(), grid.height());
        if w % 8 != 0 || h % 8 != 0 {
            return Err(Error::NotBlockAligned {
                width: w,
                height: h,
            });
        }
        let (bw, bh) = (w / 8, h / 8);
        let mut plane = Self::zeros(bw, bh, q);
        for by in 0..bh {
            for bx in 0..bw {
                let block = plane.block_mut(bx, by);
                for u in 0..8 {
                    for v in 0..8 {
                        block[u * 8 + v] = grid[(by * 8 + u, bx * 8 + v)];
                    }
                }
            }
        }
        Ok(plane)
    }

    /// Pixel-sized view of the coefficients.
    pub fn to_grid(&self) -> Grid<i32> {
        Grid::from_fn(self.width(), self.height(), |row, col| self.coefficient(row, col))
    }

    #[inline]
    pub fn blocks_wide(&self) -> usize {
        self.blocks_wide
    }

    #[inline]
    pub fn blocks_high(&self) -> usize {
        self.blocks_high
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.blocks_wide * 8
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.blocks_high * 8
    }

    #[inline]
    pub fn q(&self) -> &QMatrix {
        &self.q
    }

    #[inline]
    pub fn block(&self, bx: usize, by: usize) -> &Block {
        &self.blocks[by * self.blocks_wide + bx]
    }

    #[inline]
    pub fn block_mut(&mut self, bx: usize, by: usize) -> &mut Block {
        &mut self.blocks[by * self.blocks_wide + bx]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// Coefficient at pixel-grid position `(row, col)`.
    #[inline]
    pub fn coefficient(&self, row: usize, col: usize) -> i32 {
        self.block(col / 8, row / 8)[(row % 8) * 8 + col % 8]
    }

    pub fn same_shape(&self, other: &CoefficientPlane) -> bool {
        self.blocks_wide == other.blocks_wide && self.blocks_high == other.blocks_high
    }

    /// Number of coefficients that differ from `other`.
    pub fn count_changes(&self, other: &CoefficientPlane) -> Result<usize> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch("coefficient planes"));
        }
        Ok(self
            .blocks
            .iter()
            .zip(other.blocks.iter())
            .map(|(a, b)| a.iter().zip(b.iter()).filter(|(x, y)| x != y).count())
            .sum())
    }
}

/// Applies one recompression step to every block, keeping the table.
pub fn recompress_once(plane: &CoefficientPlane) -> CoefficientPlane {
    recompress_once_with(plane, Truncation::Clamp)
}

pub fn recompress_once_with(plane: &CoefficientPlane, mode: Truncation) -> CoefficientPlane {
    let q = plane.q;
    CoefficientPlane {
        blocks_wide: plane.blocks_wide,
        blocks_high: plane.blocks_high,
        blocks: plane
            .blocks
            .iter()
            .map(|b| recompress_block(b, &q, mode))
            .collect(),
        q,
    }
}

/// Quantized planes `Q0 ..= Qk` from repeated recompression.
#[derive(Clone, Debug, PartialEq)]
pub struct RecompressionTrace {
    planes: Vec<CoefficientPlane>,
}

impl RecompressionTrace {
    /// Wraps externally produced planes. Needs at least two planes of one
    /// shape and table.
    pub fn from_planes(planes: Vec<CoefficientPlane>) -> Result<Self> {
        if planes.len() < 2 {
            return Err(Error::InvalidK(planes.len().saturating_sub(1)));
        }
        if planes
            .iter()
            .any(|p| !p.same_shape(&planes[0]) || p.q() != planes[0].q())
        {
            return Err(Error::ShapeMismatch("trace planes differ in shape or table"));
        }
        Ok(Self { planes })
    }

    /// Number of recompression steps.
    pub fn k(&self) -> usize {
        self.planes.len() - 1
    }

    pub fn planes(&self) -> &[CoefficientPlane] {
        &self.planes
    }

    pub fn first(&self) -> &CoefficientPlane {
        &self.planes[0]
    }

    pub fn last(&self) -> &CoefficientPlane {
        &self.planes[self.planes.len() - 1]
    }

    pub fn q(&self) -> &QMatrix {
        self.planes[0].q()
    }

    /// Changed-coefficient count of every step `Q(i-1) -> Qi`, length `k`.
    pub fn step_change_counts(&self) -> Vec<usize> {
        self.planes
            .windows(2)
            .map(|w| w[0].count_changes(&w[1]).expect("trace planes share a shape"))
            .collect()
    }
}

/// Runs `k` recompression steps starting from `q0`.
pub fn recompression_trace(q0: &CoefficientPlane, k: usize) -> Result<RecompressionTrace> {
    recompression_trace_with(q0, k, Truncation::Clamp)
}

pub fn recompression_trace_with(
    q0: &CoefficientPlane,
    k: usize,
    mode: Truncation,
) -> Result<RecompressionTrace> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::InvalidK(k));
    }
    let mut planes = Vec::with_capacity(k + 1);
    planes.push(q0.clone());
    for i in 0..k {
        let next = recompress_once_with(&planes[i], mode);
        planes.push(next);
    }
    Ok(RecompressionTrace { planes })
}

/// Mean successive difference of a trace, per coefficient position.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPlane {
    values: Grid<f64>,
    k: usize,
}

impl ResidualPlane {
    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }
}

/// `R = (1/k) * sum_{i=1..k} (Qi - Q(i-1))`, which telescopes to `(Qk - Q0) / k`.
pub fn residual_map(trace: &RecompressionTrace) -> ResidualPlane {
    let first = trace.first();
    let (w, h) = (first.width(), first.height());
    let mut sums = vec![0i64; w * h];
    for pair in trace.planes.windows(2) {
        for (row, chunk) in sums.chunks_mut(w).enumerate() {
            for (col, s) in chunk.iter_mut().enumerate() {
                *s += (pair[1].coefficient(row, col) - pair[0].coefficient(row, col)) as i64;
            }
        }
    }
    let k = trace.k();
    let values = sums.into_iter().map(|s| s as f64 / k as f64).collect();
    ResidualPlane {
        values: Grid::from_vec(w, h, values).expect("sized from the plane"),
        k,
    }
}

/// 1 where the two planes disagree, else 0, on the pixel-sized grid.
pub fn change_mask(a: &CoefficientPlane, b: &CoefficientPlane) -> Result<Grid<u8>> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch("coefficient planes"));
    }
    Ok(Grid::from_fn(a.width(), a.height(), |row, col| {
        (a.coefficient(row, col) != b.coefficient(row, col)) as u8
    }))
}

/// Decodes a plane to 8-bit pixels (dequantize, IDCT, round and clamp).
pub fn decompress_plane(plane: &CoefficientPlane) -> PixelPlane {
    let mut out = Grid::filled(plane.width(), plane.height(), 0u8);
    for by in 0..plane.blocks_high() {
        for bx in 0..plane.blocks_wide() {
            let px = round_truncate(&idct_block(&dequantize(plane.block(bx, by), plane.q())));
            for u in 0..8 {
                for v in 0..8 {
                    out[(by * 8 + u, bx * 8 + v)] = px[u * 8 + v];
                }
            }
        }
    }
    out
}

/// Level-shifts, transforms and quantizes an 8-aligned pixel plane.
pub fn compress_pixels(pixels: &PixelPlane, q: &QMatrix) -> Result<CoefficientPlane> {
    let (w, h) = (pixels.width(), pixels.height());
    if w % 8 != 0 || h % 8 != 0 {
        return Err(Error::NotBlockAligned {
            width: w,
            height: h,
        });
    }
    let mut plane = CoefficientPlane::zeros(w / 8, h / 8, *q);
    for by in 0..h / 8 {
        for bx in 0..w / 8 {
            let mut shifted = [0.0f64; BLOCK_LEN];
            for u in 0..8 {
                for v in 0..8 {
                    shifted[u * 8 + v] = pixels[(by * 8 + u, bx * 8 + v)] as f64 - 128.0;
                }
            }
            *plane.block_mut(bx, by) = quantize(&fdct_block(&shifted), q);
        }
    }
    Ok(plane)
}
