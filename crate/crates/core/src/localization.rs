//! Tamper heatmaps built from recompression traces, the adaptive weighted
//! aggregation of two heatmaps, binarization and image-level scoring.

use alloc::vec;
use alloc::vec::Vec;

use crate::codec::{RecompressionTrace, ResidualPlane};
use crate::grid::Grid;
use crate::{Error, Result};

/// Where a heatmap came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HeatmapOrigin {
    Instability,
    Residual,
    External,
}

/// Per-pixel tamper likelihood in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    values: Grid<f64>,
    origin: HeatmapOrigin,
}

impl Heatmap {
    /// Fails with `InvalidParameter` if any value is outside `[0, 1]` or NaN.
    pub fn new(values: Grid<f64>, origin: HeatmapOrigin) -> Result<Self> {
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("heatmap values must lie in [0, 1]"));
        }
        Ok(Self { values, origin })
    }

    pub fn zeros(width: usize, height: usize, origin: HeatmapOrigin) -> Self {
        Self {
            values: Grid::filled(width, height, 0.0),
            origin,
        }
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn origin(&self) -> HeatmapOrigin {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Top-left `width x height` window. Used to drop edge padding blocks.
    pub fn crop(&self, width: usize, height: usize) -> Result<Heatmap> {
        if width > self.width() || height > self.height() {
            return Err(Error::ShapeMismatch("crop larger than heatmap"));
        }
        Ok(Heatmap {
            values: Grid::from_fn(width, height, |r, c| self.values[(r, c)]),
            origin: self.origin,
        })
    }

    /// 8-bit grayscale, `v * 255` rounded half up.
    pub fn to_gray8(&self) -> Grid<u8> {
        self.values.map(|&v| libm::floor(v * 255.0 + 0.5) as u8)
    }
}

/// Per-pixel tamper mask; `true` marks tampered pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask(pub Grid<bool>);

impl BinaryMask {
    pub fn new(pixels: Grid<bool>) -> Self {
        Self(pixels)
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self(Grid::filled(width, height, false))
    }

    pub fn pixels(&self) -> &Grid<bool> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// White (255) for tampered, black otherwise.
    pub fn to_gray8(&self) -> Grid<u8> {
        self.0.map(|&b| if b { 255 } else { 0 })
    }
}

/// Min-max normalizes per-block scores and expands each block to 8x8 pixels.
/// A constant score map yields an all-zero heatmap.
fn block_scores_to_heatmap(
    scores: &[f64],
    blocks_wide: usize,
    blocks_high: usize,
    origin: HeatmapOrigin,
) -> Heatmap {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized: Vec<f64> = if scores.is_empty() || hi <= lo {
        vec![0.0; scores.len()]
    } else {
        scores.iter().map(|&s| (s - lo) / (hi - lo)).collect()
    };
    let values = Grid::from_fn(blocks_wide * 8, blocks_high * 8, |r, c| {
        normalized[(r / 8) * blocks_wide + c / 8]
    });
    Heatmap { values, origin }
}

/// Raw per-block instability: changed coefficients summed over all steps,
/// divided by `64 * k`. Row-major over blocks.
pub fn block_instability(trace: &RecompressionTrace) -> Vec<f64> {
    let planes = trace.planes();
    let n = planes[0].blocks().len();
    let mut counts = vec![0usize; n];
    for pair in planes.windows(2) {
        for (count, (a, b)) in counts
            .iter_mut()
            .zip(pair[0].blocks().iter().zip(pair[1].blocks()))
        {
            *count += a.iter().zip(b.iter()).filter(|(x, y)| x != y).count();
        }
    }
    let denom = (64 * trace.k()) as f64;
    counts.into_iter().map(|c| c as f64 / denom).collect()
}

/// Heatmap of how often each block's coefficients change under recompression.
pub fn instability_heatmap(trace: &RecompressionTrace) -> Heatmap {
    let first = trace.first();
    block_scores_to_heatmap(
        &block_instability(trace),
        first.blocks_wide(),
        first.blocks_high(),
        HeatmapOrigin::Instability,
    )
}

/// Heatmap of the per-block mean absolute residual.
pub fn residual_heatmap(residual: &ResidualPlane) -> Heatmap {
    let (bw, bh) = (residual.width() / 8, residual.height() / 8);
    let values = residual.values();
    let scores: Vec<f64> = (0..bw * bh)
        .map(|b| {
            let (by, bx) = (b / bw, b % bw);
            let mut sum = 0.0;
            for r in 0..8 {
                for c in 0..8 {
                    sum += values[(by * 8 + r, bx * 8 + c)].abs();
                }
            }
            sum / 64.0
        })
        .collect();
    block_scores_to_heatmap(&scores, bw, bh, HeatmapOrigin::Residual)
}

/// Weighted aggregation of two heatmaps.
///
/// The map with the larger global maximum is the main map `m` (ties pick
/// `a`), and the result is `max(m) * m + (1 - max(m)) * s`.
pub fn adaptive_aggregate(a: &Heatmap, b: &Heatmap) -> Result<Heatmap> {
    if !a.values.same_shape(&b.values) {
        return Err(Error::ShapeMismatch("heatmaps differ in size"));
    }
    let (main, side) = if b.max() > a.max() { (b, a) } else { (a, b) };
    let w = main.max();
    let data = main
        .values
        .iter()
        .zip(side.values.iter())
        .map(|(&m, &s)| (w * m + (1.0 - w) * s).clamp(0.0, 1.0))
        .collect();
    let origin = if a.origin == b.origin {
        a.origin
    } else {
        HeatmapOrigin::External
    };
    Ok(Heatmap {
        values: Grid::from_vec(a.width(), a.height(), data)?,
        origin,
    })
}

/// `true` where `h >= threshold`.
pub fn binarize(h: &Heatmap, threshold: f64) -> BinaryMask {
    BinaryMask(h.values.map(|&v| v >= threshold))
}

/// Global max pooling of the heatmap.
pub fn image_level_score(h: &Heatmap) -> f64 {
    h.max()
}
