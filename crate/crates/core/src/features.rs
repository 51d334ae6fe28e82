//! Coefficient features: clipping, one-hot magnitude volumes, per-frequency
//! histograms, the quantization-table and residual guided volumes, and the
//! 8x8 block to 64-channel reshape.

use alloc::vec;
use alloc::vec::Vec;

use crate::codec::{CoefficientPlane, ResidualPlane};
use crate::fusion::FeatureTensor;
use crate::grid::Grid;
use crate::qmatrix::QMatrix;
use crate::{Error, Result};

/// Default clipping threshold.
pub const DEFAULT_T: u32 = 20;

/// Element-wise clamp to `[-t, t]`.
pub fn clip_coeffs(plane: &Grid<i32>, t: u32) -> Grid<i32> {
    let t = t as i32;
    plane.map(|&c| c.clamp(-t, t))
}

/// One-hot encoding of clipped coefficient magnitude, `(t + 1)` channels.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryVolume {
    t: u32,
    width: usize,
    height: usize,
    // channel-major: data[ch * height * width + row * width + col]
    data: Vec<u8>,
}

impl BinaryVolume {
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn channels(&self) -> usize {
        self.t as usize + 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> u8 {
        self.data[(channel * self.height + row) * self.width + col]
    }

    /// The channel that is hot at `(row, col)`.
    pub fn hot_channel(&self, row: usize, col: usize) -> usize {
        (0..self.channels())
            .find(|&ch| self.get(ch, row, col) == 1)
            .expect("one-hot volume")
    }
}

/// Channel `t` is 1 at `(i, j)` iff `|clip(plane(i, j))| == t`.
pub fn binary_volume(plane: &Grid<i32>, t: u32) -> Result<BinaryVolume> {
    if t == 0 {
        return Err(Error::InvalidParameter("clip threshold must be at least 1"));
    }
    let (w, h) = (plane.width(), plane.height());
    let mut data = vec![0u8; (t as usize + 1) * w * h];
    for (idx, &c) in plane.iter().enumerate() {
        let ch = c.unsigned_abs().min(t) as usize;
        data[ch * w * h + idx] = 1;
    }
    Ok(BinaryVolume {
        t,
        width: w,
        height: h,
        data,
    })
}

/// Signed histogram of the coefficient at one frequency across all blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoefficientHistogram {
    pub position: (usize, usize),
    pub t: u32,
    /// Counts for values `-t ..= t`.
    pub bins: Vec<u64>,
    /// Blocks whose value fell outside `[-t, t]`.
    pub out_of_range: u64,
    pub total: u64,
}

impl CoefficientHistogram {
    pub fn count(&self, value: i32) -> u64 {
        let idx = value + self.t as i32;
        if idx < 0 || idx as usize >= self.bins.len() {
            0
        } else {
            self.bins[idx as usize]
        }
    }

    /// `(value, count)` rows from `-t` to `t`.
    pub fn rows(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        let t = self.t as i32;
        self.bins.iter().enumerate().map(move |(i, &c)| (i as i32 - t, c))
    }

    /// Zero-count bins strictly between the smallest and largest occupied
    /// value. These are the periodic gaps double quantization leaves.
    pub fn interior_empty_bins(&self) -> usize {
        let first = self.bins.iter().position(|&c| c > 0);
        let last = self.bins.iter().rposition(|&c| c > 0);
        match (first, last) {
            (Some(a), Some(b)) if b > a => self.bins[a..=b].iter().filter(|&&c| c == 0).count(),
            _ => 0,
        }
    }
}

pub fn coefficient_histogram(
    plane: &CoefficientPlane,
    position: (usize, usize),
    t: u32,
) -> Result<CoefficientHistogram> {
    let (u, v) = position;
    if u >= 8 || v >= 8 {
        return Err(Error::PositionOutOfRange(u, v));
    }
    let ti = t as i32;
    let mut bins = vec![0u64; 2 * t as usize + 1];
    let mut out_of_range = 0;
    for block in plane.blocks() {
        let c = block[u * 8 + v];
        if (-ti..=ti).contains(&c) {
            bins[(c + ti) as usize] += 1;
        } else {
            out_of_range += 1;
        }
    }
    Ok(CoefficientHistogram {
        position,
        t,
        bins,
        out_of_range,
        total: plane.blocks().len() as u64,
    })
}

/// How the residual map scales the binary volume.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidualGuide {
    /// `V * |R|`
    #[default]
    Magnitude,
    /// `V * R`
    Signed,
}

/// The three stacked feature volumes, each `(t + 1) x H x W`, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVolumeSet {
    pub channels: usize,
    pub width: usize,
    pub height: usize,
    pub quantized: Vec<f64>,
    pub dequantized: Vec<f64>,
    pub residual_guided: Vec<f64>,
}

impl FeatureVolumeSet {
    #[inline]
    pub fn index(&self, channel: usize, row: usize, col: usize) -> usize {
        (channel * self.height + row) * self.width + col
    }
}

/// Multiplies the binary volume by the tiled quantization matrix and by the
/// residual map, broadcasting both over channels.
pub fn feature_volume_set(
    volume: &BinaryVolume,
    q: &QMatrix,
    residual: &ResidualPlane,
    guide: ResidualGuide,
) -> Result<FeatureVolumeSet> {
    let (w, h) = (volume.width, volume.height);
    if w % 8 != 0 || h % 8 != 0 {
        return Err(Error::ShapeMismatch("volume is not block aligned"));
    }
    if residual.width() != w || residual.height() != h {
        return Err(Error::ShapeMismatch("residual map and volume differ in size"));
    }
    let plane = w * h;
    let n = volume.data.len();
    let mut quantized = Vec::with_capacity(n);
    let mut dequantized = Vec::with_capacity(n);
    let mut residual_guided = Vec::with_capacity(n);
    let r = residual.values().as_slice();
    for (i, &bit) in volume.data.iter().enumerate() {
        let idx = i % plane;
        let (row, col) = (idx / w, idx % w);
        let b = bit as f64;
        let guide_value = match guide {
            ResidualGuide::Magnitude => r[idx].abs(),
            ResidualGuide::Signed => r[idx],
        };
        quantized.push(b);
        dequantized.push(b * q.at(row % 8, col % 8) as f64);
        residual_guided.push(b * guide_value);
    }
    Ok(FeatureVolumeSet {
        channels: volume.channels(),
        width: w,
        height: h,
        quantized,
        dequantized,
        residual_guided,
    })
}

/// Turns every 8x8 block into one spatial cell with 64 channels; channel
/// index is `8 * row_in_block + col_in_block`.
pub fn block_to_channel_reshape(plane: &Grid<f64>) -> Result<FeatureTensor> {
    let (w, h) = (plane.width(), plane.height());
    if w % 8 != 0 || h % 8 != 0 {
        return Err(Error::NotBlockAligned {
            width: w,
            height: h,
        });
    }
    let (bw, bh) = (w / 8, h / 8);
    let mut t = FeatureTensor::zeros(bh, bw, 64);
    for by in 0..bh {
        for bx in 0..bw {
            for u in 0..8 {
                for v in 0..8 {
                    *t.at_mut(by, bx, u * 8 + v) = plane[(by * 8 + u, bx * 8 + v)];
                }
            }
        }
    }
    Ok(t)
}

/// Inverse of [`block_to_channel_reshape`].
pub fn channel_to_block_reshape(tensor: &FeatureTensor) -> Result<Grid<f64>> {
    if tensor.channels() != 64 {
        return Err(Error::ShapeMismatch("expected 64 channels"));
    }
    Ok(Grid::from_fn(tensor.width() * 8, tensor.height() * 8, |row, col| {
        tensor.at(row / 8, col / 8, (row % 8) * 8 + col % 8)
    }))
}
