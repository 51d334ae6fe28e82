//! Block-domain forgery simulator: a background compressed twice at one
//! quality with a freshly pasted region compressed only once, plus the
//! matching authentic image and ground-truth mask.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{compress_pixels, decompress_plane, CoefficientPlane, PixelPlane};
use crate::grid::Grid;
use crate::localization::BinaryMask;
use crate::qmatrix::quality_to_qmatrix;
use crate::{Error, Result};

/// Accepted quality range for simulated forgeries.
pub const QF_RANGE: core::ops::RangeInclusive<i32> = 50..=99;

/// Synthetic content generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Texture {
    /// Smoothed value noise over two scales plus heavy grain.
    Noise,
    /// Random linear ramp plus heavy grain.
    Gradient,
    /// Ramp plus noise.
    #[default]
    Mixed,
    /// Value noise with light grain and almost no clipping; closer to
    /// natural photographs, so coefficient histograms stay concentrated.
    Smooth,
}

/// Rectangle in block units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockRect {
    pub bx: usize,
    pub by: usize,
    pub blocks_wide: usize,
    pub blocks_high: usize,
}

impl BlockRect {
    pub fn is_empty(&self) -> bool {
        self.blocks_wide == 0 || self.blocks_high == 0
    }

    pub fn area_blocks(&self) -> usize {
        self.blocks_wide * self.blocks_high
    }

    pub fn contains_block(&self, bx: usize, by: usize) -> bool {
        (self.bx..self.bx + self.blocks_wide).contains(&bx)
            && (self.by..self.by + self.blocks_high).contains(&by)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForgerySpec {
    pub width: usize,
    pub height: usize,
    pub qf: i32,
    pub splice: BlockRect,
    pub seed: u64,
    pub texture: Texture,
}

impl ForgerySpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.width % 8 != 0 || self.height % 8 != 0 {
            return Err(Error::SpecInvalid("frame must be a nonzero multiple of 8"));
        }
        if !QF_RANGE.contains(&self.qf) {
            return Err(Error::SpecInvalid("quality outside 50..=99"));
        }
        let r = &self.splice;
        if !r.is_empty()
            && (r.bx + r.blocks_wide > self.width / 8 || r.by + r.blocks_high > self.height / 8)
        {
            return Err(Error::SpecInvalid("splice rectangle outside frame"));
        }
        Ok(())
    }

    pub fn blocks_wide(&self) -> usize {
        self.width / 8
    }

    pub fn blocks_high(&self) -> usize {
        self.height / 8
    }

    /// Pixel mask of the splice rectangle.
    pub fn mask(&self) -> BinaryMask {
        BinaryMask::new(Grid::from_fn(self.width, self.height, |r, c| {
            self.splice.contains_block(c / 8, r / 8)
        }))
    }
}

/// Compression history of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CompressionLabel {
    /// Every block compressed once.
    Single,
    /// At least one block compressed twice.
    Double,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub coeffs: CoefficientPlane,
    pub gt_mask: BinaryMask,
    pub label: CompressionLabel,
    pub qf: i32,
}

/// Fills a `width x height` pixel plane with synthetic content.
pub fn synthesize(rng: &mut impl RngCore, width: usize, height: usize, texture: Texture) -> PixelPlane {
    let ramp_amplitude = match texture {
        Texture::Noise => 0.0,
        Texture::Gradient => rng.random_range(60.0..100.0f64),
        Texture::Mixed | Texture::Smooth => rng.random_range(30.0..60.0f64),
    };
    let (gx, gy) = (rng.random_range(-1.0..1.0f64), rng.random_range(-1.0..1.0f64));
    let octaves: Vec<ValueNoise> = match texture {
        Texture::Gradient => Vec::new(),
        Texture::Noise => alloc::vec![
            ValueNoise::new(rng, width, height, 24, 100.0),
            ValueNoise::new(rng, width, height, 6, 60.0),
        ],
        Texture::Mixed => alloc::vec![
            ValueNoise::new(rng, width, height, 24, 80.0),
            ValueNoise::new(rng, width, height, 6, 50.0),
        ],
        Texture::Smooth => alloc::vec![
            ValueNoise::new(rng, width, height, 24, 60.0),
            ValueNoise::new(rng, width, height, 6, 30.0),
        ],
    };
    // Heavy grain clips a share of pixels in nearly every block. Clipping
    // is what makes mid-quality recompression unstable at all.
    let grain = match texture {
        Texture::Gradient => 260.0,
        Texture::Smooth => 12.0,
        _ => 300.0,
    };
    let (w, h) = (width as f64, height as f64);
    let mut data = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let mut v = 128.0;
            v += ramp_amplitude * (gx * (c as f64 / w - 0.5) + gy * (r as f64 / h - 0.5));
            for o in &octaves {
                v += o.sample(r, c);
            }
            v += grain * (rng.random::<f64>() - 0.5);
            data.push(libm::round(v).clamp(0.0, 255.0) as u8);
        }
    }
    Grid::from_vec(width, height, data).expect("sized above")
}

/// Lattice of random values, bilinearly interpolated.
struct ValueNoise {
    cell: usize,
    cols: usize,
    amplitude: f64,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut impl RngCore, width: usize, height: usize, cell: usize, amplitude: f64) -> Self {
        let cols = width / cell + 2;
        let rows = height / cell + 2;
        let lattice = (0..rows * cols).map(|_| rng.random::<f64>() - 0.5).collect();
        Self {
            cell,
            cols,
            amplitude,
            lattice,
        }
    }

    fn sample(&self, r: usize, c: usize) -> f64 {
        let (gy, gx) = (r / self.cell, c / self.cell);
        let fy = (r % self.cell) as f64 / self.cell as f64;
        let fx = (c % self.cell) as f64 / self.cell as f64;
        let at = |y: usize, x: usize| self.lattice[y * self.cols + x];
        let top = at(gy, gx) * (1.0 - fx) + at(gy, gx + 1) * fx;
        let bottom = at(gy + 1, gx) * (1.0 - fx) + at(gy + 1, gx + 1) * fx;
        self.amplitude * (top * (1.0 - fy) + bottom * fy)
    }
}

/// Compresses never-compressed pixels once at `qf`.
pub fn simulate_single(pixels: &PixelPlane, qf: i32) -> Result<CoefficientPlane> {
    compress_pixels(pixels, &quality_to_qmatrix(qf)?)
}

fn background(spec: &ForgerySpec, rng: &mut ChaCha8Rng) -> PixelPlane {
    synthesize(rng, spec.width, spec.height, spec.texture)
}

/// Background compressed, decoded, spliced with fresh content and
/// compressed again at the same quality.
pub fn simulate_spliced_double(spec: &ForgerySpec) -> Result<LabeledSample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = quality_to_qmatrix(spec.qf)?;
    let original = background(spec, &mut rng);
    let mut frame = decompress_plane(&compress_pixels(&original, &q)?);

    let r = spec.splice;
    if !r.is_empty() {
        let donor = synthesize(&mut rng, r.blocks_wide * 8, r.blocks_high * 8, spec.texture);
        for row in 0..donor.height() {
            for col in 0..donor.width() {
                frame[(r.by * 8 + row, r.bx * 8 + col)] = donor[(row, col)];
            }
        }
    }

    let whole = r.bx == 0
        && r.by == 0
        && r.blocks_wide == spec.blocks_wide()
        && r.blocks_high == spec.blocks_high();
    Ok(LabeledSample {
        coeffs: compress_pixels(&frame, &q)?,
        gt_mask: spec.mask(),
        label: if whole {
            CompressionLabel::Single
        } else {
            CompressionLabel::Double
        },
        qf: spec.qf,
    })
}

/// The untouched background of `spec`, compressed once.
pub fn simulate_authentic(spec: &ForgerySpec) -> Result<LabeledSample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let original = background(spec, &mut rng);
    Ok(LabeledSample {
        coeffs: simulate_single(&original, spec.qf)?,
        gt_mask: BinaryMask::empty(spec.width, spec.height),
        label: CompressionLabel::Single,
        qf: spec.qf,
    })
}

/// Parameters of a generated corpus.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusConfig {
    pub n: usize,
    pub qf_min: i32,
    pub qf_max: i32,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Largest splice area as a fraction of the frame.
    pub max_splice_fraction: f64,
    pub texture: Texture,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n: 20,
            qf_min: 50,
            qf_max: 99,
            seed: 0,
            width: 256,
            height: 256,
            max_splice_fraction: 0.015,
            texture: Texture::Mixed,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("corpus size must be at least 1"));
        }
        if self.qf_min > self.qf_max
            || !QF_RANGE.contains(&self.qf_min)
            || !QF_RANGE.contains(&self.qf_max)
        {
            return Err(Error::InvalidParameter("quality range must lie in 50..=99"));
        }
        if !(self.max_splice_fraction > 0.0 && self.max_splice_fraction <= 1.0) {
            return Err(Error::InvalidParameter("splice fraction must be in (0, 1]"));
        }
        if self.width == 0 || self.height == 0 || self.width % 8 != 0 || self.height % 8 != 0 {
            return Err(Error::InvalidParameter("frame must be a nonzero multiple of 8"));
        }
        Ok(())
    }

    /// Forgery parameters of sample `index`. Each index draws from its own
    /// stream of the master seed, so samples can be built in any order.
    pub fn spec(&self, index: usize) -> Result<ForgerySpec> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let qf = rng.random_range(self.qf_min..=self.qf_max);
        let (bw, bh) = (self.width / 8, self.height / 8);
        let budget = ((self.max_splice_fraction * (bw * bh) as f64) as usize).max(1);
        let rect_w = rng.random_range(1..=budget.min(bw));
        let rect_h = rng.random_range(1..=(budget / rect_w).clamp(1, bh));
        let splice = BlockRect {
            bx: rng.random_range(0..=bw - rect_w),
            by: rng.random_range(0..=bh - rect_h),
            blocks_wide: rect_w,
            blocks_high: rect_h,
        };
        Ok(ForgerySpec {
            width: self.width,
            height: self.height,
            qf,
            splice,
            seed: rng.next_u64(),
            texture: self.texture,
        })
    }

    /// The tampered sample and its authentic counterpart for `index`.
    pub fn pair(&self, index: usize) -> Result<(ForgerySpec, LabeledSample, LabeledSample)> {
        let spec = self.spec(index)?;
        Ok((spec, simulate_spliced_double(&spec)?, simulate_authentic(&spec)?))
    }
}
