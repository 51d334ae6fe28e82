//! Forward-only fusion operators for multi-scale feature maps: channel
//! attention, spatial attention, dilated-convolution pyramid pooling and
//! bilinear upsampling. Weights come from outside; nothing here trains.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Default channel reduction of the excitation bottleneck.
pub const DEFAULT_REDUCTION: usize = 4;
/// Default dilation rates of the pyramid pooling branches.
pub const DEFAULT_RATES: [usize; 3] = [2, 4, 8];

/// Dense `H x W x C` tensor, channel-last.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        assert!(channels >= 1, "tensor needs at least one channel");
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::ShapeMismatch("tensor needs at least one channel"));
        }
        if data.len() != height * width * channels {
            return Err(Error::LengthMismatch {
                expected: height * width * channels,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tensor values must be finite"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(height, width, channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    *t.at_mut(r, c, ch) = f(r, c, ch);
                }
            }
        }
        t
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + ch]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize, ch: usize) -> &mut f64 {
        &mut self.data[(row * self.width + col) * self.channels + ch]
    }

    #[inline]
    fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Global average pooling, one value per channel.
    pub fn global_average(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (a, &v) in acc.iter_mut().zip(px) {
                *a += v;
            }
        }
        let n = (self.height * self.width) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Fully connected layer, also used as a 1x1 convolution.
/// `weight` is `out x in`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::ShapeMismatch("dense layer with zero width"));
        }
        if weight.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::ShapeMismatch("dense weight or bias size"));
        }
        Ok(Self {
            inputs,
            outputs,
            weight,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, &b)) in out
            .iter_mut()
            .zip(self.weight.chunks_exact(self.inputs).zip(&self.bias))
        {
            *o = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs {
            return Err(Error::ShapeMismatch("dense input width"));
        }
        let mut out = vec![0.0; self.outputs];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Pointwise (1x1) convolution over a tensor.
    pub fn conv1x1(&self, f: &FeatureTensor) -> Result<FeatureTensor> {
        if f.channels != self.inputs {
            return Err(Error::ShapeMismatch("1x1 convolution input channels"));
        }
        let mut out = FeatureTensor::zeros(f.height, f.width, self.outputs);
        for (src, dst) in f
            .data
            .chunks_exact(self.inputs)
            .zip(out.data.chunks_exact_mut(self.outputs))
        {
            self.apply_into(src, dst);
        }
        Ok(out)
    }
}

/// 3x3 convolution with dilation and zero "same" padding.
/// `weight` is `out x in x 3 x 3`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv3x3 {
    inputs: usize,
    outputs: usize,
    dilation: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl Conv3x3 {
    pub fn new(
        inputs: usize,
        outputs: usize,
        dilation: usize,
        weight: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if inputs == 0 || outputs == 0 || dilation == 0 {
            return Err(Error::ShapeMismatch("conv with zero width or dilation"));
        }
        if weight.len() != outputs * inputs * 9 || bias.len() != outputs {
            return Err(Error::ShapeMismatch("conv weight or bias size"));
        }
        Ok(Self {
            inputs,
            outputs,
            dilation,
            weight,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn dilation(&self) -> usize {
        self.dilation
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn forward(&self, f: &FeatureTensor) -> Result<FeatureTensor> {
        if f.channels != self.inputs {
            return Err(Error::ShapeMismatch("3x3 convolution input channels"));
        }
        let (h, w) = (f.height as isize, f.width as isize);
        let d = self.dilation as isize;
        let mut out = FeatureTensor::zeros(f.height, f.width, self.outputs);
        for r in 0..h {
            for c in 0..w {
                let dst = {
                    let start = ((r * w + c) as usize) * self.outputs;
                    &mut out.data[start..start + self.outputs]
                };
                dst.copy_from_slice(&self.bias);
                for ky in 0..3isize {
                    let sr = r + (ky - 1) * d;
                    if sr < 0 || sr >= h {
                        continue;
                    }
                    for kx in 0..3isize {
                        let sc = c + (kx - 1) * d;
                        if sc < 0 || sc >= w {
                            continue;
                        }
                        let src = f.pixel(sr as usize, sc as usize);
                        let tap = (ky * 3 + kx) as usize;
                        for (o, acc) in dst.iter_mut().enumerate() {
                            let base = o * self.inputs * 9;
                            for (i, &v) in src.iter().enumerate() {
                                *acc += self.weight[base + i * 9 + tap] * v;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Weights for one attention stage.
///
/// The channel gate is `sigmoid(up(relu(down(gap(proj(x))))))`; the spatial
/// gate is `sigmoid(spatial_conv([max_c(x); mean_c(x)]))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub proj: Dense,
    pub excite_down: Dense,
    pub excite_up: Dense,
    pub reduction: usize,
    pub spatial_conv: Dense,
}

impl AttentionParams {
    pub fn new(
        proj: Dense,
        excite_down: Dense,
        excite_up: Dense,
        reduction: usize,
        spatial_conv: Dense,
    ) -> Result<Self> {
        let width = proj.outputs;
        if reduction == 0 || width % reduction != 0 {
            return Err(Error::ShapeMismatch("reduction must divide projected channels"));
        }
        let bottleneck = width / reduction;
        if excite_down.inputs != width || excite_down.outputs != bottleneck {
            return Err(Error::ShapeMismatch("excitation down layer"));
        }
        if excite_up.inputs != bottleneck || excite_up.outputs != width {
            return Err(Error::ShapeMismatch("excitation up layer"));
        }
        if spatial_conv.inputs != 2 || spatial_conv.outputs != 1 {
            return Err(Error::ShapeMismatch("spatial convolution must map 2 channels to 1"));
        }
        Ok(Self {
            proj,
            excite_down,
            excite_up,
            reduction,
            spatial_conv,
        })
    }

    /// All-zero weights for `inputs -> outputs` channels.
    pub fn zeros(inputs: usize, outputs: usize, reduction: usize) -> Result<Self> {
        if reduction == 0 || outputs % reduction != 0 {
            return Err(Error::ShapeMismatch("reduction must divide projected channels"));
        }
        Self::new(
            Dense::zeros(inputs, outputs),
            Dense::zeros(outputs, outputs / reduction),
            Dense::zeros(outputs / reduction, outputs),
            reduction,
            Dense::zeros(2, 1),
        )
    }

    pub fn in_channels(&self) -> usize {
        self.proj.inputs
    }

    pub fn out_channels(&self) -> usize {
        self.proj.outputs
    }
}

/// Per-channel gate computed from `f_hi`, one value per `f_lo` channel.
pub fn channel_gate(f_hi: &FeatureTensor, p: &AttentionParams) -> Result<Vec<f64>> {
    let pooled = p.proj.conv1x1(f_hi)?.global_average();
    let mut hidden = p.excite_down.apply(&pooled)?;
    hidden.iter_mut().for_each(|v| *v = v.max(0.0));
    let mut gate = p.excite_up.apply(&hidden)?;
    gate.iter_mut().for_each(|v| *v = sigmoid(*v));
    Ok(gate)
}

/// Gates every channel of `f_lo` by a weight derived from `f_hi`.
pub fn channel_attention(
    f_hi: &FeatureTensor,
    f_lo: &FeatureTensor,
    p: &AttentionParams,
) -> Result<FeatureTensor> {
    if p.in_channels() != f_hi.channels || p.out_channels() != f_lo.channels {
        return Err(Error::ShapeMismatch("channel attention projection"));
    }
    let gate = channel_gate(f_hi, p)?;
    let mut out = f_lo.clone();
    for px in out.data.chunks_exact_mut(out.channels) {
        for (v, g) in px.iter_mut().zip(&gate) {
            *v *= g;
        }
    }
    Ok(out)
}

/// Single-channel spatial gate computed from `f_prev`.
pub fn spatial_gate(f_prev: &FeatureTensor, p: &AttentionParams) -> Result<Vec<f64>> {
    let conv = &p.spatial_conv;
    Ok(f_prev
        .data
        .chunks_exact(f_prev.channels)
        .map(|px| {
            let max = px.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let avg = px.iter().sum::<f64>() / px.len() as f64;
            sigmoid(conv.bias[0] + conv.weight[0] * max + conv.weight[1] * avg)
        })
        .collect())
}

/// Gates every pixel of `f_cur` by a weight derived from `f_prev`.
pub fn spatial_attention(
    f_prev: &FeatureTensor,
    f_cur: &FeatureTensor,
    p: &AttentionParams,
) -> Result<FeatureTensor> {
    if f_prev.height != f_cur.height || f_prev.width != f_cur.width {
        return Err(Error::ShapeMismatch("spatial attention inputs differ in size"));
    }
    let gate = spatial_gate(f_prev, p)?;
    let mut out = f_cur.clone();
    for (px, g) in out.data.chunks_exact_mut(out.channels).zip(&gate) {
        px.iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}

/// Pyramid pooling weights: three dilated 3x3 branches, a pooled branch and
/// a 1x1 projection over their concatenation. No activations.
#[derive(Clone, Debug, PartialEq)]
pub struct AsppParams {
    pub branches: [Conv3x3; 3],
    pub pooled: Dense,
    pub project: Dense,
}

impl AsppParams {
    pub fn new(branches: [Conv3x3; 3], pooled: Dense, project: Dense) -> Result<Self> {
        let inputs = branches[0].inputs;
        let mut rates = [0; 3];
        for (rate, b) in rates.iter_mut().zip(&branches) {
            if b.inputs != inputs {
                return Err(Error::ShapeMismatch("pyramid branches differ in input channels"));
            }
            *rate = b.dilation;
        }
        if rates[0] == rates[1] || rates[0] == rates[2] || rates[1] == rates[2] {
            return Err(Error::InvalidParameter("dilation rates must be distinct"));
        }
        if pooled.inputs != inputs {
            return Err(Error::ShapeMismatch("pooled branch input channels"));
        }
        let concat = branches.iter().map(|b| b.outputs).sum::<usize>() + pooled.outputs;
        if project.inputs != concat {
            return Err(Error::ShapeMismatch("projection input channels"));
        }
        Ok(Self {
            branches,
            pooled,
            project,
        })
    }

    pub fn rates(&self) -> [usize; 3] {
        [
            self.branches[0].dilation,
            self.branches[1].dilation,
            self.branches[2].dilation,
        ]
    }
}

pub fn aspp_forward(f: &FeatureTensor, p: &AsppParams) -> Result<FeatureTensor> {
    if f.channels != p.pooled.inputs {
        return Err(Error::ShapeMismatch("pyramid pooling input channels"));
    }
    let outs = [
        p.branches[0].forward(f)?,
        p.branches[1].forward(f)?,
        p.branches[2].forward(f)?,
    ];
    let pooled = p.pooled.apply(&f.global_average())?;
    let mut concat = Vec::with_capacity(p.project.inputs);
    let mut out = FeatureTensor::zeros(f.height, f.width, p.project.outputs);
    for i in 0..f.height * f.width {
        concat.clear();
        for o in &outs {
            concat.extend_from_slice(&o.data[i * o.channels..(i + 1) * o.channels]);
        }
        concat.extend_from_slice(&pooled);
        let dst = &mut out.data[i * p.project.outputs..(i + 1) * p.project.outputs];
        p.project.apply_into(&concat, dst);
    }
    Ok(out)
}

/// Source coordinate and blend weight for one output index, half-pixel
/// centers with negative coordinates clamped to zero.
fn source_index(dst: usize, factor: usize, len: usize) -> (usize, usize, f64) {
    let src = ((dst as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
    let i0 = (libm::floor(src) as usize).min(len - 1);
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, src - i0 as f64)
}

/// Bilinear upsampling by an integer factor, half-pixel aligned corners.
pub fn bilinear_upsample(f: &FeatureTensor, factor: usize) -> Result<FeatureTensor> {
    if factor == 0 {
        return Err(Error::InvalidParameter("upsampling factor must be at least 1"));
    }
    if factor == 1 {
        return Ok(f.clone());
    }
    if f.height == 0 || f.width == 0 {
        return Ok(FeatureTensor::zeros(f.height * factor, f.width * factor, f.channels));
    }
    let (oh, ow) = (f.height * factor, f.width * factor);
    let mut out = FeatureTensor::zeros(oh, ow, f.channels);
    for r in 0..oh {
        let (r0, r1, ly) = source_index(r, factor, f.height);
        for c in 0..ow {
            let (c0, c1, lx) = source_index(c, factor, f.width);
            for ch in 0..f.channels {
                let top = (1.0 - lx) * f.at(r0, c0, ch) + lx * f.at(r0, c1, ch);
                let bottom = (1.0 - lx) * f.at(r1, c0, ch) + lx * f.at(r1, c1, ch);
                *out.at_mut(r, c, ch) = (1.0 - ly) * top + ly * bottom;
            }
        }
    }
    Ok(out)
}

/// Result of the four-level attention cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeOutput {
    /// Levels 1..=4 after both attention passes, at level-1 resolution.
    pub levels: [FeatureTensor; 4],
    /// Levels that received a channel gate, in application order.
    pub channel_gated: Vec<usize>,
    /// Levels that received a spatial gate, in application order.
    pub spatial_gated: Vec<usize>,
}

/// Runs the interactive attention cascade over levels 1..=4 (finest first).
///
/// Top-down, level `n` for `n = 3, 2, 1` is channel-gated by level `n + 1`
/// using `channel[n - 1]`; level 4 stays ungated. Every level is then
/// upsampled to level-1 resolution and, bottom-up, level `m` for
/// `m = 2, 3, 4` is spatially gated by level `m - 1` using `spatial[m - 2]`;
/// level 1 stays ungated.
pub fn attention_cascade(
    levels: &[FeatureTensor; 4],
    channel: &[AttentionParams; 3],
    spatial: &[AttentionParams; 3],
) -> Result<CascadeOutput> {
    let mut feats = levels.clone();
    let mut channel_gated = Vec::with_capacity(3);
    for n in (1..=3).rev() {
        feats[n - 1] = channel_attention(&feats[n], &feats[n - 1], &channel[n - 1])?;
        channel_gated.push(n);
    }

    let (h1, w1) = (feats[0].height, feats[0].width);
    for f in feats.iter_mut().skip(1) {
        if f.height == 0 || h1 % f.height != 0 || w1 % f.width != 0 || h1 / f.height != w1 / f.width
        {
            return Err(Error::ShapeMismatch("level is not an integer downscale of level 1"));
        }
        *f = bilinear_upsample(f, h1 / f.height)?;
    }

    let mut spatial_gated = Vec::with_capacity(3);
    for m in 2..=4 {
        feats[m - 1] = spatial_attention(&feats[m - 2], &feats[m - 1], &spatial[m - 2])?;
        spatial_gated.push(m);
    }

    debug_assert_eq!(channel_gated, [3, 2, 1]);
    debug_assert_eq!(spatial_gated, [2, 3, 4]);
    Ok(CascadeOutput {
        levels: feats,
        channel_gated,
        spatial_gated,
    })
}
