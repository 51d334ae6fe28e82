//! `inspect`, `analyze` and `histogram`.

use std::path::Path;
use std::time::Instant;

use requant_core::codec::{recompression_trace_with, residual_map, Truncation};
use requant_core::features::{binary_volume, coefficient_histogram, CoefficientHistogram};
use requant_core::localization::{adaptive_aggregate, binarize, image_level_score, instability_heatmap, residual_heatmap};
use requant_core::metrics::FIXED_THRESHOLD;
use requant_core::{estimate_quality, Heatmap};
use serde::Serialize;

use crate::error::{AppError, AppResult};
use crate::io::{load_input, write_atomic, write_gray_png, LoadedInput};

#[derive(Clone, Debug, Serialize)]
pub struct InspectReport {
    pub source: String,
    pub width: usize,
    pub height: usize,
    pub sampling: Option<String>,
    pub blocks_wide: usize,
    pub blocks_high: usize,
    /// Luma table, natural order.
    pub q: Vec<u16>,
    pub estimated_qf: u8,
}

pub fn inspect(path: &Path) -> AppResult<InspectReport> {
    let input = load_input(path)?;
    Ok(InspectReport {
        source: path.display().to_string(),
        width: input.width,
        height: input.height,
        sampling: input.sampling.clone(),
        blocks_wide: input.plane.blocks_wide(),
        blocks_high: input.plane.blocks_high(),
        q: input.plane.q().entries().to_vec(),
        estimated_qf: estimate_quality(input.plane.q()),
    })
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub k: usize,
    pub t: u32,
    pub truncation: Truncation,
    /// Fuse the instability map with the residual map.
    pub fuse_residual: bool,
    /// Report `timing_ms` as 0 so reports are byte-reproducible.
    pub no_timing: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            k: requant_core::codec::DEFAULT_K,
            t: requant_core::features::DEFAULT_T,
            truncation: Truncation::Clamp,
            fuse_residual: false,
            no_timing: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub source: String,
    pub width: usize,
    pub height: usize,
    pub estimated_qf: u8,
    pub k: usize,
    pub t: u32,
    pub per_step_change_counts: Vec<usize>,
    /// Coefficients per clipped magnitude `0..=t`.
    pub magnitude_histogram: Vec<u64>,
    pub image_score: f64,
    pub heatmap_path: Option<String>,
    pub mask_path: Option<String>,
    pub timing_ms: u64,
}

/// Heatmap and report for one loaded plane; nothing is written.
pub fn analyze_input(input: &LoadedInput, opts: &AnalyzeOptions) -> AppResult<(Heatmap, AnalysisReport)> {
    let start = Instant::now();
    let trace = recompression_trace_with(&input.plane, opts.k, opts.truncation)?;
    let mut heatmap = instability_heatmap(&trace);
    if opts.fuse_residual {
        heatmap = adaptive_aggregate(&heatmap, &residual_heatmap(&residual_map(&trace)))?;
    }
    let heatmap = heatmap.crop(input.width, input.height)?;

    let volume = binary_volume(&input.plane.to_grid(), opts.t)?;
    let mut magnitude_histogram = vec![0u64; volume.channels()];
    for r in 0..volume.height() {
        for c in 0..volume.width() {
            magnitude_histogram[volume.hot_channel(r, c)] += 1;
        }
    }

    let report = AnalysisReport {
        source: input.path.display().to_string(),
        width: input.width,
        height: input.height,
        estimated_qf: estimate_quality(input.plane.q()),
        k: opts.k,
        t: opts.t,
        per_step_change_counts: trace.step_change_counts(),
        magnitude_histogram,
        image_score: image_level_score(&heatmap),
        heatmap_path: None,
        mask_path: None,
        timing_ms: if opts.no_timing {
            0
        } else {
            start.elapsed().as_millis() as u64
        },
    };
    Ok((heatmap, report))
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Analyzes one file and, with an output directory, writes
/// `<stem>.heatmap.png`, `<stem>.mask.png` and `<stem>.report.json`.
pub fn analyze(path: &Path, opts: &AnalyzeOptions, out_dir: Option<&Path>) -> AppResult<AnalysisReport> {
    let input = load_input(path)?;
    let (heatmap, mut report) = analyze_input(&input, opts)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let stem = file_stem(path);
        let heat_path = dir.join(format!("{stem}.heatmap.png"));
        let mask_path = dir.join(format!("{stem}.mask.png"));
        write_gray_png(&heat_path, &heatmap.to_gray8())?;
        write_gray_png(&mask_path, &binarize(&heatmap, FIXED_THRESHOLD).to_gray8())?;
        report.heatmap_path = Some(heat_path.display().to_string());
        report.mask_path = Some(mask_path.display().to_string());
        let json = serde_json::to_vec_pretty(&report).expect("report serializes");
        write_atomic(&dir.join(format!("{stem}.report.json")), &json)?;
    }
    Ok(report)
}

pub fn histogram(path: &Path, position: (usize, usize), t: u32) -> AppResult<CoefficientHistogram> {
    let input = load_input(path)?;
    Ok(coefficient_histogram(&input.plane, position, t)?)
}

pub fn histogram_csv(h: &CoefficientHistogram) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["value", "count"]).expect("in-memory write");
    for (v, c) in h.rows() {
        w.write_record([v.to_string(), c.to_string()]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Parses `u,v`.
pub fn parse_position(s: &str) -> Result<(usize, usize), String> {
    let (u, v) = s.split_once(',').ok_or("expected u,v")?;
    let u = u.trim().parse().map_err(|_| "bad row index")?;
    let v = v.trim().parse().map_err(|_| "bad column index")?;
    Ok((u, v))
}
