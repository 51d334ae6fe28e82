//! `evaluate`: scores heatmaps against a manifest's ground truth.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use requant_core::metrics::{EvalReport, PerImageEval};
use requant_core::Heatmap;
use serde::Serialize;

use crate::analysis::{analyze_input, AnalyzeOptions};
use crate::corpus::{read_manifest, resolve, ManifestRow};
use crate::error::{AppError, AppResult};
use crate::io::{load_input, read_heatmap, read_mask};

/// Where heatmaps come from.
#[derive(Clone, Debug)]
pub enum Predictions {
    /// `<dir>/<id>.heatmap.png`, as written by `analyze --out-dir`.
    Dir(PathBuf),
    /// Run the analyzer on each manifest entry.
    SelfRun(AnalyzeOptions),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: EvalReport,
    pub skipped: Vec<Skipped>,
}

fn heatmap_for(manifest: &Path, row: &ManifestRow, preds: &Predictions) -> AppResult<Heatmap> {
    match preds {
        Predictions::Dir(dir) => read_heatmap(&dir.join(format!("{}.heatmap.png", row.id))),
        Predictions::SelfRun(opts) => {
            let input = load_input(&resolve(manifest, &row.coeff_path))?;
            Ok(analyze_input(&input, opts)?.0)
        }
    }
}

fn evaluate_row(manifest: &Path, row: &ManifestRow, preds: &Predictions) -> Result<PerImageEval, String> {
    let mask = read_mask(&resolve(manifest, &row.mask_path)).map_err(|e| e.to_string())?;
    let heatmap = heatmap_for(manifest, row, preds).map_err(|e| e.to_string())?;
    PerImageEval::new(row.id.clone(), row.is_tampered(), &heatmap, &mask).map_err(|e| e.to_string())
}

/// Evaluates every manifest row it can. Rows with missing or unreadable
/// inputs are skipped and listed; an empty result is an error.
pub fn evaluate(manifest: &Path, preds: &Predictions) -> AppResult<EvalOutput> {
    let rows = read_manifest(manifest)?;
    let results: Vec<(String, Result<PerImageEval, String>)> = rows
        .par_iter()
        .map(|row| (row.id.clone(), evaluate_row(manifest, row, preds)))
        .collect();

    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in results {
        match r {
            Ok(item) => items.push(item),
            Err(reason) => skipped.push(Skipped { id, reason }),
        }
    }
    if items.is_empty() {
        return Err(AppError::ManifestEmpty);
    }
    skipped.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(EvalOutput {
        report: EvalReport::from_items(items)?,
        skipped,
    })
}
