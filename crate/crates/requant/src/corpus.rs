//! `simulate`: writes a paired tampered/authentic corpus and its manifest.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use requant_core::corpus::{CorpusConfig, LabeledSample};
use serde::{Deserialize, Serialize};

use crate::dump;
use crate::error::{AppError, AppResult};
use crate::io::{write_atomic, write_gray_png};

pub const MANIFEST_NAME: &str = "manifest.csv";

/// One manifest line. Paths are relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    /// `tampered` or `authentic`.
    pub label: String,
    pub qf: i32,
    pub width: usize,
    pub height: usize,
    pub coeff_path: String,
    pub mask_path: String,
}

impl ManifestRow {
    pub fn is_tampered(&self) -> bool {
        self.label == "tampered"
    }
}

fn write_sample(dir: &Path, id: &str, label: &str, s: &LabeledSample) -> AppResult<ManifestRow> {
    let coeff_path = format!("{id}.coef");
    let mask_path = format!("{id}.mask.png");
    let (w, h) = (s.coeffs.width(), s.coeffs.height());
    write_atomic(&dir.join(&coeff_path), dump::write(&s.coeffs, w, h).as_bytes())?;
    write_gray_png(&dir.join(&mask_path), &s.gt_mask.to_gray8())?;
    Ok(ManifestRow {
        id: id.to_owned(),
        label: label.to_owned(),
        qf: s.qf,
        width: w,
        height: h,
        coeff_path,
        mask_path,
    })
}

/// Generates `config.n` tampered samples and their authentic twins into
/// `out_dir`. Rows come back in index order whatever the pool size.
pub fn simulate(config: &CorpusConfig, out_dir: &Path) -> AppResult<Vec<ManifestRow>> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir, e))?;
    let pairs: Vec<[ManifestRow; 2]> = (0..config.n)
        .into_par_iter()
        .map(|i| {
            let (_, tampered, authentic) = config.pair(i)?;
            Ok([
                write_sample(out_dir, &format!("tampered_{i:04}"), "tampered", &tampered)?,
                write_sample(out_dir, &format!("authentic_{i:04}"), "authentic", &authentic)?,
            ])
        })
        .collect::<AppResult<_>>()?;
    let rows: Vec<ManifestRow> = pairs.into_iter().flatten().collect();
    write_manifest(&out_dir.join(MANIFEST_NAME), &rows)?;
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    write_atomic(path, &w.into_inner().expect("in-memory flush"))
}

pub fn read_manifest(path: &Path) -> AppResult<Vec<ManifestRow>> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| r.map_err(|e: csv::Error| AppError::format(path, e.to_string())))
        .collect()
}

/// Resolves a manifest-relative path.
pub fn resolve(manifest: &Path, relative: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(relative)
}
