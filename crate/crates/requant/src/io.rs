//! File helpers: atomic writes, 8-bit grayscale PNG, coefficient input.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageFormat};
use requant_core::{parse_jpeg, BinaryMask, CoefficientPlane, Grid, Heatmap};

use crate::dump;
use crate::error::{AppError, AppResult};

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| AppError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

pub fn encode_gray_png(grid: &Grid<u8>) -> Vec<u8> {
    let img = GrayImage::from_raw(grid.width() as u32, grid.height() as u32, grid.as_slice().to_vec())
        .expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding into memory");
    out.into_inner()
}

pub fn write_gray_png(path: &Path, grid: &Grid<u8>) -> AppResult<()> {
    write_atomic(path, &encode_gray_png(grid))
}

/// Reads any PNG as 8-bit luma.
pub fn read_gray_png(path: &Path) -> AppResult<Grid<u8>> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|e| AppError::format(path, e.to_string()))?
        .into_luma8();
    let (w, h) = img.dimensions();
    Ok(Grid::from_vec(w as usize, h as usize, img.into_raw()).expect("buffer matches dimensions"))
}

/// White (>= 128) pixels are tampered.
pub fn read_mask(path: &Path) -> AppResult<BinaryMask> {
    Ok(BinaryMask::new(read_gray_png(path)?.map(|&v| v >= 128)))
}

pub fn read_heatmap(path: &Path) -> AppResult<Heatmap> {
    let gray = read_gray_png(path)?;
    Ok(Heatmap::new(
        gray.map(|&v| v as f64 / 255.0),
        requant_core::localization::HeatmapOrigin::External,
    )?)
}

/// Luma coefficients from a file, with the metadata the commands report.
#[derive(Clone, Debug)]
pub struct LoadedInput {
    pub path: PathBuf,
    pub plane: CoefficientPlane,
    /// Visible pixel size; the plane may extend past it.
    pub width: usize,
    pub height: usize,
    /// Chroma layout; `None` for coefficient dumps.
    pub sampling: Option<String>,
}

/// Loads a baseline JPEG, or a coefficient dump when the extension is `.coef`.
pub fn load_input(path: &Path) -> AppResult<LoadedInput> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("coef")) {
        let text = std::str::from_utf8(&bytes).map_err(|_| AppError::format(path, "dump is not UTF-8"))?;
        let d = dump::parse(text).map_err(|m| AppError::format(path, m))?;
        return Ok(LoadedInput {
            path: path.to_owned(),
            width: d.width,
            height: d.height,
            plane: d.plane,
            sampling: None,
        });
    }
    let img = parse_jpeg(&bytes).map_err(|source| AppError::Parse {
        path: path.to_owned(),
        source,
    })?;
    Ok(LoadedInput {
        path: path.to_owned(),
        width: img.pixel_width as usize,
        height: img.pixel_height as usize,
        sampling: Some(img.sampling.to_string()),
        plane: img.y_coeffs,
    })
}
