//! Quantization matrices, zigzag ordering and the IJG quality scaling.

use crate::{Error, Result, BLOCK_LEN};

/// Zigzag index to natural (row-major) index.
pub const ZIGZAG_TO_NATURAL: [usize; BLOCK_LEN] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20,
    13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59,
    52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Natural (row-major) index to zigzag index.
pub const NATURAL_TO_ZIGZAG: [usize; BLOCK_LEN] = {
    let mut table = [0usize; BLOCK_LEN];
    let mut i = 0;
    while i < BLOCK_LEN {
        table[ZIGZAG_TO_NATURAL[i]] = i;
        i += 1;
    }
    table
};

/// Annex K luminance table, natural order. This is the IJG quality 50 table.
pub const STD_LUMINANCE: [u16; BLOCK_LEN] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Reorders a zigzag-serialized block into an 8x8 grid in natural order.
pub fn dezigzag<T: Copy + Default>(zz: &[T]) -> Result<[T; BLOCK_LEN]> {
    if zz.len() != BLOCK_LEN {
        return Err(Error::LengthMismatch {
            expected: BLOCK_LEN,
            actual: zz.len(),
        });
    }
    let mut out = [T::default(); BLOCK_LEN];
    for (k, &v) in zz.iter().enumerate() {
        out[ZIGZAG_TO_NATURAL[k]] = v;
    }
    Ok(out)
}

/// Serializes a natural-order block in zigzag order.
pub fn zigzag<T: Copy + Default>(natural: &[T; BLOCK_LEN]) -> [T; BLOCK_LEN] {
    let mut out = [T::default(); BLOCK_LEN];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = natural[ZIGZAG_TO_NATURAL[k]];
    }
    out
}

/// An 8x8 quantization matrix in natural order, every entry in `1..=255`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "alloc::vec::Vec<u16>", into = "alloc::vec::Vec<u16>"))]
pub struct QMatrix([u16; BLOCK_LEN]);

impl QMatrix {
    pub fn new(entries: [u16; BLOCK_LEN]) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&e| !(1..=255).contains(&e)) {
            return Err(Error::InvalidQuantEntry(bad as u32));
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[u16]) -> Result<Self> {
        let arr: [u16; BLOCK_LEN] = entries.try_into().map_err(|_| Error::LengthMismatch {
            expected: BLOCK_LEN,
            actual: entries.len(),
        })?;
        Self::new(arr)
    }

    /// A matrix of ones: quantization is plain rounding.
    pub const fn unit() -> Self {
        Self([1; BLOCK_LEN])
    }

    pub const fn standard_luminance() -> Self {
        Self(STD_LUMINANCE)
    }

    #[inline]
    pub fn entries(&self) -> &[u16; BLOCK_LEN] {
        &self.0
    }

    /// Entry at natural index `row * 8 + col`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> u16 {
        self.0[row * 8 + col]
    }

    #[inline]
    pub fn get(&self, index: usize) -> u16 {
        self.0[index]
    }

    fn l1_distance(&self, other: &QMatrix) -> u32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs())
            .sum()
    }
}

impl TryFrom<alloc::vec::Vec<u16>> for QMatrix {
    type Error = Error;

    fn try_from(v: alloc::vec::Vec<u16>) -> Result<Self> {
        Self::from_slice(&v)
    }
}

impl From<QMatrix> for alloc::vec::Vec<u16> {
    fn from(q: QMatrix) -> Self {
        q.0.to_vec()
    }
}

/// IJG scaling of the standard luminance table, with baseline clamping to 255.
pub fn quality_to_qmatrix(quality: i32) -> Result<QMatrix> {
    if !(1..=100).contains(&quality) {
        return Err(Error::QualityOutOfRange(quality));
    }
    let scale = if quality < 50 {
        5000 / quality
    } else {
        200 - 2 * quality
    };
    let mut entries = [0u16; BLOCK_LEN];
    for (e, &base) in entries.iter_mut().zip(STD_LUMINANCE.iter()) {
        let v = (base as i32 * scale + 50) / 100;
        *e = v.clamp(1, 255) as u16;
    }
    Ok(QMatrix(entries))
}

/// Quality factor whose IJG-scaled table is nearest (L1) to `q`.
///
/// Ties go to the higher quality.
pub fn estimate_quality(q: &QMatrix) -> u8 {
    let mut best = (u32::MAX, 100u8);
    for quality in (1..=100).rev() {
        // in range by construction
        let candidate = quality_to_qmatrix(quality).expect("quality in range");
        let d = q.l1_distance(&candidate);
        if d < best.0 {
            best = (d, quality as u8);
        }
    }
    best.1
}
