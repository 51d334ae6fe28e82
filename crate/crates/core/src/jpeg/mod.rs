//! Read-only baseline JPEG decoding down to quantized luma coefficients.
//!
//! Only entropy decoding is performed: no dequantization, no IDCT, no color
//! conversion. Chroma blocks are decoded to keep the bit position and then
//! dropped.

mod bits;
mod huffman;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::codec::CoefficientPlane;
use crate::qmatrix::{QMatrix, ZIGZAG_TO_NATURAL};
use crate::{Block, BLOCK_LEN};
use bits::BitReader;
use huffman::HuffmanTable;

pub use crate::qmatrix::{dezigzag, zigzag};

/// Largest coefficient magnitude an 8-bit baseline stream can carry.
pub const MAX_COEFFICIENT: i32 = 2048;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unsupported JPEG: {0}")]
    UnsupportedFormat(&'static str),

    #[error("corrupt JPEG stream: {0}")]
    CorruptStream(&'static str),

    #[error("missing table: {0}")]
    MissingTable(&'static str),
}

/// Per-component sampling factors, luma first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sampling {
    factors: Vec<(u8, u8)>,
}

impl Sampling {
    pub fn new(factors: Vec<(u8, u8)>) -> Self {
        Self { factors }
    }

    pub fn factors(&self) -> &[(u8, u8)] {
        &self.factors
    }

    pub fn is_gray(&self) -> bool {
        self.factors.len() == 1
    }
}

impl fmt::Display for Sampling {
    /// `gray`, `4:4:4`, `4:2:2`, `4:2:0`, `4:4:0`, `4:1:1`, or the raw
    /// factors (`2x2,1x1,1x1`) for anything else.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_gray() {
            return f.write_str("gray");
        }
        let chroma_full = self.factors[1..].iter().all(|&hv| hv == (1, 1));
        if chroma_full {
            let name = match self.factors[0] {
                (1, 1) => Some("4:4:4"),
                (2, 1) => Some("4:2:2"),
                (2, 2) => Some("4:2:0"),
                (1, 2) => Some("4:4:0"),
                (4, 1) => Some("4:1:1"),
                _ => None,
            };
            if let Some(name) = name {
                return f.write_str(name);
            }
        }
        for (i, (h, v)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{h}x{v}")?;
        }
        Ok(())
    }
}

/// Luma coefficients and metadata recovered from a JPEG file.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientImage {
    /// Quantized luma coefficients in natural order, with the luma table.
    pub y_coeffs: CoefficientPlane,
    pub pixel_width: u32,
    pub pixel_height: u32,
    pub sampling: Sampling,
    /// Block columns and rows that cover real pixels. The plane can be larger
    /// when the scan pads the last MCU row or column.
    pub valid_blocks: (usize, usize),
    pub source_path: Option<String>,
}

impl CoefficientImage {
    pub fn q_luma(&self) -> &QMatrix {
        self.y_coeffs.q()
    }

    /// True when the plane carries padding blocks beyond the image edge,
    /// or the image size is not a multiple of 8.
    pub fn has_padding(&self) -> bool {
        self.valid_blocks != (self.y_coeffs.blocks_wide(), self.y_coeffs.blocks_high())
            || self.pixel_width % 8 != 0
            || self.pixel_height % 8 != 0
    }
}

#[derive(Clone, Debug)]
struct Component {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
}

struct Frame {
    width: usize,
    height: usize,
    components: Vec<Component>,
    h_max: usize,
    v_max: usize,
}

impl Frame {
    fn mcus(&self) -> (usize, usize) {
        (
            self.width.div_ceil(8 * self.h_max),
            self.height.div_ceil(8 * self.v_max),
        )
    }

    /// Blocks covering the real pixels of component `c`.
    fn component_blocks(&self, c: usize) -> (usize, usize) {
        let comp = &self.components[c];
        let w = (self.width * comp.h).div_ceil(self.h_max);
        let h = (self.height * comp.v).div_ceil(self.v_max);
        (w.div_ceil(8), h.div_ceil(8))
    }

    /// Size of the stored luma plane: whole MCUs for interleaved frames.
    fn luma_plane_blocks(&self) -> (usize, usize) {
        if self.components.len() == 1 {
            self.component_blocks(0)
        } else {
            let (mx, my) = self.mcus();
            (mx * self.components[0].h, my * self.components[0].v)
        }
    }
}

struct Segments<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Segments<'a> {
    fn byte(&mut self) -> Result<u8, ParseError> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or(ParseError::CorruptStream("unexpected end of data"))?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, ParseError> {
        Ok(((self.byte()? as u16) << 8) | self.byte()? as u16)
    }

    /// Next marker code, skipping fill bytes.
    fn marker(&mut self) -> Result<u8, ParseError> {
        if self.byte()? != 0xFF {
            return Err(ParseError::CorruptStream("expected marker"));
        }
        let mut code = self.byte()?;
        while code == 0xFF {
            code = self.byte()?;
        }
        if code == 0x00 {
            return Err(ParseError::CorruptStream("expected marker"));
        }
        Ok(code)
    }

    /// Body of a length-prefixed segment.
    fn segment(&mut self) -> Result<&'a [u8], ParseError> {
        let len = self.u16()? as usize;
        if len < 2 || self.pos + len - 2 > self.data.len() {
            return Err(ParseError::CorruptStream("bad segment length"));
        }
        let body = &self.data[self.pos..self.pos + len - 2];
        self.pos += len - 2;
        Ok(body)
    }
}

#[derive(Default)]
struct Tables {
    quant: [Option<[u16; BLOCK_LEN]>; 4],
    dc: [Option<HuffmanTable>; 4],
    ac: [Option<HuffmanTable>; 4],
    restart_interval: usize,
}

fn parse_dqt(body: &[u8], tables: &mut Tables) -> Result<(), ParseError> {
    let mut i = 0;
    while i < body.len() {
        let pq = body[i] >> 4;
        let tq = (body[i] & 0x0F) as usize;
        i += 1;
        if tq > 3 || pq > 1 {
            return Err(ParseError::CorruptStream("bad DQT header"));
        }
        let size = if pq == 0 { 64 } else { 128 };
        if i + size > body.len() {
            return Err(ParseError::CorruptStream("short DQT segment"));
        }
        let mut zz = [0u16; BLOCK_LEN];
        for (k, z) in zz.iter_mut().enumerate() {
            *z = if pq == 0 {
                body[i + k] as u16
            } else {
                ((body[i + 2 * k] as u16) << 8) | body[i + 2 * k + 1] as u16
            };
        }
        i += size;
        let mut natural = [0u16; BLOCK_LEN];
        for (k, &v) in zz.iter().enumerate() {
            natural[ZIGZAG_TO_NATURAL[k]] = v;
        }
        tables.quant[tq] = Some(natural);
    }
    Ok(())
}

fn parse_dht(body: &[u8], tables: &mut Tables) -> Result<(), ParseError> {
    let mut i = 0;
    while i < body.len() {
        let tc = body[i] >> 4;
        let th = (body[i] & 0x0F) as usize;
        i += 1;
        if tc > 1 || th > 3 || i + 16 > body.len() {
            return Err(ParseError::CorruptStream("bad DHT header"));
        }
        let mut counts = [0u8; 16];
        counts.copy_from_slice(&body[i..i + 16]);
        i += 16;
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if i + total > body.len() {
            return Err(ParseError::CorruptStream("short DHT segment"));
        }
        let table = HuffmanTable::new(&counts, &body[i..i + total])?;
        i += total;
        if tc == 0 {
            tables.dc[th] = Some(table);
        } else {
            tables.ac[th] = Some(table);
        }
    }
    Ok(())
}

fn parse_sof(body: &[u8]) -> Result<Frame, ParseError> {
    if body.len() < 6 {
        return Err(ParseError::CorruptStream("short SOF segment"));
    }
    if body[0] != 8 {
        return Err(ParseError::UnsupportedFormat("sample precision other than 8 bits"));
    }
    let height = ((body[1] as usize) << 8) | body[2] as usize;
    let width = ((body[3] as usize) << 8) | body[4] as usize;
    let n = body[5] as usize;
    if height == 0 {
        return Err(ParseError::UnsupportedFormat("height defined by DNL"));
    }
    if width == 0 {
        return Err(ParseError::CorruptStream("zero image width"));
    }
    if n != 1 && n != 3 {
        return Err(ParseError::UnsupportedFormat("only grayscale and YCbCr are supported"));
    }
    if body.len() != 6 + 3 * n {
        return Err(ParseError::CorruptStream("bad SOF length"));
    }
    let mut components = Vec::with_capacity(n);
    for c in 0..n {
        let b = &body[6 + 3 * c..9 + 3 * c];
        let (h, v) = ((b[1] >> 4) as usize, (b[1] & 0x0F) as usize);
        if !(1..=4).contains(&h) || !(1..=4).contains(&v) || b[2] > 3 {
            return Err(ParseError::CorruptStream("bad component parameters"));
        }
        components.push(Component {
            id: b[0],
            h,
            v,
            tq: b[2] as usize,
        });
    }
    let h_max = components.iter().map(|c| c.h).max().unwrap_or(1);
    let v_max = components.iter().map(|c| c.v).max().unwrap_or(1);
    Ok(Frame {
        width,
        height,
        components,
        h_max,
        v_max,
    })
}

struct ScanComponent {
    index: usize,
    dc: usize,
    ac: usize,
}

fn parse_sos(body: &[u8], frame: &Frame, tables: &Tables) -> Result<Vec<ScanComponent>, ParseError> {
    if body.is_empty() {
        return Err(ParseError::CorruptStream("short SOS segment"));
    }
    let n = body[0] as usize;
    if n == 0 || n > 4 || body.len() != 1 + 2 * n + 3 {
        return Err(ParseError::CorruptStream("bad SOS length"));
    }
    let mut scan = Vec::with_capacity(n);
    for i in 0..n {
        let id = body[1 + 2 * i];
        let td = (body[2 + 2 * i] >> 4) as usize;
        let ta = (body[2 + 2 * i] & 0x0F) as usize;
        let index = frame
            .components
            .iter()
            .position(|c| c.id == id)
            .ok_or(ParseError::CorruptStream("scan references unknown component"))?;
        if scan.iter().any(|s: &ScanComponent| s.index == index) {
            return Err(ParseError::CorruptStream("component repeated in scan"));
        }
        if td > 3 || tables.dc[td].is_none() {
            return Err(ParseError::MissingTable("DC Huffman table"));
        }
        if ta > 3 || tables.ac[ta].is_none() {
            return Err(ParseError::MissingTable("AC Huffman table"));
        }
        if tables.quant[frame.components[index].tq].is_none() {
            return Err(ParseError::MissingTable("quantization table"));
        }
        scan.push(ScanComponent { index, dc: td, ac: ta });
    }
    let tail = &body[1 + 2 * n..];
    // spectral selection 0..63, no successive approximation
    if tail[0] != 0 || tail[1] != 63 || tail[2] != 0 {
        return Err(ParseError::CorruptStream("non-sequential spectral selection in baseline scan"));
    }
    if n > 1 {
        let units: usize = scan
            .iter()
            .map(|s| frame.components[s.index].h * frame.components[s.index].v)
            .sum();
        if units > 10 {
            return Err(ParseError::CorruptStream("too many blocks per MCU"));
        }
    }
    Ok(scan)
}

fn decode_block(
    bits: &mut BitReader<'_>,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
    pred: &mut i32,
    out: &mut Block,
) -> Result<(), ParseError> {
    let t = dc.decode(bits)?;
    if t > 11 {
        return Err(ParseError::CorruptStream("DC magnitude category out of range"));
    }
    let diff = bits.receive_extend(t)?;
    *pred += diff;
    if pred.abs() > MAX_COEFFICIENT {
        return Err(ParseError::CorruptStream("DC coefficient out of range"));
    }
    *out = [0; BLOCK_LEN];
    out[0] = *pred;
    let mut k = 1;
    while k < BLOCK_LEN {
        let rs = ac.decode(bits)?;
        let run = (rs >> 4) as usize;
        let size = rs & 0x0F;
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        if size > 10 {
            return Err(ParseError::CorruptStream("AC magnitude category out of range"));
        }
        k += run;
        if k >= BLOCK_LEN {
            return Err(ParseError::CorruptStream("AC run past end of block"));
        }
        out[ZIGZAG_TO_NATURAL[k]] = bits.receive_extend(size)?;
        k += 1;
    }
    if k > BLOCK_LEN {
        return Err(ParseError::CorruptStream("AC run past end of block"));
    }
    Ok(())
}

/// Decodes one baseline scan, writing luma blocks into `luma`.
/// Returns the byte offset where the entropy-coded data ends.
fn decode_scan(
    data: &[u8],
    frame: &Frame,
    tables: &Tables,
    scan: &[ScanComponent],
    mut luma: Option<&mut CoefficientPlane>,
) -> Result<usize, ParseError> {
    let interleaved = scan.len() > 1;
    let (mcus_x, mcus_y) = if interleaved {
        frame.mcus()
    } else {
        frame.component_blocks(scan[0].index)
    };
    let blocks_per_mcu: usize = if interleaved {
        scan.iter()
            .map(|s| frame.components[s.index].h * frame.components[s.index].v)
            .sum()
    } else {
        1
    };
    // every block costs at least two bits
    if (mcus_x * mcus_y).saturating_mul(blocks_per_mcu) > data.len().saturating_mul(4) + 64 {
        return Err(ParseError::CorruptStream("scan too short for frame size"));
    }

    let mut bits = BitReader::new(data);
    let mut preds = [0i32; 4];
    let mut scratch: Block = [0; BLOCK_LEN];
    let total = mcus_x * mcus_y;
    let interval = tables.restart_interval;
    let mut next_rst = 0u8;

    for mcu in 0..total {
        if interval > 0 && mcu > 0 && mcu % interval == 0 {
            bits.restart(next_rst)?;
            next_rst = (next_rst + 1) & 7;
            preds = [0; 4];
        }
        let (mx, my) = (mcu % mcus_x, mcu / mcus_x);
        for (si, sc) in scan.iter().enumerate() {
            let comp = &frame.components[sc.index];
            let dc = tables.dc[sc.dc].as_ref().expect("checked in SOS");
            let ac = tables.ac[sc.ac].as_ref().expect("checked in SOS");
            let (bh, bv) = if interleaved { (comp.h, comp.v) } else { (1, 1) };
            for v in 0..bv {
                for h in 0..bh {
                    let (bx, by) = if interleaved {
                        (mx * comp.h + h, my * comp.v + v)
                    } else {
                        (mx, my)
                    };
                    let target = match luma.as_deref_mut() {
                        Some(plane)
                            if sc.index == 0 && bx < plane.blocks_wide() && by < plane.blocks_high() =>
                        {
                            plane.block_mut(bx, by)
                        }
                        _ => &mut scratch,
                    };
                    decode_block(&mut bits, dc, ac, &mut preds[si], target)?;
                }
            }
        }
    }
    Ok(bits.position())
}

/// Skips trailing scan bytes up to the next non-RST marker.
fn skip_to_marker(data: &[u8], mut pos: usize) -> usize {
    while pos + 1 < data.len() {
        if data[pos] == 0xFF {
            let next = data[pos + 1];
            if next != 0x00 && next != 0xFF && !(0xD0..=0xD7).contains(&next) {
                return pos;
            }
        }
        pos += 1;
    }
    data.len()
}

/// Decodes the quantized luma coefficients and luma quantization table of a
/// baseline (SOF0), 8-bit, Huffman-coded JPEG.
pub fn parse_jpeg(bytes: &[u8]) -> Result<CoefficientImage, ParseError> {
    if bytes.len() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return Err(ParseError::CorruptStream("missing SOI marker"));
    }
    let mut seg = Segments { data: bytes, pos: 2 };
    let mut tables = Tables::default();
    let mut frame: Option<Frame> = None;
    let mut luma: Option<CoefficientPlane> = None;

    loop {
        let marker = seg.marker()?;
        match marker {
            0xC0 => {
                if frame.is_some() {
                    return Err(ParseError::CorruptStream("multiple frames"));
                }
                frame = Some(parse_sof(seg.segment()?)?);
            }
            0xC2 | 0xC6 | 0xCA | 0xCE => {
                return Err(ParseError::UnsupportedFormat("progressive JPEG"))
            }
            0xC9..=0xCB | 0xCD..=0xCF | 0xCC => {
                return Err(ParseError::UnsupportedFormat("arithmetic coding"))
            }
            0xC1 => return Err(ParseError::UnsupportedFormat("extended sequential JPEG")),
            0xC3 | 0xC5 | 0xC7 => {
                return Err(ParseError::UnsupportedFormat("lossless or hierarchical JPEG"))
            }
            0xC4 => parse_dht(seg.segment()?, &mut tables)?,
            0xDB => parse_dqt(seg.segment()?, &mut tables)?,
            0xDD => {
                let body = seg.segment()?;
                if body.len() != 2 {
                    return Err(ParseError::CorruptStream("bad DRI length"));
                }
                tables.restart_interval = ((body[0] as usize) << 8) | body[1] as usize;
            }
            0xDA => {
                let frame = frame
                    .as_ref()
                    .ok_or(ParseError::CorruptStream("scan before frame header"))?;
                let scan = parse_sos(seg.segment()?, frame, &tables)?;
                if scan.iter().any(|s| s.index == 0) {
                    let q_raw = tables.quant[frame.components[0].tq].expect("checked in SOS");
                    if q_raw.iter().any(|&v| v > 255) {
                        return Err(ParseError::UnsupportedFormat("16-bit quantization table"));
                    }
                    let q = QMatrix::new(q_raw)
                        .map_err(|_| ParseError::CorruptStream("zero quantization entry"))?;
                    match luma.as_mut() {
                        Some(plane) if plane.q() != &q => {
                            return Err(ParseError::CorruptStream("luma table changed between scans"))
                        }
                        Some(_) => {}
                        None => {
                            let (bw, bh) = frame.luma_plane_blocks();
                            luma = Some(CoefficientPlane::zeros(bw, bh, q));
                        }
                    }
                }
                let consumed = decode_scan(&bytes[seg.pos..], frame, &tables, &scan, luma.as_mut())?;
                seg.pos = skip_to_marker(bytes, seg.pos + consumed);
            }
            0xD9 => break,
            0xD0..=0xD7 | 0x01 => {}
            0xDC => return Err(ParseError::UnsupportedFormat("DNL marker")),
            0xE0..=0xEF | 0xFE | 0xDE | 0xDF | 0xF0..=0xFD => {
                seg.segment()?;
            }
            _ => return Err(ParseError::CorruptStream("unknown marker")),
        }
        if seg.pos >= bytes.len() {
            // tolerate a missing EOI after the last scan
            break;
        }
    }

    let frame = frame.ok_or(ParseError::CorruptStream("no frame header"))?;
    let y_coeffs = luma.ok_or(ParseError::CorruptStream("no luma scan"))?;
    let factors = frame
        .components
        .iter()
        .map(|c| (c.h as u8, c.v as u8))
        .collect();
    Ok(CoefficientImage {
        y_coeffs,
        pixel_width: frame.width as u32,
        pixel_height: frame.height as u32,
        sampling: Sampling::new(factors),
        valid_blocks: frame.component_blocks(0),
        source_path: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use alloc::vec;

    fn fixture(name: &str) -> Vec<u8> {
        let path = std::format!("{}/tests/fixtures/jpeg/{name}.jpg", env!("CARGO_MANIFEST_DIR"));
        std::fs::read(path).unwrap()
    }

    #[test]
    fn mid_gray_block_is_all_zero() {
        for name in ["gray_mid_8x8_q75", "gray_mid_8x8_q30"] {
            let img = parse_jpeg(&fixture(name)).unwrap();
            assert_eq!(img.y_coeffs.blocks_wide(), 1);
            assert_eq!(img.y_coeffs.blocks_high(), 1);
            assert_eq!(img.y_coeffs.block(0, 0), &[0; 64]);
            assert_eq!(img.sampling.to_string(), "gray");
        }
    }

    #[test]
    fn standard_table_dc_entry() {
        let img = parse_jpeg(&fixture("std_luma_q50")).unwrap();
        assert_eq!(img.q_luma().at(0, 0), 16);
        assert_eq!(*img.q_luma(), QMatrix::standard_luminance());
        assert_eq!(img.sampling.to_string(), "4:4:4");
    }

    #[test]
    fn padded_geometry_is_flagged() {
        // 17x23 gray: 3x3 blocks of which all cover pixels, size not 8-aligned
        let img = parse_jpeg(&fixture("sweep_q052_422_17x23")).unwrap();
        assert_eq!(img.sampling.to_string(), "4:2:2");
        // 4:2:2 MCU is 16x8: two MCUs across, three down
        assert_eq!((img.y_coeffs.blocks_wide(), img.y_coeffs.blocks_high()), (4, 3));
        assert_eq!(img.valid_blocks, (3, 3));
        assert!(img.has_padding());
    }

    #[test]
    fn progressive_rejected() {
        assert_eq!(
            parse_jpeg(&fixture("progressive_q80")),
            Err(ParseError::UnsupportedFormat("progressive JPEG"))
        );
    }

    #[test]
    fn twelve_bit_rejected() {
        let mut bytes = fixture("gray_q80");
        let sof = bytes.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
        bytes[sof + 4] = 12;
        assert_eq!(
            parse_jpeg(&bytes),
            Err(ParseError::UnsupportedFormat("sample precision other than 8 bits"))
        );
    }

    #[test]
    fn arithmetic_rejected() {
        let mut bytes = fixture("gray_q80");
        let sof = bytes.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
        bytes[sof + 1] = 0xC9;
        assert_eq!(
            parse_jpeg(&bytes),
            Err(ParseError::UnsupportedFormat("arithmetic coding"))
        );
    }

    #[test]
    fn non_jpeg_is_corrupt() {
        assert!(matches!(
            parse_jpeg(b"GIF89a........"),
            Err(ParseError::CorruptStream(_))
        ));
        assert!(matches!(parse_jpeg(&[]), Err(ParseError::CorruptStream(_))));
    }

    #[test]
    fn truncated_scan_is_corrupt() {
        let bytes = fixture("color_q80_restart");
        let sos = bytes.windows(2).position(|w| w == [0xFF, 0xDA]).unwrap();
        let cut = &bytes[..sos + 40];
        assert!(matches!(parse_jpeg(cut), Err(ParseError::CorruptStream(_))));
    }

    #[test]
    fn missing_huffman_table() {
        let bytes = fixture("gray_q80");
        // drop every DHT segment
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == 0xFF && bytes.get(i + 1) == Some(&0xC4) {
                let len = ((bytes[i + 2] as usize) << 8) | bytes[i + 3] as usize;
                i += 2 + len;
                continue;
            }
            out.push(bytes[i]);
            i += 1;
        }
        assert!(matches!(parse_jpeg(&out), Err(ParseError::MissingTable(_))));
    }

    #[test]
    fn wrong_restart_marker_is_corrupt() {
        let mut bytes = fixture("color_q80_restart");
        let sos = bytes.windows(2).position(|w| w == [0xFF, 0xDA]).unwrap();
        let rst = sos + bytes[sos..].windows(2).position(|w| w == [0xFF, 0xD0]).unwrap();
        bytes[rst + 1] = 0xD5;
        assert!(matches!(parse_jpeg(&bytes), Err(ParseError::CorruptStream(_))));
    }

    #[test]
    fn coefficients_within_baseline_bound() {
        let img = parse_jpeg(&fixture("low_q10")).unwrap();
        assert!(img
            .y_coeffs
            .blocks()
            .iter()
            .flatten()
            .all(|c| c.abs() <= MAX_COEFFICIENT));
    }

    #[test]
    fn image_is_thread_safe_value() {
        fn is_send_sync<T: Send + Sync + Clone>() {}
        is_send_sync::<CoefficientImage>();
    }

    #[test]
    fn sampling_names() {
        assert_eq!(Sampling::new(vec![(2, 2), (1, 1), (1, 1)]).to_string(), "4:2:0");
        assert_eq!(Sampling::new(vec![(1, 2), (1, 1), (1, 1)]).to_string(), "4:4:0");
        assert_eq!(Sampling::new(vec![(2, 2), (2, 1), (1, 1)]).to_string(), "2x2,2x1,1x1");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = parse_jpeg(&bytes);
        }

        #[test]
        fn mutated_fixture_never_panics(pos in 0usize..4096, val in any::<u8>(), cut in 0usize..4096) {
            let mut bytes = fixture("color_q80_restart");
            let n = bytes.len();
            bytes[pos % n] = val;
            bytes.truncate(n - cut % n);
            let _ = parse_jpeg(&bytes);
        }
    }
}
