//! Plain-text coefficient dumps.
//!
//! ```text
//! # requant coefficient dump v1
//! # size W H
//! # blocks BW BH
//! # q <64 entries, natural order>
//! bx by c0 .. c63        one line per block, natural order
//! ```
//!
//! `size` is the visible pixel size; the block grid may be larger when the
//! source was padded to whole MCUs.

use std::fmt::Write as _;

use requant_core::{CoefficientPlane, QMatrix};

pub const HEADER: &str = "# requant coefficient dump v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub width: usize,
    pub height: usize,
    pub plane: CoefficientPlane,
}

pub fn write(plane: &CoefficientPlane, width: usize, height: usize) -> String {
    let mut out = String::with_capacity(plane.blocks().len() * 200 + 400);
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "# size {width} {height}");
    let _ = writeln!(out, "# blocks {} {}", plane.blocks_wide(), plane.blocks_high());
    out.push_str("# q");
    for q in plane.q().entries() {
        let _ = write!(out, " {q}");
    }
    out.push('\n');
    for by in 0..plane.blocks_high() {
        for bx in 0..plane.blocks_wide() {
            let _ = write!(out, "{bx} {by}");
            for c in plane.block(bx, by) {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
    }
    out
}

fn numbers<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad number {t:?}")))
        .collect()
}

pub fn parse(text: &str) -> Result<Dump, String> {
    let mut lines = text.lines().enumerate();
    let mut next_header = |key: &str| -> Result<String, String> {
        let (_, line) = lines.next().ok_or("truncated header")?;
        line.strip_prefix("# ")
            .and_then(|l| l.strip_prefix(key))
            .map(str::to_owned)
            .ok_or_else(|| format!("expected `# {key}` line"))
    };
    if next_header("requant coefficient dump")?.trim() != "v1" {
        return Err("unsupported dump version".into());
    }
    let size: Vec<usize> = numbers(&next_header("size")?)?;
    let blocks: Vec<usize> = numbers(&next_header("blocks")?)?;
    let q: Vec<u16> = numbers(&next_header("q")?)?;
    if size.len() != 2 || blocks.len() != 2 {
        return Err("size and blocks need two values".into());
    }
    let q = QMatrix::from_slice(&q).map_err(|e| e.to_string())?;
    let (bw, bh) = (blocks[0], blocks[1]);
    let mut plane = CoefficientPlane::zeros(bw, bh, q);
    let mut seen = vec![false; bw * bh];
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<i32> = numbers(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        if v.len() != 66 {
            return Err(format!("line {}: expected 66 values", n + 1));
        }
        let (bx, by) = (v[0] as usize, v[1] as usize);
        if v[0] < 0 || v[1] < 0 || bx >= bw || by >= bh {
            return Err(format!("line {}: block out of range", n + 1));
        }
        seen[by * bw + bx] = true;
        plane.block_mut(bx, by).copy_from_slice(&v[2..]);
    }
    if seen.iter().any(|s| !s) {
        return Err("missing blocks".into());
    }
    Ok(Dump {
        width: size[0],
        height: size[1],
        plane,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use requant_core::quality_to_qmatrix;

    proptest! {
        #[test]
        fn round_trip(vals in proptest::collection::vec(-300i32..300, 64 * 6), qf in 1i32..=100) {
            let blocks: Vec<[i32; 64]> = vals.chunks(64).map(|c| c.try_into().unwrap()).collect();
            let plane = CoefficientPlane::from_blocks(3, 2, blocks, quality_to_qmatrix(qf).unwrap()).unwrap();
            let text = write(&plane, 20, 16);
            let back = parse(&text).unwrap();
            prop_assert_eq!(back.plane, plane);
            prop_assert_eq!((back.width, back.height), (20, 16));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let plane = CoefficientPlane::zeros(2, 1, QMatrix::unit());
        let text = write(&plane, 16, 8);
        assert!(parse(&text.replace("v1", "v2")).is_err());
        let missing: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(parse(&missing).is_err());
        assert!(parse(&text.replacen("0 0 0", "9 0 0", 1)).is_err());
        assert!(parse("not a dump").is_err());
    }
}
