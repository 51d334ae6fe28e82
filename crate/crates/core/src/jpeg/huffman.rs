use alloc::vec::Vec;

use super::bits::BitReader;
use super::ParseError;

/// Canonical Huffman decoding table built from a DHT segment.
#[derive(Clone, Debug)]
pub(crate) struct HuffmanTable {
    // per code length 1..=16: largest code of that length, or -1 if none
    max_code: [i32; 17],
    // per code length: index into `values` of the first code, minus that code
    val_offset: [i32; 17],
    values: Vec<u8>,
}

impl HuffmanTable {
    pub(crate) fn new(counts: &[u8; 16], values: &[u8]) -> Result<Self, ParseError> {
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total != values.len() || total > 256 {
            return Err(ParseError::CorruptStream("Huffman table size mismatch"));
        }
        let mut max_code = [-1i32; 17];
        let mut val_offset = [0i32; 17];
        let mut code = 0i32;
        let mut k = 0i32;
        for len in 1..=16 {
            let n = counts[len - 1] as i32;
            if n > 0 {
                val_offset[len] = k - code;
                code += n;
                k += n;
                if code > (1 << len) {
                    return Err(ParseError::CorruptStream("Huffman code space overflow"));
                }
                max_code[len] = code - 1;
            }
            code <<= 1;
        }
        Ok(Self {
            max_code,
            val_offset,
            values: values.to_vec(),
        })
    }

    pub(crate) fn decode(&self, bits: &mut BitReader<'_>) -> Result<u8, ParseError> {
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | bits.read_bit()? as i32;
            if code <= self.max_code[len] {
                return Ok(self.values[(code + self.val_offset[len]) as usize]);
            }
        }
        Err(ParseError::CorruptStream("invalid Huffman code"))
    }
}
