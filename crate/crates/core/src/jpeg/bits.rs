use super::ParseError;

/// MSB-first reader over entropy-coded scan bytes.
///
/// Undoes `FF 00` byte stuffing and stops at the first marker; asking for
/// bits past it is a truncated scan.
pub(crate) struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    current: u8,
    bits_left: u8,
    marker: Option<u8>,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Self {
            data,
            pos: 0,
            current: 0,
            bits_left: 0,
            marker: None,
        }
    }

    /// Byte offset just past the data consumed so far.
    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    fn fill(&mut self) -> Result<(), ParseError> {
        if self.marker.is_some() || self.pos >= self.data.len() {
            return Err(ParseError::CorruptStream("truncated scan"));
        }
        let byte = self.data[self.pos];
        if byte == 0xFF {
            let next = *self
                .data
                .get(self.pos + 1)
                .ok_or(ParseError::CorruptStream("truncated scan"))?;
            if next == 0x00 {
                self.pos += 2;
            } else {
                self.marker = Some(next);
                return Err(ParseError::CorruptStream("truncated scan"));
            }
        } else {
            self.pos += 1;
        }
        self.current = byte;
        self.bits_left = 8;
        Ok(())
    }

    #[inline]
    pub(crate) fn read_bit(&mut self) -> Result<u32, ParseError> {
        if self.bits_left == 0 {
            self.fill()?;
        }
        self.bits_left -= 1;
        Ok(((self.current >> self.bits_left) & 1) as u32)
    }

    pub(crate) fn read_bits(&mut self, n: u8) -> Result<u32, ParseError> {
        let mut v = 0u32;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()?;
        }
        Ok(v)
    }

    /// Reads `n` magnitude bits and sign-extends them (JPEG `EXTEND`).
    pub(crate) fn receive_extend(&mut self, n: u8) -> Result<i32, ParseError> {
        if n == 0 {
            return Ok(0);
        }
        let v = self.read_bits(n)? as i32;
        if v < (1 << (n - 1)) {
            Ok(v - (1 << n) + 1)
        } else {
            Ok(v)
        }
    }

    /// Drops the remaining bits of the current byte and consumes an `RSTn`
    /// marker, which must carry the expected index.
    pub(crate) fn restart(&mut self, expected: u8) -> Result<(), ParseError> {
        self.bits_left = 0;
        if self.marker.is_none() {
            // skip fill bytes before the marker
            while self.pos + 1 < self.data.len() && self.data[self.pos] == 0xFF && self.data[self.pos + 1] == 0xFF {
                self.pos += 1;
            }
            if self.pos + 1 < self.data.len() && self.data[self.pos] == 0xFF {
                self.marker = Some(self.data[self.pos + 1]);
            }
        }
        match self.marker.take() {
            Some(m) if m == 0xD0 + expected => {
                self.pos += 2;
                Ok(())
            }
            Some(_) => Err(ParseError::CorruptStream("unexpected marker in scan")),
            None => Err(ParseError::CorruptStream("missing restart marker")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unstuffs_ff00() {
        let data = [0xFF, 0x00, 0x80];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0xFF);
        assert_eq!(r.read_bit().unwrap(), 1);
    }

    #[test]
    fn stops_at_marker() {
        let data = [0xAB, 0xFF, 0xD9];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0xAB);
        assert!(r.read_bit().is_err());
    }

    #[test]
    fn extend_sign() {
        // 3 bits "010" -> 2 - 7 = -5 ; "110" -> 6
        let data = [0b0101_1000];
        let mut r = BitReader::new(&data);
        assert_eq!(r.receive_extend(3).unwrap(), -5);
        assert_eq!(r.receive_extend(3).unwrap(), 6);
    }

    #[test]
    fn restart_checks_index() {
        let data = [0x00, 0xFF, 0xD3, 0x80];
        let mut r = BitReader::new(&data);
        r.read_bits(3).unwrap();
        assert!(r.restart(3).is_ok());
        assert_eq!(r.read_bit().unwrap(), 1);

        let mut r = BitReader::new(&data);
        r.read_bits(3).unwrap();
        assert!(r.restart(2).is_err());
    }
}
