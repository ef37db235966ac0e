//! Binary (P5) and ASCII (P2) graymap reading; P5 writing.

use std::path::Path;

use super::Mask;
use crate::error::{Error, Result};

const FOREGROUND_THRESHOLD: u8 = 127;

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn save_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(mask)).map_err(|e| Error::io(path, e))
}

/// Writes a P5 image with header `P5 <w> <h> 255\n`; foreground is 255.
pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let header = format!("P5 {} {} 255\n", mask.width(), mask.height());
    let mut out = Vec::with_capacity(header.len() + mask.cells().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(mask.cells().iter().map(|&c| if c != 0 { 255u8 } else { 0 }));
    out
}

/// Parses a P5 or P2 graymap with maxval 255; pixels above 127 are foreground.
pub fn decode_pgm(bytes: &[u8]) -> Result<Mask> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().ok_or_else(|| malformed("missing magic number"))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(malformed(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cur.header_int("width")?;
    let height = cur.header_int("height")?;
    let maxval = cur.header_int("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(malformed(format!("maxval {maxval}, expected 255")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dimensions overflow"))?;

    let cells = if binary {
        // Exactly one whitespace byte separates the header from the payload.
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(malformed("missing header terminator")),
        }
        let payload = &cur.bytes[cur.pos..];
        if payload.len() < n {
            return Err(malformed(format!(
                "truncated payload: {} of {n} bytes",
                payload.len()
            )));
        }
        payload[..n]
            .iter()
            .map(|&v| (v > FOREGROUND_THRESHOLD) as u8)
            .collect()
    } else {
        let mut cells = Vec::with_capacity(n);
        for i in 0..n {
            let tok = cur
                .token()
                .ok_or_else(|| malformed(format!("truncated payload: {i} of {n} samples")))?;
            let v = parse_int(tok).ok_or_else(|| malformed("non-numeric sample"))?;
            if v > 255 {
                return Err(malformed(format!("sample {v} exceeds maxval")));
            }
            cells.push((v > FOREGROUND_THRESHOLD as usize) as u8);
        }
        cells
    };
    Mask::new(width, height, cells)
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedPgm(msg.into())
}

fn parse_int(tok: &[u8]) -> Option<usize> {
    std::str::from_utf8(tok).ok()?.parse().ok()
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn header_int(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| malformed(format!("missing {what}")))?;
        parse_int(tok).ok_or_else(|| malformed(format!("bad {what}")))
    }
}
