//! Sequence file formats and atomic output.
//!
//! * raw: one symbol per byte.
//! * text: whitespace-separated non-negative integers.
//! * PBM: P1 (ASCII) or P4 (packed) bitmaps, raster-scanned row-major;
//!   0 = white, 1 = black.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_raw(bytes: &[u8]) -> Vec<usize> {
    bytes.iter().map(|&b| b as usize).collect()
}

pub fn format_raw(symbols: &[usize]) -> Result<Vec<u8>> {
    symbols
        .iter()
        .map(|&s| u8::try_from(s).map_err(|_| Error::range(format!("symbol {s} does not fit in a byte"))))
        .collect()
}

pub fn parse_text(text: &str) -> Result<Vec<usize>> {
    text.split_whitespace().map(|tok| tok.parse().map_err(|_| Error::Parse(format!("bad symbol {tok:?}")))).collect()
}

pub fn format_text(symbols: &[usize]) -> String {
    let mut out = symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    out.push('\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmEncoding {
    Ascii,
    Packed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    pub encoding: PbmEncoding,
    /// Row-major raster scan, 1 = black.
    pub pixels: Vec<usize>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize, encoding: PbmEncoding, pixels: Vec<usize>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::validation(format!("{} pixels for a {width}x{height} bitmap", pixels.len())));
        }
        if pixels.iter().any(|&p| p > 1) {
            return Err(Error::range("bitmap pixels must be 0 or 1"));
        }
        Ok(Self { width, height, encoding, pixels })
    }

    pub fn with_pixels(&self, pixels: Vec<usize>) -> Result<Self> {
        Self::new(self.width, self.height, self.encoding, pixels)
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("malformed PBM header".into()))
    }
}

pub fn parse_pbm(bytes: &[u8]) -> Result<Bitmap> {
    let encoding = match bytes.get(..2) {
        Some(b"P1") => PbmEncoding::Ascii,
        Some(b"P4") => PbmEncoding::Packed,
        _ => return Err(Error::Parse("not a P1 or P4 PBM file".into())),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number()?;
    let height = h.number()?;
    let mut pixels = Vec::with_capacity(width * height);
    match encoding {
        PbmEncoding::Ascii => {
            while pixels.len() < width * height {
                h.skip_space_and_comments();
                match bytes.get(h.pos) {
                    Some(b'0') => pixels.push(0),
                    Some(b'1') => pixels.push(1),
                    Some(&c) => return Err(Error::Parse(format!("unexpected byte {c:#04x} in P1 raster"))),
                    None => return Err(Error::Parse("truncated P1 raster".into())),
                }
                h.pos += 1;
            }
        }
        PbmEncoding::Packed => {
            // exactly one whitespace byte separates the header from the raster
            if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::Parse("malformed PBM header".into()));
            }
            let raster = &bytes[h.pos + 1..];
            let stride = width.div_ceil(8);
            if raster.len() < stride * height {
                return Err(Error::Parse("truncated P4 raster".into()));
            }
            for row in raster.chunks_exact(stride.max(1)).take(height) {
                for col in 0..width {
                    pixels.push(((row[col / 8] >> (7 - col % 8)) & 1) as usize);
                }
            }
        }
    }
    Bitmap::new(width, height, encoding, pixels)
}

pub fn format_pbm(bitmap: &Bitmap) -> Vec<u8> {
    let mut out = Vec::new();
    match bitmap.encoding {
        PbmEncoding::Ascii => {
            writeln!(out, "P1\n{} {}", bitmap.width, bitmap.height).unwrap();
            for row in bitmap.pixels.chunks(bitmap.width.max(1)) {
                let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
        }
        PbmEncoding::Packed => {
            writeln!(out, "P4\n{} {}", bitmap.width, bitmap.height).unwrap();
            for row in bitmap.pixels.chunks(bitmap.width.max(1)) {
                let mut packed = vec![0u8; bitmap.width.div_ceil(8)];
                for (col, &p) in row.iter().enumerate() {
                    packed[col / 8] |= (p as u8) << (7 - col % 8);
                }
                out.extend_from_slice(&packed);
            }
        }
    }
    out
}

/// Writes via a temporary file in the target directory, then renames, so
/// readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
