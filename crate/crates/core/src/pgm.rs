//! Portable graymap (PGM) reading and writing.
//!
//! Reads plain (P2) and raw (P5) files with maxval up to 255. Sample values
//! are taken as stored, without rescaling to 255. Image row `i`, column `j`
//! maps to grid position `(m, n) = (j, i)`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Dims, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Plain,
    Raw,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::MalformedHeader(format!("{what} out of range")))
    }
}

/// Decodes a P2 or P5 image.
pub fn parse(bytes: &[u8]) -> Result<SampleGrid> {
    let format = match bytes.get(..2) {
        Some(b"P2") => Format::Plain,
        Some(b"P5") => Format::Raw,
        _ => return Err(Error::MalformedHeader("expected magic P2 or P5".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(cur.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::MalformedHeader(
            "expected whitespace after magic".into(),
        ));
    }
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "empty image {width}x{height}"
        )));
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader("maxval must be positive".into()));
    }
    if maxval > 255 {
        return Err(Error::MaxvalTooLarge(maxval));
    }
    let dims = Dims::new(width, height);
    let count = dims.len();
    let raster: Vec<u32> = match format {
        Format::Raw => {
            if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::MalformedHeader(
                    "expected whitespace after maxval".into(),
                ));
            }
            let data = &bytes[cur.pos + 1..];
            if data.len() < count {
                return Err(Error::Truncated {
                    expected: count,
                    found: data.len(),
                });
            }
            data[..count].iter().map(|&b| u32::from(b)).collect()
        }
        Format::Plain => {
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                cur.skip_space_and_comments();
                if cur.pos >= bytes.len() {
                    return Err(Error::Truncated {
                        expected: count,
                        found: values.len(),
                    });
                }
                let start = cur.pos;
                while cur
                    .bytes
                    .get(cur.pos)
                    .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
                {
                    cur.pos += 1;
                }
                let token = String::from_utf8_lossy(&bytes[start..cur.pos]);
                let value = token
                    .parse::<u32>()
                    .map_err(|_| Error::MalformedData(format!("invalid sample {token:?}")))?;
                values.push(value);
            }
            values
        }
    };
    if let Some(v) = raster.iter().find(|&&v| v > maxval) {
        return Err(Error::MalformedData(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    // raster is row-major (row i = n, column j = m)
    SampleGrid::from_sample_fn(dims, |m, n| f64::from(raster[n * width + m]))
}

pub fn read(path: impl AsRef<Path>) -> Result<SampleGrid> {
    parse(&fs::read(path)?)
}

/// Encodes as P5 with maxval 255. Every sample must lie in `[0, 255]`; values
/// are rounded half away from zero.
pub fn encode(grid: &SampleGrid) -> Result<Vec<u8>> {
    let Dims { width, height } = grid.dims();
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for n in 0..height {
        for m in 0..width {
            let v = grid.get(m, n);
            if !(0.0..=255.0).contains(&v) {
                return Err(Error::SampleOutOfRange { m, n, value: v });
            }
            out.push(v.round() as u8);
        }
    }
    Ok(out)
}

pub fn write(grid: &SampleGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(grid)?)?;
    Ok(())
}
