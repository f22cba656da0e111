//! 8-bit PGM reading (P2 and P5) and P5 writing.

use std::fs;
use std::path::Path;

use crate::error::{PnmError, Result};
use crate::image::GrayImage;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PnmError + '_ {
    move |source| PnmError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode(&bytes)
}

pub fn write_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(img)).map_err(io_err(path))?;
    Ok(())
}

/// Export quantization: clamp to `[0, 255]`, then round half up.
pub fn quantize(value: f64) -> u8 {
    (value.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// Encodes as binary P5 with maxval 255.
pub fn encode(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, PnmError> {
        let tok = self
            .token()
            .ok_or_else(|| PnmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PnmError::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes a P2 or P5 byte stream.
pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(PnmError::BadMagic(String::from_utf8_lossy(bytes).into_owned()).into());
    }
    let magic = &bytes[..2];
    let ascii = match magic {
        b"P2" => true,
        b"P5" => false,
        _ => return Err(PnmError::BadMagic(String::from_utf8_lossy(magic).into_owned()).into()),
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!("zero dimension {width}x{height}")).into());
    }
    if maxval != 255 {
        return Err(PnmError::UnsupportedMaxval(maxval).into());
    }
    let expected = width * height;

    let pixels: Vec<f64> = if ascii {
        let mut values = Vec::with_capacity(expected);
        while values.len() < expected {
            let Some(tok) = cur.token() else { break };
            let v: u32 = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    PnmError::MalformedHeader(format!(
                        "bad sample {:?}",
                        String::from_utf8_lossy(tok)
                    ))
                })?;
            if v > maxval {
                return Err(PnmError::SampleRange(v).into());
            }
            values.push(f64::from(v));
        }
        if values.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                found: values.len(),
            }
            .into());
        }
        values
    } else {
        // exactly one whitespace byte separates maxval from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => {}
            _ => {
                return Err(
                    PnmError::MalformedHeader("missing separator after maxval".into()).into(),
                )
            }
        }
        let data = &bytes[cur.pos + 1..];
        if data.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                found: data.len(),
            }
            .into());
        }
        data[..expected].iter().map(|&b| f64::from(b)).collect()
    };
    GrayImage::new(width, height, pixels)
}
