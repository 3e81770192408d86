//! Netpbm grayscale I/O.
//!
//! Reads binary `P5` (8- or 16-bit) and plain `P2` files; always writes `P5`
//! with maxval 255. Samples are scaled to linear `[0, 1]` by `v / maxval` on
//! read and quantized with round-half-up on write.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::buffer::{Domain, ImageBuffer};
use crate::error::{Error, Result};

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> std::result::Result<Header, String> {
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'5' || bytes[1] == b'2') {
        return Err("not a P5/P2 graymap".into());
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed header field".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("header field out of range")?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after maxval".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<ImageBuffer, String> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let scale = h.maxval as f64;
    let raster = &bytes[h.data_offset..];
    let samples: Vec<u32> = if h.magic[1] == b'5' {
        if h.maxval < 256 {
            if raster.len() < n {
                return Err("truncated raster".into());
            }
            raster[..n].iter().map(|&b| b as u32).collect()
        } else {
            if raster.len() < 2 * n {
                return Err("truncated raster".into());
            }
            raster[..2 * n]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        }
    } else {
        let text = std::str::from_utf8(raster).map_err(|_| "non-ASCII P2 raster")?;
        let vals: std::result::Result<Vec<u32>, _> =
            text.split_whitespace().take(n).map(str::parse).collect();
        let vals = vals.map_err(|_| "malformed P2 sample")?;
        if vals.len() < n {
            return Err("truncated raster".into());
        }
        vals
    };
    if samples.iter().any(|&s| s > h.maxval) {
        return Err("sample exceeds maxval".into());
    }
    let data = samples.into_iter().map(|s| s as f64 / scale).collect();
    ImageBuffer::new(h.width, h.height, data, Domain::Linear).map_err(|e| e.to_string())
}

/// Round-half-up quantization of a linear sample to 8 bits.
pub fn quantize(v: f64) -> u8 {
    let q = (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor();
    q as u8
}

pub fn encode_pgm(img: &ImageBuffer) -> Result<Vec<u8>> {
    img.expect_domain(Domain::Linear)?;
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize(v)));
    Ok(out)
}

pub fn read_pgm(path: &Path) -> Result<ImageBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|reason| Error::Image {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn write_pgm(path: &Path, img: &ImageBuffer) -> Result<()> {
    let bytes = encode_pgm(img)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}
