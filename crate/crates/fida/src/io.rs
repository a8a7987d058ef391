//! Image and matrix file formats.
//!
//! Two on-disk formats are supported:
//!
//! * PGM (P5 binary or P2 ASCII), 8-bit only. Loading maps sample values to
//!   reals in `[0, 255]`; writing clamps to that range and rounds
//!   half-to-even, which is the only place quantization ever happens.
//! * FIDB, a lossless little-endian double container: magic `FIDB`,
//!   u32 version (1), u32 rows, u32 cols, then `rows*cols` f64 row-major.
//!   The matrix variant uses magic `FIDM` and stores doubles column-major.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{FidaError, Result};
use crate::image::Image;

pub const FIDB_MAGIC: &[u8; 4] = b"FIDB";
pub const FIDM_MAGIC: &[u8; 4] = b"FIDM";
pub const FORMAT_VERSION: u32 = 1;

/// Dense matrix payload of a FIDM file, column-major.
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    /// Column-major: entry (i, j) at `data[j * rows + i]`.
    pub data: Vec<f64>,
}

fn format_err(format: &'static str, reason: impl Into<String>) -> FidaError {
    FidaError::Format {
        format,
        reason: reason.into(),
    }
}

fn encode_doubles(magic: &[u8; 4], rows: usize, cols: usize, data: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + data.len() * 8);
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for &v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_doubles(
    bytes: &[u8],
    magic: &[u8; 4],
    format: &'static str,
) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < 16 || &bytes[..4] != magic {
        return Err(format_err(format, "missing or wrong magic bytes"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(format_err(format, format!("unsupported version {version}")));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| format_err(format, "dimension overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != n * 8 {
        return Err(format_err(
            format,
            format!(
                "truncated payload: expected {} bytes, got {}",
                n * 8,
                payload.len()
            ),
        ));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, data))
}

pub fn write_fidb(img: &Image, path: &Path) -> Result<()> {
    let bytes = encode_doubles(FIDB_MAGIC, img.rows(), img.cols(), img.data());
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_fidb(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    let (rows, cols, data) = decode_doubles(&bytes, FIDB_MAGIC, "FIDB")?;
    Image::new(rows, cols, data)
}

pub fn write_fidm(m: &MatrixFile, path: &Path) -> Result<()> {
    if m.data.len() != m.rows * m.cols {
        return Err(FidaError::shape(
            m.rows * m.cols,
            m.data.len(),
            "FIDM payload",
        ));
    }
    let bytes = encode_doubles(FIDM_MAGIC, m.rows, m.cols, &m.data);
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_fidm(path: &Path) -> Result<MatrixFile> {
    let bytes = fs::read(path)?;
    let (rows, cols, data) = decode_doubles(&bytes, FIDM_MAGIC, "FIDM")?;
    if !data.iter().all(|v| v.is_finite()) {
        return Err(format_err("FIDM", "non-finite entries"));
    }
    Ok(MatrixFile { rows, cols, data })
}

pub fn write_pgm(img: &Image, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(32 + img.len());
    write!(out, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
    for &v in img.data() {
        let q = v.clamp(0.0, 255.0).round_ties_even();
        out.push(q as u8);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;

    fn skip_ws(bytes: &[u8], mut pos: usize) -> usize {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                return pos;
            }
        }
    }

    fn token(bytes: &[u8], pos: usize) -> Result<(usize, usize)> {
        let start = skip_ws(bytes, pos);
        let mut end = start;
        while end < bytes.len() && !bytes[end].is_ascii_whitespace() {
            end += 1;
        }
        if start == end {
            return Err(FidaError::Format {
                format: "PGM",
                reason: "unexpected end of header".into(),
            });
        }
        Ok((start, end))
    }

    fn number(bytes: &[u8], pos: usize) -> Result<(usize, usize)> {
        let (start, end) = token(bytes, pos)?;
        let s = std::str::from_utf8(&bytes[start..end]).map_err(|_| FidaError::Format {
            format: "PGM",
            reason: "non-ASCII header".into(),
        })?;
        let v: usize = s.parse().map_err(|_| FidaError::Format {
            format: "PGM",
            reason: format!("bad header number {s:?}"),
        })?;
        Ok((v, end))
    }

    let (start, end) = token(bytes, pos)?;
    let magic = &bytes[start..end];
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(FidaError::Format {
                format: "PGM",
                reason: format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            })
        }
    };
    pos = end;
    let (cols, p) = number(bytes, pos)?;
    let (rows, p) = number(bytes, p)?;
    let (maxval, p) = number(bytes, p)?;
    pos = p;
    if maxval != 255 {
        return Err(FidaError::Format {
            format: "PGM",
            reason: format!("only 8-bit PGM supported (maxval 255), got {maxval}"),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(FidaError::Format {
            format: "PGM",
            reason: "zero dimension".into(),
        });
    }
    let n = rows * cols;
    let data: Vec<f64> = if binary {
        // Exactly one whitespace byte after maxval, then raw samples.
        pos += 1;
        if bytes.len() < pos + n {
            return Err(FidaError::Format {
                format: "PGM",
                reason: "truncated pixel payload".into(),
            });
        }
        bytes[pos..pos + n].iter().map(|&b| b as f64).collect()
    } else {
        let mut out = Vec::with_capacity(n);
        let mut p = pos;
        for _ in 0..n {
            let (v, np) = number(bytes, p)?;
            if v > 255 {
                return Err(FidaError::Format {
                    format: "PGM",
                    reason: format!("sample {v} exceeds maxval"),
                });
            }
            out.push(v as f64);
            p = np;
        }
        out
    };
    Image::new(rows, cols, data)
}

/// Load an image, sniffing the format from the leading magic bytes.
pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && &bytes[..4] == FIDB_MAGIC {
        let (rows, cols, data) = decode_doubles(&bytes, FIDB_MAGIC, "FIDB")?;
        Image::new(rows, cols, data)
    } else {
        parse_pgm(&bytes)
    }
}

/// Write an image, choosing the format from the extension
/// (`.fidb` lossless, anything else PGM).
pub fn write_image(img: &Image, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("fidb") => write_fidb(img, path),
        _ => write_pgm(img, path),
    }
}

/// One-value-per-line gain file.
pub fn read_gains(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| FidaError::Format {
            format: "gains",
            reason: format!("line {}: not a number: {line:?}", lineno + 1),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(FidaError::Format {
            format: "gains",
            reason: "no values".into(),
        });
    }
    Ok(out)
}
