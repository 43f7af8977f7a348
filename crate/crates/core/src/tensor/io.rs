//! FQT and CSV tensor files.
//!
//! FQT layout, little-endian throughout:
//!
//! ```text
//! "FQT1" | rank: u32 | rank x dim: u64 | row-major payload: f32 ...
//! ```
//!
//! Only rank 1 and rank 2 are accepted. CSV holds a single flat vector of
//! comma-separated decimals with an optional trailing newline.

use std::fs;
use std::path::Path;

use super::{FloatMatrix, FloatVector, Tensor};
use crate::error::{Error, FormatError, Result};

const FQT_MAGIC: &[u8; 4] = b"FQT1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorFormat {
    Fqt,
    Csv,
}

impl TensorFormat {
    /// `.csv` selects CSV; anything else is FQT.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TensorFormat::Csv,
            _ => TensorFormat::Fqt,
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], FormatError> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated { needed: n, available });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> std::result::Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub(crate) fn read_magic(bytes: &[u8], magic: &'static [u8; 4], name: &'static str) -> std::result::Result<(), FormatError> {
    if bytes.len() < 4 {
        return Err(FormatError::Truncated { needed: 4, available: bytes.len() });
    }
    if &bytes[..4] != magic {
        return Err(FormatError::BadMagic { expected: name });
    }
    Ok(())
}

/// Parses an FQT byte stream.
pub fn decode_fqt(bytes: &[u8]) -> std::result::Result<Tensor, FormatError> {
    read_magic(bytes, FQT_MAGIC, "FQT1")?;
    let mut r = Reader { bytes, pos: 4 };
    let rank = r.u32()?;
    if rank != 1 && rank != 2 {
        return Err(FormatError::UnsupportedRank(rank));
    }
    let mut dims = Vec::with_capacity(rank as usize);
    for _ in 0..rank {
        let d = r.u64()?;
        if d == 0 {
            return Err(FormatError::ZeroDimension);
        }
        dims.push(usize::try_from(d).map_err(|_| FormatError::DimensionOverflow)?);
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(FormatError::DimensionOverflow)?;
    let payload_len = count.checked_mul(4).ok_or(FormatError::DimensionOverflow)?;
    let payload = r.take(payload_len)?;
    if r.remaining() != 0 {
        return Err(FormatError::TrailingBytes(r.remaining()));
    }

    let mut data = Vec::with_capacity(count);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FormatError::NonFiniteValue { index });
        }
        data.push(v as f64);
    }
    // Shape and finiteness were checked above, so construction cannot fail.
    Ok(match dims.as_slice() {
        [_] => Tensor::Vector(FloatVector { data }),
        [rows, cols] => Tensor::Matrix(FloatMatrix { rows: *rows, cols: *cols, data }),
        _ => unreachable!(),
    })
}

/// Serializes to FQT. Entries are rounded to the nearest `f32`.
pub fn encode_fqt(t: &Tensor) -> Vec<u8> {
    let dims = t.dims();
    let data = t.data();
    let mut out = Vec::with_capacity(8 + 8 * dims.len() + 4 * data.len());
    out.extend_from_slice(FQT_MAGIC);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses a flat CSV vector.
pub fn parse_csv(text: &str) -> std::result::Result<FloatVector, FormatError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let body = body.strip_suffix('\r').unwrap_or(body);
    if body.trim().is_empty() {
        return Err(FormatError::EmptyCsv);
    }
    let mut data = Vec::new();
    for (field, token) in body.split(',').enumerate() {
        let trimmed = token.trim_matches(|c| c == ' ' || c == '\t');
        let v: f64 = trimmed
            .parse()
            .map_err(|_| FormatError::BadCsvField { field, token: token.to_string() })?;
        if !v.is_finite() {
            return Err(FormatError::NonFiniteValue { index: field });
        }
        data.push(v);
    }
    Ok(FloatVector { data })
}

/// Comma-joined shortest round-trip decimals with a trailing newline.
pub fn format_csv(v: &FloatVector) -> String {
    let mut out = v.as_slice().iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    out
}

pub fn load_tensor(path: &Path, format: TensorFormat) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    match format {
        TensorFormat::Fqt => Ok(decode_fqt(&bytes)?),
        TensorFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|_| FormatError::NotUtf8)?;
            Ok(Tensor::Vector(parse_csv(text)?))
        }
    }
}

pub fn save_tensor(t: &Tensor, path: &Path, format: TensorFormat) -> Result<()> {
    let bytes = match (format, t) {
        (TensorFormat::Fqt, _) => encode_fqt(t),
        (TensorFormat::Csv, Tensor::Vector(v)) => format_csv(v).into_bytes(),
        (TensorFormat::Csv, Tensor::Matrix(_)) => {
            return Err(Error::Format(FormatError::WrongShape { expected: "1-D" }))
        }
    };
    fs::write(path, bytes)?;
    Ok(())
}
