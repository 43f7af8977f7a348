//! BQT1 quantized-vector files, little-endian throughout:
//!
//! ```text
//! "BQT1" | k: u32 | N: u64 | k x level: f64 | k x plane: ceil(N/64) x u64
//! ```
//!
//! Planes use the bit layout of [`BitPlane`]; pad bits must be zero.

use std::fs;
use std::path::Path;

use crate::bitkernel::{BitPlane, PackedQuantizedVector};
use crate::error::{FormatError, Result};
use crate::tensor::io::read_magic;

const BQT_MAGIC: &[u8; 4] = b"BQT1";

/// Largest `k` a BQT1 file may declare.
pub const MAX_BQT_BITS: u32 = 16;

pub fn encode_bqt(q: &PackedQuantizedVector) -> Vec<u8> {
    let words = q.len().div_ceil(64);
    let mut out = Vec::with_capacity(16 + 8 * q.bits() * (1 + words));
    out.extend_from_slice(BQT_MAGIC);
    out.extend_from_slice(&(q.bits() as u32).to_le_bytes());
    out.extend_from_slice(&(q.len() as u64).to_le_bytes());
    for v in q.levels() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for plane in q.planes() {
        for w in plane.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    out
}

pub fn decode_bqt(bytes: &[u8]) -> std::result::Result<PackedQuantizedVector, FormatError> {
    read_magic(bytes, BQT_MAGIC, "BQT1")?;
    let header = 4 + 4 + 8;
    if bytes.len() < header {
        return Err(FormatError::Truncated { needed: header, available: bytes.len() });
    }
    let k = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if k == 0 || k > MAX_BQT_BITS {
        return Err(FormatError::UnsupportedBits(k));
    }
    if n == 0 {
        return Err(FormatError::ZeroDimension);
    }
    let n = usize::try_from(n).map_err(|_| FormatError::DimensionOverflow)?;
    let k = k as usize;
    let words = n.div_ceil(64);
    let body = words
        .checked_add(1)
        .and_then(|w| w.checked_mul(8 * k))
        .ok_or(FormatError::DimensionOverflow)?;
    let available = bytes.len() - header;
    if available < body {
        return Err(FormatError::Truncated { needed: body, available });
    }
    if available > body {
        return Err(FormatError::TrailingBytes(available - body));
    }

    let mut chunks = bytes[header..].chunks_exact(8).map(|c| c.try_into().unwrap());
    let mut levels = Vec::with_capacity(k);
    for index in 0..k {
        let v = f64::from_le_bytes(chunks.next().unwrap());
        if !v.is_finite() {
            return Err(FormatError::NonFiniteValue { index });
        }
        levels.push(v);
    }
    let mut planes = Vec::with_capacity(k);
    for plane in 0..k {
        let raw: Vec<u64> = chunks.by_ref().take(words).map(u64::from_le_bytes).collect();
        let packed = BitPlane::from_words(raw.clone(), n).expect("word count matches");
        if packed.words() != raw.as_slice() {
            return Err(FormatError::DirtyPadding { plane });
        }
        planes.push(packed);
    }
    Ok(PackedQuantizedVector::new(levels, planes).expect("validated above"))
}

pub fn save_bqt(path: &Path, q: &PackedQuantizedVector) -> Result<()> {
    fs::write(path, encode_bqt(q))?;
    Ok(())
}

pub fn load_bqt(path: &Path) -> Result<PackedQuantizedVector> {
    Ok(decode_bqt(&fs::read(path)?)?)
}
