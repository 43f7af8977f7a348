//! Bit-packed sign planes and the XNor/popcount arithmetic built on them.
//!
//! Encoding: `+1` is stored as bit 1 and `-1` as bit 0. Element `i` lives in
//! bit `i % 64` (least significant first) of word `i / 64`. Bits past the
//! logical length are always zero.

mod bench;

pub use bench::{gemm_check, kernel_bench, quantize_operands, BenchReport, GemmCheckReport, GEMM_CHECK_THRESHOLD};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::FloatMatrix;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// Mask selecting the live bits of the last word of a `len`-bit plane.
#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A packed `{-1, +1}` sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitPlane {
    words: Vec<u64>,
    len: usize,
}

impl BitPlane {
    /// Packs a sign sequence. Entries `>= 0` encode as `+1`, so any input is
    /// read through the same `sign` convention as the quantizers use.
    pub fn pack(signs: &[i8]) -> Self {
        Self::from_fn(signs.len(), |i| signs[i] >= 0)
    }

    /// Packs `sign(values[i])` with `sign(0) = +1`.
    pub fn from_signs_of(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i| values[i] >= 0.0)
    }

    /// Builds a plane whose element `i` is `+1` iff `positive(i)`.
    pub fn from_fn<F: Fn(usize) -> bool>(len: usize, positive: F) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for (w, word) in words.iter_mut().enumerate() {
            let base = w * 64;
            let end = (base + 64).min(len);
            let mut acc = 0u64;
            for i in base..end {
                acc |= (positive(i) as u64) << (i - base);
            }
            *word = acc;
        }
        Self { words, len }
    }

    /// Wraps raw words. Bits at or beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::LengthMismatch { expected: words_for(len), actual: words.len() });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { words, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_positive(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for plane of length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Element `i` as `+1` or `-1`.
    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        if self.is_positive(i) {
            1
        } else {
            -1
        }
    }

    pub fn unpack(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.sign(i)).collect()
    }

    /// Elementwise negation.
    pub fn complement(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        // Re-mask the pad.
        Self::from_words(words, self.len).expect("word count unchanged")
    }

    pub fn count_positive(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// `sum_i a_i * b_i` over `{-1, +1}` entries, via `2 * popcount(xnor) - N`.
pub fn plane_dot(a: &BitPlane, b: &BitPlane) -> Result<i64> {
    if a.len != b.len {
        return Err(Error::LengthMismatch { expected: a.len, actual: b.len });
    }
    Ok(plane_dot_unchecked(&a.words, &b.words, a.len))
}

#[inline]
fn plane_dot_unchecked(a: &[u64], b: &[u64], len: usize) -> i64 {
    let Some(last) = a.len().checked_sub(1) else {
        return 0;
    };
    let mut agree = 0u64;
    for (x, y) in a[..last].iter().zip(&b[..last]) {
        agree += (!(x ^ y)).count_ones() as u64;
    }
    // Pad bits are zero in both operands, so their xnor is 1; mask them out.
    agree += (!(a[last] ^ b[last]) & tail_mask(len)).count_ones() as u64;
    2 * agree as i64 - len as i64
}

/// Levels `v_1..v_k` paired with their sign planes: `x = sum_i v_i s_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedQuantizedVector {
    levels: Vec<f64>,
    planes: Vec<BitPlane>,
}

impl PackedQuantizedVector {
    pub fn new(levels: Vec<f64>, planes: Vec<BitPlane>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("at least one level is required".into()));
        }
        if levels.len() != planes.len() {
            return Err(Error::LengthMismatch { expected: levels.len(), actual: planes.len() });
        }
        if let Some(index) = levels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let n = planes[0].len();
        if let Some(p) = planes.iter().find(|p| p.len() != n) {
            return Err(Error::LengthMismatch { expected: n, actual: p.len() });
        }
        Ok(Self { levels, planes })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn planes(&self) -> &[BitPlane] {
        &self.planes
    }

    pub fn bits(&self) -> usize {
        self.levels.len()
    }

    pub fn len(&self) -> usize {
        self.planes[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dense `sum_i v_i s_i`, accumulated in plane order.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (v, plane) in self.levels.iter().zip(&self.planes) {
            for (i, o) in out.iter_mut().enumerate() {
                *o += if plane.is_positive(i) { *v } else { -*v };
            }
        }
        out
    }
}

/// Result of a packed inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDotResult {
    pub value: f64,
    /// `cross_terms[i][j] = <s_i^a, s_j^w>`.
    pub cross_terms: Vec<Vec<i64>>,
}

/// `<x^q, w^q> = sum_i sum_j v_i^a v_j^w <s_i^a, s_j^w>`.
///
/// Terms are accumulated in row-major `(i, j)` order.
pub fn quantized_dot(xq: &PackedQuantizedVector, wq: &PackedQuantizedVector) -> Result<QuantizedDotResult> {
    if xq.len() != wq.len() {
        return Err(Error::LengthMismatch { expected: xq.len(), actual: wq.len() });
    }
    let n = xq.len();
    let mut value = 0.0;
    let mut cross_terms = Vec::with_capacity(xq.bits());
    for (va, sa) in xq.levels.iter().zip(&xq.planes) {
        let mut row = Vec::with_capacity(wq.bits());
        for (vw, sw) in wq.levels.iter().zip(&wq.planes) {
            let c = plane_dot_unchecked(&sa.words, &sw.words, n);
            value += va * vw * c as f64;
            row.push(c);
        }
        cross_terms.push(row);
    }
    Ok(QuantizedDotResult { value, cross_terms })
}

/// Same arithmetic as [`quantized_dot`] without materializing cross terms.
fn quantized_dot_value(xq: &PackedQuantizedVector, wq: &PackedQuantizedVector) -> f64 {
    let n = xq.len();
    let mut value = 0.0;
    for (va, sa) in xq.levels.iter().zip(&xq.planes) {
        for (vw, sw) in wq.levels.iter().zip(&wq.planes) {
            value += va * vw * plane_dot_unchecked(&sa.words, &sw.words, n) as f64;
        }
    }
    value
}

/// `C[i][j] = quantized_dot(rows[i], cols[j]).value`.
///
/// Output rows are computed in parallel; every entry is produced by one task
/// with a fixed summation order, so the result is deterministic.
pub fn quantized_matmul(rows: &[PackedQuantizedVector], cols: &[PackedQuantizedVector]) -> Result<FloatMatrix> {
    let (Some(first_row), Some(first_col)) = (rows.first(), cols.first()) else {
        return Err(Error::Empty);
    };
    let inner = first_row.len();
    for q in rows.iter().chain(cols) {
        if q.len() != inner {
            return Err(Error::LengthMismatch { expected: inner, actual: q.len() });
        }
    }
    debug_assert_eq!(first_col.len(), inner);
    let p = cols.len();
    let mut data = vec![0.0; rows.len() * p];
    data.par_chunks_mut(p).zip(rows.par_iter()).for_each(|(out, a)| {
        for (o, b) in out.iter_mut().zip(cols) {
            *o = quantized_dot_value(a, b);
        }
    });
    FloatMatrix::new(rows.len(), p, data)
}
