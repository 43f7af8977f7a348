//! Dense tensors, summary statistics, synthetic data and file formats.
//!
//! All values are held as `f64`. Every container rejects NaN and infinities
//! on construction, so downstream code may assume finite input.

pub(crate) mod io;
mod rng;
mod synth;

pub use io::{decode_fqt, encode_fqt, format_csv, load_tensor, parse_csv, save_tensor, TensorFormat};
pub use rng::{SplitMix64, Xoshiro256StarStar};
pub use synth::{generate, generate_matrix, Distribution, SyntheticSpec};

use crate::error::{Error, Result};

/// Leaf size below which [`pairwise_sum_by`] sums sequentially.
const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (tree) summation of `f(0) + ... + f(len - 1)`.
///
/// The range is split at `len / 2` until a block holds at most eight terms,
/// which are then added left to right. The result depends only on the
/// sequence of terms, so it is reproducible across runs and platforms.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        let n = hi - lo;
        if n <= PAIRWISE_BLOCK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + n / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, len, &f)
}

/// Pairwise sum of a slice. See [`pairwise_sum_by`].
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Pairwise mean; `0.0` for an empty slice.
pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A non-empty vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatVector {
    data: Vec<f64>,
}

impl FloatVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Multiplies every entry by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.data.iter().map(|v| v * alpha).collect())
    }

    pub fn stats(&self) -> EmpiricalStats {
        EmpiricalStats::of(&self.data)
    }
}

impl TryFrom<Vec<f64>> for FloatVector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Self::new(data)
    }
}

/// A row-major matrix of finite reals with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FloatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidParameter("matrix size overflows usize".into()))?;
        if data.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows.saturating_mul(cols)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Squared Frobenius norm, summed pairwise over the row-major payload.
    pub fn frobenius_sq(&self) -> f64 {
        pairwise_sum_by(self.data.len(), |i| self.data[i] * self.data[i])
    }

    /// Row-major flattening.
    pub fn flatten(&self) -> FloatVector {
        FloatVector { data: self.data.clone() }
    }
}

/// Either shape a tensor file may hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Vector(FloatVector),
    Matrix(FloatMatrix),
}

impl Tensor {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Tensor::Vector(v) => vec![v.len()],
            Tensor::Matrix(m) => vec![m.rows(), m.cols()],
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            Tensor::Vector(v) => v.as_slice(),
            Tensor::Matrix(m) => m.as_slice(),
        }
    }

    /// Row-major flattening; vectors are returned as is.
    pub fn flatten(&self) -> FloatVector {
        match self {
            Tensor::Vector(v) => v.clone(),
            Tensor::Matrix(m) => m.flatten(),
        }
    }
}

impl From<FloatVector> for Tensor {
    fn from(v: FloatVector) -> Self {
        Tensor::Vector(v)
    }
}

impl From<FloatMatrix> for Tensor {
    fn from(m: FloatMatrix) -> Self {
        Tensor::Matrix(m)
    }
}

/// Exact finite-sample statistics of a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalStats {
    pub mean_abs: f64,
    pub mean: f64,
    /// Sum of squares.
    pub energy: f64,
    pub count: usize,
}

impl EmpiricalStats {
    pub fn of(data: &[f64]) -> Self {
        let n = data.len();
        let denom = n.max(1) as f64;
        Self {
            mean_abs: pairwise_sum_by(n, |i| data[i].abs()) / denom,
            mean: pairwise_sum_by(n, |i| data[i]) / denom,
            energy: pairwise_sum_by(n, |i| data[i] * data[i]),
            count: n,
        }
    }

    /// Statistics of the concatenation of the two underlying samples.
    pub fn merge(&self, other: &Self) -> Self {
        let count = self.count + other.count;
        if count == 0 {
            return *self;
        }
        let (wa, wb) = (self.count as f64, other.count as f64);
        let n = count as f64;
        Self {
            mean_abs: (self.mean_abs * wa + other.mean_abs * wb) / n,
            mean: (self.mean * wa + other.mean * wb) / n,
            energy: self.energy + other.energy,
            count,
        }
    }
}

/// Statistics of a vector.
pub fn stats(x: &FloatVector) -> EmpiricalStats {
    x.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_hand_examples() {
        let s = stats(&FloatVector::new(vec![1.0, -1.0, 3.0, -3.0]).unwrap());
        assert_eq!((s.mean, s.mean_abs, s.energy, s.count), (0.0, 2.0, 20.0, 4));

        let s = stats(&FloatVector::new(vec![0.0, 0.0]).unwrap());
        assert_eq!(s.mean_abs, 0.0);

        let s = stats(&FloatVector::new(vec![5.0]).unwrap());
        assert_eq!((s.mean, s.mean_abs, s.energy), (5.0, 5.0, 25.0));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(FloatVector::new(vec![]), Err(Error::Empty)));
        assert!(matches!(
            FloatVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(
            FloatMatrix::new(2, 2, vec![0.0, 1.0, f64::INFINITY, 2.0]),
            Err(Error::NonFinite { index: 2 })
        ));
        assert!(matches!(
            FloatMatrix::new(2, 3, vec![0.0; 5]),
            Err(Error::LengthMismatch { expected: 6, actual: 5 })
        ));
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let values: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&values), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_mean(&[]), 0.0);
    }

    #[test]
    fn stats_invariants_hold() {
        let x = generate(&SyntheticSpec::new(Distribution::Laplace { scale: 2.0 }, 777, 3)).unwrap();
        let s = x.stats();
        assert!(s.energy >= s.count as f64 * s.mean * s.mean);
        assert!(s.mean_abs >= s.mean.abs());
    }

    #[test]
    fn stats_merge_law() {
        let a = generate(&SyntheticSpec::new(Distribution::StandardNormal, 333, 1)).unwrap();
        let b = generate(&SyntheticSpec::new(Distribution::Uniform { low: -1.0, high: 4.0 }, 91, 2)).unwrap();
        let mut joined = a.as_slice().to_vec();
        joined.extend_from_slice(b.as_slice());
        let whole = EmpiricalStats::of(&joined);
        let merged = a.stats().merge(&b.stats());
        assert_eq!(merged.count, whole.count);
        for (got, want) in [
            (merged.mean, whole.mean),
            (merged.mean_abs, whole.mean_abs),
            (merged.energy, whole.energy),
        ] {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}
