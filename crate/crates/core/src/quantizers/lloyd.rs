//! Lloyd–Max scalar quantizer with `2^k` free codewords.
//!
//! Two starts are run and the one ending with the lower error is kept, the
//! first on ties: codewords at the evenly spaced sample quantiles
//! `(j + 1/2) / 2^k`, and the `2^k` reconstruction values of the best
//! foldable quantizer with the same bit count (least-squares for `k <= 2`,
//! greedy above). Lloyd steps never increase the error, so the result is at
//! least as good as that foldable quantizer. Each iteration assigns every datum to its
//! nearest codeword (ties go to the lower one) and moves each codeword to the
//! mean of its cluster. An empty cluster is reseeded at the datum with the
//! largest quantization error. Iteration stops once the largest codeword
//! move is at most `tol` times the largest codeword magnitude, or after
//! `max_iters` rounds.
//!
//! When the input has at most `2^k` distinct values the codebook is exactly
//! those values and holds fewer than `2^k` entries.

use super::{quantize_greedy, quantize_ls1, quantize_ls2, Reconstruct};
use crate::error::{Error, Result};
use crate::tensor::{pairwise_mean, FloatVector};

pub const MAX_LLOYD_BITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydQuantizer {
    codebook: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl LloydQuantizer {
    /// Strictly increasing codewords.
    pub fn codebook(&self) -> &[f64] {
        &self.codebook
    }

    /// Midpoints between adjacent codewords.
    pub fn thresholds(&self) -> Vec<f64> {
        self.codebook.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Index of the nearest codeword.
    pub fn assign(&self, value: f64) -> usize {
        nearest(&self.codebook, value)
    }
}

impl Reconstruct for LloydQuantizer {
    fn reconstruct(&self, x: &FloatVector) -> Result<FloatVector> {
        FloatVector::new(x.as_slice().iter().map(|&v| self.codebook[self.assign(v)]).collect())
    }
}

fn nearest(codebook: &[f64], value: f64) -> usize {
    // Number of midpoints strictly below `value`.
    let mut lo = 0;
    let mut hi = codebook.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if 0.5 * (codebook[mid] + codebook[mid + 1]) < value {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn quantize_lloyd(x: &FloatVector, k: usize) -> Result<LloydQuantizer> {
    quantize_lloyd_with(x, k, LloydOptions::default())
}

pub fn quantize_lloyd_with(x: &FloatVector, k: usize, opts: LloydOptions) -> Result<LloydQuantizer> {
    if !(1..=MAX_LLOYD_BITS).contains(&k) {
        return Err(Error::InvalidParameter(format!("lloyd bits must be in 1..={MAX_LLOYD_BITS}, got {k}")));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::InvalidParameter("tol must be non-negative".into()));
    }
    let levels = 1usize << k;
    let mut sorted = x.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();

    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= levels {
        return Ok(LloydQuantizer { codebook: distinct, iterations: 0, converged: true });
    }

    let quantiles: Vec<f64> = (0..levels)
        .map(|j| sorted[(((2 * j + 1) * n) / (2 * levels)).min(n - 1)])
        .collect();
    let foldable = foldable_start(x, k)?;
    let a = iterate(&sorted, quantiles, levels, opts);
    let b = iterate(&sorted, foldable, levels, opts);
    Ok(if sq_error(&sorted, &b.codebook) < sq_error(&sorted, &a.codebook) { b } else { a })
}

/// Distinct reconstruction values of the best foldable `k`-bit quantizer.
fn foldable_start(x: &FloatVector, k: usize) -> Result<Vec<f64>> {
    let q = match k {
        1 => quantize_ls1(x),
        2 => quantize_ls2(x),
        _ => quantize_greedy(x, k)?,
    };
    let v = q.levels();
    let mut values: Vec<f64> = (0..1usize << k)
        .map(|mask| v.iter().enumerate().map(|(i, &l)| if mask >> i & 1 == 1 { l } else { -l }).sum())
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Sum of squared errors of nearest-codeword assignment.
fn sq_error(sorted: &[f64], codebook: &[f64]) -> f64 {
    crate::tensor::pairwise_sum_by(sorted.len(), |i| {
        let d = sorted[i] - codebook[nearest(codebook, sorted[i])];
        d * d
    })
}

fn iterate(sorted: &[f64], mut codebook: Vec<f64>, levels: usize, opts: LloydOptions) -> LloydQuantizer {
    let n = sorted.len();
    codebook.dedup();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        while codebook.len() < levels {
            reseed(sorted, &mut codebook);
        }
        iterations += 1;

        // Clusters are contiguous runs of the sorted data.
        let mut next = Vec::with_capacity(levels);
        let mut start = 0;
        let mut emptied = false;
        for j in 0..levels {
            let end = if j + 1 == levels {
                n
            } else {
                let t = 0.5 * (codebook[j] + codebook[j + 1]);
                start + sorted[start..].partition_point(|&v| v <= t)
            };
            if end > start {
                next.push(pairwise_mean(&sorted[start..end]));
            } else {
                emptied = true;
            }
            start = end;
        }
        next.dedup();
        if emptied || next.len() < levels {
            codebook = next;
            continue;
        }
        let moved = codebook.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().map(|c| c.abs()).fold(0.0, f64::max);
        codebook = next;
        if moved <= opts.tol * scale {
            converged = true;
            break;
        }
    }
    while codebook.len() < levels {
        reseed(sorted, &mut codebook);
    }
    LloydQuantizer { codebook, iterations, converged }
}

/// Inserts a codeword at the datum farthest from its nearest codeword.
fn reseed(sorted: &[f64], codebook: &mut Vec<f64>) {
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (i, &v) in sorted.iter().enumerate() {
        let err = (v - codebook[nearest(codebook, v)]).abs();
        if err > worst.0 {
            worst = (err, i);
        }
    }
    let value = sorted[worst.1];
    let pos = codebook.partition_point(|&c| c < value);
    codebook.insert(pos, value);
}
