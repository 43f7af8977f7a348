//! Rank-1 binary quantization of matrices.
//!
//! `X ~ X1 ⊙ S` with `X1` rank one and `S` a sign matrix is minimized in
//! Frobenius norm by `S = sign(X)` and `X1 = σ u vᵀ`, the leading singular
//! triple of `|X|`. The squared residual is then `‖X‖²_F - σ²`.
//!
//! Singular values are found by power iteration on `|X|ᵀ|X|`, applied as two
//! matrix-vector products so the Gram matrix is never formed. Because `|X|`
//! is entrywise nonnegative, the starting vector `|X|ᵀ 1` (the sum of the
//! rows) is nonnegative and cannot be orthogonal to the Perron vector.

use crate::error::{Error, Result};
use crate::quantizers::sign;
use crate::tensor::{pairwise_sum_by, FloatMatrix, Xoshiro256StarStar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Stop when the Rayleigh quotient changes by less than this, relatively.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 10_000 }
    }
}

/// `σ u vᵀ ⊙ S`, with `S` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Factorization {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub signs: Vec<i8>,
    rows: usize,
    cols: usize,
    /// Power iterations used; zero for closed-form factors.
    pub iterations: usize,
}

impl Rank1Factorization {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sigma * self.u[i] * self.v[j] * self.signs[i * self.cols + j] as f64
    }

    pub fn approximation(&self) -> FloatMatrix {
        let data = (0..self.rows * self.cols).map(|k| self.entry(k / self.cols, k % self.cols)).collect();
        FloatMatrix::new(self.rows, self.cols, data).expect("finite factors")
    }

    /// `‖X - σ u vᵀ ⊙ S‖²_F`.
    pub fn residual_sq(&self, x: &FloatMatrix) -> Result<f64> {
        if x.rows() != self.rows || x.cols() != self.cols {
            return Err(Error::LengthMismatch { expected: self.rows * self.cols, actual: x.rows() * x.cols() });
        }
        let data = x.as_slice();
        Ok(pairwise_sum_by(data.len(), |k| {
            let d = data[k] - self.entry(k / self.cols, k % self.cols);
            d * d
        }))
    }
}

/// Leading singular energies of `|X|`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EnergyProfile {
    /// `σ_i²(|X|)`, nonincreasing.
    pub singular_energies: Vec<f64>,
    /// `‖X‖²_F`.
    pub total: f64,
    /// `σ_1² / total`, zero for the zero matrix.
    pub ratio_1: f64,
    /// `total - Σ singular_energies`.
    pub remainder: f64,
}

/// Entrywise absolute value as a dense row-major operator.
struct AbsOperator<'a> {
    x: &'a FloatMatrix,
}

impl AbsOperator<'_> {
    /// `|X| v`.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.x.rows())
            .map(|i| self.x.row(i).iter().zip(v).map(|(a, b)| a.abs() * b).sum())
            .collect()
    }

    /// `|X|ᵀ w`.
    fn apply_t(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.x.cols()];
        for (i, wi) in w.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.x.row(i)) {
                *o += a.abs() * wi;
            }
        }
        out
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

fn unit(len: usize, at: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[at] = 1.0;
    e
}

/// Removes the components along each (orthonormal) vector in `basis`.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of classical Gram–Schmidt.
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(a, bi)| *a -= c * bi);
        }
    }
}

/// Dominant eigenpair of `|X|ᵀ|X|` restricted to the complement of `found`.
/// Returns `(λ, v, iterations)`.
fn power_iterate(
    op: &AbsOperator<'_>,
    mut v: Vec<f64>,
    found: &[Vec<f64>],
    floor: f64,
    opts: PowerOptions,
) -> Result<(f64, Vec<f64>, usize)> {
    orthogonalize(&mut v, found);
    if normalize(&mut v) == 0.0 {
        return Ok((0.0, v, 0));
    }
    let mut lambda_prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        let w = op.apply(&v);
        let lambda = dot(&w, &w);
        let mut next = op.apply_t(&w);
        orthogonalize(&mut next, found);
        if let Some(prev) = lambda_prev {
            last_change = (lambda - prev).abs() / lambda.max(floor);
            if last_change < opts.tol {
                return Ok((lambda, v, iter));
            }
        }
        if normalize(&mut next) == 0.0 {
            // v lies in the null space of the deflated operator.
            return Ok((lambda, v, iter));
        }
        v = next;
        lambda_prev = Some(lambda);
    }
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        last_change,
        best_estimate: lambda_prev.unwrap_or(0.0),
    })
}

fn row_sum_start(op: &AbsOperator<'_>) -> Vec<f64> {
    op.apply_t(&vec![1.0; op.x.rows()])
}

/// Optimal rank-1 binary quantization of `x`.
pub fn rank1_binary(x: &FloatMatrix, opts: PowerOptions) -> Result<Rank1Factorization> {
    let (m, n) = (x.rows(), x.cols());
    let signs: Vec<i8> = x.as_slice().iter().map(|&a| sign(a)).collect();
    let op = AbsOperator { x };
    let start = row_sum_start(&op);
    if start.iter().all(|&a| a == 0.0) {
        return Ok(Rank1Factorization { sigma: 0.0, u: unit(m, 0), v: unit(n, 0), signs, rows: m, cols: n, iterations: 0 });
    }
    let floor = f64::MIN_POSITIVE;
    let (_, v, iterations) = power_iterate(&op, start, &[], floor, opts)?;
    let mut u = op.apply(&v);
    let sigma = normalize(&mut u);
    Ok(Rank1Factorization { sigma, u, v, signs, rows: m, cols: n, iterations })
}

/// Leading `top_r` singular energies of `|X|` by power iteration with
/// deflation: the `r`-th pass iterates on `|X|ᵀ|X|` restricted to the
/// orthogonal complement of the previously found right singular vectors.
pub fn energy_profile(x: &FloatMatrix, top_r: usize, opts: PowerOptions) -> Result<EnergyProfile> {
    let (m, n) = (x.rows(), x.cols());
    if top_r == 0 || top_r > m.min(n) {
        return Err(Error::InvalidParameter(format!("top_r must be in 1..={}, got {top_r}", m.min(n))));
    }
    let total = x.frobenius_sq();
    let op = AbsOperator { x };
    let floor = f64::EPSILON * total;
    let mut rng = Xoshiro256StarStar::seed_from_u64(0x5eed);
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(top_r);
    let mut energies = Vec::with_capacity(top_r);

    for r in 0..top_r {
        let start = if r == 0 {
            row_sum_start(&op)
        } else {
            (0..n).map(|_| rng.next_f64() - 0.5).collect()
        };
        let (lambda, v, _) = if total == 0.0 {
            (0.0, start, 0)
        } else {
            power_iterate(&op, start, &found, floor, opts)?
        };
        energies.push(lambda);
        let mut v = v;
        orthogonalize(&mut v, &found);
        if normalize(&mut v) == 0.0 || total == 0.0 {
            // Fill the basis with any direction orthogonal to it.
            v = (0..n)
                .map(|j| {
                    let mut e = unit(n, j);
                    orthogonalize(&mut e, &found);
                    e
                })
                .max_by(|a, b| norm(a).total_cmp(&norm(b)))
                .unwrap();
            normalize(&mut v);
        }
        found.push(v);
    }
    let partial: f64 = energies.iter().sum();
    Ok(EnergyProfile {
        ratio_1: if total > 0.0 { (energies[0] / total).min(1.0) } else { 0.0 },
        remainder: total - partial,
        singular_energies: energies,
        total,
    })
}

/// Channel-mean scaling baseline: `a 1ᵀ ⊙ sign(X)` with `a_i` the mean of
/// `|X_ij|` over row `i`, expressed as a rank-1 factorization.
pub fn channel_mean_rank1(x: &FloatMatrix) -> Rank1Factorization {
    let (m, n) = (x.rows(), x.cols());
    let signs: Vec<i8> = x.as_slice().iter().map(|&a| sign(a)).collect();
    let mut a: Vec<f64> = (0..m)
        .map(|i| pairwise_sum_by(n, |j| x.get(i, j).abs()) / n as f64)
        .collect();
    let norm_a = normalize(&mut a);
    let v = vec![1.0 / (n as f64).sqrt(); n];
    if norm_a == 0.0 {
        return Rank1Factorization { sigma: 0.0, u: unit(m, 0), v, signs, rows: m, cols: n, iterations: 0 };
    }
    Rank1Factorization { sigma: norm_a * (n as f64).sqrt(), u: a, v, signs, rows: m, cols: n, iterations: 0 }
}
