//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the solvers under test. Data generation does use
//! the crate's seeded generator, which is covered by its own tests.

#![allow(dead_code)]

use binquant::tensor::{generate, Distribution, SplitMix64, SyntheticSpec};
use binquant::FloatVector;

/// Population roots computed once with 30-digit quadrature and frozen.
pub mod frozen {
    /// 2-bit fixed point for the standard normal.
    pub const NORMAL_LS2_V1: f64 = 0.981_598_821_567_793_7;
    pub const NORMAL_LS2_V2: f64 = 0.528_818_786_931_301_7;
    /// Ternary fixed point for the standard normal.
    pub const NORMAL_TERNARY_V: f64 = 0.612_003_180_962_480_7;
    /// 2-bit fixed point for Laplace(1).
    pub const LAPLACE_LS2_V1: f64 = 1.593_624_260_040_04;
    pub const LAPLACE_LS2_V2: f64 = 1.0;
    /// Ternary fixed point for Laplace(1).
    pub const LAPLACE_TERNARY_V: f64 = 1.0;
    /// `arccos(sqrt(2/pi))` in degrees.
    pub const SIGN_ANGLE_DEGREES: f64 = 37.071_435_021_042_83;
    /// `max u / min u` of the leading left singular vector of `|X|` for the
    /// 1000x1000 normal matrix with seed 2024, as measured.
    pub const U_SPREAD_1000_SEED_2024: f64 = 1.184_953_411_328_742;
    /// Regression bound on that spread.
    pub const U_SPREAD_BOUND: f64 = 1.35;
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns the
/// eigenvalues in decreasing order with matching column eigenvectors.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let [rp, rq] = a.get_disjoint_mut([p, q]).unwrap();
                for (apk, aqk) in rp.iter_mut().zip(rq.iter_mut()) {
                    (*apk, *aqk) = (c * *apk - s * *aqk, s * *apk + c * *aqk);
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

/// `MᵀM` for a row-major `rows x cols` matrix.
pub fn gram(m: &[f64], rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            g[i][j] = (0..rows).map(|r| m[r * cols + i] * m[r * cols + j]).sum();
        }
    }
    g
}

/// Squared singular values of a matrix, decreasing.
pub fn singular_energies(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    jacobi_eigen(gram(m, rows, cols)).0.into_iter().map(|l| l.max(0.0)).collect()
}

/// Composite Simpson rule with `panels` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// A folded density on `[0, tail]`, normalized numerically.
pub struct Folded {
    pub density: fn(f64) -> f64,
    pub tail: f64,
}

pub const FOLDED_NORMAL: Folded = Folded { density: |x| (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * x * x).exp(), tail: 40.0 };
pub const FOLDED_LAPLACE: Folded = Folded { density: |x| (-x).exp(), tail: 60.0 };

impl Folded {
    fn moment(&self, k: i32, a: f64, b: f64) -> f64 {
        let d = self.density;
        simpson(|x| x.powi(k) * d(x), a, b, 20_000)
    }

    pub fn lower_mean(&self, t: f64) -> f64 {
        self.moment(1, 0.0, t) / self.moment(0, 0.0, t)
    }

    pub fn upper_mean(&self, t: f64) -> f64 {
        self.moment(1, t, self.tail) / self.moment(0, t, self.tail)
    }

    /// Root of `(L(t) + U(t)) / 2 = t`, bracketed in `[lo, hi]`.
    pub fn ls2_root(&self, lo: f64, hi: f64) -> (f64, f64) {
        let t = bisect(lo, hi, |t| 0.5 * (self.lower_mean(t) + self.upper_mean(t)) - t);
        (t, 0.5 * (self.upper_mean(t) - self.lower_mean(t)))
    }

    /// Root of `U(v) / 2 = v`.
    pub fn ternary_root(&self, lo: f64, hi: f64) -> f64 {
        bisect(lo, hi, |v| 0.5 * self.upper_mean(v) - v)
    }
}

pub fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    let glo = g(lo);
    assert!(glo * g(hi) < 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// MSE of the foldable quantization with the given levels.
pub fn fold_mse(x: &[f64], levels: &[f64]) -> f64 {
    x.iter()
        .map(|&xi| {
            let mut r = xi;
            for &v in levels {
                r -= v * sgn(r);
            }
            r * r
        })
        .sum::<f64>()
        / x.len() as f64
}

/// Best foldable 2-bit MSE over every cut of the sorted magnitudes, each
/// cut taking its two group means as reconstruction magnitudes.
pub fn exhaustive_ls2_mse(x: &[f64]) -> f64 {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let mut best = f64::INFINITY;
    for c in 0..=n {
        let levels = if c == 0 || c == n {
            vec![a.iter().sum::<f64>() / n as f64, 0.0]
        } else {
            let l = a[..c].iter().sum::<f64>() / c as f64;
            let u = a[c..].iter().sum::<f64>() / (n - c) as f64;
            vec![(l + u) / 2.0, (u - l) / 2.0]
        };
        best = best.min(fold_mse(x, &levels));
    }
    best
}

/// Best ternary MSE on an evenly spaced grid of `points` values in `[0, max|x|]`.
pub fn ternary_grid_mse(x: &[f64], points: usize) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..points)
        .map(|i| {
            let v = max * i as f64 / (points - 1) as f64;
            fold_mse(x, &[v, v])
        })
        .fold(f64::INFINITY, f64::min)
}

/// `±1` dot product by direct summation.
pub fn sign_dot(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&p, &q)| i64::from(p) * i64::from(q)).sum()
}

/// Least rank-1 residual `‖X - σuvᵀ ⊙ S‖²` over all `2^(rows*cols)` sign
/// matrices `S`, and the residual at `S = sign(X)`.
pub fn sign_enumeration(x: &[f64], rows: usize, cols: usize) -> (f64, f64) {
    let total: f64 = x.iter().map(|v| v * v).sum();
    let cells = rows * cols;
    let residual = |mask: u32| {
        let y: Vec<f64> = (0..cells).map(|k| if mask >> k & 1 == 1 { x[k] } else { -x[k] }).collect();
        total - singular_energies(&y, rows, cols)[0]
    };
    let sign_mask = (0..cells).fold(0u32, |m, k| if x[k] >= 0.0 { m | 1 << k } else { m });
    let best = (0..1u32 << cells).map(residual).fold(f64::INFINITY, f64::min);
    (best, residual(sign_mask))
}

/// A mixed battery of distributions for randomized checks.
pub const BATTERY: [Distribution; 5] = [
    Distribution::StandardNormal,
    Distribution::Laplace { scale: 1.0 },
    Distribution::Uniform { low: -1.0, high: 1.0 },
    Distribution::Uniform { low: 0.0, high: 3.0 },
    Distribution::SignedLogNormal { mu: 0.0, sigma: 1.5 },
];

/// The `i`-th random vector of a reproducible stream: distribution cycles
/// through [`BATTERY`], length is uniform in `1..=max_len`.
pub fn random_vector(stream: u64, i: u64, max_len: usize) -> FloatVector {
    let mut sm = SplitMix64::new(stream.wrapping_mul(0x9e37_79b9).wrapping_add(i));
    let len = 1 + (sm.next_u64() % max_len as u64) as usize;
    let dist = BATTERY[(i % BATTERY.len() as u64) as usize];
    generate(&SyntheticSpec::new(dist, len, sm.next_u64())).unwrap()
}

pub mod strategies {
    use super::BATTERY;
    use binquant::tensor::{generate, SyntheticSpec};
    use proptest::prelude::*;

    /// Continuous values; exact ties and zeros are improbable.
    pub fn continuous(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop_oneof![
            prop::collection::vec(-50.0..50.0f64, 1..=max_len),
            (any::<u64>(), 0..BATTERY.len(), 1..=max_len).prop_map(|(seed, d, n)| {
                generate(&SyntheticSpec::new(BATTERY[d], n, seed)).unwrap().into_vec()
            }),
        ]
    }

    /// Continuous values mixed with small integers, which bring ties and zeros.
    pub fn any_vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop_oneof![
            3 => continuous(max_len),
            1 => prop::collection::vec((-4i32..=4).prop_map(f64::from), 1..=max_len),
        ]
    }
}
