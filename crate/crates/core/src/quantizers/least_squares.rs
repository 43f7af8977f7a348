//! Least-squares 1-bit, 2-bit and ternary quantizers.
//!
//! The 2-bit and ternary solvers sort `|x|` once and scan every cut of the
//! sorted magnitudes. A cut `c` splits them into a lower group `a[..c]`
//! (magnitudes `<= v_1`) and an upper group `a[c..]`. With `L` and `U` the
//! group means, the 2-bit stationarity conditions read
//!
//! ```text
//! v_1 = (L + U) / 2,   v_2 = (U - L) / 2
//! ```
//!
//! and the ternary one `v = U / 2`. A cut is a root when the `v_1` it yields
//! induces that same split, i.e. `a[c-1] <= v_1 < a[c]`. Each root is scored
//! with prefix sums in O(1); the global minimum over all roots (plus the
//! `v_2 = 0` and `v_1 = v_2` boundaries for 2 bits) is returned, breaking
//! exact ties toward the smaller `v_1`. Total cost is O(N log N).
//!
//! Means of the empty lower group are taken to be zero. Cuts with an empty
//! upper group are skipped.

use super::{Method, ScaledBinaryQuantization};
use crate::tensor::{pairwise_mean, FloatVector};

/// `v = mean(|x|)`, `s = sign(x)`.
pub fn quantize_ls1(x: &FloatVector) -> ScaledBinaryQuantization {
    let v = x.stats().mean_abs;
    ScaledBinaryQuantization::from_levels(Method::Ls1, x.as_slice(), vec![v])
}

/// Sorted magnitudes with prefix sums of values and squares.
pub(crate) struct SortedMagnitudes {
    mags: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl SortedMagnitudes {
    pub(crate) fn new(x: &[f64]) -> Self {
        let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let mut sum = Vec::with_capacity(mags.len() + 1);
        let mut sum_sq = Vec::with_capacity(mags.len() + 1);
        let (mut s, mut s2) = (0.0, 0.0);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &a in &mags {
            s += a;
            s2 += a * a;
            sum.push(s);
            sum_sq.push(s2);
        }
        Self { mags, sum, sum_sq }
    }

    pub(crate) fn len(&self) -> usize {
        self.mags.len()
    }

    pub(crate) fn max(&self) -> f64 {
        *self.mags.last().unwrap()
    }

    /// Mean of `a[..c]`, zero when empty.
    pub(crate) fn lower_mean(&self, c: usize) -> f64 {
        if c == 0 {
            0.0
        } else {
            self.sum[c] / c as f64
        }
    }

    /// Mean of `a[c..]`; requires `c < n`.
    pub(crate) fn upper_mean(&self, c: usize) -> f64 {
        let n = self.len();
        (self.sum[n] - self.sum[c]) / (n - c) as f64
    }

    /// Sum of squared deviations of `a[lo..hi]` from `center`.
    pub(crate) fn sq_dev(&self, lo: usize, hi: usize, center: f64) -> f64 {
        let s = self.sum[hi] - self.sum[lo];
        let s2 = self.sum_sq[hi] - self.sum_sq[lo];
        (s2 - 2.0 * center * s + (hi - lo) as f64 * center * center).max(0.0)
    }

    /// Number of magnitudes `<= v`.
    pub(crate) fn count_at_most(&self, v: f64) -> usize {
        self.mags.partition_point(|&a| a <= v)
    }

    /// Whether `threshold` splits the sorted magnitudes exactly at `c` under
    /// the "lower group is `<= threshold`" convention.
    pub(crate) fn splits_at(&self, c: usize, threshold: f64, slack: f64) -> bool {
        (c == 0 || self.mags[c - 1] <= threshold + slack) && threshold < self.mags[c] + slack
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    v1: f64,
    kind: CandidateKind,
}

#[derive(Debug, Clone, Copy)]
enum CandidateKind {
    Cut(usize),
    OneBit,
    Ternary(usize),
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.cost < b.cost || (a.cost == b.cost && a.v1 < b.v1)
}

fn pick(candidates: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    candidates.into_iter().fold(None, |best, c| match best {
        Some(b) if !better(&c, &b) => Some(b),
        _ => Some(c),
    })
}

/// Ternary root search. Returns the winning cut and its squared error.
fn ternary_cut(sm: &SortedMagnitudes) -> (usize, f64) {
    let n = sm.len();
    let score = |c: usize| {
        let u = sm.upper_mean(c);
        Candidate {
            cost: sm.sq_dev(0, c, 0.0) + sm.sq_dev(c, n, u),
            v1: u / 2.0,
            kind: CandidateKind::Ternary(c),
        }
    };
    let roots = (0..n).filter(|&c| sm.splits_at(c, sm.upper_mean(c) / 2.0, 0.0)).map(score);
    let best = pick(roots).or_else(|| pick((0..n).map(score))).expect("n >= 1");
    match best.kind {
        CandidateKind::Ternary(c) => (c, best.cost),
        _ => unreachable!(),
    }
}

fn ternary_level(sm: &SortedMagnitudes, c: usize) -> f64 {
    pairwise_mean(&sm.mags[c..]) / 2.0
}

/// A root of the 2-bit stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ConditionRoot {
    pub v1: f64,
    pub v2: f64,
    /// Squared error summed over all entries.
    pub cost: f64,
}

fn roots_of(sm: &SortedMagnitudes, slack: f64) -> impl Iterator<Item = Candidate> + '_ {
    let n = sm.len();
    (0..n)
        .filter(move |&c| sm.splits_at(c, (sm.lower_mean(c) + sm.upper_mean(c)) / 2.0, slack))
        .map(move |c| {
            let (l, u) = (sm.lower_mean(c), sm.upper_mean(c));
            Candidate {
                cost: sm.sq_dev(0, c, l) + sm.sq_dev(c, n, u),
                v1: (l + u) / 2.0,
                kind: CandidateKind::Cut(c),
            }
        })
}

fn cut_levels(sm: &SortedMagnitudes, c: usize) -> (f64, f64) {
    let l = pairwise_mean(&sm.mags[..c]);
    let u = pairwise_mean(&sm.mags[c..]);
    ((l + u) / 2.0, (u - l) / 2.0)
}

/// Every interior root in increasing `v_1`, tested without slack; empty for
/// all-zero input.
pub(crate) fn condition_roots(sm: &SortedMagnitudes) -> Vec<ConditionRoot> {
    if sm.max() == 0.0 {
        return Vec::new();
    }
    roots_of(sm, 0.0)
        .map(|cand| match cand.kind {
            CandidateKind::Cut(c) => {
                let (v1, v2) = cut_levels(sm, c);
                ConditionRoot { v1, v2, cost: cand.cost }
            }
            _ => unreachable!(),
        })
        .collect()
}

/// Least-squares 2-bit quantization. Levels satisfy `v_1 >= v_2 >= 0`.
pub fn quantize_ls2(x: &FloatVector) -> ScaledBinaryQuantization {
    let data = x.as_slice();
    let sm = SortedMagnitudes::new(data);
    let n = sm.len();
    if sm.max() == 0.0 {
        return ScaledBinaryQuantization::from_levels(Method::Ls2, data, vec![0.0, 0.0]);
    }
    let roots = roots_of(&sm, 1e-12 * sm.max());

    let mean = sm.sum[n] / n as f64;
    let one_bit = Candidate { cost: sm.sq_dev(0, n, mean), v1: mean, kind: CandidateKind::OneBit };
    let (tc, tcost) = ternary_cut(&sm);
    let ternary = Candidate {
        cost: tcost,
        v1: sm.upper_mean(tc) / 2.0,
        kind: CandidateKind::Ternary(tc),
    };

    let best = pick(roots.chain([one_bit, ternary])).expect("boundary candidates always present");
    let levels = match best.kind {
        CandidateKind::Cut(c) => {
            let (v1, v2) = cut_levels(&sm, c);
            vec![v1, v2]
        }
        CandidateKind::OneBit => vec![x.stats().mean_abs, 0.0],
        CandidateKind::Ternary(c) => {
            let v = ternary_level(&sm, c);
            vec![v, v]
        }
    };
    ScaledBinaryQuantization::from_levels(Method::Ls2, data, levels)
}

/// Least-squares ternary quantization: `v_1 = v_2 = v` with
/// `v = mean(|x_i| : |x_i| > v) / 2`, so values map to `{-2v, 0, 2v}`.
pub fn quantize_ternary(x: &FloatVector) -> ScaledBinaryQuantization {
    let data = x.as_slice();
    let sm = SortedMagnitudes::new(data);
    if sm.max() == 0.0 {
        return ScaledBinaryQuantization::from_levels(Method::Ternary, data, vec![0.0, 0.0]);
    }
    let (c, _) = ternary_cut(&sm);
    let v = ternary_level(&sm, c);
    ScaledBinaryQuantization::from_levels(Method::Ternary, data, vec![v, v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizers::{objective, Reconstruct};

    fn fv(v: &[f64]) -> FloatVector {
        FloatVector::new(v.to_vec()).unwrap()
    }

    fn mse_of(x: &FloatVector, q: &ScaledBinaryQuantization) -> f64 {
        objective(x, q).unwrap().mse
    }

    #[test]
    fn ls1_examples() {
        let x = fv(&[1.0, -2.0, 3.0, -4.0]);
        let q = quantize_ls1(&x);
        assert_eq!(q.levels(), &[2.5]);
        assert_eq!(q.planes()[0].unpack(), vec![1, -1, 1, -1]);
        assert_eq!(q.method(), Method::Ls1);

        let c = fv(&[0.7; 9]);
        assert_eq!(mse_of(&c, &quantize_ls1(&c)), 0.0);
    }

    #[test]
    fn ls2_two_magnitudes() {
        for data in [[1.0, 1.0, 3.0, 3.0], [-3.0, -1.0, 1.0, 3.0]] {
            let x = fv(&data);
            let q = quantize_ls2(&x);
            assert_eq!(q.levels(), &[2.0, 1.0]);
            assert_eq!(mse_of(&x, &q), 0.0);
            assert_eq!(q.reconstruct(&x).unwrap().as_slice(), &data);
        }
    }

    #[test]
    fn ls2_constant_magnitude_is_exact() {
        let x = fv(&[2.0, -2.0, 2.0]);
        let q = quantize_ls2(&x);
        assert_eq!(mse_of(&x, &q), 0.0);
        assert!(q.levels()[0] >= q.levels()[1]);
    }

    #[test]
    fn ternary_examples() {
        let x = fv(&[0.0, 0.0, 2.0, -2.0]);
        let q = quantize_ternary(&x);
        assert_eq!(q.levels(), &[1.0, 1.0]);
        assert_eq!(q.reconstruction().as_slice(), &[0.0, 0.0, 2.0, -2.0]);

        let x = fv(&[3.0, -3.0]);
        let q = quantize_ternary(&x);
        assert_eq!(q.levels(), &[1.5, 1.5]);
        assert_eq!(q.reconstruction().as_slice(), &[3.0, -3.0]);
    }

    #[test]
    fn all_zero_input() {
        let x = fv(&[0.0; 5]);
        for q in [quantize_ls1(&x), quantize_ls2(&x), quantize_ternary(&x)] {
            assert!(q.levels().iter().all(|&v| v == 0.0));
            assert!(q.planes().iter().all(|p| p.count_positive() == 5));
            assert_eq!(mse_of(&x, &q), 0.0);
        }
    }

    #[test]
    fn single_element() {
        let x = fv(&[-4.0]);
        assert_eq!(mse_of(&x, &quantize_ls1(&x)), 0.0);
        assert_eq!(mse_of(&x, &quantize_ls2(&x)), 0.0);
        assert_eq!(mse_of(&x, &quantize_ternary(&x)), 0.0);
    }

    #[test]
    fn ls2_never_worse_than_boundaries() {
        let x = fv(&[0.1, -0.4, 2.5, 0.3, -7.0, 1.1, 0.0, 0.2]);
        let e2 = mse_of(&x, &quantize_ls2(&x));
        assert!(e2 <= mse_of(&x, &quantize_ls1(&x)));
        assert!(e2 <= mse_of(&x, &quantize_ternary(&x)));
    }
}
