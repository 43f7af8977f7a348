use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use super::{quantized_dot, quantized_matmul, PackedQuantizedVector};
use crate::error::{Error, Result};
use crate::quantizers::quantize_greedy;
use crate::tensor::{generate, generate_matrix, Distribution, FloatVector, SyntheticSpec};

/// Relative deviation above which [`gemm_check`] reports failure.
pub const GEMM_CHECK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub ka: usize,
    pub kw: usize,
    pub packed_ns_per_op: f64,
    pub float_ns_per_op: f64,
    pub speedup: f64,
    /// Number of plane pairs per packed dot, `ka * kw`.
    pub cross_terms: usize,
}

fn check_bits(name: &str, k: usize) -> Result<()> {
    if (1..=8).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be in 1..=8, got {k}")))
    }
}

/// Times one packed dot product against a float dot of the reconstructions.
pub fn kernel_bench(n: usize, ka: usize, kw: usize, reps: usize) -> Result<BenchReport> {
    if n == 0 || !n.is_multiple_of(64) {
        return Err(Error::InvalidParameter(format!("n must be a positive multiple of 64, got {n}")));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    check_bits("ka", ka)?;
    check_bits("kw", kw)?;

    let x = generate(&SyntheticSpec::new(Distribution::StandardNormal, n, 1))?;
    let w = generate(&SyntheticSpec::new(Distribution::StandardNormal, n, 2))?;
    let xq = quantize_greedy(&x, ka)?.into_packed();
    let wq = quantize_greedy(&w, kw)?.into_packed();
    let xf = xq.reconstruct();
    let wf = wq.reconstruct();

    let start = Instant::now();
    let mut sink = 0.0;
    for _ in 0..reps {
        sink += quantized_dot(black_box(&xq), black_box(&wq))?.value;
    }
    let packed = start.elapsed().as_nanos() as f64 / reps as f64;
    black_box(sink);

    let start = Instant::now();
    let mut sink = 0.0;
    for _ in 0..reps {
        let a = black_box(&xf);
        let b = black_box(&wf);
        sink += a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    }
    let float = start.elapsed().as_nanos() as f64 / reps as f64;
    black_box(sink);

    Ok(BenchReport {
        n,
        ka,
        kw,
        packed_ns_per_op: packed,
        float_ns_per_op: float,
        speedup: if packed > 0.0 { float / packed } else { f64::INFINITY },
        cross_terms: ka * kw,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GemmCheckReport {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub ka: usize,
    pub kw: usize,
    pub seed: u64,
    pub max_abs_deviation: f64,
    /// Largest absolute deviation divided by the largest reference magnitude.
    pub max_relative_deviation: f64,
    pub passed: bool,
}

/// Greedy-quantizes the rows of `a` and the columns of `b` with `ka` and
/// `kw` bits, and packs them for [`quantized_matmul`].
pub fn quantize_operands(
    a: &crate::tensor::FloatMatrix,
    b: &crate::tensor::FloatMatrix,
    ka: usize,
    kw: usize,
) -> Result<(Vec<PackedQuantizedVector>, Vec<PackedQuantizedVector>)> {
    let rows = (0..a.rows())
        .map(|i| Ok(quantize_greedy(&FloatVector::new(a.row(i).to_vec())?, ka)?.into_packed()))
        .collect::<Result<Vec<_>>>()?;
    let cols = (0..b.cols())
        .map(|j| Ok(quantize_greedy(&FloatVector::new(b.column(j))?, kw)?.into_packed()))
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, cols))
}

/// Runs the packed GEMM on seeded normal operands and compares it with a
/// dense float product of the reconstructed operands.
pub fn gemm_check(m: usize, n: usize, p: usize, ka: usize, kw: usize, seed: u64) -> Result<GemmCheckReport> {
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::InvalidParameter("dimensions must be positive".into()));
    }
    check_bits("ka", ka)?;
    check_bits("kw", kw)?;
    let a = generate_matrix(&Distribution::StandardNormal, m, n, seed)?;
    let b = generate_matrix(&Distribution::StandardNormal, n, p, seed.wrapping_add(1))?;
    let (rows, cols) = quantize_operands(&a, &b, ka, kw)?;
    let packed = quantized_matmul(&rows, &cols)?;

    let dense_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.reconstruct()).collect();
    let dense_cols: Vec<Vec<f64>> = cols.iter().map(|c| c.reconstruct()).collect();
    let mut max_abs = 0.0f64;
    let mut max_ref = 0.0f64;
    for (i, r) in dense_rows.iter().enumerate() {
        for (j, c) in dense_cols.iter().enumerate() {
            let reference: f64 = r.iter().zip(c).map(|(x, y)| x * y).sum();
            max_abs = max_abs.max((packed.get(i, j) - reference).abs());
            max_ref = max_ref.max(reference.abs());
        }
    }
    let rel = if max_ref > 0.0 { max_abs / max_ref } else { max_abs };
    Ok(GemmCheckReport {
        m,
        n,
        p,
        ka,
        kw,
        seed,
        max_abs_deviation: max_abs,
        max_relative_deviation: rel,
        passed: rel < GEMM_CHECK_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_reports_cross_term_count() {
        for (ka, kw, expected) in [(1, 1, 1), (2, 1, 2), (2, 2, 4)] {
            let r = kernel_bench(256, ka, kw, 3).unwrap();
            assert_eq!(r.cross_terms, expected);
            assert!(r.packed_ns_per_op >= 0.0 && r.float_ns_per_op >= 0.0);
        }
    }

    #[test]
    fn bench_rejects_bad_sizes() {
        assert!(kernel_bench(100, 1, 1, 1).is_err());
        assert!(kernel_bench(64, 0, 1, 1).is_err());
        assert!(kernel_bench(64, 1, 1, 0).is_err());
    }

    #[test]
    fn gemm_check_small() {
        let r = gemm_check(16, 64, 8, 1, 1, 5).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(gemm_check(0, 1, 1, 1, 1, 0).is_err());
        assert!(gemm_check(1, 1, 1, 9, 1, 0).is_err());
    }
}
