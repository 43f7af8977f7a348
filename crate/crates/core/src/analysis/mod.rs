//! Quantization error analysis on synthetic data.
//!
//! The angle between `x` and its quantization `x^q` is the accuracy measure
//! used throughout. For sign quantization of i.i.d. standard normal data the
//! cosine tends to `sqrt(2/pi)`, an angle of about 37.07 degrees.

mod curve;
mod report;

pub use curve::{condition_curve, curve_to_csv, ConditionCurve, CurveSource, Intersection, ANALYTIC_NORMAL_MAX};
pub use report::{emit_report, report_to_csv, report_to_json, ReportFormat, CSV_HEADER};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantizers::{mse, quantize, Method, Reconstruct};
use crate::tensor::{generate, pairwise_sum_by, FloatVector, SyntheticSpec};

/// An angle in degrees, in `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleMetric {
    pub degrees: f64,
}

/// `arccos(<x, xq> / (|x| |xq|))` in degrees.
pub fn angle(x: &[f64], xq: &[f64]) -> Result<AngleMetric> {
    if x.len() != xq.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: xq.len() });
    }
    let n = x.len();
    let nx = pairwise_sum_by(n, |i| x[i] * x[i]);
    let nq = pairwise_sum_by(n, |i| xq[i] * xq[i]);
    if nx == 0.0 || nq == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let d = pairwise_sum_by(n, |i| x[i] * xq[i]);
    let cos = (d / (nx.sqrt() * nq.sqrt())).clamp(-1.0, 1.0);
    Ok(AngleMetric { degrees: cos.acos().to_degrees() })
}

/// A quantizer and its bit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct QuantizerChoice {
    pub method: Method,
    pub k: usize,
}

/// Pairs each method with bit counts: fixed-width methods get their own
/// width once; greedy and Lloyd get one entry per element of `ks`.
pub fn expand_choices(methods: &[Method], ks: &[usize]) -> Vec<QuantizerChoice> {
    let mut out = Vec::new();
    for &method in methods {
        match method.fixed_bits() {
            Some(k) => out.push(QuantizerChoice { method, k }),
            None => out.extend(ks.iter().map(|&k| QuantizerChoice { method, k })),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub distribution: String,
    pub n: usize,
    pub seed: u64,
    pub mse: f64,
    /// Absent when either vector has zero norm.
    pub angle_degrees: Option<f64>,
    /// Scaled levels, or the codebook for Lloyd.
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub method: Method,
    pub k: usize,
    pub distribution: String,
    pub n: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepReport {
    /// Sorted by method, k, distribution, n, seed.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// Quantizes one vector and measures it.
pub fn evaluate(x: &FloatVector, choice: QuantizerChoice) -> Result<(f64, Option<f64>, Vec<f64>)> {
    let q = quantize(x, choice.method, choice.k)?;
    let xq = q.reconstruct(x)?;
    let err = mse(x.as_slice(), xq.as_slice())?;
    let ang = match angle(x.as_slice(), xq.as_slice()) {
        Ok(a) => Some(a.degrees),
        Err(Error::ZeroNorm) => None,
        Err(e) => return Err(e),
    };
    Ok((err, ang, q.levels().to_vec()))
}

/// One row per `(spec, method, k)`, see [`expand_choices`]. Failures are
/// collected per row and do not stop the sweep.
pub fn run_sweep(specs: &[SyntheticSpec], methods: &[Method], ks: &[usize]) -> Result<SweepReport> {
    run_sweep_choices(specs, &expand_choices(methods, ks))
}

pub fn run_sweep_choices(specs: &[SyntheticSpec], choices: &[QuantizerChoice]) -> Result<SweepReport> {
    if specs.is_empty() || choices.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one spec and one method".into()));
    }
    let outcomes: Vec<std::result::Result<SweepRow, SweepFailure>> = specs
        .par_iter()
        .flat_map_iter(|spec| {
            let data = generate(spec);
            choices.iter().map(move |&choice| {
                let distribution = spec.distribution.to_string();
                let measured = data.as_ref().map_err(|e| e.to_string()).and_then(|x| {
                    evaluate(x, choice).map_err(|e| e.to_string())
                });
                match measured {
                    Ok((mse, angle_degrees, levels)) => Ok(SweepRow {
                        method: choice.method,
                        k: choice.k,
                        distribution,
                        n: spec.len,
                        seed: spec.seed,
                        mse,
                        angle_degrees,
                        levels,
                    }),
                    Err(message) => Err(SweepFailure {
                        method: choice.method,
                        k: choice.k,
                        distribution,
                        n: spec.len,
                        seed: spec.seed,
                        message,
                    }),
                }
            })
        })
        .collect();

    let mut report = SweepReport::default();
    for o in outcomes {
        match o {
            Ok(row) => report.rows.push(row),
            Err(f) => report.failures.push(f),
        }
    }
    report.rows.sort_by(|a, b| {
        (a.method, a.k, &a.distribution, a.n, a.seed).cmp(&(b.method, b.k, &b.distribution, b.n, b.seed))
    });
    report.failures.sort_by(|a, b| {
        (a.method, a.k, &a.distribution, a.n, a.seed).cmp(&(b.method, b.k, &b.distribution, b.n, b.seed))
    });
    Ok(report)
}

/// Across-seed summary of one `(method, k, distribution, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub method: Method,
    pub k: usize,
    pub distribution: String,
    pub n: usize,
    pub replicates: usize,
    pub mean_mse: f64,
    pub mean_angle_degrees: Option<f64>,
    /// Half-width of the normal-approximation 95% interval of the mean angle.
    pub angle_ci95: Option<f64>,
    /// Greedy rows whose levels are not non-increasing in generation order.
    pub level_order_violations: usize,
}

pub fn summarize(report: &SweepReport) -> Vec<SweepSummary> {
    let mut out: Vec<SweepSummary> = Vec::new();
    for group in report
        .rows
        .chunk_by(|a, b| (a.method, a.k, &a.distribution, a.n) == (b.method, b.k, &b.distribution, b.n))
    {
        let r = group.len();
        let mean_mse = group.iter().map(|row| row.mse).sum::<f64>() / r as f64;
        let angles: Vec<f64> = group.iter().filter_map(|row| row.angle_degrees).collect();
        let (mean_angle, ci) = if angles.is_empty() {
            (None, None)
        } else {
            let m = angles.iter().sum::<f64>() / angles.len() as f64;
            let ci = if angles.len() > 1 {
                let var = angles.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (angles.len() - 1) as f64;
                Some(1.96 * (var / angles.len() as f64).sqrt())
            } else {
                None
            };
            (Some(m), ci)
        };
        let first = &group[0];
        let level_order_violations = if first.method == Method::Greedy {
            group.iter().filter(|row| row.levels.windows(2).any(|w| w[1] > w[0])).count()
        } else {
            0
        };
        out.push(SweepSummary {
            method: first.method,
            k: first.k,
            distribution: first.distribution.clone(),
            n: first.n,
            replicates: r,
            mean_mse,
            mean_angle_degrees: mean_angle,
            angle_ci95: ci,
            level_order_violations,
        });
    }
    out
}
