//! Conditional-mean curves of `|x|` and their fixed points.
//!
//! For a threshold `v`, `lower(v) = E[|x| : |x| <= v]` and
//! `upper(v) = E[|x| : |x| > v]`. The 2-bit stationarity condition holds
//! where the average of the two crosses the identity line.

use std::fmt::Write as _;

use libm::{erf, erfc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantizers::least_squares::{condition_roots, SortedMagnitudes};
use crate::tensor::FloatVector;

/// Upper end of the default analytic grid.
pub const ANALYTIC_NORMAL_MAX: f64 = 4.0;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy)]
pub enum CurveSource<'a> {
    Empirical(&'a FloatVector),
    /// Standard normal data, with the grid spanning `(0, max)`.
    AnalyticNormal { max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intersection {
    pub v1: f64,
    pub v2: f64,
    /// Mean squared error of the 2-bit quantizer with these levels.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCurve {
    pub v: Vec<f64>,
    /// Zero where the lower group is empty.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub average: Vec<f64>,
    /// Increasing in `v1`.
    pub intersections: Vec<Intersection>,
    /// Least objective; ties go to the smaller `v1`.
    pub optimum: Option<Intersection>,
}

fn phi(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Half-normal partial moments over `[0, t]`: probability, first, second.
fn half_normal_lower(t: f64) -> (f64, f64, f64) {
    let p = erf(t / std::f64::consts::SQRT_2);
    let m1 = 2.0 * (FRAC_1_SQRT_2PI - phi(t));
    let m2 = p - 2.0 * t * phi(t);
    (p, m1, m2)
}

fn normal_means(v: f64) -> (f64, f64) {
    let (p, m1, _) = half_normal_lower(v);
    let lower = if p > 0.0 { m1 / p } else { 0.0 };
    let upper = 2.0 * phi(v) / erfc(v / std::f64::consts::SQRT_2);
    (lower, upper)
}

/// Exact 2-bit MSE on standard normal data with threshold `v1`.
fn normal_objective(v1: f64, v2: f64) -> f64 {
    let (p, m1, m2) = half_normal_lower(v1);
    let (pu, m1u, m2u) = (erfc(v1 / std::f64::consts::SQRT_2), 2.0 * phi(v1), 1.0 - m2);
    let (a, b) = (v1 - v2, v1 + v2);
    (m2 - 2.0 * a * m1 + a * a * p) + (m2u - 2.0 * b * m1u + b * b * pu)
}

fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn better(a: &Intersection, b: &Intersection) -> bool {
    a.objective < b.objective || (a.objective == b.objective && a.v1 < b.v1)
}

fn optimum_of(points: &[Intersection]) -> Option<Intersection> {
    points.iter().copied().fold(None, |best, p| match best {
        Some(b) if !better(&p, &b) => Some(b),
        _ => Some(p),
    })
}

/// Samples the curves at `max * i / (grid + 1)` for `i = 1..=grid`.
///
/// Empirical intersections are the exact roots found by the 2-bit solver.
/// Analytic ones are bracketed on the grid and refined by bisection.
pub fn condition_curve(source: CurveSource<'_>, grid: usize) -> Result<ConditionCurve> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!("grid must have at least 2 points, got {grid}")));
    }
    match source {
        CurveSource::Empirical(x) => empirical(x, grid),
        CurveSource::AnalyticNormal { max } => analytic(max, grid),
    }
}

fn grid_points(max: f64, grid: usize) -> Vec<f64> {
    (1..=grid).map(|i| max * i as f64 / (grid + 1) as f64).collect()
}

fn empirical(x: &FloatVector, grid: usize) -> Result<ConditionCurve> {
    let sm = SortedMagnitudes::new(x.as_slice());
    let max = sm.max();
    if max == 0.0 {
        return Err(Error::InvalidParameter("curve needs a nonzero magnitude".into()));
    }
    let v = grid_points(max, grid);
    let (mut lower, mut upper) = (Vec::with_capacity(grid), Vec::with_capacity(grid));
    for &t in &v {
        let c = sm.count_at_most(t);
        lower.push(sm.lower_mean(c));
        upper.push(sm.upper_mean(c));
    }
    let n = sm.len() as f64;
    let intersections: Vec<Intersection> = condition_roots(&sm)
        .into_iter()
        .map(|r| Intersection { v1: r.v1, v2: r.v2, objective: r.cost / n })
        .collect();
    Ok(assemble(v, lower, upper, intersections))
}

fn analytic(max: f64, grid: usize) -> Result<ConditionCurve> {
    if !(max.is_finite() && max > 0.0) {
        return Err(Error::InvalidParameter(format!("curve range must be positive, got {max}")));
    }
    let v = grid_points(max, grid);
    let (lower, upper): (Vec<f64>, Vec<f64>) = v.iter().map(|&t| normal_means(t)).unzip();
    let g = |t: f64| {
        let (l, u) = normal_means(t);
        0.5 * (l + u) - t
    };
    let gv: Vec<f64> = v.iter().zip(lower.iter().zip(&upper)).map(|(t, (l, u))| 0.5 * (l + u) - t).collect();
    let mut intersections = Vec::new();
    for i in 0..grid {
        let root = if gv[i] == 0.0 {
            Some(v[i])
        } else if i + 1 < grid && gv[i] > 0.0 && gv[i + 1] < 0.0 {
            Some(bisect(v[i], v[i + 1], g))
        } else {
            None
        };
        if let Some(v1) = root {
            let (l, u) = normal_means(v1);
            let v2 = 0.5 * (u - l);
            intersections.push(Intersection { v1, v2, objective: normal_objective(v1, v2) });
        }
    }
    Ok(assemble(v, lower, upper, intersections))
}

fn assemble(v: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, intersections: Vec<Intersection>) -> ConditionCurve {
    let average = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let optimum = optimum_of(&intersections);
    ConditionCurve { v, lower, upper, average, intersections, optimum }
}

fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// One `curve` row per grid point, then one `intersection` row per fixed
/// point and a final `optimum` row. Columns that do not apply are empty.
pub fn curve_to_csv(curve: &ConditionCurve) -> String {
    let mut out = String::from("kind,v,lower,upper,average,v2,objective\n");
    for i in 0..curve.v.len() {
        let _ = writeln!(
            out,
            "curve,{},{},{},{},,",
            cell(curve.v[i]),
            cell(curve.lower[i]),
            cell(curve.upper[i]),
            cell(curve.average[i])
        );
    }
    let tagged = curve.intersections.iter().map(|p| ("intersection", p)).chain(curve.optimum.iter().map(|p| ("optimum", p)));
    for (kind, p) in tagged {
        let _ = writeln!(out, "{kind},{},,,,{},{}", cell(p.v1), cell(p.v2), cell(p.objective));
    }
    out
}
