use std::fmt;
use std::fs;
use std::path::Path;

use binquant::analysis::{
    self, condition_curve, curve_to_csv, emit_report, ConditionCurve, CurveSource, ReportFormat,
};
use binquant::bitkernel::{gemm_check as run_gemm_check, kernel_bench, GEMM_CHECK_THRESHOLD};
use binquant::quantizers::{self, objective, save_bqt, Quantized, Reconstruct};
use binquant::rank1::{channel_mean_rank1, energy_profile, rank1_binary, PowerOptions};
use binquant::tensor::{
    generate, generate_matrix, load_tensor, save_tensor, Distribution, SyntheticSpec, TensorFormat,
};
use binquant::{Error, FloatVector, Tensor};
use serde_json::{json, Value};

use crate::{AnalyzeArgs, BenchArgs, CurveArgs, EnergyArgs, GemmCheckArgs, GenArgs, QuantizeArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    NotConverged(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::NotConverged(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => Failure::NotConverged(e.to_string()),
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn data(e: Error) -> Failure {
    match e {
        Error::NotConverged { .. } => Failure::NotConverged(e.to_string()),
        _ => Failure::Data(e.to_string()),
    }
}

fn read_tensor(path: &Path) -> Result<Tensor, Failure> {
    load_tensor(path, TensorFormat::from_path(path)).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_tensor(t: &Tensor, path: &Path) -> Result<(), Failure> {
    save_tensor(t, path, TensorFormat::from_path(path)).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

pub fn quantize(args: QuantizeArgs) -> Outcome {
    let k = args.bits.unwrap_or(args.method.fixed_bits().unwrap_or(2));
    args.method.check_bits(k)?;
    let x = read_tensor(&args.input)?.flatten();
    let q = quantizers::quantize(&x, args.method, k)?;
    let mse = objective(&x, &q).map_err(data)?.mse;
    match &q {
        Quantized::Scaled(s) => {
            save_bqt(&args.out, s.packed()).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?
        }
        Quantized::Lloyd(l) => {
            let codebook = FloatVector::new(l.codebook().to_vec()).map_err(data)?;
            write_tensor(&Tensor::Vector(codebook), &args.out)?
        }
    }
    if let Some(path) = &args.recon {
        write_tensor(&Tensor::Vector(q.reconstruct(&x).map_err(data)?), path)?;
    }
    Ok(json!({ "method": args.method.as_str(), "k": k, "mse": mse, "levels": q.levels() }))
}

fn parse_len(s: &str) -> Option<usize> {
    if let Ok(n) = s.parse::<usize>() {
        return Some(n);
    }
    let v: f64 = s.parse().ok()?;
    (v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64).then_some(v as usize)
}

/// Parses `dist:n` entries separated by `;` or newlines. `#` starts a comment.
fn parse_battery(text: &str) -> Result<Vec<(Distribution, usize)>, Failure> {
    let mut out = Vec::new();
    for entry in text.lines().flat_map(|l| l.split('#').next().unwrap_or("").split(';')) {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (dist, n) = entry
            .rsplit_once(':')
            .ok_or_else(|| Failure::Usage(format!("spec entry {entry:?} is not of the form dist:n")))?;
        let dist: Distribution = dist.parse()?;
        let n = parse_len(n.trim()).ok_or_else(|| Failure::Usage(format!("bad length in spec entry {entry:?}")))?;
        out.push((dist, n));
    }
    if out.is_empty() {
        return Err(Failure::Usage("spec lists no distributions".into()));
    }
    Ok(out)
}

pub fn analyze(args: AnalyzeArgs) -> Outcome {
    let text = match fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(_) if !Path::new(&args.spec).exists() => args.spec.clone(),
        Err(e) => return Err(Failure::Data(format!("{}: {e}", args.spec))),
    };
    let battery = parse_battery(&text)?;
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    let specs: Vec<SyntheticSpec> = battery
        .iter()
        .flat_map(|&(dist, n)| (0..args.seeds).map(move |s| SyntheticSpec::new(dist, n, args.seed_base + s)))
        .collect();
    let report = analysis::run_sweep(&specs, &args.methods, &args.bits)?;
    let format = if args.format == "csv" { ReportFormat::Csv } else { ReportFormat::Json };
    emit_report(&report, &args.out, format).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    let summary = json!({
        "rows": report.rows.len(),
        "failures": report.failures,
        "summary": analysis::summarize(&report),
        "data": "synthetic",
    });
    if report.rows.is_empty() {
        eprintln!("{summary}");
        return Err(Failure::Data("every sweep row failed".into()));
    }
    Ok(summary)
}

fn curve_summary(mode: &str, grid: usize, c: &ConditionCurve) -> Value {
    json!({ "mode": mode, "grid": grid, "intersections": c.intersections, "optimum": c.optimum })
}

pub fn curve(args: CurveArgs) -> Outcome {
    if args.grid < 2 {
        return Err(Failure::Usage(format!("--grid must be at least 2, got {}", args.grid)));
    }
    let (mode, c) = match &args.input {
        Some(path) => {
            let x = read_tensor(path)?.flatten();
            ("empirical", condition_curve(CurveSource::Empirical(&x), args.grid).map_err(data)?)
        }
        None => ("analytic-normal", condition_curve(CurveSource::AnalyticNormal { max: args.max }, args.grid)?),
    };
    fs::write(&args.out, curve_to_csv(&c)).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    Ok(curve_summary(mode, args.grid, &c))
}

pub fn energy(args: EnergyArgs) -> Outcome {
    let x = match read_tensor(&args.input)? {
        Tensor::Matrix(m) => m,
        Tensor::Vector(_) => return Err(Failure::Data("energy needs a matrix input".into())),
    };
    let opts = PowerOptions { tol: args.tol, max_iters: args.max_iters };
    let top = args.top.unwrap_or(10.min(x.rows()).min(x.cols()));
    let profile = energy_profile(&x, top, opts)?;
    let optimal = rank1_binary(&x, opts)?;
    let optimal_residual = optimal.residual_sq(&x).map_err(data)?;
    let baseline_residual = channel_mean_rank1(&x).residual_sq(&x).map_err(data)?;
    let relative = |r: f64| if profile.total > 0.0 { r / profile.total } else { 0.0 };
    let summary = json!({
        "rows": x.rows(),
        "cols": x.cols(),
        "profile": profile,
        "rank1": {
            "sigma": optimal.sigma,
            "iterations": optimal.iterations,
            "optimal_residual_sq": optimal_residual,
            "optimal_relative_residual": relative(optimal_residual),
            "channel_mean_residual_sq": baseline_residual,
            "channel_mean_relative_residual": relative(baseline_residual),
        },
    });
    if let Some(path) = &args.out {
        fs::write(path, format!("{summary:#}\n")).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(summary)
}

fn check_kernel_bits(ka: usize, kw: usize) -> Result<(), Failure> {
    for (name, k) in [("ka", ka), ("kw", kw)] {
        if !(1..=8).contains(&k) {
            return Err(Failure::Usage(format!("--{name} must be in 1..=8, got {k}")));
        }
    }
    Ok(())
}

pub fn gemm_check(args: GemmCheckArgs) -> Outcome {
    check_kernel_bits(args.ka, args.kw)?;
    if args.m == 0 || args.n == 0 || args.p == 0 {
        return Err(Failure::Usage("--m, --n and --p must be positive".into()));
    }
    let report = run_gemm_check(args.m, args.n, args.p, args.ka, args.kw, args.seed)?;
    let summary = serde_json::to_value(&report).expect("plain struct");
    if !report.passed {
        println!("{summary}");
        return Err(Failure::Data(format!(
            "max relative deviation {:e} is not below {GEMM_CHECK_THRESHOLD:e}",
            report.max_relative_deviation
        )));
    }
    Ok(summary)
}

pub fn bench(args: BenchArgs) -> Outcome {
    check_kernel_bits(args.ka, args.kw)?;
    let report = kernel_bench(args.n, args.ka, args.kw, args.reps)?;
    Ok(serde_json::to_value(&report).expect("plain struct"))
}

pub fn gen(args: GenArgs) -> Outcome {
    let format = TensorFormat::from_path(&args.out);
    if args.n == Some(0) || args.shape.as_ref().is_some_and(|s| s.contains(&0)) {
        return Err(Failure::Usage("sizes must be positive".into()));
    }
    let tensor = match (&args.n, &args.shape) {
        (Some(n), None) => Tensor::Vector(generate(&SyntheticSpec::new(args.dist, *n, args.seed))?),
        (None, Some(shape)) => {
            if format == TensorFormat::Csv {
                return Err(Failure::Usage("CSV output holds vectors only; use an .fqt path with --shape".into()));
            }
            Tensor::Matrix(generate_matrix(&args.dist, shape[0], shape[1], args.seed)?)
        }
        _ => return Err(Failure::Usage("give exactly one of --n or --shape".into())),
    };
    write_tensor(&tensor, &args.out)?;
    Ok(json!({
        "distribution": args.dist.to_string(),
        "dims": tensor.dims(),
        "seed": args.seed,
        "out": args.out.display().to_string(),
    }))
}
