//! Subcommand implementations.

use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use rffsim_core::analytic;
use rffsim_core::bitstream::{self, BitstreamSidecar};
use rffsim_core::event_source::DetectorConfig;
use rffsim_core::rff::{
    simulate_qrng, simulate_stage, AnalogTimingModel, QrngConfig, SamplerConfig,
};
use rffsim_core::seeding::derive_seed;
use rffsim_core::stats;
use rffsim_core::sts::{self, TestKind};

use crate::config::{resolve, resolve_grid, ResolvedPipeline};
use crate::manifest::{write_atomic, RunManifest};
use crate::{AnalyzeArgs, GenerateArgs, PredictArgs, SweepArgs, SweepAutocorrArgs, TestArgs};

type CmdResult = Result<ExitCode, Box<dyn Error>>;

const SWEEP_DEFAULT_BITS: u64 = 10_000_000;

fn init_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        if n > 0 {
            // Ignore the error if a pool already exists (tests call in-process).
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn to_qrng_config(p: &ResolvedPipeline) -> Result<QrngConfig, Box<dyn Error>> {
    let analog = AnalogTimingModel::new(p.eta, p.t_rise, p.t_fall)?;
    let sampler = SamplerConfig::new(p.f_bit, p.phase)?;
    Ok(QrngConfig::uniform_stages(
        p.stages,
        p.f_det,
        p.dead_time,
        analog,
        sampler,
        p.n_bits,
        p.seed,
    )?)
}

pub fn generate(args: GenerateArgs) -> CmdResult {
    init_jobs(args.pipeline.jobs);
    let p = resolve(&args.pipeline, 1_000_000)?;
    let cfg = to_qrng_config(&p)?;
    let stream = simulate_qrng(&cfg)?;

    write_atomic(&args.out, stream.bytes())?;
    let sidecar = BitstreamSidecar {
        schema_version: 1,
        n_bits: stream.len(),
        seed: Some(p.seed),
        config: Some(cfg),
    };
    let sidecar_path = args.out.with_extension("json");
    write_atomic(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar)?.as_bytes(),
    )?;

    let mut manifest = RunManifest::new("generate", p.seed, serde_json::to_value(&p)?);
    manifest.record(&args.out)?;
    manifest.record(&sidecar_path)?;
    let manifest_path = manifest.write_next_to(&args.out)?;
    println!(
        "wrote {} ({} bits, {} bytes), sidecar {}, manifest {}",
        args.out.display(),
        stream.len(),
        stream.bytes().len(),
        sidecar_path.display(),
        manifest_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// One sweep point: simulate a single stage and estimate the statistics.
/// Each point owns a seed derived from (base seed, grid index).
struct SweepPoint {
    f_bit: f64,
    f_det: f64,
    seed: u64,
}

fn sweep_grid(base: &ResolvedPipeline, f_bits: &[f64], f_dets: &[f64]) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for (i, &f_bit) in f_bits.iter().enumerate() {
        for (j, &f_det) in f_dets.iter().enumerate() {
            let index = (i * f_dets.len() + j) as u64;
            points.push(SweepPoint {
                f_bit,
                f_det,
                seed: derive_seed(base.seed, index),
            });
        }
    }
    points
}

pub fn sweep_bias(args: SweepArgs) -> CmdResult {
    init_jobs(args.pipeline.jobs);
    let p = resolve(&args.pipeline, SWEEP_DEFAULT_BITS)?;
    // A singular --f-bit / --f-det acts as a one-point grid.
    let f_bits = resolve_grid(
        &args
            .f_bit_grid
            .clone()
            .or_else(|| args.pipeline.f_bit.map(|v| vec![v])),
        "f_bit_grid",
        &args.pipeline.config,
        &[10e6, 15e6, 20e6, 25e6],
    )?;
    let f_dets = resolve_grid(
        &args
            .f_det_grid
            .clone()
            .or_else(|| args.pipeline.f_det.map(|v| vec![v])),
        "f_det_grid",
        &args.pipeline.config,
        &[10e6, 20e6, 30e6, 40e6, 50e6, 60e6, 70e6, 80e6],
    )?;
    let analog = AnalogTimingModel::new(p.eta, p.t_rise, p.t_fall)?;

    let points = sweep_grid(&p, &f_bits, &f_dets);
    let rows: Vec<String> = points
        .par_iter()
        .map(|pt| -> Result<String, String> {
            let det =
                DetectorConfig::new(pt.f_det, p.dead_time, pt.seed).map_err(|e| e.to_string())?;
            let phase = SamplerConfig::new(pt.f_bit, p.phase)
                .map_err(|e| e.to_string())?
                .resolve_phase(pt.seed);
            let x = simulate_stage(&det, &analog, pt.f_bit, phase, p.n_bits, false)
                .map_err(|e| e.to_string())?;
            let b = stats::bias(&x).map_err(|e| e.to_string())?;
            Ok(format!(
                "{},{},{:.8e},{:.8e},{:.8e}",
                pt.f_bit,
                pt.f_det,
                b.value,
                b.std_error(),
                analytic::predicted_bias(&analog, pt.f_det)
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv =
        String::from("# schema_version=1\nf_bit,f_det,measured_bias,stderr,predicted_bias\n");
    for row in rows {
        let _ = writeln!(csv, "{row}");
    }
    write_atomic(&args.out, csv.as_bytes())?;

    let config = json!({"pipeline": &p, "f_bit_grid": f_bits, "f_det_grid": f_dets});
    let mut manifest = RunManifest::new("sweep-bias", p.seed, config);
    manifest.record(&args.out)?;
    manifest.write_next_to(&args.out)?;
    println!(
        "wrote {} ({} points)",
        args.out.display(),
        f_bits.len() * f_dets.len()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn sweep_autocorr(args: SweepAutocorrArgs) -> CmdResult {
    if args.k_max == 0 {
        return Err("k-max must be >= 1".into());
    }
    init_jobs(args.sweep.pipeline.jobs);
    let p = resolve(&args.sweep.pipeline, SWEEP_DEFAULT_BITS)?;
    let f_bits = resolve_grid(
        &args
            .sweep
            .f_bit_grid
            .clone()
            .or_else(|| args.sweep.pipeline.f_bit.map(|v| vec![v])),
        "f_bit_grid",
        &args.sweep.pipeline.config,
        &[10e6, 15e6, 20e6, 25e6],
    )?;
    let f_dets = resolve_grid(
        &args
            .sweep
            .f_det_grid
            .clone()
            .or_else(|| args.sweep.pipeline.f_det.map(|v| vec![v])),
        "f_det_grid",
        &args.sweep.pipeline.config,
        &[10e6, 20e6, 30e6, 40e6, 50e6, 60e6, 70e6, 80e6],
    )?;
    let analog = AnalogTimingModel::new(p.eta, p.t_rise, p.t_fall)?;

    let points = sweep_grid(&p, &f_bits, &f_dets);
    let k_max = args.k_max;
    let blocks: Vec<String> = points
        .par_iter()
        .map(|pt| -> Result<String, String> {
            let det =
                DetectorConfig::new(pt.f_det, p.dead_time, pt.seed).map_err(|e| e.to_string())?;
            let phase = SamplerConfig::new(pt.f_bit, p.phase)
                .map_err(|e| e.to_string())?
                .resolve_phase(pt.seed);
            let x = simulate_stage(&det, &analog, pt.f_bit, phase, p.n_bits, false)
                .map_err(|e| e.to_string())?;
            let profile = stats::autocorr_profile(&x, k_max).map_err(|e| e.to_string())?;
            let lambda = pt.f_det / pt.f_bit;
            let mut out = String::new();
            for est in profile {
                let ideal = if est.lag == 1 {
                    format!("{:.8e}", analytic::a1_ideal(lambda))
                } else {
                    String::new()
                };
                let _ = writeln!(
                    out,
                    "{},{},{:.6},{},{:.8e},{:.8e},{}",
                    pt.f_bit,
                    pt.f_det,
                    lambda,
                    est.lag,
                    est.value,
                    est.std_error(),
                    ideal
                );
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv =
        String::from("# schema_version=1\nf_bit,f_det,lambda,k,measured_ak,stderr,ideal_a1\n");
    for b in blocks {
        csv.push_str(&b);
    }
    write_atomic(&args.sweep.out, csv.as_bytes())?;

    let config = json!({
        "pipeline": &p, "f_bit_grid": f_bits, "f_det_grid": f_dets, "k_max": k_max
    });
    let mut manifest = RunManifest::new("sweep-autocorr", p.seed, config);
    manifest.record(&args.sweep.out)?;
    manifest.write_next_to(&args.sweep.out)?;
    println!("wrote {}", args.sweep.out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_test_selection(
    spec: &Option<String>,
    apen_m: &[u32],
) -> Result<Vec<TestKind>, Box<dyn Error>> {
    let Some(spec) = spec else {
        return Ok(TestKind::default_battery(apen_m));
    };
    let mut kinds = Vec::new();
    for tok in spec.split(',') {
        match tok.trim().to_ascii_lowercase().as_str() {
            "frequency" => kinds.push(TestKind::Frequency),
            "runs" => kinds.push(TestKind::Runs),
            "fft" => kinds.push(TestKind::Fft),
            "universal" => kinds.push(TestKind::Universal),
            "apen" | "approximate-entropy" => {
                kinds.extend(apen_m.iter().map(|&m| TestKind::ApproximateEntropy { m }))
            }
            other => return Err(format!("unknown test {other}").into()),
        }
    }
    if kinds.is_empty() {
        return Err("empty test selection".into());
    }
    Ok(kinds)
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

#[derive(Serialize)]
struct TestReportFile<'a> {
    schema_version: u32,
    source: String,
    passed: bool,
    #[serde(flatten)]
    report: &'a sts::TestReport,
    unimplemented: &'a [String],
}

pub fn test(args: TestArgs) -> CmdResult {
    init_jobs(args.jobs);
    let (stream, _sidecar) = bitstream::read_with_sidecar(&args.bitstream)?;
    let kinds = parse_test_selection(&args.tests, &args.apen_m)?;
    let battery = sts::run_battery(&stream, args.block_size, &kinds)?;

    let seed = _sidecar.seed.unwrap_or(0);
    let config = json!({
        "bitstream": args.bitstream.display().to_string(),
        "block_size": args.block_size,
        "tests": kinds,
    });
    let mut manifest = RunManifest::new("test", seed, config);

    let mut all_proportions_ok = true;
    for report in &battery.reports {
        all_proportions_ok &= report.proportion.ok();
        let s = slug(&report.test_name);
        let json_path = path_with_suffix(&args.out, &format!("_{s}.json"));
        let file = TestReportFile {
            schema_version: 1,
            source: args.bitstream.display().to_string(),
            passed: report.passed(),
            report,
            unimplemented: &battery.unimplemented,
        };
        write_atomic(&json_path, serde_json::to_string_pretty(&file)?.as_bytes())?;
        manifest.record(&json_path)?;

        let cdf = sts::pvalue_cdf(&report.p_values)?;
        let mut csv = String::from("# schema_version=1\nrank_fraction,p_value\n");
        for (rank, p) in cdf.points {
            let _ = writeln!(csv, "{rank},{p}");
        }
        let csv_path = path_with_suffix(&args.out, &format!("_{s}_cdf.csv"));
        write_atomic(&csv_path, csv.as_bytes())?;
        manifest.record(&csv_path)?;

        println!(
            "{:<28} proportion {}/{} (threshold {}) uniformity {} -> {}",
            report.test_name,
            report.proportion.passed,
            report.proportion.total,
            report.proportion.threshold,
            report
                .uniformity_p
                .map(|u| format!("{u:.6}"))
                .unwrap_or_else(|| "n/a".into()),
            if report.passed() { "PASS" } else { "FAIL" }
        );
    }
    manifest.write_next_to(&args.out)?;

    Ok(if all_proportions_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn path_with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    base.with_file_name(name)
}

pub fn analyze(args: AnalyzeArgs) -> CmdResult {
    let (stream, _) = bitstream::read_with_sidecar(&args.bitstream)?;
    let b = stats::bias(&stream)?;
    let profile = stats::autocorr_profile(&stream, args.k_max)?;
    let mut entropy = serde_json::Map::new();
    for &l in &args.entropy_l {
        entropy.insert(l.to_string(), json!(stats::ngram_entropy(&stream, l)?));
    }
    let out = json!({
        "schema_version": 1,
        "source": args.bitstream.display().to_string(),
        "n_bits": stream.len(),
        "bias": {"value": b.value, "stderr": b.std_error()},
        "autocorr": profile
            .iter()
            .map(|e| json!({"k": e.lag, "value": e.value, "stderr": e.std_error()}))
            .collect::<Vec<_>>(),
        "entropy": entropy,
    });
    emit_json(&out, args.out.as_deref(), "analyze", 0)
}

pub fn predict(args: PredictArgs) -> CmdResult {
    let p = resolve(&args.pipeline, SWEEP_DEFAULT_BITS)?;
    let analog = AnalogTimingModel::new(p.eta, p.t_rise, p.t_fall)?;
    let point = analytic::OperatingPoint::new(p.f_det, p.f_bit)?;
    let bias = analytic::predicted_bias(&analog, p.f_det);
    let a1 = analytic::a1_ideal(point.lambda);

    // Upper-bound chain: entry k is the equal-statistics propagation map
    // applied k times, i.e. the 2^k-stage estimate.
    let mut chain = Vec::new();
    let (mut b, mut a) = (bias, a1);
    let folds = (p.stages.max(1) as f64).log2().ceil() as u32;
    for k in 1..=folds.max(1) {
        let next = analytic::xor_propagation(b, a);
        b = next.bias;
        a = next.autocorr1;
        chain.push(json!({"stages": 1u64 << k, "bias": b, "a1": a}));
    }

    let out = json!({
        "schema_version": 1,
        "f_det": p.f_det,
        "f_bit": p.f_bit,
        "lambda": point.lambda,
        "alpha": analytic::bias_coefficient(&analog),
        "zero_bias_eta": analytic::zero_bias_eta(p.t_rise, p.t_fall).ok(),
        "bias": bias,
        "a1": a1,
        "xor_chain": chain,
    });
    emit_json(&out, args.out.as_deref(), "predict", p.seed)
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>, command: &str, seed: u64) -> CmdResult {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        None => {
            println!("{text}");
        }
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            let mut manifest = RunManifest::new(command, seed, value.clone());
            manifest.record(path)?;
            manifest.write_next_to(path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
