//! Subcommand implementations. Results go to `--out` or stdout, progress to
//! stderr. Every artifact carries the seed and the configuration hash.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use qosd::codes::{parse_qcode_unchecked, to_qcode_string, StabilizerCode};
use qosd::gf2::Gf2Matrix;
use qosd::selftest::{self, SuiteResult};
use qosd::sim::{run_trials, threshold_scan, timing_probe, write_trial_log, AggregateStats, ThresholdReport, TimingReport, CURVE_HEADER};
use serde::Serialize;

use crate::config::{parse_code, RunConfig};
use crate::{CodeArgs, ExportFormat};

/// Header of the `decode-curve` CSV.
pub fn curve_csv_header() -> String {
    format!("{CURVE_HEADER},config_hash")
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    seed: u64,
    config_hash: String,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct Points<'a> {
    points: &'a [AggregateStats],
}

#[derive(Serialize)]
struct Threshold<'a> {
    report: &'a ThresholdReport,
}

#[derive(Serialize)]
struct Timings<'a> {
    timings: &'a [TimingReport],
}

fn artifact_json<T: Serialize>(cfg: &RunConfig, body: T) -> Result<String> {
    let a = Artifact { seed: cfg.seed, config_hash: cfg.config_hash(), config: cfg, body };
    Ok(serde_json::to_string_pretty(&a)? + "\n")
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Sidecar JSON next to a CSV output.
fn json_sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn decode_curve(cfg: &RunConfig) -> Result<ExitCode> {
    if cfg.eps.is_empty() {
        bail!("decode-curve needs at least one error rate (--eps)");
    }
    let codes = cfg.build_codes()?;
    let hash = cfg.config_hash();
    let opts = cfg.run_options();
    let mut csv = curve_csv_header() + "\n";
    let mut log = Vec::new();
    let mut points = Vec::new();
    for code in &codes {
        for &eps in &cfg.eps {
            let r = run_trials(code, eps, &cfg.decoder, &opts)?;
            let s = &r.stats;
            eprintln!(
                "{} eps={eps}: {} / {} logical errors, LER {:.3e} [{:.3e}, {:.3e}], BP failures {:.4}",
                s.code, s.logical_errors, s.trials, s.ler, s.ler_ci_low, s.ler_ci_high, s.bp_failure_rate
            );
            writeln!(csv, "{},{hash}", s.curve_row())?;
            if let Some(records) = &r.records {
                writeln!(log, "# code={} epsilon={eps} seed={} config_hash={hash}", s.code, cfg.seed)?;
                write_trial_log(&mut log, records)?;
            }
            points.push(r.stats);
        }
    }
    emit(cfg.out.as_deref(), &csv)?;
    if let Some(out) = &cfg.out {
        emit(Some(&json_sidecar(out)), &artifact_json(cfg, Points { points: &points })?)?;
    }
    if let Some(path) = &cfg.trial_log {
        std::fs::write(path, &log).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn threshold(cfg: &RunConfig) -> Result<ExitCode> {
    let codes = cfg.build_codes()?;
    if codes.len() < 2 {
        bail!("threshold needs at least two codes (give several distances with --d)");
    }
    let report = threshold_scan(&codes, &cfg.eps, &cfg.decoder, &cfg.run_options())?;
    for c in &report.crossings {
        eprintln!("{} vs {}: {:?}", c.smaller, c.larger, c.crossing);
    }
    emit(cfg.out.as_deref(), &artifact_json(cfg, Threshold { report: &report })?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn timing(cfg: &RunConfig, warmup: u64) -> Result<ExitCode> {
    if cfg.eps.is_empty() {
        bail!("timing-probe needs at least one error rate (--eps)");
    }
    if cfg.trials == 0 {
        bail!("timing-probe needs a positive trial count");
    }
    let mut reports = Vec::new();
    for code in cfg.build_codes()? {
        for &eps in &cfg.eps {
            let t = timing_probe(&code, eps, cfg.trials, warmup, &cfg.decoder, cfg.seed)?;
            eprintln!(
                "{} eps={eps}: {} BP failures, ADOSD/BP-iteration {:?}, ADOSD/OSD-2 {:?}",
                t.code, t.bp_failures, t.adosd_over_bp_iteration, t.adosd_over_osd2
            );
            reports.push(t);
        }
    }
    emit(cfg.out.as_deref(), &artifact_json(cfg, Timings { timings: &reports })?)?;
    Ok(ExitCode::SUCCESS)
}

fn single_code(args: &CodeArgs) -> Result<StabilizerCode> {
    let specs = parse_code(&args.code, &[args.d])?;
    Ok(specs[0].build()?)
}

pub fn code_build(args: &CodeArgs) -> Result<ExitCode> {
    let code = single_code(args)?;
    eprintln!("{code:?}");
    emit(args.out.as_deref(), &to_qcode_string(&code))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CodeJson {
    name: String,
    n: usize,
    k: usize,
    d: Option<usize>,
    /// Set columns per row; `0..n` is the X part, `n..2n` the Z part.
    h: Vec<Vec<usize>>,
    l: Vec<Vec<usize>>,
}

fn rows(m: &Gf2Matrix) -> Vec<Vec<usize>> {
    (0..m.rows()).map(|r| m.row(r).ones()).collect()
}

pub fn code_export(args: &CodeArgs, format: ExportFormat) -> Result<ExitCode> {
    let code = single_code(args)?;
    let text = match format {
        ExportFormat::Qcode => to_qcode_string(&code),
        ExportFormat::Json => {
            let j = CodeJson {
                name: code.name().to_string(),
                n: code.n(),
                k: code.k(),
                d: code.d(),
                h: rows(code.check_matrix()),
                l: rows(code.logical_matrix()),
            };
            serde_json::to_string_pretty(&j)? + "\n"
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn code_verify(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (h, l, d) = parse_qcode_unchecked(&text).with_context(|| format!("in {}", path.display()))?;
    let report = StabilizerCode::verify_matrices(&h, &l);
    let d = d.map_or("?".to_string(), |d| d.to_string());
    println!("code: n={} k={} d={d} m={}", report.n, report.k, report.m);
    println!("rank(H) = {}", report.rank_h);
    println!("rank of logical commutation matrix = {}", report.rank_logical_gram);
    let hist: Vec<String> = report.weight_histogram.iter().map(|(w, c)| format!("{w}:{c}")).collect();
    println!("stabilizer weights (weight:count) = {}", hist.join(" "));
    for f in &report.failures {
        println!("FAIL {f}");
    }
    if report.passed() {
        println!("all checks pass");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} check(s) failed", report.failures.len());
        Ok(ExitCode::FAILURE)
    }
}

pub fn selftest(seed: u64, only: Option<&str>) -> Result<ExitCode> {
    let results: Vec<SuiteResult> = match only {
        None => selftest::run_all(seed),
        Some(key) => {
            let Some((_, f)) = selftest::SUITES.iter().find(|(k, _)| *k == key) else {
                let keys: Vec<&str> = selftest::SUITES.iter().map(|(k, _)| *k).collect();
                bail!("unknown suite {key:?}; known: {}", keys.join(", "));
            };
            vec![f(seed)]
        }
    };
    let mut ok = true;
    for r in &results {
        match &r.failure {
            None => println!("ok   {} ({} cases)", r.name, r.cases),
            Some(why) => {
                ok = false;
                println!("FAIL {} ({} cases): {why}", r.name, r.cases);
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
