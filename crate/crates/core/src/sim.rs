//! Monte-Carlo harness: depolarizing sampling, decoding pipelines, logical
//! error accounting, reduction statistics, timing and threshold scans.
//!
//! Every trial draws from its own RNG seeded by `(seed, trial index)`, so
//! results do not depend on the worker count. Trials run in fixed-size
//! chunks in index order; the logical-error stopping rule truncates at the
//! exact trial that reaches the target.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{alpha_of_epsilon, alpha_sequence, Bp4Decoder, BpConfig, BpStatus, Schedule};
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::osd::{build_order, candidate_count, order_from_budget, osd2_budget, osd_w, OsdSystem, ReliabilityMetric};
use crate::reduction::{adosd, AdosdConfig, AdosdStage, DEFAULT_THETA};
use crate::symplectic::{Pauli, Syndrome, SymplecticVector};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;
const CHUNK: u64 = 2048;
const TIMING_BATCH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub epsilon: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.75).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 3/4), got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Each qubit is I with probability `1 - ε`, otherwise X, Y or Z with `ε/3` each.
pub fn sample_error(epsilon: f64, n: usize, rng: &mut dyn RngCore) -> SymplecticVector {
    let mut e = SymplecticVector::zeros(n);
    if epsilon <= 0.0 {
        return e;
    }
    for q in 0..n {
        let r: f64 = rng.random();
        if r < epsilon {
            let k = ((r / epsilon) * 3.0) as usize;
            e.set_pauli(q, Pauli::from_index(k.min(2) + 1));
        }
    }
    e
}

/// Seed of trial `index` under top-level `seed` (SplitMix64 finalizer).
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    #[serde(rename = "bp")]
    Bp,
    #[serde(rename = "bp+osd0")]
    BpOsd0,
    #[serde(rename = "bp+osdw")]
    BpOsdW,
    #[serde(rename = "bp+adosd")]
    BpAdosd,
    #[serde(rename = "ambp")]
    Ambp,
    #[serde(rename = "ambp+adosd")]
    AmbpAdosd,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::Bp,
        Pipeline::BpOsd0,
        Pipeline::BpOsdW,
        Pipeline::BpAdosd,
        Pipeline::Ambp,
        Pipeline::AmbpAdosd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Bp => "bp",
            Pipeline::BpOsd0 => "bp+osd0",
            Pipeline::BpOsdW => "bp+osdw",
            Pipeline::BpAdosd => "bp+adosd",
            Pipeline::Ambp => "ambp",
            Pipeline::AmbpAdosd => "ambp+adosd",
        }
    }

    pub fn adaptive(self) -> bool {
        matches!(self, Pipeline::Ambp | Pipeline::AmbpAdosd)
    }

    pub fn uses_adosd(self) -> bool {
        matches!(self, Pipeline::BpAdosd | Pipeline::AmbpAdosd)
    }
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Pipeline::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown pipeline {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Decoder pipeline settings shared by every point of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: Pipeline,
    pub max_iter: usize,
    pub alpha: f64,
    /// Use `α(ε)` instead of `alpha`.
    pub alpha_from_epsilon: bool,
    pub schedule: Schedule,
    /// Step sizes tried by the adaptive pipelines.
    pub alpha_sequence: Vec<f64>,
    pub theta: f64,
    /// Candidate budget `Γ`; `None` means the OSD-2 count.
    pub gamma: Option<u64>,
    /// Explicit order for `bp+osdw`.
    pub order: Option<usize>,
    pub w_backup: usize,
    pub metric: ReliabilityMetric,
    /// Distance used by the light-column test, overriding the code's.
    pub distance: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            pipeline: Pipeline::BpAdosd,
            max_iter: 100,
            alpha: 1.0,
            alpha_from_epsilon: false,
            schedule: Schedule::Parallel,
            alpha_sequence: alpha_sequence(1.6, -0.01, 0.5).expect("valid default sequence"),
            theta: DEFAULT_THETA,
            gamma: None,
            order: None,
            w_backup: 2,
            metric: ReliabilityMetric::HardThenSoft,
            distance: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_pipeline(pipeline: Pipeline) -> Self {
        PipelineConfig {
            pipeline,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bp_config(0.01)?.validate()?;
        self.adosd_config().validate()?;
        if self.pipeline.adaptive() && self.alpha_sequence.is_empty() {
            return Err(Error::Config("adaptive pipelines need a nonempty alpha sequence".into()));
        }
        if self.alpha_sequence.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("alpha sequence values must be positive".into()));
        }
        Ok(())
    }

    pub fn bp_config(&self, epsilon: f64) -> Result<BpConfig> {
        let alpha = if self.alpha_from_epsilon {
            alpha_of_epsilon(epsilon)?
        } else {
            self.alpha
        };
        Ok(BpConfig {
            max_iter: self.max_iter,
            alpha,
            epsilon,
            schedule: self.schedule,
        })
    }

    pub fn adosd_config(&self) -> AdosdConfig {
        AdosdConfig {
            theta: self.theta,
            gamma: self.gamma,
            w_backup: self.w_backup,
            metric: self.metric,
            distance_override: self.distance,
            logical_flip_filter: false,
        }
    }
}

/// Pipeline stage that produced the final estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// BP converged.
    Bp,
    /// ADOSD solved the reduced system at order 0.
    Osd0,
    /// ADOSD solved the reduced system at order `>= 1`.
    OsdW,
    /// ADOSD fell back to full-size OSD.
    Fallback,
    /// Plain OSD on the full system.
    FullOsd,
    /// BP failed and no post-processor ran.
    Unresolved,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Bp => "bp",
            Stage::Osd0 => "osd0",
            Stage::OsdW => "osdw",
            Stage::Fallback => "fallback",
            Stage::FullOsd => "full_osd",
            Stage::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub estimate: Option<SymplecticVector>,
    pub bp_status: BpStatus,
    pub bp_iters: usize,
    pub stage: Stage,
    pub osd_order: Option<usize>,
    pub m_red: Option<usize>,
    pub cols_red: Option<usize>,
    pub corollary: Option<bool>,
    pub t_bp: f64,
    pub t_post: f64,
}

/// A configured pipeline bound to one code; one per worker.
pub struct Decoder<'a> {
    code: &'a StabilizerCode,
    bp: Bp4Decoder,
    pipeline: Pipeline,
    bp_cfg: BpConfig,
    alphas: Vec<f64>,
    adosd_cfg: AdosdConfig,
    metric: ReliabilityMetric,
    full_order: usize,
    full_budget: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a StabilizerCode, cfg: &PipelineConfig, epsilon: f64) -> Result<Self> {
        let prior_eps = if epsilon > 0.0 { epsilon } else { 1e-6 };
        let bp_cfg = cfg.bp_config(prior_eps)?;
        let reliable = code.n() + code.k();
        let (full_order, full_budget) = match cfg.pipeline {
            Pipeline::BpOsd0 => (0, 1),
            _ => match (cfg.order, cfg.gamma) {
                (Some(w), Some(g)) => (w, g),
                (Some(w), None) => (w, candidate_count(reliable, w)),
                (None, Some(g)) => (order_from_budget(reliable, g), g),
                (None, None) => (2, osd2_budget(reliable)),
            },
        };
        Ok(Decoder {
            code,
            bp: Bp4Decoder::for_code(code),
            pipeline: cfg.pipeline,
            bp_cfg,
            alphas: cfg.alpha_sequence.clone(),
            adosd_cfg: cfg.adosd_config(),
            metric: cfg.metric,
            full_order,
            full_budget,
        })
    }

    pub fn code(&self) -> &StabilizerCode {
        self.code
    }

    pub fn decode(&mut self, s: &Syndrome, rng: &mut dyn RngCore) -> Result<DecodeOutcome> {
        let t0 = Instant::now();
        let out = if self.pipeline.adaptive() {
            self.bp.decode_adaptive(s, &self.bp_cfg, &self.alphas, rng)
        } else {
            self.bp.decode_with_rng(s, &self.bp_cfg, rng)
        };
        let t_bp = t0.elapsed().as_secs_f64();
        let mut result = DecodeOutcome {
            estimate: None,
            bp_status: out.status,
            bp_iters: out.total_iterations,
            stage: Stage::Unresolved,
            osd_order: None,
            m_red: None,
            cols_red: None,
            corollary: None,
            t_bp,
            t_post: 0.0,
        };
        if out.is_success() {
            result.estimate = out.estimate;
            result.stage = Stage::Bp;
            return Ok(result);
        }
        let t1 = Instant::now();
        match self.pipeline {
            Pipeline::Bp | Pipeline::Ambp => return Ok(result),
            Pipeline::BpOsd0 | Pipeline::BpOsdW => {
                let order = build_order(&out.belief, self.metric);
                let system = OsdSystem::for_code(self.code, s, &order, &out.belief.hard_vector())?;
                let r = osd_w(&system, self.full_order, self.full_budget);
                result.estimate = Some(r.estimate);
                result.stage = Stage::FullOsd;
                result.osd_order = Some(self.full_order);
                result.m_red = Some(self.code.m());
                result.cols_red = Some(2 * self.code.n());
            }
            Pipeline::BpAdosd | Pipeline::AmbpAdosd => {
                let r = adosd(self.code, s, &out.belief, &self.adosd_cfg)?;
                result.stage = match r.stage {
                    AdosdStage::Osd0 => Stage::Osd0,
                    AdosdStage::HigherOrder => Stage::OsdW,
                    AdosdStage::Fallback => Stage::Fallback,
                };
                result.estimate = Some(r.estimate);
                result.osd_order = Some(r.order);
                result.m_red = Some(r.m_reduced);
                result.cols_red = Some(r.cols_reduced);
                result.corollary = Some(r.corollary);
            }
        }
        result.t_post = t1.elapsed().as_secs_f64();
        Ok(result)
    }
}

/// One Monte-Carlo trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    /// Injected error as a Pauli string.
    pub error: String,
    /// Syndrome as a 0/1 string.
    pub syndrome: String,
    pub err_weight: usize,
    pub bp_status: BpStatus,
    pub bp_iters: usize,
    pub stage: Stage,
    pub osd_order: Option<usize>,
    pub m_red: Option<usize>,
    pub cols_red: Option<usize>,
    pub corollary: Option<bool>,
    pub logical_error: bool,
    pub t_bp_us: f64,
    pub t_post_us: f64,
}

/// Column names of the per-trial CSV log.
pub const TRIAL_LOG_HEADER: &str =
    "trial,seed,err_weight,bp_status,bp_iters,stage,osd_order,m_red,cols_red,logical_error,t_bp_us,t_post_us";

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        let status = match self.bp_status {
            BpStatus::Success => "success",
            BpStatus::Failure => "failure",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3}",
            self.trial,
            self.seed,
            self.err_weight,
            status,
            self.bp_iters,
            self.stage.name(),
            opt(self.osd_order),
            opt(self.m_red),
            opt(self.cols_red),
            u8::from(self.logical_error),
            self.t_bp_us,
            self.t_post_us
        )
    }

    /// `max(m'/m, (2n-v)/2n)` for post-processed trials.
    pub fn effective_dimension(&self, m: usize, n: usize) -> Option<f64> {
        match (self.m_red, self.cols_red) {
            (Some(mr), Some(cr)) => Some((mr as f64 / m as f64).max(cr as f64 / (2 * n) as f64)),
            _ => None,
        }
    }
}

pub fn write_trial_log(out: &mut dyn Write, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{TRIAL_LOG_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn bits_string(s: &Syndrome) -> String {
    (0..s.len()).map(|i| if s.get(i) { '1' } else { '0' }).collect()
}

/// Decodes one injected error and classifies the result.
pub fn decode_error(
    decoder: &mut Decoder<'_>,
    error: &SymplecticVector,
    trial: u64,
    seed: u64,
    rng: &mut dyn RngCore,
) -> Result<TrialRecord> {
    let code = decoder.code;
    let s = code.syndrome(error);
    let out = decoder.decode(&s, rng)?;
    let logical_error = code
        .is_logical_error(error, out.estimate.as_ref())
        .map_err(|e| Error::InvariantViolation(format!("trial {trial}: estimate does not match syndrome ({e})")))?;
    Ok(TrialRecord {
        trial,
        seed,
        error: error.to_string(),
        syndrome: bits_string(&s),
        err_weight: error.weight(),
        bp_status: out.bp_status,
        bp_iters: out.bp_iters,
        stage: out.stage,
        osd_order: out.osd_order,
        m_red: out.m_red,
        cols_red: out.cols_red,
        corollary: out.corollary,
        logical_error,
        t_bp_us: out.t_bp * 1e6,
        t_post_us: out.t_post * 1e6,
    })
}

fn run_trial(decoder: &mut Decoder<'_>, epsilon: f64, seed: u64, trial: u64) -> Result<TrialRecord> {
    let ts = trial_seed(seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(ts);
    let error = sample_error(epsilon, decoder.code.n(), &mut rng);
    decode_error(decoder, &error, trial, ts, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_trials: u64,
    /// Stop once this many logical errors have been seen.
    pub target_logical_errors: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub keep_records: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_trials: 10_000,
            target_logical_errors: None,
            seed: 0,
            workers: 1,
            keep_records: false,
        }
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Aggregate observables of one `(code, ε, pipeline)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub code: String,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub epsilon: f64,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub trials: u64,
    pub logical_errors: u64,
    pub ler: f64,
    pub ler_ci_low: f64,
    pub ler_ci_high: f64,
    pub bp_failures: u64,
    pub bp_failure_rate: f64,
    pub post_processed: u64,
    pub osd0_only_fraction: Option<f64>,
    pub higher_order_fraction: Option<f64>,
    pub fallback_fraction: Option<f64>,
    pub corollary_fraction: Option<f64>,
    pub dims30_fraction: Option<f64>,
    pub dims20_fraction: Option<f64>,
    pub mean_bp_iteration_us: Option<f64>,
    pub mean_post_us: Option<f64>,
    pub mean_iterations_on_success: Option<f64>,
    pub stopped_early: bool,
}

#[derive(Default)]
struct Accumulator {
    trials: u64,
    logical_errors: u64,
    bp_failures: u64,
    post: u64,
    osd0: u64,
    higher: u64,
    fallback: u64,
    corollary: u64,
    dims30: u64,
    dims20: u64,
    success_iters: u64,
    successes: u64,
    batch: BatchTimes,
    bp_iter_batches: Vec<f64>,
    post_batches: Vec<f64>,
}

#[derive(Default)]
struct BatchTimes {
    count: usize,
    bp_us: f64,
    bp_iters: u64,
    post_us: f64,
    post_calls: u64,
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

impl Accumulator {
    fn add(&mut self, r: &TrialRecord, m: usize, n: usize) {
        self.trials += 1;
        self.logical_errors += u64::from(r.logical_error);
        if r.bp_status == BpStatus::Success {
            self.successes += 1;
            self.success_iters += r.bp_iters as u64;
        } else {
            self.bp_failures += 1;
        }
        let post = !matches!(r.stage, Stage::Bp | Stage::Unresolved);
        if post {
            self.post += 1;
            match r.stage {
                Stage::Osd0 => self.osd0 += 1,
                Stage::OsdW => self.higher += 1,
                Stage::Fallback => self.fallback += 1,
                _ => {}
            }
            if r.corollary == Some(true) {
                self.corollary += 1;
            }
            if let Some(f) = r.effective_dimension(m, n) {
                self.dims30 += u64::from(f <= 0.3);
                self.dims20 += u64::from(f <= 0.2);
            }
        }
        let b = &mut self.batch;
        b.count += 1;
        b.bp_us += r.t_bp_us;
        b.bp_iters += r.bp_iters as u64;
        if post {
            b.post_us += r.t_post_us;
            b.post_calls += 1;
        }
        if b.count == TIMING_BATCH {
            self.close_batch();
        }
    }

    fn close_batch(&mut self) {
        let b = std::mem::take(&mut self.batch);
        if b.bp_iters > 0 {
            self.bp_iter_batches.push(b.bp_us / b.bp_iters as f64);
        }
        if b.post_calls > 0 {
            self.post_batches.push(b.post_us / b.post_calls as f64);
        }
    }

    fn finish(mut self, code: &StabilizerCode, epsilon: f64, pipeline: Pipeline, seed: u64, stopped_early: bool) -> AggregateStats {
        if self.batch.count > 0 {
            self.close_batch();
        }
        let t = self.trials.max(1) as f64;
        let ler = self.logical_errors as f64 / t;
        let (lo, hi) = wilson_interval(self.logical_errors, self.trials);
        let frac = |x: u64| (self.post > 0).then(|| x as f64 / self.post as f64);
        let adosd = pipeline.uses_adosd();
        AggregateStats {
            code: code.name().to_string(),
            n: code.n(),
            k: code.k(),
            d: code.d(),
            epsilon,
            pipeline,
            seed,
            trials: self.trials,
            logical_errors: self.logical_errors,
            ler,
            ler_ci_low: lo.min(ler),
            ler_ci_high: hi.max(ler),
            bp_failures: self.bp_failures,
            bp_failure_rate: self.bp_failures as f64 / t,
            post_processed: self.post,
            osd0_only_fraction: if adosd { frac(self.osd0) } else { None },
            higher_order_fraction: if adosd { frac(self.higher) } else { None },
            fallback_fraction: if adosd { frac(self.fallback) } else { None },
            corollary_fraction: if adosd { frac(self.corollary) } else { None },
            dims30_fraction: if adosd { frac(self.dims30) } else { None },
            dims20_fraction: if adosd { frac(self.dims20) } else { None },
            mean_bp_iteration_us: median(&mut self.bp_iter_batches),
            mean_post_us: median(&mut self.post_batches),
            mean_iterations_on_success: (self.successes > 0)
                .then(|| self.success_iters as f64 / self.successes as f64),
            stopped_early,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub stats: AggregateStats,
    pub records: Option<Vec<TrialRecord>>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs Monte-Carlo trials at one error rate.
pub fn run_trials(
    code: &StabilizerCode,
    epsilon: f64,
    cfg: &PipelineConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    ChannelModel { epsilon, seed: opts.seed }.validate()?;
    cfg.validate()?;
    if opts.max_trials == 0 && opts.target_logical_errors.is_none() {
        return Err(Error::Config("need at least one trial or a logical-error target".into()));
    }
    let max = if opts.max_trials == 0 { u64::MAX } else { opts.max_trials };
    Decoder::new(code, cfg, epsilon)?;
    let pool = pool(opts.workers)?;
    let mut acc = Accumulator::default();
    let mut records = opts.keep_records.then(Vec::new);
    let (m, n) = (code.m(), code.n());
    let mut start = 0u64;
    let mut stopped = false;
    'outer: while start < max {
        let end = start.saturating_add(CHUNK).min(max);
        let chunk: Vec<TrialRecord> = if opts.workers <= 1 {
            let mut dec = Decoder::new(code, cfg, epsilon)?;
            (start..end)
                .map(|t| run_trial(&mut dec, epsilon, opts.seed, t))
                .collect::<Result<_>>()?
        } else {
            pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map_init(
                        || Decoder::new(code, cfg, epsilon).expect("validated config"),
                        |dec, t| run_trial(dec, epsilon, opts.seed, t),
                    )
                    .collect::<Result<_>>()
            })?
        };
        for r in chunk {
            acc.add(&r, m, n);
            if let Some(rs) = records.as_mut() {
                rs.push(r);
            }
            if opts.target_logical_errors.is_some_and(|t| acc.logical_errors >= t) {
                stopped = acc.trials < max;
                break 'outer;
            }
        }
        start = end;
    }
    let stats = acc.finish(code, epsilon, cfg.pipeline, opts.seed, stopped);
    Ok(RunResult { stats, records })
}

/// All `3n` single-qubit Pauli errors.
pub fn weight_one_errors(n: usize) -> Vec<SymplecticVector> {
    let mut out = Vec::with_capacity(3 * n);
    for q in 0..n {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut e = SymplecticVector::zeros(n);
            e.set_pauli(q, p);
            out.push(e);
        }
    }
    out
}

/// Decodes a fixed list of errors (exhaustive mode). BP's prior uses `epsilon`.
pub fn run_exhaustive(
    code: &StabilizerCode,
    errors: &[SymplecticVector],
    epsilon: f64,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<RunResult> {
    cfg.validate()?;
    let mut dec = Decoder::new(code, cfg, epsilon)?;
    let mut acc = Accumulator::default();
    let mut records = Vec::with_capacity(errors.len());
    for (i, e) in errors.iter().enumerate() {
        if e.num_qubits() != code.n() {
            return Err(Error::LengthMismatch {
                expected: code.n(),
                actual: e.num_qubits(),
            });
        }
        let ts = trial_seed(seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(ts);
        let r = decode_error(&mut dec, e, i as u64, ts, &mut rng)?;
        acc.add(&r, code.m(), code.n());
        records.push(r);
    }
    let stats = acc.finish(code, epsilon, cfg.pipeline, seed, false);
    Ok(RunResult {
        stats,
        records: Some(records),
    })
}

/// Where two LER curves cross on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossing {
    /// Crossing between two grid points; `estimate` interpolates log-LER linearly.
    Bracketed { low: f64, high: f64, estimate: f64 },
    /// The larger code is better on the whole grid.
    AboveGrid { max: f64 },
    /// The smaller code is already better at the first grid point.
    BelowGrid { min: f64 },
    /// The curves coincide everywhere.
    Degenerate,
}

impl Crossing {
    pub fn estimate(&self) -> Option<f64> {
        match self {
            Crossing::Bracketed { estimate, .. } => Some(*estimate),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub smaller: String,
    pub larger: String,
    pub crossing: Crossing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub grid: Vec<f64>,
    /// `points[c][i]`: code `c` at `grid[i]`.
    pub points: Vec<Vec<AggregateStats>>,
    pub crossings: Vec<PairCrossing>,
}

/// `ln LER`, with a zero count replaced by half an event.
fn log_ler(s: &AggregateStats) -> f64 {
    let events = if s.logical_errors == 0 { 0.5 } else { s.logical_errors as f64 };
    (events / s.trials.max(1) as f64).ln()
}

/// Locates the first sign change of `ln LER_small - ln LER_large` on `grid`.
pub fn crossing_of(grid: &[f64], small: &[f64], large: &[f64]) -> Crossing {
    let diff: Vec<f64> = small.iter().zip(large).map(|(a, b)| a - b).collect();
    if diff.iter().all(|d| d.abs() < 1e-12) {
        return Crossing::Degenerate;
    }
    if diff.first().is_some_and(|&d| d <= 0.0) {
        return Crossing::BelowGrid { min: grid[0] };
    }
    for i in 0..diff.len().saturating_sub(1) {
        let (a, b) = (diff[i], diff[i + 1]);
        if a > 0.0 && b <= 0.0 {
            let t = a / (a - b);
            return Crossing::Bracketed {
                low: grid[i],
                high: grid[i + 1],
                estimate: grid[i] + t * (grid[i + 1] - grid[i]),
            };
        }
    }
    Crossing::AboveGrid {
        max: *grid.last().unwrap_or(&0.0),
    }
}

/// LER curves for each code over `grid` and the crossings of adjacent pairs.
pub fn threshold_scan(
    codes: &[StabilizerCode],
    grid: &[f64],
    cfg: &PipelineConfig,
    opts: &RunOptions,
) -> Result<ThresholdReport> {
    if codes.len() < 2 {
        return Err(Error::Config("threshold scan needs at least two codes".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("threshold scan needs a nonempty grid".into()));
    }
    let mut points = Vec::with_capacity(codes.len());
    for code in codes {
        let mut row = Vec::with_capacity(grid.len());
        for &eps in grid {
            let o = RunOptions {
                keep_records: false,
                ..opts.clone()
            };
            row.push(run_trials(code, eps, cfg, &o)?.stats);
        }
        points.push(row);
    }
    let crossings = codes
        .windows(2)
        .zip(points.windows(2))
        .map(|(c, p)| {
            let small: Vec<f64> = p[0].iter().map(log_ler).collect();
            let large: Vec<f64> = p[1].iter().map(log_ler).collect();
            PairCrossing {
                smaller: c[0].name().to_string(),
                larger: c[1].name().to_string(),
                crossing: crossing_of(grid, &small, &large),
            }
        })
        .collect();
    Ok(ThresholdReport {
        grid: grid.to_vec(),
        points,
        crossings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub code: String,
    pub epsilon: f64,
    pub trials: u64,
    pub bp_failures: u64,
    pub bp_iteration_us: Option<f64>,
    pub adosd_us: Option<f64>,
    pub osd2_us: Option<f64>,
    /// ADOSD time per call over BP time per iteration.
    pub adosd_over_bp_iteration: Option<f64>,
    pub adosd_over_osd2: Option<f64>,
}

/// Single-threaded timing of BP iterations, ADOSD calls and OSD-2 calls.
///
/// Post-processors run on every BP failure. The first `warmup` trials are
/// decoded but not timed; the rest are summarized as the median of
/// per-batch means.
pub fn timing_probe(
    code: &StabilizerCode,
    epsilon: f64,
    trials: u64,
    warmup: u64,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<TimingReport> {
    cfg.validate()?;
    let bp_cfg = cfg.bp_config(epsilon)?;
    let adosd_cfg = cfg.adosd_config();
    let osd2_w = 2;
    let mut bp = Bp4Decoder::for_code(code);
    let (mut bp_batches, mut ad_batches, mut osd_batches) = (Vec::new(), Vec::new(), Vec::new());
    let (mut bp_t, mut bp_it, mut ad_t, mut osd_t, mut calls, mut in_batch) = (0.0, 0u64, 0.0, 0.0, 0u64, 0usize);
    let mut failures = 0;
    let flush = |bp_t: &mut f64, bp_it: &mut u64, ad_t: &mut f64, osd_t: &mut f64, calls: &mut u64,
                 bpb: &mut Vec<f64>, adb: &mut Vec<f64>, osdb: &mut Vec<f64>| {
        if *bp_it > 0 {
            bpb.push(*bp_t / *bp_it as f64);
        }
        if *calls > 0 {
            adb.push(*ad_t / *calls as f64);
            osdb.push(*osd_t / *calls as f64);
        }
        (*bp_t, *bp_it, *ad_t, *osd_t, *calls) = (0.0, 0, 0.0, 0.0, 0);
    };
    for t in 0..warmup + trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let e = sample_error(epsilon, code.n(), &mut rng);
        let s = code.syndrome(&e);
        let t0 = Instant::now();
        let out = bp.decode_with_rng(&s, &bp_cfg, &mut rng);
        let dt_bp = t0.elapsed().as_secs_f64() * 1e6;
        let timed = t >= warmup;
        let (mut dt_ad, mut dt_osd) = (0.0, 0.0);
        if !out.is_success() {
            let t1 = Instant::now();
            let r = adosd(code, &s, &out.belief, &adosd_cfg)?;
            dt_ad = t1.elapsed().as_secs_f64() * 1e6;
            std::hint::black_box(&r);
            let t2 = Instant::now();
            let order = build_order(&out.belief, cfg.metric);
            let system = OsdSystem::for_code(code, &s, &order, &out.belief.hard_vector())?;
            let r2 = osd_w(&system, osd2_w, u64::MAX);
            dt_osd = t2.elapsed().as_secs_f64() * 1e6;
            std::hint::black_box(&r2);
        }
        if !timed {
            continue;
        }
        bp_t += dt_bp;
        bp_it += out.total_iterations as u64;
        if !out.is_success() {
            failures += 1;
            ad_t += dt_ad;
            osd_t += dt_osd;
            calls += 1;
        }
        in_batch += 1;
        if in_batch == TIMING_BATCH {
            flush(&mut bp_t, &mut bp_it, &mut ad_t, &mut osd_t, &mut calls, &mut bp_batches, &mut ad_batches, &mut osd_batches);
            in_batch = 0;
        }
    }
    if in_batch > 0 {
        flush(&mut bp_t, &mut bp_it, &mut ad_t, &mut osd_t, &mut calls, &mut bp_batches, &mut ad_batches, &mut osd_batches);
    }
    let bp_iteration_us = median(&mut bp_batches);
    let adosd_us = median(&mut ad_batches);
    let osd2_us = median(&mut osd_batches);
    Ok(TimingReport {
        code: code.name().to_string(),
        epsilon,
        trials,
        bp_failures: failures,
        bp_iteration_us,
        adosd_us,
        osd2_us,
        adosd_over_bp_iteration: adosd_us.zip(bp_iteration_us).map(|(a, b)| a / b),
        adosd_over_osd2: adosd_us.zip(osd2_us).map(|(a, b)| a / b),
    })
}

/// CSV header of `decode-curve` output.
pub const CURVE_HEADER: &str = "code,n,k,d,epsilon,pipeline,trials,logical_errors,ler,ler_ci_low,ler_ci_high,bp_failure_rate,osd0_only_fraction,dims30_fraction,mean_bp_iteration_us,mean_post_us,seed";

impl AggregateStats {
    pub fn curve_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6},{},{},{},{},{}",
            self.code,
            self.n,
            self.k,
            self.d.map_or(String::new(), |d| d.to_string()),
            self.epsilon,
            self.pipeline,
            self.trials,
            self.logical_errors,
            self.ler,
            self.ler_ci_low,
            self.ler_ci_high,
            self.bp_failure_rate,
            opt(self.osd0_only_fraction),
            opt(self.dims30_fraction),
            opt(self.mean_bp_iteration_us),
            opt(self.mean_post_us),
            self.seed
        )
        .expect("writing to a String");
        s
    }
}
