use proptest::prelude::*;
use qosd::bp::Schedule;
use qosd::osd::ReliabilityMetric;
use qosd::sim::{Pipeline, PipelineConfig, TRIAL_LOG_HEADER};
use qosd_cli::commands::curve_csv_header;
use qosd_cli::config::RunConfig;
use qosd_cli::{Overrides, RunArgs};

#[test]
fn curve_header_matches_golden() {
    assert_eq!(curve_csv_header(), include_str!("golden/curve_header.csv").trim_end());
}

#[test]
fn trial_log_header_matches_golden() {
    assert_eq!(TRIAL_LOG_HEADER, include_str!("golden/trial_log_header.csv").trim_end());
}

#[test]
fn empty_file_is_the_default() {
    assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
}

#[test]
fn unknown_keys_are_rejected_with_a_line() {
    let err = RunConfig::from_toml("seed = 1\nsede = 2\n").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn flags_win_over_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 5\neps = [0.1]\n[decoder]\nmax_iter = 40\n").unwrap();
    let args = RunArgs {
        config: Some(path),
        overrides: Overrides { seed: Some(9), alpha_seq: Some("1.0,-0.25,0.5".into()), ..Default::default() },
    };
    let cfg = args.resolve().unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.eps, vec![0.1]);
    assert_eq!(cfg.decoder.max_iter, 40);
    assert_eq!(cfg.decoder.alpha_sequence, vec![1.0, 0.75, 0.5]);
}

fn pipeline_config() -> impl Strategy<Value = PipelineConfig> {
    (
        prop::sample::select(Pipeline::ALL.to_vec()),
        1usize..500,
        0.1f64..2.0,
        any::<bool>(),
        prop::sample::select(vec![Schedule::Parallel, Schedule::Serial, Schedule::SerialRandomOrder]),
        prop::collection::vec(0.1f64..2.0, 1..6),
        0.5f64..1.0,
        prop::option::of(1u64..1_000_000),
        prop::option::of(0usize..5),
        0usize..4,
        prop::sample::select(vec![
            ReliabilityMetric::HardThenSoft,
            ReliabilityMetric::Marginal,
            ReliabilityMetric::Entropy,
            ReliabilityMetric::Max,
        ]),
        prop::option::of(2usize..30),
    )
        .prop_map(
            |(pipeline, max_iter, alpha, alpha_from_epsilon, schedule, alpha_sequence, theta, gamma, order, w_backup, metric, distance)| {
                PipelineConfig {
                    pipeline,
                    max_iter,
                    alpha,
                    alpha_from_epsilon,
                    schedule,
                    alpha_sequence,
                    theta,
                    gamma,
                    order,
                    w_backup,
                    metric,
                    distance,
                }
            },
        )
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(vec!["surface".to_string(), "toric".into(), "bb:144-12-12".into(), "file:codes/x.qcode".into()]),
        prop::collection::vec(2usize..20, 0..4),
        prop::collection::vec(0.0f64..0.75, 0..5),
        0u64..1_000_000,
        prop::option::of(1u64..1000),
        0u64..=i64::MAX as u64,
        0usize..64,
        prop::option::of("[a-z]{1,8}\\.csv"),
        prop::option::of("[a-z]{1,8}\\.log"),
        pipeline_config(),
    )
        .prop_map(|(code, d, eps, trials, target_logical_errors, seed, workers, out, trial_log, decoder)| RunConfig {
            code,
            d,
            eps,
            trials,
            target_logical_errors,
            seed,
            workers,
            out: out.map(Into::into),
            trial_log: trial_log.map(Into::into),
            decoder,
        })
}

proptest! {
    #[test]
    fn toml_round_trip(cfg in run_config()) {
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg, "{}", text);
        prop_assert_eq!(back.config_hash(), cfg.config_hash());
    }
}
