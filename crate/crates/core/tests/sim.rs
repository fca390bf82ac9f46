use qosd::codes::{rotated_surface, rotated_toric};
use qosd::sim::{
    run_exhaustive, run_trials, threshold_scan, timing_probe, weight_one_errors, Crossing, Pipeline,
    PipelineConfig, RunOptions, Stage,
};

#[test]
fn exhaustive_weight_one_on_d3() {
    let code = rotated_surface(3).unwrap();
    let errors = weight_one_errors(code.n());
    assert_eq!(errors.len(), 27);
    let r = run_exhaustive(&code, &errors, 0.01, &PipelineConfig::default(), 0).unwrap();
    assert_eq!(r.stats.trials, 27);
    assert_eq!(r.stats.logical_errors, 0);
}

#[test]
fn every_pipeline_yields_valid_estimates() {
    let code = rotated_toric(4).unwrap();
    for p in Pipeline::ALL {
        let mut cfg = PipelineConfig::with_pipeline(p);
        cfg.alpha_sequence = vec![1.2, 1.0, 0.8];
        // run_trials errors out on any estimate that misses its syndrome
        let r = run_trials(&code, 0.1, &cfg, &RunOptions { max_trials: 200, seed: 2, keep_records: true, ..Default::default() })
            .unwrap();
        for rec in r.records.unwrap() {
            let post = !matches!(rec.stage, Stage::Bp | Stage::Unresolved);
            assert_eq!(post, rec.osd_order.is_some(), "{p}: {rec:?}");
            if matches!(p, Pipeline::Bp | Pipeline::Ambp) {
                assert!(matches!(rec.stage, Stage::Bp | Stage::Unresolved));
            }
        }
    }
}

#[test]
fn stage_fractions_sum_to_one() {
    let code = rotated_surface(7).unwrap();
    let r = run_trials(&code, 0.06, &PipelineConfig::default(), &RunOptions { max_trials: 3000, seed: 5, ..Default::default() })
        .unwrap()
        .stats;
    assert!(r.post_processed > 100);
    let total = r.osd0_only_fraction.unwrap() + r.higher_order_fraction.unwrap() + r.fallback_fraction.unwrap();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(r.dims20_fraction.unwrap() <= r.dims30_fraction.unwrap());
}

#[test]
fn ler_grows_with_error_rate() {
    let code = rotated_surface(3).unwrap();
    let cfg = PipelineConfig::default();
    let grid = [0.02, 0.08, 0.2];
    let stats: Vec<_> = grid
        .iter()
        .map(|&e| run_trials(&code, e, &cfg, &RunOptions { max_trials: 4000, seed: 8, ..Default::default() }).unwrap().stats)
        .collect();
    for w in stats.windows(2) {
        assert!(w[0].ler_ci_high < w[1].ler_ci_low, "{} vs {}", w[0].ler, w[1].ler);
    }
}

#[test]
fn identical_codes_have_no_crossing() {
    let code = rotated_surface(3).unwrap();
    let report = threshold_scan(
        &[code.clone(), code],
        &[0.05, 0.1],
        &PipelineConfig::default(),
        &RunOptions { max_trials: 300, seed: 1, ..Default::default() },
    )
    .unwrap();
    assert_eq!(report.crossings[0].crossing, Crossing::Degenerate);
}

#[test]
fn single_point_grid_is_open() {
    let report = threshold_scan(
        &[rotated_surface(3).unwrap(), rotated_surface(5).unwrap()],
        &[0.05],
        &PipelineConfig::default(),
        &RunOptions { max_trials: 2000, seed: 1, ..Default::default() },
    )
    .unwrap();
    assert!(report.crossings[0].crossing.estimate().is_none());
}

#[test]
fn timing_without_post_processing_is_absent() {
    let code = rotated_surface(3).unwrap();
    let t = timing_probe(&code, 0.0, 50, 5, &PipelineConfig::default(), 0).unwrap();
    assert_eq!(t.bp_failures, 0);
    assert!(t.adosd_us.is_none() && t.osd2_us.is_none() && t.adosd_over_bp_iteration.is_none());
    assert!(t.bp_iteration_us.is_some());
}
