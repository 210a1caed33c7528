mod common;

use std::fs;

use common::{assert_same_outputs, small_config};
use pii_core::piid::{PiidContainer, SectionKind};
use pii_harness::scenarios::{artifacts_exist, reconstruct, Data};
use pii_harness::{run_experiment, Algorithm, ExperimentConfig, Scene};

#[test]
fn every_scenario_is_deterministic() {
    for scenario in ["compare-algorithms", "shift-error", "loose-support", "frames-sweep", "custom"] {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let ra = run_experiment(&small_config(scenario, &a)).unwrap();
        let rb = run_experiment(&small_config(scenario, &b)).unwrap();
        assert!(assert_same_outputs(&a, &b) > 0, "{scenario}");
        assert!(artifacts_exist(&ra, &a), "{scenario}");
        assert!(a.join("manifest.json").is_file());
        let qa: Vec<u64> = ra.records.iter().map(|r| r.quality.to_bits()).collect();
        let qb: Vec<u64> = rb.records.iter().map(|r| r.quality.to_bits()).collect();
        assert_eq!(qa, qb, "{scenario}");
    }
}

#[test]
fn record_counts_follow_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("compare-algorithms", 3),
        ("shift-error", 2),
        ("loose-support", 4),
        ("frames-sweep", 2),
        ("custom", 1),
    ];
    for (scenario, per_replicate) in cases {
        let out = dir.path().join(scenario);
        let r = run_experiment(&small_config(scenario, &out)).unwrap();
        assert_eq!(r.records.len(), 2 * per_replicate, "{scenario}");
        let csv = fs::read_to_string(out.join("quality.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * per_replicate);
        assert!(csv.lines().next().unwrap().contains("quality"));
        for rec in &r.records {
            assert!(rec.quality.is_finite() && rec.final_residual.is_finite());
        }
    }
}

#[test]
fn compare_container_holds_inputs_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config("compare-algorithms", dir.path());
    let result = run_experiment(&cfg).unwrap();
    let c = PiidContainer::load(dir.path().join(&result.records[0].container)).unwrap();
    assert_eq!(c.positions.len(), cfg.steps);
    assert_eq!(c.n_frames, 0);
    assert_eq!(c.sections_of(SectionKind::Amplitude).count(), cfg.steps + 1);
    assert_eq!(c.sections_of(SectionKind::Reconstruction).count(), 3);
    let pii = result.records.iter().find(|r| r.algorithm == "pii").unwrap();
    let stored = c
        .sections_of(SectionKind::Reconstruction)
        .find(|s| s.index == pii.section)
        .unwrap();
    assert_eq!(stored.dims.width, cfg.grid);
}

#[test]
fn zero_shift_matches_compare_run() {
    let dir = tempfile::tempdir().unwrap();
    let cmp = run_experiment(&small_config("compare-algorithms", &dir.path().join("c"))).unwrap();
    let sft = run_experiment(&small_config("shift-error", &dir.path().join("s"))).unwrap();
    for rep in 0..2 {
        let a = cmp.select(|r| r.replicate == rep && r.algorithm == "pii")[0];
        let b = sft.select(|r| r.replicate == rep && r.shift_pct == 0.0)[0];
        assert_eq!(a.quality.to_bits(), b.quality.to_bits());
        assert_eq!(a.final_residual.to_bits(), b.final_residual.to_bits());
    }
}

#[test]
fn pii_beats_long_error_reduction_on_exact_data() {
    let mut cfg = ExperimentConfig::default();
    cfg.set("object", "two-disk").unwrap();
    let scene = Scene::new(&cfg).unwrap();
    let truth = scene.truth();
    let amps = scene.exact_amplitudes(&scene.plan).unwrap();
    let pii = reconstruct(
        &scene,
        Algorithm::Pii,
        Data::Scan { plan: &scene.plan, amps: &amps, loose_px: 0 },
        20,
        &cfg,
        1,
    )
    .unwrap();
    let q = pii_harness::scenarios::score(&pii.image, &truth);
    assert!(q >= 0.9, "PII quality {q}");

    let full = pii_core::correlation::AmplitudeMap::new(
        pii_harness::scene::exact_modulus(&pii_core::fft::Fft2::new(scene.dims), &truth),
        scene.plan.len(),
    )
    .unwrap();
    let er = reconstruct(&scene, Algorithm::Er, Data::FullField(&full), 1000, &cfg, 1).unwrap();
    let (rp, re) = (*pii.residuals.last().unwrap(), *er.residuals.last().unwrap());
    assert!(rp < re, "PII residual {rp}, ER residual {re}");
}
