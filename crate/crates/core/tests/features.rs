use bvpain_core::dataset::segment_windows;
use bvpain_core::features::{extract_dataset, extract_subject, feature_names, FeatureConfig, FEATURE_COUNT};
use bvpain_core::synth::{generate_recording, SynthConfig};

#[test]
fn forty_four_distinct_names() {
    let names = feature_names();
    assert_eq!(names.len(), FEATURE_COUNT);
    assert_eq!(FEATURE_COUNT, 44);
    let set: std::collections::BTreeSet<&String> = names.iter().collect();
    assert_eq!(set.len(), 44);
    assert_eq!(names[0], "rmssd_ms");
    assert!(names.contains(&"rr_mean_ms".to_string()));
}

#[test]
fn generator_recording_yields_finite_rows() {
    let (rec, _) = generate_recording("S01", &SynthConfig::default()).unwrap();
    let cfg = FeatureConfig::default();
    let out = extract_subject(&rec, &cfg).unwrap();
    let expected = segment_windows(220.0, 5.0, 0.5).unwrap().len();
    assert_eq!(expected, 87);
    assert_eq!(out.windows.len() + out.dropped, expected);
    assert!(out.windows.len() >= 80);
    for w in &out.windows {
        assert_eq!(w.features.len(), 44);
        assert!(w.features.iter().all(|v| v.is_finite()));
        assert_eq!(w.subject_id, "S01");
    }
    let starts: Vec<f64> = out.windows.iter().map(|w| w.window_start_s).collect();
    assert!(starts.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn extraction_is_deterministic() {
    let cfg = SynthConfig {
        duration_s: 60.0,
        epoch_scores: vec![0, 3, 8],
        seed: 4,
        ..Default::default()
    };
    let (rec, _) = generate_recording("S07", &cfg).unwrap();
    let fcfg = FeatureConfig::default();
    let (a, _) = extract_dataset(std::slice::from_ref(&rec), &fcfg).unwrap();
    let (b, _) = extract_dataset(std::slice::from_ref(&rec), &fcfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.column_names, feature_names());
    assert!(a.len() <= 23);
}

#[test]
fn invalid_config_rejected() {
    let cfg = FeatureConfig {
        overlap: 1.0,
        ..Default::default()
    };
    assert!(cfg.validate().is_err());
    let cfg = FeatureConfig {
        filter_cutoff_hz: 0.0,
        ..Default::default()
    };
    assert!(cfg.validate().is_err());
}
