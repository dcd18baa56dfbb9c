use std::path::PathBuf;

use ppg_diabetes::dsp::PulseCycle;
use ppg_diabetes::features::{
    catalog_markdown, detect_fiducials, extract_features, FeatureCatalog,
};
use ppg_diabetes::synth::{single_beat, PulseShape};
use proptest::prelude::*;

const FS: f64 = 1000.0;

/// Systolic wave at 0.20 s, dicrotic wave at 0.55 s of a 1 s beat.
fn reference_shape() -> PulseShape {
    PulseShape {
        systolic_amp: 1.0,
        systolic_center: 0.20,
        systolic_width: 0.07,
        dicrotic_amp: 0.4,
        dicrotic_center: 0.55,
        dicrotic_width: 0.09,
    }
}

fn cycle(shape: &PulseShape, period: f64, fs: f64, scale: f64) -> PulseCycle {
    let x = single_beat(shape, period, fs).into_iter().map(|v| v * scale).collect();
    PulseCycle::from_samples("s", x, fs)
}

fn feature(values: &[f64], name: &str) -> f64 {
    values[FeatureCatalog::standard().index_of(name).unwrap()]
}

#[test]
fn notch_between_systolic_and_dicrotic_waves() {
    let shape = reference_shape();
    let f = detect_fiducials(&cycle(&shape, 1.0, FS, 1.0)).unwrap();
    let notch = f.notch.expect("notch");
    assert!(notch.t > 0.20 && notch.t < 0.55, "{}", notch.t);

    // Brute force on a 100 kHz grid of the same chord-detrended waveform:
    // first local minimum after the global maximum.
    let fine = single_beat(&shape, 1.0, 100_000.0);
    let peak = (0..fine.len()).fold(0, |b, i| if fine[i] > fine[b] { i } else { b });
    let m = (peak + 1..fine.len() - 1)
        .find(|&i| fine[i] < fine[i - 1] && fine[i] <= fine[i + 1])
        .unwrap();
    let brute_t = m as f64 / 100_000.0;
    assert!((notch.t - brute_t).abs() < 1e-3, "{} vs {brute_t}", notch.t);
}

#[test]
fn width_at_half_maximum_matches_threshold_scan() {
    let c = cycle(&reference_shape(), 1.0, FS, 1.0);
    let v = extract_features(&c, &FeatureCatalog::standard()).unwrap();
    assert_eq!(v.len(), 104);
    assert!(v.iter().all(|x| x.is_finite()));

    let x = &c.samples;
    let half = 0.5 * x.iter().cloned().fold(f64::MIN, f64::max);
    let first = x.iter().position(|&s| s >= half).unwrap();
    let last = x.iter().rposition(|&s| s >= half).unwrap();
    let brute = (last - first) as f64 / FS;
    assert!((feature(&v, "W50") - brute).abs() <= 0.002, "{} vs {brute}", feature(&v, "W50"));
}

#[test]
fn identical_cycles_give_identical_bits() {
    let cat = FeatureCatalog::standard();
    let c = cycle(&reference_shape(), 0.85, FS, 37.0);
    let a: Vec<u64> = extract_features(&c, &cat).unwrap().iter().map(|v| v.to_bits()).collect();
    let b: Vec<u64> = extract_features(&c.clone(), &cat).unwrap().iter().map(|v| v.to_bits()).collect();
    assert_eq!(a, b);
}

#[test]
fn features_md_is_current() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../FEATURES.md");
    let want = catalog_markdown(&FeatureCatalog::standard());
    if std::env::var_os("UPDATE_FEATURES_MD").is_some() {
        std::fs::write(&path, &want).unwrap();
    }
    let have = std::fs::read_to_string(&path).unwrap_or_default();
    assert!(
        have == want,
        "FEATURES.md is stale; rerun with UPDATE_FEATURES_MD=1 to regenerate"
    );
}

prop_compose! {
    fn shapes()(
        sw in 0.055..0.09f64,
        sc in 0.17..0.26f64,
        da in 0.28..0.5f64,
        dc in 0.50..0.60f64,
        dw in 0.07..0.10f64,
    ) -> PulseShape {
        PulseShape {
            systolic_amp: 1.0,
            systolic_center: sc,
            systolic_width: sw,
            dicrotic_amp: da,
            dicrotic_center: dc,
            dicrotic_width: dw,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn amplitude_scaling_law(shape in shapes(), period_ms in 650u32..1100, c in 0.1..10.0f64) {
        let cat = FeatureCatalog::standard();
        let period = period_ms as f64 / 1000.0;
        let base = extract_features(&cycle(&shape, period, FS, 1.0), &cat).unwrap();
        let scaled = extract_features(&cycle(&shape, period, FS, c), &cat).unwrap();
        for (def, (a, b)) in cat.defs.iter().zip(base.iter().zip(&scaled)) {
            let want = a * c.powi(def.formula.dimension().amplitude);
            let tol = 1e-9 * want.abs().max(1e-6);
            prop_assert!((b - want).abs() <= tol, "{}: {} vs {}", def.name, b, want);
        }
    }

    #[test]
    fn resampling_law(shape in shapes(), period_ms in 650u32..1100) {
        let cat = FeatureCatalog::standard();
        let period = period_ms as f64 / 1000.0;
        let at_1k = extract_features(&cycle(&shape, period, FS, 1.0), &cat).unwrap();
        let at_2k = extract_features(&cycle(&shape, period, 2.0 * FS, 1.0), &cat).unwrap();
        for (def, (a, b)) in cat.defs.iter().zip(at_1k.iter().zip(&at_2k)) {
            let dim = def.formula.dimension();
            if dim.amplitude == 0 && dim.time != 0 {
                let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-12);
                prop_assert!(rel < 0.01, "{}: {} at 1 kHz vs {} at 2 kHz", def.name, a, b);
            }
        }
    }
}
