//! Fiducial points and the morphological features of a single beat.

use ppg_diabetes::dsp::PulseCycle;
use ppg_diabetes::features::{detect_fiducials, extract_features, FeatureCatalog};
use ppg_diabetes::synth::{single_beat, PulseShape};

fn main() {
    let fs = 1000.0;
    let cycle = PulseCycle::from_samples("demo", single_beat(&PulseShape::default(), 0.85, fs), fs);
    let f = detect_fiducials(&cycle).expect("well-formed beat");
    println!("onset  t={:.4}s v={:.4}", f.onset.t, f.onset.v);
    println!("peak   t={:.4}s v={:.4}", f.peak.t, f.peak.v);
    println!("d1 max t={:.4}s  d1 min t={:.4}s", f.d1_max.t, f.d1_min.t);
    println!("d2 a/b/e t={:.4}/{:.4}/{:.4}s", f.d2_a.t, f.d2_b.t, f.d2_e.t);
    match (f.notch, f.diastolic_peak) {
        (Some(n), Some(d)) => println!("notch  t={:.4}s, diastolic peak t={:.4}s", n.t, d.t),
        _ => println!("no dicrotic notch"),
    }

    let catalog = FeatureCatalog::standard();
    let values = extract_features(&cycle, &catalog).expect("features defined");
    println!("\n{} features; a few of them:", values.len());
    for name in ["AID", "DID", "AS", "PI", "der_1_PI", "der_1_AS", "W50", "T"] {
        println!("  {name:<10} {:.6}", values[catalog.index_of(name).unwrap()]);
    }
}
