//! One synthetic segment with drift and noise through the signal chain:
//! low-pass, valley-anchored baseline removal, cycle cutting and validation.

use ppg_diabetes::dataset::Segment;
use ppg_diabetes::dsp::{process_segment, DspConfig};
use ppg_diabetes::synth::{synthesize_segment, PulseShape, SegmentParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = SegmentParams {
        shape: PulseShape::default(),
        heart_rate_bpm: 82.0,
        phase_s: 0.25,
        duration_s: 2.1,
        sample_rate: 1000.0,
        offset: 2000.0,
        gain: 400.0,
        drift_per_s: 20.0,
        noise_std: 8.0,
    };
    let synth = synthesize_segment(&params, &mut ChaCha8Rng::seed_from_u64(1));
    let segment = Segment::new(synth.samples.clone(), params.sample_rate).expect("finite samples");
    let out = process_segment("demo", 1, &segment, &DspConfig::default()).expect("segment long enough");

    println!("true valleys:  {:?}", synth.valley_indices);
    println!("found valleys: {:?}", out.fit.valley_indices);
    let first = out.fit.valley_indices[0];
    println!(
        "raw {:.1} -> filtered {:.1} -> corrected {:.3} at the first valley",
        segment.samples[first], out.filtered[first], out.corrected[first]
    );
    for c in &out.segmentation.accepted {
        println!(
            "accepted cycle {}..{} ({:.3} s, range {:.1})",
            c.onset_index,
            c.end_index,
            c.duration_s(),
            c.amplitude_range()
        );
    }
    for r in &out.segmentation.rejected {
        println!("rejected {}..{}: {}", r.onset_index, r.end_index, r.reason);
    }
}
