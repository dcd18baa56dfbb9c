mod common;

use std::collections::BTreeMap;

use common::{fingerprint_cohort, pairwise_auc, random_cohort};
use ppg_diabetes::eval::{
    cross_validate, cross_validate_record_wise, figures::report_figures, grouped_stratified_kfold, record_wise_kfold, roc_auc,
    split_subjects, subject_kfold, EvalConfig, EvaluationReport,
};
use ppg_diabetes::features::FeatureVector;
use ppg_diabetes::models::{ModelConfig, ModelKind};
use ppg_diabetes::pipeline::{run, PipelineConfig};
use ppg_diabetes::synth::{generate, SynthSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn no_importance() -> EvalConfig {
    EvalConfig {
        permutation_repeats: 0,
        ..Default::default()
    }
}

fn fast_models() -> ModelConfig {
    let mut m = ModelConfig::default();
    m.gbt.rounds = 30;
    m.gbt.max_depth = 4;
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trapezoid_auc_equals_pair_count(
        raw in prop::collection::vec((0u8..12, any::<bool>()), 2..60),
    ) {
        // Few distinct scores so ties are common.
        let scores: Vec<f64> = raw.iter().map(|(s, _)| *s as f64 / 11.0).collect();
        let labels: Vec<u8> = raw.iter().map(|(_, l)| u8::from(*l)).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let (auc, roc) = roc_auc(&scores, &labels).unwrap();
        prop_assert!((auc - pairwise_auc(&scores, &labels)).abs() <= 1e-12);
        prop_assert_eq!((roc[0].fpr, roc[0].tpr), (0.0, 0.0));
        let last = roc.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        prop_assert!(roc.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
    }

    #[test]
    fn folds_are_balanced(n0 in 5usize..60, n1 in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
        let labels: BTreeMap<String, u8> = (0..n0 + n1).map(|i| (format!("{i}"), u8::from(i >= n0))).collect();
        let plan = subject_kfold(&labels, k, seed).unwrap();
        let mut per = vec![[0usize; 2]; k];
        for (s, &f) in &plan.assignments {
            per[f][labels[s] as usize] += 1;
        }
        for c in 0..2 {
            let v: Vec<usize> = per.iter().map(|p| p[c]).collect();
            prop_assert!(v.iter().max().unwrap() - v.iter().min().unwrap() <= 1);
        }
        let tot: Vec<usize> = per.iter().map(|p| p[0] + p[1]).collect();
        prop_assert!(tot.iter().max().unwrap() - tot.iter().min().unwrap() <= 1);
    }
}

#[test]
fn no_subject_crosses_a_split_in_200_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let v = random_cohort(&mut rng);
        let k = rng.random_range(2..=5);
        let Ok(plan) = grouped_stratified_kfold(&v, k, rng.random()) else {
            continue;
        };
        let folds = plan.record_folds(&v).unwrap();
        for f in 0..k {
            let (train, test) = split_subjects(&v, &folds, f);
            assert!(train.is_disjoint(&test), "plan {checked} fold {f}");
            assert!(!test.is_empty());
        }
        checked += 1;
    }
}

/// Shuffle subject labels (not cycle labels) so no feature carries signal.
fn permute_subject_labels(v: &[FeatureVector], rng: &mut impl Rng) -> Vec<FeatureVector> {
    let mut ids: Vec<&str> = v.iter().map(|r| r.subject_id.as_str()).collect();
    ids.dedup();
    let mut labels: Vec<u8> = ids.iter().map(|id| v.iter().find(|r| r.subject_id == *id).unwrap().label).collect();
    labels.shuffle(rng);
    let map: BTreeMap<&str, u8> = ids.into_iter().zip(labels).collect();
    v.iter()
        .map(|r| FeatureVector {
            label: map[r.subject_id.as_str()],
            ..r.clone()
        })
        .collect()
}

#[test]
fn permuted_labels_give_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = fingerprint_cohort(&mut rng, 20, 6, 8, 2.0);
    for kind in ModelKind::ALL {
        let mut aucs = Vec::new();
        for seed in 0..5 {
            let v = permute_subject_labels(&base, &mut rng);
            let plan = grouped_stratified_kfold(&v, 5, seed).unwrap();
            let r = cross_validate(&v, &plan, kind, &fast_models(), &no_importance()).unwrap();
            aucs.push(r.mean("auc").unwrap());
        }
        let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
        assert!((0.3..=0.7).contains(&mean), "{kind:?} {aucs:?}");
    }
}

#[test]
fn record_wise_splits_are_optimistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = fingerprint_cohort(&mut rng, 20, 8, 40, 0.0);
    let labels: Vec<u8> = v.iter().map(|r| r.label).collect();
    for kind in ModelKind::ALL {
        let plan = grouped_stratified_kfold(&v, 5, 1).unwrap();
        let grouped = cross_validate(&v, &plan, kind, &fast_models(), &no_importance()).unwrap();
        let folds = record_wise_kfold(&labels, 5, 1).unwrap();
        let leaky = cross_validate_record_wise(&v, &folds, 5, kind, &fast_models(), &no_importance(), 1).unwrap();
        let (g, l) = (grouped.mean("auc").unwrap(), leaky.mean("auc").unwrap());
        assert!(l >= g + 0.05, "{kind:?}: leaky {l:.3} grouped {g:.3}");
    }
}

fn small_run() -> EvaluationReport {
    let data = generate(&SynthSpec {
        n_non_diabetic: 6,
        n_diabetic: 6,
        segments_per_subject: 2,
        noise_level: 0.02,
        seed: 3,
        ..Default::default()
    });
    let mut cfg = PipelineConfig::default();
    cfg.model = fast_models();
    cfg.eval.permutation_repeats = 2;
    run(&data.records, &cfg).unwrap().1
}

#[test]
fn reports_are_reproducible() {
    let a = small_run();
    let b = small_run();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.hash(), b.hash());

    let back = EvaluationReport::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    assert_eq!(report_figures(&back), report_figures(&a));
    assert!(report_figures(&a).iter().any(|(n, _)| n == "mean_cycles.svg"));
}
