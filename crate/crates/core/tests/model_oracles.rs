mod common;

use common::*;
use ppg_diabetes::models::{
    predict_logreg, train_gbt, train_logreg, ClassWeights, GbtConfig, LogRegConfig, Model, ModelConfig,
    ModelKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn logreg_matches_brute_force_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..5 {
        let t = tiny_problem(&mut rng, 10, 2, false);
        let lambda = 0.2 + 0.4 * case as f64;
        let w = ClassWeights::balanced_for(&t.y).unwrap();
        let cfg = LogRegConfig { lambda, ..Default::default() };
        let m = train_logreg(&t.x, &t.y, w, &cfg).unwrap();
        let s = sample_weights(&t.y, w);
        let z = standardize(&t.x, &s);
        let obj = |theta: &[f64]| l1_objective(&z, &t.y, &s, lambda, theta);
        let (_, best) = minimize(obj, 1 + t.x[0].len(), 12.0);
        let mut theta = vec![m.intercept];
        theta.extend(&m.weights);
        let got = obj(&theta);
        assert!((got - best).abs() <= 1e-4, "case {case}: {got} vs oracle {best}");
    }
}

#[test]
fn two_point_example_matches_oracle() {
    let x = vec![vec![-1.0], vec![1.0]];
    let y = [0, 1];
    let m = train_logreg(&x, &y, ClassWeights::UNIT, &LogRegConfig { lambda: 0.01, ..Default::default() }).unwrap();
    let s = [1.0, 1.0];
    let z = standardize(&x, &s);
    let (_, best) = minimize(|th| l1_objective(&z, &y, &s, 0.01, th), 2, 12.0);
    assert!((l1_objective(&z, &y, &s, 0.01, &[m.intercept, m.weights[0]]) - best).abs() <= 1e-4);
    assert!(predict_logreg(&m, &[1.0]).unwrap() > 0.9);
    assert!(predict_logreg(&m, &[-1.0]).unwrap() < 0.1);
}

#[test]
fn first_gbt_tree_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..20 {
        let t = tiny_problem(&mut rng, 8, 2, case % 2 == 0);
        let depth = 1 + case % 2;
        let w = ClassWeights::balanced_for(&t.y).unwrap();
        let cfg = GbtConfig { rounds: 1, max_depth: depth, ..Default::default() };
        let m = train_gbt(&t.x, &t.y, w, &cfg).unwrap();
        let s = sample_weights(&t.y, w);
        let (g, h) = first_round_gh(&t.y, &s);
        let rows: Vec<usize> = (0..t.y.len()).collect();
        let want = oracle_tree(&t.x, &g, &h, &rows, 0, depth, cfg.l2_leaf_reg);
        assert!(same_tree(&m.trees[0], 0, &want), "case {case}: {:?} vs {want:?}", m.trees[0]);
    }
}

fn cohort(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = loop {
        let t = tiny_problem(&mut rng, n, 3, false);
        if t.y.len() >= 6 {
            break t;
        }
    };
    (t.x, t.y)
}

#[test]
fn models_survive_json_exactly() {
    let (x, y) = cohort(30, 3);
    for kind in ModelKind::ALL {
        let m = Model::train(kind, &x, &y, &ModelConfig::default()).unwrap();
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        for r in &x {
            assert_eq!(back.predict(r).unwrap().to_bits(), m.predict(r).unwrap().to_bits());
        }
    }
    assert!(Model::from_json("{\"version\":99,\"model\":{}}").is_err());
}

#[test]
fn concurrent_predictions_agree_bitwise() {
    let (x, y) = cohort(30, 4);
    for kind in ModelKind::ALL {
        let m = Model::train(kind, &x, &y, &ModelConfig::default()).unwrap();
        let serial: Vec<u64> = x.iter().map(|r| m.predict(r).unwrap().to_bits()).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|_| scope.spawn(|| x.iter().map(|r| m.predict(r).unwrap().to_bits()).collect::<Vec<u64>>()))
                .collect();
            for h in handles {
                assert_eq!(h.join().unwrap(), serial);
            }
        });
    }
}

fn problems() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (4usize..25, 1usize..4).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, d), n),
            prop::collection::vec(0u8..2, n),
        )
            .prop_filter("both classes", |(_, y)| y.contains(&0) && y.contains(&1))
    })
}

fn tight(lambda: f64) -> LogRegConfig {
    LogRegConfig { lambda, tol: 1e-10, max_sweeps: 20_000 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l1_path_shrinks((x, y) in problems(), l1 in 0.05..3.0f64, l2 in 0.05..3.0f64) {
        let (hi, lo) = if l1 > l2 { (l1, l2) } else { (l2, l1) };
        prop_assume!(hi > lo);
        let w = ClassWeights::balanced_for(&y).unwrap();
        let a = train_logreg(&x, &y, w, &tight(hi)).unwrap();
        let b = train_logreg(&x, &y, w, &tight(lo)).unwrap();
        prop_assert!(a.l1_norm() <= b.l1_norm() + 1e-8, "{} > {}", a.l1_norm(), b.l1_norm());
    }

    #[test]
    fn converged_weights_satisfy_subgradient_conditions((x, y) in problems(), lambda in 0.05..3.0f64) {
        let w = ClassWeights::balanced_for(&y).unwrap();
        let m = train_logreg(&x, &y, w, &LogRegConfig { lambda, ..Default::default() }).unwrap();
        prop_assert!(m.converged);
        let s = sample_weights(&y, w);
        let z: Vec<Vec<f64>> = x.iter().map(|r| m.scaler.transform(r)).collect();
        let resid: Vec<f64> = z.iter().zip(&y).zip(&s).map(|((r, &l), si)| {
            let margin = m.intercept + r.iter().zip(&m.weights).map(|(a, b)| a * b).sum::<f64>();
            si * (1.0 / (1.0 + (-margin).exp()) - f64::from(l))
        }).collect();
        prop_assert!(resid.iter().sum::<f64>().abs() <= 1e-5);
        for j in 0..m.weights.len() {
            if m.scaler.constant[j] {
                continue;
            }
            let g: f64 = resid.iter().zip(&z).map(|(r, row)| r * row[j]).sum();
            let wj = m.weights[j];
            let violation = if wj != 0.0 { (g + lambda * wj.signum()).abs() } else { (g.abs() - lambda).max(0.0) };
            prop_assert!(violation <= 1e-5, "coordinate {j}: {violation}");
        }
    }

    #[test]
    fn affine_rescaling_leaves_probabilities((x, y) in problems(), a in prop_oneof![0.1..10.0f64, -10.0..-0.1f64], c in -50.0..50.0f64) {
        let w = ClassWeights::balanced_for(&y).unwrap();
        let cfg = LogRegConfig { lambda: 0.5, ..Default::default() };
        let base = train_logreg(&x, &y, w, &cfg).unwrap();
        let moved: Vec<Vec<f64>> = x.iter().map(|r| {
            let mut r = r.clone();
            r[0] = a * r[0] + c;
            r
        }).collect();
        let m = train_logreg(&moved, &y, w, &cfg).unwrap();
        for (r, rm) in x.iter().zip(&moved) {
            let (p, q) = (predict_logreg(&base, r).unwrap(), predict_logreg(&m, rm).unwrap());
            prop_assert!((p - q).abs() <= 1e-9, "{p} vs {q}");
        }
    }
}
