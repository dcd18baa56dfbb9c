//! Fit both classifiers on a toy problem, score held-out rows and round-trip
//! a model through JSON.

use ppg_diabetes::models::{Model, ModelConfig, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut impl Rng, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    // Class 1 is a minority shifted along the first two axes.
    let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.35))).collect();
    let x = y
        .iter()
        .map(|&l| {
            let s = l as f64;
            vec![s + rng.random_range(-1.0..1.0), 0.5 * s + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
        })
        .collect();
    (x, y)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (xtr, ytr) = sample(&mut rng, 300);
    let (xte, yte) = sample(&mut rng, 200);
    let cfg = ModelConfig::default();
    for kind in ModelKind::ALL {
        let model = Model::train(kind, &xtr, &ytr, &cfg).expect("both classes present");
        let p = model.predict_many(&xte).unwrap();
        let acc = p.iter().zip(&yte).filter(|(p, &y)| (**p >= 0.5) == (y == 1)).count() as f64 / yte.len() as f64;
        match &model {
            Model::Logreg(m) => println!("logreg: weights {:?}, {} sweeps", m.weights, m.sweeps),
            Model::Gbt(m) => println!("gbt: {} trees, final train loss {:.4}", m.trees.len(), m.train_loss.last().unwrap()),
        }
        let json = model.to_json();
        let back = Model::from_json(&json).unwrap();
        assert_eq!(back.predict_many(&xte).unwrap(), p);
        println!("  held-out accuracy {:.3}, JSON {} bytes", acc, json.len());
    }
}
