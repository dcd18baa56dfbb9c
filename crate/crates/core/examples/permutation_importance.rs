//! Permutation importance on held-out data with one informative feature,
//! some noise features and a constant column.

use ppg_diabetes::eval::permutation_importance;
use ppg_diabetes::models::{Model, ModelConfig, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(rng: &mut impl Rng, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let x = y
        .iter()
        .map(|&l| {
            let mut row = vec![rng.random_range(-1.0..1.0), l as f64 + rng.random_range(-0.7..0.7)];
            row.extend((0..3).map(|_| rng.random_range(-1.0..1.0)));
            row.push(1.0);
            row
        })
        .collect();
    (x, y)
}

fn main() {
    let names = ["noise_a", "planted", "noise_b", "noise_c", "noise_d", "constant"];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (xtr, ytr) = data(&mut rng, 300);
    let (xte, yte) = data(&mut rng, 300);
    for kind in ModelKind::ALL {
        let model = Model::train(kind, &xtr, &ytr, &ModelConfig::default()).unwrap();
        let imp = permutation_importance(&model, &xte, &yte, 20, 7).unwrap();
        println!("{}", kind.name());
        for (n, v) in names.iter().zip(&imp) {
            println!("  {n:<9} {v:+.4}");
        }
    }
}
