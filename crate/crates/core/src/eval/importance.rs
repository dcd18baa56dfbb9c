use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::roc_auc;
use super::EvalError;
use crate::models::Model;

fn auc_of(model: &Model, x: &[Vec<f64>], y: &[u8]) -> Result<f64, EvalError> {
    Ok(roc_auc(&model.predict_many(x)?, y)?.0)
}

/// AUC drop per feature when its column is shuffled within `x`, averaged
/// over `repeats` seeded shuffles.
pub fn permutation_importance(model: &Model, x: &[Vec<f64>], y: &[u8], repeats: usize, seed: u64) -> Result<Vec<f64>, EvalError> {
    importance_with(model, x, y, repeats, |feature, repeat, order| {
        let stream = seed ^ ((feature as u64) << 32 | repeat as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(stream));
    })
}

/// Same as [`permutation_importance`] with a caller-supplied permutation of
/// row indices for each (feature, repeat).
pub fn importance_with(
    model: &Model,
    x: &[Vec<f64>],
    y: &[u8],
    repeats: usize,
    mut permute: impl FnMut(usize, usize, &mut [usize]),
) -> Result<Vec<f64>, EvalError> {
    let Some(d) = x.first().map(Vec::len) else {
        return Err(EvalError::EmptyInput);
    };
    let baseline = auc_of(model, x, y)?;
    let mut shuffled = x.to_vec();
    let mut out = Vec::with_capacity(d);
    for f in 0..d {
        let mut total = 0.0;
        for r in 0..repeats {
            let mut order: Vec<usize> = (0..x.len()).collect();
            permute(f, r, &mut order);
            for (row, &src) in shuffled.iter_mut().zip(&order) {
                row[f] = x[src][f];
            }
            total += baseline - auc_of(model, &shuffled, y)?;
        }
        for (row, orig) in shuffled.iter_mut().zip(x) {
            row[f] = orig[f];
        }
        out.push(if repeats == 0 { 0.0 } else { total / repeats as f64 });
    }
    Ok(out)
}
