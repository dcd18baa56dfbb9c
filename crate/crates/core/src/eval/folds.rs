use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::FeatureVector;

/// Subject-level fold assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, subject_id: &str) -> Option<usize> {
        self.assignments.get(subject_id).copied()
    }

    /// Fold of every vector, in order.
    pub fn record_folds(&self, vectors: &[FeatureVector]) -> Result<Vec<usize>, EvalError> {
        vectors
            .iter()
            .map(|v| self.fold_of(&v.subject_id).ok_or_else(|| EvalError::Unassigned(v.subject_id.clone())))
            .collect()
    }

    pub fn subjects_in(&self, fold: usize) -> BTreeSet<&str> {
        self.assignments
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(s, _)| s.as_str())
            .collect()
    }
}

/// One label per subject; errors if a subject's cycles disagree.
pub fn subject_labels(vectors: &[FeatureVector]) -> Result<BTreeMap<String, u8>, EvalError> {
    let mut labels = BTreeMap::new();
    for v in vectors {
        if let Some(&l) = labels.get(&v.subject_id) {
            if l != v.label {
                return Err(EvalError::InconsistentLabel(v.subject_id.clone()));
            }
        } else {
            labels.insert(v.subject_id.clone(), v.label);
        }
    }
    Ok(labels)
}

/// Stratified folds over subjects.
///
/// Each class is shuffled and dealt round-robin. Class 1 starts where class
/// 0 stopped, so both the per-class and the total subject counts of any two
/// folds differ by at most one.
pub fn grouped_stratified_kfold(vectors: &[FeatureVector], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    subject_kfold(&subject_labels(vectors)?, k, seed)
}

pub fn subject_kfold(labels: &BTreeMap<String, u8>, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::BadK(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    let mut offset = 0;
    for class in [0u8, 1] {
        let mut ids: Vec<&String> = labels.iter().filter(|(_, &l)| l == class).map(|(s, _)| s).collect();
        if ids.len() < k {
            return Err(EvalError::TooFewSubjects {
                class,
                needed: k,
                got: ids.len(),
            });
        }
        ids.shuffle(&mut rng);
        for (i, id) in ids.iter().enumerate() {
            assignments.insert((*id).clone(), (offset + i) % k);
        }
        offset = (offset + ids.len()) % k;
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// Stratified folds over individual records, ignoring subjects. This leaks
/// a subject's cycles across train and test and exists to measure that bias.
pub fn record_wise_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadK(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(EvalError::TooFewSubjects {
                class,
                needed: k,
                got: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        for (i, &r) in idx.iter().enumerate() {
            folds[r] = (offset + i) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n0: usize, n1: usize) -> BTreeMap<String, u8> {
        (0..n0 + n1).map(|i| (format!("s{i:03}"), u8::from(i >= n0))).collect()
    }

    fn counts(plan: &FoldPlan, l: &BTreeMap<String, u8>, class: u8) -> Vec<usize> {
        let mut c = vec![0; plan.k];
        for (s, &f) in &plan.assignments {
            if l[s] == class {
                c[f] += 1;
            }
        }
        c
    }

    #[test]
    fn ten_subjects_one_per_class_per_fold() {
        let l = labels(5, 5);
        let plan = subject_kfold(&l, 5, 1).unwrap();
        assert_eq!(counts(&plan, &l, 0), vec![1; 5]);
        assert_eq!(counts(&plan, &l, 1), vec![1; 5]);
    }

    #[test]
    fn cohort_of_86_is_balanced() {
        let l = labels(54, 32);
        for seed in 0..20 {
            let plan = subject_kfold(&l, 5, seed).unwrap();
            let (c0, c1) = (counts(&plan, &l, 0), counts(&plan, &l, 1));
            for f in 0..5 {
                assert!((17..=18).contains(&(c0[f] + c1[f])));
                assert!(c0[f].abs_diff(11) <= 1 && c1[f].abs_diff(6) <= 1);
            }
        }
    }

    #[test]
    fn too_few_subjects() {
        assert_eq!(
            subject_kfold(&labels(4, 9), 5, 0),
            Err(EvalError::TooFewSubjects { class: 0, needed: 5, got: 4 })
        );
    }

    #[test]
    fn seeded_and_deterministic() {
        let l = labels(20, 12);
        assert_eq!(subject_kfold(&l, 5, 3).unwrap(), subject_kfold(&l, 5, 3).unwrap());
        assert_ne!(subject_kfold(&l, 5, 3).unwrap(), subject_kfold(&l, 5, 4).unwrap());
    }
}
