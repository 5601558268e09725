use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Label;

/// Fold index per lesion, grouped by patient and stratified by patient label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }
}

/// Shuffles patients (per stratum, seeded) and deals them round-robin into
/// `k` folds. A patient is malignant when any of their lesions is. The deal
/// position carries over from the benign to the malignant stratum.
pub fn make_folds(patient_ids: &[String], labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    if patient_ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: patient_ids.len(),
            right: labels.len(),
        });
    }
    if k < 2 {
        return Err(Error::InvalidConfig(format!("fold count must be >= 2, got {k}")));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut patient_label: HashMap<&str, Label> = HashMap::new();
    for (p, &l) in patient_ids.iter().zip(labels) {
        let entry = patient_label.entry(p.as_str()).or_insert_with(|| {
            order.push(p.as_str());
            l
        });
        *entry = (*entry).max(l);
    }
    let mut strata: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
    for p in &order {
        strata[patient_label[p].as_binary() as usize].push(p);
    }
    for (s, name) in strata.iter().zip(["benign", "malignant"]) {
        if s.len() < k {
            return Err(Error::TooFewGroups(format!(
                "{} {name} patients for {k} folds",
                s.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patient_fold: HashMap<&str, usize> = HashMap::new();
    let mut next = 0usize;
    for stratum in &mut strata {
        stratum.shuffle(&mut rng);
        for p in stratum.iter() {
            patient_fold.insert(p, next % k);
            next += 1;
        }
    }
    Ok(FoldAssignment {
        k,
        seed,
        folds: patient_ids.iter().map(|p| patient_fold[p.as_str()]).collect(),
    })
}
