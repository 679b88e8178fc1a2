//! Stratified k-fold cross-validation producing one out-of-fold
//! probability per sample.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pairs::PairDataset;

use super::{fit, FeatureMatrix, LearnerConfig};

/// Assigns each sample to a fold: samples are shuffled under `rng_seed`,
/// then dealt round-robin class by class with a shared rotation, so fold
/// sizes differ by at most one and class proportions stay balanced.
pub fn stratified_folds(labels: &[u8], folds: usize, rng_seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    order.shuffle(&mut rng);

    let mut assignment = vec![0usize; labels.len()];
    let mut cursor = 0usize;
    for class in [1u8, 0u8] {
        for &i in order.iter().filter(|&&i| labels[i] == class) {
            assignment[i] = cursor % folds;
            cursor += 1;
        }
    }
    assignment
}

/// Trains on all-but-one fold and predicts the held-out fold, for every
/// fold, writing `oof_probability` on each sample exactly once.
pub fn cross_val_oof(
    dataset: &mut PairDataset,
    config: &LearnerConfig,
    folds: usize,
) -> Result<()> {
    config.validate()?;
    let n = dataset.len();
    if folds < 2 || n < folds {
        return Err(Error::TooFewSamples { folds, samples: n });
    }
    let labels: Vec<u8> = dataset.samples.iter().map(|s| s.label).collect();
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClassDataset);
    }

    let assignment = stratified_folds(&labels, folds, config.rng_seed);
    for fold in 0..folds {
        let train_rows: Vec<&[f64; 3]> = dataset
            .samples
            .iter()
            .zip(&assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(s, _)| &s.features)
            .collect();
        let train_labels: Vec<u8> = labels
            .iter()
            .zip(&assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(&y, _)| y)
            .collect();
        let x = FeatureMatrix::from_rows(&train_rows)?;
        let fold_config = LearnerConfig {
            rng_seed: super::derive_seed(config.rng_seed, 0x5eed_0000 + fold as u64),
            ..config.clone()
        };
        let model = fit(&x, &train_labels, &fold_config)?;
        for (sample, &f) in dataset.samples.iter_mut().zip(&assignment) {
            if f == fold {
                sample.oof_probability = Some(model.predict_proba(&sample.features)?);
            }
        }
    }
    Ok(())
}
