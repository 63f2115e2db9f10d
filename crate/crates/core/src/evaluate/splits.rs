// SPDX-License-Identifier: MIT OR Apache-2.0

//! Label-stratified train/test splits and folds.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::dataset::BinaryClass;

fn members_by_class(labels: &[BinaryClass], rng: &mut ChaCha8Rng) -> [Vec<usize>; 2] {
    let mut by: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by[usize::from(l == 1)].push(i);
    }
    for c in &mut by {
        c.shuffle(rng);
    }
    by
}

/// Sends `round(test_frac · n_c)` rows of each class to the test part. Both
/// parts are returned in ascending row order.
pub fn stratified_split(
    labels: &[BinaryClass],
    test_frac: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let by = members_by_class(labels, rng);
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for members in by {
        let n_test = ((members.len() as f64) * test_frac).round() as usize;
        let n_test = n_test.min(members.len());
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Deals each class's shuffled rows round-robin into `k` folds, continuing
/// the deal across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[BinaryClass], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let by = members_by_class(labels, rng);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for members in by {
        for i in members {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn split_preserves_class_ratio() {
        let labels: Vec<u8> = (0..61).map(|i| u8::from(i % 3 == 0)).collect();
        let ones = labels.iter().filter(|&&l| l == 1).count() as f64;
        for s in 0..20 {
            let (tr, te) = stratified_split(&labels, 0.33, &mut seed::rng(s));
            assert_eq!(tr.len() + te.len(), 61);
            let te_ones = te.iter().filter(|&&i| labels[i] == 1).count() as f64;
            let expected = te.len() as f64 * ones / 61.0;
            assert!((te_ones - expected).abs() <= 1.0);
            let mut all = [tr, te].concat();
            all.sort_unstable();
            assert_eq!(all, (0..61).collect::<Vec<_>>());
        }
    }

    #[test]
    fn folds_partition_and_balance() {
        let labels: Vec<u8> = (0..23).map(|i| u8::from(i < 9)).collect();
        let folds = stratified_folds(&labels, 5, &mut seed::rng(3));
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        for f in &folds {
            let ones = f.iter().filter(|&&i| labels[i] == 1).count();
            assert!((1..=2).contains(&ones));
        }
    }
}
