use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::record::RawRecord;
use super::DataError;

/// Episode-preserving train/validation split.
///
/// Episodes are shuffled with a seeded generator and the first
/// `floor(E * train_fraction)` of them go to the training side, `E` being the
/// number of distinct episodes. Frames keep their relative order inside an
/// episode. With single-frame episodes the side sizes are exactly
/// `floor(n * f)` and `n - floor(n * f)`.
pub fn split(
    records: &[RawRecord],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<RawRecord>, Vec<RawRecord>), DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidFraction(train_fraction));
    }
    if records.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let mut episodes: IndexMap<u64, Vec<&RawRecord>> = IndexMap::new();
    for r in records {
        episodes.entry(r.episode).or_default().push(r);
    }
    let mut order: Vec<usize> = (0..episodes.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (episodes.len() as f64 * train_fraction).floor() as usize;

    let collect = |idx: &[usize]| -> Vec<RawRecord> {
        idx.iter()
            .flat_map(|&i| episodes[i].iter().map(|r| (*r).clone()))
            .collect()
    };
    Ok((collect(&order[..n_train]), collect(&order[n_train..])))
}
