use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Percentages of the dev and test partitions; train receives the rest.
const DEV_PERCENT: usize = 15;
const TEST_PERCENT: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// `round(percent * n / 100)` with ties going to the even neighbour, so a
/// rounding remainder lands in train and every partition stays within one
/// item of its nominal share.
fn share(n: usize, percent: usize) -> usize {
    let num = n * percent;
    let (q, r) = (num / 100, num % 100);
    if r > 50 || (r == 50 && q % 2 == 1) {
        q + 1
    } else {
        q
    }
}

/// `(train, dev, test)` partition sizes for `n` items.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let dev = share(n, DEV_PERCENT);
    let test = share(n, TEST_PERCENT);
    (n - dev - test, dev, test)
}

/// Shuffles `0..n` with a ChaCha8 stream seeded by `seed` and cuts the result
/// into contiguous train/dev/test blocks.
pub fn split(n: usize, seed: u64) -> Result<DataSplit, CorpusError> {
    if n < 10 {
        return Err(CorpusError::TooSmall(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_train, n_dev, _) = split_sizes(n);
    let test = order.split_off(n_train + n_dev);
    let dev = order.split_off(n_train);
    Ok(DataSplit {
        seed,
        train: order,
        dev,
        test,
    })
}
