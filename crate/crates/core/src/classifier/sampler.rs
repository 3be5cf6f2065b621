use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// One epoch of balanced batches: every batch holds `batch_size / 2` items
/// from each pool. The larger pool is covered in shuffled order (topped up
/// from a fresh shuffle when it does not divide evenly); the smaller pool is
/// drawn with replacement.
pub fn balanced_epoch(
    annotated: &[usize],
    control: &[usize],
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<usize>>> {
    if annotated.is_empty() || control.is_empty() {
        return Err(Error::InvalidArgument("balanced sampling needs two non-empty pools".into()));
    }
    if batch_size == 0 || batch_size % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "balanced batch size must be even and positive, got {batch_size}"
        )));
    }
    let half = batch_size / 2;
    let annotated_larger = annotated.len() >= control.len();
    let (large, small) = if annotated_larger {
        (annotated, control)
    } else {
        (control, annotated)
    };
    let n_batches = large.len().div_ceil(half);
    let mut order = large.to_vec();
    order.shuffle(rng);
    while order.len() < n_batches * half {
        let mut extra = large.to_vec();
        extra.shuffle(rng);
        let need = n_batches * half - order.len();
        order.extend(extra.into_iter().take(need));
    }
    let mut batches = Vec::with_capacity(n_batches);
    for chunk in order.chunks(half) {
        let drawn: Vec<usize> = (0..half).map(|_| small[rng.random_range(0..small.len())]).collect();
        let (a, c) = if annotated_larger {
            (chunk.to_vec(), drawn)
        } else {
            (drawn, chunk.to_vec())
        };
        let mut batch = a;
        batch.extend(c);
        batches.push(batch);
    }
    Ok(batches)
}

/// Seeded iterator over epochs of balanced batches.
pub struct BalancedBatches<'a> {
    annotated: &'a [usize],
    control: &'a [usize],
    batch_size: usize,
    rng: ChaCha8Rng,
}

pub fn balanced_batches<'a>(
    annotated: &'a [usize],
    control: &'a [usize],
    batch_size: usize,
    seed: u64,
) -> Result<BalancedBatches<'a>> {
    use rand::SeedableRng;
    // validate eagerly so construction fails, not the first epoch
    balanced_epoch(annotated, control, batch_size, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(BalancedBatches {
        annotated,
        control,
        batch_size,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl BalancedBatches<'_> {
    pub fn next_epoch(&mut self) -> Vec<Vec<usize>> {
        balanced_epoch(self.annotated, self.control, self.batch_size, &mut self.rng)
            .expect("pools validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_batch_is_half_and_half() {
        let annotated: Vec<usize> = (0..10).collect();
        let control: Vec<usize> = (10..1010).collect();
        let mut it = balanced_batches(&annotated, &control, 8, 5).unwrap();
        let epoch = it.next_epoch();
        assert_eq!(epoch.len(), 250);
        let mut seen = HashSet::new();
        for b in &epoch {
            assert_eq!(b.len(), 8);
            assert_eq!(b.iter().filter(|&&i| i < 10).count(), 4);
            seen.extend(b.iter().copied().filter(|&i| i >= 10));
        }
        assert_eq!(seen.len(), 1000, "larger pool covered once per epoch");
    }

    #[test]
    fn uneven_larger_pool_is_topped_up() {
        let annotated: Vec<usize> = (0..7).collect();
        let control: Vec<usize> = (7..10).collect();
        let epoch = balanced_epoch(&annotated, &control, 4, &mut rand::SeedableRng::seed_from_u64(1)).unwrap();
        assert_eq!(epoch.len(), 4);
        let covered: HashSet<usize> = epoch.iter().flatten().copied().filter(|&i| i < 7).collect();
        assert_eq!(covered.len(), 7);
    }

    #[test]
    fn deterministic_and_validated() {
        let a: Vec<usize> = (0..20).collect();
        let c: Vec<usize> = (20..25).collect();
        let mut x = balanced_batches(&a, &c, 6, 9).unwrap();
        let mut y = balanced_batches(&a, &c, 6, 9).unwrap();
        assert_eq!(x.next_epoch(), y.next_epoch());
        assert_eq!(x.next_epoch(), y.next_epoch());
        assert!(balanced_batches(&a, &[], 6, 0).is_err());
        assert!(balanced_batches(&a, &c, 5, 0).is_err());
    }
}
