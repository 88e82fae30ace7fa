//! Seeded, platform-independent random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Independent sub-streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sampling,
    Synthetic,
    Oracle,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Sampling => 1,
            Stream::Synthetic => 2,
            Stream::Oracle => 3,
        }
    }
}

/// ChaCha8 keyed by the seed, with the ChaCha stream id selecting the sub-stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Self::with_stream_id(seed, stream.id())
    }

    /// Sub-stream by raw id, for callers that need many independent streams
    /// (one per sweep point or per trial block).
    pub fn with_stream_id(seed: u64, id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(id);
        Self { inner }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `m` distinct indices from `0..n`, uniform over m-subsets.
pub fn sample_without_replacement(rng: &mut RngStream, n: usize, m: usize) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::SampleTooLarge { m, n });
    }
    if m == 0 {
        return Err(Error::EmptySample);
    }
    Ok(rand::seq::index::sample(rng, n, m).into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn full_draw_is_a_permutation() {
        let mut r = RngStream::new(7, Stream::Sampling);
        let s: BTreeSet<usize> = sample_without_replacement(&mut r, 50, 50).unwrap().into_iter().collect();
        assert_eq!(s, (0..50).collect());
    }

    #[test]
    fn single_draws_cover_range_uniformly() {
        let mut r = RngStream::new(3, Stream::Sampling);
        let mut counts = [0usize; 4];
        for _ in 0..8000 {
            let s = sample_without_replacement(&mut r, 4, 1).unwrap();
            assert_eq!(s.len(), 1);
            counts[s[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 - 2000.0).abs() < 200.0, "{counts:?}");
        }
    }

    #[test]
    fn deterministic_and_distinct() {
        let a = sample_without_replacement(&mut RngStream::new(11, Stream::Sampling), 100, 10).unwrap();
        let b = sample_without_replacement(&mut RngStream::new(11, Stream::Sampling), 100, 10).unwrap();
        assert_eq!(a, b);
        let set: BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), 10);
        let c = sample_without_replacement(&mut RngStream::new(11, Stream::Oracle), 100, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_large() {
        let mut r = RngStream::new(0, Stream::Sampling);
        assert_eq!(
            sample_without_replacement(&mut r, 3, 4),
            Err(Error::SampleTooLarge { m: 4, n: 3 })
        );
    }
}
