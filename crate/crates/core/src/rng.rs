//! Deterministic random streams built on splitmix64.
//!
//! Every worker owns one [`Stream`]; nothing else advances it, so a run is
//! fully determined by the seed regardless of how workers are scheduled.

/// The splitmix64 output finalizer.
#[inline]
pub fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Offset added to the run seed before deriving per-worker streams.
pub const WORKER_STREAM_OFFSET: u64 = 0x100;

/// A splitmix64 generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream for worker `worker` of a run seeded with `seed`.
    pub fn for_worker(seed: u64, worker: usize) -> Self {
        Self::new(mix(seed
            .wrapping_add(WORKER_STREAM_OFFSET)
            .wrapping_add(worker as u64)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` by rejection, without modulo bias.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // 2^64 mod n; draws under this floor fall in the short final bucket.
        let floor = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= floor {
                return x % n;
            }
        }
    }

    pub fn below_usize(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_sequence() {
        // https://rosettacode.org/wiki/Pseudo-random_numbers/Splitmix64
        let mut s = Stream::new(1_234_567);
        assert_eq!(s.next_u64(), 6_457_827_717_110_365_317);
        assert_eq!(s.next_u64(), 3_203_168_211_198_807_973);
        assert_eq!(s.next_u64(), 9_817_491_932_198_370_423);
        assert_eq!(s.next_u64(), 4_593_380_528_125_082_431);
        assert_eq!(s.next_u64(), 16_408_922_859_458_223_821);
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = Stream::new(3);
        for n in [1u64, 2, 3, 7, 1000, u64::MAX] {
            for _ in 0..200 {
                assert!(s.below(n) < n);
            }
        }
    }

    #[test]
    fn unit_interval() {
        let mut s = Stream::new(99);
        for _ in 0..10_000 {
            let u = s.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn worker_streams_differ() {
        let mut a = Stream::for_worker(7, 0);
        let mut b = Stream::for_worker(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(Stream::for_worker(7, 2), Stream::new(mix(7 + 0x100 + 2)));
    }
}
