//! The toolkit-wide deterministic random source.
//!
//! Everything seeded flows through this splitmix-style 64-bit stream, so
//! results are reproducible across platforms and never depend on ambient
//! state. Sub-streams derived with [`SplitMix64::stream`] keep concurrent
//! work (one stream per product, keyed by index) independent of scheduling.

/// SplitMix64 generator (Steele, Lea, Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derives an independent stream for `(seed, index)`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut base = SplitMix64::new(seed);
        let a = base.next_u64();
        let mut salt = SplitMix64::new(index.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1));
        SplitMix64::new(a ^ salt.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`. The modulo bias is irrelevant at
    /// benchmark scales and keeps the draw sequence trivially portable.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "empty range");
        (self.next_u64() % bound as u64) as usize
    }

    /// Bernoulli draw with the given probability.
    pub fn chance(&mut self, probability: f64) -> bool {
        if probability <= 0.0 {
            return false;
        }
        if probability >= 1.0 {
            return true;
        }
        ((self.next_u64() >> 11) as f64 / (1u64 << 53) as f64) < probability
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
