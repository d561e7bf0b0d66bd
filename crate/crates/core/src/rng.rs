//! Seeded pseudo-random number generation with a fixed, documented recurrence.
//!
//! Golden values in tests and exported datasets depend on this stream staying
//! bit-identical across platforms and releases, so the generator is written
//! out explicitly instead of delegating to an external RNG crate.

/// 64-bit linear congruential generator.
///
/// Recurrence: `state' = state * 6364136223846793005 + 1442695040888963407`
/// (Knuth's MMIX multiplier). Outputs are the upper 32 bits of the state,
/// which have far better statistical quality than the low bits.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    const MUL: u64 = 6364136223846793005;
    const INC: u64 = 1442695040888963407;

    /// Seed the generator. The seed is passed through a SplitMix64
    /// finalizer first: without it, sequential seeds (0, 1, 2, ...) start
    /// from correlated states and the first few outputs share low bits.
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        Lcg { state: z ^ (z >> 31) }
    }

    fn step(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MUL).wrapping_add(Self::INC);
        self.state
    }

    /// Next 32 uniform bits, widened to u64.
    pub fn next_u32(&mut self) -> u64 {
        self.step() >> 32
    }

    /// Uniform value in `[0, n)`. `n` must be nonzero.
    ///
    /// Uses a plain modulus; the bias for the small ranges used here
    /// (< 2^20) is below 2^-12 and the mapping is frozen by golden tests.
    pub fn next_range(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u32() % n
    }

    /// Uniform f64 in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / (1u64 << 32) as f64
    }

    /// Fisher-Yates shuffle, in place.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_range(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// FNV-1a over a sequence of byte strings, used to derive sub-seeds from a
/// base seed plus structural context (step index, argument name, ...).
pub fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for part in parts {
        for &byte in *part {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        // Separator byte so ("ab","c") and ("a","bc") hash differently.
        hash ^= 0xff;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Derive a child seed from a base seed and a context label plus index.
pub fn derive_seed(base: u64, label: &str, index: u64) -> u64 {
    fnv1a(&[&base.to_le_bytes(), label.as_bytes(), &index.to_le_bytes()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Lcg::new(42);
        let mut b = Lcg::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = Lcg::new(1);
        let mut b = Lcg::new(2);
        let same = (0..32).filter(|_| a.next_u32() == b.next_u32()).count();
        assert!(same < 4);
    }

    #[test]
    fn range_stays_in_bounds() {
        let mut rng = Lcg::new(7);
        for _ in 0..1000 {
            assert!(rng.next_range(13) < 13);
        }
    }

    #[test]
    fn coin_flip_is_roughly_fair() {
        let mut rng = Lcg::new(1234);
        let heads: u64 = (0..10_000).map(|_| rng.next_range(2)).sum();
        assert!((4800..=5200).contains(&heads), "heads={heads}");
    }

    /// Regression pin: raw sequential seeds must give balanced first draws
    /// (callers pass loop indices straight in as seeds).
    #[test]
    fn sequential_seeds_have_balanced_first_outputs() {
        let ones: u64 = (0..1000).map(|i| Lcg::new(i).next_range(2)).sum();
        assert!((420..=580).contains(&ones), "ones={ones}");
    }

    #[test]
    fn derive_seed_separates_contexts() {
        assert_ne!(derive_seed(42, "arg", 0), derive_seed(42, "arg", 1));
        assert_ne!(derive_seed(42, "arg", 0), derive_seed(42, "path", 0));
        assert_eq!(derive_seed(42, "arg", 3), derive_seed(42, "arg", 3));
    }
}
