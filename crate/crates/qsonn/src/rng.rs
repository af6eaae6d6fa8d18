//! Deterministic random number generation.
//!
//! Everything random in this crate (weight init, batch shuffling, dropout
//! masks, synthetic splits) flows through the SplitMix64 generator below, so a
//! run is fully determined by its seeds. Dropout additionally uses the
//! stateless counter form [`unit_from_counter`], which lets a resumed training
//! run reproduce the exact masks of the uninterrupted one.

/// SplitMix64 sequential generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Combine seed components into a derived seed.
pub fn combine(parts: &[u64]) -> u64 {
    let mut acc = 0x51_7C_C1_B7_27_22_0A_95u64;
    for &p in parts {
        acc = mix64(acc.wrapping_add(GAMMA).wrapping_add(p));
    }
    acc
}

/// Stateless counter-based draw in `[0, 1)`: a pure function of its inputs.
pub fn unit_from_counter(seed: u64, stream: u64, counter: u64, index: u64) -> f64 {
    let z = mix64(combine(&[seed, stream, counter, index]));
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
