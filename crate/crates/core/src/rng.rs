//! Deterministic pseudo-random streams for instance construction.
//!
//! The stream generator is xoshiro256**, seeded through splitmix64; batch
//! members get independent streams via a splitmix64 mix of (seed, index).
//! Both algorithms use the published reference constants. Streams are
//! bit-reproducible for a given seed within this crate; cross-implementation
//! bit compatibility is not promised.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Advances `state` by one splitmix64 step and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed for member `index` of a batch rooted at `seed`.
///
/// One-shot mixing keeps derivation O(1) per member while separating the
/// member streams from each other and from the root stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ index.wrapping_mul(GOLDEN_GAMMA);
    splitmix64(&mut s)
}

/// xoshiro256** stream.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seeds the four state words from a splitmix64 run over `seed`.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw from [0, 1) with 53-bit resolution.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform01() * (hi - lo)
    }

    /// Uniform draw from [-scale, scale).
    pub fn symmetric(&mut self, scale: f64) -> f64 {
        self.uniform(-scale, scale)
    }
}
