//! Self-contained pseudo-random number generation.
//!
//! Instance generation must be reproducible bit-for-bit across platforms and
//! library versions, so the generator is implemented here from its constants
//! rather than taken from a crate.
//!
//! * **SplitMix64** (state increment `0x9E3779B97F4A7C15`, finalizer
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!   z *= 0x94D049BB133111EB; z ^= z >> 31`) expands a 64-bit seed.
//! * **xoshiro256\*\*** is the stream generator. Its four state words are the
//!   first four SplitMix64 outputs from the seed. Output is
//!   `rotl(s1 * 5, 7) * 9`.
//! * [`mix`]`(master, i)` is the `(i + 1)`-th SplitMix64 output starting from
//!   state `master`, i.e. `finalize(master + (i + 1) * 0x9E3779B97F4A7C15)`
//!   with wrapping arithmetic. It derives independent per-instance seeds.
//! * [`Xoshiro256StarStar::next_f64`] takes the top 53 bits: `(x >> 11) * 2^-53`,
//!   a value in `[0, 1)`.
//! * [`Xoshiro256StarStar::below`] draws from `{0, …, bound-1}` by rejection:
//!   draws `x` until `x < bound * floor(2^64 / bound)`, then returns `x % bound`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix_finalize(self.state)
    }
}

/// Derives the `index`-th child seed of `master`.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix_finalize(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        Xoshiro256StarStar { s }
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

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`. Panics if `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // bound * floor(2^64 / bound), computed without overflow
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }
}
