//! Deterministic counter-based random streams.
//!
//! Every random draw in the toolkit comes from a [`Stream`] keyed by a list
//! of 64-bit parts — typically `(seed, role tag, index)`. A stream's k-th
//! draw is a pure function of its key and k, so the values produced for one
//! bag, fold, or restart never depend on how many draws some other stream
//! consumed, and parallel schedules cannot change results.
//!
//! The generator is SplitMix64: output `i` is the finalizer applied to
//! `key + i * GOLDEN`. The key is derived by folding the parts through the
//! same finalizer. [`RNG_VERSION`] names this scheme; changing either the
//! mixing or the key derivation is a breaking change to every seeded output.

/// Identifies the stream scheme. Bump when draws for a given key change.
pub const RNG_VERSION: &str = "splitmix64/v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a single 64-bit key from a list of parts.
pub fn derive(parts: &[u64]) -> u64 {
    let mut key: u64 = 0x243F_6A88_85A3_08D3; // pi fraction, arbitrary nonzero
    for &p in parts {
        key = mix64(key.wrapping_add(mix64(p.wrapping_add(GOLDEN))));
    }
    key
}

/// FNV-1a hash of a string, for keying streams by names.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A keyed random stream. Cloning forks the exact position.
#[derive(Clone, Debug)]
pub struct Stream {
    key: u64,
    counter: u64,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(parts: &[u64]) -> Self {
        Stream {
            key: derive(parts),
            counter: 0,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)` via the widening-multiply reduction.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    /// Standard normal via Box-Muller; the paired value is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
