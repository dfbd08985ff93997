//! Deterministic seeded randomness.
//!
//! Every randomized operation in this crate draws from [`Rng`], a
//! xoshiro256** generator seeded through the splitmix64 expansion of a
//! single 64-bit seed. Independent streams are derived with
//! [`derive_seed`], so parallel workers can own non-overlapping
//! generators that replay exactly.

/// Identifies one reproducible random stream: a base seed plus a stream id.
///
/// Deriving the same `(base_seed, stream_id)` twice yields identical
/// streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        Self { base_seed, stream_id }
    }

    /// The derived 64-bit seed for this stream.
    pub fn derived(&self) -> u64 {
        derive_seed(self.base_seed, self.stream_id)
    }

    /// Generator for this stream.
    pub fn rng(&self) -> Rng {
        Rng::from_seed(self.derived())
    }

    /// A child stream: same base, id mixed from this stream's id.
    pub fn child(&self, k: u64) -> SeedSpec {
        SeedSpec::new(self.derived(), k)
    }
}

/// Mixes a base seed and a stream id into one seed.
///
/// The mixing function is the splitmix64 finalizer applied to
/// `base XOR rotate_left(stream, 32)`. The finalizer is a bijection, so
/// for a fixed base, distinct stream ids always yield distinct seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64_finalize(base ^ stream.rotate_left(32))
}

/// The splitmix64 output finalizer (Vigna's published constants).
fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One step of the splitmix64 generator, used only for state expansion.
fn splitmix64_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    splitmix64_finalize(*state)
}

/// xoshiro256** generator (Blackman & Vigna).
///
/// The 256-bit state is expanded from the 64-bit seed with splitmix64,
/// which guarantees a nonzero state for every seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
        ];
        Rng { state }
    }

    pub fn from_spec(spec: SeedSpec) -> Self {
        spec.rng()
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]`, safe as a log argument.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by rejection, without modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() requires a positive bound");
        let zone = u64::MAX - u64::MAX.wrapping_rem(bound).wrapping_add(1).wrapping_rem(bound);
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Uniform integer in `[lo, hi]` inclusive.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        if lo == hi {
            return lo;
        }
        lo + self.below(hi - lo + 1)
    }

    /// One pair of independent standard normals by the Box-Muller
    /// transform, consuming exactly two uniforms.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        (radius * angle.cos(), radius * angle.sin())
    }

    /// A single standard normal. Consumes one Box-Muller pair and
    /// discards its second component, keeping stream alignment simple.
    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    /// Fills `out` with standard normals, pair by pair; for odd lengths
    /// the final pair's second component is discarded.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        let mut i = 0;
        while i + 1 < out.len() {
            let (a, b) = self.normal_pair();
            out[i] = a;
            out[i + 1] = b;
            i += 2;
        }
        if i < out.len() {
            out[i] = self.normal_pair().0;
        }
    }

    /// `d` independent standard normal draws.
    pub fn standard_normal_vector(&mut self, d: usize) -> Vec<f64> {
        assert!(d >= 1, "dimension must be at least 1");
        let mut v = vec![0.0; d];
        self.fill_normal(&mut v);
        v
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// `d` standard normal draws from a named stream.
pub fn sample_standard_normal_vector(spec: SeedSpec, d: usize) -> Vec<f64> {
    spec.rng().standard_normal_vector(d)
}
