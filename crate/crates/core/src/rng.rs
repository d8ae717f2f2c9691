//! Deterministic random number generation.
//!
//! All randomness in the library flows through [`Rng`], a xoshiro256++
//! generator seeded via SplitMix64. Both algorithms are pure integer
//! arithmetic, so a given seed yields the same stream on every platform.
//! Normal deviates use the Box-Muller transform.
//!
//! References: Blackman & Vigna, "Scrambled linear pseudorandom number
//! generators" (xoshiro256++); Steele, Lea & Flood (SplitMix64).

/// xoshiro256++ generator with SplitMix64 seeding.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    /// Seed the generator. Any u64 is a valid seed, including 0.
    pub fn new(seed: u64) -> Self {
        // SplitMix64 expands the seed into the four state words.
        let mut sm = seed;
        let mut next = || {
            sm = sm.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        Rng {
            state: [next(), next(), next(), next()],
        }
    }

    /// Derive an independent child generator, e.g. one per objective.
    pub fn derive(&self, stream: u64) -> Self {
        let mut base = Rng::new(stream.wrapping_mul(0xA076_1D64_78BD_642F));
        for (s, b) in base.state.iter_mut().zip(self.state.iter()) {
            *s ^= *b;
        }
        // Decorrelate the mixed state.
        for _ in 0..4 {
            base.next_u64();
        }
        base
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.state[0]
            .wrapping_add(self.state[3])
            .rotate_left(23)
            .wrapping_add(self.state[0]);
        let t = self.state[1] << 17;
        self.state[2] ^= self.state[0];
        self.state[3] ^= self.state[1];
        self.state[1] ^= self.state[2];
        self.state[0] ^= self.state[3];
        self.state[2] ^= t;
        self.state[3] = self.state[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) by rejection, bias-free.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "below() requires a positive bound");
        let bound = bound as u64;
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    /// Standard normal deviate via the Box-Muller transform.
    pub fn normal(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            items.swap(i, self.below(i + 1));
        }
    }
}
