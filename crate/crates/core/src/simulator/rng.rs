//! The trace generator's random source.
//!
//! A 64-bit linear congruential generator with Knuth's MMIX constants:
//!
//! ```text
//! state' = state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
//! ```
//!
//! The state is seeded directly with the 64-bit seed. Each draw advances the
//! state once and uses its top 53 bits as a uniform in `[0, 1)`. Every other
//! distribution is derived from those uniforms as documented on each method,
//! so a trace can be regenerated bit-for-bit in any language.

const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
const INCREMENT: u64 = 1_442_695_040_888_963_407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]`: `lo + floor(u * (hi - lo + 1))`.
    pub fn range_u64(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        lo + ((self.next_f64() * span) as u64).min(hi - lo)
    }

    /// Uniform real in `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Standard normal by Box-Muller, consuming two uniforms
    /// (`u1 = 1 - next`, `u2 = next`) and returning the cosine branch.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index drawn from a discrete distribution by inverse CDF.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.next_f64();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}
