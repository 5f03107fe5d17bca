//! Deterministic random substrate.
//!
//! Every random number in the simulator comes from an [`Mt19937`] generator
//! wrapped in a [`RandomStream`], which routes all distribution sampling
//! through a single path with a fixed, documented draw pattern:
//!
//! | transform            | base draws consumed                                    |
//! |----------------------|--------------------------------------------------------|
//! | `next_u32`           | 1 word                                                 |
//! | `uniform`            | 2 words (one 53-bit uniform)                           |
//! | `uniform_int(n)`     | 1 uniform                                              |
//! | `normal`             | 1 Box–Muller pair (2 uniforms) every second call       |
//! | `lognormal`          | as `normal`                                            |
//! | `exponential`        | 1 uniform                                              |
//! | `poisson`, rate < 30 | Knuth product: k + 1 uniforms for result k             |
//! | `poisson`, rate ≥ 30 | PTRS rejection: 2 uniforms per attempt                 |
//! | `gamma`, shape ≥ 1   | Marsaglia–Tsang: per attempt 1 normal, +1 uniform if the normal is accepted as positive-cubed |
//! | `gamma`, shape < 1   | `gamma(shape + 1)` followed by 1 uniform               |
//!
//! A `RandomStream` is single-owner. Parallel workers each build their own
//! stream from a derived seed; there is no global generator.

use std::f64::consts::PI;

use thiserror::Error;

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// Rate at and above which Poisson sampling switches from Knuth's product
/// method to transformed rejection.
pub const POISSON_PTRS_THRESHOLD: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RngError {
    #[error("invalid parameter for {distribution}: {detail}")]
    Domain {
        distribution: &'static str,
        detail: String,
    },
}

fn domain(distribution: &'static str, detail: impl Into<String>) -> RngError {
    RngError::Domain {
        distribution,
        detail: detail.into(),
    }
}

/// The MT19937 generator state (Matsumoto & Nishimura, `init_genrand` seeding).
#[derive(Clone)]
pub struct Mt19937 {
    state: [u32; N],
    index: usize,
    seed: u32,
}

impl std::fmt::Debug for Mt19937 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mt19937")
            .field("seed", &self.seed)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl Mt19937 {
    pub fn new(seed: u32) -> Self {
        let mut state = [0u32; N];
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Mt19937 {
            state,
            index: N,
            seed,
        }
    }

    /// Seed this generator was created with.
    pub fn seed(&self) -> u32 {
        self.seed
    }

    /// Position within the current block of 624 words; `624` means the next
    /// draw regenerates the block.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn state_words(&self) -> &[u32; N] {
        &self.state
    }

    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.state[i] & UPPER_MASK) | (self.state[(i + 1) % N] & LOWER_MASK);
            let mut next = self.state[(i + M) % N] ^ (y >> 1);
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            self.state[i] = next;
        }
        self.index = 0;
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }
}

/// Maps two 32-bit words onto a double in [0, 1) with 53 bits of resolution.
#[inline]
pub fn words_to_uniform53(a: u32, b: u32) -> f64 {
    let hi = (a >> 5) as f64;
    let lo = (b >> 6) as f64;
    (hi * 67_108_864.0 + lo) / 9_007_199_254_740_992.0
}

/// Source of 32-bit words. Implemented by [`Mt19937`]; tests substitute
/// scripted sources to force specific words.
pub trait WordSource {
    fn next_word(&mut self) -> u32;
}

impl WordSource for Mt19937 {
    #[inline]
    fn next_word(&mut self) -> u32 {
        self.next_u32()
    }
}

/// Distribution sampling over a word source, with draw accounting.
#[derive(Debug, Clone)]
pub struct RandomStream<S = Mt19937> {
    source: S,
    cached_normal: Option<f64>,
    words_drawn: u64,
}

impl RandomStream<Mt19937> {
    pub fn seeded(seed: u32) -> Self {
        RandomStream::new(Mt19937::new(seed))
    }

    pub fn seed(&self) -> u32 {
        self.source.seed()
    }
}

impl<S: WordSource> RandomStream<S> {
    pub fn new(source: S) -> Self {
        RandomStream {
            source,
            cached_normal: None,
            words_drawn: 0,
        }
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    /// Number of 32-bit words consumed so far.
    pub fn words_drawn(&self) -> u64 {
        self.words_drawn
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.words_drawn += 1;
        self.source.next_word()
    }

    /// Uniform on [0, 1), always consuming exactly two words.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let a = self.next_u32();
        let b = self.next_u32();
        words_to_uniform53(a, b)
    }

    /// Uniform on [low, high).
    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Uniform integer in {0, .., n - 1}; `n` must be positive.
    pub fn uniform_int(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_int over an empty range");
        let k = (self.uniform() * n as f64) as usize;
        k.min(n - 1)
    }

    fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        // 1 - u1 lies in (0, 1], so the logarithm is finite.
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> Result<f64, RngError> {
        if !mean.is_finite() || !std.is_finite() || std < 0.0 {
            return Err(domain("normal", format!("mean={mean}, std={std}")));
        }
        let z = self.standard_normal();
        if std == 0.0 {
            return Ok(mean);
        }
        Ok(mean + std * z)
    }

    /// `exp(normal(mu_log, sigma_log))`.
    pub fn lognormal(&mut self, mu_log: f64, sigma_log: f64) -> Result<f64, RngError> {
        if !mu_log.is_finite() || !sigma_log.is_finite() || sigma_log < 0.0 {
            return Err(domain(
                "lognormal",
                format!("mu_log={mu_log}, sigma_log={sigma_log}"),
            ));
        }
        Ok(self.normal(mu_log, sigma_log)?.exp())
    }

    /// Inverse-CDF exponential, `-mean * ln(1 - u)`.
    pub fn exponential(&mut self, mean: f64) -> Result<f64, RngError> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(domain("exponential", format!("mean={mean}")));
        }
        let u = self.uniform();
        Ok(-mean * (1.0 - u).ln())
    }

    pub fn poisson(&mut self, rate: f64) -> Result<u64, RngError> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(domain("poisson", format!("rate={rate}")));
        }
        if rate < POISSON_PTRS_THRESHOLD {
            Ok(self.poisson_knuth(rate))
        } else {
            Ok(self.poisson_ptrs(rate))
        }
    }

    fn poisson_knuth(&mut self, rate: f64) -> u64 {
        let limit = (-rate).exp();
        let mut product = 1.0;
        let mut k = 0u64;
        loop {
            product *= 1.0 - self.uniform();
            if product <= limit {
                return k;
            }
            k += 1;
        }
    }

    // Hörmann's PTRS transformed rejection.
    fn poisson_ptrs(&mut self, rate: f64) -> u64 {
        let slam = rate.sqrt();
        let loglam = rate.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = 1.0 - self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + rate + 0.43).floor();
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -rate + k * loglam - ln_gamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }

    pub fn gamma(&mut self, shape: f64, scale: f64) -> Result<f64, RngError> {
        if !(shape > 0.0) || !(scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
            return Err(domain("gamma", format!("shape={shape}, scale={scale}")));
        }
        if shape < 1.0 {
            let boosted = self.marsaglia_tsang(shape + 1.0);
            let u = 1.0 - self.uniform();
            return Ok(boosted * u.powf(1.0 / shape) * scale);
        }
        Ok(self.marsaglia_tsang(shape) * scale)
    }

    fn marsaglia_tsang(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = 1.0 - self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }
}

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    let t = x + 7.5;
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Replays a fixed list of words, cycling.
    struct Scripted {
        words: Vec<u32>,
        pos: usize,
    }

    impl WordSource for Scripted {
        fn next_word(&mut self) -> u32 {
            let w = self.words[self.pos % self.words.len()];
            self.pos += 1;
            w
        }
    }

    fn scripted(words: &[u32]) -> RandomStream<Scripted> {
        RandomStream::new(Scripted {
            words: words.to_vec(),
            pos: 0,
        })
    }

    #[test]
    fn seeding_leaves_index_at_block_end() {
        let g = Mt19937::new(42);
        assert_eq!(g.index(), 624);
        assert!(g.state_words().iter().any(|&w| w != 0));
        assert!(Mt19937::new(0).state_words().iter().any(|&w| w != 0));
    }

    #[test]
    fn twist_happens_once_in_625_draws() {
        let mut g = Mt19937::new(7);
        let _ = g.next_u32();
        assert_eq!(g.index(), 1);
        for _ in 0..623 {
            g.next_u32();
        }
        assert_eq!(g.index(), 624);
        g.next_u32();
        assert_eq!(g.index(), 1);
    }

    #[test]
    fn uniform53_extremes() {
        let mut s = scripted(&[0, 0]);
        assert_eq!(s.uniform(), 0.0);
        let mut s = scripted(&[u32::MAX, u32::MAX]);
        let u = s.uniform();
        assert_eq!(u, (9_007_199_254_740_992.0 - 1.0) / 9_007_199_254_740_992.0);
        assert!(u < 1.0);
    }

    #[test]
    fn exponential_at_zero_word_is_zero() {
        let mut s = scripted(&[0, 0]);
        assert_eq!(s.exponential(10.0).unwrap(), 0.0);
        assert_eq!(s.words_drawn(), 2);
    }

    #[test]
    fn zero_variance_normal_returns_mean() {
        let mut s = RandomStream::seeded(99);
        for _ in 0..10 {
            assert_eq!(s.normal(0.0, 0.0).unwrap(), 0.0);
            assert_eq!(s.normal(3.5, 0.0).unwrap(), 3.5);
        }
    }

    #[test]
    fn normal_consumes_a_pair_every_other_call() {
        let mut s = RandomStream::seeded(1);
        s.normal(0.0, 1.0).unwrap();
        assert_eq!(s.words_drawn(), 4);
        s.normal(0.0, 1.0).unwrap();
        assert_eq!(s.words_drawn(), 4);
        s.lognormal(0.0, 1.0).unwrap();
        assert_eq!(s.words_drawn(), 8);
    }

    #[test]
    fn fixed_draw_counts() {
        let mut s = RandomStream::seeded(5);
        s.uniform();
        assert_eq!(s.words_drawn(), 2);
        s.exponential(3.0).unwrap();
        assert_eq!(s.words_drawn(), 4);
        s.uniform_int(7);
        assert_eq!(s.words_drawn(), 6);
    }

    #[test]
    fn knuth_poisson_draws_k_plus_one_uniforms() {
        let mut s = RandomStream::seeded(11);
        for _ in 0..200 {
            let before = s.words_drawn();
            let k = s.poisson(4.0).unwrap();
            assert_eq!(s.words_drawn() - before, 2 * (k + 1));
        }
        let before = s.words_drawn();
        assert_eq!(s.poisson(0.0).unwrap(), 0);
        assert_eq!(s.words_drawn() - before, 2);
    }

    #[test]
    fn ptrs_poisson_draws_pairs_of_uniforms() {
        let mut s = RandomStream::seeded(12);
        for _ in 0..200 {
            let before = s.words_drawn();
            s.poisson(120.0).unwrap();
            let used = s.words_drawn() - before;
            assert!(used >= 4 && used.is_multiple_of(4), "used {used}");
        }
    }

    #[test]
    fn domain_errors() {
        let mut s = RandomStream::seeded(1);
        assert!(s.normal(0.0, -1.0).is_err());
        assert!(s.exponential(0.0).is_err());
        assert!(s.exponential(-2.0).is_err());
        assert!(s.poisson(-0.1).is_err());
        assert!(s.poisson(f64::NAN).is_err());
        assert!(s.gamma(0.0, 1.0).is_err());
        assert!(s.gamma(1.0, 0.0).is_err());
        assert!(s.lognormal(0.0, -1.0).is_err());
        assert_eq!(s.words_drawn(), 0);
    }

    #[test]
    fn exponential_sample_mean() {
        let mut s = RandomStream::seeded(2024);
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| s.exponential(30.0).unwrap()).sum();
        let mean = sum / n as f64;
        assert!((29.85..=30.15).contains(&mean), "mean {mean}");
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for k in 1..30 {
            fact *= k as f64;
            let got = ln_gamma(k as f64 + 1.0);
            assert!((got - fact.ln()).abs() < 1e-10 * fact.ln().max(1.0), "k={k}");
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_int_in_range() {
        let mut s = RandomStream::seeded(3);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            seen[s.uniform_int(5)] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }
}
