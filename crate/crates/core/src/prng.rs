//! Deterministic PRNG: xoshiro256** seeded through splitmix64.
//!
//! The stream is fully determined by the 64-bit seed, so a seed printed in a
//! report reproduces the exact program on any platform.

/// xoshiro256** with splitmix64 seed expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prng {
    state: [u64; 4],
}

impl Prng {
    pub fn seeded(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for slot in &mut state {
            *slot = splitmix64(&mut sm);
        }
        Prng { state }
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

    /// Uniform draw in `[0, n)` via rejection sampling. `n` must be >= 1.
    pub fn next_bounded(&mut self, n: u64) -> u64 {
        assert!(n >= 1, "next_bounded requires n >= 1");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// Uniform draw in the inclusive range `[lo, hi]`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "range requires lo <= hi");
        lo + self.next_bounded(hi - lo + 1)
    }

    /// Bernoulli draw with probability `p` (clamped to [0, 1]).
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform f64 in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden values frozen from an independent reference implementation of
    // the published splitmix64 + xoshiro256** constants.
    #[test]
    fn seed_expansion_matches_reference() {
        let p = Prng::seeded(42);
        assert_eq!(
            p.state,
            [
                0xbdd732262feb6e95,
                0x28efe333b266f103,
                0x47526757130f9f52,
                0x581ce1ff0e4ae394
            ]
        );
    }

    #[test]
    fn raw_stream_matches_reference() {
        let mut p = Prng::seeded(42);
        let draws: Vec<u64> = (0..4).map(|_| p.next_u64()).collect();
        assert_eq!(
            draws,
            vec![
                0x15780b2e0c2ec716,
                0x6104d9866d113a7e,
                0xae17533239e499a1,
                0xecb8ad4703b360a1
            ]
        );
        let mut q = Prng::seeded(0xDEADBEEF);
        assert_eq!(q.next_u64(), 0xc5555444a74d7e83);
        assert_eq!(q.next_u64(), 0x65c30d37b4b16e38);
        assert_eq!(q.next_u64(), 0x54f773200a4efa23);
    }

    #[test]
    fn bounded_stream_matches_reference() {
        let mut p = Prng::seeded(42);
        assert_eq!(
            [
                p.next_bounded(100),
                p.next_bounded(100),
                p.next_bounded(100)
            ],
            [42, 2, 9]
        );
        let mut q = Prng::seeded(0);
        let draws: Vec<u64> = (0..8).map(|_| q.next_bounded(16)).collect();
        assert_eq!(draws, vec![4, 10, 0, 12, 9, 10, 8, 15]);
    }

    #[test]
    fn bounded_one_is_always_zero() {
        let mut p = Prng::seeded(7);
        for _ in 0..64 {
            assert_eq!(p.next_bounded(1), 0);
        }
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let mut a = Prng::seeded(123456789);
        let mut b = Prng::seeded(123456789);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    // Chi-square uniformity over 10^6 draws with n=16; critical value for
    // df=15 at alpha=0.001 is 37.697.
    #[test]
    fn bounded_is_uniform_chi_square() {
        let mut p = Prng::seeded(2024);
        let mut counts = [0u64; 16];
        let total = 1_000_000u64;
        for _ in 0..total {
            counts[p.next_bounded(16) as usize] += 1;
        }
        let expected = total as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 37.697, "chi-square statistic too large: {chi2}");
    }
}
