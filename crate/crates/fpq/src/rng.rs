//! Deterministic random streams for reproducible, parallel Monte Carlo.
//!
//! A [`Stream`] is a xoshiro256++ generator. Replications draw from
//! independent substreams derived counter-style from `(master seed,
//! replication index)`, so results are identical for any thread count and
//! adding replications never re-randomizes earlier ones.

/// splitmix64 step, used only for state expansion.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A single reproducible random stream (xoshiro256++).
#[derive(Clone, Debug)]
pub struct Stream {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Stream {
    /// Stream derived from a master seed (substream 0).
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent substream `id` of a master seed.
    pub fn substream(seed: u64, id: u64) -> Self {
        let mut sm = seed ^ id.wrapping_mul(0xA24B_AED4_963E_E407);
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        if s == [0, 0, 0, 0] {
            s[0] = 1;
        }
        Stream {
            s,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw on (0, 1].
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential draw with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(self.uniform_open()) / rate
    }

    /// Standard normal draw (Marsaglia polar method, spare cached).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare_normal = Some(v * m);
                return u * m;
            }
        }
    }

    /// Uniform index in [0, n).
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
