//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(seed, domain, trial, lane)`. The seed and domain select the key, the
//! trial selects the ChaCha stream id, and the lane (a node index, or a node
//! index offset into the channel range) selects a disjoint window of the
//! keystream. Draws therefore depend only on their address, never on which
//! worker thread computes them or in which order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Width of the keystream window reserved for each lane, in 32-bit words.
const LANE_WINDOW_LOG2: u32 = 40;

/// Lanes at or above this offset are used by the noise channel.
pub const CHANNEL_LANE_OFFSET: u64 = 1 << 24;

/// Lane used for auxiliary draws (tie-break keys, tree shapes).
pub const AUX_LANE: u64 = (1 << 26) - 1;

/// Domain tags keep independent uses of one user seed apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Samples,
    Learner,
    Tree,
    Simulation(u64),
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Samples => 0x5341_4d50,
            Domain::Learner => 0x4c45_4152,
            Domain::Tree => 0x5452_4545,
            Domain::Simulation(k) => 0x5349_4d00_0000_0000 ^ k,
        }
    }
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Address of one trial's randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    key: [u8; 32],
    trial: u64,
}

impl StreamKey {
    pub fn new(seed: u64, domain: Domain, trial: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed ^ splitmix64(domain.tag());
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        StreamKey { key, trial }
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// Generator for one lane of this trial.
    pub fn lane(&self, lane: u64) -> ChaCha8Rng {
        debug_assert!(lane <= AUX_LANE);
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(self.trial);
        rng.set_word_pos((lane as u128) << LANE_WINDOW_LOG2);
        rng
    }
}

/// Bernoulli bit-mask generator.
///
/// Each output bit is `[U < p]` for an independent uniform `U`, decided by
/// comparing the binary digits of `U` (one random word supplies one digit for
/// 64 positions) against the binary expansion of `p`. Positions leave the
/// undecided set with probability one half per digit, so a mask costs about
/// eight words on average. The result is exact for the `f64` value of `p`.
#[derive(Clone, Debug)]
pub struct BernoulliMask {
    digits: Vec<bool>,
}

impl BernoulliMask {
    pub fn new(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
        let mut digits = Vec::new();
        let mut x = p;
        // doubling and subtracting one are exact in binary floating point
        while x > 0.0 && digits.len() < 1100 {
            x *= 2.0;
            if x >= 1.0 {
                digits.push(true);
                x -= 1.0;
            } else {
                digits.push(false);
            }
        }
        if p >= 1.0 {
            digits = vec![true; 1];
        }
        BernoulliMask { digits }
    }

    pub fn probability_is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Draws 64 independent Bernoulli bits.
    #[inline]
    pub fn draw<R: RngCore>(&self, rng: &mut R) -> u64 {
        let mut undecided = u64::MAX;
        let mut out = 0u64;
        for &digit in &self.digits {
            if undecided == 0 {
                break;
            }
            let r = rng.next_u64();
            if digit {
                // U digit 0 against p digit 1: U < p
                out |= undecided & !r;
                undecided &= r;
            } else {
                // U digit 1 against p digit 0: U > p
                undecided &= !r;
            }
        }
        // exhausted expansion: remaining positions have U >= p
        out
    }
}
