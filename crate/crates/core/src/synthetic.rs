//! Synthetic reference streams for calibration and sensitivity checks.
//!
//! These bypass the flip-flop model entirely: they draw straight from the
//! simulation PRNG, optionally with an injected bias or lag-1
//! autocorrelation, and are what the statistical tests are calibrated
//! against.

use rand::RngCore;

use crate::bitstream::BitStream;
use crate::error::{Error, Result};
use crate::seeding::{open01, substream};

/// Unbiased bits taken directly from the PRNG substream.
pub fn prng_stream(n_bits: u64, seed: u64) -> BitStream {
    let mut rng = substream(seed, 0);
    let n_bytes = (n_bits as usize).div_ceil(8);
    let mut bytes = vec![0u8; n_bytes];
    rng.fill_bytes(&mut bytes);
    let rem = (n_bits % 8) as u32;
    if rem != 0 {
        bytes[n_bytes - 1] &= 0xFFu8 << (8 - rem);
    }
    BitStream::from_bytes(bytes, n_bits).expect("constructed with valid padding")
}

/// Independent bits with P(1) = `p_one`.
pub fn iid_stream(p_one: f64, n_bits: u64, seed: u64) -> Result<BitStream> {
    if !(0.0..=1.0).contains(&p_one) {
        return Err(Error::InvalidInput(format!(
            "p_one must be in [0, 1], got {p_one}"
        )));
    }
    let mut rng = substream(seed, 0);
    let mut out = BitStream::with_capacity(n_bits);
    for _ in 0..n_bits {
        out.push(open01(&mut rng) < p_one);
    }
    Ok(out)
}

/// Zero-bias stream with lag-1 autocorrelation `a1`: a symmetric binary
/// Markov chain where each bit repeats the previous one with probability
/// (1 + a1) / 2. Lag-k autocorrelation decays as a1^k.
pub fn markov_stream(a1: f64, n_bits: u64, seed: u64) -> Result<BitStream> {
    if !(-1.0..=1.0).contains(&a1) {
        return Err(Error::InvalidInput(format!(
            "a1 must be in [-1, 1], got {a1}"
        )));
    }
    let stay = 0.5 * (1.0 + a1);
    let mut rng = substream(seed, 0);
    let mut out = BitStream::with_capacity(n_bits);
    let mut bit = open01(&mut rng) < 0.5;
    for _ in 0..n_bits {
        out.push(bit);
        if open01(&mut rng) >= stay {
            bit = !bit;
        }
    }
    Ok(out)
}
