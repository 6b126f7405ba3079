//! Maurer's universal statistical test, SP 800-22 §2.9.
//!
//! The stream is cut into L-bit blocks; the first Q = 10 * 2^L blocks
//! initialize a last-occurrence table and the remaining K blocks
//! accumulate log2 distances to the previous occurrence of each pattern.
//! The mean distance statistic is compared against its tabulated
//! expectation and variance with the Coron-Naccache finite-K correction.

use statrs::function::erf::erfc;

use super::constants::{
    MIN_UNIVERSAL_BITS, UNIVERSAL_EXPECTED, UNIVERSAL_N_THRESHOLDS, UNIVERSAL_VARIANCE,
};
use super::LengthPolicy;
use crate::bitstream::BitStream;
use crate::error::{Error, Result};

/// (L, Q) chosen from the block length per the SP 800-22 §2.9.7 table.
pub fn universal_parameters(n_bits: u64) -> Result<(u32, u64)> {
    if n_bits < MIN_UNIVERSAL_BITS {
        return Err(Error::BlockTooShort {
            got: n_bits,
            need: MIN_UNIVERSAL_BITS,
        });
    }
    let l = UNIVERSAL_N_THRESHOLDS
        .iter()
        .rev()
        .find(|&&(min_n, _)| n_bits >= min_n)
        .map(|&(_, l)| l)
        .expect("n_bits >= first threshold");
    Ok((l, 10 * (1u64 << l)))
}

/// Universal test with automatic (L, Q) selection.
pub fn universal_test(block: &BitStream) -> Result<f64> {
    universal_test_with(block, LengthPolicy::Enforce)
}

pub fn universal_test_with(block: &BitStream, policy: LengthPolicy) -> Result<f64> {
    match universal_parameters(block.len()) {
        Ok((l, q)) => universal_test_with_params(block, l, q),
        Err(e) => {
            if policy == LengthPolicy::Enforce {
                Err(e)
            } else {
                // Reference-vector fallback used by unit tests only.
                universal_test_with_params(block, 2, 4)
            }
        }
    }
}

/// Universal test with explicit parameters (reference vectors use
/// non-standard L and Q).
pub fn universal_test_with_params(block: &BitStream, l: u32, q: u64) -> Result<f64> {
    if !(1..=16).contains(&l) {
        return Err(Error::InvalidBlockLength(format!(
            "universal block length must be in 1..=16, got {l}"
        )));
    }
    let n = block.len();
    let total_blocks = n / l as u64;
    if total_blocks <= q {
        return Err(Error::BlockTooShort {
            got: n,
            need: (q + 1) * l as u64,
        });
    }
    let k = total_blocks - q;

    let read_block = |i: u64| -> usize {
        // Blocks are 1-indexed in the NIST description.
        let start = (i - 1) * l as u64;
        let mut v = 0usize;
        for j in 0..l as u64 {
            v = (v << 1) | block.get(start + j) as usize;
        }
        v
    };

    let mut table = vec![0u64; 1usize << l];
    for i in 1..=q {
        table[read_block(i)] = i;
    }
    let mut sum = 0.0f64;
    for i in (q + 1)..=(q + k) {
        let pat = read_block(i);
        sum += ((i - table[pat]) as f64).log2();
        table[pat] = i;
    }
    let fn_stat = sum / k as f64;

    let expected = UNIVERSAL_EXPECTED[l as usize];
    let variance = UNIVERSAL_VARIANCE[l as usize];
    let kf = k as f64;
    let c = 0.7 - 0.8 / l as f64 + (4.0 + 32.0 / l as f64) * kf.powf(-3.0 / l as f64) / 15.0;
    let sigma = c * (variance / kf).sqrt();
    Ok(erfc(
        (fn_stat - expected).abs() / (std::f64::consts::SQRT_2 * sigma),
    ))
}
