//! Approximate entropy test, SP 800-22 §2.12.
//!
//! Compares the frequencies of all cyclic m-grams and (m+1)-grams. The
//! block length m is a tunable here because short-range correlation shows
//! up much more strongly at small m: with 2^m cells the signal has to beat
//! sqrt(2^(m+1)) worth of chi-square noise.

use super::{chi2_sf, LengthPolicy};
use crate::bitstream::BitStream;
use crate::error::{Error, Result};

/// phi(m) = sum over observed m-grams of (c/n) ln(c/n), with cyclic
/// wraparound so there are exactly n windows.
fn phi(block: &BitStream, m: u32) -> f64 {
    let n = block.len();
    debug_assert!(m >= 1 && (m as u64) <= n);
    let mask: u32 = (1u32 << m) - 1;
    let mut counts = vec![0u32; 1usize << m];
    // Prime the window with the first m-1 bits.
    let mut window: u32 = 0;
    for i in 0..(m - 1) as u64 {
        window = (window << 1) | block.get(i) as u32;
    }
    for i in 0..n {
        let j = (i + m as u64 - 1) % n;
        window = ((window << 1) | block.get(j) as u32) & mask;
        counts[window as usize] += 1;
    }
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            p * p.ln()
        })
        .sum()
}

/// chi^2 = 2n (ln 2 - ApEn(m)) with ApEn(m) = phi(m) - phi(m+1), scored
/// against a chi-square with 2^m degrees of freedom.
pub fn approximate_entropy_test(block: &BitStream, m: u32) -> Result<f64> {
    approximate_entropy_test_with(block, m, LengthPolicy::Enforce)
}

pub fn approximate_entropy_test_with(
    block: &BitStream,
    m: u32,
    policy: LengthPolicy,
) -> Result<f64> {
    if m == 0 || m > 16 {
        return Err(Error::InvalidBlockLength(format!(
            "approximate entropy block length must be in 1..=16, got {m}"
        )));
    }
    let n = block.len();
    // NIST guidance: m < log2(n) - 5, i.e. n >= 2^(m+5).
    let need = 1u64 << (m + 5);
    if policy == LengthPolicy::Enforce && n < need {
        return Err(Error::BlockTooShort { got: n, need });
    }
    if n < (m + 1) as u64 {
        return Err(Error::BlockTooShort {
            got: n,
            need: (m + 1) as u64,
        });
    }
    let apen = phi(block, m) - phi(block, m + 1);
    let chi2 = 2.0 * n as f64 * (std::f64::consts::LN_2 - apen);
    Ok(chi2_sf(chi2, (1u64 << m) as f64))
}
