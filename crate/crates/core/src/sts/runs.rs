//! Runs test, SP 800-22 §2.3. Directly sensitive to lag-1 autocorrelation.

use statrs::function::erf::erfc;

use super::constants::MIN_FREQUENCY_BITS;
use super::LengthPolicy;
use crate::bitstream::BitStream;
use crate::error::{Error, Result};

/// Total runs V against the expectation 2 n pi (1 - pi).
///
/// Precondition per NIST: the frequency precheck |pi - 1/2| < 2/sqrt(n)
/// must hold, otherwise [`Error::PrerequisiteFailed`] is returned (the
/// battery maps that to p = 0).
pub fn runs_test(block: &BitStream) -> Result<f64> {
    runs_test_with(block, LengthPolicy::Enforce)
}

pub fn runs_test_with(block: &BitStream, policy: LengthPolicy) -> Result<f64> {
    let n = block.len();
    if n < 2 {
        return Err(Error::EmptyStream);
    }
    if policy == LengthPolicy::Enforce && n < MIN_FREQUENCY_BITS {
        return Err(Error::BlockTooShort {
            got: n,
            need: MIN_FREQUENCY_BITS,
        });
    }
    let nf = n as f64;
    let pi = block.count_ones() as f64 / nf;
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Err(Error::PrerequisiteFailed);
    }
    // V = 1 + number of positions where consecutive bits differ.
    let v = 1.0 + (n - 1 - block.overlap_match_count(1)) as f64;
    let p =
        erfc((v - 2.0 * nf * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi)));
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vector() {
        // SP 800-22 §2.3.8 worked example: pi = 0.6, V = 7.
        let b = BitStream::from_bit_str("1001101011");
        let p = runs_test_with(&b, LengthPolicy::Relaxed).unwrap();
        assert!((p - 0.147232255363666).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn alternating_block_fails() {
        let b = BitStream::from_bits((0..1000).map(|i| i % 2 == 0));
        let p = runs_test(&b).unwrap();
        assert!(p < 1e-100, "p = {p}");
    }

    #[test]
    fn constant_block_hits_prerequisite() {
        let b = BitStream::from_bits(std::iter::repeat_n(true, 1000));
        assert!(matches!(runs_test(&b), Err(Error::PrerequisiteFailed)));
    }

    #[test]
    fn enforces_minimum_length() {
        let b = BitStream::from_bit_str("1001101011");
        assert!(matches!(runs_test(&b), Err(Error::BlockTooShort { .. })));
    }
}
