//! Frequency (monobit) test, SP 800-22 §2.1.

use statrs::function::erf::erfc;

use super::constants::MIN_FREQUENCY_BITS;
use super::LengthPolicy;
use crate::bitstream::BitStream;
use crate::error::{Error, Result};

/// p = erfc(|sum(2x - 1)| / sqrt(n) / sqrt(2)). The most sensitive test
/// to bias.
pub fn frequency_test(block: &BitStream) -> Result<f64> {
    frequency_test_with(block, LengthPolicy::Enforce)
}

pub fn frequency_test_with(block: &BitStream, policy: LengthPolicy) -> Result<f64> {
    let n = block.len();
    if n == 0 {
        return Err(Error::EmptyStream);
    }
    if policy == LengthPolicy::Enforce && n < MIN_FREQUENCY_BITS {
        return Err(Error::BlockTooShort {
            got: n,
            need: MIN_FREQUENCY_BITS,
        });
    }
    let ones = block.count_ones() as i64;
    let s = (2 * ones - n as i64).abs() as f64;
    Ok(erfc(s / (n as f64).sqrt() / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vector() {
        // SP 800-22 §2.1.8 worked example.
        let b = BitStream::from_bit_str("1011010101");
        let p = frequency_test_with(&b, LengthPolicy::Relaxed).unwrap();
        assert!((p - 0.527089256865538).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn balanced_block_scores_one() {
        let b = BitStream::from_bit_str("1111100000");
        let p = frequency_test_with(&b, LengthPolicy::Relaxed).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn constant_block_fails_hard() {
        let b = BitStream::from_bits(std::iter::repeat_n(false, 100));
        let p = frequency_test(&b).unwrap();
        assert!(p < 1e-22, "p = {p}");
    }

    #[test]
    fn enforces_minimum_length() {
        let b = BitStream::from_bit_str("1011010101");
        assert!(matches!(
            frequency_test(&b),
            Err(Error::BlockTooShort { got: 10, need: 100 })
        ));
    }
}
