//! Packed bit streams.
//!
//! Bits are packed 8 per byte with the first-generated bit in the most
//! significant bit of byte 0. When the length is not a multiple of 8 the
//! final byte is zero-padded in its low bits; that invariant is maintained
//! by every operation so the in-memory bytes are exactly the file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rff::QrngConfig;

/// A packed binary sequence with an exact bit count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    n_bits: u64,
}

impl BitStream {
    pub fn new() -> Self {
        Self {
            bytes: Vec::new(),
            n_bits: 0,
        }
    }

    pub fn with_capacity(n_bits: u64) -> Self {
        Self {
            bytes: Vec::with_capacity((n_bits as usize).div_ceil(8)),
            n_bits: 0,
        }
    }

    /// Wrap raw packed bytes. The byte count must match `n_bits` and the
    /// pad bits of the final byte must be zero.
    pub fn from_bytes(bytes: Vec<u8>, n_bits: u64) -> Result<Self> {
        let need = (n_bits as usize).div_ceil(8);
        if bytes.len() != need {
            return Err(Error::BadFormat(format!(
                "{} bytes cannot hold exactly {} bits (need {})",
                bytes.len(),
                n_bits,
                need
            )));
        }
        let rem = (n_bits % 8) as u32;
        if rem != 0 {
            let pad_mask = 0xFFu8 >> rem;
            if bytes[need - 1] & pad_mask != 0 {
                return Err(Error::BadFormat(
                    "pad bits of the final byte are not zero".into(),
                ));
            }
        }
        Ok(Self { bytes, n_bits })
    }

    /// Build a stream from boolean values (mostly for tests and examples).
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parse a string of '0'/'1' characters; anything else is ignored.
    pub fn from_bit_str(text: &str) -> Self {
        Self::from_bits(text.chars().filter_map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        }))
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = (self.n_bits % 8) as u32;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 1 << (7 - off);
        }
        self.n_bits += 1;
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        assert!(
            i < self.n_bits,
            "bit index {i} out of range {}",
            self.n_bits
        );
        (self.bytes[(i / 8) as usize] >> (7 - (i % 8) as u32)) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    /// Packed bytes, identical to the file representation.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n_bits).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u64 {
        self.bytes.iter().map(|b| b.count_ones() as u64).sum()
    }

    /// Number of ones among the first `m` bits.
    pub fn prefix_ones(&self, m: u64) -> u64 {
        assert!(m <= self.n_bits);
        let full = (m / 8) as usize;
        let mut ones: u64 = self.bytes[..full]
            .iter()
            .map(|b| b.count_ones() as u64)
            .sum();
        let rem = (m % 8) as u32;
        if rem != 0 {
            ones += (self.bytes[full] >> (8 - rem)).count_ones() as u64;
        }
        ones
    }

    /// Word `w` of the stream interpreted MSB-first (stream bit 64*w is the
    /// word's most significant bit); bits past the end read as zero.
    #[inline]
    fn word(&self, w: usize) -> u64 {
        let start = w * 8;
        if start >= self.bytes.len() {
            return 0;
        }
        let end = (start + 8).min(self.bytes.len());
        let mut buf = [0u8; 8];
        buf[..end - start].copy_from_slice(&self.bytes[start..end]);
        u64::from_be_bytes(buf)
    }

    /// Word of the stream shifted left by `k` bits: lane j holds stream
    /// bit 64*w + j + k (zero past the end).
    #[inline]
    fn word_shifted(&self, w: usize, k: u64) -> u64 {
        let q = (k / 64) as usize;
        let r = (k % 64) as u32;
        if r == 0 {
            self.word(w + q)
        } else {
            (self.word(w + q) << r) | (self.word(w + q + 1) >> (64 - r))
        }
    }

    /// Count positions i < len(self) - k where bit i and bit i+k are both 1.
    pub fn overlap_and_count(&self, k: u64) -> u64 {
        assert!(k < self.n_bits);
        let m = self.n_bits - k;
        let full_words = (m / 64) as usize;
        let mut total: u64 = 0;
        for w in 0..full_words {
            total += (self.word(w) & self.word_shifted(w, k)).count_ones() as u64;
        }
        let rem = (m % 64) as u32;
        if rem != 0 {
            let mask = u64::MAX << (64 - rem);
            total += (self.word(full_words) & self.word_shifted(full_words, k) & mask).count_ones()
                as u64;
        }
        total
    }

    /// Count positions i < len(self) - k where bit i equals bit i+k.
    pub fn overlap_match_count(&self, k: u64) -> u64 {
        assert!(k < self.n_bits);
        let m = self.n_bits - k;
        let full_words = (m / 64) as usize;
        let mut diff: u64 = 0;
        for w in 0..full_words {
            diff += (self.word(w) ^ self.word_shifted(w, k)).count_ones() as u64;
        }
        let rem = (m % 64) as u32;
        if rem != 0 {
            let mask = u64::MAX << (64 - rem);
            diff += ((self.word(full_words) ^ self.word_shifted(full_words, k)) & mask).count_ones()
                as u64;
        }
        m - diff
    }

    /// Copy of bits [start, start+len).
    pub fn slice(&self, start: u64, len: u64) -> BitStream {
        assert!(start + len <= self.n_bits);
        if start.is_multiple_of(8) {
            let first = (start / 8) as usize;
            let nbytes = (len as usize).div_ceil(8);
            let mut bytes = self.bytes[first..first + nbytes].to_vec();
            let rem = (len % 8) as u32;
            if rem != 0 {
                *bytes.last_mut().expect("len > 0") &= 0xFFu8 << (8 - rem);
            }
            BitStream { bytes, n_bits: len }
        } else {
            let mut out = BitStream::with_capacity(len);
            for i in 0..len {
                out.push(self.get(start + i));
            }
            out
        }
    }

    /// Bitwise complement (pad bits stay zero).
    pub fn complement(&self) -> BitStream {
        let mut bytes: Vec<u8> = self.bytes.iter().map(|b| !b).collect();
        let rem = (self.n_bits % 8) as u32;
        if rem != 0 {
            let last = bytes.len() - 1;
            bytes[last] &= 0xFFu8 << (8 - rem);
        }
        BitStream {
            bytes,
            n_bits: self.n_bits,
        }
    }

    /// Write the packed bytes to `path` (no header, no sidecar).
    pub fn write_to_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.bytes)?;
        Ok(())
    }
}

impl Default for BitStream {
    fn default() -> Self {
        Self::new()
    }
}

/// Bitwise exclusive-or of two equal-length streams.
pub fn xor_streams(x: &BitStream, y: &BitStream) -> Result<BitStream> {
    if x.n_bits != y.n_bits {
        return Err(Error::LengthMismatch {
            left: x.n_bits,
            right: y.n_bits,
        });
    }
    let bytes = x.bytes.iter().zip(&y.bytes).map(|(a, b)| a ^ b).collect();
    Ok(BitStream {
        bytes,
        n_bits: x.n_bits,
    })
}

/// JSON sidecar written next to a bitstream file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BitstreamSidecar {
    pub schema_version: u32,
    pub n_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<QrngConfig>,
}

/// Write the packed bits to `path` and the sidecar to `<path>.json`.
pub fn write_with_sidecar(x: &BitStream, path: &Path, sidecar: &BitstreamSidecar) -> Result<()> {
    if sidecar.n_bits != x.len() {
        return Err(Error::InvalidInput(format!(
            "sidecar n_bits {} does not match stream length {}",
            sidecar.n_bits,
            x.len()
        )));
    }
    x.write_to_file(path)?;
    std::fs::write(
        path.with_extension("json"),
        serde_json::to_string_pretty(sidecar)?,
    )?;
    Ok(())
}

/// Read a bitstream file together with its `<path>.json` sidecar.
pub fn read_with_sidecar(path: &Path) -> Result<(BitStream, BitstreamSidecar)> {
    let sidecar: BitstreamSidecar =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
    let bytes = std::fs::read(path)?;
    let stream = BitStream::from_bytes(bytes, sidecar.n_bits)?;
    Ok((stream, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packing_is_msb_first() {
        let s = BitStream::from_bit_str("10110000 1");
        assert_eq!(s.len(), 9);
        assert_eq!(s.bytes(), &[0b1011_0000, 0b1000_0000]);
        assert!(s.get(0));
        assert!(!s.get(1));
        assert!(s.get(8));
    }

    #[test]
    fn from_bytes_validates_padding() {
        assert!(BitStream::from_bytes(vec![0b1010_0000], 4).is_ok());
        assert!(BitStream::from_bytes(vec![0b1010_1000], 4).is_err());
        assert!(BitStream::from_bytes(vec![0, 0], 4).is_err());
    }

    #[test]
    fn xor_identities() {
        let x = crate::synthetic::prng_stream(1000, 42);
        let zeros = BitStream::from_bits(std::iter::repeat_n(false, 1000));
        assert_eq!(xor_streams(&x, &x).unwrap(), zeros);
        assert_eq!(xor_streams(&x, &zeros).unwrap(), x);
        let y = crate::synthetic::prng_stream(999, 1);
        assert!(matches!(
            xor_streams(&x, &y),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn xor_algebra(seed_a in 0u64..1000, seed_b in 0u64..1000, seed_c in 0u64..1000,
                       n in 1u64..500) {
            let a = crate::synthetic::prng_stream(n, seed_a);
            let b = crate::synthetic::prng_stream(n, seed_b);
            let c = crate::synthetic::prng_stream(n, seed_c);
            let ab_c = xor_streams(&xor_streams(&a, &b).unwrap(), &c).unwrap();
            let a_bc = xor_streams(&a, &xor_streams(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(xor_streams(&a, &a).unwrap().count_ones(), 0);
        }

        #[test]
        fn overlap_counts_match_naive(seed in 0u64..10_000, n in 2u64..400, k_frac in 0.0f64..1.0) {
            let s = crate::synthetic::prng_stream(n, seed);
            let k = 1 + ((n - 2) as f64 * k_frac) as u64;
            prop_assume!(k < n);
            let mut both = 0u64;
            let mut same = 0u64;
            for i in 0..(n - k) {
                let (a, b) = (s.get(i), s.get(i + k));
                if a && b { both += 1; }
                if a == b { same += 1; }
            }
            prop_assert_eq!(s.overlap_and_count(k), both);
            prop_assert_eq!(s.overlap_match_count(k), same);
        }

        #[test]
        fn prefix_and_slice_consistent(seed in 0u64..10_000, n in 1u64..300, cut_frac in 0.0f64..1.0) {
            let s = crate::synthetic::prng_stream(n, seed);
            let m = (n as f64 * cut_frac) as u64;
            let naive = (0..m).filter(|&i| s.get(i)).count() as u64;
            prop_assert_eq!(s.prefix_ones(m), naive);
            if m > 0 {
                let head = s.slice(0, m);
                prop_assert_eq!(head.count_ones(), naive);
                let tail = s.slice(m - 1, n - m + 1);
                prop_assert_eq!(tail.get(0), s.get(m - 1));
                prop_assert_eq!(tail.len(), n - m + 1);
            }
        }
    }

    #[test]
    fn file_roundtrip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bits");
        let s = crate::synthetic::prng_stream(12_345, 9);
        let sidecar = BitstreamSidecar {
            schema_version: 1,
            n_bits: s.len(),
            seed: Some(9),
            config: None,
        };
        write_with_sidecar(&s, &path, &sidecar).unwrap();
        let (back, sc) = read_with_sidecar(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(sc.seed, Some(9));
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            12_345u64.div_ceil(8)
        );
    }
}
