//! Discrete Fourier transform (spectral) test, SP 800-22 §2.6. Detects
//! periodic features that a Poisson-driven source should not have.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use statrs::function::erf::erfc;

use super::constants::{FFT_PEAK_ALPHA, MIN_FFT_BITS};
use super::LengthPolicy;
use crate::bitstream::BitStream;
use crate::error::{Error, Result};

/// Plans are cached per length; the battery hits one length hundreds of
/// times and twiddle setup dominates small transforms otherwise.
type PlanCache = Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>;

fn plan_for(n: usize) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| FftPlanner::new().plan_fft_forward(n))
        .clone()
}

/// Counts DFT magnitudes of the +/-1 sequence below the 95% peak
/// threshold T = sqrt(n ln(1/0.05)) over the first n/2 frequencies, and
/// converts the normalized excess into a p-value via erfc.
pub fn fft_test(block: &BitStream) -> Result<f64> {
    fft_test_with(block, LengthPolicy::Enforce)
}

pub fn fft_test_with(block: &BitStream, policy: LengthPolicy) -> Result<f64> {
    let n = block.len();
    if n < 2 {
        return Err(Error::EmptyStream);
    }
    if policy == LengthPolicy::Enforce && n < MIN_FFT_BITS {
        return Err(Error::BlockTooShort {
            got: n,
            need: MIN_FFT_BITS,
        });
    }
    let n_usize = n as usize;
    let mut buf: Vec<Complex<f64>> = block
        .iter()
        .map(|b| Complex::new(if b { 1.0 } else { -1.0 }, 0.0))
        .collect();
    plan_for(n_usize).process(&mut buf);

    let nf = n as f64;
    let threshold = (nf * (1.0 / FFT_PEAK_ALPHA).ln()).sqrt();
    let half = n_usize / 2;
    let below = buf[..half].iter().filter(|c| c.norm() < threshold).count() as f64;

    let expected = (1.0 - FFT_PEAK_ALPHA) * nf / 2.0;
    let d = (below - expected) / (nf * (1.0 - FFT_PEAK_ALPHA) * FFT_PEAK_ALPHA / 4.0).sqrt();
    Ok(erfc(d.abs() / std::f64::consts::SQRT_2))
}
