//! Constants transcribed from NIST SP 800-22 rev. 1a.

/// Minimum block length for the frequency and runs tests (SP 800-22
/// §2.1.7, §2.3.7).
pub const MIN_FREQUENCY_BITS: u64 = 100;

/// Minimum block length for the spectral test (SP 800-22 §2.6.7).
pub const MIN_FFT_BITS: u64 = 1000;

/// Peak threshold significance of the spectral test: T = sqrt(n ln(1/0.05))
/// (SP 800-22 §2.6.4 step 3).
pub const FFT_PEAK_ALPHA: f64 = 0.05;

/// Expected value of Maurer's statistic, indexed by L = 1..=16
/// (SP 800-22 §2.9.4, table of expectedValue(L)).
pub const UNIVERSAL_EXPECTED: [f64; 17] = [
    0.0, // unused
    0.7326495, 1.5374383, 2.4016068, 3.3112247, 4.2534266, 5.2177052, 6.1962507, 7.1836656,
    8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070, 13.167693, 14.167488, 15.167379,
];

/// Variance of Maurer's statistic, indexed by L = 1..=16 (SP 800-22 §2.9.4).
pub const UNIVERSAL_VARIANCE: [f64; 17] = [
    0.0, // unused
    0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401, 3.410,
    3.416, 3.419, 3.421,
];

/// Block-length selection for Maurer's test: smallest n admitting each L
/// (SP 800-22 §2.9.7). Below the first entry the test is not defined.
pub const UNIVERSAL_N_THRESHOLDS: [(u64, u32); 11] = [
    (387_840, 6),
    (904_960, 7),
    (2_068_480, 8),
    (4_654_080, 9),
    (10_342_400, 10),
    (22_753_280, 11),
    (49_643_520, 12),
    (107_560_960, 13),
    (231_669_760, 14),
    (496_435_200, 15),
    (1_059_061_760, 16),
];

/// Minimum block length for Maurer's test (the L = 6 row above).
pub const MIN_UNIVERSAL_BITS: u64 = UNIVERSAL_N_THRESHOLDS[0].0;
