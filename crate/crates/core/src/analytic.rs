//! Closed-form predictions for RFF generators.
//!
//! These are the oracles the Monte Carlo results are checked against: the
//! dwell-time and bias model of the analog sampling chain, the Poisson
//! count statistics behind the ideal lag-1 autocorrelation, and the
//! bias/autocorrelation propagation law for XOR-combined stages.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rff::AnalogTimingModel;

/// A (detection rate, bit rate) pair with the normalized event rate
/// lambda = f_det / f_bit, the mean number of detections per generated bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub f_det: f64,
    pub f_bit: f64,
    pub lambda: f64,
}

impl OperatingPoint {
    pub fn new(f_det: f64, f_bit: f64) -> Result<Self> {
        if f_det <= 0.0 || f_bit <= 0.0 || !f_det.is_finite() || !f_bit.is_finite() {
            return Err(Error::InvalidInput(
                "rates of an operating point must be positive".into(),
            ));
        }
        Ok(Self {
            f_det,
            f_bit,
            lambda: f_det / f_bit,
        })
    }
}

/// Mean dwell times of the sampled waveform for one detection period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwellTimes {
    /// Mean time the sampler sees HIGH.
    pub t_high: f64,
    /// Mean time the sampler sees LOW.
    pub t_low: f64,
    /// Duration of the HIGH plateau.
    pub t_h: f64,
    /// Duration of the LOW plateau.
    pub t_l: f64,
    /// Mean waiting time between detections.
    pub t_det: f64,
}

/// Dwell times of the threshold model:
/// t_high = (1 - eta)(t_rise + t_fall) + t_h with t_h = t_det - t_rise,
/// t_low  = eta (t_rise + t_fall) + t_l  with t_l = t_det - t_fall,
/// so t_high + t_low = 2 t_det identically.
pub fn dwell_times(a: &AnalogTimingModel, t_det: f64) -> Result<DwellTimes> {
    a.validate()?;
    if !t_det.is_finite() || t_det <= a.t_rise || t_det <= a.t_fall {
        return Err(Error::InvalidInput(format!(
            "detection period {t_det} must exceed both transition times"
        )));
    }
    let t_h = t_det - a.t_rise;
    let t_l = t_det - a.t_fall;
    let sum = a.t_rise + a.t_fall;
    Ok(DwellTimes {
        t_high: (1.0 - a.eta) * sum + t_h,
        t_low: a.eta * sum + t_l,
        t_h,
        t_l,
        t_det,
    })
}

/// Bias per unit detection rate: alpha = (t_fall - eta (t_rise + t_fall)) / 2.
pub fn bias_coefficient(a: &AnalogTimingModel) -> f64 {
    (a.t_fall - a.eta * (a.t_rise + a.t_fall)) / 2.0
}

/// Predicted bias alpha * f_det of a single stage.
pub fn predicted_bias(a: &AnalogTimingModel, f_det: f64) -> f64 {
    bias_coefficient(a) * f_det
}

/// Threshold fraction at which bias vanishes for every detection rate:
/// eta = 1 / (1 + t_rise / t_fall).
pub fn zero_bias_eta(t_rise: f64, t_fall: f64) -> Result<f64> {
    if t_rise < 0.0 || t_fall < 0.0 {
        return Err(Error::InvalidInput(
            "transition times must be non-negative".into(),
        ));
    }
    if t_fall == 0.0 {
        if t_rise == 0.0 {
            return Err(Error::InvalidInput(
                "zero-bias threshold is undefined for instantaneous transitions".into(),
            ));
        }
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + t_rise / t_fall))
}

/// Poisson probability mass e^-lambda lambda^k / k!, evaluated in log
/// space so large k stays finite.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative");
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

/// Probability that two bits one sample apart agree: an even number of
/// toggles in between, which sums to 1/2 + 1/2 e^-2 lambda.
pub fn same_bit_prob_s1(lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative");
    0.5 + 0.5 * (-2.0 * lambda).exp()
}

/// Ideal (zero dead time) lag-1 autocorrelation e^-2 lambda.
pub fn a1_ideal(lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative");
    (-2.0 * lambda).exp()
}

/// Bias and lag-1 autocorrelation after XOR combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XorPropagation {
    pub bias: f64,
    pub autocorr1: f64,
}

/// XOR of two independent streams that each have bias `b` and lag-1
/// autocorrelation `a1`: b' = -2 b^2 and a1' = a1^2 + 8 a1 b^2. Chaining
/// the map gives upper-bound estimates for more stages.
pub fn xor_propagation(b: f64, a1: f64) -> XorPropagation {
    debug_assert!(b.abs() <= 0.5 && a1.abs() <= 1.0);
    XorPropagation {
        bias: -2.0 * b * b,
        autocorr1: a1 * a1 + 8.0 * a1 * b * b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dwell_symmetric_case() {
        // eta = 1/2 and equal transition times: both dwells equal t_det.
        let a = AnalogTimingModel::new(0.5, 1e-9, 1e-9).unwrap();
        let d = dwell_times(&a, 50e-9).unwrap();
        assert_relative_eq!(d.t_high, 50e-9, max_relative = 1e-14);
        assert_relative_eq!(d.t_low, 50e-9, max_relative = 1e-14);
    }

    #[test]
    fn dwell_zero_threshold_substitution() {
        // eta = 0, t_rise = 0: t_high = t_fall + t_det.
        let a = AnalogTimingModel::new(0.0, 0.0, 2e-9).unwrap();
        let d = dwell_times(&a, 40e-9).unwrap();
        assert_relative_eq!(d.t_high, 2e-9 + 40e-9, max_relative = 1e-14);
        assert_relative_eq!(d.t_low, 40e-9 - 2e-9, max_relative = 1e-14);
    }

    #[test]
    fn dwell_sum_identity() {
        let cases = [
            (0.3, 0.7e-9, 1.3e-9, 17e-9),
            (0.99, 0.5e-9, 0.51e-9, 12.5e-9),
            (0.0, 0.0, 0.9e-9, 100e-9),
        ];
        for (eta, tr, tf, t_det) in cases {
            let a = AnalogTimingModel::new(eta, tr, tf).unwrap();
            let d = dwell_times(&a, t_det).unwrap();
            assert_relative_eq!(d.t_high + d.t_low, 2.0 * t_det, max_relative = 1e-14);
            assert_relative_eq!(d.t_h, t_det - tr, max_relative = 1e-14);
            assert_relative_eq!(d.t_l, t_det - tf, max_relative = 1e-14);
        }
    }

    #[test]
    fn dwell_rejects_slow_transitions() {
        let a = AnalogTimingModel::new(0.5, 5e-9, 1e-9).unwrap();
        assert!(dwell_times(&a, 4e-9).is_err());
    }

    #[test]
    fn bias_model_values() {
        let a = AnalogTimingModel::new(0.5, 500e-12, 527.2e-12).unwrap();
        assert_relative_eq!(bias_coefficient(&a), 6.8e-12, max_relative = 1e-9);
        assert_eq!(predicted_bias(&a, 0.0), 0.0);
        // 6.8 ps * 45 MHz = 3.06e-4
        assert_relative_eq!(predicted_bias(&a, 45e6), 3.06e-4, max_relative = 1e-9);
    }

    #[test]
    fn zero_bias_threshold() {
        assert_relative_eq!(zero_bias_eta(1e-9, 1e-9).unwrap(), 0.5);
        assert_relative_eq!(zero_bias_eta(0.0, 1e-9).unwrap(), 1.0);
        assert_relative_eq!(zero_bias_eta(3e-9, 1e-9).unwrap(), 0.25);
        assert!(zero_bias_eta(0.0, 0.0).is_err());
        // At the zero-bias threshold the predicted bias vanishes for any
        // rate, up to the rounding of eta * (t_rise + t_fall).
        let eta = zero_bias_eta(500e-12, 527.2e-12).unwrap();
        let a = AnalogTimingModel::new(eta, 500e-12, 527.2e-12).unwrap();
        for f in [1e6, 45e6, 80e6] {
            assert!(predicted_bias(&a, f).abs() < 1e-15);
        }
    }

    #[test]
    fn bias_changes_sign_exactly_at_zero_bias_eta() {
        let (tr, tf) = (400e-12, 900e-12);
        let eta0 = zero_bias_eta(tr, tf).unwrap();
        let below = AnalogTimingModel::new(eta0 - 1e-6, tr, tf).unwrap();
        let above = AnalogTimingModel::new(eta0 + 1e-6, tr, tf).unwrap();
        assert!(predicted_bias(&below, 45e6) > 0.0);
        assert!(predicted_bias(&above, 45e6) < 0.0);
    }

    #[test]
    fn poisson_pmf_values() {
        assert_relative_eq!(poisson_pmf(0, 3.0), (-3.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(poisson_pmf(2, 1.0), 0.183939720585721, max_relative = 1e-12);
        let total: f64 = (0..=200).map(|k| poisson_pmf(k, 5.0)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert_eq!(poisson_pmf(3, 0.0), 0.0);
    }

    #[test]
    fn same_bit_prob_matches_even_poisson_sum() {
        for lambda in [0.1, 1.0, 5.0] {
            let direct: f64 = (0..=200).map(|k| poisson_pmf(2 * k, lambda)).sum();
            assert!(
                (direct - same_bit_prob_s1(lambda)).abs() < 1e-12,
                "lambda {lambda}"
            );
        }
        assert_eq!(same_bit_prob_s1(0.0), 1.0);
        assert_relative_eq!(
            same_bit_prob_s1(1.0),
            0.567667641618306,
            max_relative = 1e-12
        );
        assert!((same_bit_prob_s1(10.0) - 0.5) < 1.1e-9);
    }

    #[test]
    fn a1_ideal_consistent_with_s1() {
        for lambda in [0.0, 0.25, 1.0, 3.0, 7.5] {
            assert_relative_eq!(
                a1_ideal(lambda),
                2.0 * same_bit_prob_s1(lambda) - 1.0,
                max_relative = 1e-12
            );
        }
        assert_eq!(a1_ideal(0.0), 1.0);
        assert_relative_eq!(a1_ideal(1.0), 0.135335283236613, max_relative = 1e-12);
        assert_relative_eq!(a1_ideal(3.0), 2.478752176666358e-3, max_relative = 1e-12);
        // Monotone decreasing, values in (0, 1].
        let mut prev = a1_ideal(0.0);
        for i in 1..100 {
            let v = a1_ideal(i as f64 * 0.1);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn xor_propagation_values() {
        let p = xor_propagation(0.0, 0.0);
        assert_eq!((p.bias, p.autocorr1), (0.0, 0.0));

        let p = xor_propagation(5e-4, 5e-4);
        assert_relative_eq!(p.bias, -5e-7, max_relative = 1e-12);
        assert_relative_eq!(p.autocorr1, 2.51e-7, max_relative = 1e-12);

        let p = xor_propagation(0.05, 0.1);
        assert_relative_eq!(p.bias, -5e-3, max_relative = 1e-12);
        assert_relative_eq!(p.autocorr1, 0.012, max_relative = 1e-12);
    }

    #[test]
    fn xor_propagation_contracts() {
        // Output magnitudes never exceed inputs for |b| <= 1/4, |a1| <= 1/2.
        for &b in &[0.0, 0.05, 0.1, 0.25] {
            for &a1 in &[0.0, 0.1, 0.3, 0.5] {
                let p = xor_propagation(b, a1);
                assert!(p.bias.abs() <= b.abs() + 1e-15);
                assert!(p.autocorr1.abs() <= a1.abs() + 1e-15);
            }
        }
    }
}
