//! Python bindings: the simulation pipeline, estimators, closed-form
//! predictions and the statistical test battery, driven in-process.
//!
//! Build with `cargo build -p rffsim-py --release` and import the
//! produced cdylib as `rffsim_py` (see python/smoke_test.py).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use rffsim_core::{analytic, bitstream, event_source, rff, stats, sts, synthetic};

fn pyerr(e: rffsim_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Detector model: observed rate, non-paralyzable dead time, seed.
#[pyclass(name = "DetectorConfig", from_py_object)]
#[derive(Clone)]
struct PyDetectorConfig {
    inner: event_source::DetectorConfig,
}

#[pymethods]
impl PyDetectorConfig {
    #[new]
    #[pyo3(signature = (f_det, dead_time=0.0, seed=0))]
    fn new(f_det: f64, dead_time: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: event_source::DetectorConfig::new(f_det, dead_time, seed).map_err(pyerr)?,
        })
    }

    #[getter]
    fn f_det(&self) -> f64 {
        self.inner.f_det
    }

    #[getter]
    fn dead_time(&self) -> f64 {
        self.inner.dead_time
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!(
            "DetectorConfig(f_det={}, dead_time={}, seed={})",
            self.inner.f_det, self.inner.dead_time, self.inner.seed
        )
    }
}

/// Threshold fraction and transition times of the sampled waveform.
#[pyclass(name = "AnalogTimingModel", from_py_object)]
#[derive(Clone)]
struct PyAnalogTimingModel {
    inner: rff::AnalogTimingModel,
}

#[pymethods]
impl PyAnalogTimingModel {
    #[new]
    #[pyo3(signature = (eta=0.5, t_rise=0.0, t_fall=0.0))]
    fn new(eta: f64, t_rise: f64, t_fall: f64) -> PyResult<Self> {
        Ok(Self {
            inner: rff::AnalogTimingModel::new(eta, t_rise, t_fall).map_err(pyerr)?,
        })
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn t_rise(&self) -> f64 {
        self.inner.t_rise
    }

    #[getter]
    fn t_fall(&self) -> f64 {
        self.inner.t_fall
    }

    fn __repr__(&self) -> String {
        format!(
            "AnalogTimingModel(eta={}, t_rise={}, t_fall={})",
            self.inner.eta, self.inner.t_rise, self.inner.t_fall
        )
    }
}

/// Sampling clock; phase=None draws the first-edge offset from the seed.
#[pyclass(name = "SamplerConfig", from_py_object)]
#[derive(Clone)]
struct PySamplerConfig {
    inner: rff::SamplerConfig,
}

#[pymethods]
impl PySamplerConfig {
    #[new]
    #[pyo3(signature = (f_bit, phase=None))]
    fn new(f_bit: f64, phase: Option<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: rff::SamplerConfig::new(f_bit, phase).map_err(pyerr)?,
        })
    }

    #[getter]
    fn f_bit(&self) -> f64 {
        self.inner.f_bit
    }

    #[getter]
    fn phase(&self) -> Option<f64> {
        self.inner.phase
    }
}

/// Full pipeline configuration for one generator.
#[pyclass(name = "QrngConfig", from_py_object)]
#[derive(Clone)]
struct PyQrngConfig {
    inner: rff::QrngConfig,
}

#[pymethods]
impl PyQrngConfig {
    #[new]
    fn new(
        stages: Vec<PyDetectorConfig>,
        analog: PyAnalogTimingModel,
        sampler: PySamplerConfig,
        n_bits: u64,
    ) -> PyResult<Self> {
        let cfg = rff::QrngConfig {
            stages: stages.into_iter().map(|s| s.inner).collect(),
            analog: analog.inner,
            sampler: sampler.inner,
            n_bits,
        };
        cfg.validate().map_err(pyerr)?;
        Ok(Self { inner: cfg })
    }

    /// n_stages detectors sharing f_det/dead_time, seeds derived from seed.
    #[staticmethod]
    #[pyo3(signature = (n_stages, f_det, dead_time, analog, sampler, n_bits, seed=0))]
    fn uniform(
        n_stages: usize,
        f_det: f64,
        dead_time: f64,
        analog: PyAnalogTimingModel,
        sampler: PySamplerConfig,
        n_bits: u64,
        seed: u64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: rff::QrngConfig::uniform_stages(
                n_stages,
                f_det,
                dead_time,
                analog.inner,
                sampler.inner,
                n_bits,
                seed,
            )
            .map_err(pyerr)?,
        })
    }

    #[getter]
    fn n_bits(&self) -> u64 {
        self.inner.n_bits
    }

    #[getter]
    fn n_stages(&self) -> usize {
        self.inner.n_stages()
    }
}

/// Packed bit stream (first bit in the MSB of byte 0).
#[pyclass(name = "BitStream", from_py_object)]
#[derive(Clone)]
struct PyBitStream {
    inner: bitstream::BitStream,
}

#[pymethods]
impl PyBitStream {
    /// Wrap packed bytes holding exactly n_bits (pad bits must be zero).
    #[staticmethod]
    fn from_bytes(data: Vec<u8>, n_bits: u64) -> PyResult<Self> {
        Ok(Self {
            inner: bitstream::BitStream::from_bytes(data, n_bits).map_err(pyerr)?,
        })
    }

    /// Parse a '0'/'1' string.
    #[staticmethod]
    fn from_bit_str(text: &str) -> Self {
        Self {
            inner: bitstream::BitStream::from_bit_str(text),
        }
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.bytes())
    }

    fn get(&self, i: u64) -> PyResult<bool> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("bit index {i} out of range")));
        }
        Ok(self.inner.get(i))
    }

    fn count_ones(&self) -> u64 {
        self.inner.count_ones()
    }

    fn __len__(&self) -> usize {
        self.inner.len() as usize
    }

    fn __xor__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: bitstream::xor_streams(&self.inner, &other.inner).map_err(pyerr)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("BitStream(n_bits={})", self.inner.len())
    }
}

/// Pre-dead-time Poisson rate that yields the configured detection rate.
#[pyfunction]
fn underlying_arrival_rate(cfg: &PyDetectorConfig) -> PyResult<f64> {
    event_source::underlying_arrival_rate(&cfg.inner).map_err(pyerr)
}

/// Detection timestamps (seconds) for n_events.
#[pyfunction]
fn generate_detections(cfg: &PyDetectorConfig, n_events: usize) -> PyResult<Vec<f64>> {
    Ok(event_source::generate_detections(&cfg.inner, n_events)
        .map_err(pyerr)?
        .times()
        .to_vec())
}

/// Run the full generator pipeline.
#[pyfunction]
fn simulate_qrng(cfg: &PyQrngConfig) -> PyResult<PyBitStream> {
    Ok(PyBitStream {
        inner: rff::simulate_qrng(&cfg.inner).map_err(pyerr)?,
    })
}

/// Bias estimate as (value, stderr).
#[pyfunction]
fn bias(x: &PyBitStream) -> PyResult<(f64, f64)> {
    let b = stats::bias(&x.inner).map_err(pyerr)?;
    Ok((b.value, b.std_error()))
}

/// Lag-k autocorrelation as (value, stderr).
#[pyfunction]
fn autocorr(x: &PyBitStream, k: u64) -> PyResult<(f64, f64)> {
    let a = stats::autocorr(&x.inner, k).map_err(pyerr)?;
    Ok((a.value, a.std_error()))
}

/// [(lag, value, stderr)] for lags 1..=k_max.
#[pyfunction]
fn autocorr_profile(x: &PyBitStream, k_max: u64) -> PyResult<Vec<(u64, f64, f64)>> {
    Ok(stats::autocorr_profile(&x.inner, k_max)
        .map_err(pyerr)?
        .into_iter()
        .map(|e| (e.lag, e.value, e.std_error()))
        .collect())
}

/// Shannon entropy of overlapping l-grams, in bits.
#[pyfunction]
fn ngram_entropy(x: &PyBitStream, l: u32) -> PyResult<f64> {
    stats::ngram_entropy(&x.inner, l).map_err(pyerr)
}

#[pyfunction]
fn frequency_test(x: &PyBitStream) -> PyResult<f64> {
    sts::frequency_test(&x.inner).map_err(pyerr)
}

#[pyfunction]
fn runs_test(x: &PyBitStream) -> PyResult<f64> {
    sts::runs_test(&x.inner).map_err(pyerr)
}

#[pyfunction]
fn fft_test(x: &PyBitStream) -> PyResult<f64> {
    sts::fft_test(&x.inner).map_err(pyerr)
}

#[pyfunction]
fn universal_test(x: &PyBitStream) -> PyResult<f64> {
    sts::universal_test(&x.inner).map_err(pyerr)
}

#[pyfunction]
fn approximate_entropy_test(x: &PyBitStream, m: u32) -> PyResult<f64> {
    sts::approximate_entropy_test(&x.inner, m).map_err(pyerr)
}

/// Run the battery and return the full report as a JSON string.
#[pyfunction]
#[pyo3(signature = (x, block_size=1_000_000, apen_m=vec![3, 10]))]
fn run_battery_json(x: &PyBitStream, block_size: u64, apen_m: Vec<u32>) -> PyResult<String> {
    let kinds = sts::TestKind::default_battery(&apen_m);
    let report = sts::run_battery(&x.inner, block_size, &kinds).map_err(pyerr)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Predicted single-stage bias alpha * f_det.
#[pyfunction]
fn predicted_bias(analog: &PyAnalogTimingModel, f_det: f64) -> f64 {
    analytic::predicted_bias(&analog.inner, f_det)
}

/// Threshold fraction at which bias vanishes.
#[pyfunction]
fn zero_bias_eta(t_rise: f64, t_fall: f64) -> PyResult<f64> {
    analytic::zero_bias_eta(t_rise, t_fall).map_err(pyerr)
}

/// Ideal lag-1 autocorrelation e^(-2 lambda).
#[pyfunction]
fn a1_ideal(lambda: f64) -> f64 {
    analytic::a1_ideal(lambda)
}

/// Probability that two bits one sample apart agree.
#[pyfunction]
fn same_bit_prob_s1(lambda: f64) -> f64 {
    analytic::same_bit_prob_s1(lambda)
}

#[pyfunction]
fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    analytic::poisson_pmf(k, lambda)
}

/// (bias', a1') after XOR of two independent streams with equal stats.
#[pyfunction]
fn xor_propagation(b: f64, a1: f64) -> (f64, f64) {
    let p = analytic::xor_propagation(b, a1);
    (p.bias, p.autocorr1)
}

/// (t_high, t_low, t_h, t_l) for a mean detection period.
#[pyfunction]
fn dwell_times(analog: &PyAnalogTimingModel, t_det: f64) -> PyResult<(f64, f64, f64, f64)> {
    let d = analytic::dwell_times(&analog.inner, t_det).map_err(pyerr)?;
    Ok((d.t_high, d.t_low, d.t_h, d.t_l))
}

/// Unbiased reference bits straight from the simulation PRNG.
#[pyfunction]
fn prng_stream(n_bits: u64, seed: u64) -> PyBitStream {
    PyBitStream {
        inner: synthetic::prng_stream(n_bits, seed),
    }
}

/// Independent bits with P(1) = p_one.
#[pyfunction]
fn iid_stream(p_one: f64, n_bits: u64, seed: u64) -> PyResult<PyBitStream> {
    Ok(PyBitStream {
        inner: synthetic::iid_stream(p_one, n_bits, seed).map_err(pyerr)?,
    })
}

/// Zero-bias stream with injected lag-1 autocorrelation.
#[pyfunction]
fn markov_stream(a1: f64, n_bits: u64, seed: u64) -> PyResult<PyBitStream> {
    Ok(PyBitStream {
        inner: synthetic::markov_stream(a1, n_bits, seed).map_err(pyerr)?,
    })
}

#[pymodule]
fn rffsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDetectorConfig>()?;
    m.add_class::<PyAnalogTimingModel>()?;
    m.add_class::<PySamplerConfig>()?;
    m.add_class::<PyQrngConfig>()?;
    m.add_class::<PyBitStream>()?;
    m.add_function(wrap_pyfunction!(underlying_arrival_rate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_detections, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_qrng, m)?)?;
    m.add_function(wrap_pyfunction!(bias, m)?)?;
    m.add_function(wrap_pyfunction!(autocorr, m)?)?;
    m.add_function(wrap_pyfunction!(autocorr_profile, m)?)?;
    m.add_function(wrap_pyfunction!(ngram_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_test, m)?)?;
    m.add_function(wrap_pyfunction!(runs_test, m)?)?;
    m.add_function(wrap_pyfunction!(fft_test, m)?)?;
    m.add_function(wrap_pyfunction!(universal_test, m)?)?;
    m.add_function(wrap_pyfunction!(approximate_entropy_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_battery_json, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_bias, m)?)?;
    m.add_function(wrap_pyfunction!(zero_bias_eta, m)?)?;
    m.add_function(wrap_pyfunction!(a1_ideal, m)?)?;
    m.add_function(wrap_pyfunction!(same_bit_prob_s1, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(xor_propagation, m)?)?;
    m.add_function(wrap_pyfunction!(dwell_times, m)?)?;
    m.add("UNIMPLEMENTED_TESTS", sts::UNIMPLEMENTED_TESTS.to_vec())?;
    m.add_function(wrap_pyfunction!(prng_stream, m)?)?;
    m.add_function(wrap_pyfunction!(iid_stream, m)?)?;
    m.add_function(wrap_pyfunction!(markov_stream, m)?)?;
    Ok(())
}
