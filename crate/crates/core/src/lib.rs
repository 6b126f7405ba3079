//! Simulation and analysis toolkit for random flip-flop (RFF) quantum
//! random number generators.
//!
//! The pipeline models a single-photon detector as a Poisson event stream
//! with a fixed non-paralyzable dead time ([`event_source`]), feeds the
//! events into a toggle flip-flop that is periodically sampled by a data
//! flip-flop through an analog threshold/rise/fall timing model
//! ([`rff`]), and optionally XOR-combines several independent stages into
//! one output stream. Closed-form predictions for the bias and the serial
//! autocorrelation of such generators live in [`analytic`], empirical
//! estimators in [`stats`], and a subset of the NIST SP 800-22 statistical
//! test suite with block-wise p-value aggregation in [`sts`].

pub mod analytic;
pub mod bitstream;
pub mod error;
pub mod event_source;
pub mod rff;
pub mod seeding;
pub mod stats;
pub mod sts;
pub mod synthetic;

pub use bitstream::{xor_streams, BitStream};
pub use error::{Error, Result};
pub use event_source::{
    generate_detections, underlying_arrival_rate, DetectionTimes, DetectorConfig,
};
pub use rff::{
    sample_bits, simulate_qrng, threshold_crossings, AnalogTimingModel, QrngConfig, SamplerConfig,
};
