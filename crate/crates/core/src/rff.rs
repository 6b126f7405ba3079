//! The random flip-flop sampling chain.
//!
//! A toggle flip-flop (TFF) inverts its output at every detection event. A
//! data flip-flop (DFF) samples that output at a periodic clock. The analog
//! model captures when the DFF's input *interprets* a transition: with a
//! linear voltage ramp and input threshold `eta`, a rising edge starting at
//! `t` is seen at `t + eta * t_rise` and a falling edge at
//! `t + (1 - eta) * t_fall`. XOR-combining the outputs of independent
//! stages builds the improved multi-stage generator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::{xor_streams, BitStream};
use crate::error::{Error, Result};
use crate::event_source::{DetectionIter, DetectionTimes, DetectorConfig};
use crate::seeding::{derive_seed, open01, substream};

/// Stream id reserved for the clock-phase draw, away from detection streams.
const PHASE_STREAM: u64 = 0x0C10_C000;

/// Threshold / rise-time / fall-time model of the sampled waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogTimingModel {
    /// Input threshold as a fraction of the logic voltage swing, in [0, 1].
    pub eta: f64,
    /// Rise time in seconds (>= 0).
    pub t_rise: f64,
    /// Fall time in seconds (>= 0).
    pub t_fall: f64,
}

impl AnalogTimingModel {
    pub fn new(eta: f64, t_rise: f64, t_fall: f64) -> Result<Self> {
        let a = Self {
            eta,
            t_rise,
            t_fall,
        };
        a.validate()?;
        Ok(a)
    }

    /// Instantaneous transitions: crossings coincide with toggle instants.
    pub fn ideal() -> Self {
        Self {
            eta: 0.5,
            t_rise: 0.0,
            t_fall: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!(
                "threshold fraction must be in [0, 1], got {}",
                self.eta
            )));
        }
        if self.t_rise < 0.0
            || self.t_fall < 0.0
            || !self.t_rise.is_finite()
            || !self.t_fall.is_finite()
        {
            return Err(Error::InvalidConfig(
                "rise and fall times must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Delay from a 0->1 toggle to the DFF seeing HIGH.
    #[inline]
    pub fn rise_offset(&self) -> f64 {
        self.eta * self.t_rise
    }

    /// Delay from a 1->0 toggle to the DFF seeing LOW.
    #[inline]
    pub fn fall_offset(&self) -> f64 {
        (1.0 - self.eta) * self.t_fall
    }
}

/// Periodic sampling clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Clock frequency in Hz.
    pub f_bit: f64,
    /// Offset of the first clock edge in seconds. `None` means "draw a
    /// uniform offset in [0, 1/f_bit) from the seed", which
    /// [`simulate_qrng`] resolves; [`sample_bits`] treats `None` as 0.
    pub phase: Option<f64>,
}

impl SamplerConfig {
    pub fn new(f_bit: f64, phase: Option<f64>) -> Result<Self> {
        let s = Self { f_bit, phase };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.f_bit <= 0.0 || !self.f_bit.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "bit rate must be positive, got {}",
                self.f_bit
            )));
        }
        if let Some(p) = self.phase {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "clock phase must be non-negative, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Resolve the first-edge offset, drawing it from `seed` when unset.
    pub fn resolve_phase(&self, seed: u64) -> f64 {
        match self.phase {
            Some(p) => p,
            None => open01(&mut substream(seed, PHASE_STREAM)) / self.f_bit,
        }
    }
}

/// Direction of a logic-level change seen by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    Rising,
    Falling,
}

/// One logic-level change at the DFF input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub direction: CrossingDirection,
}

/// Logic-level changes produced by toggling on each detection.
///
/// The TFF starts at `initial_state` and inverts on every detection; each
/// toggle becomes visible after the direction-dependent analog offset.
/// Crossings must come out strictly increasing, otherwise the event
/// spacing cannot support the configured transitions.
pub fn threshold_crossings(
    d: &DetectionTimes,
    a: &AnalogTimingModel,
    initial_state: bool,
) -> Result<Vec<Crossing>> {
    a.validate()?;
    let rise = a.rise_offset();
    let fall = a.fall_offset();
    let mut out = Vec::with_capacity(d.len());
    let mut state = initial_state;
    let mut last = f64::NEG_INFINITY;
    for (i, &t) in d.times().iter().enumerate() {
        let direction = if state {
            CrossingDirection::Falling
        } else {
            CrossingDirection::Rising
        };
        let time = match direction {
            CrossingDirection::Rising => t + rise,
            CrossingDirection::Falling => t + fall,
        };
        if time <= last {
            return Err(Error::NonMonotonicCrossings { index: i as u64 });
        }
        out.push(Crossing { time, direction });
        last = time;
        state = !state;
    }
    Ok(out)
}

/// Sample the logic level at the periodic clock edges.
///
/// Bit k is the level at `phase + k / f_bit`. A crossing exactly coincident
/// with an edge is not yet seen: the edge samples the pre-transition value.
pub fn sample_bits(
    crossings: &[Crossing],
    s: &SamplerConfig,
    n_bits: u64,
    initial_state: bool,
) -> BitStream {
    assert!(
        crossings.windows(2).all(|w| w[0].time < w[1].time),
        "crossings must be strictly increasing"
    );
    let phase = s.phase.unwrap_or(0.0);
    let mut out = BitStream::with_capacity(n_bits);
    let mut level = initial_state;
    let mut next = 0usize;
    for k in 0..n_bits {
        let edge = phase + k as f64 / s.f_bit;
        while next < crossings.len() && crossings[next].time < edge {
            level = !level;
            next += 1;
        }
        out.push(level);
    }
    out
}

/// Full pipeline parameters for one generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrngConfig {
    /// One detector per stage; stage seeds must be pairwise distinct.
    pub stages: Vec<DetectorConfig>,
    /// Analog model shared by all stages.
    pub analog: AnalogTimingModel,
    /// Sampling clock shared by all stages.
    pub sampler: SamplerConfig,
    /// Number of bits to generate.
    pub n_bits: u64,
}

impl QrngConfig {
    /// Single knob constructor: `n_stages` detectors sharing `f_det` and
    /// `dead_time`, with per-stage seeds derived from `seed`.
    pub fn uniform_stages(
        n_stages: usize,
        f_det: f64,
        dead_time: f64,
        analog: AnalogTimingModel,
        sampler: SamplerConfig,
        n_bits: u64,
        seed: u64,
    ) -> Result<Self> {
        let stages = (0..n_stages)
            .map(|i| DetectorConfig::new(f_det, dead_time, derive_seed(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let cfg = Self {
            stages,
            analog,
            sampler,
            n_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidConfig("need at least one stage".into()));
        }
        for st in &self.stages {
            st.validate()?;
        }
        let mut seeds: Vec<u64> = self.stages.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.stages.len() {
            return Err(Error::InvalidConfig(
                "stage seeds must be pairwise distinct".into(),
            ));
        }
        self.analog.validate()?;
        self.sampler.validate()?;
        if self.n_bits == 0 {
            return Err(Error::InvalidConfig("n_bits must be >= 1".into()));
        }
        Ok(())
    }
}

/// Simulate one TFF/DFF stage without materializing the event stream.
///
/// Detections, crossings and sampled bits are produced in lockstep, so the
/// memory footprint is the packed output stream only.
pub fn simulate_stage(
    det: &DetectorConfig,
    analog: &AnalogTimingModel,
    f_bit: f64,
    phase: f64,
    n_bits: u64,
    initial_state: bool,
) -> Result<BitStream> {
    analog.validate()?;
    let rise = analog.rise_offset();
    let fall = analog.fall_offset();
    let mut detections = DetectionIter::new(det, 0)?;
    let mut out = BitStream::with_capacity(n_bits);

    let mut level = initial_state; // level currently seen by the DFF
    let mut tff = initial_state; // actual TFF state
    let mut pending: Option<f64> = None; // next crossing not yet sampled
    let mut last_crossing = f64::NEG_INFINITY;
    let mut event_index: u64 = 0;

    for k in 0..n_bits {
        let edge = phase + k as f64 / f_bit;
        loop {
            if pending.is_none() {
                let t = detections.next().expect("detection stream is infinite");
                let time = if tff { t + fall } else { t + rise };
                if time <= last_crossing {
                    return Err(Error::NonMonotonicCrossings { index: event_index });
                }
                tff = !tff;
                event_index += 1;
                pending = Some(time);
            }
            // A crossing exactly on the edge is not yet seen.
            match pending {
                Some(c) if c < edge => {
                    level = !level;
                    last_crossing = c;
                    pending = None;
                }
                _ => break,
            }
        }
        out.push(level);
    }
    Ok(out)
}

/// Run the full generator: per-stage detection/toggle/sample pipelines,
/// XOR-folded in stage order. Deterministic for a fixed config.
pub fn simulate_qrng(cfg: &QrngConfig) -> Result<BitStream> {
    cfg.validate()?;
    let phase = cfg.sampler.resolve_phase(cfg.stages[0].seed);
    let streams: Vec<BitStream> = cfg
        .stages
        .par_iter()
        .map(|det| {
            simulate_stage(
                det,
                &cfg.analog,
                cfg.sampler.f_bit,
                phase,
                cfg.n_bits,
                false,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut iter = streams.into_iter();
    let first = iter.next().expect("validated: at least one stage");
    iter.try_fold(first, |acc, s| xor_streams(&acc, &s))
}
