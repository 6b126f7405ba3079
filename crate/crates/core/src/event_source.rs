//! Simulated photon-detection event streams.
//!
//! Detections are a homogeneous Poisson process thinned by a fixed
//! non-paralyzable dead time: after every detection the detector is blind
//! for `dead_time` seconds, so each exponential waiting time is extended
//! by that amount. The user specifies the *observed* mean detection rate
//! `f_det`; the generator inverts the dead-time relation internally so the
//! long-run output rate matches `f_det`.

use std::io::Write;
use std::path::Path;

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{exp_variate, substream};

/// Detector model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Target mean detection rate in events/second.
    pub f_det: f64,
    /// Non-paralyzable dead time in seconds (>= 0).
    pub dead_time: f64,
    /// Reproducibility seed.
    pub seed: u64,
}

impl DetectorConfig {
    pub fn new(f_det: f64, dead_time: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            f_det,
            dead_time,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.f_det <= 0.0 || !self.f_det.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "detection rate must be positive, got {}",
                self.f_det
            )));
        }
        if self.dead_time < 0.0 || !self.dead_time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dead time must be non-negative, got {}",
                self.dead_time
            )));
        }
        if self.f_det * self.dead_time >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "detection rate {} is unreachable with dead time {} (f_det * dead_time = {} >= 1)",
                self.f_det,
                self.dead_time,
                self.f_det * self.dead_time
            )));
        }
        Ok(())
    }
}

/// Pre-dead-time Poisson arrival rate that yields `cfg.f_det` after the
/// non-paralyzable dead time: r = f / (1 - f * tau), the inverse of
/// f = r / (1 + r * tau).
pub fn underlying_arrival_rate(cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.f_det / (1.0 - cfg.f_det * cfg.dead_time))
}

/// A finished, strictly increasing sequence of detection timestamps.
#[derive(Debug, Clone)]
pub struct DetectionTimes {
    times: Vec<f64>,
    span: f64,
    dead_time: f64,
}

impl DetectionTimes {
    /// Timestamps in seconds, strictly increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Total simulated duration (time of the last detection).
    pub fn span(&self) -> f64 {
        self.span
    }

    /// Dead time of the generating config.
    pub fn dead_time(&self) -> f64 {
        self.dead_time
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Waiting times between consecutive detections.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

/// Infinite iterator of detection timestamps for one substream.
///
/// Streams events one at a time so billion-event pipelines never
/// materialize a timestamp buffer.
pub struct DetectionIter {
    rng: ChaCha12Rng,
    rate: f64,
    dead_time: f64,
    t: f64,
}

impl DetectionIter {
    pub fn new(cfg: &DetectorConfig, stream: u64) -> Result<Self> {
        let rate = underlying_arrival_rate(cfg)?;
        Ok(Self {
            rng: substream(cfg.seed, stream),
            rate,
            dead_time: cfg.dead_time,
            t: 0.0,
        })
    }
}

impl Iterator for DetectionIter {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let wait = self.dead_time + exp_variate(&mut self.rng, self.rate);
        let mut next = self.t + wait;
        // With dead_time = 0 a tiny waiting time can round to no increment
        // once t is large; keep the sequence strictly increasing.
        if next <= self.t {
            next = self.t.next_up();
        }
        self.t = next;
        Some(next)
    }
}

/// Generate `n_events` detection timestamps.
///
/// Deterministic for a fixed `(cfg, n_events)`; waiting times are i.i.d.
/// exponential with the underlying arrival rate, each extended by the
/// dead time.
pub fn generate_detections(cfg: &DetectorConfig, n_events: usize) -> Result<DetectionTimes> {
    if n_events == 0 {
        return Err(Error::InvalidInput("n_events must be >= 1".into()));
    }
    let iter = DetectionIter::new(cfg, 0)?;
    let times: Vec<f64> = iter.take(n_events).collect();
    let span = *times.last().expect("n_events >= 1");
    Ok(DetectionTimes {
        times,
        span,
        dead_time: cfg.dead_time,
    })
}

/// Histogram of waiting times with an exponential tail fit.
#[derive(Debug, Clone)]
pub struct WaitingTimeHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Decay rate fitted to log-counts beyond the dead-time region; this
    /// estimates the underlying (pre-dead-time) arrival rate. `None` when
    /// fewer than two usable bins exist.
    pub fitted_rate: Option<f64>,
}

/// Bin consecutive waiting times and fit the exponential tail.
///
/// The fit is least squares of ln(count) against the bin center over all
/// non-empty bins whose lower edge lies at or beyond the dead time, each
/// point weighted by its count (the usual Poisson weighting for
/// log-counts).
pub fn waiting_time_histogram(d: &DetectionTimes, bin_width: f64) -> Result<WaitingTimeHistogram> {
    if d.len() < 2 {
        return Err(Error::TooFewEvents);
    }
    if bin_width <= 0.0 || !bin_width.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let max_gap = d.gaps().fold(0.0_f64, f64::max);
    let n_bins = (max_gap / bin_width).floor() as usize + 1;
    let mut counts = vec![0u64; n_bins];
    for gap in d.gaps() {
        let idx = ((gap / bin_width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }

    // Weighted least squares of ln(c) on the bin center.
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut used = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        let lower = i as f64 * bin_width;
        if c == 0 || lower < d.dead_time() {
            continue;
        }
        let x = lower + 0.5 * bin_width;
        let y = (c as f64).ln();
        let w = c as f64;
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        used += 1;
    }
    let fitted_rate = if used >= 2 {
        let denom = sw * sxx - sx * sx;
        if denom > 0.0 {
            let slope = (sw * sxy - sx * sy) / denom;
            Some(-slope)
        } else {
            None
        }
    } else {
        None
    };

    Ok(WaitingTimeHistogram {
        bin_width,
        counts,
        fitted_rate,
    })
}

/// JSON sidecar written next to a timestamp export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimestampSidecar {
    pub schema_version: u32,
    pub rate: f64,
    pub dead_time: f64,
    pub seed: u64,
    pub count: u64,
}

/// Export timestamps as raw 64-bit little-endian picosecond values with a
/// JSON sidecar at `<path>.json`. The binary file has no header.
pub fn write_timestamps(d: &DetectionTimes, cfg: &DetectorConfig, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for &t in d.times() {
        let ps = (t * 1e12).round();
        if ps < 0.0 || ps > u64::MAX as f64 {
            return Err(Error::InvalidInput(format!(
                "timestamp {t} s out of picosecond export range"
            )));
        }
        file.write_all(&(ps as u64).to_le_bytes())?;
    }
    file.flush()?;
    let sidecar = TimestampSidecar {
        schema_version: 1,
        rate: cfg.f_det,
        dead_time: cfg.dead_time,
        seed: cfg.seed,
        count: d.len() as u64,
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(path.with_extension("json"), json)?;
    Ok(())
}

/// Read a timestamp export back: picosecond values plus its sidecar.
pub fn read_timestamps(path: &Path) -> Result<(Vec<u64>, TimestampSidecar)> {
    let raw = std::fs::read(path)?;
    if raw.len() % 8 != 0 {
        return Err(Error::BadFormat(format!(
            "timestamp file length {} is not a multiple of 8",
            raw.len()
        )));
    }
    let times: Vec<u64> = raw
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let sidecar: TimestampSidecar =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
    if sidecar.count != times.len() as u64 {
        return Err(Error::BadFormat(format!(
            "sidecar count {} does not match file ({} timestamps)",
            sidecar.count,
            times.len()
        )));
    }
    Ok((times, sidecar))
}
