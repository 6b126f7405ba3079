//! Flat key = value config files and flag/file/default resolution.

use std::collections::HashMap;
use std::error::Error;
use std::path::Path;

use crate::PipelineArgs;

/// A parsed config file: keys normalized to underscores, values raw.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Box<dyn Error>> {
        let mut values = HashMap::new();
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(
                    format!("{}:{}: expected key = value", path.display(), lineno + 1).into(),
                );
            };
            values.insert(key.trim().replace('-', "_"), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Box<dyn Error>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key {key}: {e}").into()),
        }
    }
}

/// Fully resolved pipeline parameters (flag > config file > default).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResolvedPipeline {
    pub f_det: f64,
    pub f_bit: f64,
    pub dead_time: f64,
    pub eta: f64,
    pub t_rise: f64,
    pub t_fall: f64,
    pub stages: usize,
    pub n_bits: u64,
    pub seed: u64,
    pub phase: Option<f64>,
}

/// Defaults model the reference operating point: 45 Mcps detectors with
/// 6 ns dead time, a 20 MHz clock, and the 6.8 ps bias-coefficient analog
/// fixture.
pub fn resolve(
    args: &PipelineArgs,
    default_n_bits: u64,
) -> Result<ResolvedPipeline, Box<dyn Error>> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(ResolvedPipeline {
        f_det: args.f_det.or(file.get("f_det")?).unwrap_or(45e6),
        f_bit: args.f_bit.or(file.get("f_bit")?).unwrap_or(20e6),
        dead_time: args.dead_time.or(file.get("dead_time")?).unwrap_or(6e-9),
        eta: args.eta.or(file.get("eta")?).unwrap_or(0.5),
        t_rise: args.t_rise.or(file.get("t_rise")?).unwrap_or(500e-12),
        t_fall: args.t_fall.or(file.get("t_fall")?).unwrap_or(527.2e-12),
        stages: args.stages.or(file.get("stages")?).unwrap_or(1),
        n_bits: match args.n_bits {
            Some(n) => n,
            None => match file.get::<f64>("n_bits")? {
                Some(f) if f >= 1.0 && f.fract() == 0.0 => f as u64,
                Some(f) => {
                    return Err(format!("config n_bits {f} is not a positive integer").into())
                }
                None => default_n_bits,
            },
        },
        seed: args.seed.or(file.get("seed")?).unwrap_or(0),
        phase: args.phase.or(file.get("phase")?),
    })
}

/// Grid lists for the sweep commands (flag > config > default).
pub fn resolve_grid(
    flag: &Option<Vec<f64>>,
    file_key: &str,
    config: &Option<std::path::PathBuf>,
    default: &[f64],
) -> Result<Vec<f64>, Box<dyn Error>> {
    if let Some(v) = flag {
        if v.is_empty() {
            return Err(format!("{file_key}: empty grid").into());
        }
        return Ok(v.clone());
    }
    if let Some(path) = config {
        let file = ConfigFile::load(path)?;
        if let Some(raw) = file.values.get(file_key) {
            let v: Result<Vec<f64>, _> = raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let v = v.map_err(|e| format!("config key {file_key}: {e}"))?;
            if v.is_empty() {
                return Err(format!("{file_key}: empty grid").into());
            }
            return Ok(v);
        }
    }
    Ok(default.to_vec())
}
