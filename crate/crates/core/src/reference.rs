//! Desired live-weight trajectory w^d(t).

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::growth::{simulate, ControlInput, GrowthParams, SimConfig};

/// Sampled reference curve with linear interpolation between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct ReferenceTrajectory {
    samples: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for ReferenceTrajectory {
    type Error = Error;

    fn try_from(samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(samples)
    }
}

impl From<ReferenceTrajectory> for Vec<(f64, f64)> {
    fn from(r: ReferenceTrajectory) -> Self {
        r.samples
    }
}

impl ReferenceTrajectory {
    /// Builds a trajectory from `(t_days, w_d_g)` pairs.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation(format!(
                "reference needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, &(t, w)) in samples.iter().enumerate() {
            if !t.is_finite() || !w.is_finite() {
                return Err(Error::Validation(format!(
                    "reference sample {i} is not finite"
                )));
            }
            if w <= 0.0 {
                return Err(Error::Validation(format!(
                    "reference weight must be positive, sample {i} has {w}"
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|p| p[1].0 <= p[0].0) {
            return Err(Error::Validation(format!(
                "reference time must be strictly increasing, sample {} follows {}",
                i + 1,
                i
            )));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn start(&self) -> f64 {
        self.samples[0].0
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    /// Linear interpolation, held at the endpoint values outside the sampled span.
    pub fn sample(&self, t: f64) -> f64 {
        let first = self.samples[0];
        let last = self.samples[self.samples.len() - 1];
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        // First sample strictly after t; guaranteed to be in 1..len.
        let hi = self.samples.partition_point(|&(ts, _)| ts <= t);
        let (t0, w0) = self.samples[hi - 1];
        let (t1, w1) = self.samples[hi];
        if t == t0 {
            return w0;
        }
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// Reference generated by running the model under constant nominal inputs,
/// sampled once per period.
pub fn generate_nominal_reference(
    w0: f64,
    duration: f64,
    nominal: &ControlInput,
    cfg: &SimConfig,
    p: &GrowthParams,
) -> Result<ReferenceTrajectory> {
    if !(duration >= 1.0) {
        return Err(Error::Argument(format!(
            "reference duration must be at least one day, got {duration}"
        )));
    }
    if !(nominal.feed_rate > 0.0) {
        return Err(Error::Argument(format!(
            "nominal feed rate must be positive so the reference grows, got {}",
            nominal.feed_rate
        )));
    }
    let periods = whole_periods(duration, cfg.epsilon)?;
    let states = simulate(w0, &vec![*nominal; periods], cfg, p)?;
    if states.windows(2).any(|s| s[1].w <= s[0].w) {
        return Err(Error::Argument(
            "nominal inputs do not produce a growing reference".into(),
        ));
    }
    ReferenceTrajectory::new(states.iter().map(|s| (s.t, s.w)).collect())
}

/// Number of sampling periods in `duration`, which must be a whole multiple of `epsilon`.
pub(crate) fn whole_periods(duration: f64, epsilon: f64) -> Result<usize> {
    let periods = (duration / epsilon).round();
    if !periods.is_finite()
        || periods < 0.0
        || (periods * epsilon - duration).abs() > 1e-9 * duration.max(1.0)
    {
        return Err(Error::Argument(format!(
            "duration {duration} is not a whole multiple of the sampling period {epsilon}"
        )));
    }
    Ok(periods as usize)
}

/// Parses `t_days,w_d_g` rows. A single non-numeric header row is allowed.
pub fn parse_reference(text: &str) -> Result<ReferenceTrajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    let mut prev_t: Option<(f64, u64)> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let t = record[0].parse::<f64>();
        let w = record[1].parse::<f64>();
        let (t, w) = match (t, w) {
            (Ok(t), Ok(w)) => (t, w),
            _ if idx == 0
                && record[0].parse::<f64>().is_err()
                && record[1].parse::<f64>().is_err() =>
            {
                continue
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-numeric row `{},{}`", &record[0], &record[1]),
                })
            }
        };
        if w <= 0.0 {
            return Err(Error::Validation(format!(
                "line {line}: reference weight must be positive, got {w}"
            )));
        }
        if let Some((pt, pl)) = prev_t {
            if t <= pt {
                return Err(Error::Validation(format!(
                    "line {line}: time {t} does not increase past {pt} (line {pl})"
                )));
            }
        }
        prev_t = Some((t, line));
        samples.push((t, w));
    }
    ReferenceTrajectory::new(samples)
}

pub fn load_reference(path: impl AsRef<Path>) -> Result<ReferenceTrajectory> {
    parse_reference(&std::fs::read_to_string(path)?)
}
