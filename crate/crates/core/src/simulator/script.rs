use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::Vec3;

use super::SimError;

/// One scripted hand sample. A `None` goal means the hand lets go of the
/// stylus.
#[derive(Clone, Debug, PartialEq)]
pub struct ScriptSample {
    pub t: f64,
    pub goal: Option<Vec3>,
    pub select: bool,
    pub brush: bool,
    pub erase: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    t: f64,
    x: Option<f64>,
    y: Option<f64>,
    z: Option<f64>,
    #[serde(default)]
    select: bool,
    #[serde(default)]
    brush: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    erase: bool,
}

#[derive(Serialize, Deserialize)]
struct RawHeader {
    sample_rate: f64,
}

/// Scripted goal positions and button states standing in for a user's hand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryScript {
    /// Nominal sample rate in Hz, informational only.
    pub sample_rate: Option<f64>,
    pub samples: Vec<ScriptSample>,
}

impl TrajectoryScript {
    pub fn new(samples: Vec<ScriptSample>) -> Self {
        Self {
            sample_rate: None,
            samples,
        }
    }

    /// Straight line from `a` to `b` over `duration` seconds, sampled at `rate` Hz.
    pub fn line(a: Vec3, b: Vec3, duration: f64, rate: f64) -> Self {
        let n = ((duration * rate).round() as usize).max(1);
        let samples = (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                ScriptSample {
                    t: duration * f,
                    goal: Some(a + (b - a) * f),
                    select: false,
                    brush: false,
                    erase: false,
                }
            })
            .collect();
        Self {
            sample_rate: Some(rate),
            samples,
        }
    }

    /// Checks that times are finite and strictly increasing and goals finite.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut prev = f64::NEG_INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            if !s.t.is_finite() || s.t <= prev {
                return Err(SimError::InvalidScript(format!(
                    "sample {i}: time {} not strictly increasing",
                    s.t
                )));
            }
            if s.goal.is_some_and(|g| !g.iter().all(|v| v.is_finite())) {
                return Err(SimError::InvalidScript(format!(
                    "sample {i}: non-finite goal"
                )));
            }
            prev = s.t;
        }
        Ok(())
    }

    /// Indices of samples whose goal lies outside the box `center ± extents/2`.
    pub fn outside(&self, center: &Vec3, extents: &[f64; 3]) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.goal
                    .is_some_and(|g| (0..3).any(|a| (g[a] - center[a]).abs() > 0.5 * extents[a]))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the last sample at or before `t`.
    fn segment(&self, t: f64) -> usize {
        self.samples.partition_point(|s| s.t <= t).saturating_sub(1)
    }

    /// Goal at time `t`, linear between two held samples, otherwise held.
    pub fn goal_at(&self, t: f64) -> Option<Vec3> {
        let i = self.segment(t);
        let a = self.samples.get(i)?;
        match (a.goal, self.samples.get(i + 1)) {
            (Some(ga), Some(b)) if t > a.t => match b.goal {
                Some(gb) => Some(ga + (gb - ga) * ((t - a.t) / (b.t - a.t))),
                None => Some(ga),
            },
            (g, _) => g,
        }
    }

    /// Button states `(select, brush, erase)` of the last sample at or before `t`.
    pub fn buttons_at(&self, t: f64) -> (bool, bool, bool) {
        match self.samples.get(self.segment(t)) {
            Some(s) if s.t <= t => (s.select, s.brush, s.erase),
            _ => (false, false, false),
        }
    }

    /// Reads JSON lines. An optional first line `{"sample_rate": …}` sets the rate.
    pub fn from_jsonl(reader: impl BufRead) -> Result<Self, SimError> {
        let mut script = Self::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if n == 0 {
                if let Ok(h) = serde_json::from_str::<RawHeader>(line) {
                    if !line.contains("\"t\"") {
                        script.sample_rate = Some(h.sample_rate);
                        continue;
                    }
                }
            }
            let raw: RawSample = serde_json::from_str(line)
                .map_err(|e| SimError::InvalidScript(format!("line {}: {e}", n + 1)))?;
            let goal = match (raw.x, raw.y, raw.z) {
                (Some(x), Some(y), Some(z)) => Some(Vec3::new(x, y, z)),
                (None, None, None) => None,
                _ => {
                    return Err(SimError::InvalidScript(format!(
                        "line {}: partial position",
                        n + 1
                    )))
                }
            };
            script.samples.push(ScriptSample {
                t: raw.t,
                goal,
                select: raw.select,
                brush: raw.brush,
                erase: raw.erase,
            });
        }
        script.validate()?;
        Ok(script)
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> Result<(), SimError> {
        if let Some(rate) = self.sample_rate {
            serde_json::to_writer(&mut w, &RawHeader { sample_rate: rate })?;
            writeln!(w)?;
        }
        for s in &self.samples {
            let raw = RawSample {
                t: s.t,
                x: s.goal.map(|g| g.x),
                y: s.goal.map(|g| g.y),
                z: s.goal.map(|g| g.z),
                select: s.select,
                brush: s.brush,
                erase: s.erase,
            };
            serde_json::to_writer(&mut w, &raw)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
