use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::forcemodel::{ForceParams, Zone};
use crate::Vec3;

use super::{Mode, SimError};

/// Per-frame record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    /// Stylus position, quantized to the device resolution.
    pub s: Vec3,
    /// Proxy position, quantized to the device resolution.
    pub p: Vec3,
    pub zone: Zone,
    pub touching: bool,
    #[serde(default)]
    pub select: bool,
    #[serde(default)]
    pub brush: bool,
    #[serde(default)]
    pub erase: bool,
    /// Surface point under the pointer, if any.
    #[serde(default)]
    pub highlight: Option<Vec3>,
    pub f_spring: Vec3,
    pub f_snap: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub mode: Mode,
    pub task: String,
    pub params_hash: String,
    pub dt: f64,
    pub params: ForceParams,
}

/// A header plus one frame per simulation step.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialLog {
    pub header: LogHeader,
    pub frames: Vec<Frame>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    record: String,
    #[serde(flatten)]
    header: LogHeader,
}

/// SHA-256 hex digest of the parameters' JSON form.
pub fn params_hash(params: &ForceParams) -> String {
    let json = serde_json::to_vec(params).expect("params serialize");
    hex::encode(Sha256::digest(&json))
}

impl TrialLog {
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<(), SimError> {
        serde_json::to_writer(
            &mut w,
            &HeaderLine {
                record: "header".into(),
                header: self.header.clone(),
            },
        )?;
        writeln!(w)?;
        for f in &self.frames {
            serde_json::to_writer(&mut w, f)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn from_jsonl(reader: impl BufRead) -> Result<Self, SimError> {
        let mut lines = reader.lines();
        let first = lines
            .next()
            .ok_or_else(|| SimError::InvalidLog("empty log".into()))??;
        let header: HeaderLine = serde_json::from_str(&first)
            .map_err(|e| SimError::InvalidLog(format!("header: {e}")))?;
        if header.record != "header" {
            return Err(SimError::InvalidLog("first record is not a header".into()));
        }
        let mut frames = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            frames.push(
                serde_json::from_str(&line)
                    .map_err(|e| SimError::InvalidLog(format!("frame {n}: {e}")))?,
            );
        }
        Ok(Self {
            header: header.header,
            frames,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_params() {
        let a = params_hash(&ForceParams::default());
        assert_eq!(a.len(), 64);
        assert_eq!(a, params_hash(&ForceParams::default()));
        assert_ne!(
            a,
            params_hash(&ForceParams {
                amplitude: 2.5,
                ..Default::default()
            })
        );
    }

    #[test]
    fn round_trip() {
        let log = TrialLog {
            header: LogHeader {
                mode: Mode::HapticSnap,
                task: "TaskCurve".into(),
                params_hash: params_hash(&ForceParams::default()),
                dt: 0.001,
                params: ForceParams::default(),
            },
            frames: vec![Frame {
                t: 0.0,
                s: Vec3::new(0.0, 0.0, 1.0),
                p: Vec3::new(0.0, 0.0, 1.0),
                zone: Zone::NoSnap,
                touching: false,
                select: false,
                brush: true,
                erase: false,
                highlight: Some(Vec3::zeros()),
                f_spring: Vec3::zeros(),
                f_snap: Vec3::zeros(),
            }],
        };
        let mut out = Vec::new();
        log.write_jsonl(&mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.starts_with("{\"record\":\"header\",\"mode\":\"haptic_snap\""));
        assert_eq!(TrialLog::from_jsonl(&out[..]).unwrap(), log);
    }
}
