//! Per-trial scoring: completion time, touches, curve quality and
//! localization error.

use serde::{Deserialize, Serialize};
use snapforge::analysis::{Task, TrialRecord, COMPLETION_TIME};
use snapforge::brushing::{make_band_texture, BandSpec, Mask};
use snapforge::distfield::SurfaceIndex;
use snapforge::metrics::{
    curve_deviation, curve_irregularity, depression_value, edt, localization_error,
    protrusion_scale, protrusion_value, MetricsError, TexelSet, RELATIVE_ERROR_CUTOFF,
};
use snapforge::simulator::{detect_events, touch_count, Event, EventKind};
use snapforge::surfacegen::ScalarTexture;
use snapforge::{Mode, TrialLog, Vec3};

use crate::config::Target;
use crate::error::{CliError, Result};

pub const TOUCH_COUNT: &str = "touch_count";
pub const DEVIATION: &str = "deviation";
pub const IRREGULARITY: &str = "irregularity";
pub const LOCALIZATION_ERROR: &str = "localization_error";

/// One row of the metrics CSV. Empty cells mean "not applicable" or "no
/// answer".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub trial_id: String,
    pub participant: String,
    pub mode: Mode,
    pub task: Task,
    pub trial: usize,
    pub completion_time: f64,
    pub touch_count: usize,
    pub deviation: Option<f64>,
    pub irregularity: Option<f64>,
    pub measured: Option<f64>,
    pub truth: Option<f64>,
    pub localization_error: Option<f64>,
    /// Whether the localization error passed the 5% filter.
    pub retained: Option<bool>,
}

impl MetricsRow {
    /// The record the analysis sees. Localization errors outside the 5%
    /// range are dropped, as are non-applicable metrics.
    pub fn to_record(&self) -> TrialRecord {
        let mut metrics = std::collections::BTreeMap::new();
        metrics.insert(TOUCH_COUNT.to_string(), self.touch_count as f64);
        if let Some(d) = self.deviation {
            metrics.insert(DEVIATION.to_string(), d);
        }
        if let Some(i) = self.irregularity {
            metrics.insert(IRREGULARITY.to_string(), i);
        }
        if let (Some(e), Some(true)) = (self.localization_error, self.retained) {
            metrics.insert(LOCALIZATION_ERROR.to_string(), e);
        }
        debug_assert!(!metrics.contains_key(COMPLETION_TIME));
        TrialRecord {
            participant: self.participant.clone(),
            mode: self.mode,
            task: self.task,
            trial: self.trial,
            completion_time: self.completion_time,
            metrics,
        }
    }
}

/// Time from the first frame to the last answer: the final select press or
/// the end of the final brush or erase stroke. Without any, the log's span.
pub fn completion_time(log: &TrialLog, events: &[Event]) -> f64 {
    let Some(first) = log.frames.first() else {
        return 0.0;
    };
    let end = events
        .iter()
        .filter(|e| {
            matches!(
                e.kind,
                EventKind::Select | EventKind::BrushEnd | EventKind::EraseEnd
            )
        })
        .map(|e| e.t)
        .next_back()
        .unwrap_or_else(|| log.frames.last().map_or(first.t, |f| f.t));
    end - first.t
}

/// Surface point highlighted at the last select press, if any.
pub fn selected_point(log: &TrialLog, events: &[Event]) -> Option<Vec3> {
    let e = events.iter().rev().find(|e| e.kind == EventKind::Select)?;
    log.frames[e.frame].highlight
}

/// Deviation and irregularity of a brushed texture against a band.
pub fn curve_metrics(band: &Mask, medial: &Mask, brush: &Mask) -> Result<(f64, f64)> {
    for (name, m) in [("medial", medial), ("brush", brush)] {
        if (m.width, m.height) != (band.width, band.height) {
            return Err(CliError::bad_args(format!(
                "dimension mismatch: {name} texture is {}x{}, band is {}x{}",
                m.width, m.height, band.width, band.height
            )));
        }
    }
    let set = TexelSet::from_mask(band);
    let d_ref = edt(medial)?;
    let d_brush = edt(brush).map_err(|e| match e {
        MetricsError::EmptyForeground => CliError::numerical("brushed texture is empty"),
        other => other.into(),
    })?;
    Ok((
        curve_deviation(&d_ref, &d_brush, &set)?,
        curve_irregularity(&d_brush, &set)?,
    ))
}

pub fn band_curve_metrics(spec: &BandSpec, brush: &Mask) -> Result<(f64, f64)> {
    let (band, medial) = make_band_texture(spec)?;
    curve_metrics(&band, &medial, brush)
}

/// A localization target with its data loaded.
pub enum LoadedTarget {
    Protrusion { display: [f64; 2] },
    Depression { center: Vec3, scale: snapforge::surfacegen::ValueScale },
    Texture(ScalarTexture),
}

impl LoadedTarget {
    pub fn load(target: &Target, resolve: impl Fn(&std::path::Path) -> std::path::PathBuf) -> Result<Self> {
        Ok(match target {
            Target::Protrusion { display } => Self::Protrusion { display: *display },
            Target::Depression { center, scale } => Self::Depression {
                center: Vec3::from(*center),
                scale: *scale,
            },
            Target::Texture { texture } => {
                Self::Texture(crate::inputs::scalar_texture(&resolve(texture))?)
            }
        })
    }

    /// The value a participant would read off at `point`.
    pub fn value_at(&self, index: &SurfaceIndex, point: &Vec3) -> Option<f64> {
        match self {
            Self::Protrusion { display } => {
                let mesh = index.mesh();
                Some(protrusion_value(mesh, point, &protrusion_scale(mesh, *display)))
            }
            Self::Depression { center, scale } => Some(depression_value(center, point, scale)),
            Self::Texture(tex) => {
                let hit = index.nearest(point)?;
                let [u, v] = index.uv_at(hit.triangle, &hit.barycentric);
                let i = ((u * tex.width as f64) as usize).min(tex.width - 1);
                let j = ((v * tex.height as f64) as usize).min(tex.height - 1);
                Some(tex.get(i, j))
            }
        }
    }
}

/// Scores one trial. `brush` is the replayed texture for curve tasks.
pub struct TrialInputs<'a> {
    pub id: &'a str,
    pub participant: &'a str,
    pub task: Task,
    pub trial: usize,
    pub log: &'a TrialLog,
    pub index: &'a SurfaceIndex,
    pub band: Option<&'a BandSpec>,
    pub brush: Option<&'a Mask>,
    pub target: Option<(&'a LoadedTarget, f64)>,
}

pub fn evaluate_trial(inp: &TrialInputs<'_>) -> Result<MetricsRow> {
    let events = detect_events(inp.log);
    let mut row = MetricsRow {
        trial_id: inp.id.to_string(),
        participant: inp.participant.to_string(),
        mode: inp.log.header.mode,
        task: inp.task,
        trial: inp.trial,
        completion_time: completion_time(inp.log, &events),
        touch_count: touch_count(&events),
        deviation: None,
        irregularity: None,
        measured: None,
        truth: None,
        localization_error: None,
        retained: None,
    };
    if let (Some(spec), Some(brush)) = (inp.band, inp.brush) {
        match band_curve_metrics(spec, brush) {
            Ok((d, i)) => {
                row.deviation = Some(d);
                row.irregularity = Some(i);
            }
            // No brushed texels: the trial produced no curve to score.
            Err(e) if e.kind == crate::error::ErrorKind::Numerical => {
                log::warn!("trial {}: {e}; curve metrics left empty", inp.id);
            }
            Err(e) => return Err(e.context(format!("trial {}", inp.id))),
        }
    }
    if let Some((target, truth)) = inp.target {
        row.truth = Some(truth);
        row.measured = selected_point(inp.log, &events).and_then(|p| target.value_at(inp.index, &p));
        if let Some(m) = row.measured {
            let err = localization_error(m, truth)?;
            row.localization_error = Some(err);
            row.retained = Some(err <= RELATIVE_ERROR_CUTOFF);
        }
    }
    Ok(row)
}

pub fn write_metrics_csv(rows: &[MetricsRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| CliError::new(crate::error::ErrorKind::Other, e.to_string()))
}

pub fn read_metrics_csv(bytes: &[u8]) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize()
        .enumerate()
        .map(|(n, row)| row.map_err(|e| CliError::from(e).context(format!("row {}", n + 1))))
        .collect()
}
