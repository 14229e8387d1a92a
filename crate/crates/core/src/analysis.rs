//! Pairwise mode comparisons with percentile bootstrap confidence intervals.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::Mode;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Metric name of the per-trial completion time.
pub const COMPLETION_TIME: &str = "completion_time";

/// The three comparisons reported for every metric, as `(a, b)` for `a − b`.
pub const MODE_PAIRS: [(Mode, Mode); 3] = [
    (Mode::Haptic, Mode::NoHaptic),
    (Mode::HapticSnap, Mode::NoHaptic),
    (Mode::HapticSnap, Mode::Haptic),
];

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("sample {0} has {1} values; need at least 2")]
    TooFewSamples(char, usize),
    #[error("confidence level must lie in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("need at least one resample")]
    NoResamples,
    #[error("records cover {0} mode(s); comparisons need at least 2")]
    TooFewModes(usize),
    #[error("unknown task {0:?}")]
    UnknownTask(String),
}

/// Study task tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    TaskProtrusion,
    TaskDepression,
    TaskRandVal,
    TaskCurve,
    TaskGroove,
    TaskAnnotation,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::TaskProtrusion,
        Task::TaskDepression,
        Task::TaskRandVal,
        Task::TaskCurve,
        Task::TaskGroove,
        Task::TaskAnnotation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::TaskProtrusion => "TaskProtrusion",
            Task::TaskDepression => "TaskDepression",
            Task::TaskRandVal => "TaskRandVal",
            Task::TaskCurve => "TaskCurve",
            Task::TaskGroove => "TaskGroove",
            Task::TaskAnnotation => "TaskAnnotation",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, AnalysisError> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| AnalysisError::UnknownTask(s.into()))
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One trial's outcome. Non-finite metric values are treated as absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant: String,
    pub mode: Mode,
    pub task: Task,
    pub trial: usize,
    pub completion_time: f64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        let v = if name == COMPLETION_TIME {
            Some(self.completion_time)
        } else {
            self.metrics.get(name).copied()
        };
        v.filter(|x| x.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub n_resamples: usize,
}

impl BootstrapResult {
    /// True when the interval excludes zero.
    pub fn significant(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Random generator for resample `k`: stream `k` of the seeded ChaCha8 key,
/// so results do not depend on scheduling.
pub fn resample_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn resampled_mean(x: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = x.len();
    (0..n).map(|_| x[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Difference of means `mean(a) − mean(b)` with a percentile bootstrap
/// interval. Each resample draws `|a|` values from `a` and `|b|` from `b`
/// with replacement. Inputs are sorted first, so their order is irrelevant.
pub fn bootstrap_mean_diff(
    a: &[f64],
    b: &[f64],
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapResult, AnalysisError> {
    if a.len() < 2 {
        return Err(AnalysisError::TooFewSamples('a', a.len()));
    }
    if b.len() < 2 {
        return Err(AnalysisError::TooFewSamples('b', b.len()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::BadLevel(level));
    }
    if n_resamples == 0 {
        return Err(AnalysisError::NoResamples);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);

    let mut diffs: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = resample_rng(seed, k);
            resampled_mean(&a, &mut rng) - resampled_mean(&b, &mut rng)
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    Ok(BootstrapResult {
        mean_diff: mean(&a) - mean(&b),
        ci_low: quantile_sorted(&diffs, alpha / 2.0),
        ci_high: quantile_sorted(&diffs, 1.0 - alpha / 2.0),
        level,
        n_resamples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self {
            n_resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

/// Task filter of a comparison; `None` pools all tasks.
pub type TaskScope = Option<Task>;

fn scope_name(scope: TaskScope) -> &'static str {
    scope.map_or("all", Task::as_str)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: String,
    pub task: String,
    pub mode_a: Mode,
    pub mode_b: Mode,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub result: BootstrapResult,
    pub significant: bool,
}

/// A comparison that could not be computed from the records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    pub metric: String,
    pub task: String,
    pub mode_a: Mode,
    pub mode_b: Mode,
    pub n_a: usize,
    pub n_b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SummaryConfig,
    pub comparisons: Vec<Comparison>,
    pub missing: Vec<MissingCell>,
}

/// Every mode pair, per metric, per task present and pooled over tasks.
///
/// Cells with fewer than two values on either side are listed in
/// `missing`. A metric that no record of a task carries (deviation on a
/// point task, say) does not apply there and produces no cells. Each
/// comparison draws from its own seed derived from the configured seed and
/// the comparison's position in the report.
pub fn summarize(records: &[TrialRecord], config: &SummaryConfig) -> Result<Report, AnalysisError> {
    let modes: BTreeSet<_> = records.iter().map(|r| r.mode.as_str()).collect();
    if modes.len() < 2 {
        return Err(AnalysisError::TooFewModes(modes.len()));
    }
    let mut metric_names: BTreeSet<String> = records
        .iter()
        .flat_map(|r| r.metrics.keys().cloned())
        .collect();
    metric_names.remove(COMPLETION_TIME);
    let metric_names: Vec<String> = std::iter::once(COMPLETION_TIME.to_string())
        .chain(metric_names)
        .collect();
    let tasks: BTreeSet<Task> = records.iter().map(|r| r.task).collect();
    let scopes: Vec<TaskScope> = tasks
        .iter()
        .map(|&t| Some(t))
        .chain(std::iter::once(None))
        .collect();

    let mut comparisons = Vec::new();
    let mut missing = Vec::new();
    let mut index = 0u64;
    for metric in &metric_names {
        for &scope in &scopes {
            let values = |mode: Mode| -> Vec<f64> {
                records
                    .iter()
                    .filter(|r| r.mode == mode && scope.is_none_or(|t| r.task == t))
                    .filter_map(|r| r.metric(metric))
                    .collect()
            };
            let applies = records.iter().any(|r| {
                scope.is_none_or(|t| r.task == t) && r.metric(metric).is_some()
            });
            if !applies {
                continue;
            }
            for (ma, mb) in MODE_PAIRS {
                let (a, b) = (values(ma), values(mb));
                let seed = config
                    .seed
                    .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                index += 1;
                if a.len() < 2 || b.len() < 2 {
                    missing.push(MissingCell {
                        metric: metric.clone(),
                        task: scope_name(scope).into(),
                        mode_a: ma,
                        mode_b: mb,
                        n_a: a.len(),
                        n_b: b.len(),
                    });
                    continue;
                }
                let result = bootstrap_mean_diff(&a, &b, config.n_resamples, config.level, seed)?;
                let mut sa = a.clone();
                let mut sb = b.clone();
                sa.sort_by(f64::total_cmp);
                sb.sort_by(f64::total_cmp);
                comparisons.push(Comparison {
                    metric: metric.clone(),
                    task: scope_name(scope).into(),
                    mode_a: ma,
                    mode_b: mb,
                    n_a: a.len(),
                    n_b: b.len(),
                    mean_a: mean(&sa),
                    mean_b: mean(&sb),
                    significant: result.significant(),
                    result,
                });
            }
        }
    }
    Ok(Report {
        config: config.clone(),
        comparisons,
        missing,
    })
}
