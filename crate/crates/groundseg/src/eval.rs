// SPDX-License-Identifier: Apache-2.0

//! Ground-truth evaluation: confusion counts against semantic labels,
//! per-sequence summaries, and CSV reports.

use crate::cloud::{LabelSet, PointClass};
use crate::error::{Error, Result};
use crate::gle::ThresholdRow;
use crate::stats::mean_stdev;

/// Semantic ids counted as true ground: road, parking, sidewalk,
/// other-ground, lane-marking, terrain.
pub const DEFAULT_GROUND_IDS: &[u16] = &[40, 44, 48, 49, 60, 72];
/// Semantic ids excluded from scoring entirely (vegetation).
pub const DEFAULT_EXCLUDED_IDS: &[u16] = &[70];

/// Maps semantic label ids onto {ground, non-ground, excluded} for scoring.
#[derive(Debug, Clone)]
pub struct ClassMask {
    ground: Vec<u16>,
    excluded: Vec<u16>,
}

impl Default for ClassMask {
    fn default() -> Self {
        ClassMask::new(DEFAULT_GROUND_IDS.to_vec(), DEFAULT_EXCLUDED_IDS.to_vec())
    }
}

impl ClassMask {
    pub fn new(mut ground: Vec<u16>, mut excluded: Vec<u16>) -> Self {
        ground.sort_unstable();
        ground.dedup();
        excluded.sort_unstable();
        excluded.dedup();
        ClassMask { ground, excluded }
    }

    #[inline]
    pub fn is_ground(&self, id: u16) -> bool {
        self.ground.binary_search(&id).is_ok()
    }

    #[inline]
    pub fn is_excluded(&self, id: u16) -> bool {
        self.excluded.binary_search(&id).is_ok()
    }
}

/// Confusion counts and derived rates for one frame. Noise predictions
/// count as non-ground. Excluded points contribute to no confusion cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMetrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub excluded: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when every point was excluded and no confusion cell was filled.
    pub empty_eval: bool,
}

impl FrameMetrics {
    /// Fraction of scored points classified correctly; 0 when nothing was
    /// scored.
    pub fn accuracy(&self) -> f64 {
        let total = self.true_positives
            + self.false_positives
            + self.false_negatives
            + self.true_negatives;
        if total == 0 {
            0.0
        } else {
            (self.true_positives + self.true_negatives) as f64 / total as f64
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against labels. Lengths must match.
pub fn evaluate(
    classes: &[PointClass],
    labels: &LabelSet,
    mask: &ClassMask,
) -> Result<FrameMetrics> {
    if classes.len() != labels.len() {
        return Err(Error::Precondition(format!(
            "{} predictions for {} labels",
            classes.len(),
            labels.len()
        )));
    }
    let mut m = FrameMetrics::default();
    for (i, &class) in classes.iter().enumerate() {
        let id = labels.id(i);
        if mask.is_excluded(id) {
            m.excluded += 1;
            continue;
        }
        let predicted_ground = class == PointClass::Ground;
        let labeled_ground = mask.is_ground(id);
        match (predicted_ground, labeled_ground) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, true) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
    m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
    m.f1 = if m.precision + m.recall == 0.0 {
        0.0
    } else {
        2.0 * m.precision * m.recall / (m.precision + m.recall)
    };
    m.empty_eval = m.true_positives + m.false_positives + m.false_negatives + m.true_negatives == 0;
    Ok(m)
}

/// Mean and population standard deviation of one metric across frames.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub stdev: f64,
}

/// Per-sequence aggregate of frame metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequenceSummary {
    pub frames: usize,
    pub precision: MetricStat,
    pub recall: MetricStat,
    pub f1: MetricStat,
    pub accuracy: MetricStat,
}

/// Aggregates frame metrics into mean +/- population stdev per metric.
/// Errors on an empty input.
pub fn summarize(frames: &[FrameMetrics]) -> Result<SequenceSummary> {
    if frames.is_empty() {
        return Err(Error::Precondition(
            "summary of zero frames is undefined".into(),
        ));
    }
    let stat = |extract: fn(&FrameMetrics) -> f64| -> MetricStat {
        let values: Vec<f64> = frames.iter().map(extract).collect();
        let (mean, stdev) = mean_stdev(&values, false);
        MetricStat { mean, stdev }
    };
    Ok(SequenceSummary {
        frames: frames.len(),
        precision: stat(|m| m.precision),
        recall: stat(|m| m.recall),
        f1: stat(|m| m.f1),
        accuracy: stat(|m| m.accuracy()),
    })
}

/// Header of the per-frame metrics CSV.
pub const METRICS_CSV_HEADER: &str = "frame,tp,fp,fn,tn,excluded,precision,recall,f1";

/// Renders per-frame metrics as CSV, one row per frame in input order.
pub fn metrics_csv(rows: &[(String, FrameMetrics)]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for (frame, m) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            frame,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.true_negatives,
            m.excluded,
            m.precision,
            m.recall,
            m.f1
        ));
    }
    out
}

/// Header of the adaptive-threshold trace CSV.
pub const THRESHOLD_CSV_HEADER: &str =
    "frame,ring,e_tau,f_tau,h_noise,elevation_count,flatness_count";

/// Renders per-frame adaptive threshold snapshots as CSV: one row per
/// (frame, ring) pair, rings in ascending order within each frame.
pub fn threshold_stats_csv(per_frame: &[(String, Vec<ThresholdRow>)]) -> String {
    let mut out = String::from(THRESHOLD_CSV_HEADER);
    out.push('\n');
    for (frame, rows) in per_frame {
        for row in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                frame,
                row.ring,
                row.e_tau,
                row.f_tau,
                row.h_noise,
                row.elevation_count,
                row.flatness_count
            ));
        }
    }
    out
}
