// SPDX-License-Identifier: Apache-2.0

//! Ground-likelihood estimation: per-plane classification against
//! self-updating elevation and flatness thresholds, plus the end-of-frame
//! revert pass that rescues planes rejected only for roughness.
//!
//! Thresholds are kept per global ring for the first `adaptive_ring_count`
//! rings. Each is the mean of the accepted history plus a gain times its
//! standard deviation, so a one-off outlier moves a threshold by O(1/sqrt n)
//! of its magnitude while a persistent change eventually shifts it fully.

use crate::plane::PlaneEstimate;
use crate::stats::mean_stdev;

/// Classification parameters and adaptation gains.
#[derive(Debug, Clone, PartialEq)]
pub struct GleParams {
    /// Minimum z component of the plane normal (cosine of the tilt) for a
    /// plane to count as upright.
    pub uprightness_thr: f64,
    /// Number of innermost global rings with adaptive thresholds; beyond
    /// them uprightness alone decides.
    pub adaptive_ring_count: usize,
    /// Per-ring gain on the elevation history deviation.
    pub elevation_gains: Vec<f64>,
    /// Per-ring gain on the flatness history deviation.
    pub flatness_gains: Vec<f64>,
    /// Per-ring gain on the current-frame flatness deviation in the revert
    /// pass.
    pub revert_gains: Vec<f64>,
    /// Offset added to the mean first-ring elevation to track the noise
    /// height bound, meters.
    pub noise_height_offset: f64,
    /// Use the sample (n-1) deviation instead of the population form.
    pub sample_stdev: bool,
    /// Optional bound on history length; oldest entries are dropped first.
    /// `None` keeps everything.
    pub history_cap: Option<usize>,
}

impl Default for GleParams {
    fn default() -> Self {
        GleParams {
            uprightness_thr: 0.707,
            adaptive_ring_count: 4,
            elevation_gains: vec![1.0; 4],
            flatness_gains: vec![3.0, 2.0, 2.0, 2.0],
            revert_gains: vec![1.5; 4],
            noise_height_offset: -0.5,
            sample_stdev: false,
            history_cap: None,
        }
    }
}

impl GleParams {
    pub fn validate(&self) -> crate::error::Result<()> {
        let m = self.adaptive_ring_count;
        if m == 0 {
            return Err(crate::error::Error::Config(
                "adaptive ring count must be positive".into(),
            ));
        }
        for (name, v) in [
            ("elevation_gain", &self.elevation_gains),
            ("flatness_gain", &self.flatness_gains),
            ("revert_gain", &self.revert_gains),
        ] {
            if v.len() != m {
                return Err(crate::error::Error::Config(format!(
                    "{name} has {} entries for {m} adaptive rings",
                    v.len()
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.uprightness_thr) {
            return Err(crate::error::Error::Config(
                "uprightness threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Why a plane was classified the way it was.
///
/// Exactly one reason is assigned per plane. Planes past the adaptive rings
/// are accepted on uprightness alone (`GroundFarRing`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    NotUpright,
    GroundFarRing,
    GroundByElevation,
    GroundByFlatness,
    TooRough,
    Reverted,
}

/// Outcome of classifying one fitted plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneVerdict {
    pub ground: bool,
    /// Passed both uprightness and elevation: eligible to feed the history.
    pub definite: bool,
    /// Set by the revert pass when a rough rejection was overturned.
    pub reverted: bool,
    pub reason: VerdictReason,
}

/// Per-ring threshold state evolved across frames.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    elevation_history: Vec<Vec<f64>>,
    flatness_history: Vec<Vec<f64>>,
    elevation_thr: Vec<f64>,
    flatness_thr: Vec<f64>,
    noise_height: f64,
}

/// One row of the threshold trace, keyed by 1-based global ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub ring: usize,
    pub e_tau: f64,
    pub f_tau: f64,
    pub h_noise: f64,
    pub elevation_count: usize,
    pub flatness_count: usize,
}

impl AdaptiveState {
    /// Fresh state: empty histories, zero thresholds, and the configured
    /// initial noise height bound.
    pub fn new(ring_count: usize, init_noise_height: f64) -> Self {
        AdaptiveState {
            elevation_history: vec![Vec::new(); ring_count],
            flatness_history: vec![Vec::new(); ring_count],
            elevation_thr: vec![0.0; ring_count],
            flatness_thr: vec![0.0; ring_count],
            noise_height: init_noise_height,
        }
    }

    pub fn ring_count(&self) -> usize {
        self.elevation_thr.len()
    }

    /// Elevation threshold for 1-based global ring `m`.
    pub fn elevation_threshold(&self, m: usize) -> f64 {
        self.elevation_thr[m - 1]
    }

    /// Flatness threshold for 1-based global ring `m`.
    pub fn flatness_threshold(&self, m: usize) -> f64 {
        self.flatness_thr[m - 1]
    }

    /// Current noise height bound used by reflected-noise removal.
    pub fn noise_height(&self) -> f64 {
        self.noise_height
    }

    pub fn history_lens(&self, m: usize) -> (usize, usize) {
        (
            self.elevation_history[m - 1].len(),
            self.flatness_history[m - 1].len(),
        )
    }

    pub fn threshold_rows(&self) -> Vec<ThresholdRow> {
        (1..=self.ring_count())
            .map(|m| ThresholdRow {
                ring: m,
                e_tau: self.elevation_thr[m - 1],
                f_tau: self.flatness_thr[m - 1],
                h_noise: self.noise_height,
                elevation_count: self.elevation_history[m - 1].len(),
                flatness_count: self.flatness_history[m - 1].len(),
            })
            .collect()
    }
}

/// History-based threshold: mean plus `gain` times the deviation.
pub fn adaptive_threshold(values: &[f64], gain: f64, sample: bool) -> f64 {
    let (mean, stdev) = mean_stdev(values, sample);
    mean + gain * stdev
}

/// Classifies one fitted plane against the current thresholds.
///
/// Deterministic and total: not-upright planes are rejected outright;
/// planes beyond the adaptive rings are accepted on uprightness alone;
/// otherwise elevation below threshold accepts definitely, flatness below
/// threshold accepts non-definitely, and everything else is rejected as
/// too rough (the revert pass may later overturn those).
pub fn classify(plane: &PlaneEstimate, state: &AdaptiveState, params: &GleParams) -> PlaneVerdict {
    let not = |reason| PlaneVerdict {
        ground: false,
        definite: false,
        reverted: false,
        reason,
    };
    if plane.normal[2] < params.uprightness_thr {
        return not(VerdictReason::NotUpright);
    }
    let m = plane.bin.global_ring;
    if m > params.adaptive_ring_count {
        return PlaneVerdict {
            ground: true,
            definite: false,
            reverted: false,
            reason: VerdictReason::GroundFarRing,
        };
    }
    if plane.elevation < state.elevation_threshold(m) {
        return PlaneVerdict {
            ground: true,
            definite: true,
            reverted: false,
            reason: VerdictReason::GroundByElevation,
        };
    }
    if plane.flatness < state.flatness_threshold(m) {
        return PlaneVerdict {
            ground: true,
            definite: false,
            reverted: false,
            reason: VerdictReason::GroundByFlatness,
        };
    }
    not(VerdictReason::TooRough)
}

/// Folds the frame's definite planes into the histories and recomputes
/// every threshold from the full (possibly capped) history. Planes beyond
/// the adaptive rings are ignored. Callers pass planes ordered by global
/// ring then bin index so the float accumulation order is reproducible.
pub fn update_thresholds(
    state: &mut AdaptiveState,
    new_definite: &[&PlaneEstimate],
    params: &GleParams,
) {
    let rings = state.ring_count();
    for plane in new_definite {
        let m = plane.bin.global_ring;
        if m == 0 || m > rings {
            continue;
        }
        state.elevation_history[m - 1].push(plane.elevation);
        state.flatness_history[m - 1].push(plane.flatness);
    }
    if let Some(cap) = params.history_cap {
        for m in 0..rings {
            for hist in [&mut state.elevation_history[m], &mut state.flatness_history[m]] {
                if hist.len() > cap {
                    let excess = hist.len() - cap;
                    hist.drain(..excess);
                }
            }
        }
    }
    for m in 0..rings {
        if !state.elevation_history[m].is_empty() {
            state.elevation_thr[m] = adaptive_threshold(
                &state.elevation_history[m],
                params.elevation_gains[m],
                params.sample_stdev,
            );
        }
        if !state.flatness_history[m].is_empty() {
            state.flatness_thr[m] = adaptive_threshold(
                &state.flatness_history[m],
                params.flatness_gains[m],
                params.sample_stdev,
            );
        }
    }
    if !state.elevation_history[0].is_empty() {
        let (mean, _) = mean_stdev(&state.elevation_history[0], params.sample_stdev);
        state.noise_height = mean + params.noise_height_offset;
    }
}

/// Flatness bound of the revert pass for one ring, from the flatness values
/// of the current frame's definite planes. None when the frame produced no
/// definite plane on that ring (then nothing can be reverted there).
pub fn revert_threshold(frame_flatness: &[f64], gain: f64, sample: bool) -> Option<f64> {
    if frame_flatness.is_empty() {
        return None;
    }
    Some(adaptive_threshold(frame_flatness, gain, sample))
}

/// End-of-frame revert pass over planes rejected as too rough.
///
/// `rejected` and `definite` carry (global ring, flatness) pairs from the
/// current frame only. Returns one flag per rejected plane: true when its
/// flatness falls below the ring's current-frame bound. Reverted planes do
/// not feed the histories.
pub fn temporal_ground_revert(
    rejected: &[(usize, f64)],
    definite: &[(usize, f64)],
    params: &GleParams,
) -> Vec<bool> {
    let rings = params.adaptive_ring_count;
    let mut per_ring: Vec<Vec<f64>> = vec![Vec::new(); rings];
    for &(m, f) in definite {
        if m >= 1 && m <= rings {
            per_ring[m - 1].push(f);
        }
    }
    let thresholds: Vec<Option<f64>> = per_ring
        .iter()
        .enumerate()
        .map(|(i, values)| revert_threshold(values, params.revert_gains[i], params.sample_stdev))
        .collect();
    rejected
        .iter()
        .map(|&(m, f)| {
            if m >= 1 && m <= rings {
                matches!(thresholds[m - 1], Some(thr) if f < thr)
            } else {
                false
            }
        })
        .collect()
}
