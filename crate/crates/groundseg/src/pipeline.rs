// SPDX-License-Identifier: Apache-2.0

//! Frame-level orchestration: noise removal, polar partition, per-bin
//! vertical peel + ground fit + classification, then the per-frame serial
//! barrier (threshold adaptation and the temporal revert pass).
//!
//! Bins are data-parallel; everything a worker touches is frozen for the
//! duration of the frame, and results merge in bin order, so the output is
//! identical for any worker count.

use std::time::Instant;

use crate::cloud::{PointClass, PointCloud};
use crate::czm::{self, Bin, BinIndex, ZoneConfig};
use crate::error::Result;
use crate::gle::{self, AdaptiveState, GleParams, PlaneVerdict, VerdictReason};
use crate::plane::{self, GpfParams, PlaneEstimate, VpfParams};
use crate::rnr::{self, RnrParams};

/// Everything configurable about the per-frame pipeline. `None` stage
/// parameters disable the stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub zones: ZoneConfig,
    /// Reflected-noise removal. Its height bound only seeds the adaptive
    /// state; later frames use the evolved bound.
    pub noise_removal: Option<RnrParams>,
    pub vertical_filter: Option<VpfParams>,
    pub ground_fit: GpfParams,
    pub gle: GleParams,
    pub temporal_revert: bool,
    /// Worker threads for the per-bin stage; 0 picks the machine's
    /// available parallelism.
    pub parallelism: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            zones: ZoneConfig::default(),
            noise_removal: Some(RnrParams::default()),
            vertical_filter: Some(VpfParams::default()),
            ground_fit: GpfParams::default(),
            gle: GleParams::default(),
            temporal_revert: true,
            parallelism: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.zones.validate()?;
        self.gle.validate()
    }

    fn initial_noise_height(&self) -> f64 {
        match &self.noise_removal {
            Some(p) => p.height_thr,
            None => self.ground_fit.seed_height_gate(),
        }
    }
}

/// Fitted-and-judged plane of one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinOutcome {
    pub bin: BinIndex,
    pub plane: PlaneEstimate,
    pub verdict: PlaneVerdict,
}

/// Wall-clock stage breakdown of one frame, microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTiming {
    pub noise_us: u64,
    pub partition_us: u64,
    pub bins_us: u64,
    pub adapt_us: u64,
    pub total_us: u64,
}

/// Output of one segmented frame. `classes` has one entry per input point;
/// `outcomes` lists the fitted bins in partition order.
#[derive(Debug, Clone)]
pub struct SegmentationResult {
    pub classes: Vec<PointClass>,
    pub outcomes: Vec<BinOutcome>,
    pub noise_count: usize,
    pub ground_count: usize,
    /// Points peeled off as vertical structure before the ground fit.
    pub vertical_count: usize,
    /// Points outside the radial coverage of the zone model.
    pub overflow_count: usize,
    pub reverted_bins: usize,
    pub timing: StageTiming,
}

/// Resumable cross-frame state: everything `Segmenter` carries between
/// frames besides its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSnapshot {
    pub state: AdaptiveState,
    pub frames_seen: u64,
}

/// Stateful frame-by-frame segmenter. Feed frames in acquisition order;
/// thresholds adapt after every frame.
#[derive(Debug, Clone)]
pub struct Segmenter {
    config: PipelineConfig,
    state: AdaptiveState,
    frames_seen: u64,
}

impl Segmenter {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let state = AdaptiveState::new(
            config.gle.adaptive_ring_count,
            config.initial_noise_height(),
        );
        Ok(Segmenter {
            config,
            state,
            frames_seen: 0,
        })
    }

    /// Rebuilds a segmenter mid-sequence from a snapshot, e.g. to continue
    /// a recorded session. The configuration must match the one that
    /// produced the snapshot for the replay to be faithful.
    pub fn resume(config: PipelineConfig, snapshot: PipelineSnapshot) -> Result<Self> {
        config.validate()?;
        if snapshot.state.ring_count() != config.gle.adaptive_ring_count {
            return Err(crate::error::Error::Config(format!(
                "snapshot covers {} adaptive rings, configuration expects {}",
                snapshot.state.ring_count(),
                config.gle.adaptive_ring_count
            )));
        }
        Ok(Segmenter {
            config,
            state: snapshot.state,
            frames_seen: snapshot.frames_seen,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn state(&self) -> &AdaptiveState {
        &self.state
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn snapshot(&self) -> PipelineSnapshot {
        PipelineSnapshot {
            state: self.state.clone(),
            frames_seen: self.frames_seen,
        }
    }

    /// Segments one frame and folds its definite planes into the adaptive
    /// state.
    pub fn segment(&mut self, cloud: &PointCloud) -> Result<SegmentationResult> {
        let t_total = Instant::now();

        let t = Instant::now();
        let (noise_ids, kept) = match &self.config.noise_removal {
            Some(params) => {
                // Rings and intensity gates come from the configuration;
                // the height bound is the adaptive one.
                let effective = RnrParams {
                    height_thr: self.state.noise_height(),
                    ..*params
                };
                rnr::remove_noise(cloud, &effective)
            }
            None => (Vec::new(), (0..cloud.len() as u32).collect()),
        };
        let noise_us = t.elapsed().as_micros() as u64;

        let t = Instant::now();
        let partition = czm::partition_ids(cloud, &kept, &self.config.zones)?;
        let partition_us = t.elapsed().as_micros() as u64;

        let t = Instant::now();
        let per_bin = process_bins(
            cloud,
            &partition.bins,
            &self.config,
            &self.state,
            self.worker_count(),
        );
        let mut outcomes = Vec::new();
        let mut vertical_count = 0usize;
        for (outcome, vertical) in per_bin {
            vertical_count += vertical;
            if let Some(o) = outcome {
                outcomes.push(o);
            }
        }
        let bins_us = t.elapsed().as_micros() as u64;

        let t = Instant::now();
        // Serial barrier. The history update sees exactly the definite
        // planes, so its outcome is independent of the revert pass.
        let definite: Vec<&PlaneEstimate> = outcomes
            .iter()
            .filter(|o| o.verdict.definite)
            .map(|o| &o.plane)
            .collect();
        gle::update_thresholds(&mut self.state, &definite, &self.config.gle);

        let mut reverted_bins = 0usize;
        if self.config.temporal_revert {
            let definite_now: Vec<(usize, f64)> = outcomes
                .iter()
                .filter(|o| o.verdict.definite)
                .map(|o| (o.bin.global_ring, o.plane.flatness))
                .collect();
            let rejected: Vec<usize> = (0..outcomes.len())
                .filter(|&i| outcomes[i].verdict.reason == VerdictReason::TooRough)
                .collect();
            let pairs: Vec<(usize, f64)> = rejected
                .iter()
                .map(|&i| (outcomes[i].bin.global_ring, outcomes[i].plane.flatness))
                .collect();
            let flags = gle::temporal_ground_revert(&pairs, &definite_now, &self.config.gle);
            for (&i, revert) in rejected.iter().zip(flags) {
                if revert {
                    outcomes[i].verdict = PlaneVerdict {
                        ground: true,
                        definite: false,
                        reverted: true,
                        reason: VerdictReason::Reverted,
                    };
                    reverted_bins += 1;
                }
            }
        }
        let adapt_us = t.elapsed().as_micros() as u64;

        let mut classes = vec![PointClass::NonGround; cloud.len()];
        for &id in &noise_ids {
            classes[id as usize] = PointClass::Noise;
        }
        let mut ground_count = 0usize;
        for outcome in &outcomes {
            if outcome.verdict.ground {
                for &id in &outcome.plane.inlier_ids {
                    let slot = &mut classes[id as usize];
                    if *slot != PointClass::Ground {
                        *slot = PointClass::Ground;
                        ground_count += 1;
                    }
                }
            }
        }

        self.frames_seen += 1;
        Ok(SegmentationResult {
            classes,
            outcomes,
            noise_count: noise_ids.len(),
            ground_count,
            vertical_count,
            overflow_count: partition.overflow.len(),
            reverted_bins,
            timing: StageTiming {
                noise_us,
                partition_us,
                bins_us,
                adapt_us,
                total_us: t_total.elapsed().as_micros() as u64,
            },
        })
    }

    fn worker_count(&self) -> usize {
        match self.config.parallelism {
            0 => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            n => n,
        }
    }
}

/// R-VPF → R-GPF → classification for one bin against frozen state.
/// Returns the fitted outcome (None when the fit degenerates) and the
/// number of points peeled as vertical structure.
fn process_bin(
    cloud: &PointCloud,
    bin: &Bin,
    config: &PipelineConfig,
    state: &AdaptiveState,
) -> (Option<BinOutcome>, usize) {
    let (vertical, remaining) = match &config.vertical_filter {
        Some(params) => plane::r_vpf(cloud, &bin.point_ids, params),
        None => (Vec::new(), bin.point_ids.clone()),
    };
    let outcome = match plane::r_gpf(cloud, bin.index, &remaining, &config.ground_fit) {
        Ok(plane) => {
            let verdict = gle::classify(&plane, state, &config.gle);
            Some(BinOutcome {
                bin: bin.index,
                plane,
                verdict,
            })
        }
        Err(_) => None,
    };
    (outcome, vertical.len())
}

fn process_bins(
    cloud: &PointCloud,
    bins: &[Bin],
    config: &PipelineConfig,
    state: &AdaptiveState,
    workers: usize,
) -> Vec<(Option<BinOutcome>, usize)> {
    if workers <= 1 || bins.len() < 2 {
        return bins
            .iter()
            .map(|bin| process_bin(cloud, bin, config, state))
            .collect();
    }
    let mut slots: Vec<Option<(Option<BinOutcome>, usize)>> =
        std::iter::repeat_with(|| None).take(bins.len()).collect();
    let chunk = bins.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (bin_chunk, slot_chunk) in bins.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (bin, slot) in bin_chunk.iter().zip(slot_chunk) {
                    *slot = Some(process_bin(cloud, bin, config, state));
                }
            });
        }
    });
    slots.into_iter().map(|slot| slot.unwrap()).collect()
}

/// Single-plane RANSAC baseline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RansacParams {
    pub iterations: usize,
    pub dist_thr: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            iterations: 300,
            dist_thr: 0.125,
            seed: 0,
        }
    }
}

/// Whole-cloud single-plane RANSAC: the strongest plane's inliers become
/// ground, everything else non-ground. Deterministic for a fixed seed.
pub fn ransac_baseline(cloud: &PointCloud, params: &RansacParams) -> Vec<PointClass> {
    use rand::Rng;
    use rand::SeedableRng;

    let n = cloud.len();
    let mut classes = vec![PointClass::NonGround; n];
    if n < 3 {
        return classes;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<([f64; 3], [f64; 3])> = None;
    let mut best_count = 0usize;
    for _ in 0..params.iterations {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let mut k = rng.gen_range(0..n);
        while k == i || k == j {
            k = rng.gen_range(0..n);
        }
        let a = cloud.position(i);
        let b = cloud.position(j);
        let c = cloud.position(k);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let normal = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        if len < 1e-9 {
            continue;
        }
        let unit = [normal[0] / len, normal[1] / len, normal[2] / len];
        let mut count = 0usize;
        for p in 0..n {
            let q = cloud.position(p);
            let d = (q[0] - a[0]) * unit[0] + (q[1] - a[1]) * unit[1] + (q[2] - a[2]) * unit[2];
            if d.abs() < params.dist_thr {
                count += 1;
            }
        }
        if count > best_count {
            best_count = count;
            best = Some((a, unit));
        }
    }
    if let Some((anchor, unit)) = best {
        for p in 0..n {
            let q = cloud.position(p);
            let d = (q[0] - anchor[0]) * unit[0]
                + (q[1] - anchor[1]) * unit[1]
                + (q[2] - anchor[2]) * unit[2];
            if d.abs() < params.dist_thr {
                classes[p] = PointClass::Ground;
            }
        }
    }
    classes
}
