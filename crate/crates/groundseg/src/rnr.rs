// SPDX-License-Identifier: Apache-2.0

//! Reflected-noise removal: drops the virtual mirror points that wet or
//! glossy ground paints far below the real surface. A point is noise only
//! when all three hold — it sits on a low scan ring, below the adaptive
//! height bound, and with low return intensity — so real steep downhill
//! ground (high intensity) survives a plain height cutoff would not.

use crate::cloud::PointCloud;

/// Noise gate parameters. The height bound is the only part that adapts at
/// runtime; callers thread the current value in per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnrParams {
    /// Rings strictly below this index are eligible.
    pub num_rings: usize,
    /// Intensity strictly below this is eligible.
    pub intensity_thr: f32,
    /// Height strictly below this is eligible (`h_noise`).
    pub height_thr: f64,
}

impl Default for RnrParams {
    fn default() -> Self {
        RnrParams {
            num_rings: 20,
            intensity_thr: 0.2,
            // Initial bound: one sensor height plus the seed-gate margin
            // below the origin; self-tunes once first-ring planes land.
            height_thr: -(1.723 + 0.8),
        }
    }
}

/// Splits point ids into `(noise, kept)`, both preserving input order.
///
/// A point is noise iff `ring < num_rings && z < height_thr &&
/// intensity < intensity_thr`. With `num_rings == 0` nothing qualifies.
pub fn remove_noise(cloud: &PointCloud, params: &RnrParams) -> (Vec<u32>, Vec<u32>) {
    let mut noise = Vec::new();
    let mut kept = Vec::with_capacity(cloud.len());
    for id in 0..cloud.len() as u32 {
        let i = id as usize;
        let is_noise = (cloud.ring(i) as usize) < params.num_rings
            && f64::from(cloud.z(i)) < params.height_thr
            && cloud.intensity(i) < params.intensity_thr;
        if is_noise {
            noise.push(id);
        } else {
            kept.push(id);
        }
    }
    (noise, kept)
}
