// SPDX-License-Identifier: Apache-2.0

//! Region-wise plane estimation: PCA plane fits, low-point seed selection,
//! iterative removal of vertical structures, and iterative ground fitting.
//!
//! All fits run per bin on z-sorted point ids. The plane normal is the
//! eigenvector of the smallest covariance eigenvalue, oriented upward; the
//! smallest eigenvalue itself serves as the flatness measure, which stays
//! comparable across bins of very different footprint (an eigenvalue ratio
//! would not).

use crate::cloud::PointCloud;
use crate::czm::BinIndex;
use crate::eigen::sym_eigen3;
use crate::error::{Error, Result};

/// Vertical-plane filter parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VpfParams {
    /// Distance band around the seed plane that is peeled off, meters.
    pub dist_margin: f64,
    /// A fitted plane counts as vertical when its normal lies within this
    /// angle of the horizon, radians.
    pub angle_margin: f64,
    /// Number of peel iterations.
    pub num_iter: usize,
    /// Seed count per iteration (lowest points of the candidate set).
    pub num_seed: usize,
}

impl Default for VpfParams {
    fn default() -> Self {
        VpfParams {
            dist_margin: 0.1,
            angle_margin: 0.707,
            num_iter: 3,
            num_seed: 20,
        }
    }
}

/// Ground-plane fit parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GpfParams {
    /// Number of lowest points averaged into the seed height reference.
    pub num_lpr: usize,
    /// Seed band above the low-point reference height, meters.
    pub seed_margin: f64,
    /// Number of fit/re-select iterations.
    pub num_iter: usize,
    /// Signed inlier distance threshold, meters. Points below the plane
    /// always qualify.
    pub dist_thr: f64,
    /// Sensor mounting height above ground, meters. Seeds ignore points
    /// more than 0.8 m below the nominal ground level.
    pub sensor_height: f64,
}

impl Default for GpfParams {
    fn default() -> Self {
        GpfParams {
            num_lpr: 20,
            seed_margin: 0.3,
            num_iter: 3,
            dist_thr: 0.125,
            sensor_height: 1.723,
        }
    }
}

impl GpfParams {
    /// Height gate below which points never contribute to the seed height
    /// reference.
    pub fn seed_height_gate(&self) -> f64 {
        -(self.sensor_height + 0.8)
    }
}

/// Raw PCA plane through a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    /// Centroid of the fitted points.
    pub mean: [f64; 3],
    /// Unit normal, oriented so the z component is non-negative (ties
    /// resolved toward +x, then +y).
    pub normal: [f64; 3],
    /// Covariance eigenvalues in descending order.
    pub eigenvalues: [f64; 3],
}

impl PlaneFit {
    /// Signed distance of a point from the plane along the normal.
    #[inline]
    pub fn signed_distance(&self, p: [f64; 3]) -> f64 {
        (p[0] - self.mean[0]) * self.normal[0]
            + (p[1] - self.mean[1]) * self.normal[1]
            + (p[2] - self.mean[2]) * self.normal[2]
    }
}

/// Fitted ground candidate for one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneEstimate {
    pub bin: BinIndex,
    /// Centroid of the last fitted point set.
    pub mean: [f64; 3],
    /// Upward-oriented unit normal.
    pub normal: [f64; 3],
    /// Covariance eigenvalues in descending order.
    pub eigenvalues: [f64; 3],
    /// Mean z of the final inlier set.
    pub elevation: f64,
    /// Smallest covariance eigenvalue of the final fit.
    pub flatness: f64,
    /// Final inlier ids, ascending by z (ties by id).
    pub inlier_ids: Vec<u32>,
}

/// PCA plane through the given points. Requires at least three points whose
/// covariance has rank two or more; otherwise a [`Error::DegenerateFit`] is
/// returned.
pub fn pca_plane(cloud: &PointCloud, ids: &[u32]) -> Result<PlaneFit> {
    let n = ids.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!(
            "{n} points cannot define a plane"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mut mean = [0.0f64; 3];
    for &id in ids {
        let p = cloud.position(id as usize);
        mean[0] += p[0];
        mean[1] += p[1];
        mean[2] += p[2];
    }
    mean[0] *= inv_n;
    mean[1] *= inv_n;
    mean[2] *= inv_n;
    let mut cov = [[0.0f64; 3]; 3];
    for &id in ids {
        let p = cloud.position(id as usize);
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for i in 0..3 {
            for j in i..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..3 {
        for j in i..3 {
            cov[i][j] *= inv_n;
            cov[j][i] = cov[i][j];
        }
    }
    let eig = sym_eigen3(&cov);
    let [l1, l2, _] = eig.values;
    if l1 <= 0.0 || l2 <= 1e-10 * l1 {
        return Err(Error::DegenerateFit(
            "covariance rank below two (collinear or coincident points)".into(),
        ));
    }
    let mut normal = eig.smallest;
    let flip = normal[2] < 0.0
        || (normal[2] == 0.0 && (normal[0] < 0.0 || (normal[0] == 0.0 && normal[1] < 0.0)));
    if flip {
        normal = [-normal[0], -normal[1], -normal[2]];
    }
    Ok(PlaneFit {
        mean,
        normal,
        eigenvalues: eig.values,
    })
}

/// Whether a plane normal is close enough to the horizon to mark a vertical
/// structure: the normal's elevation above the horizontal plane is below
/// `angle_margin` radians.
#[inline]
pub fn is_vertical_plane(normal: &[f64; 3], angle_margin: f64) -> bool {
    let cos_up = normal[2].clamp(-1.0, 1.0);
    std::f64::consts::FRAC_PI_2 - cos_up.acos() < angle_margin
}

/// Selects seed points for a ground fit from a z-sorted id list.
///
/// The reference height is the mean z of the lowest `num_lpr` points above
/// the seed height gate; seeds are all points below reference + margin.
/// Returns an empty set when no point clears the gate.
pub fn extract_seeds(
    cloud: &PointCloud,
    sorted_ids: &[u32],
    num_lpr: usize,
    seed_margin: f64,
    height_gate: f64,
) -> Vec<u32> {
    let mut sum = 0.0f64;
    let mut taken = 0usize;
    for &id in sorted_ids {
        if taken == num_lpr {
            break;
        }
        let z = cloud.z(id as usize) as f64;
        if z > height_gate {
            sum += z;
            taken += 1;
        }
    }
    if taken == 0 {
        return Vec::new();
    }
    let reference = sum / taken as f64 + seed_margin;
    sorted_ids
        .iter()
        .copied()
        .filter(|&id| (cloud.z(id as usize) as f64) < reference)
        .collect()
}

/// Iteratively peels vertical structures off a bin.
///
/// Each iteration fits a plane to the lowest `num_seed` points of the
/// current candidate set; if that plane is vertical, every candidate within
/// `dist_margin` of it (absolute distance) moves to the vertical set.
/// Iterations with a non-vertical or degenerate seed fit remove nothing.
/// Returns (vertical ids, remaining ids); input order is preserved in both.
pub fn r_vpf(cloud: &PointCloud, sorted_ids: &[u32], params: &VpfParams) -> (Vec<u32>, Vec<u32>) {
    let mut candidates: Vec<u32> = sorted_ids.to_vec();
    let mut vertical = Vec::new();
    for _ in 0..params.num_iter {
        if candidates.len() < 3 {
            break;
        }
        let seeds = &candidates[..params.num_seed.min(candidates.len())];
        let fit = match pca_plane(cloud, seeds) {
            Ok(fit) => fit,
            Err(_) => continue,
        };
        if !is_vertical_plane(&fit.normal, params.angle_margin) {
            continue;
        }
        let mut remaining = Vec::with_capacity(candidates.len());
        for &id in &candidates {
            if fit.signed_distance(cloud.position(id as usize)).abs() < params.dist_margin {
                vertical.push(id);
            } else {
                remaining.push(id);
            }
        }
        candidates = remaining;
    }
    (vertical, candidates)
}

/// Iterative ground-plane fit on a bin's candidate set.
///
/// Starts from the seed set, then alternates `num_iter` times between
/// fitting a PCA plane and re-selecting inliers by signed distance below
/// `dist_thr`. Degenerate intermediate fits abort with an error; the caller
/// treats such bins as non-ground.
pub fn r_gpf(
    cloud: &PointCloud,
    bin: BinIndex,
    sorted_ids: &[u32],
    params: &GpfParams,
) -> Result<PlaneEstimate> {
    let seeds = extract_seeds(
        cloud,
        sorted_ids,
        params.num_lpr,
        params.seed_margin,
        params.seed_height_gate(),
    );
    let mut inliers = seeds;
    let mut fit = None;
    for _ in 0..params.num_iter.max(1) {
        let plane = pca_plane(cloud, &inliers)?;
        inliers.clear();
        for &id in sorted_ids {
            if plane.signed_distance(cloud.position(id as usize)) < params.dist_thr {
                inliers.push(id);
            }
        }
        fit = Some(plane);
    }
    let fit = fit.unwrap();
    if inliers.is_empty() {
        return Err(Error::DegenerateFit("no inliers after refinement".into()));
    }
    let elevation =
        inliers.iter().map(|&id| cloud.z(id as usize) as f64).sum::<f64>() / inliers.len() as f64;
    Ok(PlaneEstimate {
        bin,
        mean: fit.mean,
        normal: fit.normal,
        eigenvalues: fit.eigenvalues,
        elevation,
        flatness: fit.eigenvalues[2],
        inlier_ids: inliers,
    })
}
