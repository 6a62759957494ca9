// SPDX-License-Identifier: Apache-2.0

//! Point cloud containers and laser-ring inference.
//!
//! Clouds are stored as parallel column arrays. Coordinates and intensity
//! keep the 32-bit width of the on-disk scan format; all geometry math in
//! the rest of the crate promotes to f64.

use crate::error::{Error, Result};

/// Number of lasers on the sensor assumed when a scan carries no ring data.
pub const DEFAULT_NUM_RINGS: u16 = 64;
/// Vertical field of view used for ring inference, degrees below horizon.
pub const DEFAULT_FOV_DOWN_DEG: f64 = -24.8;
/// Vertical field of view used for ring inference, degrees above horizon.
pub const DEFAULT_FOV_UP_DEG: f64 = 2.0;

/// A LiDAR scan as parallel columns. All columns have identical length.
///
/// Ring indices count lasers from the bottom of the vertical field of view:
/// ring 0 is the most downward-pointing laser.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    xs: Vec<f32>,
    ys: Vec<f32>,
    zs: Vec<f32>,
    intensities: Vec<f32>,
    rings: Vec<u16>,
}

impl PointCloud {
    /// Builds a cloud from coordinate and intensity columns, inferring ring
    /// indices from elevation angles. Intensities are clamped to [0, 1];
    /// the number of clamped values is returned alongside the cloud.
    pub fn from_columns(
        xs: Vec<f32>,
        ys: Vec<f32>,
        zs: Vec<f32>,
        intensities: Vec<f32>,
    ) -> Result<(Self, usize)> {
        if xs.len() != ys.len() || xs.len() != zs.len() || xs.len() != intensities.len() {
            return Err(Error::Precondition(format!(
                "column lengths differ: x={} y={} z={} intensity={}",
                xs.len(),
                ys.len(),
                zs.len(),
                intensities.len()
            )));
        }
        let mut clamped = 0usize;
        let mut cloud = PointCloud {
            xs,
            ys,
            zs,
            intensities,
            rings: Vec::new(),
        };
        for v in &mut cloud.intensities {
            if *v < 0.0 || *v > 1.0 {
                *v = v.clamp(0.0, 1.0);
                clamped += 1;
            }
        }
        let inferred = infer_rings(
            &cloud,
            DEFAULT_NUM_RINGS,
            DEFAULT_FOV_DOWN_DEG,
            DEFAULT_FOV_UP_DEG,
        );
        cloud.rings = inferred.rings;
        Ok((cloud, clamped))
    }

    /// Builds a cloud with explicit ring indices, bypassing inference.
    pub fn with_rings(
        xs: Vec<f32>,
        ys: Vec<f32>,
        zs: Vec<f32>,
        intensities: Vec<f32>,
        rings: Vec<u16>,
    ) -> Result<Self> {
        let (mut cloud, _) = Self::from_columns(xs, ys, zs, intensities)?;
        if rings.len() != cloud.len() {
            return Err(Error::Precondition(format!(
                "ring column length {} does not match point count {}",
                rings.len(),
                cloud.len()
            )));
        }
        cloud.rings = rings;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f32 {
        self.xs[i]
    }

    #[inline]
    pub fn y(&self, i: usize) -> f32 {
        self.ys[i]
    }

    #[inline]
    pub fn z(&self, i: usize) -> f32 {
        self.zs[i]
    }

    #[inline]
    pub fn intensity(&self, i: usize) -> f32 {
        self.intensities[i]
    }

    #[inline]
    pub fn ring(&self, i: usize) -> u16 {
        self.rings[i]
    }

    /// Point position promoted to f64, as [x, y, z].
    #[inline]
    pub fn position(&self, i: usize) -> [f64; 3] {
        [self.xs[i] as f64, self.ys[i] as f64, self.zs[i] as f64]
    }

    /// Planar range sqrt(x^2 + y^2), in f64.
    #[inline]
    pub fn planar_range(&self, i: usize) -> f64 {
        let x = self.xs[i] as f64;
        let y = self.ys[i] as f64;
        (x * x + y * y).sqrt()
    }

    pub fn xs(&self) -> &[f32] {
        &self.xs
    }

    pub fn ys(&self) -> &[f32] {
        &self.ys
    }

    pub fn zs(&self) -> &[f32] {
        &self.zs
    }

    pub fn intensities(&self) -> &[f32] {
        &self.intensities
    }

    pub fn rings(&self) -> &[u16] {
        &self.rings
    }
}

/// Per-point segmentation verdict. The discriminants are the on-disk byte
/// encoding of class files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PointClass {
    NonGround = 0,
    Ground = 1,
    /// Removed as reflection noise before ground fitting. Counts as a
    /// non-ground prediction for evaluation purposes.
    Noise = 2,
}

impl PointClass {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(PointClass::NonGround),
            1 => Some(PointClass::Ground),
            2 => Some(PointClass::Noise),
            _ => None,
        }
    }
}

/// Per-point semantic labels accompanying a scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    ids: Vec<u16>,
}

impl LabelSet {
    pub fn new(ids: Vec<u16>) -> Self {
        LabelSet { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn id(&self, i: usize) -> u16 {
        self.ids[i]
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }
}

/// Result of ring inference. `degenerate` counts points whose elevation
/// angle is undefined (zero planar range and zero height); those are
/// assigned ring 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingInference {
    pub rings: Vec<u16>,
    pub degenerate: usize,
}

/// Infers the laser ring of every point from its elevation angle, bucketing
/// the vertical field of view [fov_down, fov_up] into `num_rings` equal
/// slots. Angles outside the field of view clamp to the boundary rings.
pub fn infer_rings(
    cloud: &PointCloud,
    num_rings: u16,
    fov_down_deg: f64,
    fov_up_deg: f64,
) -> RingInference {
    assert!(num_rings > 0, "ring count must be positive");
    assert!(fov_up_deg > fov_down_deg, "vertical field of view is empty");
    let span = fov_up_deg - fov_down_deg;
    let mut rings = Vec::with_capacity(cloud.len());
    let mut degenerate = 0usize;
    for i in 0..cloud.len() {
        let planar = cloud.planar_range(i);
        let z = cloud.z(i) as f64;
        if planar == 0.0 && z == 0.0 {
            degenerate += 1;
            rings.push(0);
            continue;
        }
        let angle_deg = z.atan2(planar).to_degrees();
        let slot = ((angle_deg - fov_down_deg) / span * num_rings as f64).floor();
        let ring = slot.clamp(0.0, (num_rings - 1) as f64) as u16;
        rings.push(ring);
    }
    RingInference { rings, degenerate }
}
