// SPDX-License-Identifier: Apache-2.0

//! On-disk formats: binary scans, per-point labels, per-point class files,
//! and colored PLY exports.
//!
//! Scan layout: consecutive little-endian f32 quadruples, no header.
//!
//! ```text
//! [ x: f32 | y: f32 | z: f32 | intensity: f32 ]  * n
//! ```
//!
//! Label layout: one little-endian u32 per point; the semantic class id is
//! the lower 16 bits, the upper 16 bits carry an instance id and are ignored
//! here.

use std::fs;
use std::path::Path;

use crate::cloud::{LabelSet, PointClass, PointCloud};
use crate::error::{Error, Result};
use crate::eval::ClassMask;

/// Counters describing repairs applied while loading a scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanReport {
    /// Records dropped because a coordinate was NaN or infinite.
    pub skipped_nonfinite: usize,
    /// Intensity values clamped into [0, 1].
    pub clamped_intensity: usize,
    /// Points with undefined elevation angle during ring inference.
    pub degenerate_rings: usize,
}

/// Reads a binary scan. Ring indices are inferred from elevation angles.
pub fn load_scan(path: &Path) -> Result<(PointCloud, ScanReport)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::format(
            path,
            format!("length {} is not a multiple of 16", bytes.len()),
        ));
    }
    let n = bytes.len() / 16;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    let mut intensities = Vec::with_capacity(n);
    let mut skipped = 0usize;
    for rec in bytes.chunks_exact(16) {
        let x = f32::from_le_bytes(rec[0..4].try_into().unwrap());
        let y = f32::from_le_bytes(rec[4..8].try_into().unwrap());
        let z = f32::from_le_bytes(rec[8..12].try_into().unwrap());
        let w = f32::from_le_bytes(rec[12..16].try_into().unwrap());
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            skipped += 1;
            continue;
        }
        xs.push(x);
        ys.push(y);
        zs.push(z);
        intensities.push(if w.is_finite() { w } else { 0.0 });
    }
    let (cloud, clamped) = PointCloud::from_columns(xs, ys, zs, intensities)?;
    let degenerate = crate::cloud::infer_rings(
        &cloud,
        crate::cloud::DEFAULT_NUM_RINGS,
        crate::cloud::DEFAULT_FOV_DOWN_DEG,
        crate::cloud::DEFAULT_FOV_UP_DEG,
    )
    .degenerate;
    Ok((
        cloud,
        ScanReport {
            skipped_nonfinite: skipped,
            clamped_intensity: clamped,
            degenerate_rings: degenerate,
        },
    ))
}

/// Writes a cloud in the binary scan layout. Round-trips bit-exactly with
/// [`load_scan`] for finite data.
pub fn write_scan(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(cloud.len() * 16);
    for i in 0..cloud.len() {
        bytes.extend_from_slice(&cloud.x(i).to_le_bytes());
        bytes.extend_from_slice(&cloud.y(i).to_le_bytes());
        bytes.extend_from_slice(&cloud.z(i).to_le_bytes());
        bytes.extend_from_slice(&cloud.intensity(i).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads per-point labels. The record count must match the cloud exactly.
pub fn load_labels(path: &Path, cloud: &PointCloud) -> Result<LabelSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::format(
            path,
            format!("length {} is not a multiple of 4", bytes.len()),
        ));
    }
    let n = bytes.len() / 4;
    if n != cloud.len() {
        return Err(Error::format(
            path,
            format!("{} label records for {} points", n, cloud.len()),
        ));
    }
    let ids = bytes
        .chunks_exact(4)
        .map(|rec| (u32::from_le_bytes(rec.try_into().unwrap()) & 0xFFFF) as u16)
        .collect();
    Ok(LabelSet::new(ids))
}

/// Writes labels as little-endian u32 records with a zero instance id.
pub fn write_labels(labels: &LabelSet, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(labels.len() * 4);
    for &id in labels.ids() {
        bytes.extend_from_slice(&(id as u32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a per-point class file: one byte per point, using the encoding of
/// [`PointClass`] (0 non-ground, 1 ground, 2 noise).
pub fn write_classes(classes: &[PointClass], path: &Path) -> Result<()> {
    let bytes: Vec<u8> = classes.iter().map(|c| *c as u8).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a per-point class file written by [`write_classes`].
pub fn read_classes(path: &Path) -> Result<Vec<PointClass>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    bytes
        .iter()
        .map(|&b| {
            PointClass::from_byte(b)
                .ok_or_else(|| Error::format(path, format!("invalid class byte {b}")))
        })
        .collect()
}

const COLOR_TP: [u8; 3] = [0, 255, 0];
const COLOR_FP: [u8; 3] = [255, 0, 0];
const COLOR_FN: [u8; 3] = [0, 0, 255];
const COLOR_TN: [u8; 3] = [128, 128, 128];
const COLOR_EXCLUDED: [u8; 3] = [64, 64, 64];
const COLOR_GROUND: [u8; 3] = [0, 255, 0];
const COLOR_NON_GROUND: [u8; 3] = [128, 128, 128];
const COLOR_NOISE: [u8; 3] = [255, 0, 0];

/// Exports a colored ASCII PLY for visual inspection.
///
/// With labels, points are colored by evaluation outcome: true positives
/// green, false positives red, false negatives blue, true negatives gray,
/// excluded classes dark gray. Without labels, colors fall back to the
/// predicted class: ground green, non-ground gray, noise red.
pub fn export_ply(
    cloud: &PointCloud,
    classes: &[PointClass],
    labels: Option<(&LabelSet, &ClassMask)>,
    path: &Path,
) -> Result<()> {
    if classes.len() != cloud.len() {
        return Err(Error::Precondition(format!(
            "{} classes for {} points",
            classes.len(),
            cloud.len()
        )));
    }
    if let Some((labels, _)) = labels {
        if labels.len() != cloud.len() {
            return Err(Error::Precondition(format!(
                "{} labels for {} points",
                labels.len(),
                cloud.len()
            )));
        }
    }
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    out.push_str("end_header\n");
    for i in 0..cloud.len() {
        let color = match labels {
            Some((labels, mask)) => {
                let id = labels.id(i);
                if mask.is_excluded(id) {
                    COLOR_EXCLUDED
                } else {
                    match (classes[i] == PointClass::Ground, mask.is_ground(id)) {
                        (true, true) => COLOR_TP,
                        (true, false) => COLOR_FP,
                        (false, true) => COLOR_FN,
                        (false, false) => COLOR_TN,
                    }
                }
            }
            None => match classes[i] {
                PointClass::Ground => COLOR_GROUND,
                PointClass::NonGround => COLOR_NON_GROUND,
                PointClass::Noise => COLOR_NOISE,
            },
        };
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            cloud.x(i),
            cloud.y(i),
            cloud.z(i),
            color[0],
            color[1],
            color[2]
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
