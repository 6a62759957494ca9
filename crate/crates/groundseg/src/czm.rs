// SPDX-License-Identifier: Apache-2.0

//! Concentric-zone partition of a scan into polar bins.
//!
//! The x/y plane is divided into consecutive annular zones; each zone is
//! split into equal radial rings and equal azimuthal sectors. Zones closer
//! to the sensor use finer sectors than distant ones, so bin population
//! stays roughly even as density falls off with range. Points inside each
//! bin are kept sorted by ascending z, which lets seed selection take a
//! prefix instead of sorting the whole scan.

use std::time::Instant;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::stats::median;

/// Zone layout. `boundaries` holds the zone edge radii, so it is one longer
/// than the per-zone ring and sector counts; `boundaries[0]` is the minimum
/// range and the last entry the maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneConfig {
    pub rings_per_zone: Vec<usize>,
    pub sectors_per_zone: Vec<usize>,
    pub boundaries: Vec<f64>,
    /// Bins with fewer points than this are skipped by the pipeline.
    pub min_points_per_bin: usize,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        ZoneConfig {
            rings_per_zone: vec![2, 4, 4, 4],
            sectors_per_zone: vec![16, 32, 54, 32],
            boundaries: vec![2.7, 12.3625, 22.025, 41.35, 80.0],
            min_points_per_bin: 10,
        }
    }
}

impl ZoneConfig {
    pub fn validate(&self) -> Result<()> {
        let zones = self.rings_per_zone.len();
        if zones == 0 {
            return Err(Error::Config("at least one zone is required".into()));
        }
        if self.sectors_per_zone.len() != zones {
            return Err(Error::Config(format!(
                "{} sector counts for {} zones",
                self.sectors_per_zone.len(),
                zones
            )));
        }
        if self.boundaries.len() != zones + 1 {
            return Err(Error::Config(format!(
                "{} boundaries for {} zones (need {})",
                self.boundaries.len(),
                zones,
                zones + 1
            )));
        }
        if self.rings_per_zone.iter().any(|&r| r == 0)
            || self.sectors_per_zone.iter().any(|&s| s == 0)
        {
            return Err(Error::Config("ring and sector counts must be positive".into()));
        }
        for w in self.boundaries.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                return Err(Error::Config(format!(
                    "zone boundaries must increase strictly: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.boundaries[0] < 0.0 {
            return Err(Error::Config("minimum range must be non-negative".into()));
        }
        Ok(())
    }

    pub fn num_zones(&self) -> usize {
        self.rings_per_zone.len()
    }

    pub fn min_range(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn max_range(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn total_bins(&self) -> usize {
        self.rings_per_zone
            .iter()
            .zip(&self.sectors_per_zone)
            .map(|(r, s)| r * s)
            .sum()
    }

    /// Total ring count across all zones.
    pub fn total_rings(&self) -> usize {
        self.rings_per_zone.iter().sum()
    }

    /// 1-based ring counter across zones: ring 0 of zone 0 is 1, counting
    /// outward from the sensor.
    pub fn global_ring(&self, zone: usize, ring: usize) -> usize {
        1 + self.rings_per_zone[..zone].iter().sum::<usize>() + ring
    }

    fn bin_offset(&self, zone: usize) -> usize {
        self.rings_per_zone[..zone]
            .iter()
            .zip(&self.sectors_per_zone)
            .map(|(r, s)| r * s)
            .sum()
    }
}

/// Address of one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinIndex {
    pub zone: usize,
    pub ring: usize,
    pub sector: usize,
    /// 1-based ring counter across zones, see [`ZoneConfig::global_ring`].
    pub global_ring: usize,
}

/// One polar bin. `point_ids` is sorted by ascending z (ties by id), which
/// downstream seed extraction relies on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bin {
    pub index: BinIndex,
    pub point_ids: Vec<u32>,
}

impl Default for BinIndex {
    fn default() -> Self {
        BinIndex {
            zone: 0,
            ring: 0,
            sector: 0,
            global_ring: 1,
        }
    }
}

/// Result of partitioning: bins in (zone, ring, sector) order plus the
/// points outside the radial coverage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub bins: Vec<Bin>,
    pub overflow: Vec<u32>,
}

impl Partition {
    /// Total number of point ids held across bins and overflow.
    pub fn total_points(&self) -> usize {
        self.bins.iter().map(|b| b.point_ids.len()).sum::<usize>() + self.overflow.len()
    }
}

fn empty_bins(cfg: &ZoneConfig) -> Vec<Bin> {
    let mut bins = Vec::with_capacity(cfg.total_bins());
    for zone in 0..cfg.num_zones() {
        for ring in 0..cfg.rings_per_zone[zone] {
            for sector in 0..cfg.sectors_per_zone[zone] {
                bins.push(Bin {
                    index: BinIndex {
                        zone,
                        ring,
                        sector,
                        global_ring: cfg.global_ring(zone, ring),
                    },
                    point_ids: Vec::new(),
                });
            }
        }
    }
    bins
}

/// Locates the bin of a single point; None when the planar range falls
/// outside [min_range, max_range).
fn locate(cloud: &PointCloud, id: u32, cfg: &ZoneConfig) -> Option<usize> {
    let r = cloud.planar_range(id as usize);
    if r < cfg.boundaries[0] || r >= cfg.max_range() {
        return None;
    }
    let mut zone = cfg.num_zones() - 1;
    for z in 0..cfg.num_zones() {
        if r < cfg.boundaries[z + 1] {
            zone = z;
            break;
        }
    }
    let inner = cfg.boundaries[zone];
    let outer = cfg.boundaries[zone + 1];
    let rings = cfg.rings_per_zone[zone];
    let sectors = cfg.sectors_per_zone[zone];
    let ring_width = (outer - inner) / rings as f64;
    let ring = (((r - inner) / ring_width) as usize).min(rings - 1);
    let mut azimuth = (cloud.y(id as usize) as f64).atan2(cloud.x(id as usize) as f64);
    if azimuth < 0.0 {
        azimuth += std::f64::consts::TAU;
    }
    let sector_width = std::f64::consts::TAU / sectors as f64;
    let sector = ((azimuth / sector_width) as usize).min(sectors - 1);
    Some(cfg.bin_offset(zone) + ring * sectors + sector)
}

fn partition_core(
    cloud: &PointCloud,
    ids: impl Iterator<Item = u32>,
    cfg: &ZoneConfig,
    sort_bins: bool,
) -> Partition {
    let mut bins = empty_bins(cfg);
    let mut overflow = Vec::new();
    for id in ids {
        match locate(cloud, id, cfg) {
            Some(slot) => bins[slot].point_ids.push(id),
            None => overflow.push(id),
        }
    }
    if sort_bins {
        for bin in &mut bins {
            sort_by_z(cloud, &mut bin.point_ids);
        }
    }
    // Overflow is reported in id order regardless of the traversal order
    // that produced it.
    overflow.sort_unstable();
    Partition { bins, overflow }
}

/// Sorts point ids ascending by z, ties by id — the order every bin's
/// `point_ids` carries and seed extraction depends on.
pub fn sort_by_z(cloud: &PointCloud, ids: &mut [u32]) {
    ids.sort_unstable_by(|&a, &b| {
        cloud
            .z(a as usize)
            .partial_cmp(&cloud.z(b as usize))
            .unwrap()
            .then(a.cmp(&b))
    });
}

/// Partitions every point of the cloud.
pub fn partition(cloud: &PointCloud, cfg: &ZoneConfig) -> Result<Partition> {
    cfg.validate()?;
    Ok(partition_core(cloud, 0..cloud.len() as u32, cfg, true))
}

/// Partitions a subset of point ids (e.g. the survivors of noise removal).
pub fn partition_ids(cloud: &PointCloud, ids: &[u32], cfg: &ZoneConfig) -> Result<Partition> {
    cfg.validate()?;
    Ok(partition_core(cloud, ids.iter().copied(), cfg, true))
}

/// Wall-clock comparison of the two ways to obtain z-sorted bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortStrategyReport {
    /// Sort the whole scan by z once, then partition preserving order.
    pub global_sort_ms: f64,
    /// Partition unsorted, then sort each bin.
    pub binwise_sort_ms: f64,
    /// Whether both strategies produced identical bins (they must).
    pub identical: bool,
}

/// Times both sorting strategies over `runs` repetitions and reports the
/// median of each, verifying that they produce the same partition.
pub fn sort_strategy_bench(
    cloud: &PointCloud,
    cfg: &ZoneConfig,
    runs: usize,
) -> Result<SortStrategyReport> {
    cfg.validate()?;
    let runs = runs.max(1);
    let mut global_ms = Vec::with_capacity(runs);
    let mut binwise_ms = Vec::with_capacity(runs);
    let mut last_global = None;
    let mut last_binwise = None;
    for _ in 0..runs {
        let t = Instant::now();
        let mut order: Vec<u32> = (0..cloud.len() as u32).collect();
        sort_by_z(cloud, &mut order);
        let part = partition_core(cloud, order.into_iter(), cfg, false);
        global_ms.push(t.elapsed().as_secs_f64() * 1e3);
        last_global = Some(part);

        let t = Instant::now();
        let part = partition_core(cloud, 0..cloud.len() as u32, cfg, true);
        binwise_ms.push(t.elapsed().as_secs_f64() * 1e3);
        last_binwise = Some(part);
    }
    // The global pre-sort uses the same (z, id) key, so stable insertion
    // order inside each bin must equal the bin-wise sort exactly.
    let identical = last_global == last_binwise;
    Ok(SortStrategyReport {
        global_sort_ms: median(&mut global_ms),
        binwise_sort_ms: median(&mut binwise_ms),
        identical,
    })
}
