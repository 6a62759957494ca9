// SPDX-License-Identifier: Apache-2.0

//! Adaptive region-wise ground segmentation for spinning 3D LiDAR scans.

pub mod cloud;
pub mod config;
pub mod czm;
pub mod error;
pub mod eval;
pub mod gle;
pub mod io;
pub mod pipeline;
pub mod plane;
pub mod rnr;
pub mod synth;

mod eigen;
mod stats;

pub use error::Error;
