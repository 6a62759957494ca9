// SPDX-License-Identifier: Apache-2.0

//! Python bindings: the point-cloud container, the stateful segmenter,
//! scene generation, scan/label file access, and evaluation.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use groundseg::cloud::{LabelSet, PointClass, PointCloud};
use groundseg::config::{parse_config, render_config};
use groundseg::eval::{self, ClassMask};
use groundseg::pipeline::{self, PipelineConfig, RansacParams, Segmenter};
use groundseg::synth::SceneSpec;
use groundseg::{io, Error};

fn to_py_err(err: Error) -> PyErr {
    match &err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn classes_from_bytes(bytes: &[u8]) -> PyResult<Vec<PointClass>> {
    bytes
        .iter()
        .map(|&b| {
            PointClass::from_byte(b)
                .ok_or_else(|| PyValueError::new_err(format!("invalid class byte {b}")))
        })
        .collect()
}

/// Column-store LiDAR scan.
#[pyclass(name = "PointCloud")]
#[derive(Clone)]
struct PyPointCloud {
    inner: PointCloud,
}

#[pymethods]
impl PyPointCloud {
    /// Builds a cloud from per-point columns. Rings are inferred from the
    /// elevation angles when not given.
    #[new]
    #[pyo3(signature = (xs, ys, zs, intensities, rings=None))]
    fn new(
        xs: Vec<f32>,
        ys: Vec<f32>,
        zs: Vec<f32>,
        intensities: Vec<f32>,
        rings: Option<Vec<u16>>,
    ) -> PyResult<Self> {
        let inner = match rings {
            Some(rings) => {
                PointCloud::with_rings(xs, ys, zs, intensities, rings).map_err(to_py_err)?
            }
            None => {
                PointCloud::from_columns(xs, ys, zs, intensities)
                    .map_err(to_py_err)?
                    .0
            }
        };
        Ok(PyPointCloud { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn xs(&self) -> Vec<f32> {
        self.inner.xs().to_vec()
    }

    #[getter]
    fn ys(&self) -> Vec<f32> {
        self.inner.ys().to_vec()
    }

    #[getter]
    fn zs(&self) -> Vec<f32> {
        self.inner.zs().to_vec()
    }

    #[getter]
    fn intensities(&self) -> Vec<f32> {
        self.inner.intensities().to_vec()
    }

    #[getter]
    fn rings(&self) -> Vec<u16> {
        self.inner.rings().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("PointCloud({} points)", self.inner.len())
    }
}

/// Per-frame segmentation output.
#[pyclass(name = "Segmentation")]
struct PySegmentation {
    /// One byte per point: 0 non-ground, 1 ground, 2 noise.
    #[pyo3(get)]
    classes: Vec<u8>,
    #[pyo3(get)]
    ground_count: usize,
    #[pyo3(get)]
    noise_count: usize,
    #[pyo3(get)]
    vertical_count: usize,
    #[pyo3(get)]
    overflow_count: usize,
    #[pyo3(get)]
    reverted_bins: usize,
    #[pyo3(get)]
    total_ms: f64,
}

#[pymethods]
impl PySegmentation {
    fn __repr__(&self) -> String {
        format!(
            "Segmentation({} points, {} ground, {} noise)",
            self.classes.len(),
            self.ground_count,
            self.noise_count
        )
    }
}

/// Evaluation counts and rates for one frame.
#[pyclass(name = "Metrics")]
struct PyMetrics {
    #[pyo3(get)]
    true_positives: u64,
    #[pyo3(get)]
    false_positives: u64,
    #[pyo3(get)]
    false_negatives: u64,
    #[pyo3(get)]
    true_negatives: u64,
    #[pyo3(get)]
    excluded: u64,
    #[pyo3(get)]
    precision: f64,
    #[pyo3(get)]
    recall: f64,
    #[pyo3(get)]
    f1: f64,
    #[pyo3(get)]
    accuracy: f64,
    #[pyo3(get)]
    empty_eval: bool,
}

impl From<eval::FrameMetrics> for PyMetrics {
    fn from(m: eval::FrameMetrics) -> Self {
        PyMetrics {
            true_positives: m.true_positives,
            false_positives: m.false_positives,
            false_negatives: m.false_negatives,
            true_negatives: m.true_negatives,
            excluded: m.excluded,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            accuracy: m.accuracy(),
            empty_eval: m.empty_eval,
        }
    }
}

#[pymethods]
impl PyMetrics {
    fn __repr__(&self) -> String {
        format!(
            "Metrics(precision={:.4}, recall={:.4}, f1={:.4})",
            self.precision, self.recall, self.f1
        )
    }
}

/// Stateful frame-by-frame segmenter; thresholds adapt after each frame.
#[pyclass(name = "Segmenter")]
struct PySegmenter {
    inner: Segmenter,
}

#[pymethods]
impl PySegmenter {
    /// Builds a segmenter from configuration text (`key = value` lines);
    /// defaults when omitted.
    #[new]
    #[pyo3(signature = (config_text=None))]
    fn new(config_text: Option<&str>) -> PyResult<Self> {
        let config = match config_text {
            Some(text) => parse_config(text).map_err(to_py_err)?,
            None => PipelineConfig::default(),
        };
        Ok(PySegmenter {
            inner: Segmenter::new(config).map_err(to_py_err)?,
        })
    }

    fn segment(&mut self, cloud: &PyPointCloud) -> PyResult<PySegmentation> {
        let result = self.inner.segment(&cloud.inner).map_err(to_py_err)?;
        Ok(PySegmentation {
            classes: result.classes.iter().map(|&c| c as u8).collect(),
            ground_count: result.ground_count,
            noise_count: result.noise_count,
            vertical_count: result.vertical_count,
            overflow_count: result.overflow_count,
            reverted_bins: result.reverted_bins,
            total_ms: result.timing.total_us as f64 / 1e3,
        })
    }

    /// Current adaptive thresholds as
    /// (ring, e_tau, f_tau, h_noise, elevation_count, flatness_count).
    fn threshold_rows(&self) -> Vec<(usize, f64, f64, f64, usize, usize)> {
        self.inner
            .state()
            .threshold_rows()
            .into_iter()
            .map(|r| {
                (
                    r.ring,
                    r.e_tau,
                    r.f_tau,
                    r.h_noise,
                    r.elevation_count,
                    r.flatness_count,
                )
            })
            .collect()
    }

    #[getter]
    fn frames_seen(&self) -> u64 {
        self.inner.frames_seen()
    }

    /// Full configuration snapshot in the config-file syntax.
    fn config_text(&self) -> String {
        render_config(self.inner.config())
    }
}

/// Generates a synthetic labeled frame from a scene description
/// (`key: values` lines). Returns (cloud, labels, warnings).
#[pyfunction]
fn generate_scene(
    spec_text: &str,
    seed: u64,
) -> PyResult<(PyPointCloud, Vec<u16>, Vec<String>)> {
    let spec = SceneSpec::parse(spec_text).map_err(to_py_err)?;
    let frame = groundseg::synth::generate_scene(&spec, seed).map_err(to_py_err)?;
    Ok((
        PyPointCloud { inner: frame.cloud },
        frame.labels,
        frame.warnings,
    ))
}

/// Loads a binary scan file. Returns (cloud, skipped_nonfinite_count).
#[pyfunction]
fn load_scan(path: PathBuf) -> PyResult<(PyPointCloud, usize)> {
    let (cloud, report) = io::load_scan(&path).map_err(to_py_err)?;
    Ok((PyPointCloud { inner: cloud }, report.skipped_nonfinite))
}

#[pyfunction]
fn write_scan(cloud: &PyPointCloud, path: PathBuf) -> PyResult<()> {
    io::write_scan(&cloud.inner, &path).map_err(to_py_err)
}

/// Loads per-point semantic ids matching the given cloud.
#[pyfunction]
fn load_labels(path: PathBuf, cloud: &PyPointCloud) -> PyResult<Vec<u16>> {
    let labels = io::load_labels(&path, &cloud.inner).map_err(to_py_err)?;
    Ok(labels.ids().to_vec())
}

/// Scores predicted classes against semantic labels.
#[pyfunction]
#[pyo3(signature = (classes, labels, ground_ids=None, excluded_ids=None))]
fn evaluate(
    classes: Vec<u8>,
    labels: Vec<u16>,
    ground_ids: Option<Vec<u16>>,
    excluded_ids: Option<Vec<u16>>,
) -> PyResult<PyMetrics> {
    let classes = classes_from_bytes(&classes)?;
    let mask = ClassMask::new(
        ground_ids.unwrap_or_else(|| eval::DEFAULT_GROUND_IDS.to_vec()),
        excluded_ids.unwrap_or_else(|| eval::DEFAULT_EXCLUDED_IDS.to_vec()),
    );
    let metrics =
        eval::evaluate(&classes, &LabelSet::new(labels), &mask).map_err(to_py_err)?;
    Ok(metrics.into())
}

/// Whole-cloud single-plane RANSAC baseline; returns class bytes.
#[pyfunction]
#[pyo3(signature = (cloud, seed=0, iterations=300, dist_thr=0.125))]
fn ransac_baseline(
    cloud: &PyPointCloud,
    seed: u64,
    iterations: usize,
    dist_thr: f64,
) -> Vec<u8> {
    let params = RansacParams {
        iterations,
        dist_thr,
        seed,
    };
    pipeline::ransac_baseline(&cloud.inner, &params)
        .iter()
        .map(|&c| c as u8)
        .collect()
}

#[pymodule]
fn groundseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PySegmenter>()?;
    m.add_class::<PySegmentation>()?;
    m.add_class::<PyMetrics>()?;
    m.add_function(wrap_pyfunction!(generate_scene, m)?)?;
    m.add_function(wrap_pyfunction!(load_scan, m)?)?;
    m.add_function(wrap_pyfunction!(write_scan, m)?)?;
    m.add_function(wrap_pyfunction!(load_labels, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(ransac_baseline, m)?)?;
    Ok(())
}
