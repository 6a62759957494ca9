// SPDX-License-Identifier: Apache-2.0

//! Synthetic labeled scenes: ray-cast height-field scans with analytic
//! per-point ground truth, as a desk-scale stand-in for hand-labeled
//! datasets. Rays follow the ring/azimuth layout of a spinning sensor, so
//! ring indices, point densities, and occlusions behave like real scans.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Semantic ids attached to generated points. The ground/non-ground split
/// of these ids matches the evaluation defaults.
pub const LABEL_NOISE: u16 = 1;
pub const LABEL_ROAD: u16 = 40;
pub const LABEL_STRUCTURE: u16 = 50;
pub const LABEL_TERRAIN: u16 = 72;

/// Points landing more than this far below the local surface height are
/// face points (they hit a vertical jump of the height field).
const FACE_TOLERANCE: f64 = 0.05;

/// Ground surface shape. Every shape is a height field over the xy plane;
/// `None` regions absorb rays without a return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundGeometry {
    /// Plane at z = -sensor_height.
    Flat,
    /// Plane pitched about the y axis; negative pitch drops ahead (+x).
    Sloped { pitch_deg: f64 },
    /// Smooth valley profile with slope magnitude capped at `max_pitch_deg`:
    /// z rises as ln cosh(x / half_width), planar far out, curved near the
    /// bottom, constant along y.
    Valley { max_pitch_deg: f64, half_width: f64 },
    /// Flat ground with the half-space ahead raised by `offset`, blended
    /// linearly over [start_x, start_x + width].
    Ramp { offset: f64, start_x: f64, width: f64 },
    /// Circular road around the sensor, a gap, then elevated terrain held
    /// behind a vertical retaining wall at x = wall_x.
    Terrace {
        road_radius: f64,
        wall_x: f64,
        height: f64,
    },
}

impl GroundGeometry {
    /// Surface height and semantic label under (x, y); None in gaps.
    fn surface(&self, x: f64, y: f64, sensor_height: f64) -> Option<(f64, u16)> {
        let base = -sensor_height;
        match *self {
            GroundGeometry::Flat => Some((base, LABEL_ROAD)),
            GroundGeometry::Sloped { pitch_deg } => {
                Some((base + pitch_deg.to_radians().tan() * x, LABEL_ROAD))
            }
            GroundGeometry::Valley {
                max_pitch_deg,
                half_width,
            } => {
                let amp = max_pitch_deg.to_radians().tan() * half_width;
                Some((base + amp * (x / half_width).cosh().ln(), LABEL_ROAD))
            }
            GroundGeometry::Ramp {
                offset,
                start_x,
                width,
            } => {
                let blend = if width > 0.0 {
                    ((x - start_x) / width).clamp(0.0, 1.0)
                } else if x >= start_x {
                    1.0
                } else {
                    0.0
                };
                Some((base + offset * blend, LABEL_ROAD))
            }
            GroundGeometry::Terrace {
                road_radius,
                wall_x,
                height,
            } => {
                if x >= wall_x {
                    Some((base + height, LABEL_TERRAIN))
                } else if x.hypot(y) < road_radius {
                    Some((base, LABEL_ROAD))
                } else {
                    None
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        match *self {
            GroundGeometry::Valley { half_width, .. } if half_width <= 0.0 => {
                bad("valley half width must be positive")
            }
            GroundGeometry::Ramp { width, .. } if width < 0.0 => {
                bad("ramp width must be non-negative")
            }
            GroundGeometry::Terrace {
                road_radius,
                wall_x,
                height,
            } => {
                if height < 0.0 {
                    bad("terrace height must be non-negative")
                } else if road_radius <= 0.0 || wall_x <= road_radius {
                    bad("terrace needs 0 < road_radius < wall_x")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Axis-aligned box obstacle standing in the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleBox {
    pub center: [f64; 3],
    /// Full extents along x, y, z.
    pub size: [f64; 3],
    pub label: u16,
}

impl ObstacleBox {
    /// Ray-box intersection distance from the origin along unit `dir`,
    /// by the slab method. Rays starting inside hit at the exit instead.
    fn hit(&self, dir: [f64; 3]) -> Option<f64> {
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        for axis in 0..3 {
            let lo = self.center[axis] - 0.5 * self.size[axis];
            let hi = self.center[axis] + 0.5 * self.size[axis];
            if dir[axis].abs() < 1e-12 {
                if lo > 0.0 || hi < 0.0 {
                    return None;
                }
                continue;
            }
            let (t0, t1) = ((lo / dir[axis]), (hi / dir[axis]));
            let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            t_near = t_near.max(t0);
            t_far = t_far.min(t1);
            if t_near > t_far {
                return None;
            }
        }
        if t_near > 0.0 {
            Some(t_near)
        } else if t_far > 0.0 {
            Some(t_far)
        } else {
            None
        }
    }
}

/// Reflected-noise injection: mirrored sub-ground returns along bottom-ring
/// ray directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Exact number of noise points to add.
    pub count: usize,
    /// Uniform intensity range of noise returns; keep below the removal
    /// gate for removable noise.
    pub intensity_range: (f32, f32),
    /// Range multiplier applied to the source return; > 1 places the point
    /// beyond (and below) the real surface.
    pub range_scale: (f64, f64),
    /// Only returns on rings below this index are mirrored.
    pub max_ring: u16,
    /// Only returns below this height are mirrored. Together with the
    /// range-scale floor this bounds the mirrored height from above.
    pub max_source_z: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            count: 0,
            intensity_range: (0.01, 0.15),
            range_scale: (2.0, 2.8),
            max_ring: 20,
            max_source_z: -1.3,
        }
    }
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub geometry: GroundGeometry,
    pub obstacles: Vec<ObstacleBox>,
    pub noise: Option<NoiseSpec>,
    pub num_rings: usize,
    pub azimuth_steps: usize,
    pub fov_down_deg: f64,
    pub fov_up_deg: f64,
    pub sensor_height: f64,
    pub max_range: f64,
    /// Gaussian jitter applied to every return's z, meters.
    pub z_sigma: f64,
    pub ground_intensity: (f32, f32),
    pub structure_intensity: (f32, f32),
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            geometry: GroundGeometry::Flat,
            obstacles: Vec::new(),
            noise: None,
            num_rings: crate::cloud::DEFAULT_NUM_RINGS as usize,
            azimuth_steps: 900,
            fov_down_deg: crate::cloud::DEFAULT_FOV_DOWN_DEG,
            fov_up_deg: crate::cloud::DEFAULT_FOV_UP_DEG,
            sensor_height: 1.723,
            max_range: 79.0,
            z_sigma: 0.005,
            ground_intensity: (0.3, 0.9),
            structure_intensity: (0.2, 0.8),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.fov_down_deg >= self.fov_up_deg {
            return bad(format!(
                "field of view is empty: {}..{}",
                self.fov_down_deg, self.fov_up_deg
            ));
        }
        if self.max_range <= 1.0 {
            return bad(format!("max range {} too small", self.max_range));
        }
        if self.z_sigma < 0.0 {
            return bad("negative z jitter".into());
        }
        if self.sensor_height <= 0.0 {
            return bad("sensor height must be positive".into());
        }
        for (name, (lo, hi)) in [
            ("ground", self.ground_intensity),
            ("structure", self.structure_intensity),
        ] {
            if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
                return bad(format!("{name} intensity range [{lo}, {hi}] invalid"));
            }
        }
        if let Some(noise) = &self.noise {
            let (lo, hi) = noise.intensity_range;
            if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
                return bad(format!("noise intensity range [{lo}, {hi}] invalid"));
            }
            if noise.range_scale.0 < 1.0 || noise.range_scale.1 < noise.range_scale.0 {
                return bad("noise range scale must be >= 1 and ordered".into());
            }
        }
        for b in &self.obstacles {
            if b.size.iter().any(|&s| s <= 0.0) {
                return bad("obstacle with non-positive extent".into());
            }
        }
        Ok(())
    }

    /// Parses the line-oriented scene description format:
    /// `key: values`, `#` comments, unknown keys rejected. See the CLI
    /// documentation for the key list.
    pub fn parse(text: &str) -> Result<SceneSpec> {
        let mut spec = SceneSpec::default();
        let bad = |line_no: usize, msg: String| {
            Err(Error::Config(format!("scene line {}: {msg}", line_no + 1)))
        };
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = match line.split_once(':') {
                Some(kv) => kv,
                None => return bad(line_no, format!("expected `key: value`, got {line:?}")),
            };
            let args: Vec<&str> = rest.split_whitespace().collect();
            let floats = |want: usize| -> Result<Vec<f64>> {
                if args.len() != want {
                    return Err(Error::Config(format!(
                        "scene line {}: {key} takes {want} values, got {}",
                        line_no + 1,
                        args.len()
                    )));
                }
                args.iter()
                    .map(|a| {
                        a.parse::<f64>().map_err(|_| {
                            Error::Config(format!(
                                "scene line {}: bad number {a:?}",
                                line_no + 1
                            ))
                        })
                    })
                    .collect()
            };
            match key.trim() {
                "geometry" => {
                    let kind = args.first().copied().unwrap_or("");
                    let nums = &args[args.len().min(1)..];
                    let parse_all = |want: usize| -> Result<Vec<f64>> {
                        if nums.len() != want {
                            return Err(Error::Config(format!(
                                "scene line {}: geometry {kind} takes {want} numbers",
                                line_no + 1
                            )));
                        }
                        nums.iter()
                            .map(|a| {
                                a.parse::<f64>().map_err(|_| {
                                    Error::Config(format!(
                                        "scene line {}: bad number {a:?}",
                                        line_no + 1
                                    ))
                                })
                            })
                            .collect()
                    };
                    spec.geometry = match kind {
                        "flat" => GroundGeometry::Flat,
                        "sloped" => GroundGeometry::Sloped {
                            pitch_deg: parse_all(1)?[0],
                        },
                        "valley" => {
                            let v = parse_all(2)?;
                            GroundGeometry::Valley {
                                max_pitch_deg: v[0],
                                half_width: v[1],
                            }
                        }
                        "ramp" => {
                            let v = parse_all(3)?;
                            GroundGeometry::Ramp {
                                offset: v[0],
                                start_x: v[1],
                                width: v[2],
                            }
                        }
                        "terrace" => {
                            let v = parse_all(3)?;
                            GroundGeometry::Terrace {
                                road_radius: v[0],
                                wall_x: v[1],
                                height: v[2],
                            }
                        }
                        other => {
                            return bad(line_no, format!("unknown geometry {other:?}"));
                        }
                    };
                }
                "box" => {
                    let v = floats(7)?;
                    spec.obstacles.push(ObstacleBox {
                        center: [v[0], v[1], v[2]],
                        size: [v[3], v[4], v[5]],
                        label: v[6] as u16,
                    });
                }
                "noise" => {
                    let v = floats(3)?;
                    spec.noise = Some(NoiseSpec {
                        count: v[0] as usize,
                        intensity_range: (v[1] as f32, v[2] as f32),
                        ..NoiseSpec::default()
                    });
                }
                "rings" => spec.num_rings = floats(1)?[0] as usize,
                "azimuth_steps" => spec.azimuth_steps = floats(1)?[0] as usize,
                "fov" => {
                    let v = floats(2)?;
                    spec.fov_down_deg = v[0];
                    spec.fov_up_deg = v[1];
                }
                "sensor_height" => spec.sensor_height = floats(1)?[0],
                "max_range" => spec.max_range = floats(1)?[0],
                "z_sigma" => spec.z_sigma = floats(1)?[0],
                other => return bad(line_no, format!("unknown key {other:?}")),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// One generated frame: the scan, per-point semantic labels, and any
/// generation warnings (e.g. a zero-density spec).
#[derive(Debug, Clone)]
pub struct SceneFrame {
    pub cloud: PointCloud,
    pub labels: Vec<u16>,
    pub warnings: Vec<String>,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// March-and-bisect intersection of a ray with the ground height field.
/// Returns the ray parameter of the first crossing, if any. Height-field
/// jumps (walls) register as crossings; the bisection converges onto the
/// face.
fn ground_hit(spec: &SceneSpec, dir: [f64; 3]) -> Option<f64> {
    const T_START: f64 = 2.5;
    const T_STEP: f64 = 0.25;
    let above = |t: f64| -> bool {
        let (x, y, z) = (t * dir[0], t * dir[1], t * dir[2]);
        match spec.geometry.surface(x, y, spec.sensor_height) {
            Some((gz, _)) => z > gz,
            None => true,
        }
    };
    let mut lo = T_START;
    if !above(lo) {
        return Some(lo);
    }
    let mut hi = None;
    let mut t = lo + T_STEP;
    while t < spec.max_range {
        if above(t) {
            lo = t;
        } else {
            hi = Some(t);
            break;
        }
        t += T_STEP;
    }
    let mut hi = hi?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Generates one deterministic labeled frame.
///
/// Rays sweep ring-major (bottom ring first) over evenly spaced azimuths;
/// each surface return is jittered in z and given a label from the surface
/// it hit (height-field face points become structure). Noise points, if
/// requested, are appended afterwards: exact count, mirrored outward along
/// low-ring ray directions so they land below the real surface.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<SceneFrame> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zs = Vec::new();
    let mut intensities = Vec::new();
    let mut rings = Vec::new();
    let mut labels: Vec<u16> = Vec::new();
    let mut warnings = Vec::new();
    if spec.num_rings == 0 || spec.azimuth_steps == 0 {
        warnings.push("zero-density scene: no rays to cast".into());
    }
    let fov_span = spec.fov_up_deg - spec.fov_down_deg;
    let is_ground_label = |label: u16| label == LABEL_ROAD || label == LABEL_TERRAIN;
    for ring in 0..spec.num_rings {
        // Bucket-center elevation: ring inference recovers the same index.
        let elev_deg =
            spec.fov_down_deg + (ring as f64 + 0.5) * fov_span / spec.num_rings as f64;
        let (sin_e, cos_e) = elev_deg.to_radians().sin_cos();
        for step in 0..spec.azimuth_steps {
            let azim = (step as f64 + 0.5) * std::f64::consts::TAU / spec.azimuth_steps as f64;
            let dir = [cos_e * azim.cos(), cos_e * azim.sin(), sin_e];
            let t_ground = ground_hit(spec, dir);
            let t_box = spec
                .obstacles
                .iter()
                .enumerate()
                .filter_map(|(i, b)| b.hit(dir).map(|t| (i, t)))
                .filter(|&(_, t)| t > 0.3 && t < spec.max_range)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let (t_hit, label) = match (t_box, t_ground) {
                (Some((i, tb)), Some(tg)) if tb < tg => (tb, spec.obstacles[i].label),
                (Some((i, tb)), None) => (tb, spec.obstacles[i].label),
                (_, Some(tg)) => {
                    // Classify by the surface under the hit; a point well
                    // below it lies on a vertical face of the field.
                    let (x, y, z) = (tg * dir[0], tg * dir[1], tg * dir[2]);
                    let nudge = 1e-7 * tg;
                    let under = spec
                        .geometry
                        .surface(x + dir[0] * nudge, y + dir[1] * nudge, spec.sensor_height)
                        .or_else(|| spec.geometry.surface(x, y, spec.sensor_height));
                    let label = match under {
                        Some((gz, lab)) if z >= gz - FACE_TOLERANCE => lab,
                        _ => LABEL_STRUCTURE,
                    };
                    (tg, label)
                }
                (None, None) => continue,
            };
            let jitter = gauss(&mut rng) * spec.z_sigma;
            let range = if is_ground_label(label) {
                spec.ground_intensity
            } else {
                spec.structure_intensity
            };
            let intensity = if range.0 < range.1 {
                rng.gen_range(range.0..range.1)
            } else {
                range.0
            };
            xs.push((t_hit * dir[0]) as f32);
            ys.push((t_hit * dir[1]) as f32);
            zs.push((t_hit * dir[2] + jitter) as f32);
            intensities.push(intensity);
            rings.push(ring as u16);
            labels.push(label);
        }
    }
    if let Some(noise) = &spec.noise {
        let mut eligible: Vec<usize> = (0..labels.len())
            .filter(|&i| {
                is_ground_label(labels[i])
                    && rings[i] < noise.max_ring
                    && (zs[i] as f64) < noise.max_source_z
            })
            .collect();
        if eligible.len() < noise.count {
            return Err(Error::Config(format!(
                "noise count {} exceeds {} eligible low-ring ground returns",
                noise.count,
                eligible.len()
            )));
        }
        for pick in 0..noise.count {
            let j = rng.gen_range(pick..eligible.len());
            eligible.swap(pick, j);
            let src = eligible[pick];
            let scale = rng.gen_range(noise.range_scale.0..noise.range_scale.1);
            let (lo, hi) = noise.intensity_range;
            let intensity = if lo < hi { rng.gen_range(lo..hi) } else { lo };
            xs.push((xs[src] as f64 * scale) as f32);
            ys.push((ys[src] as f64 * scale) as f32);
            zs.push((zs[src] as f64 * scale) as f32);
            intensities.push(intensity);
            rings.push(rings[src]);
            labels.push(LABEL_NOISE);
        }
    }
    let cloud = PointCloud::with_rings(xs, ys, zs, intensities, rings)?;
    Ok(SceneFrame {
        cloud,
        labels,
        warnings,
    })
}
