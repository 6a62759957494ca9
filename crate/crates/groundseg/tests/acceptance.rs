// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance gate. Each test checks one numbered criterion and
//! prints a single PASS line with the measured margins (visible with
//! `--nocapture`); the harness result line doubles as the pass/fail record.
//!
//! Criterion 8 exercises real scans and is skipped unless
//! `GROUNDSEG_KITTI_DIR` points at a directory of scan/label pairs.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use groundseg::cloud::{LabelSet, PointClass, PointCloud};
use groundseg::czm::{self, BinIndex, ZoneConfig};
use groundseg::eval::{evaluate, summarize, ClassMask, FrameMetrics};
use groundseg::gle::{self, AdaptiveState, GleParams};
use groundseg::pipeline::{ransac_baseline, PipelineConfig, RansacParams, Segmenter};
use groundseg::plane::{pca_plane, PlaneEstimate};
use groundseg::synth::{generate_scene, GroundGeometry, NoiseSpec, SceneFrame, SceneSpec};
use groundseg::{io, synth};

fn scene(geometry: GroundGeometry, azimuth_steps: usize) -> SceneSpec {
    SceneSpec {
        geometry,
        azimuth_steps,
        ..SceneSpec::default()
    }
}

fn frames(spec: &SceneSpec, seeds: std::ops::Range<u64>) -> Vec<SceneFrame> {
    seeds.map(|s| generate_scene(spec, s).unwrap()).collect()
}

fn score(classes: &[PointClass], labels: &[u16]) -> FrameMetrics {
    let labels = LabelSet::new(labels.to_vec());
    evaluate(classes, &labels, &ClassMask::default()).unwrap()
}

// ---------------------------------------------------------------- criterion 1

/// Dense cyclic Jacobi rotations: a deliberately slow, deliberately simple
/// symmetric 3x3 eigensolver that shares nothing with the closed-form one
/// under test. Returns (eigenvalues desc, matching unit column vectors).
fn jacobi_eigen(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let matmul = |l: &[[f64; 3]; 3], r: &[[f64; 3]; 3]| {
        let mut out = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, rk) in r.iter().enumerate() {
                    out[i][j] += l[i][k] * rk[j];
                }
            }
        }
        out
    };
    for _ in 0..60 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            rot[p][p] = c;
            rot[q][q] = c;
            rot[p][q] = s;
            rot[q][p] = -s;
            let rot_t = {
                let mut out = rot;
                out[p][q] = -s;
                out[q][p] = s;
                out
            };
            a = matmul(&rot_t, &matmul(&a, &rot));
            v = matmul(&v, &rot);
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let vals = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
    let mut vecs = [[0.0f64; 3]; 3];
    for (slot, &col) in order.iter().enumerate() {
        for row in 0..3 {
            vecs[slot][row] = v[row][col];
        }
    }
    (vals, vecs)
}

#[test]
fn criterion_01_plane_eigensolver_matches_jacobi_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut done = 0usize;
    let mut skipped = 0usize;
    let mut worst_val = 0.0f64;
    let mut worst_vec = 0.0f64;
    while done < 1000 {
        let n = rng.gen_range(3usize..=500);
        let sx = 10f64.powf(rng.gen_range(-1.0..1.7));
        let sy = sx * 10f64.powf(rng.gen_range(-1.5..0.0));
        let sz = sx * 10f64.powf(rng.gen_range(-3.0..0.0));
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut zs = Vec::with_capacity(n);
        for _ in 0..n {
            xs.push(rng.gen_range(-sx..sx) as f32);
            ys.push(rng.gen_range(-sy..sy) as f32);
            zs.push(rng.gen_range(-sz..sz) as f32);
        }
        let (cloud, _) =
            PointCloud::from_columns(xs.clone(), ys.clone(), zs.clone(), vec![0.5; n]).unwrap();
        // Plain two-pass covariance; only the eigensolvers differ.
        let mut mean = [0.0f64; 3];
        for i in 0..n {
            mean[0] += xs[i] as f64;
            mean[1] += ys[i] as f64;
            mean[2] += zs[i] as f64;
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = [[0.0f64; 3]; 3];
        for i in 0..n {
            let d = [
                xs[i] as f64 - mean[0],
                ys[i] as f64 - mean[1],
                zs[i] as f64 - mean[2],
            ];
            for r in 0..3 {
                for c in 0..3 {
                    cov[r][c] += d[r] * d[c] / n as f64;
                }
            }
        }
        let (oracle_vals, oracle_vecs) = jacobi_eigen(cov);
        let scale = oracle_vals[0].max(1.0);
        if oracle_vals[1] <= 1e-9 * scale {
            // Rank-degenerate set: the plane (and its normal) is undefined,
            // so there is nothing well-posed to compare. Draw again.
            skipped += 1;
            assert!(skipped < 50, "too many degenerate draws: {skipped}");
            continue;
        }
        let ids: Vec<u32> = (0..n as u32).collect();
        let fit = pca_plane(&cloud, &ids).unwrap();
        for k in 0..3 {
            let err = (fit.eigenvalues[k] - oracle_vals[k]).abs();
            worst_val = worst_val.max(err / scale);
            assert!(
                err <= 1e-9 * scale,
                "eigenvalue {k} off by {err:.3e} (scale {scale:.3e}, n={n})"
            );
        }
        let dot: f64 = (0..3).map(|r| fit.normal[r] * oracle_vecs[2][r]).sum();
        let align = dot.abs();
        worst_vec = worst_vec.max(1.0 - align);
        assert!(
            align >= 1.0 - 1e-9,
            "normal misaligned: |dot| = {align:.15} (n={n})"
        );
        done += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 1 (eigensolver vs Jacobi oracle): PASS — 1000 point sets, \
         worst eigenvalue err {worst_val:.2e} of scale, worst normal defect {worst_vec:.2e}, \
         {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 2

fn ring1_plane(elevation: f64, flatness: f64) -> PlaneEstimate {
    PlaneEstimate {
        bin: BinIndex::default(),
        mean: [0.0, 0.0, elevation],
        normal: [0.0, 0.0, 1.0],
        eigenvalues: [1.0, 0.5, flatness],
        elevation,
        flatness,
        inlier_ids: Vec::new(),
    }
}

#[test]
fn criterion_02_adaptive_thresholds_match_plain_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gains = [0.5, 1.0, 1.5, 2.0, 3.0];
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.gen_range(1usize..=200);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..1.0)).collect();
        let gain = gains[case % gains.len()];
        let sample = case % 2 == 1;
        let got = gle::adaptive_threshold(&values, gain, sample);
        // Textbook loop, no shared helpers.
        let mean = values.iter().sum::<f64>() / n as f64;
        let expect = if sample && n < 2 {
            mean
        } else {
            let denom = if sample { (n - 1) as f64 } else { n as f64 };
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            mean + gain * (ss / denom).sqrt()
        };
        let err = (got - expect).abs();
        worst = worst.max(err);
        assert!(err <= 1e-12, "case {case}: |{got} - {expect}| = {err:.3e}");
    }

    // Hand-checked pins.
    let e_tau = gle::adaptive_threshold(&[0.1, 0.2, 0.3], 1.0, false);
    assert!((e_tau - 0.2816496580927726).abs() <= 1e-12, "e_tau = {e_tau}");
    assert!((e_tau - 0.28165).abs() < 5e-6);
    let f_revert = gle::adaptive_threshold(&[0.01, 0.02, 0.03], 1.5, false);
    assert!(
        (f_revert - 0.0322474487139159).abs() <= 1e-12,
        "revert bound = {f_revert}"
    );
    assert!((f_revert - 0.032247).abs() < 5e-7);

    // Noise height: mean first-ring elevation plus the configured offset.
    let mut state = AdaptiveState::new(4, -2.523);
    assert!((state.noise_height() - -2.523).abs() == 0.0);
    let planes = [
        ring1_plane(-1.70, 1e-4),
        ring1_plane(-1.75, 1e-4),
        ring1_plane(-1.72, 1e-4),
    ];
    let refs: Vec<&PlaneEstimate> = planes.iter().collect();
    gle::update_thresholds(&mut state, &refs, &GleParams::default());
    let mean = (-1.70 + -1.75 + -1.72) / 3.0;
    let h_err = (state.noise_height() - (mean - 0.5)).abs();
    assert!(h_err <= 1e-12, "noise height off by {h_err:.3e}");

    // The default pipeline starts from the pinned initial bound.
    let seg = Segmenter::new(PipelineConfig::default()).unwrap();
    assert_eq!(seg.state().noise_height(), -(1.723 + 0.8));

    println!(
        "criterion 2 (threshold oracle): PASS — 1000 histories within {worst:.2e}, \
         pins 0.28165 / 0.032247 / mean-0.5 hold"
    );
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_03_every_point_lands_in_exactly_one_class() {
    let specs = [
        scene(GroundGeometry::Flat, 240),
        scene(
            GroundGeometry::Valley {
                max_pitch_deg: 12.0,
                half_width: 8.0,
            },
            240,
        ),
        scene(
            GroundGeometry::Terrace {
                road_radius: 7.3,
                wall_x: 8.0,
                height: 0.5,
            },
            240,
        ),
        SceneSpec {
            noise: Some(NoiseSpec {
                count: 200,
                ..NoiseSpec::default()
            }),
            ..scene(GroundGeometry::Sloped { pitch_deg: -10.0 }, 240)
        },
    ];
    let mut frames_checked = 0usize;
    let mut points_checked = 0usize;
    for (k, spec) in specs.iter().enumerate() {
        let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
        for frame in frames(spec, (300 + 10 * k as u64)..(300 + 10 * k as u64 + 2)) {
            let res = seg.segment(&frame.cloud).unwrap();
            assert_eq!(res.classes.len(), frame.cloud.len());
            let ground = res.classes.iter().filter(|c| **c == PointClass::Ground).count();
            let noise = res.classes.iter().filter(|c| **c == PointClass::Noise).count();
            let other = res
                .classes
                .iter()
                .filter(|c| **c == PointClass::NonGround)
                .count();
            assert_eq!(ground + noise + other, frame.cloud.len());
            assert_eq!(ground, res.ground_count);
            assert_eq!(noise, res.noise_count);
            frames_checked += 1;
            points_checked += frame.cloud.len();
        }
    }
    // Degenerate input: nothing to classify, nothing lost.
    let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
    let empty = PointCloud::default();
    let res = seg.segment(&empty).unwrap();
    assert!(res.classes.is_empty());
    println!(
        "criterion 3 (class partition of the input): PASS — \
         {points_checked} points over {frames_checked} frames plus an empty frame"
    );
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_04_noise_removal_beats_a_height_cut_downhill() {
    let spec = SceneSpec {
        noise: Some(NoiseSpec {
            count: 400,
            ..NoiseSpec::default()
        }),
        ..scene(GroundGeometry::Sloped { pitch_deg: -10.0 }, 360)
    };
    let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
    let mut injected = 0usize;
    let mut caught = 0usize;
    let mut baseline_true_cuts = 0usize;
    for frame in frames(&spec, 400..403) {
        let height_bound = seg.state().noise_height();
        let res = seg.segment(&frame.cloud).unwrap();
        let labels = &frame.labels;
        let mut frame_baseline = 0usize;
        for i in 0..frame.cloud.len() {
            let is_noise = labels[i] == 1;
            let removed = res.classes[i] == PointClass::Noise;
            injected += is_noise as usize;
            caught += (is_noise && removed) as usize;
            assert!(
                is_noise || !removed,
                "true return {i} (label {}) removed as noise",
                labels[i]
            );
            if !is_noise && (frame.cloud.z(i) as f64) < height_bound {
                frame_baseline += 1;
            }
        }
        assert!(
            frame_baseline > 0,
            "height-only cut at {height_bound} removed no true returns; scene too easy"
        );
        baseline_true_cuts += frame_baseline;
    }
    assert_eq!(injected, 3 * 400);
    let rate = caught as f64 / injected as f64;
    assert!(rate >= 0.99, "caught {caught}/{injected} = {rate:.4}");
    println!(
        "criterion 4 (reflected-noise removal downhill): PASS — \
         {caught}/{injected} injected points removed ({:.1}%), zero true returns lost; \
         a plain height cut at the same bound removes {baseline_true_cuts} true returns",
        rate * 100.0
    );
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_05_vertical_peel_recovers_elevated_ground() {
    // Wall just past the first bin boundary and a capped range: most of the
    // upper terrain then shares its bins with the wall face, so a fit that
    // cannot peel the face loses it.
    let spec = SceneSpec {
        max_range: 28.0,
        ..scene(
            GroundGeometry::Terrace {
                road_radius: 7.3,
                wall_x: 7.6,
                height: 0.5,
            },
            360,
        )
    };
    let shared: Vec<SceneFrame> = frames(&spec, 500..503);
    let recall_upper = |config: PipelineConfig| {
        let mut seg = Segmenter::new(config).unwrap();
        let mut hit = 0usize;
        let mut total = 0usize;
        let mut f1 = 0.0f64;
        for frame in &shared {
            let res = seg.segment(&frame.cloud).unwrap();
            let labels = &frame.labels;
            for i in 0..frame.cloud.len() {
                if labels[i] == 72 {
                    total += 1;
                    hit += (res.classes[i] == PointClass::Ground) as usize;
                }
            }
            f1 += score(&res.classes, &frame.labels).f1;
        }
        (hit as f64 / total as f64, f1 / shared.len() as f64, total)
    };
    let (with_peel, f1_with, total) = recall_upper(PipelineConfig::default());
    let (without_peel, f1_without, _) = recall_upper(PipelineConfig {
        vertical_filter: None,
        ..PipelineConfig::default()
    });
    let delta = with_peel - without_peel;
    assert!(
        delta >= 0.20,
        "upper-terrain recall {with_peel:.4} vs {without_peel:.4} (delta {delta:.4})"
    );
    assert!(f1_with > f1_without);
    println!(
        "criterion 5 (vertical peel ablation on a terrace): PASS — \
         upper-terrain recall {:.1}% with vs {:.1}% without (delta {:.1} points, n={total}), \
         F1 {f1_with:.4} vs {f1_without:.4}",
        with_peel * 100.0,
        without_peel * 100.0,
        delta * 100.0
    );
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_06_revert_pass_rescues_rough_frames() {
    let rough_frames: [usize; 5] = [18, 37, 56, 75, 94];
    let mut sequence = Vec::with_capacity(100);
    for i in 0..100u64 {
        let spec = SceneSpec {
            z_sigma: if rough_frames.contains(&(i as usize)) {
                0.02
            } else {
                0.005
            },
            ..scene(GroundGeometry::Flat, 240)
        };
        sequence.push(generate_scene(&spec, 600 + i).unwrap());
    }
    let run = |temporal_revert: bool| {
        let mut seg = Segmenter::new(PipelineConfig {
            temporal_revert,
            ..PipelineConfig::default()
        })
        .unwrap();
        let mut metrics = Vec::with_capacity(sequence.len());
        for frame in &sequence {
            let res = seg.segment(&frame.cloud).unwrap();
            metrics.push(score(&res.classes, &frame.labels));
        }
        (metrics, seg.snapshot())
    };
    let (with_revert, snap_with) = run(true);
    let (without_revert, snap_without) = run(false);
    // Reverted planes never feed the histories, so both runs must adapt
    // identically; the comparison below is therefore apples to apples.
    assert_eq!(snap_with.state, snap_without.state);

    let mean_on = |metrics: &[FrameMetrics], f: fn(&FrameMetrics) -> f64| {
        rough_frames.iter().map(|&i| f(&metrics[i])).sum::<f64>() / rough_frames.len() as f64
    };
    let recall_with = mean_on(&with_revert, |m| m.recall);
    let recall_without = mean_on(&without_revert, |m| m.recall);
    let precision_with = mean_on(&with_revert, |m| m.precision);
    let precision_without = mean_on(&without_revert, |m| m.precision);
    assert!(
        recall_with >= recall_without + 0.05,
        "rough-frame recall {recall_with:.4} vs {recall_without:.4}"
    );
    assert!(
        precision_with >= precision_without - 0.01,
        "rough-frame precision {precision_with:.4} vs {precision_without:.4}"
    );
    println!(
        "criterion 6 (temporal revert on rough frames): PASS — \
         rough-frame recall {:.1}% vs {:.1}% without the revert pass \
         (+{:.1} points), precision {:.2}% vs {:.2}%",
        recall_with * 100.0,
        recall_without * 100.0,
        (recall_with - recall_without) * 100.0,
        precision_with * 100.0,
        precision_without * 100.0
    );
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_07_segmentation_quality_across_the_scene_suite() {
    let suite: [(&str, SceneSpec); 4] = [
        ("flat", scene(GroundGeometry::Flat, 360)),
        (
            "sloped",
            scene(
                GroundGeometry::Valley {
                    max_pitch_deg: 12.0,
                    half_width: 8.0,
                },
                360,
            ),
        ),
        (
            "terrace",
            scene(
                GroundGeometry::Terrace {
                    road_radius: 7.3,
                    wall_x: 8.0,
                    height: 0.5,
                },
                360,
            ),
        ),
        (
            "noisy",
            SceneSpec {
                noise: Some(NoiseSpec {
                    count: 150,
                    ..NoiseSpec::default()
                }),
                ..scene(
                    GroundGeometry::Valley {
                        max_pitch_deg: 10.0,
                        half_width: 6.0,
                    },
                    360,
                )
            },
        ),
    ];
    let mut detail = String::new();
    for (k, (name, spec)) in suite.iter().enumerate() {
        let shared = frames(spec, (700 + 10 * k as u64)..(700 + 10 * k as u64 + 3));
        let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
        let mut ours = Vec::new();
        let mut baseline = Vec::new();
        for frame in &shared {
            let res = seg.segment(&frame.cloud).unwrap();
            ours.push(score(&res.classes, &frame.labels));
            let ransac = ransac_baseline(&frame.cloud, &RansacParams::default());
            baseline.push(score(&ransac, &frame.labels));
        }
        let ours_f1 = summarize(&ours).unwrap().f1.mean;
        let ransac_f1 = summarize(&baseline).unwrap().f1.mean;
        assert!(
            ours_f1 >= 0.95,
            "{name}: mean F1 {ours_f1:.4} below the 0.95 floor"
        );
        if *name != "flat" {
            assert!(
                ours_f1 > ransac_f1,
                "{name}: pipeline F1 {ours_f1:.4} does not beat single-plane RANSAC {ransac_f1:.4}"
            );
        }
        detail.push_str(&format!(" {name} {ours_f1:.4}/{ransac_f1:.4}"));
    }
    println!(
        "criterion 7 (suite F1 vs single-plane RANSAC, ours/baseline):{detail} — PASS"
    );
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_08_real_scans_meet_the_accuracy_band() {
    let Ok(dir) = std::env::var("GROUNDSEG_KITTI_DIR") else {
        println!(
            "criterion 8 (real scans): SKIP — set GROUNDSEG_KITTI_DIR to a directory of \
             .bin/.label pairs (a `velodyne`/`labels` split is also recognized)"
        );
        return;
    };
    let root = std::path::PathBuf::from(dir);
    let (scan_dir, label_dir) = if root.join("velodyne").is_dir() {
        (root.join("velodyne"), root.join("labels"))
    } else {
        (root.clone(), root.clone())
    };
    let mut scans: Vec<std::path::PathBuf> = std::fs::read_dir(&scan_dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "bin"))
        .collect();
    scans.sort();
    // The accuracy band below is calibrated for sequence-scale statistics;
    // point the variable at a few hundred frames or more.
    scans.truncate(500);
    assert!(
        !scans.is_empty(),
        "no .bin scans under {}",
        scan_dir.display()
    );
    let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
    let mut metrics = Vec::new();
    for scan in &scans {
        let (cloud, _) = io::load_scan(scan).unwrap();
        let label_path = label_dir
            .join(scan.file_stem().unwrap())
            .with_extension("label");
        let labels = io::load_labels(&label_path, &cloud).unwrap();
        let res = seg.segment(&cloud).unwrap();
        metrics.push(score(&res.classes, labels.ids()));
    }
    let summary = summarize(&metrics).unwrap();
    let (p, r, f1) = (
        summary.precision.mean,
        summary.recall.mean,
        summary.f1.mean,
    );
    assert!((0.90..=0.99).contains(&p), "precision {p:.4} outside [0.90, 0.99]");
    assert!((0.94..=1.0).contains(&r), "recall {r:.4} outside [0.94, 1.00]");
    assert!(f1 >= 0.93, "F1 {f1:.4} below 0.93");
    println!(
        "criterion 8 (real scans): PASS — {} frames, precision {p:.4}, recall {r:.4}, F1 {f1:.4}",
        scans.len()
    );
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_09_full_density_frame_stays_under_the_latency_budget() {
    let spec = scene(GroundGeometry::Flat, 1800);
    let frame = generate_scene(&spec, 900).unwrap();
    assert!(
        frame.cloud.len() >= 100_000,
        "only {} points generated",
        frame.cloud.len()
    );
    let mut seg = Segmenter::new(PipelineConfig::default()).unwrap();
    for _ in 0..2 {
        seg.segment(&frame.cloud).unwrap();
    }
    let mut samples = Vec::with_capacity(9);
    for _ in 0..9 {
        let t = Instant::now();
        let res = seg.segment(&frame.cloud).unwrap();
        samples.push(t.elapsed().as_secs_f64() * 1e3);
        assert_eq!(res.classes.len(), frame.cloud.len());
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = samples[samples.len() / 2];
    assert!(median <= 50.0, "median {median:.2} ms over 50 ms budget");

    let report = czm::sort_strategy_bench(&frame.cloud, &ZoneConfig::default(), 7).unwrap();
    assert!(report.identical);
    assert!(
        report.binwise_sort_ms <= report.global_sort_ms,
        "bin-wise sort {:.3} ms slower than global {:.3} ms",
        report.binwise_sort_ms,
        report.global_sort_ms
    );
    println!(
        "criterion 9 (latency at {} points): PASS — median {median:.2} ms, \
         bin-wise sort {:.2} ms vs global {:.2} ms",
        frame.cloud.len(),
        report.binwise_sort_ms,
        report.global_sort_ms
    );
}

// --------------------------------------------------------------- criterion 10

#[test]
fn criterion_10_outputs_are_bit_stable_across_runs_threads_and_resume() {
    let spec = scene(
        GroundGeometry::Terrace {
            road_radius: 7.3,
            wall_x: 8.0,
            height: 0.5,
        },
        240,
    );
    let shared: Vec<SceneFrame> = frames(&spec, 1000..1004);
    let run = |parallelism: usize| {
        let mut seg = Segmenter::new(PipelineConfig {
            parallelism,
            ..PipelineConfig::default()
        })
        .unwrap();
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for frame in &shared {
            let res = seg.segment(&frame.cloud).unwrap();
            outputs.push(res.classes.iter().map(|c| *c as u8).collect());
        }
        (outputs, seg.snapshot())
    };
    let (first, snap_first) = run(1);
    let (again, snap_again) = run(1);
    assert_eq!(first, again, "same run, same config: outputs differ");
    assert_eq!(snap_first, snap_again);
    for workers in [2usize, 4, 7] {
        let (parallel, snap_parallel) = run(workers);
        assert_eq!(first, parallel, "{workers} workers changed the output");
        assert_eq!(snap_first.state, snap_parallel.state);
    }

    // Split the session after two frames and resume from the snapshot.
    let config = PipelineConfig::default();
    let mut head = Segmenter::new(config.clone()).unwrap();
    for frame in &shared[..2] {
        head.segment(&frame.cloud).unwrap();
    }
    let mut tail = Segmenter::resume(config, head.snapshot()).unwrap();
    for (k, frame) in shared[2..].iter().enumerate() {
        let res = tail.segment(&frame.cloud).unwrap();
        let bytes: Vec<u8> = res.classes.iter().map(|c| *c as u8).collect();
        assert_eq!(bytes, first[2 + k], "resumed frame {k} diverged");
    }
    assert_eq!(tail.snapshot(), snap_first);
    println!(
        "criterion 10 (bit-stable outputs): PASS — {} frames identical across \
         reruns, 1/2/4/7 workers, and a snapshot/resume split",
        shared.len()
    );
}

// -------------------------------------------------------- shared sanity check

/// The synthetic frames the criteria above lean on must themselves be
/// deterministic, otherwise none of the comparisons are meaningful.
#[test]
fn scene_generation_is_reproducible_for_the_suite() {
    let spec = SceneSpec {
        noise: Some(NoiseSpec {
            count: 50,
            ..NoiseSpec::default()
        }),
        ..scene(GroundGeometry::Sloped { pitch_deg: -10.0 }, 180)
    };
    let a = generate_scene(&spec, 5).unwrap();
    let b = generate_scene(&spec, 5).unwrap();
    assert_eq!(a.cloud, b.cloud);
    assert_eq!(a.labels, b.labels);
    let shifted = synth::generate_scene(&spec, 6).unwrap();
    assert_ne!(a.cloud, shifted.cloud);
}
