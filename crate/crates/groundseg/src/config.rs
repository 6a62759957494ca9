// SPDX-License-Identifier: Apache-2.0

//! Plain-text pipeline configuration: one `key = value` pair per line,
//! `#` comments, unknown keys rejected. Values are scalars or
//! whitespace-separated lists; gain lists accept a single scalar that is
//! broadcast across the adaptive rings.

use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

/// Parses a configuration text into a full pipeline configuration,
/// starting from the defaults. The result is validated.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    let mut rnr = cfg.noise_removal.take().unwrap_or_default();
    let mut rnr_enabled = true;
    let mut vpf = cfg.vertical_filter.take().unwrap_or_default();
    let mut vpf_enabled = true;
    // Gains are resolved after the whole file is read so a scalar
    // broadcast does not depend on where the ring count is set.
    let mut elevation_gains: Option<Vec<f64>> = None;
    let mut flatness_gains: Option<Vec<f64>> = None;
    let mut revert_gains: Option<Vec<f64>> = None;

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Config(format!("config line {}: {msg}", line_no + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let float = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| at(format!("{key}: bad number {value:?}")))
        };
        let integer = || -> Result<usize> {
            value
                .parse()
                .map_err(|_| at(format!("{key}: bad integer {value:?}")))
        };
        let boolean = || -> Result<bool> {
            match value {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(at(format!("{key}: expected true/false, got {other:?}"))),
            }
        };
        let float_list = || -> Result<Vec<f64>> {
            value
                .split_whitespace()
                .map(|v| {
                    v.parse()
                        .map_err(|_| at(format!("{key}: bad number {v:?}")))
                })
                .collect()
        };
        let integer_list = || -> Result<Vec<usize>> {
            value
                .split_whitespace()
                .map(|v| {
                    v.parse()
                        .map_err(|_| at(format!("{key}: bad integer {v:?}")))
                })
                .collect()
        };
        match key {
            "czm.rings_per_zone" => cfg.zones.rings_per_zone = integer_list()?,
            "czm.sectors_per_zone" => cfg.zones.sectors_per_zone = integer_list()?,
            "czm.boundaries" => cfg.zones.boundaries = float_list()?,
            "czm.min_points_per_bin" => cfg.zones.min_points_per_bin = integer()?,
            "rnr.enabled" => rnr_enabled = boolean()?,
            "rnr.num_rings" => rnr.num_rings = integer()?,
            "rnr.intensity_thr" => rnr.intensity_thr = float()? as f32,
            "rnr.height_thr" => rnr.height_thr = float()?,
            "vpf.enabled" => vpf_enabled = boolean()?,
            "vpf.dist_margin" => vpf.dist_margin = float()?,
            "vpf.angle_margin" => vpf.angle_margin = float()?,
            "vpf.num_iter" => vpf.num_iter = integer()?,
            "vpf.num_seed" => vpf.num_seed = integer()?,
            "gpf.num_lpr" => cfg.ground_fit.num_lpr = integer()?,
            "gpf.seed_margin" => cfg.ground_fit.seed_margin = float()?,
            "gpf.num_iter" => cfg.ground_fit.num_iter = integer()?,
            "gpf.dist_thr" => cfg.ground_fit.dist_thr = float()?,
            "gpf.sensor_height" => cfg.ground_fit.sensor_height = float()?,
            "gle.uprightness_thr" => cfg.gle.uprightness_thr = float()?,
            "gle.adaptive_ring_count" => cfg.gle.adaptive_ring_count = integer()?,
            "gle.elevation_gains" => elevation_gains = Some(float_list()?),
            "gle.flatness_gains" => flatness_gains = Some(float_list()?),
            "gle.revert_gains" => revert_gains = Some(float_list()?),
            "gle.noise_height_offset" => cfg.gle.noise_height_offset = float()?,
            "gle.sample_stdev" => cfg.gle.sample_stdev = boolean()?,
            "gle.history_cap" => {
                cfg.gle.history_cap = if value == "none" {
                    None
                } else {
                    Some(integer()?)
                }
            }
            "pipeline.temporal_revert" => cfg.temporal_revert = boolean()?,
            "pipeline.parallelism" => cfg.parallelism = integer()?,
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }

    let rings = cfg.gle.adaptive_ring_count;
    for (slot, gains) in [
        (&mut cfg.gle.elevation_gains, elevation_gains),
        (&mut cfg.gle.flatness_gains, flatness_gains),
        (&mut cfg.gle.revert_gains, revert_gains),
    ] {
        match gains {
            Some(g) if g.len() == 1 => *slot = vec![g[0]; rings],
            Some(g) => *slot = g,
            None if slot.len() != rings => {
                // Ring count changed but the default gains were kept:
                // extend with the last default rather than failing.
                let last = *slot.last().unwrap();
                slot.resize(rings.max(1), last);
            }
            None => {}
        }
    }
    cfg.noise_removal = rnr_enabled.then_some(rnr);
    cfg.vertical_filter = vpf_enabled.then_some(vpf);
    cfg.validate()?;
    Ok(cfg)
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a configuration as text that [`parse_config`] reads back to an
/// equal value. Disabled stages keep their default parameters in the
/// output so the file documents every knob.
pub fn render_config(cfg: &PipelineConfig) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("czm.rings_per_zone", join(&cfg.zones.rings_per_zone));
    line("czm.sectors_per_zone", join(&cfg.zones.sectors_per_zone));
    line("czm.boundaries", join(&cfg.zones.boundaries));
    line(
        "czm.min_points_per_bin",
        cfg.zones.min_points_per_bin.to_string(),
    );
    let rnr = cfg.noise_removal.unwrap_or_default();
    line("rnr.enabled", cfg.noise_removal.is_some().to_string());
    line("rnr.num_rings", rnr.num_rings.to_string());
    line("rnr.intensity_thr", rnr.intensity_thr.to_string());
    line("rnr.height_thr", rnr.height_thr.to_string());
    let vpf = cfg.vertical_filter.clone().unwrap_or_default();
    line("vpf.enabled", cfg.vertical_filter.is_some().to_string());
    line("vpf.dist_margin", vpf.dist_margin.to_string());
    line("vpf.angle_margin", vpf.angle_margin.to_string());
    line("vpf.num_iter", vpf.num_iter.to_string());
    line("vpf.num_seed", vpf.num_seed.to_string());
    line("gpf.num_lpr", cfg.ground_fit.num_lpr.to_string());
    line("gpf.seed_margin", cfg.ground_fit.seed_margin.to_string());
    line("gpf.num_iter", cfg.ground_fit.num_iter.to_string());
    line("gpf.dist_thr", cfg.ground_fit.dist_thr.to_string());
    line("gpf.sensor_height", cfg.ground_fit.sensor_height.to_string());
    line("gle.uprightness_thr", cfg.gle.uprightness_thr.to_string());
    line(
        "gle.adaptive_ring_count",
        cfg.gle.adaptive_ring_count.to_string(),
    );
    line("gle.elevation_gains", join(&cfg.gle.elevation_gains));
    line("gle.flatness_gains", join(&cfg.gle.flatness_gains));
    line("gle.revert_gains", join(&cfg.gle.revert_gains));
    line(
        "gle.noise_height_offset",
        cfg.gle.noise_height_offset.to_string(),
    );
    line("gle.sample_stdev", cfg.gle.sample_stdev.to_string());
    line(
        "gle.history_cap",
        cfg.gle
            .history_cap
            .map_or_else(|| "none".into(), |c| c.to_string()),
    );
    line("pipeline.temporal_revert", cfg.temporal_revert.to_string());
    line("pipeline.parallelism", cfg.parallelism.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = PipelineConfig::default();
        let parsed = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn empty_text_gives_defaults() {
        let parsed = parse_config("").unwrap();
        assert_eq!(parsed, PipelineConfig::default());
    }

    #[test]
    fn modified_config_round_trips() {
        let mut cfg = PipelineConfig::default();
        cfg.noise_removal = None;
        cfg.zones.min_points_per_bin = 12;
        cfg.gle.history_cap = Some(40);
        cfg.gle.sample_stdev = true;
        cfg.gle.flatness_gains = vec![2.5, 2.0, 1.5, 1.0];
        cfg.temporal_revert = false;
        cfg.parallelism = 8;
        let text = render_config(&cfg);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn scalar_gains_broadcast_regardless_of_key_order() {
        let text = "\
gle.elevation_gains = 1.5
gle.adaptive_ring_count = 6
gle.flatness_gains = 2.0
gle.revert_gains = 1.25
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.gle.elevation_gains, vec![1.5; 6]);
        assert_eq!(cfg.gle.flatness_gains, vec![2.0; 6]);
        assert_eq!(cfg.gle.revert_gains, vec![1.25; 6]);
    }

    #[test]
    fn ring_count_growth_extends_default_gains() {
        let cfg = parse_config("gle.adaptive_ring_count = 6").unwrap();
        assert_eq!(cfg.gle.elevation_gains, vec![1.0; 6]);
        assert_eq!(cfg.gle.flatness_gains, vec![3.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "\n# heading\n  gpf.dist_thr = 0.2  # inline\n\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.ground_fit.dist_thr, 0.2);
    }

    #[test]
    fn bad_input_is_rejected_with_line_numbers() {
        for (text, needle) in [
            ("what.ever = 1", "unknown key"),
            ("gpf.dist_thr 0.2", "expected `key = value`"),
            ("gpf.num_iter = three", "bad integer"),
            ("rnr.enabled = yes", "expected true/false"),
            ("czm.boundaries = 5 4 3 2 1\nczm.min_points_per_bin = 1", "increase strictly"),
        ] {
            let err = parse_config(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} -> {err}");
        }
    }

    #[test]
    fn disabled_stage_round_trips_and_documents_params() {
        let mut cfg = PipelineConfig::default();
        cfg.vertical_filter = None;
        let text = render_config(&cfg);
        assert!(text.contains("vpf.enabled = false"));
        assert!(text.contains("vpf.dist_margin = 0.1"));
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
