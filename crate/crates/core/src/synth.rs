//! Synthetic beating-ventricle mask videos with known volumes.
//!
//! Each frame is a semi-ellipse: flat base on row `base_y` (the mitral plane),
//! apex pointing towards row 0. Both semi-axes scale by the same factor `s(t)`
//! about the base midpoint. For the continuous shape `A = π·a·b/2` and `L = a`,
//! so the area-length volume is `V = 2π·a·b²/3` and scales as `s³`.
//!
//! The volume follows a raised cosine per beat, peaking (end-diastole) at the
//! first frame of every beat:
//!
//! ```text
//! u(t) = (1 + cos(2π·t / frames_per_beat)) / 2
//! V(t) = V_es + (V_ed − V_es)·u(t),   V_es = (1 − target_ef)·V_ed
//! s(t) = (V(t) / V_ed)^(1/3)
//! ```

use crate::geometry::{rasterize_polygon, BinaryMask, Contour, Point2D};
use crate::measure::area_length_volume;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Vertices along the elliptic arc of each frame polygon.
const ARC_VERTICES: usize = 720;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    ConfigError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub frame_width: usize,
    pub frame_height: usize,
    pub fps: f64,
    pub n_beats: usize,
    pub frames_per_beat: usize,
    /// Apex-direction semi-axis at end-diastole, pixels.
    pub base_semi_axis_a: f64,
    /// Basal half-width at end-diastole, pixels.
    pub base_semi_axis_b: f64,
    pub target_ef: f64,
    /// Boundary jitter amplitude along the outward normal, pixels.
    pub noise_px: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frame_width: 64,
            frame_height: 64,
            fps: 50.0,
            n_beats: 5,
            frames_per_beat: 40,
            base_semi_axis_a: 44.0,
            base_semi_axis_b: 24.0,
            target_ef: 0.6,
            noise_px: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn n_frames(&self) -> usize {
        self.n_beats * self.frames_per_beat
    }

    /// Base midpoint `(cx, base_y)`: horizontally centred, shape vertically centred at full size.
    pub fn anchor(&self) -> Point2D {
        let cx = (self.frame_width as f64 - 1.0) / 2.0;
        let base_y = ((self.frame_height as f64 - 1.0) / 2.0 + self.base_semi_axis_a / 2.0).round();
        Point2D::new(cx, base_y)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::ConfigError(m));
        if self.frame_width == 0 || self.frame_height == 0 {
            return bad(format!("frame size {}x{}", self.frame_width, self.frame_height));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if self.n_beats < 1 {
            return bad("n_beats must be at least 1".into());
        }
        if self.frames_per_beat < 10 {
            return bad(format!("frames_per_beat must be at least 10, got {}", self.frames_per_beat));
        }
        if !(self.target_ef > 0.0 && self.target_ef < 1.0) {
            return bad(format!("target_ef must lie in (0, 1), got {}", self.target_ef));
        }
        if !(self.noise_px.is_finite() && self.noise_px >= 0.0) {
            return bad(format!("noise_px must be non-negative, got {}", self.noise_px));
        }
        let (a, b) = (self.base_semi_axis_a, self.base_semi_axis_b);
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return bad(format!("semi-axes must be positive, got a={a} b={b}"));
        }
        let o = self.anchor();
        let n = self.noise_px;
        let (w, h) = (self.frame_width as f64 - 1.0, self.frame_height as f64 - 1.0);
        if o.y - a - n < 0.0 || o.y + n > h || o.x - b - n < 0.0 || o.x + b + n > w {
            return bad(format!(
                "semi-ellipse a={a} b={b} (noise {n}) does not fit a {}x{} frame",
                self.frame_width, self.frame_height
            ));
        }
        Ok(())
    }

    /// Diastolic volume of the continuous shape.
    pub fn ed_volume(&self) -> f64 {
        analytic_volume(self.base_semi_axis_a, self.base_semi_axis_b)
    }

    /// Analytic volume at frame `t`.
    pub fn volume_at(&self, t: usize) -> f64 {
        let v_ed = self.ed_volume();
        let v_es = (1.0 - self.target_ef) * v_ed;
        let u = (1.0 + (2.0 * PI * t as f64 / self.frames_per_beat as f64).cos()) / 2.0;
        v_es + (v_ed - v_es) * u
    }

    /// Per-axis scale at frame `t`.
    pub fn scale_at(&self, t: usize) -> f64 {
        (self.volume_at(t) / self.ed_volume()).cbrt()
    }
}

/// Area-length volume of a semi-ellipse with semi-axes `a` (long) and `b`.
pub fn analytic_volume(a: f64, b: f64) -> f64 {
    area_length_volume(PI * a * b / 2.0, a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub truth_ef: f64,
    pub truth_volumes: Vec<f64>,
    pub ed_frames: Vec<usize>,
    pub es_frames: Vec<usize>,
    /// First frame of each beat.
    pub beat_starts: Vec<usize>,
    pub config: SynthConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub masks: Vec<BinaryMask>,
    pub truth: SynthTruth,
}

fn frame_polygon(config: &SynthConfig, t: usize) -> Vec<Point2D> {
    let s = config.scale_at(t);
    let (a, b) = (s * config.base_semi_axis_a, s * config.base_semi_axis_b);
    let o = config.anchor();
    let mut rng = (config.noise_px > 0.0).then(|| {
        let mut r = ChaCha8Rng::seed_from_u64(config.seed);
        r.set_stream(t as u64);
        r
    });
    (0..=ARC_VERTICES)
        .map(|i| {
            let th = PI * i as f64 / ARC_VERTICES as f64;
            let p = Point2D::new(o.x + b * th.cos(), o.y - a * th.sin());
            match rng.as_mut() {
                Some(r) => {
                    // Outward normal of the ellipse at angle th.
                    let n = Point2D::new(a * th.cos(), -b * th.sin());
                    let n = n * (1.0 / n.norm());
                    p + n * (config.noise_px * r.random_range(-1.0..=1.0))
                }
                None => p,
            }
        })
        .collect()
}

/// Renders every frame and the analytic truth for `config`.
pub fn generate_video(config: &SynthConfig) -> Result<SynthVideo, SynthError> {
    config.validate()?;
    let n = config.n_frames();
    let fpb = config.frames_per_beat;
    let masks = (0..n)
        .map(|t| {
            let poly = Contour::new(frame_polygon(config, t)).map_err(|e| SynthError::ConfigError(e.to_string()))?;
            rasterize_polygon(&poly, config.frame_width, config.frame_height)
                .map_err(|e| SynthError::ConfigError(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let truth_volumes = (0..n).map(|t| config.volume_at(t)).collect();
    let beat_starts: Vec<usize> = (0..config.n_beats).map(|k| k * fpb).collect();
    // End-systole sits half a beat in; with odd frames_per_beat the nearest frame is taken.
    let es_frames = beat_starts.iter().map(|&s| s + fpb / 2).collect();
    Ok(SynthVideo {
        masks,
        truth: SynthTruth {
            truth_ef: config.target_ef,
            truth_volumes,
            ed_frames: beat_starts.clone(),
            es_frames,
            beat_starts,
            config: config.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ed_and_es_volumes_give_target_ef() {
        let c = SynthConfig::default();
        let (ed, es) = (c.volume_at(0), c.volume_at(20));
        assert_relative_eq!(es, 0.4 * ed, max_relative = 1e-12);
        assert_relative_eq!(1.0 - es / ed, 0.6, max_relative = 1e-12);
        assert_relative_eq!(c.scale_at(20), 0.4f64.cbrt(), max_relative = 1e-12);
    }

    #[test]
    fn volume_scales_with_cube() {
        let (a, b) = (30.0, 18.0);
        for s in [0.5, 0.8, 1.3] {
            assert_relative_eq!(analytic_volume(s * a, s * b), s.powi(3) * analytic_volume(a, b), max_relative = 1e-12);
        }
        assert_relative_eq!(analytic_volume(a, b), 2.0 * PI * a * b * b / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn oversized_shape_is_rejected() {
        let c = SynthConfig {
            base_semi_axis_a: 70.0,
            ..Default::default()
        };
        assert!(matches!(generate_video(&c), Err(SynthError::ConfigError(_))));
        let c = SynthConfig {
            target_ef: 1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SynthConfig {
            frames_per_beat: 9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let c = SynthConfig {
            n_beats: 1,
            noise_px: 1.0,
            seed: 4,
            ..Default::default()
        };
        let v1 = generate_video(&c).unwrap();
        let v2 = generate_video(&c).unwrap();
        assert_eq!(v1, v2);
        let v3 = generate_video(&SynthConfig { seed: 5, ..c }).unwrap();
        assert_ne!(v1.masks, v3.masks);
    }

    #[test]
    fn frames_and_truth_line_up() {
        let v = generate_video(&SynthConfig::default()).unwrap();
        assert_eq!(v.masks.len(), 200);
        assert_eq!(v.truth.truth_volumes.len(), 200);
        assert_eq!(v.truth.ed_frames, vec![0, 40, 80, 120, 160]);
        assert_eq!(v.truth.es_frames, vec![20, 60, 100, 140, 180]);
        assert!(v.masks[0].count() > v.masks[20].count());
        assert_eq!(v.masks[0], v.masks[40]);
    }
}
