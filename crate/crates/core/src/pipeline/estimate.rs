//! Whole-video EF estimation and its report.

use crate::beats::{analyze, BeatError, BeatParams, CardiacCycle, VolumeSignal};
use crate::geometry::BinaryMask;
use crate::measure::{measure_frame, LvLandmarks};
use crate::metrics::EfClass;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateParams {
    pub beat: BeatParams,
    /// Threads for per-frame measurement; `None` uses the global pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("mask stack has no frames")]
    NoFrames,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no complete cardiac cycle in {}", .report.video_id)]
    NoCycles { report: Box<EstimateReport> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub median_window: usize,
    /// Window actually applied after clipping to the signal length.
    pub median_window_used: usize,
    pub min_prominence_frac: f64,
    /// Absolute prominence threshold in cubic pixels.
    pub min_prominence: f64,
    pub min_separation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame: usize,
    pub area: Option<f64>,
    pub length: Option<f64>,
    /// Measured volume; absent when the frame failed.
    pub raw_volume: Option<f64>,
    /// Raw volume with failed frames linearly interpolated.
    pub volume: f64,
    pub filtered_volume: f64,
    pub landmarks: Option<LvLandmarks>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub video_id: String,
    pub fps: Option<f64>,
    pub n_frames: usize,
    pub params: ReportParams,
    pub frames: Vec<FrameReport>,
    pub peaks: Vec<usize>,
    pub troughs: Vec<usize>,
    pub cycles: Vec<CardiacCycle>,
    pub ef_mean: Option<f64>,
    pub ef_class: Option<EfClass>,
    pub warnings: Vec<String>,
}

/// Fills `None` entries by linear interpolation between the nearest valid
/// neighbours; leading and trailing gaps copy the nearest valid value.
pub fn interpolate_gaps(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let valid: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let (&first, &last) = (valid.first()?, valid.last()?);
    let mut out = Vec::with_capacity(values.len());
    let mut k = 0;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            out.push(*v);
            continue;
        }
        if i < first {
            out.push(values[first].unwrap());
        } else if i > last {
            out.push(values[last].unwrap());
        } else {
            while valid[k + 1] < i {
                k += 1;
            }
            let (l, r) = (valid[k], valid[k + 1]);
            let (vl, vr) = (values[l].unwrap(), values[r].unwrap());
            out.push(vl + (vr - vl) * (i - l) as f64 / (r - l) as f64);
        }
    }
    Some(out)
}

fn validate(params: &EstimateParams) -> Result<(), EstimateError> {
    let b = &params.beat;
    if b.median_window == 0 || b.median_window.is_multiple_of(2) {
        return Err(EstimateError::InvalidParams(format!("median window must be odd and positive, got {}", b.median_window)));
    }
    if !(b.min_prominence_frac.is_finite() && (0.0..=1.0).contains(&b.min_prominence_frac)) {
        return Err(EstimateError::InvalidParams(format!(
            "min prominence fraction must lie in [0, 1], got {}",
            b.min_prominence_frac
        )));
    }
    if b.min_separation == Some(0) {
        return Err(EstimateError::InvalidParams("min separation must be at least 1".into()));
    }
    if params.workers == Some(0) {
        return Err(EstimateError::InvalidParams("worker count must be at least 1".into()));
    }
    Ok(())
}

/// Measures every frame, fills failed frames, runs beat analysis and
/// assembles the report. Output does not depend on `workers`.
pub fn run_estimate(
    video_id: &str,
    masks: &[BinaryMask],
    fps: Option<f64>,
    params: &EstimateParams,
) -> Result<EstimateReport, EstimateError> {
    validate(params)?;
    if masks.is_empty() {
        return Err(EstimateError::NoFrames);
    }
    let measure = || {
        masks
            .par_iter()
            .enumerate()
            .map(|(i, m)| measure_frame(m, i))
            .collect::<Vec<_>>()
    };
    let measured = match params.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| EstimateError::InvalidParams(e.to_string()))?
            .install(measure),
        None => measure(),
    };

    let mut warnings = Vec::new();
    for (i, m) in measured.iter().enumerate() {
        if let Err(e) = m {
            log::warn!("{video_id} frame {i}: {e}");
            warnings.push(format!("frame {i}: {e}; volume interpolated"));
        }
    }
    let raw: Vec<Option<f64>> = measured.iter().map(|m| m.as_ref().ok().map(|f| f.sample.volume)).collect();
    let beat = params.beat;
    let mut report = EstimateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        video_id: video_id.to_string(),
        fps,
        n_frames: masks.len(),
        params: ReportParams {
            median_window: beat.median_window,
            median_window_used: beat.window_for(masks.len()),
            min_prominence_frac: beat.min_prominence_frac,
            min_prominence: 0.0,
            min_separation: beat.separation_for(fps),
        },
        frames: Vec::new(),
        peaks: Vec::new(),
        troughs: Vec::new(),
        cycles: Vec::new(),
        ef_mean: None,
        ef_class: None,
        warnings,
    };
    let frame_report = |i: usize, volume: f64, filtered_volume: f64| {
        let ok = measured[i].as_ref().ok();
        FrameReport {
            frame: i,
            area: ok.map(|f| f.sample.area),
            length: ok.map(|f| f.sample.length),
            raw_volume: raw[i],
            volume,
            filtered_volume,
            landmarks: ok.map(|f| f.landmarks),
            error: measured[i].as_ref().err().map(|e| e.to_string()),
        }
    };

    let Some(filled) = interpolate_gaps(&raw) else {
        report.frames = (0..masks.len()).map(|i| frame_report(i, 0.0, 0.0)).collect();
        report.warnings.push("no frame could be measured".into());
        return Err(EstimateError::NoCycles { report: Box::new(report) });
    };
    if report.params.median_window_used != beat.median_window {
        report.warnings.push(format!(
            "median window {} clipped to {} for {} frames",
            beat.median_window,
            report.params.median_window_used,
            masks.len()
        ));
    }
    let signal = VolumeSignal::new(filled.clone(), fps).map_err(|e| EstimateError::InvalidParams(e.to_string()))?;
    let analysis = analyze(&signal, &beat).map_err(|e| EstimateError::InvalidParams(e.to_string()))?;
    report.params.min_prominence = analysis.min_prominence;
    report.params.min_separation = analysis.min_separation;
    report.frames = (0..masks.len())
        .map(|i| frame_report(i, filled[i], analysis.filtered.volumes()[i]))
        .collect();
    report.peaks = analysis.extrema.peaks;
    report.troughs = analysis.extrema.troughs;
    match analysis.estimate {
        Ok(est) => {
            report.cycles = est.cycles;
            report.ef_mean = Some(est.ef_mean);
            report.ef_class = Some(est.ef_class);
            Ok(report)
        }
        Err(BeatError::NoCycles) => {
            report.warnings.push("no complete cardiac cycle; EF not estimated".into());
            Err(EstimateError::NoCycles { report: Box::new(report) })
        }
        Err(e) => Err(EstimateError::InvalidParams(e.to_string())),
    }
}

/// `frame,raw_volume,volume,filtered_volume` rows; a failed frame leaves `raw_volume` empty.
pub fn write_volumes_csv<W: std::io::Write>(report: &EstimateReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "raw_volume", "volume", "filtered_volume"])?;
    for f in &report.frames {
        w.write_record([
            f.frame.to_string(),
            f.raw_volume.map_or(String::new(), |v| format!("{v:.6}")),
            format!("{:.6}", f.volume),
            format!("{:.6}", f.filtered_volume),
        ])?;
    }
    w.flush()?;
    Ok(())
}
