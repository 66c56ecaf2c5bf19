//! Beat analysis over a per-frame volume signal: median filtering, extrema
//! detection, cycle segmentation between adjacent troughs, and per-cycle EF.

use crate::metrics::{classify_ef, EfClass};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeatError {
    #[error("median window must be odd and in 1..={max}, got {window}")]
    InvalidWindow { window: usize, max: usize },
    #[error("volume signal is empty")]
    EmptySignal,
    #[error("volume {value} at frame {frame} is negative or not finite")]
    InvalidVolume { frame: usize, value: f64 },
    #[error("no complete cardiac cycle found")]
    NoCycles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSignal {
    volumes: Vec<f64>,
    fps: Option<f64>,
}

impl VolumeSignal {
    pub fn new(volumes: Vec<f64>, fps: Option<f64>) -> Result<Self, BeatError> {
        if volumes.is_empty() {
            return Err(BeatError::EmptySignal);
        }
        if let Some((frame, &value)) = volumes
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(BeatError::InvalidVolume { frame, value });
        }
        Ok(Self { volumes, fps })
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn fps(&self) -> Option<f64> {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// `max − min` of the samples.
    pub fn dynamic_range(&self) -> f64 {
        let (lo, hi) = self
            .volumes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

/// Largest window `median_filter` accepts for a signal of `len` samples.
pub fn max_window(len: usize) -> usize {
    (2 * len).saturating_sub(1)
}

/// Centered running median with replicate padding at both ends.
pub fn median_filter(signal: &VolumeSignal, window: usize) -> Result<VolumeSignal, BeatError> {
    let max = max_window(signal.len());
    if window == 0 || window.is_multiple_of(2) || window > max {
        return Err(BeatError::InvalidWindow { window, max });
    }
    let v = &signal.volumes;
    let last = v.len() as isize - 1;
    let half = (window / 2) as isize;
    let mut buf = Vec::with_capacity(window);
    let filtered = (0..v.len() as isize)
        .map(|i| {
            buf.clear();
            buf.extend((i - half..=i + half).map(|k| v[k.clamp(0, last) as usize]));
            buf.sort_by(f64::total_cmp);
            buf[window / 2]
        })
        .collect();
    Ok(VolumeSignal {
        volumes: filtered,
        fps: signal.fps,
    })
}

/// Interior local maxima; a flat top reports its middle sample (rounded down).
fn local_maxima(v: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = v.len();
    let mut i = 1;
    while i + 1 < n {
        if v[i - 1] < v[i] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Topographic prominence: height above the higher of the two lowest points
/// reached before climbing above the peak on either side.
fn prominence(v: &[f64], peak: usize) -> f64 {
    let h = v[peak];
    let left = v[..=peak].iter().rev().take_while(|&&x| x <= h).fold(h, |m, &x| m.min(x));
    let right = v[peak..].iter().take_while(|&&x| x <= h).fold(h, |m, &x| m.min(x));
    h - left.max(right)
}

/// Keeps the tallest candidates first, dropping any closer than `min_separation`.
fn enforce_separation(v: &[f64], candidates: Vec<usize>, min_separation: usize) -> Vec<usize> {
    let mut order = candidates.clone();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in order {
        if kept.iter().all(|&k| k.abs_diff(c) >= min_separation) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

fn detect(v: &[f64], min_separation: usize, min_prominence: f64) -> Vec<usize> {
    let candidates: Vec<usize> = local_maxima(v)
        .into_iter()
        .filter(|&p| prominence(v, p) >= min_prominence)
        .collect();
    enforce_separation(v, candidates, min_separation.max(1))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extrema {
    /// End-diastole candidates.
    pub peaks: Vec<usize>,
    /// End-systole candidates.
    pub troughs: Vec<usize>,
}

/// Interior peaks and troughs, reconciled so the two kinds alternate.
///
/// Each kind is filtered by prominence, then thinned to `min_separation`
/// frames keeping the most extreme samples. Runs of one kind that are not
/// separated by the other collapse to their most extreme member (first on ties).
pub fn find_extrema(signal: &VolumeSignal, min_separation: usize, min_prominence: f64) -> Extrema {
    let v = signal.volumes();
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let peaks = detect(v, min_separation, min_prominence);
    let troughs = detect(&neg, min_separation, min_prominence);

    let mut merged: Vec<(usize, bool)> = peaks
        .iter()
        .map(|&p| (p, true))
        .chain(troughs.iter().map(|&t| (t, false)))
        .collect();
    merged.sort_unstable();

    let mut out = Extrema::default();
    let mut run: Vec<usize> = Vec::new();
    let mut run_is_peak = false;
    let flush = |run: &mut Vec<usize>, is_peak: bool, out: &mut Extrema| {
        if run.is_empty() {
            return;
        }
        let pick = run.iter().copied().reduce(|best, i| {
            let better = if is_peak { v[i] > v[best] } else { v[i] < v[best] };
            if better { i } else { best }
        });
        if let Some(i) = pick {
            if is_peak {
                out.peaks.push(i);
            } else {
                out.troughs.push(i);
            }
        }
        run.clear();
    };
    for (idx, is_peak) in merged {
        if !run.is_empty() && is_peak != run_is_peak {
            flush(&mut run, run_is_peak, &mut out);
        }
        run_is_peak = is_peak;
        run.push(idx);
    }
    flush(&mut run, run_is_peak, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardiacCycle {
    pub start_frame: usize,
    pub end_frame: usize,
    pub ed_frame: usize,
    pub es_frame: usize,
    pub v_ed: f64,
    pub v_es: f64,
    pub ef: f64,
}

/// One cycle per adjacent trough pair that brackets a peak.
///
/// `v_ed` is the largest volume at a bracketed peak; `v_es` is the smaller of
/// the two bounding trough volumes (the earlier trough on ties). Cycles with
/// `v_ed ≤ v_es` are dropped.
pub fn segment_cycles(
    signal: &VolumeSignal,
    peaks: &[usize],
    troughs: &[usize],
) -> Result<Vec<CardiacCycle>, BeatError> {
    let v = signal.volumes();
    let mut troughs = troughs.to_vec();
    troughs.sort_unstable();
    let mut cycles = Vec::new();
    for pair in troughs.windows(2) {
        let (start, end) = (pair[0], pair[1]);
        let Some(ed_frame) = peaks
            .iter()
            .copied()
            .filter(|&p| p > start && p < end)
            .reduce(|best, p| if v[p] > v[best] { p } else { best })
        else {
            continue;
        };
        let es_frame = if v[end] < v[start] { end } else { start };
        let (v_ed, v_es) = (v[ed_frame], v[es_frame]);
        if v_ed <= v_es {
            continue;
        }
        cycles.push(CardiacCycle {
            start_frame: start,
            end_frame: end,
            ed_frame,
            es_frame,
            v_ed,
            v_es,
            ef: (v_ed - v_es) / v_ed,
        });
    }
    if cycles.is_empty() {
        return Err(BeatError::NoCycles);
    }
    Ok(cycles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfEstimate {
    pub cycles: Vec<CardiacCycle>,
    pub ef_mean: f64,
    pub ef_class: EfClass,
}

/// Unweighted mean of per-cycle EF, with its range class.
pub fn estimate_ef(cycles: &[CardiacCycle]) -> Result<EfEstimate, BeatError> {
    if cycles.is_empty() {
        return Err(BeatError::NoCycles);
    }
    let ef_mean = cycles.iter().map(|c| c.ef).sum::<f64>() / cycles.len() as f64;
    // ef_mean lies in [0, 1) because every cycle EF does.
    let ef_class = classify_ef(ef_mean).expect("mean of cycle EFs is within [0, 1]");
    Ok(EfEstimate {
        cycles: cycles.to_vec(),
        ef_mean,
        ef_class,
    })
}

/// Tunables for beat analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatParams {
    pub median_window: usize,
    /// Frames between extrema of one kind; `None` derives `max(5, fps/4)`.
    pub min_separation: Option<usize>,
    /// Minimum prominence as a fraction of the filtered signal's dynamic range.
    pub min_prominence_frac: f64,
}

impl Default for BeatParams {
    fn default() -> Self {
        Self {
            median_window: 5,
            min_separation: None,
            min_prominence_frac: 0.05,
        }
    }
}

impl BeatParams {
    pub fn separation_for(&self, fps: Option<f64>) -> usize {
        self.min_separation.unwrap_or_else(|| {
            let quarter = fps.filter(|f| f.is_finite() && *f > 0.0).map_or(0.0, |f| f / 4.0);
            (quarter.floor() as usize).max(5)
        })
    }

    /// Median window clipped to what a signal of `len` samples admits.
    pub fn window_for(&self, len: usize) -> usize {
        let max = max_window(len);
        if self.median_window <= max {
            self.median_window
        } else {
            max
        }
    }
}

/// Intermediate artifacts of one beat analysis run.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatAnalysis {
    pub filtered: VolumeSignal,
    pub extrema: Extrema,
    pub min_separation: usize,
    pub min_prominence: f64,
    pub window: usize,
    pub estimate: Result<EfEstimate, BeatError>,
}

/// Filter → extrema → cycles → mean EF.
pub fn analyze(signal: &VolumeSignal, params: &BeatParams) -> Result<BeatAnalysis, BeatError> {
    let window = params.window_for(signal.len());
    let filtered = median_filter(signal, window)?;
    let min_separation = params.separation_for(signal.fps());
    let min_prominence = params.min_prominence_frac * filtered.dynamic_range();
    let extrema = find_extrema(&filtered, min_separation, min_prominence);
    let estimate = segment_cycles(&filtered, &extrema.peaks, &extrema.troughs)
        .and_then(|cycles| estimate_ef(&cycles));
    Ok(BeatAnalysis {
        filtered,
        extrema,
        min_separation,
        min_prominence,
        window,
        estimate,
    })
}
