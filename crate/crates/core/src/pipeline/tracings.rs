//! Paired-segment LV tracings (EchoNet `VolumeTracings.csv` layout) to masks.
//!
//! Every row is a chord across the ventricle from `(x1, y1)` on one wall to
//! `(x2, y2)` on the other. Rows of one `(video, frame)` group run from the
//! base towards the apex. The closed outline visits the first endpoints in row
//! order and then the second endpoints in reverse.

use crate::geometry::{rasterize_polygon, BinaryMask, Contour, GeometryError, Point2D};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TracingError {
    #[error("tracings CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("tracings CSV has no {0} column")]
    MissingColumn(&'static str),
    #[error("tracings CSV line {line}: bad {column} value {value:?}")]
    BadValue { line: u64, column: &'static str, value: String },
    #[error("malformed tracing group {video_id} frame {frame}: {reason}")]
    MalformedGroup { video_id: String, frame: u32, reason: String },
    #[error("tracing group {video_id} frame {frame}: {source}")]
    Geometry {
        video_id: String,
        frame: u32,
        #[source]
        source: GeometryError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub p1: Point2D,
    pub p2: Point2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracingRow {
    pub video_id: String,
    pub frame: u32,
    pub segment: Segment,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TracingOptions {
    /// Drop the first row of each group. EchoNet stores the long axis there.
    pub skip_long_axis: bool,
}

const COLUMNS: [(&str, &[&str]); 6] = [
    ("video_id", &["video_id", "filename"]),
    ("frame", &["frame"]),
    ("x1", &["x1"]),
    ("y1", &["y1"]),
    ("x2", &["x2"]),
    ("y2", &["y2"]),
];

pub fn parse_tracings<R: Read>(reader: R) -> Result<Vec<TracingRow>, TracingError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let mut idx = [0usize; 6];
    for (slot, (name, aliases)) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| aliases.contains(&h.as_str()))
            .ok_or(TracingError::MissingColumn(name))?;
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let real = |k: usize| {
            field(k)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TracingError::BadValue {
                    line,
                    column: COLUMNS[k].0,
                    value: field(k).to_string(),
                })
        };
        let frame = field(1).parse::<u32>().map_err(|_| TracingError::BadValue {
            line,
            column: "frame",
            value: field(1).to_string(),
        })?;
        rows.push(TracingRow {
            video_id: field(0).to_string(),
            frame,
            segment: Segment {
                p1: Point2D::new(real(2)?, real(3)?),
                p2: Point2D::new(real(4)?, real(5)?),
            },
        });
    }
    Ok(rows)
}

pub fn read_tracings(path: impl AsRef<Path>) -> Result<Vec<TracingRow>, TracingError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| TracingError::Csv(e.into()))?;
    parse_tracings(std::io::BufReader::new(file))
}

/// Groups rows by `(video_id, frame)`, keeping row order within a group.
pub fn group_tracings(rows: &[TracingRow]) -> BTreeMap<(String, u32), Vec<Segment>> {
    let mut groups: BTreeMap<(String, u32), Vec<Segment>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.video_id.clone(), r.frame)).or_default().push(r.segment);
    }
    groups
}

/// Closed outline for one group, or the reason it cannot be ordered.
pub fn tracing_polygon(segments: &[Segment]) -> Result<Vec<Point2D>, String> {
    if segments.len() < 3 {
        return Err(format!("{} segments, at least 3 required", segments.len()));
    }
    let mids: Vec<Point2D> = segments.iter().map(|s| s.p1.midpoint(s.p2)).collect();
    let axis = mids[mids.len() - 1] - mids[0];
    let axis_len = axis.norm();
    if axis_len == 0.0 {
        return Err("first and last chords share a midpoint".into());
    }
    let along: Vec<f64> = mids.iter().map(|m| axis.dot(*m - mids[0]) / axis_len).collect();
    if let Some(i) = along.windows(2).position(|w| w[1] <= w[0]) {
        return Err(format!("chord {} does not advance along the long axis", i + 1));
    }
    let tol = 1e-9 * axis_len;
    let side = |p: Point2D, m: Point2D| axis.cross(p - m) / axis_len;
    let sign = segments
        .iter()
        .zip(&mids)
        .map(|(s, m)| side(s.p1, *m))
        .find(|c| c.abs() > tol)
        .map(f64::signum)
        .ok_or("all chords lie on the long axis")?;
    for (i, (s, m)) in segments.iter().zip(&mids).enumerate() {
        if sign * side(s.p1, *m) < -tol || sign * side(s.p2, *m) > tol {
            return Err(format!("chord {i} endpoints switch walls"));
        }
    }
    Ok(segments
        .iter()
        .map(|s| s.p1)
        .chain(segments.iter().rev().map(|s| s.p2))
        .collect())
}

/// Rasterizes every `(video_id, frame)` group to a `width × height` mask.
pub fn tracings_to_masks(
    rows: &[TracingRow],
    width: usize,
    height: usize,
    options: &TracingOptions,
) -> Result<BTreeMap<(String, u32), BinaryMask>, TracingError> {
    let mut out = BTreeMap::new();
    for ((video_id, frame), segments) in group_tracings(rows) {
        let chords = if options.skip_long_axis { &segments[1..] } else { &segments[..] };
        let polygon = tracing_polygon(chords).map_err(|reason| TracingError::MalformedGroup {
            video_id: video_id.clone(),
            frame,
            reason,
        })?;
        let mask = Contour::new(polygon)
            .and_then(|c| rasterize_polygon(&c, width, height))
            .map_err(|source| TracingError::Geometry {
                video_id: video_id.clone(),
                frame,
                source,
            })?;
        out.insert((video_id, frame), mask);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> Segment {
        Segment {
            p1: Point2D::new(x1, y1),
            p2: Point2D::new(x2, y2),
        }
    }

    #[test]
    fn parses_echonet_columns() {
        let csv = "FileName,X1,Y1,X2,Y2,Frame\na.avi,1,2,3,4,46\na.avi,1.5,2,3,4.25,46\n";
        let rows = parse_tracings(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].video_id, "a.avi");
        assert_eq!(rows[1].frame, 46);
        assert_eq!(rows[1].segment, seg(1.5, 2.0, 3.0, 4.25));
    }

    #[test]
    fn missing_and_bad_columns() {
        assert!(matches!(
            parse_tracings("video_id,frame,x1,y1,x2\n".as_bytes()),
            Err(TracingError::MissingColumn("y2"))
        ));
        assert!(matches!(
            parse_tracings("video_id,frame,x1,y1,x2,y2\nv,1,a,0,0,0\n".as_bytes()),
            Err(TracingError::BadValue { column: "x1", line: 2, .. })
        ));
    }

    #[test]
    fn stacked_chords_make_hexagon() {
        let s = [seg(10.0, 5.0, 20.0, 5.0), seg(5.0, 10.0, 25.0, 10.0), seg(10.0, 15.0, 20.0, 15.0)];
        let poly = tracing_polygon(&s).unwrap();
        let expect = [(10.0, 5.0), (5.0, 10.0), (10.0, 15.0), (20.0, 15.0), (25.0, 10.0), (20.0, 5.0)];
        assert_eq!(poly, expect.map(|(x, y)| Point2D::new(x, y)));
    }

    #[test]
    fn unorderable_groups() {
        let two = [seg(0.0, 0.0, 5.0, 0.0), seg(0.0, 5.0, 5.0, 5.0)];
        assert!(tracing_polygon(&two).is_err());
        let backwards = [seg(0.0, 0.0, 9.0, 0.0), seg(0.0, 8.0, 9.0, 8.0), seg(0.0, 4.0, 9.0, 4.0)];
        assert!(tracing_polygon(&backwards).unwrap_err().contains("advance"));
        let swapped = [seg(0.0, 0.0, 9.0, 0.0), seg(9.0, 4.0, 0.0, 4.0), seg(0.0, 8.0, 9.0, 8.0)];
        assert!(tracing_polygon(&swapped).unwrap_err().contains("walls"));
    }

    #[test]
    fn long_axis_row_is_skipped() {
        let mut rows: Vec<TracingRow> = [seg(15.0, 2.0, 15.0, 20.0), seg(10.0, 5.0, 20.0, 5.0), seg(5.0, 10.0, 25.0, 10.0), seg(10.0, 15.0, 20.0, 15.0)]
            .into_iter()
            .map(|segment| TracingRow {
                video_id: "v".into(),
                frame: 3,
                segment,
            })
            .collect();
        let opts = TracingOptions { skip_long_axis: true };
        let masks = tracings_to_masks(&rows, 32, 32, &opts).unwrap();
        assert!(masks[&("v".to_string(), 3)].count() > 0);
        rows.truncate(3);
        assert!(matches!(
            tracings_to_masks(&rows, 32, 32, &opts),
            Err(TracingError::MalformedGroup { frame: 3, .. })
        ));
    }
}
