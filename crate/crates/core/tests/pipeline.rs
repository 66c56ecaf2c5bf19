mod common;

use common::{point_in_polygon_inclusive, to_pts};
use lvef_core::geometry::{BinaryMask, Point2D};
use lvef_core::metrics::dice;
use lvef_core::pipeline::{
    decode_mask_stack, encode_mask_stack, parse_tracings, read_mask_stack, run_estimate, tracing_polygon,
    tracings_to_masks, write_mask_stack, EstimateError, EstimateParams, FormatError, TracingError, TracingOptions,
};
use lvef_core::synth::{generate_video, SynthConfig};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn lvef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvef")).args(args).output().unwrap()
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../../../docs/report.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

fn assert_valid(report: &serde_json::Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema errors: {errors:?}");
}

fn small_synth() -> (Vec<BinaryMask>, f64) {
    let config = SynthConfig {
        n_beats: 3,
        ..Default::default()
    };
    (generate_video(&config).unwrap().masks, config.fps)
}

#[test]
fn stack_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.lvm");
    let masks = vec![
        BinaryMask::from_fn(4, 4, |x, y| (x + y) % 2 == 0).unwrap(),
        BinaryMask::from_fn(4, 4, |x, _| x == 3).unwrap(),
    ];
    write_mask_stack(&path, &masks, 29.97).unwrap();
    let back = read_mask_stack(&path).unwrap();
    assert_eq!(back.masks, masks);
    assert_eq!(back.fps, 29.97f32);
    assert_eq!(std::fs::read(&path).unwrap(), encode_mask_stack(&back.masks, back.fps).unwrap());
}

#[test]
fn corrupted_fixtures_name_their_error() {
    let read = |n: &str| decode_mask_stack(&std::fs::read(fixture(n)).unwrap());
    assert!(matches!(read("bad_magic.lvm"), Err(FormatError::BadMagic { .. })));
    match read("truncated.lvm") {
        Err(FormatError::TruncatedPayload { expected, actual, offset }) => {
            assert_eq!((expected, actual, offset), (32, 31, 53));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        read("bad_pixel.lvm"),
        Err(FormatError::InvalidPixelValue { offset: 27, value: 2 })
    ));
}

#[test]
fn hexagon_tracing_matches_point_in_polygon() {
    let csv = "video_id,frame,x1,y1,x2,y2\n\
               h,7,8.5,4.2,17.5,4.2\n\
               h,7,3.1,11.0,22.6,11.0\n\
               h,7,9.0,18.7,16.0,18.7\n";
    let rows = parse_tracings(csv.as_bytes()).unwrap();
    let masks = tracings_to_masks(&rows, 26, 24, &TracingOptions::default()).unwrap();
    let m = &masks[&("h".to_string(), 7)];
    let segs: Vec<_> = rows.iter().map(|r| r.segment).collect();
    let poly = to_pts(&tracing_polygon(&segs).unwrap());
    assert_eq!(poly.len(), 6);
    for y in 0..24 {
        for x in 0..26 {
            assert_eq!(m.get(x, y), point_in_polygon_inclusive((x as f64, y as f64), &poly), "({x}, {y})");
        }
    }
    assert_eq!(dice(m, m).unwrap(), 1.0);
}

#[test]
fn two_segment_group_is_malformed() {
    let rows = parse_tracings("video_id,frame,x1,y1,x2,y2\nv,1,0,0,5,0\nv,1,0,5,5,5\n".as_bytes()).unwrap();
    assert!(matches!(
        tracings_to_masks(&rows, 8, 8, &TracingOptions::default()),
        Err(TracingError::MalformedGroup { .. })
    ));
}

#[test]
fn report_validates_and_ignores_worker_count() {
    let (masks, fps) = small_synth();
    let mut p = EstimateParams {
        workers: Some(1),
        ..Default::default()
    };
    let one = run_estimate("v", &masks, Some(fps), &p).unwrap();
    p.workers = Some(4);
    let four = run_estimate("v", &masks, Some(fps), &p).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    assert_valid(&serde_json::to_value(&one).unwrap());
    assert_eq!(one.params.median_window, 5);
    assert_eq!(one.params.min_separation, 12);
    assert!(one.ef_mean.is_some() && !one.cycles.is_empty());
}

#[test]
fn partial_report_validates() {
    let (masks, fps) = small_synth();
    let Err(EstimateError::NoCycles { report }) = run_estimate("v", &masks[..1], Some(fps), &EstimateParams::default())
    else {
        panic!("single frame should have no cycles");
    };
    assert_valid(&serde_json::to_value(&report).unwrap());
    let mut empty = masks[0].clone();
    for y in 0..empty.height() {
        for x in 0..empty.width() {
            empty.set(x, y, false);
        }
    }
    let Err(EstimateError::NoCycles { report }) = run_estimate("e", &[empty.clone(), empty], None, &EstimateParams::default())
    else {
        panic!("empty frames should have no cycles");
    };
    assert!(report.frames.iter().all(|f| f.error.is_some()));
    assert_valid(&serde_json::to_value(&report).unwrap());
}

#[test]
fn cli_exit_codes() {
    let out = lvef(&["classify", "--ef", "0.45"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "mrEF");
    assert_eq!(lvef(&["classify", "--ef", "-0.1"]).status.code(), Some(1));

    let out = lvef(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(lvef(&["estimate"]).status.code(), Some(1));
    assert_eq!(lvef(&["estimate", "/nonexistent/x.lvm"]).status.code(), Some(1));

    for (name, needle) in [
        ("bad_magic.lvm", "bad magic"),
        ("truncated.lvm", "truncated payload"),
        ("bad_pixel.lvm", "invalid pixel value"),
    ] {
        let out = lvef(&["estimate", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(needle), "{name}");
    }
}

#[test]
fn cli_synth_estimate_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    std::fs::write(d("cfg.json"), r#"{"n_beats": 3, "target_ef": 0.45}"#).unwrap();
    let out = lvef(&["synth", "--config", &d("cfg.json"), "--out", &d("s.lvm"), "--truth", &d("t.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let truth: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d("t.json")).unwrap()).unwrap();
    assert_eq!(truth["truth_ef"], 0.45);
    assert_eq!(truth["truth_volumes"].as_array().unwrap().len(), 120);

    let out = lvef(&["--json", "estimate", &d("s.lvm"), "--out", &d("r.json"), "--volumes-csv", &d("v.csv")]);
    assert_eq!(out.status.code(), Some(0));
    let stdout: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&stdout);
    assert_eq!(std::fs::read(d("r.json")).unwrap(), out.stdout);
    let ef = stdout["ef_mean"].as_f64().unwrap();
    assert!((ef - 0.45).abs() <= 0.05, "{ef}");
    assert_eq!(stdout["ef_class"], "mrEF");
    let csv = std::fs::read_to_string(d("v.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("frame,raw_volume,volume,filtered_volume"));
    assert_eq!(csv.lines().count(), 121);

    let out = lvef(&["synth", "--config", &d("missing.json"), "--out", &d("x.lvm")]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(d("big.json"), r#"{"base_semi_axis_a": 90}"#).unwrap();
    assert_eq!(lvef(&["synth", "--config", &d("big.json"), "--out", &d("x.lvm")]).status.code(), Some(1));
}

#[test]
fn cli_estimate_without_cycles_exits_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let stack = dir.path().join("flat.lvm");
    let m = BinaryMask::from_fn(40, 40, |x, y| (10..30).contains(&x) && (5..35).contains(&y) && x + y < 55).unwrap();
    write_mask_stack(&stack, &vec![m; 30], 50.0).unwrap();
    let report = dir.path().join("r.json");
    let out = lvef(&["estimate", stack.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(v["ef_mean"].is_null());
    assert_valid(&v);
}

#[test]
fn cli_evaluate_reports_percentage_points() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.csv");
    let truth = dir.path().join("truth.csv");
    std::fs::write(&pred, "video_id,ef_pred\na,0.50\nb,0.60\nc,0.35\n").unwrap();
    std::fs::write(&truth, "video_id,ef_true\nc,0.30\na,0.55\nb,0.58\n").unwrap();
    let out = lvef(&["--json", "evaluate", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert!((v["mae"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let rmse = ((25.0 + 4.0 + 25.0) / 3.0f64).sqrt();
    assert!((v["rmse"].as_f64().unwrap() - rmse).abs() < 1e-9);

    std::fs::write(&pred, "video_id,ef_pred\nzzz,0.5\n").unwrap();
    let out = lvef(&["evaluate", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_augment_writes_stacks_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.lvm");
    let m = BinaryMask::from_fn(64, 64, |x, y| {
        let dx = (x as f64 - 32.0) / 14.0;
        let dy = (50.0 - y as f64) / 26.0;
        dy >= 0.0 && dx * dx + dy * dy <= 1.0
    })
    .unwrap();
    write_mask_stack(&input, &[m.clone(), BinaryMask::new(64, 64).unwrap()], 50.0).unwrap();
    let out_dir = dir.path().join("aug");
    let out = lvef(&["augment", input.to_str().unwrap(), "--seed", "3", "--count", "2", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a0 = read_mask_stack(out_dir.join("aug_0.lvm")).unwrap();
    let a1 = read_mask_stack(out_dir.join("aug_1.lvm")).unwrap();
    assert_eq!(a0.masks.len(), 2);
    assert_ne!(a0.masks[0], m);
    assert_ne!(a0.masks[0], a1.masks[0]);
    assert!(a0.masks[1].is_empty());
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 2);
    assert!(manifest["files"][0]["frames"][1]["attempt"].is_null());
    let centre = Point2D::new(32.0, 37.0);
    assert!(a0.masks[0].centroid().unwrap().distance(centre) < 15.0);
}
