//! `lvef` command-line interface.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 processing failure.

use crate::augment::{derive_seed, simulate_previous_mask_with, AugmentParams};
use crate::beats::BeatParams;
use crate::geometry::BinaryMask;
use crate::metrics::{classify_ef, confusion_and_scores, mae, rmse, ClassificationScores, ConfusionMatrix, EfClass};
use crate::pipeline::{
    read_mask_stack, run_estimate, write_mask_stack, write_volumes_csv, EstimateError, EstimateParams, EstimateReport,
};
use crate::synth::{generate_video, SynthConfig};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "lvef", version, about = "Ejection fraction from left-ventricle mask videos")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate EF from one or more LVM1 mask stacks.
    Estimate {
        #[arg(required = true)]
        stacks: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        median_window: usize,
        #[arg(long, default_value_t = 0.05)]
        min_prominence_frac: f64,
        /// Frames between extrema of one kind [default: max(5, fps/4)].
        #[arg(long)]
        min_separation: Option<usize>,
        /// Report path; single stack only.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for one `<video_id>.json` report per stack.
        #[arg(long)]
        report_dir: Option<PathBuf>,
        /// Per-frame volumes CSV; single stack only.
        #[arg(long)]
        volumes_csv: Option<PathBuf>,
        /// Appends `video_id,ef_pred` rows for every estimated stack.
        #[arg(long)]
        ef_csv: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// MAE, RMSE and class scores of predicted against true EF.
    Evaluate {
        /// CSV with `video_id,ef_pred[,ef_true]`.
        #[arg(long)]
        pred: PathBuf,
        /// CSV with `video_id,ef_true`; defaults to the `ef_true` column of --pred.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Range class of one EF value (fraction in [0, 1]).
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        ef: f64,
    },
    /// Simulated previous-frame masks for every frame of a stack.
    Augment {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Synthetic beating-ventricle stack with analytic truth.
    Synth {
        /// JSON config; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Processing(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Processing(_) => 2,
        }
    }
}

type CliResult = Result<(), CliError>;

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn processing<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Processing(e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    std::fs::write(path, bytes).map_err(|e| processing(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    let result = match cli.command {
        Command::Estimate {
            stacks,
            median_window,
            min_prominence_frac,
            min_separation,
            out,
            report_dir,
            volumes_csv,
            ef_csv,
            workers,
        } => {
            let params = EstimateParams {
                beat: BeatParams {
                    median_window,
                    min_separation,
                    min_prominence_frac,
                },
                workers,
            };
            let outputs = EstimateOutputs {
                out,
                report_dir,
                volumes_csv,
                ef_csv,
            };
            estimate(&stacks, &params, &outputs, json)
        }
        Command::Evaluate { pred, truth } => evaluate(&pred, truth.as_deref(), json),
        Command::Classify { ef } => classify(ef, json),
        Command::Augment {
            input,
            seed,
            count,
            out_dir,
        } => augment(&input, seed, count, &out_dir, json),
        Command::Synth { config, out, truth } => synth(config.as_deref(), &out, truth.as_deref(), json),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::Input(m) | CliError::Processing(m) => m,
            };
            eprintln!("error: {msg}");
            e.code()
        }
    }
}

struct EstimateOutputs {
    out: Option<PathBuf>,
    report_dir: Option<PathBuf>,
    volumes_csv: Option<PathBuf>,
    ef_csv: Option<PathBuf>,
}

fn video_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn estimate(stacks: &[PathBuf], params: &EstimateParams, outputs: &EstimateOutputs, json: bool) -> CliResult {
    if stacks.len() > 1 && (outputs.out.is_some() || outputs.volumes_csv.is_some()) {
        return Err(input("--out and --volumes-csv take a single stack; use --report-dir for several"));
    }
    // Read everything first so a bad file fails before any work is done.
    let loaded = stacks
        .iter()
        .map(|p| read_mask_stack(p).map(|s| (video_id(p), s)).map_err(|e| input(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = &outputs.report_dir {
        std::fs::create_dir_all(dir).map_err(|e| processing(format!("{}: {e}", dir.display())))?;
    }

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (id, stack) in loaded {
        let report = match run_estimate(&id, &stack.masks, Some(f64::from(stack.fps)), params) {
            Ok(r) => r,
            Err(EstimateError::NoCycles { report }) => {
                failures.push(format!("{id}: no complete cardiac cycle"));
                *report
            }
            Err(e @ EstimateError::InvalidParams(_)) => return Err(input(e)),
            Err(e) => {
                failures.push(format!("{id}: {e}"));
                continue;
            }
        };
        let text = to_json(&report);
        if let Some(path) = &outputs.out {
            write_file(path, text.as_bytes())?;
        }
        if let Some(dir) = &outputs.report_dir {
            write_file(&dir.join(format!("{id}.json")), text.as_bytes())?;
        }
        if let Some(path) = &outputs.volumes_csv {
            let file = std::fs::File::create(path).map_err(|e| processing(format!("{}: {e}", path.display())))?;
            write_volumes_csv(&report, file).map_err(processing)?;
        }
        if !json {
            match (report.ef_mean, report.ef_class) {
                (Some(ef), Some(class)) => {
                    println!("{id}: EF {ef:.4} ({}) over {} cycles", class.label(), report.cycles.len())
                }
                _ => println!("{id}: no EF estimate"),
            }
        }
        reports.push(report);
    }
    if json {
        match reports.as_slice() {
            [one] => print!("{}", to_json(one)),
            many => print!("{}", to_json(&many)),
        }
    }
    if let Some(path) = &outputs.ef_csv {
        write_ef_csv(path, &reports)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(processing(failures.join("; ")))
    }
}

fn write_ef_csv(path: &Path, reports: &[EstimateReport]) -> CliResult {
    let mut w = csv::Writer::from_path(path).map_err(processing)?;
    w.write_record(["video_id", "ef_pred"]).map_err(processing)?;
    for r in reports {
        if let Some(ef) = r.ef_mean {
            w.write_record([r.video_id.clone(), format!("{ef:.6}")]).map_err(processing)?;
        }
    }
    w.flush().map_err(processing)
}

#[derive(Debug, Deserialize)]
struct EfRow {
    video_id: String,
    ef_pred: Option<f64>,
    ef_true: Option<f64>,
}

fn read_ef_rows(path: &Path) -> Result<Vec<EfRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .collect::<Result<Vec<EfRow>, _>>()
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct Evaluation {
    n: usize,
    /// Percentage points.
    mae: f64,
    /// Percentage points.
    rmse: f64,
    confusion: ConfusionMatrix,
    scores: ClassificationScores,
}

fn evaluate(pred: &Path, truth: Option<&Path>, json: bool) -> CliResult {
    let pred_rows = read_ef_rows(pred)?;
    let truth_map: BTreeMap<String, f64> = match truth {
        Some(t) => read_ef_rows(t)?
            .into_iter()
            .map(|r| {
                r.ef_true
                    .map(|v| (r.video_id.clone(), v))
                    .ok_or_else(|| input(format!("{}: {} has no ef_true", t.display(), r.video_id)))
            })
            .collect::<Result<_, _>>()?,
        None => pred_rows
            .iter()
            .filter_map(|r| r.ef_true.map(|v| (r.video_id.clone(), v)))
            .collect(),
    };
    let mut p = Vec::new();
    let mut t = Vec::new();
    for r in &pred_rows {
        let ef_pred = r.ef_pred.ok_or_else(|| input(format!("{} has no ef_pred", r.video_id)))?;
        let ef_true = *truth_map
            .get(&r.video_id)
            .ok_or_else(|| input(format!("{} has no true EF", r.video_id)))?;
        p.push(ef_pred);
        t.push(ef_true);
    }
    let unused = truth_map.len().saturating_sub(p.len());
    if unused > 0 {
        log::warn!("{unused} true EF values have no prediction");
    }
    let classes = |v: &[f64]| {
        v.iter()
            .map(|&x| classify_ef(x))
            .collect::<Result<Vec<EfClass>, _>>()
            .map_err(input)
    };
    let (truth_classes, pred_classes) = (classes(&t)?, classes(&p)?);
    let (confusion, scores) = confusion_and_scores(&truth_classes, &pred_classes).map_err(input)?;
    let eval = Evaluation {
        n: p.len(),
        mae: 100.0 * mae(&p, &t).map_err(input)?,
        rmse: 100.0 * rmse(&p, &t).map_err(input)?,
        confusion,
        scores,
    };
    if json {
        print!("{}", to_json(&eval));
    } else {
        println!("n={} MAE={:.2} RMSE={:.2}", eval.n, eval.mae, eval.rmse);
        println!(
            "micro-F1={:.3} macro-F1={:.3} macro-recall={:.3} macro-precision={:.3}",
            eval.scores.micro_f1, eval.scores.macro_f1, eval.scores.macro_recall, eval.scores.macro_precision
        );
    }
    Ok(())
}

fn classify(ef: f64, json: bool) -> CliResult {
    let class = classify_ef(ef).map_err(input)?;
    if json {
        print!("{}", to_json(&serde_json::json!({ "ef": ef, "class": class })));
    } else {
        println!("{}", class.label());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AugmentedFrame {
    frame: usize,
    seed: u64,
    /// Absent for empty input frames, which are copied through.
    attempt: Option<usize>,
    scale: Option<f64>,
    translate_x: Option<f64>,
    translate_y: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AugmentedFile {
    file: String,
    index: usize,
    frames: Vec<AugmentedFrame>,
}

#[derive(Debug, Serialize)]
struct AugmentManifest {
    input: String,
    seed: u64,
    count: usize,
    files: Vec<AugmentedFile>,
}

fn augment(input_path: &Path, seed: u64, count: usize, out_dir: &Path, json: bool) -> CliResult {
    let stack = read_mask_stack(input_path).map_err(|e| input(format!("{}: {e}", input_path.display())))?;
    if stack.masks.is_empty() {
        return Err(input(format!("{}: stack has no frames", input_path.display())));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| processing(format!("{}: {e}", out_dir.display())))?;
    let params = AugmentParams::default();
    let mut files = Vec::with_capacity(count);
    for k in 0..count {
        let mut masks: Vec<BinaryMask> = Vec::with_capacity(stack.masks.len());
        let mut frames = Vec::with_capacity(stack.masks.len());
        for (i, m) in stack.masks.iter().enumerate() {
            let s = derive_seed(seed, i as u64, k as u64);
            if m.is_empty() {
                masks.push(m.clone());
                frames.push(AugmentedFrame {
                    frame: i,
                    seed: s,
                    attempt: None,
                    scale: None,
                    translate_x: None,
                    translate_y: None,
                });
                continue;
            }
            let a = simulate_previous_mask_with(m, s, &params).map_err(|e| processing(format!("frame {i}: {e}")))?;
            frames.push(AugmentedFrame {
                frame: i,
                seed: s,
                attempt: Some(a.attempt),
                scale: Some(a.affine.scale),
                translate_x: Some(a.affine.translate_x),
                translate_y: Some(a.affine.translate_y),
            });
            masks.push(a.mask);
        }
        let name = format!("aug_{k}.lvm");
        write_mask_stack(out_dir.join(&name), &masks, stack.fps).map_err(processing)?;
        files.push(AugmentedFile {
            file: name,
            index: k,
            frames,
        });
    }
    let manifest = AugmentManifest {
        input: input_path.display().to_string(),
        seed,
        count,
        files,
    };
    let text = to_json(&manifest);
    write_file(&out_dir.join("manifest.json"), text.as_bytes())?;
    if json {
        print!("{text}");
    } else {
        println!("wrote {count} augmented stacks to {}", out_dir.display());
    }
    Ok(())
}

fn synth(config: Option<&Path>, out: &Path, truth: Option<&Path>, json: bool) -> CliResult {
    let config: SynthConfig = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", p.display())))?
        }
        None => SynthConfig::default(),
    };
    let video = generate_video(&config).map_err(input)?;
    write_mask_stack(out, &video.masks, config.fps as f32).map_err(processing)?;
    let text = to_json(&video.truth);
    if let Some(path) = truth {
        write_file(path, text.as_bytes())?;
    }
    if json {
        print!("{text}");
    } else {
        println!("wrote {} frames to {} (truth EF {:.3})", video.masks.len(), out.display(), video.truth.truth_ef);
    }
    Ok(())
}
