use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use semgrid::cluster::{export_hypotheses, import_hypotheses, HypothesisDocument, DEFAULT_IOU_THRESHOLD};
use semgrid::detector::{
    Backend, BaselineParams, DetectionDocument, OracleDetector, OracleDoor, DEFAULT_CONFIDENCE,
};
use semgrid::grid::io::load_map;
use semgrid::grid::{normalize_resolution, DEFAULT_STRIDE};
use semgrid::pipeline::{self, PipelineConfig, PipelineRun, Stage, StageError};
use semgrid::render::{heatmap, label_image};
use semgrid::simulator::{apply_noise, GroundTruthDocument, NoiseKind, NoiseSpec};
use semgrid::topometric::{export, ExportFormat};
use serde::Serialize;

use crate::error::{CliError, EXIT_NO_DOORS, EXIT_OK};
use crate::output::{json_bytes, sha256_hex, OutputDir, OutputFile};
use crate::{parse_noise_kind, MANIFEST_VERSION, TOOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    /// Geometric gap detector, no model needed.
    Baseline,
    /// Read per-window detections from --detections.
    Ingest,
    /// Exact doors from a simulator ground truth (--ground-truth).
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Map metadata file; the image path inside is relative to it.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Baseline)]
    pub backend: BackendArg,
    /// Detections document for the ingest backend.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Ground truth document for the oracle backend.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Resume from a hypotheses checkpoint, skipping detection.
    #[arg(long)]
    pub hypotheses: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,
    #[arg(long, default_value_t = DEFAULT_STRIDE)]
    pub stride: usize,
    /// Noise applied to the input map before the run.
    #[arg(long, value_parser = parse_noise_kind, default_value = "combined")]
    pub noise_kind: NoiseKind,
    /// 0 leaves the input untouched.
    #[arg(long, default_value_t = 0)]
    pub noise_level: u8,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

impl PipelineArgs {
    pub fn new(map: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineArgs {
            map: map.into(),
            backend: BackendArg::Baseline,
            detections: None,
            ground_truth: None,
            hypotheses: None,
            confidence: DEFAULT_CONFIDENCE,
            iou: DEFAULT_IOU_THRESHOLD,
            stride: DEFAULT_STRIDE,
            noise_kind: NoiseKind::Combined,
            noise_level: 0,
            seed: 0,
            jobs: 0,
            out: out.into(),
        }
    }
}

/// Flags that shape the result. Paths are reduced to file names and the
/// thread count is left out so the manifest only changes with the result.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineSettings {
    pub backend: BackendArg,
    pub resumed: bool,
    pub noise_kind: NoiseKind,
    pub noise_level: u8,
    pub seed: u64,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub role: &'static str,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub width: usize,
    pub height: usize,
    pub windows: usize,
    pub kept: usize,
    pub clusters: usize,
    pub hypotheses: usize,
    pub k0: u32,
    pub k_final: u32,
    pub valid: usize,
    pub rejected: usize,
    pub ambiguous: usize,
    pub entities: usize,
    pub edges: usize,
    pub corridor: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineManifest {
    pub version: u32,
    pub tool: String,
    pub command: &'static str,
    pub settings: PipelineSettings,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<OutputFile>,
    pub summary: RunSummary,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub run: PipelineRun,
    pub manifest: PipelineManifest,
    pub exit_code: u8,
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn read_input(path: &Path, role: &'static str, inputs: &mut Vec<InputFile>) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(path, semgrid::Error::io(path, e)))?;
    inputs.push(InputFile {
        role,
        file: file_name(path),
        sha256: sha256_hex(&bytes),
    });
    Ok(bytes)
}

fn read_text(path: &Path, role: &'static str, inputs: &mut Vec<InputFile>) -> Result<String, CliError> {
    let bytes = read_input(path, role, inputs)?;
    String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{} is not UTF-8 text", path.display())))
}

/// The detector backend, plus the grid size a ground truth was made for.
fn backend(
    args: &PipelineArgs,
    inputs: &mut Vec<InputFile>,
) -> Result<(Backend, Option<(usize, usize)>), CliError> {
    match args.backend {
        BackendArg::Baseline => Ok((Backend::Baseline(BaselineParams::default()), None)),
        BackendArg::Ingest => {
            let path = args
                .detections
                .as_deref()
                .ok_or_else(|| CliError::Usage("--backend ingest needs --detections".into()))?;
            let text = read_text(path, "detections", inputs)?;
            let doc = DetectionDocument::from_json(&text).map_err(|e| CliError::input(path, e))?;
            Ok((Backend::Ingest(doc), None))
        }
        BackendArg::Oracle => {
            let path = args
                .ground_truth
                .as_deref()
                .ok_or_else(|| CliError::Usage("--backend oracle needs --ground-truth".into()))?;
            let text = read_text(path, "ground_truth", inputs)?;
            let doc: GroundTruthDocument =
                serde_json::from_str(&text).map_err(|e| CliError::input(path, e.into()))?;
            let doors = doc.doors_with_cells().map_err(|e| CliError::input(path, e))?;
            let oracle = OracleDetector::new(
                doors
                    .into_iter()
                    .map(|d| OracleDoor {
                        mbr: d.mbr,
                        cells: d.cells,
                    })
                    .collect(),
            );
            Ok((Backend::Oracle(oracle), Some((doc.width, doc.height))))
        }
    }
}

fn check_size(what: &str, doc: (usize, usize), grid: (usize, usize)) -> Result<(), CliError> {
    if doc != grid {
        return Err(CliError::Usage(format!(
            "{what} is for a {}x{} grid but the map is {}x{} at working resolution",
            doc.0, doc.1, grid.0, grid.1
        )));
    }
    Ok(())
}

/// Run the pipeline on one map and write every artifact into `args.out`.
/// A run in which no door survives still writes its outputs and reports
/// [`EXIT_NO_DOORS`].
pub fn cmd_pipeline(args: &PipelineArgs) -> Result<PipelineOutcome, CliError> {
    let mut inputs = Vec::new();
    read_input(&args.map, "map", &mut inputs)?;
    let loaded = load_map(&args.map).map_err(|e| CliError::input(&args.map, e))?;
    read_input(&loaded.image_path, "image", &mut inputs)?;

    let noise = NoiseSpec::new(args.noise_kind, args.noise_level)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = if args.noise_level > 0 {
        apply_noise(&loaded.grid, &noise, args.seed)
    } else {
        loaded.grid
    };

    let cfg = PipelineConfig {
        confidence: args.confidence,
        iou: args.iou,
        stride: args.stride,
        ..PipelineConfig::default()
    };

    let normalized = normalize_resolution(&grid).map_err(|source| StageError {
        stage: Stage::Normalize,
        source,
    })?;
    let (w, h) = (normalized.width(), normalized.height());
    let mut windows = 0;
    let run = match args.hypotheses.as_deref() {
        Some(path) => {
            let text = read_text(path, "hypotheses", &mut inputs)?;
            let doc: HypothesisDocument =
                serde_json::from_str(&text).map_err(|e| CliError::input(path, e.into()))?;
            let hyps = import_hypotheses(&doc).map_err(|e| CliError::input(path, e))?;
            check_size("hypotheses", (doc.width, doc.height), (w, h))?;
            pipeline::run_from_hypotheses(&normalized, &hyps, &cfg)?
        }
        None => {
            let (backend, gt_size) = backend(args, &mut inputs)?;
            if let Some(size) = gt_size {
                check_size("ground truth", size, (w, h))?;
            }
            let run = pipeline::run(&normalized, &backend, &cfg)?;
            windows = run.detections.len();
            run
        }
    };

    let mut map = run.map.clone();
    map.source = Some(file_name(&args.map));

    let mut out = OutputDir::create(&args.out)?;
    if args.hypotheses.is_none() {
        let doc = DetectionDocument::from_boxes(&run.detections, Some(cfg.stride));
        out.write("detections.json", &json_bytes(&doc, "detections")?)?;
    }
    let hyps = export_hypotheses(&run.validation.hypotheses, w, h);
    out.write("hypotheses.json", &json_bytes(&hyps, "hypotheses")?)?;
    out.write("validation.json", &json_bytes(&run.validation.report, "validation report")?)?;
    out.write("scores.json", &json_bytes(&run.scores, "score table")?)?;
    let labels = &run.validation.labels;
    out.write("labels.png", &label_image(labels).map_err(|e| CliError::encode("labels.png", e))?)?;
    out.write(
        "heatmap.png",
        &heatmap(labels, &run.scores).map_err(|e| CliError::encode("heatmap.png", e))?,
    )?;
    for (name, format) in [
        ("topometric.dot", ExportFormat::Dot),
        ("topometric.json", ExportFormat::Json),
        ("topometric.png", ExportFormat::Png),
    ] {
        let bytes = export(&map, format).map_err(|e| CliError::encode(name, e))?;
        out.write(name, &bytes)?;
    }

    let report = &run.validation.report;
    let manifest = PipelineManifest {
        version: MANIFEST_VERSION,
        tool: TOOL.to_string(),
        command: "pipeline",
        settings: PipelineSettings {
            backend: args.backend,
            resumed: args.hypotheses.is_some(),
            noise_kind: args.noise_kind,
            noise_level: args.noise_level,
            seed: args.seed,
            config: cfg,
        },
        inputs,
        outputs: out.written().to_vec(),
        summary: RunSummary {
            width: w,
            height: h,
            windows,
            kept: run.kept,
            clusters: run.clusters,
            hypotheses: run.validation.hypotheses.len(),
            k0: report.k0,
            k_final: report.k_final,
            valid: report.valid,
            rejected: report.rejected,
            ambiguous: report.ambiguous,
            entities: map.entities.len(),
            edges: map.edges.len(),
            corridor: run.scores.best(),
        },
    };
    out.write("run_manifest.json", &json_bytes(&manifest, "run manifest")?)?;

    let exit_code = if run.doors_found() { EXIT_OK } else { EXIT_NO_DOORS };
    Ok(PipelineOutcome {
        run,
        manifest,
        exit_code,
    })
}
