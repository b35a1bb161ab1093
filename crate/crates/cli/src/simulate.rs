use std::fs;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use semgrid::grid::io::{encode_map, MapMetadata};
use semgrid::grid::{OccupancyGrid, DEFAULT_STRIDE};
use semgrid::render::{encode_gray, encode_indexed, CORRIDOR_COLOR, DOOR_COLOR, ROOM_COLOR, WALL_COLOR};
use semgrid::simulator::{
    apply_noise, extract_training_samples, generate_floorplan, FloorplanSpec, GroundTruth,
    NoiseKind, NoiseSpec, PatchLabel,
};
use semgrid::PATCH_SIZE;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{json_bytes, OutputDir};
use crate::{parse_noise_kind, MANIFEST_VERSION, TOOL};

/// Palette indexed by cell class: exterior, wall, room, corridor, door.
const CLASS_PALETTE: [[u8; 3]; 5] = [[205, 205, 205], WALL_COLOR, ROOM_COLOR, CORRIDOR_COLOR, DOOR_COLOR];

// xor masks separating the noise and patch sampling streams from the layout
const NOISE_STREAM: u64 = 0x6e6f_6973_6500;
const SAMPLE_STREAM: u64 = 0x7061_7463_6800;

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Seed of the first map; map i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_parser = parse_noise_kind, default_value = "combined")]
    pub noise_kind: NoiseKind,
    #[arg(long, default_value_t = 0)]
    pub noise_level: u8,
    /// Floorplan spec as JSON or YAML; missing keys keep their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Window stride for the patch archives.
    #[arg(long, default_value_t = DEFAULT_STRIDE)]
    pub stride: usize,
    /// Skip the patch archives.
    #[arg(long)]
    pub no_patches: bool,
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

impl SimulateArgs {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        SimulateArgs {
            seed: 0,
            count: 1,
            noise_kind: NoiseKind::Combined,
            noise_level: 0,
            spec: None,
            stride: DEFAULT_STRIDE,
            no_patches: false,
            jobs: 0,
            out: out.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Map,
    MapImage,
    CleanMap,
    CleanMapImage,
    GroundTruth,
    ClassMap,
    PatchLabels,
    Patch,
    PatchMask,
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub kind: ArtifactKind,
    pub map: usize,
    pub seed: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapEntry {
    pub index: usize,
    pub seed: u64,
    pub noise_seed: u64,
    pub sample_seed: u64,
    pub width: usize,
    pub height: usize,
    pub rooms: usize,
    pub doors: usize,
    pub door_patches: usize,
    pub background_patches: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSettings {
    pub seed: u64,
    pub count: usize,
    pub noise: NoiseSpec,
    pub stride: usize,
    pub patches: bool,
    pub spec: FloorplanSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateManifest {
    pub version: u32,
    pub tool: String,
    pub command: &'static str,
    pub settings: SimulateSettings,
    pub maps: Vec<MapEntry>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Serialize)]
struct PatchRecord {
    image: String,
    mask: Option<String>,
    label: PatchLabel,
    origin: [usize; 2],
}

#[derive(Debug, Serialize)]
struct PatchLabels {
    version: u32,
    map: String,
    stride: usize,
    patches: Vec<PatchRecord>,
}

struct Rendered {
    entry: MapEntry,
    files: Vec<(String, ArtifactKind, Vec<u8>)>,
}

fn load_spec(path: Option<&std::path::Path>) -> Result<FloorplanSpec, CliError> {
    let Some(path) = path else {
        return Ok(FloorplanSpec::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path, semgrid::Error::io(path, e)))?;
    // YAML parses JSON documents too
    let spec: FloorplanSpec = serde_yaml::from_str(&text)
        .map_err(|e| CliError::input(path, semgrid::Error::InfeasibleSpec(e.to_string())))?;
    spec.validate().map_err(|e| CliError::input(path, e))?;
    Ok(spec)
}

fn class_map(gt: &GroundTruth) -> Result<Vec<u8>, CliError> {
    let indices: Vec<u8> = gt.classes.iter().map(|c| *c as u8).collect();
    encode_indexed(gt.width, gt.height, &indices, &CLASS_PALETTE).map_err(|e| CliError::encode("class map", e))
}

fn map_files(
    grid: &OccupancyGrid,
    stem: &str,
    kinds: (ArtifactKind, ArtifactKind),
    files: &mut Vec<(String, ArtifactKind, Vec<u8>)>,
) -> Result<(), CliError> {
    let meta = MapMetadata::for_image(format!("{stem}.pgm"), grid);
    let enc = encode_map(grid, &meta, stem).map_err(|e| CliError::encode(stem, e))?;
    files.push((format!("maps/{}", enc.metadata_name), kinds.0, enc.yaml.into_bytes()));
    files.push((format!("maps/{}", enc.image_name), kinds.1, enc.pgm));
    Ok(())
}

fn render_map(args: &SimulateArgs, base: &FloorplanSpec, index: usize) -> Result<Rendered, CliError> {
    let seed = args.seed.wrapping_add(index as u64);
    let (noise_seed, sample_seed) = (seed ^ NOISE_STREAM, seed ^ SAMPLE_STREAM);
    let spec = FloorplanSpec { seed, ..*base };
    let (clean, gt) = generate_floorplan(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let noise = NoiseSpec::new(args.noise_kind, args.noise_level).map_err(|e| CliError::Usage(e.to_string()))?;
    let noisy = apply_noise(&clean, &noise, noise_seed);

    let stem = format!("map_{index:04}");
    let mut files = Vec::new();
    map_files(&noisy, &stem, (ArtifactKind::Map, ArtifactKind::MapImage), &mut files)?;
    map_files(
        &clean,
        &format!("{stem}_clean"),
        (ArtifactKind::CleanMap, ArtifactKind::CleanMapImage),
        &mut files,
    )?;
    files.push((
        format!("ground_truth/{stem}.json"),
        ArtifactKind::GroundTruth,
        json_bytes(&gt.to_document(), "ground truth")?,
    ));
    files.push((format!("ground_truth/{stem}_classes.png"), ArtifactKind::ClassMap, class_map(&gt)?));

    let (mut door_patches, mut background_patches) = (0, 0);
    if !args.no_patches {
        let samples = extract_training_samples(&noisy, &gt, args.stride, sample_seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let meta = MapMetadata::for_image("", &noisy);
        let mut records = Vec::with_capacity(samples.len());
        for (k, s) in samples.iter().enumerate() {
            let image = format!("{k:04}.png");
            let pixels: Vec<u8> = s.patch.data.iter().map(|p| meta.probability_to_pixel(*p)).collect();
            let png = encode_gray(PATCH_SIZE, PATCH_SIZE, &pixels).map_err(|e| CliError::encode(&image, e))?;
            files.push((format!("patches/{stem}/{image}"), ArtifactKind::Patch, png));
            let mask = match &s.mask {
                Some(m) => {
                    let name = format!("{k:04}_mask.png");
                    let bits: Vec<u8> = m.bits().iter().map(|b| if *b { 255 } else { 0 }).collect();
                    let png = encode_gray(PATCH_SIZE, PATCH_SIZE, &bits).map_err(|e| CliError::encode(&name, e))?;
                    files.push((format!("patches/{stem}/{name}"), ArtifactKind::PatchMask, png));
                    Some(name)
                }
                None => None,
            };
            match s.label {
                PatchLabel::Door => door_patches += 1,
                PatchLabel::Background => background_patches += 1,
            }
            records.push(PatchRecord {
                image,
                mask,
                label: s.label,
                origin: [s.patch.origin.row, s.patch.origin.col],
            });
        }
        let labels = PatchLabels {
            version: MANIFEST_VERSION,
            map: stem.clone(),
            stride: args.stride,
            patches: records,
        };
        files.push((
            format!("patches/{stem}/labels.json"),
            ArtifactKind::PatchLabels,
            json_bytes(&labels, "patch labels")?,
        ));
    }

    Ok(Rendered {
        entry: MapEntry {
            index,
            seed,
            noise_seed,
            sample_seed,
            width: gt.width,
            height: gt.height,
            rooms: gt.room_count(),
            doors: gt.doors.len(),
            door_patches,
            background_patches,
        },
        files,
    })
}

/// Generate `count` annotated maps with their patch archives and write
/// them, plus `run_manifest.json`, into `args.out`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateManifest, CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be positive".into()));
    }
    let noise = NoiseSpec::new(args.noise_kind, args.noise_level).map_err(|e| CliError::Usage(e.to_string()))?;
    let base = load_spec(args.spec.as_deref())?;

    let rendered: Vec<Rendered> = (0..args.count)
        .into_par_iter()
        .map(|i| render_map(args, &base, i))
        .collect::<Result<_, _>>()?;

    let mut out = OutputDir::create(&args.out)?;
    let mut maps = Vec::with_capacity(rendered.len());
    let mut artifacts = Vec::new();
    for r in rendered {
        for (rel, kind, bytes) in &r.files {
            let f = out.write(rel, bytes)?;
            artifacts.push(Artifact {
                file: f.file,
                kind: *kind,
                map: r.entry.index,
                seed: r.entry.seed,
                sha256: f.sha256,
            });
        }
        maps.push(r.entry);
    }
    let manifest = SimulateManifest {
        version: MANIFEST_VERSION,
        tool: TOOL.to_string(),
        command: "simulate",
        settings: SimulateSettings {
            seed: args.seed,
            count: args.count,
            noise,
            stride: args.stride,
            patches: !args.no_patches,
            spec: FloorplanSpec { seed: args.seed, ..base },
        },
        maps,
        artifacts,
    };
    out.write("run_manifest.json", &json_bytes(&manifest, "run manifest")?)?;
    Ok(manifest)
}
