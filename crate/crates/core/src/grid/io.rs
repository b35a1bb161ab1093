//! Map files: an 8-bit binary PGM ("P5") image plus a YAML metadata file
//! with `image`, `resolution`, `origin`, `negate`, `occupied_thresh` and
//! `free_thresh` keys, as used by common robotics map servers.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageReader};
use serde::{Deserialize, Serialize};

use super::{OccupancyGrid, DEFAULT_FREE_THRESH, DEFAULT_OCCUPIED_THRESH, DEFAULT_UNKNOWN_PIXEL};
use crate::error::{Error, Result};

/// Contents of the map metadata file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    /// Image path, relative to the metadata file unless absolute.
    pub image: String,
    pub resolution: f64,
    /// `[x, y]` or `[x, y, yaw]` of the lower-left pixel, meters.
    pub origin: Vec<f64>,
    #[serde(default, deserialize_with = "de_flag", serialize_with = "ser_flag")]
    pub negate: bool,
    #[serde(default = "default_occ")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free")]
    pub free_thresh: f64,
    /// Pixel value marking never-observed cells.
    #[serde(default = "default_unknown")]
    pub unknown_value: u8,
}

fn default_occ() -> f64 {
    DEFAULT_OCCUPIED_THRESH
}
fn default_free() -> f64 {
    DEFAULT_FREE_THRESH
}
fn default_unknown() -> u8 {
    DEFAULT_UNKNOWN_PIXEL
}

fn de_flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(i64),
    }
    Ok(match Flag::deserialize(d)? {
        Flag::Bool(b) => b,
        Flag::Int(i) => i != 0,
    })
}

fn ser_flag<S: serde::Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_i64(i64::from(*v))
}

impl MapMetadata {
    pub fn for_image(image: impl Into<String>, grid: &OccupancyGrid) -> Self {
        MapMetadata {
            image: image.into(),
            resolution: grid.resolution(),
            origin: vec![grid.origin()[0], grid.origin()[1], 0.0],
            negate: false,
            occupied_thresh: DEFAULT_OCCUPIED_THRESH,
            free_thresh: DEFAULT_FREE_THRESH,
            unknown_value: DEFAULT_UNKNOWN_PIXEL,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.resolution <= 0.0 || !self.resolution.is_finite() {
            return Err(Error::Metadata(format!(
                "resolution must be > 0, got {}",
                self.resolution
            )));
        }
        if !(2..=3).contains(&self.origin.len()) {
            return Err(Error::Metadata(format!(
                "origin needs 2 or 3 values, got {}",
                self.origin.len()
            )));
        }
        let ok = (0.0..=1.0).contains(&self.free_thresh)
            && (0.0..=1.0).contains(&self.occupied_thresh)
            && self.free_thresh < self.occupied_thresh;
        if !ok {
            return Err(Error::Thresholds {
                free: self.free_thresh,
                occupied: self.occupied_thresh,
            });
        }
        Ok(())
    }

    pub fn pixel_to_probability(&self, v: u8) -> f64 {
        if self.negate {
            v as f64 / 255.0
        } else {
            (255 - v) as f64 / 255.0
        }
    }

    pub fn probability_to_pixel(&self, p: f64) -> u8 {
        let scaled = (p.clamp(0.0, 1.0) * 255.0).round() as u8;
        if self.negate {
            scaled
        } else {
            255 - scaled
        }
    }
}

/// A loaded map together with the metadata it came from.
#[derive(Debug, Clone)]
pub struct LoadedMap {
    pub grid: OccupancyGrid,
    pub metadata: MapMetadata,
    pub image_path: PathBuf,
}

pub fn read_metadata(path: &Path) -> Result<MapMetadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let meta: MapMetadata =
        serde_yaml::from_str(&text).map_err(|e| Error::Metadata(e.to_string()))?;
    meta.validate()?;
    Ok(meta)
}

/// Decode an 8-bit grayscale image into (width, height, pixels).
pub fn read_gray8(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image {
            path: path.into(),
            message: e.to_string(),
        })?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Ok((w as usize, h as usize, buf.into_raw()))
        }
        other => Err(Error::Image {
            path: path.into(),
            message: format!("expected 8-bit grayscale, got {:?}", other.color()),
        }),
    }
}

/// Load a map from its metadata file.
pub fn load_map(path: &Path) -> Result<LoadedMap> {
    let metadata = read_metadata(path)?;
    let image_path = resolve_image(path, &metadata.image);
    let (width, height, pixels) = read_gray8(&image_path)?;
    let mut cells = Vec::with_capacity(pixels.len());
    let mut unknown = Vec::with_capacity(pixels.len());
    for v in pixels {
        let p = metadata.pixel_to_probability(v);
        cells.push(p);
        unknown.push(
            v == metadata.unknown_value && p > metadata.free_thresh && p < metadata.occupied_thresh,
        );
    }
    let grid = OccupancyGrid::new(
        width,
        height,
        metadata.resolution,
        [metadata.origin[0], metadata.origin[1]],
        cells,
        unknown,
    )?;
    Ok(LoadedMap {
        grid,
        metadata,
        image_path,
    })
}

fn resolve_image(meta_path: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        meta_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Encode grid pixels with the metadata's pixel convention; unknown cells
/// get the declared unknown value.
pub fn grid_to_pixels(grid: &OccupancyGrid, meta: &MapMetadata) -> Vec<u8> {
    grid.cells()
        .iter()
        .zip(grid.unknown())
        .map(|(p, u)| {
            if *u {
                meta.unknown_value
            } else {
                meta.probability_to_pixel(*p)
            }
        })
        .collect()
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(pixels, width as u32, height as u32, ExtendedColorType::L8)
        .map_err(|e| Error::Image {
            path: PathBuf::from("<pgm>"),
            message: e.to_string(),
        })?;
    Ok(out)
}

/// A map encoded as `<stem>.pgm` and `<stem>.yaml` contents.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMap {
    pub image_name: String,
    pub metadata_name: String,
    pub pgm: Vec<u8>,
    pub yaml: String,
}

pub fn encode_map(grid: &OccupancyGrid, meta: &MapMetadata, stem: &str) -> Result<EncodedMap> {
    let image_name = format!("{stem}.pgm");
    let meta = MapMetadata {
        image: image_name.clone(),
        resolution: grid.resolution(),
        ..meta.clone()
    };
    let pgm = encode_pgm(grid.width(), grid.height(), &grid_to_pixels(grid, &meta))?;
    let yaml = serde_yaml::to_string(&meta).map_err(|e| Error::Metadata(e.to_string()))?;
    Ok(EncodedMap {
        image_name,
        metadata_name: format!("{stem}.yaml"),
        pgm,
        yaml,
    })
}

/// Write `<stem>.pgm` and `<stem>.yaml` into `dir`; returns the metadata path.
pub fn save_map(
    grid: &OccupancyGrid,
    meta: &MapMetadata,
    dir: &Path,
    stem: &str,
) -> Result<PathBuf> {
    let enc = encode_map(grid, meta, stem)?;
    let image_path = dir.join(&enc.image_name);
    fs::write(&image_path, &enc.pgm).map_err(|e| Error::io(&image_path, e))?;
    let meta_path = dir.join(&enc.metadata_name);
    fs::write(&meta_path, &enc.yaml).map_err(|e| Error::io(&meta_path, e))?;
    Ok(meta_path)
}
