//! PNG rendering of label maps, class maps and score heatmaps.

use crate::error::{Error, Result};
use crate::place::ScoreTable;
use crate::segmentation::SegmentLabelMap;

pub const WALL_COLOR: [u8; 3] = [40, 40, 40];
pub const ROOM_COLOR: [u8; 3] = [120, 170, 230];
pub const CORRIDOR_COLOR: [u8; 3] = [250, 200, 60];
pub const DOOR_COLOR: [u8; 3] = [220, 40, 40];

fn encoder<'a>(
    out: &'a mut Vec<u8>,
    width: usize,
    height: usize,
    color: png::ColorType,
) -> Result<png::Encoder<'a, &'a mut Vec<u8>>> {
    if width == 0 || height == 0 {
        return Err(Error::Encode(format!("cannot encode a {width}x{height} image")));
    }
    let w = u32::try_from(width).map_err(|_| Error::Encode("image too wide".into()))?;
    let h = u32::try_from(height).map_err(|_| Error::Encode("image too tall".into()))?;
    let mut enc = png::Encoder::new(out, w, h);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    Ok(enc)
}

fn finish(enc: png::Encoder<'_, &mut Vec<u8>>, data: &[u8]) -> Result<()> {
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::Encode(e.to_string()))?;
    writer
        .write_image_data(data)
        .map_err(|e| Error::Encode(e.to_string()))?;
    writer.finish().map_err(|e| Error::Encode(e.to_string()))
}

/// 8-bit paletted PNG.
pub fn encode_indexed(width: usize, height: usize, indices: &[u8], palette: &[[u8; 3]]) -> Result<Vec<u8>> {
    if indices.len() != width * height {
        return Err(Error::Encode("index buffer size mismatch".into()));
    }
    if palette.is_empty() || palette.len() > 256 {
        return Err(Error::Encode(format!("palette of {} entries", palette.len())));
    }
    if let Some(i) = indices.iter().find(|i| **i as usize >= palette.len()) {
        return Err(Error::Encode(format!("index {i} outside palette")));
    }
    let mut out = Vec::new();
    let mut enc = encoder(&mut out, width, height, png::ColorType::Indexed)?;
    enc.set_palette(palette.concat());
    finish(enc, indices)?;
    Ok(out)
}

pub fn encode_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    if rgb.len() != 3 * width * height {
        return Err(Error::Encode("rgb buffer size mismatch".into()));
    }
    let mut out = Vec::new();
    let enc = encoder(&mut out, width, height, png::ColorType::Rgb)?;
    finish(enc, rgb)?;
    Ok(out)
}

pub fn encode_gray(width: usize, height: usize, gray: &[u8]) -> Result<Vec<u8>> {
    if gray.len() != width * height {
        return Err(Error::Encode("gray buffer size mismatch".into()));
    }
    let mut out = Vec::new();
    let enc = encoder(&mut out, width, height, png::ColorType::Grayscale)?;
    finish(enc, gray)?;
    Ok(out)
}

/// Distinct-ish color for instance `i`, stepping hue by the golden angle.
pub fn instance_color(i: u32) -> [u8; 3] {
    let h = (i as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let (s, v) = (0.55, 0.92);
    let f = h.fract();
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match h as u32 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8]
}

/// Instance palette: index 0 is non-free space, segment ids wrap over
/// the remaining 255 entries.
pub fn label_image(labels: &SegmentLabelMap) -> Result<Vec<u8>> {
    let mut palette = vec![WALL_COLOR];
    palette.extend((1..256).map(instance_color));
    let indices: Vec<u8> = labels
        .labels()
        .iter()
        .map(|l| if *l == 0 { 0 } else { ((*l - 1) % 255 + 1) as u8 })
        .collect();
    encode_indexed(labels.width(), labels.height(), &indices, &palette)
}

/// Blue to red through cyan, green and yellow.
pub fn heat_color(t: f64) -> [u8; 3] {
    let stops: [[f64; 3]; 5] = [
        [30.0, 60.0, 200.0],
        [40.0, 190.0, 220.0],
        [90.0, 200.0, 90.0],
        [250.0, 210.0, 50.0],
        [220.0, 40.0, 40.0],
    ];
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let mut out = [0u8; 3];
    for k in 0..3 {
        out[k] = (stops[i][k] + (stops[i + 1][k] - stops[i][k]) * f).round() as u8;
    }
    out
}

/// Corridor confidence `p_comb` per segment as an RGB image.
pub fn heatmap(labels: &SegmentLabelMap, scores: &ScoreTable) -> Result<Vec<u8>> {
    let mut colors = vec![WALL_COLOR; labels.count() as usize + 1];
    for s in &scores.scores {
        if let Some(slot) = colors.get_mut(s.segment as usize) {
            *slot = heat_color(s.p_comb);
        }
    }
    let rgb: Vec<u8> = labels
        .labels()
        .iter()
        .flat_map(|l| colors[*l as usize])
        .collect();
    encode_rgb(labels.width(), labels.height(), &rgb)
}
