//! Distance transforms, connected components and binary erosion on small
//! dense bitmaps.

/// Large finite stand-in for "no source in range".
const INF: f64 = 1e20;

/// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance from every cell to the nearest `true`
/// cell of `sources`. Cells with no source anywhere get a huge value.
pub fn squared_edt(sources: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(sources.len(), width * height);
    let mut grid: Vec<f64> = sources.iter().map(|s| if *s { 0.0 } else { INF }).collect();
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for c in 0..width {
        for r in 0..height {
            f[r] = grid[r * width + c];
        }
        dt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for r in 0..height {
            grid[r * width + c] = out[r];
        }
    }
    for r in 0..height {
        f[..width].copy_from_slice(&grid[r * width..(r + 1) * width]);
        dt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        grid[r * width..(r + 1) * width].copy_from_slice(&out[..width]);
    }
    grid
}

/// Distance from each `true` cell to the nearest `false` cell, treating
/// everything outside the bitmap as `false`.
pub fn inside_distance(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    let (pw, ph) = (width + 2, height + 2);
    let mut padded = vec![true; pw * ph];
    for r in 0..height {
        for c in 0..width {
            padded[(r + 1) * pw + c + 1] = !mask[r * width + c];
        }
    }
    let d = squared_edt(&padded, pw, ph);
    let mut out = vec![0.0; width * height];
    for r in 0..height {
        for c in 0..width {
            out[r * width + c] = d[(r + 1) * pw + c + 1].sqrt();
        }
    }
    out
}

/// 4-connected components of `true` cells. Labels start at 1 and follow
/// first-encounter row-major order; 0 marks background. Returns the label
/// image and the component count.
pub fn label_components4(mask: &[bool], width: usize, height: usize) -> (Vec<u32>, u32) {
    label_components(mask, width, height, false)
}

/// As [`label_components4`], with diagonal neighbours connected.
pub fn label_components8(mask: &[bool], width: usize, height: usize) -> (Vec<u32>, u32) {
    label_components(mask, width, height, true)
}

fn label_components(mask: &[bool], width: usize, height: usize, diagonal: bool) -> (Vec<u32>, u32) {
    let mut labels = vec![0u32; width * height];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..width * height {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (r, c) = ((i / width) as i64, (i % width) as i64);
            for (dr, dc) in NEIGHBORS8 {
                if !diagonal && dr != 0 && dc != 0 {
                    continue;
                }
                let (rr, cc) = (r + dr, c + dc);
                if rr < 0 || cc < 0 || rr >= height as i64 || cc >= width as i64 {
                    continue;
                }
                let j = rr as usize * width + cc as usize;
                if mask[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    (labels, next)
}

pub(crate) const NEIGHBORS8: [(i64, i64); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Erosion with a 2x2 structuring element anchored at the top-left cell:
/// a cell survives iff it and its right, lower and lower-right neighbours
/// are all set.
pub fn erode_2x2(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut out = vec![false; width * height];
    for r in 0..height.saturating_sub(1) {
        for c in 0..width.saturating_sub(1) {
            let i = r * width + c;
            out[i] = mask[i] && mask[i + 1] && mask[i + width] && mask[i + width + 1];
        }
    }
    out
}

/// Dilation by the 3x3 square (Chebyshev radius 1).
pub fn dilate_3x3(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for r in 0..height {
        for c in 0..width {
            if !mask[r * width + c] {
                continue;
            }
            for rr in r.saturating_sub(1)..=(r + 1).min(height - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(width - 1) {
                    out[rr * width + cc] = true;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_edt(src: &[bool], w: usize, h: usize) -> Vec<f64> {
        let pts: Vec<(i64, i64)> = (0..w * h)
            .filter(|i| src[*i])
            .map(|i| ((i / w) as i64, (i % w) as i64))
            .collect();
        (0..w * h)
            .map(|i| {
                let (r, c) = ((i / w) as i64, (i % w) as i64);
                pts.iter()
                    .map(|(pr, pc)| ((pr - r).pow(2) + (pc - c).pow(2)) as f64)
                    .fold(INF, f64::min)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn edt_matches_brute_force(w in 1usize..20, h in 1usize..20, seed in proptest::collection::vec(any::<bool>(), 400)) {
            let src: Vec<bool> = seed[..w * h].to_vec();
            let fast = squared_edt(&src, w, h);
            let slow = brute_edt(&src, w, h);
            if src.iter().any(|s| *s) {
                prop_assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn components_and_erosion() {
        #[rustfmt::skip]
        let m = [
            true, true, false, true,
            true, true, false, true,
            false, false, false, true,
        ];
        let (labels, n) = label_components4(&m, 4, 3);
        assert_eq!(n, 2);
        assert_eq!(labels[0], 1);
        assert_eq!(labels[3], 2);
        let e = erode_2x2(&m, 4, 3);
        assert_eq!(e.iter().filter(|b| **b).count(), 1);
        assert!(e[0]);
    }

    #[test]
    fn inside_distance_of_bar() {
        let m = vec![true; 5];
        let d = inside_distance(&m, 5, 1);
        assert!(d.iter().all(|v| (*v - 1.0).abs() < 1e-12));
    }
}
