//! Canny edge detection on the depth channel of a frame buffer.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::pri::Gfb;

const GAUSS_SIGMA: f64 = 1.0;
const GAUSS_RADIUS: usize = 3;

/// Default hysteresis thresholds `(low, high)` in metres of depth change
/// per pixel: `high = 3·pitch`, `low = high/2`.
pub fn default_thresholds(pitch: f64) -> (f64, f64) {
    let high = 3.0 * pitch;
    (0.5 * high, high)
}

/// Copy of `g` with the mask cleared on Canny edges of the depth channel and
/// their 1-pixel neighbourhood. Non-hit pixels take a far background depth
/// so silhouettes count as edges.
pub fn edge_filter(g: &Gfb, low: f64, high: f64) -> Gfb {
    assert!(low < high, "edge thresholds must satisfy low < high");
    let removed = edge_pixels(g, low, high);
    let mut out = g.clone();
    for (m, r) in out.mask.iter_mut().zip(&removed) {
        if *r {
            *m = 0.0;
        }
    }
    out
}

/// Pixels removed by [`edge_filter`]: edges plus their 3×3 dilation.
pub fn edge_pixels(g: &Gfb, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = (g.frame.width, g.frame.height);
    let far = g
        .depth
        .iter()
        .enumerate()
        .filter(|&(k, d)| g.is_hit(k) && d.is_finite())
        .map(|(_, &d)| d)
        .fold(f64::NEG_INFINITY, f64::max);
    if !far.is_finite() {
        return vec![false; w * h];
    }
    let background = far + 100.0 * g.frame.pitch;
    let depth: Vec<f64> = (0..w * h)
        .map(|k| if g.is_hit(k) && g.depth[k].is_finite() { g.depth[k] } else { background })
        .collect();
    let edges = canny(&depth, w, h, low, high);
    dilate3(&edges, w, h)
}

fn gaussian_kernel() -> Vec<f64> {
    let r = GAUSS_RADIUS as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|x| (-(x * x) as f64 / (2.0 * GAUSS_SIGMA * GAUSS_SIGMA)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

#[inline]
fn clamp_index(x: isize, n: usize) -> usize {
    x.clamp(0, n as isize - 1) as usize
}

/// Separable Gaussian blur with edge replication.
fn blur(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let kernel = gaussian_kernel();
    let r = GAUSS_RADIUS as isize;
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = kernel
                .iter()
                .enumerate()
                .map(|(t, c)| c * src[j * w + clamp_index(i as isize + t as isize - r, w)])
                .sum();
        }
    });
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = kernel
                .iter()
                .enumerate()
                .map(|(t, c)| c * tmp[clamp_index(j as isize + t as isize - r, h) * w + i])
                .sum();
        }
    });
    out
}

/// Sobel gradients scaled to depth change per pixel.
fn sobel(src: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let at = |i: isize, j: isize| src[clamp_index(j, h) * w + clamp_index(i, w)];
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    gx.par_chunks_mut(w).zip(gy.par_chunks_mut(w)).enumerate().for_each(|(j, (rx, ry))| {
        let j = j as isize;
        for i in 0..w {
            let x = i as isize;
            rx[i] = ((at(x + 1, j - 1) + 2.0 * at(x + 1, j) + at(x + 1, j + 1))
                - (at(x - 1, j - 1) + 2.0 * at(x - 1, j) + at(x - 1, j + 1)))
                / 8.0;
            ry[i] = ((at(x - 1, j + 1) + 2.0 * at(x, j + 1) + at(x + 1, j + 1))
                - (at(x - 1, j - 1) + 2.0 * at(x, j - 1) + at(x + 1, j - 1)))
                / 8.0;
        }
    });
    (gx, gy)
}

/// Neighbour offset along the gradient direction quantized to 0°, 45°, 90°
/// or 135°.
fn gradient_step(gx: f64, gy: f64) -> (isize, isize) {
    let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

fn canny(depth: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let smooth = blur(depth, w, h);
    let (gx, gy) = sobel(&smooth, w, h);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let mag_at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= w as isize || j >= h as isize {
            0.0
        } else {
            mag[j as usize * w + i as usize]
        }
    };

    // Non-maximum suppression: strictly above the backward neighbour and at
    // least the forward one, so plateaus of two equal maxima keep one pixel.
    let mut strength = vec![0u8; w * h];
    strength.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, s) in row.iter_mut().enumerate() {
            let k = j * w + i;
            let m = mag[k];
            if m < low {
                continue;
            }
            let (di, dj) = gradient_step(gx[k], gy[k]);
            let (x, y) = (i as isize, j as isize);
            if m > mag_at(x - di, y - dj) && m >= mag_at(x + di, y + dj) {
                *s = if m >= high { 2 } else { 1 };
            }
        }
    });

    // Hysteresis: weak pixels survive when 8-connected to a strong one.
    let mut edge = vec![false; w * h];
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&k| strength[k] == 2).collect();
    for &k in &queue {
        edge[k] = true;
    }
    while let Some(k) = queue.pop_front() {
        let (i, j) = ((k % w) as isize, (k / w) as isize);
        for dj in -1..=1 {
            for di in -1..=1 {
                let (x, y) = (i + di, j + dj);
                if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                    continue;
                }
                let n = y as usize * w + x as usize;
                if !edge[n] && strength[n] == 1 {
                    edge[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    edge
}

fn dilate3(src: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut out = vec![false; w * h];
    for j in 0..h {
        for i in 0..w {
            if src[j * w + i] {
                for y in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                    for x in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                        out[y * w + x] = true;
                    }
                }
            }
        }
    }
    out
}
