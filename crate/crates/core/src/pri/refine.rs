//! Classical (non-learned) refinement of coarse depth maps.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::geom::Vec3;

use super::{depth_to_normals, is_miss, CoarseDepthMap, Gfb, MISS};

const CLOSING_RADIUS: isize = 2;
const MEDIAN_PASSES: usize = 2;
const FILL_TOLERANCE: f64 = 1e-4;
const FILL_MAX_ITERATIONS: usize = 20_000;

/// Hit mask = closing (disk radius 2) of the hit pixels plus enclosed
/// holes; depth = two 3×3 median passes over hits, harmonic fill of the
/// newly masked pixels; normals from the refined depth.
pub fn refine_classical(coarse: &CoarseDepthMap) -> Gfb {
    let frame = coarse.frame;
    let (w, h) = (frame.width, frame.height);
    let hits: Vec<bool> = coarse.depth.iter().map(|d| !is_miss(*d)).collect();
    if !hits.iter().any(|&b| b) {
        return Gfb::empty(frame);
    }

    let mask = fill_holes(&close(&hits, w, h, CLOSING_RADIUS), w, h);

    let mut depth = coarse.depth.clone();
    for _ in 0..MEDIAN_PASSES {
        depth = median3(&depth, &hits, w, h);
    }
    let mask = harmonic_fill(&mut depth, &hits, &mask, w, h);

    let normals = depth_to_normals(&depth, &frame);
    let normal = normals
        .into_iter()
        .zip(&mask)
        .map(|(n, &m)| if m { n } else { Vec3::Z })
        .collect();
    Gfb {
        frame,
        depth,
        normal,
        mask: mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
    }
}

fn disk_offsets(r: isize) -> Vec<(isize, isize)> {
    let mut v = Vec::new();
    for dj in -r..=r {
        for di in -r..=r {
            if di * di + dj * dj <= r * r {
                v.push((di, dj));
            }
        }
    }
    v
}

fn dilate(src: &[bool], w: usize, h: usize, offsets: &[(isize, isize)]) -> Vec<bool> {
    let mut out = vec![false; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = offsets.iter().any(|&(di, dj)| {
                let (x, y) = (i as isize + di, j as isize + dj);
                x >= 0 && y >= 0 && x < w as isize && y < h as isize && src[y as usize * w + x as usize]
            });
        }
    });
    out
}

/// Erosion treating out-of-image neighbours as set, so closing never
/// removes an input pixel.
fn erode(src: &[bool], w: usize, h: usize, offsets: &[(isize, isize)]) -> Vec<bool> {
    let mut out = vec![false; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = offsets.iter().all(|&(di, dj)| {
                let (x, y) = (i as isize + di, j as isize + dj);
                x < 0 || y < 0 || x >= w as isize || y >= h as isize || src[y as usize * w + x as usize]
            });
        }
    });
    out
}

fn close(src: &[bool], w: usize, h: usize, r: isize) -> Vec<bool> {
    let offsets = disk_offsets(r);
    erode(&dilate(src, w, h, &offsets), w, h, &offsets)
}

/// Sets every unset pixel not 4-connected to the image border.
fn fill_holes(src: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |k: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !src[k] && !outside[k] {
            outside[k] = true;
            queue.push_back(k);
        }
    };
    for i in 0..w {
        seed(i, &mut outside, &mut queue);
        seed((h - 1) * w + i, &mut outside, &mut queue);
    }
    for j in 0..h {
        seed(j * w, &mut outside, &mut queue);
        seed(j * w + w - 1, &mut outside, &mut queue);
    }
    while let Some(k) = queue.pop_front() {
        let (i, j) = (k % w, k / w);
        if i > 0 {
            seed(k - 1, &mut outside, &mut queue);
        }
        if i + 1 < w {
            seed(k + 1, &mut outside, &mut queue);
        }
        if j > 0 {
            seed(k - w, &mut outside, &mut queue);
        }
        if j + 1 < h {
            seed(k + w, &mut outside, &mut queue);
        }
    }
    outside.iter().map(|&o| !o).collect()
}

/// 3×3 median over valid pixels; invalid pixels stay MISS.
fn median3(depth: &[f64], valid: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![MISS; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        let mut window = Vec::with_capacity(9);
        for (i, o) in row.iter_mut().enumerate() {
            if !valid[j * w + i] {
                continue;
            }
            window.clear();
            for y in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                for x in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                    if valid[y * w + x] {
                        window.push(depth[y * w + x]);
                    }
                }
            }
            window.sort_by(f64::total_cmp);
            let n = window.len();
            *o = if n % 2 == 1 {
                window[n / 2]
            } else {
                0.5 * (window[n / 2 - 1] + window[n / 2])
            };
        }
    });
    out
}

const NEIGHBOURS8: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Fills masked non-hit pixels by iterative 8-neighbour averaging (hits held
/// fixed) until the largest update is below [`FILL_TOLERANCE`]. Returns the
/// final mask; pixels the fill cannot reach are dropped from it.
fn harmonic_fill(depth: &mut [f64], hits: &[bool], mask: &[bool], w: usize, h: usize) -> Vec<bool> {
    let neighbours = |k: usize| {
        let (i, j) = ((k % w) as isize, (k / w) as isize);
        NEIGHBOURS8.iter().filter_map(move |&(di, dj)| {
            let (x, y) = (i + di, j + dj);
            (x >= 0 && y >= 0 && x < w as isize && y < h as isize).then(|| y as usize * w + x as usize)
        })
    };

    // Breadth-first initial guess: each unknown takes the mean of its
    // already-known neighbours, layer by layer outward from the hits.
    let mut known: Vec<bool> = hits.to_vec();
    let mut frontier: Vec<usize> = (0..w * h)
        .filter(|&k| mask[k] && !hits[k] && neighbours(k).any(|n| hits[n]))
        .collect();
    let mut unknown = Vec::new();
    while !frontier.is_empty() {
        let values: Vec<f64> = frontier
            .iter()
            .map(|&k| {
                let (sum, cnt) = neighbours(k)
                    .filter(|&n| known[n])
                    .fold((0.0, 0usize), |(s, c), n| (s + depth[n], c + 1));
                sum / cnt as f64
            })
            .collect();
        for (&k, v) in frontier.iter().zip(values) {
            depth[k] = v;
            known[k] = true;
        }
        unknown.extend_from_slice(&frontier);
        let mut next: Vec<usize> = frontier
            .iter()
            .flat_map(|&k| neighbours(k))
            .filter(|&n| mask[n] && !known[n])
            .collect();
        next.sort_unstable();
        next.dedup();
        frontier = next;
    }

    // Jacobi sweeps over the unknowns only.
    let mut next = vec![0.0; unknown.len()];
    for _ in 0..FILL_MAX_ITERATIONS {
        let current: &[f64] = depth;
        next.par_iter_mut().zip(unknown.par_iter()).for_each(|(out, &k)| {
            let (sum, cnt) = neighbours(k)
                .filter(|&n| known[n])
                .fold((0.0, 0usize), |(s, c), n| (s + current[n], c + 1));
            *out = sum / cnt as f64;
        });
        let mut max_change: f64 = 0.0;
        for (&k, &v) in unknown.iter().zip(&next) {
            max_change = max_change.max((v - depth[k]).abs());
            depth[k] = v;
        }
        if max_change < FILL_TOLERANCE {
            break;
        }
    }

    (0..w * h)
        .map(|k| {
            let keep = mask[k] && known[k];
            if !keep {
                depth[k] = MISS;
            }
            keep
        })
        .collect()
}
