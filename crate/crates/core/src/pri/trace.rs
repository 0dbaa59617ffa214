use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::accel::{Bvh, Tube};
use crate::error::{Error, Result};
use crate::geom::{ScreenFrame, Vec3};

use super::{CoarseDepthMap, MISS};

pub const DEFAULT_K: usize = 8;

/// Heap entry ordered by perpendicular distance, then distance to the tube
/// origin, then input index.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    perp: f64,
    dist: f64,
    index: usize,
}

impl Candidate {
    fn cmp_key(&self, o: &Self) -> Ordering {
        self.perp
            .total_cmp(&o.perp)
            .then(self.dist.total_cmp(&o.dist))
            .then(self.index.cmp(&o.index))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp_key(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.cmp_key(o)
    }
}

/// Depth of one tube: among the `k` points nearest the central ray, the
/// distance of the one closest to the tube origin. `None` if the tube is
/// empty.
pub(crate) fn tube_depth(bvh: &Bvh<Vec3>, tube: &Tube, k: usize, heap: &mut BinaryHeap<Candidate>) -> Option<f64> {
    heap.clear();
    bvh.traverse_tube(tube, |index, p, perp, _| {
        let c = Candidate {
            perp,
            dist: (p - tube.origin).norm(),
            index,
        };
        if heap.len() < k {
            heap.push(c);
        } else if let Some(mut top) = heap.peek_mut() {
            if c < *top {
                *top = c;
            }
        }
    });
    heap.iter()
        .min_by(|a, b| a.dist.total_cmp(&b.dist).then(a.index.cmp(&b.index)))
        .map(|c| c.dist)
}

/// Traces one tube of radius `rel_radius · pitch` per pixel through the
/// point BVH and records the selected point's distance from the pixel.
pub fn trace_coarse(cloud: &Bvh<Vec3>, frame: &ScreenFrame, k: usize, rel_radius: f64) -> Result<CoarseDepthMap> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if !(rel_radius > 0.0 && rel_radius.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "relative radius must be positive, got {rel_radius}"
        )));
    }
    let radius = rel_radius * frame.pitch;
    let dir = frame.ray_dir();
    let mut depth = vec![MISS; frame.pixel_count()];
    depth
        .par_chunks_mut(frame.width)
        .enumerate()
        .for_each_init(
            || BinaryHeap::with_capacity(k + 1),
            |heap, (j, row)| {
                for (i, d) in row.iter_mut().enumerate() {
                    let tube = Tube {
                        origin: frame.pixel_origin(i, j),
                        dir,
                        radius,
                    };
                    if let Some(depth) = tube_depth(cloud, &tube, k, heap) {
                        *d = depth;
                    }
                }
            },
        );
    CoarseDepthMap::new(*frame, depth)
}
