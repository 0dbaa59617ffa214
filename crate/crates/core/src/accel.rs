//! Bounding-volume hierarchy over points, splats and triangles, with
//! ray-tube and ray traversal.
//!
//! Construction is a deterministic median split along the largest centroid
//! extent. Node tests are conservative; exactness is enforced per primitive.

use crate::error::{Error, Result};
use crate::geom::{UnitVec3, Vec3};

/// Axis-aligned bounding box, `min <= max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::splat(f64::INFINITY),
        max: Vec3::splat(f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn from_point(p: Vec3) -> Self {
        Aabb { min: p, max: p }
    }

    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Self {
        points
            .into_iter()
            .fold(Aabb::EMPTY, |b, p| b.union(&Aabb::from_point(p)))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn inflate(&self, by: f64) -> Aabb {
        Aabb {
            min: self.min - Vec3::splat(by),
            max: self.max + Vec3::splat(by),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        o.is_empty() || (self.contains(o.min) && self.contains(o.max))
    }

    /// Parametric interval where the ray `origin + t·dir` lies inside the
    /// box, clipped to `[t_min, t_max]`.
    #[inline]
    pub fn ray_interval(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<(f64, f64)> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = origin[axis];
            let inv = inv_dir[axis];
            let (lo, hi) = (self.min[axis], self.max[axis]);
            if inv.is_infinite() {
                // Ray parallel to this slab.
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let mut near = (lo - o) * inv;
            let mut far = (hi - o) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Something a [`Bvh`] can hold.
pub trait Primitive {
    fn bounds(&self) -> Aabb;
    fn centroid(&self) -> Vec3 {
        self.bounds().center()
    }
}

impl Primitive for Vec3 {
    fn bounds(&self) -> Aabb {
        Aabb::from_point(*self)
    }
    fn centroid(&self) -> Vec3 {
        *self
    }
}

/// Half-infinite cylinder of radius `radius` around a central ray.
#[derive(Clone, Copy, Debug)]
pub struct Tube {
    pub origin: Vec3,
    pub dir: UnitVec3,
    pub radius: f64,
}

impl Tube {
    /// `(perpendicular distance, along-ray distance)` of `p` from the
    /// central ray.
    #[inline]
    pub fn offsets(&self, p: Vec3) -> (f64, f64) {
        let d = p - self.origin;
        let along = d.dot(*self.dir);
        ((d - *self.dir * along).norm(), along)
    }

    #[inline]
    pub fn contains(&self, p: Vec3) -> bool {
        let (perp, along) = self.offsets(p);
        along > 0.0 && perp < self.radius
    }
}

pub const DEFAULT_MAX_LEAF: usize = 8;

#[derive(Clone, Copy, Debug)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Bounding-volume hierarchy owning its primitives. Primitive indices
/// reported by traversal refer to the input order given to [`Bvh::build`].
#[derive(Clone, Debug)]
pub struct Bvh<P> {
    prims: Vec<P>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    max_leaf: usize,
}

#[inline]
fn inverse(dir: Vec3) -> Vec3 {
    Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z)
}

impl<P: Primitive> Bvh<P> {
    pub fn build(prims: Vec<P>) -> Result<Self> {
        Self::build_with_leaf_size(prims, DEFAULT_MAX_LEAF)
    }

    pub fn build_with_leaf_size(prims: Vec<P>, max_leaf: usize) -> Result<Self> {
        if prims.is_empty() {
            return Err(Error::InvalidArgument("cannot build a BVH over zero primitives".into()));
        }
        if max_leaf == 0 {
            return Err(Error::InvalidArgument("leaf size must be at least 1".into()));
        }
        if prims.len() > u32::MAX as usize {
            return Err(Error::InvalidArgument("too many primitives".into()));
        }
        let bounds: Vec<Aabb> = prims.iter().map(Primitive::bounds).collect();
        let centroids: Vec<Vec3> = prims.iter().map(Primitive::centroid).collect();
        let mut order: Vec<u32> = (0..prims.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * prims.len() / max_leaf + 1);
        build_node(&mut nodes, &mut order, 0, &bounds, &centroids, max_leaf);
        Ok(Bvh {
            prims,
            order,
            nodes,
            max_leaf,
        })
    }

    pub fn primitives(&self) -> &[P] {
        &self.prims
    }

    pub fn len(&self) -> usize {
        self.prims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prims.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn max_leaf(&self) -> usize {
        self.max_leaf
    }

    /// Exhaustive structural audit: every primitive sits in exactly one leaf,
    /// inside that leaf's bounds and every ancestor's; parents contain their
    /// children; leaves respect the size cap.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let mut seen = vec![0u32; self.prims.len()];
        // (node, ancestor bounds chain)
        let mut stack: Vec<(usize, Vec<Aabb>)> = vec![(0, Vec::new())];
        while let Some((ni, mut chain)) = stack.pop() {
            let node = &self.nodes[ni];
            if let Some(parent) = chain.last() {
                if !parent.contains_box(&node.bounds) {
                    return Err(format!("node {ni} escapes its parent"));
                }
            }
            chain.push(node.bounds);
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    if count as usize > self.max_leaf {
                        return Err(format!("leaf {ni} holds {count} > {}", self.max_leaf));
                    }
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        seen[p as usize] += 1;
                        let b = self.prims[p as usize].bounds();
                        if let Some(bad) = chain.iter().position(|a| !a.contains_box(&b)) {
                            return Err(format!("primitive {p} outside ancestor at depth {bad}"));
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push((left as usize, chain.clone()));
                    stack.push((right as usize, chain));
                }
            }
        }
        match seen.iter().position(|&c| c != 1) {
            Some(p) => Err(format!("primitive {p} appears {} times", seen[p])),
            None => Ok(()),
        }
    }

    /// Visits every primitive whose bounds overlap the ray segment
    /// `[t_min, t_max]`, in no particular order.
    pub fn for_each_on_segment(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
        mut visit: impl FnMut(usize, &P),
    ) {
        let inv = inverse(dir);
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.ray_interval(origin, inv, t_min, t_max).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        visit(p as usize, &self.prims[p as usize]);
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right as usize);
                    stack.push(left as usize);
                }
            }
        }
    }

    /// Nearest-hit query. `intersect(index, prim, t_min, t_max)` returns the
    /// hit distance, if any, inside the open window; the window shrinks as
    /// hits are found and children are visited front to back. Ties in
    /// distance keep the smaller primitive index.
    pub fn closest_hit(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
        mut intersect: impl FnMut(usize, &P, f64, f64) -> Option<f64>,
    ) -> Option<(usize, f64)> {
        let inv = inverse(dir);
        let mut best: Option<(usize, f64)> = None;
        let mut limit = t_max;
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        if let Some((t0, _)) = self.nodes[0].bounds.ray_interval(origin, inv, t_min, limit) {
            stack.push((0, t0));
        }
        while let Some((ni, entry)) = stack.pop() {
            if entry > limit {
                continue;
            }
            let node = &self.nodes[ni];
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        let p = p as usize;
                        if let Some(t) = intersect(p, &self.prims[p], t_min, limit) {
                            let better = match best {
                                None => true,
                                Some((bi, bt)) => t < bt || (t == bt && p < bi),
                            };
                            if better && t >= t_min && t <= limit {
                                best = Some((p, t));
                                limit = t;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let l = self.nodes[left as usize].bounds.ray_interval(origin, inv, t_min, limit);
                    let r = self.nodes[right as usize].bounds.ray_interval(origin, inv, t_min, limit);
                    match (l, r) {
                        (Some((tl, _)), Some((tr, _))) => {
                            // Push the farther child first so the nearer pops next.
                            if tl <= tr {
                                stack.push((right as usize, tr));
                                stack.push((left as usize, tl));
                            } else {
                                stack.push((left as usize, tl));
                                stack.push((right as usize, tr));
                            }
                        }
                        (Some((tl, _)), None) => stack.push((left as usize, tl)),
                        (None, Some((tr, _))) => stack.push((right as usize, tr)),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }

    /// Primitives whose own bounds the ray `origin + t·dir, t >= 0` enters,
    /// ordered by entry distance (ties by index).
    pub fn traverse_ray(&self, origin: Vec3, dir: UnitVec3) -> Vec<(usize, f64)> {
        let inv = inverse(*dir);
        let mut out = Vec::new();
        self.for_each_on_segment(origin, *dir, 0.0, f64::INFINITY, |i, p| {
            if let Some((t0, _)) = p.bounds().ray_interval(origin, inv, 0.0, f64::INFINITY) {
                out.push((i, t0));
            }
        });
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }
}

impl Bvh<Vec3> {
    /// Calls `visit(index, point, perpendicular, along)` for exactly the
    /// points strictly inside `tube` and ahead of its origin.
    pub fn traverse_tube(&self, tube: &Tube, mut visit: impl FnMut(usize, Vec3, f64, f64)) {
        let inv = inverse(*tube.dir);
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node
                .bounds
                .inflate(tube.radius)
                .ray_interval(tube.origin, inv, 0.0, f64::INFINITY)
                .is_none()
            {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        let point = self.prims[p as usize];
                        let (perp, along) = tube.offsets(point);
                        if along > 0.0 && perp < tube.radius {
                            visit(p as usize, point, perp, along);
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right as usize);
                    stack.push(left as usize);
                }
            }
        }
    }

    /// Indices of the points inside `tube`, sorted ascending.
    pub fn tube_points(&self, tube: &Tube) -> Vec<usize> {
        let mut out = Vec::new();
        self.traverse_tube(tube, |i, _, _, _| out.push(i));
        out.sort_unstable();
        out
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    offset: usize,
    bounds: &[Aabb],
    centroids: &[Vec3],
    max_leaf: usize,
) -> u32 {
    let node_bounds = order
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.union(&bounds[i as usize]));
    let index = nodes.len() as u32;
    nodes.push(Node {
        bounds: node_bounds,
        kind: NodeKind::Leaf {
            start: offset as u32,
            count: order.len() as u32,
        },
    });
    if order.len() <= max_leaf {
        return index;
    }
    let cbox = Aabb::from_points(order.iter().map(|&i| centroids[i as usize]));
    let axis = cbox.extent().max_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(nodes, lo, offset, bounds, centroids, max_leaf);
    let right = build_node(nodes, hi, offset + mid, bounds, centroids, max_leaf);
    nodes[index as usize].kind = NodeKind::Inner { left, right };
    index
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
            .collect()
    }

    #[test]
    fn single_point_is_a_single_leaf() {
        let bvh = Bvh::build(vec![Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        assert_eq!(bvh.nodes.len(), 1);
        assert!(matches!(bvh.nodes[0].kind, NodeKind::Leaf { count: 1, .. }));
        bvh.audit().unwrap();
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(Bvh::<Vec3>::build(vec![]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ten_thousand_points_pass_containment_audit() {
        let bvh = Bvh::build(random_points(10_000, 1)).unwrap();
        bvh.audit().unwrap();
    }

    #[test]
    fn duplicates_are_all_retained() {
        let bvh = Bvh::build(vec![Vec3::splat(0.5); 100]).unwrap();
        bvh.audit().unwrap();
        let tube = Tube {
            origin: Vec3::new(0.5, 0.5, 10.0),
            dir: -UnitVec3::Z,
            radius: 0.1,
        };
        assert_eq!(bvh.tube_points(&tube).len(), 100);
    }

    #[test]
    fn tube_is_half_infinite() {
        let bvh = Bvh::build(vec![Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0)]).unwrap();
        let tube = Tube {
            origin: Vec3::ZERO,
            dir: -UnitVec3::Z,
            radius: 0.01,
        };
        assert_eq!(bvh.tube_points(&tube), vec![0]);
    }

    #[test]
    fn infinite_radius_returns_everything_ahead() {
        let pts = random_points(2_000, 2);
        let bvh = Bvh::build(pts.clone()).unwrap();
        let tube = Tube {
            origin: Vec3::new(0.3, -0.2, 0.1),
            dir: UnitVec3::new_normalize(Vec3::new(1.0, 2.0, -0.5)),
            radius: f64::INFINITY,
        };
        let want: Vec<usize> = (0..pts.len())
            .filter(|&i| (pts[i] - tube.origin).dot(*tube.dir) > 0.0)
            .collect();
        assert_eq!(bvh.tube_points(&tube), want);
    }

    #[test]
    fn parallel_ray_inside_slab_still_hits() {
        let b = Aabb::new(Vec3::ZERO, Vec3::splat(1.0));
        let inv = inverse(Vec3::X);
        assert!(b.ray_interval(Vec3::new(-1.0, 0.5, 0.5), inv, 0.0, f64::INFINITY).is_some());
        assert!(b.ray_interval(Vec3::new(-1.0, 1.5, 0.5), inv, 0.0, f64::INFINITY).is_none());
    }
}
