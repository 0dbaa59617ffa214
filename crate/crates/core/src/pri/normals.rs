use crate::geom::{ScreenFrame, Vec3};

/// Unit normals in the frame's `(u, v, w)` basis from a depth grid.
///
/// With the surface at `w = -d(u, v)` the gradient of the implicit surface is
/// `w + ∂d/∂u·u + ∂d/∂v·v`. Derivatives are central differences in metres
/// per metre, one-sided where a neighbour is missing (non-finite), and zero
/// where both are missing. Non-finite pixels get `w`.
pub fn depth_to_normals(depth: &[f64], frame: &ScreenFrame) -> Vec<Vec3> {
    let (w, h) = (frame.width, frame.height);
    assert_eq!(depth.len(), w * h, "depth grid does not match the screen");
    let pitch = frame.pitch;
    let at = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i >= w as isize || j >= h as isize {
            return None;
        }
        let d = depth[j as usize * w + i as usize];
        d.is_finite().then_some(d)
    };
    let slope = |center: f64, prev: Option<f64>, next: Option<f64>| -> f64 {
        match (prev, next) {
            (Some(a), Some(b)) => (b - a) / (2.0 * pitch),
            (None, Some(b)) => (b - center) / pitch,
            (Some(a), None) => (center - a) / pitch,
            (None, None) => 0.0,
        }
    };
    let mut out = vec![Vec3::Z; w * h];
    for j in 0..h as isize {
        for i in 0..w as isize {
            let Some(d) = at(i, j) else { continue };
            let du = slope(d, at(i - 1, j), at(i + 1, j));
            let dv = slope(d, at(i, j - 1), at(i, j + 1));
            let n = Vec3::new(du, dv, 1.0);
            out[j as usize * w + i as usize] = n / n.norm();
        }
    }
    out
}
