//! God-object proxy: a point that follows the stylus but never passes
//! through the surface.

use crate::distfield::SurfaceIndex;
use crate::Vec3;

/// Tangential re-aim iterations per update.
pub const MAX_SLIDE_ITERATIONS: usize = 8;

/// Result of one proxy update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProxyUpdate {
    pub p: Vec3,
    /// True when the surface blocked the straight move to the goal.
    pub constrained: bool,
}

/// Signed distance to the surface, positive on the side the vertex normals
/// face.
pub fn signed_distance(index: &SurfaceIndex, q: &Vec3) -> f64 {
    match index.nearest(q) {
        Some(hit) => {
            if (q - hit.point).dot(&hit.normal) < 0.0 {
                -hit.distance
            } else {
                hit.distance
            }
        }
        None => f64::INFINITY,
    }
}

/// Moves the proxy from `p_prev` towards `s_goal`.
///
/// If the straight segment stays clear of the surface the proxy lands on the
/// goal. Otherwise it stops at the first contact and slides: each iteration
/// projects the goal onto the tangent plane at the current contact and
/// re-projects that target onto the surface. A final step adopts the exact
/// nearest point to the goal when it lies on the same side of the surface
/// within reach.
pub fn update_proxy(
    index: &SurfaceIndex,
    p_prev: &Vec3,
    s_goal: &Vec3,
    contact_tol: f64,
) -> ProxyUpdate {
    let d = s_goal - p_prev;
    let len = d.norm();
    if len == 0.0 {
        return ProxyUpdate {
            p: *s_goal,
            constrained: false,
        };
    }
    let Some(h0) = index.nearest(p_prev) else {
        return ProxyUpdate {
            p: *s_goal,
            constrained: false,
        };
    };

    let on_surface = h0.distance <= contact_tol;
    let start = if on_surface && d.dot(&h0.normal) < 0.0 {
        // Resting on the surface and pushing into it.
        Some(h0.point)
    } else {
        let t_min = if on_surface {
            (contact_tol / len).min(1.0)
        } else {
            0.0
        };
        match index.raycast(p_prev, &d, t_min, 1.0) {
            Some(hit) => Some(p_prev + d * hit.t),
            None if signed_distance(index, s_goal) < 0.0 => Some(h0.point),
            None => None,
        }
    };
    let Some(contact) = start else {
        return ProxyUpdate {
            p: *s_goal,
            constrained: false,
        };
    };

    let first = index.nearest(&contact).expect("non-empty mesh");
    let mut p = first.point;
    let mut n = first.normal;
    let scale = len.max(contact_tol);
    for _ in 0..MAX_SLIDE_ITERATIONS {
        let target = s_goal - n * (s_goal - p).dot(&n);
        let h = index.nearest(&target).expect("non-empty mesh");
        let moved = (h.point - p).norm();
        p = h.point;
        n = h.normal;
        if moved <= 1e-12 * scale {
            break;
        }
    }

    let exact = index.nearest(s_goal).expect("non-empty mesh");
    if exact.normal.dot(&n) > 0.0 && (exact.point - p).norm() <= (s_goal - p).norm() {
        p = exact.point;
    }
    ProxyUpdate {
        p,
        constrained: true,
    }
}
