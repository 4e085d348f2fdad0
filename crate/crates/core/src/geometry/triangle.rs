use nalgebra::{Point3, Vector2, Vector3};

use super::aabb::Aabb;
use super::pose::Pose;
use crate::error::{Error, Result};

/// Triangles with area below this (m²) are degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Distances (m) and 2D orientation values below this count as zero.
pub const PREDICATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v0: Point3<f64>,
    pub v1: Point3<f64>,
    pub v2: Point3<f64>,
}

impl Triangle {
    pub fn new(v0: Point3<f64>, v1: Point3<f64>, v2: Point3<f64>) -> Self {
        Self { v0, v1, v2 }
    }

    #[inline]
    pub fn vertices(&self) -> [Point3<f64>; 3] {
        [self.v0, self.v1, self.v2]
    }

    #[inline]
    fn raw_normal(&self) -> Vector3<f64> {
        (self.v1 - self.v0).cross(&(self.v2 - self.v0))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.raw_normal().norm()
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.area() >= DEGENERATE_AREA)
    }

    pub fn centroid(&self) -> Point3<f64> {
        Point3::from((self.v0.coords + self.v1.coords + self.v2.coords) / 3.0)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices())
    }

    pub fn transformed(&self, pose: &Pose) -> Triangle {
        Triangle {
            v0: pose.transform_point(&self.v0),
            v1: pose.transform_point(&self.v1),
            v2: pose.transform_point(&self.v2),
        }
    }
}

/// Closed-set triangle–triangle intersection: touching counts.
///
/// Separating-plane rejection followed by an interval overlap test on the
/// line where the two supporting planes meet. Coplanar pairs fall back to a
/// 2D edge-crossing / containment test.
pub fn tri_tri_intersect(a: &Triangle, b: &Triangle) -> Result<bool> {
    if a.is_degenerate() || b.is_degenerate() {
        return Err(Error::DegenerateTriangle {
            threshold: DEGENERATE_AREA,
        });
    }
    Ok(intersect_nondegenerate(a, b))
}

#[inline]
fn snap(d: f64) -> f64 {
    if d.abs() < PREDICATE_EPS {
        0.0
    } else {
        d
    }
}

#[inline]
fn same_strict_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

fn plane_distances(plane: &Triangle, normal: &Vector3<f64>, t: &Triangle) -> [f64; 3] {
    t.vertices().map(|v| snap(normal.dot(&(v - plane.v0))))
}

/// Caller guarantees both triangles are non-degenerate.
pub(crate) fn intersect_nondegenerate(a: &Triangle, b: &Triangle) -> bool {
    let na = a.raw_normal().normalize();
    let db = plane_distances(a, &na, b);
    if same_strict_side(&db) {
        return false;
    }
    let nb = b.raw_normal().normalize();
    let da = plane_distances(b, &nb, a);
    if same_strict_side(&da) {
        return false;
    }

    if db == [0.0; 3] {
        return coplanar_intersect(a, b, &na);
    }
    if da == [0.0; 3] {
        return coplanar_intersect(a, b, &nb);
    }

    let dir = na.cross(&nb);
    let len = dir.norm();
    if len < PREDICATE_EPS {
        // Planes parallel to within the predicate tolerance yet the vertices
        // straddle them: treat as coplanar.
        return coplanar_intersect(a, b, &na);
    }
    let dir = dir / len;

    let (a_lo, a_hi) = crossing_interval(a, &da, &dir);
    let (b_lo, b_hi) = crossing_interval(b, &db, &dir);
    a_lo <= b_hi + PREDICATE_EPS && b_lo <= a_hi + PREDICATE_EPS
}

/// Interval along `dir` covered by the part of `t` lying in the other plane,
/// given the (snapped) signed distances of its vertices to that plane.
fn crossing_interval(t: &Triangle, d: &[f64; 3], dir: &Vector3<f64>) -> (f64, f64) {
    let v = t.vertices();
    let p = v.map(|x| dir.dot(&x.coords));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut include = |x: f64| {
        lo = lo.min(x);
        hi = hi.max(x);
    };
    for i in 0..3 {
        if d[i] == 0.0 {
            include(p[i]);
        }
    }
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        if d[i] * d[j] < 0.0 {
            let s = d[i] / (d[i] - d[j]);
            include(p[i] + (p[j] - p[i]) * s);
        }
    }
    (lo, hi)
}

fn project_2d(normal: &Vector3<f64>, t: &Triangle) -> [Vector2<f64>; 3] {
    let n = normal.abs();
    let (i, j) = if n.x >= n.y && n.x >= n.z {
        (1, 2)
    } else if n.y >= n.z {
        (2, 0)
    } else {
        (0, 1)
    };
    t.vertices().map(|v| Vector2::new(v[i], v[j]))
}

#[inline]
fn orient(a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>) -> f64 {
    let o = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    snap(o)
}

fn on_segment(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
    p.x >= a.x.min(b.x) - PREDICATE_EPS
        && p.x <= a.x.max(b.x) + PREDICATE_EPS
        && p.y >= a.y.min(b.y) - PREDICATE_EPS
        && p.y <= a.y.max(b.y) + PREDICATE_EPS
}

fn segments_intersect_2d(
    p1: &Vector2<f64>,
    p2: &Vector2<f64>,
    q1: &Vector2<f64>,
    q2: &Vector2<f64>,
) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(q1, p1, p2))
        || (o2 == 0.0 && on_segment(q2, p1, p2))
        || (o3 == 0.0 && on_segment(p1, q1, q2))
        || (o4 == 0.0 && on_segment(p2, q1, q2))
}

fn point_in_triangle_2d(p: &Vector2<f64>, t: &[Vector2<f64>; 3]) -> bool {
    let d0 = orient(&t[0], &t[1], p);
    let d1 = orient(&t[1], &t[2], p);
    let d2 = orient(&t[2], &t[0], p);
    let has_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let has_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(has_neg && has_pos)
}

fn coplanar_intersect(a: &Triangle, b: &Triangle, normal: &Vector3<f64>) -> bool {
    let pa = project_2d(normal, a);
    let pb = project_2d(normal, b);
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect_2d(&pa[i], &pa[(i + 1) % 3], &pb[j], &pb[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle_2d(&pa[0], &pb) || point_in_triangle_2d(&pb[0], &pa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Triangle {
        Triangle::new(a.into(), b.into(), c.into())
    }

    #[test]
    fn identical_triangles_intersect() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(tri_tri_intersect(&t, &t).unwrap());
    }

    #[test]
    fn parallel_planes_do_not() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        assert!(!tri_tri_intersect(&a, &b).unwrap());
    }

    #[test]
    fn piercing_pair() {
        let a = tri([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        let b = tri([0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [0.6, 0.4, 1.0]);
        assert!(tri_tri_intersect(&a, &b).unwrap());
        assert!(tri_tri_intersect(&b, &a).unwrap());
    }

    #[test]
    fn vertex_touching_face_counts() {
        let a = tri([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        let b = tri([0.5, 0.5, 0.0], [0.5, 0.5, 1.0], [0.6, 0.4, 1.0]);
        assert!(tri_tri_intersect(&a, &b).unwrap());
    }

    #[test]
    fn edge_touching_edge_counts() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(tri_tri_intersect(&a, &b).unwrap());
    }

    #[test]
    fn coplanar_cases() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        // nested
        let inner = tri([0.1, 0.1, 0.0], [0.2, 0.1, 0.0], [0.1, 0.2, 0.0]);
        assert!(tri_tri_intersect(&a, &inner).unwrap());
        assert!(tri_tri_intersect(&inner, &a).unwrap());
        // disjoint in the plane
        let far = tri([2.0, 2.0, 0.0], [3.0, 2.0, 0.0], [2.0, 3.0, 0.0]);
        assert!(!tri_tri_intersect(&a, &far).unwrap());
        // shares one corner
        let corner = tri([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0]);
        assert!(tri_tri_intersect(&a, &corner).unwrap());
    }

    #[test]
    fn near_miss_above_tolerance() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.2, 0.2, 1e-6], [0.2, 0.2, 1.0], [0.3, 0.1, 1.0]);
        assert!(!tri_tri_intersect(&a, &b).unwrap());
    }

    #[test]
    fn degenerate_is_rejected() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]);
        let b = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(a.is_degenerate());
        assert!(matches!(
            tri_tri_intersect(&a, &b),
            Err(Error::DegenerateTriangle { .. })
        ));
        assert!(tri_tri_intersect(&b, &a).is_err());
    }
}
