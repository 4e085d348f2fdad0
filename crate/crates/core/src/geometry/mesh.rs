use nalgebra::{Point3, Vector3};

use super::aabb::Aabb;
use super::triangle::Triangle;
use crate::error::{Error, Result};

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Validates that every index is in range and every coordinate finite.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::format(format!("non-finite vertex {v:?}")));
        }
        let n = vertices.len();
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= n)) {
            return Err(Error::format(format!(
                "face {f:?} indexes past {n} vertices"
            )));
        }
        Ok(Self { vertices, faces })
    }

    pub fn from_triangles(triangles: &[Triangle]) -> Result<Self> {
        let vertices = triangles.iter().flat_map(|t| t.vertices()).collect();
        let faces = (0..triangles.len())
            .map(|i| [3 * i, 3 * i + 1, 3 * i + 2])
            .collect();
        Self::new(vertices, faces)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn triangle(&self, face: usize) -> Triangle {
        let [a, b, c] = self.faces[face];
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn triangles(&self) -> impl ExactSizeIterator<Item = Triangle> + '_ {
        (0..self.faces.len()).map(|i| self.triangle(i))
    }

    /// Box over the vertices referenced by faces.
    pub fn aabb(&self) -> Aabb {
        self.triangles()
            .fold(Aabb::empty(), |acc, t| acc.union(&t.aabb()))
    }

    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Axis-aligned box `[min, max]` as 12 outward-facing triangles.
pub fn box_mesh(min: Point3<f64>, max: Point3<f64>) -> TriangleMesh {
    let corner = |i: usize| {
        Point3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    let vertices = (0..8).map(corner).collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriangleMesh { vertices, faces }
}

/// Closed cylinder along z from `z0` to `z1`: `4 · segments` triangles.
pub fn cylinder_mesh(radius: f64, z0: f64, z1: f64, segments: usize) -> TriangleMesh {
    assert!(segments >= 3);
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for k in 0..segments {
        let a = std::f64::consts::TAU * k as f64 / segments as f64;
        let (s, c) = a.sin_cos();
        vertices.push(Point3::new(radius * c, radius * s, z0));
        vertices.push(Point3::new(radius * c, radius * s, z1));
    }
    let bottom = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, z0));
    let top = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, z1));

    let mut faces = Vec::with_capacity(4 * segments);
    for k in 0..segments {
        let (b0, t0) = (2 * k, 2 * k + 1);
        let (b1, t1) = (2 * ((k + 1) % segments), 2 * ((k + 1) % segments) + 1);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom, b1, b0]);
        faces.push([top, t0, t1]);
    }
    TriangleMesh { vertices, faces }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_has_twelve_nondegenerate_faces() {
        let m = box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 2.0, 3.0));
        assert_eq!(m.face_count(), 12);
        assert!(m.triangles().all(|t| !t.is_degenerate()));
        let total: f64 = m.triangles().map(|t| t.area()).sum();
        assert!((total - 2.0 * (2.0 + 3.0 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn cylinder_counts() {
        let m = cylinder_mesh(0.1, 0.0, 0.5, 16);
        assert_eq!(m.face_count(), 64);
        assert!(m.triangles().all(|t| !t.is_degenerate()));
        let b = m.aabb();
        assert!((b.max.z - 0.5).abs() < 1e-15 && b.min.z == 0.0);
    }

    #[test]
    fn out_of_range_face_rejected() {
        let v = vec![Point3::origin(); 3];
        assert!(TriangleMesh::new(v, vec![[0, 1, 3]]).is_err());
    }
}
