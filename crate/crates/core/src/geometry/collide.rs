use super::aabb::Aabb;
use super::bvh::{Bvh, NodeKind};
use super::mesh::TriangleMesh;
use super::pose::Pose;
use super::triangle::{intersect_nondegenerate, Triangle};
use crate::error::{Error, Result};

/// Slack added to every transformed node box. Culling only ever discards
/// pairs that are provably apart, so extra slack costs time, never accuracy.
const BOX_MARGIN: f64 = 1e-6;

/// A mesh with its hierarchy placed in the world: triangles are transformed
/// once, node boxes are transformed (conservatively) once.
#[derive(Debug, Clone)]
pub struct PosedMesh<'a> {
    bvh: &'a Bvh,
    triangles: Vec<Triangle>,
    degenerate: Vec<bool>,
    boxes: Vec<Aabb>,
}

impl<'a> PosedMesh<'a> {
    pub fn new(mesh: &TriangleMesh, bvh: &'a Bvh, pose: &Pose) -> Result<Self> {
        if bvh.triangle_count() != mesh.face_count() {
            return Err(Error::MismatchedBvh {
                bvh: bvh.triangle_count(),
                mesh: mesh.face_count(),
            });
        }
        let triangles: Vec<Triangle> = mesh.triangles().map(|t| t.transformed(pose)).collect();
        let degenerate = triangles.iter().map(Triangle::is_degenerate).collect();
        let boxes = bvh
            .nodes()
            .iter()
            .map(|n| n.aabb.transformed(pose).inflated(BOX_MARGIN))
            .collect();
        Ok(Self {
            bvh,
            triangles,
            degenerate,
            boxes,
        })
    }

    pub fn world_aabb(&self) -> &Aabb {
        &self.boxes[0]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Simultaneous descent of both hierarchies; leaf pairs run the exact
    /// triangle test. Degenerate triangles are skipped.
    pub fn collides(&self, other: &PosedMesh<'_>) -> bool {
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, j)) = stack.pop() {
            if !self.boxes[i].overlaps(&other.boxes[j]) {
                continue;
            }
            let a = &self.bvh.nodes()[i];
            let b = &other.bvh.nodes()[j];
            match (a.kind, b.kind) {
                (NodeKind::Leaf { .. }, NodeKind::Leaf { .. }) => {
                    for &ta in self.bvh.leaf_triangles(a) {
                        if self.degenerate[ta] {
                            continue;
                        }
                        for &tb in other.bvh.leaf_triangles(b) {
                            if !other.degenerate[tb]
                                && intersect_nondegenerate(&self.triangles[ta], &other.triangles[tb])
                            {
                                return true;
                            }
                        }
                    }
                }
                (NodeKind::Leaf { .. }, NodeKind::Internal { left, right }) => {
                    stack.push((i, right));
                    stack.push((i, left));
                }
                (NodeKind::Internal { left, right }, NodeKind::Leaf { .. }) => {
                    stack.push((right, j));
                    stack.push((left, j));
                }
                (NodeKind::Internal { left: al, right: ar }, NodeKind::Internal { left: bl, right: br }) => {
                    // Split the bigger box.
                    if volume(&self.boxes[i]) >= volume(&other.boxes[j]) {
                        stack.push((ar, j));
                        stack.push((al, j));
                    } else {
                        stack.push((i, br));
                        stack.push((i, bl));
                    }
                }
            }
        }
        false
    }
}

fn volume(b: &Aabb) -> f64 {
    let e = b.extents();
    e.x * e.y * e.z
}

/// True iff some triangle of posed A meets some triangle of posed B.
pub fn mesh_pair_collide(
    mesh_a: &TriangleMesh,
    bvh_a: &Bvh,
    pose_a: &Pose,
    mesh_b: &TriangleMesh,
    bvh_b: &Bvh,
    pose_b: &Pose,
) -> Result<bool> {
    let a = PosedMesh::new(mesh_a, bvh_a, pose_a)?;
    let b = PosedMesh::new(mesh_b, bvh_b, pose_b)?;
    Ok(a.collides(&b))
}

/// All-pairs sweep without any culling. Same degenerate-skip rule as the
/// hierarchical query.
pub fn mesh_pair_collide_brute_force(
    mesh_a: &TriangleMesh,
    pose_a: &Pose,
    mesh_b: &TriangleMesh,
    pose_b: &Pose,
) -> bool {
    let ta: Vec<Triangle> = mesh_a
        .triangles()
        .map(|t| t.transformed(pose_a))
        .filter(|t| !t.is_degenerate())
        .collect();
    let tb: Vec<Triangle> = mesh_b
        .triangles()
        .map(|t| t.transformed(pose_b))
        .filter(|t| !t.is_degenerate())
        .collect();
    ta.iter()
        .any(|a| tb.iter().any(|b| intersect_nondegenerate(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_mesh, build_bvh};
    use nalgebra::{Point3, Vector3};

    fn unit_cube() -> TriangleMesh {
        box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn same_mesh_same_pose_collides() {
        let m = unit_cube();
        let b = build_bvh(&m).unwrap();
        let p = Pose::from_rpy_xyz([0.1, 0.2, 0.3], [1.0, 2.0, 3.0]);
        assert!(mesh_pair_collide(&m, &b, &p, &m, &b, &p).unwrap());
    }

    #[test]
    fn far_apart_cubes_do_not() {
        let m = unit_cube();
        let b = build_bvh(&m).unwrap();
        let p = Pose::from_translation(Vector3::new(10.0, 0.0, 0.0));
        assert!(!mesh_pair_collide(&m, &b, &Pose::identity(), &m, &b, &p).unwrap());
    }

    #[test]
    fn face_contact_counts() {
        let m = unit_cube();
        let b = build_bvh(&m).unwrap();
        let p = Pose::from_translation(Vector3::new(1.0, 0.0, 0.0));
        assert!(mesh_pair_collide(&m, &b, &Pose::identity(), &m, &b, &p).unwrap());
    }

    #[test]
    fn mismatched_bvh_rejected() {
        let m = unit_cube();
        let small = TriangleMesh::from_triangles(&[m.triangle(0)]).unwrap();
        let b = build_bvh(&small).unwrap();
        let err = mesh_pair_collide(&m, &b, &Pose::identity(), &m, &b, &Pose::identity());
        assert!(matches!(err, Err(Error::MismatchedBvh { bvh: 1, mesh: 12 })));
    }
}
