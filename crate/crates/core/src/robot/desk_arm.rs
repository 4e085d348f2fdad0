//! The bundled 6-DoF "desk-arm": a compact serial manipulator built from
//! boxes and cylinders (12–96 triangles per link).
//!
//! Link frames put the joint at the origin with the link extending along +z.
//! Joint axes: base yaw (z), shoulder pitch (y), elbow pitch (y), forearm
//! roll (z), wrist pitch (y), flange roll (z).

use nalgebra::{Point3, Vector3};

use super::{non_adjacent_pairs, Joint, Link, RobotModel};
use crate::geometry::{box_mesh, cylinder_mesh, Pose, Triangle, TriangleMesh};

pub const DESK_ARM_NAME: &str = "desk-arm";

const CYLINDER_SEGMENTS: usize = 16;

fn centered_box(half_x: f64, half_y: f64, z0: f64, z1: f64) -> TriangleMesh {
    box_mesh(Point3::new(-half_x, -half_y, z0), Point3::new(half_x, half_y, z1))
}

fn merge(parts: &[TriangleMesh]) -> TriangleMesh {
    let tris: Vec<Triangle> = parts.iter().flat_map(|m| m.triangles()).collect();
    TriangleMesh::from_triangles(&tris).expect("primitive meshes are valid")
}

pub fn desk_arm() -> RobotModel {
    let links = [
        ("base", centered_box(0.12, 0.12, 0.0, 0.1)),
        ("turret", cylinder_mesh(0.06, 0.0, 0.3, CYLINDER_SEGMENTS)),
        ("upper_arm", centered_box(0.04, 0.04, 0.0, 0.35)),
        ("forearm", centered_box(0.03, 0.03, 0.0, 0.2)),
        ("wrist", cylinder_mesh(0.025, 0.0, 0.12, CYLINDER_SEGMENTS)),
        ("hand", centered_box(0.02, 0.02, 0.0, 0.12)),
        (
            "gripper",
            merge(&[
                centered_box(0.04, 0.012, 0.0, 0.012),
                box_mesh(Point3::new(-0.04, -0.01, 0.012), Point3::new(-0.028, 0.01, 0.06)),
                box_mesh(Point3::new(0.028, -0.01, 0.012), Point3::new(0.04, 0.01, 0.06)),
            ]),
        ),
    ];
    // (axis, offset from the parent link origin)
    let joints = [
        (Vector3::z_axis(), [0.0, 0.0, 0.1]),
        (Vector3::y_axis(), [0.0, 0.0, 0.38]),
        (Vector3::y_axis(), [0.0, 0.075, 0.35]),
        (Vector3::z_axis(), [0.0, 0.0, 0.2]),
        (Vector3::y_axis(), [0.0, 0.07, 0.12]),
        (Vector3::z_axis(), [0.0, 0.0, 0.12]),
    ];
    let joints = joints
        .into_iter()
        .enumerate()
        .map(|(i, (axis, xyz))| Joint {
            parent_link: i,
            axis,
            origin: Pose::from_translation(Vector3::from(xyz)),
        })
        .collect();
    let links: Vec<Link> = links
        .into_iter()
        .map(|(name, mesh)| Link::new(name, mesh).expect("non-empty mesh"))
        .collect();
    let mask = non_adjacent_pairs(links.len());
    RobotModel::new(DESK_ARM_NAME, joints, links, mask).expect("desk-arm is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let arm = desk_arm();
        assert_eq!(arm.dof(), 6);
        assert_eq!(arm.links().len(), 7);
        assert_eq!(arm.collision_mask().len(), 15);
        for l in arm.links() {
            let n = l.mesh.face_count();
            assert!((12..=96).contains(&n), "{} has {n} triangles", l.name);
        }
    }

    #[test]
    fn zero_configuration_is_free() {
        assert!(!desk_arm().self_collision(&[0.0; 6]).unwrap());
    }
}
