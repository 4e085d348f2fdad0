//! Serial-arm kinematics and the self-collision ground truth.

mod description;
mod desk_arm;

use std::f64::consts::PI;

use nalgebra::{Unit, Vector3};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    build_bvh, mesh_pair_collide_brute_force, Bvh, Pose, PosedMesh, TriangleMesh,
};

pub use description::{
    load_robot, parse_description, save_robot, JointDescription, LinkDescription,
    OriginDescription, RobotDescription,
};
pub use desk_arm::{desk_arm, DESK_ARM_NAME};

const AXIS_NORM_TOL: f64 = 1e-9;

/// Joint angles in radians, each in `[−π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig(Vec<f64>);

impl JointConfig {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(a) = angles.iter().find(|a| !(a.abs() <= PI)) {
            return Err(Error::InvalidArgument(format!(
                "joint angle {a} outside [-pi, pi]"
            )));
        }
        Ok(Self(angles))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for JointConfig {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Revolute joint `i`, connecting link `i` (parent) to link `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub parent_link: usize,
    pub axis: Unit<Vector3<f64>>,
    /// Fixed transform from the parent link frame to the joint frame.
    pub origin: Pose,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub mesh: TriangleMesh,
    pub bvh: Bvh,
}

impl Link {
    pub fn new(name: impl Into<String>, mesh: TriangleMesh) -> Result<Self> {
        let bvh = build_bvh(&mesh)?;
        Ok(Self {
            name: name.into(),
            mesh,
            bvh,
        })
    }
}

/// A serial chain of rigid links with triangle meshes.
#[derive(Debug, Clone)]
pub struct RobotModel {
    name: String,
    joints: Vec<Joint>,
    links: Vec<Link>,
    collision_mask: Vec<(usize, usize)>,
}

impl RobotModel {
    /// Checks the chain structure, axis norms and the collision mask.
    /// Mask pairs are normalized to `(low, high)`.
    pub fn new(
        name: impl Into<String>,
        joints: Vec<Joint>,
        links: Vec<Link>,
        collision_mask: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if links.len() != joints.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "{} joints need {} links, found {}",
                joints.len(),
                joints.len() + 1,
                links.len()
            )));
        }
        for (i, j) in joints.iter().enumerate() {
            if j.parent_link != i {
                return Err(Error::InvalidModel(format!(
                    "joint {i} must hang off link {i} (serial chain)"
                )));
            }
            if (j.axis.norm() - 1.0).abs() > AXIS_NORM_TOL {
                return Err(Error::InvalidModel(format!("joint {i} axis is not unit length")));
            }
            if !j.origin.is_rigid() {
                return Err(Error::InvalidModel(format!("joint {i} origin is not rigid")));
            }
        }
        let mut mask = Vec::with_capacity(collision_mask.len());
        for (a, b) in collision_mask {
            let (lo, hi) = (a.min(b), a.max(b));
            if hi >= links.len() {
                return Err(Error::InvalidModel(format!("mask pair ({a}, {b}) out of range")));
            }
            if hi - lo < 2 {
                return Err(Error::InvalidModel(format!(
                    "mask pair ({a}, {b}) is not a pair of distinct non-adjacent links"
                )));
            }
            if !mask.contains(&(lo, hi)) {
                mask.push((lo, hi));
            }
        }
        Ok(Self {
            name: name.into(),
            joints,
            links,
            collision_mask: mask,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn collision_mask(&self) -> &[(usize, usize)] {
        &self.collision_mask
    }

    /// Number of joints, i.e. the configuration dimension `d`.
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    /// Same robot with a different mask (validated as in [`RobotModel::new`]).
    pub fn with_collision_mask(&self, mask: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(self.name.clone(), self.joints.clone(), self.links.clone(), mask)
    }

    fn check_dims(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::dims(self.dof(), q.len()));
        }
        if !q.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite joint angle".into()));
        }
        Ok(())
    }

    /// World pose of every link; link 0 sits at the identity.
    ///
    /// `pose[k+1] = pose[k] ∘ origin[k] ∘ Rot(axis[k], q[k])`.
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vec<Pose>> {
        self.check_dims(q)?;
        let mut poses = Vec::with_capacity(self.links.len());
        let mut current = Pose::identity();
        poses.push(current);
        for (joint, &angle) in self.joints.iter().zip(q) {
            current = current
                .compose(&joint.origin)
                .compose(&Pose::from_axis_angle(&joint.axis, angle));
            poses.push(current);
        }
        Ok(poses)
    }

    /// True iff any masked link pair intersects at `q`.
    pub fn self_collision(&self, q: &[f64]) -> Result<bool> {
        let poses = self.forward_kinematics(q)?;
        let mut posed: Vec<Option<PosedMesh<'_>>> = vec![None; self.links.len()];
        // Root boxes first; most pairs are rejected here without touching
        // the triangles.
        let roots: Vec<_> = self
            .links
            .iter()
            .zip(&poses)
            .map(|(l, p)| l.bvh.root().aabb.transformed(p).inflated(1e-6))
            .collect();
        for &(a, b) in &self.collision_mask {
            if !roots[a].overlaps(&roots[b]) {
                continue;
            }
            for k in [a, b] {
                if posed[k].is_none() {
                    let link = &self.links[k];
                    posed[k] = Some(PosedMesh::new(&link.mesh, &link.bvh, &poses[k])?);
                }
            }
            let (pa, pb) = (posed[a].as_ref().unwrap(), posed[b].as_ref().unwrap());
            if pa.collides(pb) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Masked all-pairs triangle sweep with no culling.
    pub fn self_collision_brute_force(&self, q: &[f64]) -> Result<bool> {
        let poses = self.forward_kinematics(q)?;
        Ok(self.collision_mask.iter().any(|&(a, b)| {
            mesh_pair_collide_brute_force(
                &self.links[a].mesh,
                &poses[a],
                &self.links[b].mesh,
                &poses[b],
            )
        }))
    }

    /// SHA-256 over the geometric content (names, joints, meshes, mask).
    /// Independent of where the model was loaded from.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        // `+ 0.0` folds −0 into +0 so equal models hash equally.
        let mut f = |v: f64| h.update((v + 0.0).to_le_bytes());
        for j in &self.joints {
            j.axis.iter().for_each(|&v| f(v));
            j.origin.rotation.iter().for_each(|&v| f(v));
            j.origin.translation.iter().for_each(|&v| f(v));
        }
        for l in &self.links {
            for v in l.mesh.vertices() {
                v.iter().for_each(|&c| f(c));
            }
        }
        h.update(self.name.as_bytes());
        for l in &self.links {
            h.update((l.name.len() as u64).to_le_bytes());
            h.update(l.name.as_bytes());
            for face in l.mesh.faces() {
                face.iter().for_each(|&i| h.update((i as u64).to_le_bytes()));
            }
        }
        for &(a, b) in &self.collision_mask {
            h.update((a as u64).to_le_bytes());
            h.update((b as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Every pair `(i, j)` with `j ≥ i + 2`.
pub fn non_adjacent_pairs(links: usize) -> Vec<(usize, usize)> {
    (0..links)
        .flat_map(|i| (i + 2..links).map(move |j| (i, j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_mesh;
    use nalgebra::{Matrix4, Rotation3};
    use rand::{Rng, SeedableRng};

    fn cube_link(name: &str, lo: [f64; 3], hi: [f64; 3]) -> Link {
        Link::new(name, box_mesh(lo.into(), hi.into())).unwrap()
    }

    fn single_joint_chain() -> RobotModel {
        RobotModel::new(
            "one",
            vec![Joint {
                parent_link: 0,
                axis: Vector3::z_axis(),
                origin: Pose::identity(),
            }],
            vec![
                cube_link("a", [0.0; 3], [0.1; 3]),
                cube_link("b", [0.0; 3], [0.1; 3]),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn quarter_turn_maps_x_to_y() {
        let m = single_joint_chain();
        let poses = m.forward_kinematics(&[std::f64::consts::FRAC_PI_2]).unwrap();
        let y = poses[1].transform_vector(&Vector3::x());
        assert!((y - Vector3::y()).norm() < 1e-12);
    }

    #[test]
    fn zero_config_composes_origins() {
        let arm = desk_arm();
        let poses = arm.forward_kinematics(&[0.0; 6]).unwrap();
        let mut expected = Pose::identity();
        for (k, j) in arm.joints().iter().enumerate() {
            expected = expected.compose(&j.origin);
            assert!((poses[k + 1].rotation - expected.rotation).amax() < 1e-15);
            assert!((poses[k + 1].translation - expected.translation).amax() < 1e-15);
        }
    }

    fn homogeneous(p: &Pose) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&p.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&p.translation);
        m
    }

    #[test]
    fn fk_matches_homogeneous_matrix_chain() {
        let arm = desk_arm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let q: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
            let poses = arm.forward_kinematics(&q).unwrap();
            let mut t = Matrix4::identity();
            for (k, j) in arm.joints().iter().enumerate() {
                let rot = Rotation3::from_axis_angle(&j.axis, q[k]).to_homogeneous();
                t = t * homogeneous(&j.origin) * rot;
                assert!((t - homogeneous(&poses[k + 1])).amax() < 1e-12);
                assert!(poses[k + 1].is_rigid());
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let arm = desk_arm();
        assert!(matches!(
            arm.forward_kinematics(&[0.0; 5]),
            Err(Error::DimensionMismatch { expected: 6, found: 5 })
        ));
        assert!(arm.self_collision(&[0.0; 7]).is_err());
    }

    #[test]
    fn separated_chain_is_free() {
        // Links 0 and 2 one metre apart; only (0, 2) is tested.
        let joint = |x: f64| Joint {
            parent_link: 0,
            axis: Vector3::y_axis(),
            origin: Pose::from_translation(Vector3::new(x, 0.0, 0.0)),
        };
        let mut j1 = joint(0.5);
        j1.parent_link = 1;
        let m = RobotModel::new(
            "two",
            vec![joint(0.5), j1],
            vec![
                cube_link("a", [-0.1; 3], [0.1; 3]),
                cube_link("b", [-0.1; 3], [0.1; 3]),
                cube_link("c", [-0.1; 3], [0.1; 3]),
            ],
            vec![(0, 2)],
        )
        .unwrap();
        assert!(!m.self_collision(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn adjacent_pairs_rejected_from_mask() {
        let arm = desk_arm();
        assert!(arm.with_collision_mask(vec![(2, 3)]).is_err());
        assert!(arm.with_collision_mask(vec![(4, 4)]).is_err());
        assert!(arm.with_collision_mask(vec![(0, 9)]).is_err());
    }

    #[test]
    fn folded_arm_collides_and_checkers_agree() {
        let arm = desk_arm();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut found = None;
        for _ in 0..10_000 {
            let q: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
            if arm.self_collision_brute_force(&q).unwrap() {
                found = Some(q);
                break;
            }
        }
        let q = found.expect("some configuration collides");
        assert!(arm.self_collision(&q).unwrap());
    }

    #[test]
    fn mask_order_does_not_matter() {
        let arm = desk_arm();
        let mut reversed: Vec<_> = arm.collision_mask().iter().map(|&(a, b)| (b, a)).collect();
        reversed.reverse();
        let other = arm.with_collision_mask(reversed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let q: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
            assert_eq!(arm.self_collision(&q).unwrap(), other.self_collision(&q).unwrap());
        }
    }

    #[test]
    fn joint_config_range() {
        assert!(JointConfig::new(vec![PI, -PI, 0.0]).is_ok());
        assert!(JointConfig::new(vec![3.2]).is_err());
        assert!(JointConfig::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let arm = desk_arm();
        assert_eq!(arm.content_hash(), desk_arm().content_hash());
        let fewer = arm.with_collision_mask(vec![(0, 2)]).unwrap();
        assert_ne!(arm.content_hash(), fewer.content_hash());
    }
}
