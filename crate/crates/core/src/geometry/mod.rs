//! Triangle meshes, bounding volumes and exact mesh–mesh intersection.
//!
//! Everything here is `f64`. The pair query follows the usual two-phase
//! scheme: a bounding volume hierarchy over each mesh culls box pairs that
//! cannot touch, and the surviving leaf pairs go through an exact closed-set
//! triangle–triangle test.

mod aabb;
mod bvh;
mod collide;
pub mod io;
mod mesh;
mod pose;
mod triangle;

pub use aabb::{aabb_overlap, Aabb};
pub use bvh::{build_bvh, Bvh, BvhNode, NodeKind, MAX_LEAF_TRIANGLES};
pub use collide::{mesh_pair_collide, mesh_pair_collide_brute_force, PosedMesh};
pub use mesh::{box_mesh, cylinder_mesh, TriangleMesh};
pub use pose::Pose;
pub use triangle::{tri_tri_intersect, Triangle, DEGENERATE_AREA, PREDICATE_EPS};

pub use nalgebra::{Matrix3, Point3, Vector3};
