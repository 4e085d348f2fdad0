use std::cmp::Ordering;

use super::aabb::Aabb;
use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

/// Leaves hold at most this many triangles.
pub const MAX_LEAF_TRIANGLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Internal { left: usize, right: usize },
    /// Range into [`Bvh::triangle_order`].
    Leaf { start: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhNode {
    pub aabb: Aabb,
    pub kind: NodeKind,
}

/// Binary bounding volume hierarchy over the faces of one mesh, in the
/// mesh's local frame. Node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    triangle_order: Vec<usize>,
}

impl Bvh {
    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    /// Permutation of face indices; leaves reference contiguous ranges of it.
    pub fn triangle_order(&self) -> &[usize] {
        &self.triangle_order
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_order.len()
    }

    pub fn leaf_triangles(&self, node: &BvhNode) -> &[usize] {
        match node.kind {
            NodeKind::Leaf { start, count } => &self.triangle_order[start..start + count],
            NodeKind::Internal { .. } => &[],
        }
    }

    pub fn depth(&self) -> usize {
        fn go(bvh: &Bvh, i: usize) -> usize {
            match bvh.nodes[i].kind {
                NodeKind::Leaf { .. } => 1,
                NodeKind::Internal { left, right } => 1 + go(bvh, left).max(go(bvh, right)),
            }
        }
        go(self, 0)
    }
}

/// Median split of triangle centroids along the longest axis of their
/// bounds; equal coordinates order by face index. Deterministic.
pub fn build_bvh(mesh: &TriangleMesh) -> Result<Bvh> {
    let n = mesh.face_count();
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    let boxes: Vec<Aabb> = mesh.triangles().map(|t| t.aabb()).collect();
    let centroids: Vec<_> = mesh.triangles().map(|t| t.centroid()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut nodes = Vec::with_capacity(2 * n / MAX_LEAF_TRIANGLES + 1);

    // Explicit stack of (node slot, start, end).
    nodes.push(placeholder());
    let mut stack = vec![(0usize, 0usize, n)];
    while let Some((slot, start, end)) = stack.pop() {
        let slice = &mut order[start..end];
        let aabb = slice
            .iter()
            .fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i]));
        if slice.len() <= MAX_LEAF_TRIANGLES {
            nodes[slot] = BvhNode {
                aabb,
                kind: NodeKind::Leaf {
                    start,
                    count: end - start,
                },
            };
            continue;
        }
        let centroid_box = Aabb::from_points(slice.iter().map(|&i| &centroids[i]));
        let axis = centroid_box.longest_axis();
        slice.sort_unstable_by(|&a, &b| {
            centroids[a][axis]
                .partial_cmp(&centroids[b][axis])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mid = start + slice.len() / 2;
        let left = nodes.len();
        nodes.push(placeholder());
        let right = nodes.len();
        nodes.push(placeholder());
        nodes[slot] = BvhNode {
            aabb,
            kind: NodeKind::Internal { left, right },
        };
        stack.push((right, mid, end));
        stack.push((left, start, mid));
    }
    Ok(Bvh {
        nodes,
        triangle_order: order,
    })
}

fn placeholder() -> BvhNode {
    BvhNode {
        aabb: Aabb::empty(),
        kind: NodeKind::Leaf { start: 0, count: 0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Triangle;
    use nalgebra::Point3;
    use rand::{Rng, SeedableRng};

    fn random_mesh(n: usize, seed: u64) -> TriangleMesh {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = || Point3::new(rng.random(), rng.random(), rng.random::<f64>());
        let tris: Vec<Triangle> = (0..n)
            .map(|_| {
                let c = p();
                Triangle::new(c, c + (p() - c) * 0.1, c + (p() - c) * 0.1)
            })
            .collect();
        TriangleMesh::from_triangles(&tris).unwrap()
    }

    fn check_invariants(mesh: &TriangleMesh, bvh: &Bvh) {
        let mut seen = vec![0usize; mesh.face_count()];
        for node in bvh.nodes() {
            match node.kind {
                NodeKind::Leaf { count, .. } => {
                    assert!(count >= 1 && count <= MAX_LEAF_TRIANGLES);
                    for &t in bvh.leaf_triangles(node) {
                        seen[t] += 1;
                        assert!(node.aabb.contains(&mesh.triangle(t).aabb()));
                    }
                }
                NodeKind::Internal { left, right } => {
                    assert!(node.aabb.contains(&bvh.nodes()[left].aabb));
                    assert!(node.aabb.contains(&bvh.nodes()[right].aabb));
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "coverage {seen:?}");
        assert_eq!(bvh.root().aabb, mesh.aabb());
        assert!(bvh.depth() <= 64);
    }

    #[test]
    fn single_triangle_is_one_leaf() {
        let mesh = random_mesh(1, 3);
        let bvh = build_bvh(&mesh).unwrap();
        assert_eq!(bvh.nodes().len(), 1);
        assert_eq!(bvh.root().aabb, mesh.triangle(0).aabb());
    }

    #[test]
    fn hundred_triangles_covered_once() {
        let mesh = random_mesh(100, 11);
        let bvh = build_bvh(&mesh).unwrap();
        check_invariants(&mesh, &bvh);
    }

    #[test]
    fn construction_is_deterministic() {
        let mesh = random_mesh(257, 5);
        assert_eq!(build_bvh(&mesh).unwrap(), build_bvh(&mesh).unwrap());
    }

    #[test]
    fn empty_mesh_rejected() {
        let mesh = TriangleMesh::new(vec![], vec![]).unwrap();
        assert!(matches!(build_bvh(&mesh), Err(Error::EmptyMesh)));
    }

    proptest::proptest! {
        #[test]
        fn invariants_hold(n in 1usize..300, seed in 0u64..1000) {
            let mesh = random_mesh(n, seed);
            let bvh = build_bvh(&mesh).unwrap();
            check_invariants(&mesh, &bvh);
        }
    }
}
