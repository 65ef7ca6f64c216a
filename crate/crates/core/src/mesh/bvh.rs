//! Bounding-volume hierarchy for nearest-triangle queries.
//!
//! Results agree exactly with [`MeshIndex::brute_force`]: both paths call the
//! same per-triangle distance routine and the same candidate ordering, and the
//! tree only prunes nodes strictly farther than the incumbent.

use alloc::vec::Vec;

use super::HullMesh;
use crate::geom::{Aabb, Vec3};

const LEAF_SIZE: usize = 4;

/// Result of a nearest-surface query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceQuery {
    /// Distance to the surface, negative inside a closed mesh.
    pub distance: f64,
    /// Outward normal of the nearest face.
    pub normal: Vec3,
    pub face: usize,
    pub closest: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    /// Cosine between `p - closest` and the face normal; breaks exact ties so
    /// that a point off a shared edge or vertex picks the best-facing face.
    alignment: f64,
    face: usize,
    closest: Vec3,
}

impl Candidate {
    fn better_than(&self, o: &Candidate) -> bool {
        if self.dist2 != o.dist2 {
            return self.dist2 < o.dist2;
        }
        if self.alignment != o.alignment {
            return self.alignment > o.alignment;
        }
        self.face < o.face
    }
}

enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Spatial index over the faces of a [`HullMesh`].
pub struct MeshIndex<'m> {
    mesh: &'m HullMesh,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl<'m> MeshIndex<'m> {
    pub fn new(mesh: &'m HullMesh) -> Self {
        let mut order: Vec<usize> = (0..mesh.face_count()).collect();
        let boxes: Vec<Aabb> = (0..mesh.face_count())
            .map(|f| {
                let mut b = Aabb::EMPTY;
                for v in mesh.face_vertices(f) {
                    b.grow(v);
                }
                b
            })
            .collect();
        let mut nodes = Vec::new();
        let n = order.len();
        build(&mut nodes, &mut order, &boxes, mesh, 0, n);
        Self { mesh, nodes, order }
    }

    pub fn mesh(&self) -> &HullMesh {
        self.mesh
    }

    /// Signed distance from `p` to the mesh, accelerated by the tree.
    pub fn signed_distance(&self, p: Vec3) -> DistanceQuery {
        let mut best: Option<Candidate> = None;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if let Some(b) = &best {
                if node.bounds().distance_squared(p) > b.dist2 {
                    continue;
                }
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &f in &self.order[start..end] {
                        let c = self.candidate(p, f);
                        if best.as_ref().is_none_or(|b| c.better_than(b)) {
                            best = Some(c);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bounds().distance_squared(p);
                    let dr = self.nodes[right].bounds().distance_squared(p);
                    // visit the nearer child first
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        self.finish(p, best.expect("mesh has at least one face"))
    }

    /// Reference query scanning every face.
    pub fn brute_force(&self, p: Vec3) -> DistanceQuery {
        let mut best = self.candidate(p, 0);
        for f in 1..self.mesh.face_count() {
            let c = self.candidate(p, f);
            if c.better_than(&best) {
                best = c;
            }
        }
        self.finish(p, best)
    }

    fn candidate(&self, p: Vec3, face: usize) -> Candidate {
        let [a, b, c] = self.mesh.face_vertices(face);
        let closest = closest_point_on_triangle(p, a, b, c);
        let d = p - closest;
        let dist2 = d.norm_squared();
        let alignment = if dist2 > 0.0 {
            d.dot(self.mesh.face_geometry()[face].normal) / libm::sqrt(dist2)
        } else {
            0.0
        };
        Candidate {
            dist2,
            alignment,
            face,
            closest,
        }
    }

    fn finish(&self, p: Vec3, c: Candidate) -> DistanceQuery {
        let normal = self.mesh.face_geometry()[c.face].normal;
        let dist = libm::sqrt(c.dist2);
        let sign = if (p - c.closest).dot(normal) < 0.0 { -1.0 } else { 1.0 };
        DistanceQuery {
            distance: sign * dist,
            normal,
            face: c.face,
            closest: c.closest,
        }
    }
}

fn build(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    boxes: &[Aabb],
    mesh: &HullMesh,
    start: usize,
    end: usize,
) -> usize {
    let mut bounds = Aabb::EMPTY;
    for &f in &order[start..end] {
        bounds = bounds.union(boxes[f]);
    }
    let idx = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return idx;
    }
    let mut cb = Aabb::EMPTY;
    for &f in &order[start..end] {
        cb.grow(mesh.face_geometry()[f].centroid);
    }
    let e = cb.extent();
    let axis = if e.x >= e.y && e.x >= e.z {
        0
    } else if e.y >= e.z {
        1
    } else {
        2
    };
    let slice = &mut order[start..end];
    slice.sort_by(|&a, &b| {
        let ca = mesh.face_geometry()[a].centroid[axis];
        let cb = mesh.face_geometry()[b].centroid[axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let mid = start + (end - start) / 2;
    // placeholder, patched once children exist
    nodes.push(Node::Leaf { bounds, start, end });
    let left = build(nodes, order, boxes, mesh, start, mid);
    let right = build(nodes, order, boxes, mesh, mid, end);
    nodes[idx] = Node::Inner {
        bounds,
        left,
        right,
    };
    idx
}

/// Closest point to `p` on triangle `abc` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, unit_cube};
    use rand::Rng;

    #[test]
    fn point_above_cube() {
        let cube = unit_cube();
        let q = cube.index().signed_distance(Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(q.distance, 1.0);
        assert_eq!(q.normal, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn vertex_has_zero_distance() {
        let cube = unit_cube();
        let q = cube.index().signed_distance(Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(q.distance, 0.0);
    }

    #[test]
    fn inside_points_are_negative() {
        let cube = unit_cube();
        let q = cube.index().signed_distance(Vec3::new(0.5, 0.5, 0.4));
        assert!((q.distance + 0.4).abs() < 1e-15);
        assert_eq!(q.normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn tree_matches_brute_force() {
        let sphere = icosphere(1.0, 3);
        let idx = sphere.index();
        let mut rng = crate::rng::stream(11, "sdf");
        for _ in 0..2000 {
            let p = Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let fast = idx.signed_distance(p);
            let slow = idx.brute_force(p);
            assert_eq!(fast, slow);
            assert!((fast.distance.abs() - (p.norm() - 1.0).abs()).abs() < 0.02);
        }
    }
}
