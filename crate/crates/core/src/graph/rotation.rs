//! Combinatorial embeddings: darts, rotations and face tracing.
//!
//! Edge `e` owns darts `2e` (first endpoint to second) and `2e + 1`. The
//! rotation at a vertex lists its outgoing darts counterclockwise.
//!
//! Faces are traced with the face on the left of each dart: the successor of
//! `u -> v` is `v -> w`, where `v -> w` is the clockwise neighbour of `v -> u`
//! in the rotation at `v` (its predecessor in counterclockwise order).

use serde::{Deserialize, Serialize};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type DartId = usize;
pub type FaceId = usize;

#[inline]
pub fn reverse(d: DartId) -> DartId {
    d ^ 1
}

#[inline]
pub fn edge_of(d: DartId) -> EdgeId {
    d >> 1
}

#[inline]
pub fn forward_dart(e: EdgeId) -> DartId {
    e << 1
}

/// A rotation system over an arbitrary dart set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSystem {
    tails: Vec<VertexId>,
    rotation: Vec<Vec<DartId>>,
    position: Vec<usize>,
}

impl RotationSystem {
    /// `tails[d]` is the vertex dart `d` leaves; `rotation[v]` must be a
    /// permutation of the darts with tail `v`. Callers validate that.
    pub(crate) fn from_parts(tails: Vec<VertexId>, rotation: Vec<Vec<DartId>>) -> Self {
        let mut position = vec![usize::MAX; tails.len()];
        for darts in &rotation {
            for (i, &d) in darts.iter().enumerate() {
                position[d] = i;
            }
        }
        Self {
            tails,
            rotation,
            position,
        }
    }

    pub fn num_darts(&self) -> usize {
        self.tails.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    #[inline]
    pub fn tail(&self, d: DartId) -> VertexId {
        self.tails[d]
    }

    #[inline]
    pub fn head(&self, d: DartId) -> VertexId {
        self.tails[reverse(d)]
    }

    pub fn rotation(&self, v: VertexId) -> &[DartId] {
        &self.rotation[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation[v].len()
    }

    /// Counterclockwise neighbour of `d` around its tail.
    pub fn next_ccw(&self, d: DartId) -> DartId {
        let rot = &self.rotation[self.tails[d]];
        rot[(self.position[d] + 1) % rot.len()]
    }

    /// Clockwise neighbour of `d` around its tail.
    pub fn next_cw(&self, d: DartId) -> DartId {
        let rot = &self.rotation[self.tails[d]];
        rot[(self.position[d] + rot.len() - 1) % rot.len()]
    }

    /// Next dart along the face on the left of `d`.
    #[inline]
    pub fn face_successor(&self, d: DartId) -> DartId {
        self.next_cw(reverse(d))
    }

    pub fn trace_faces(&self) -> Faces {
        let mut face_of = vec![usize::MAX; self.tails.len()];
        let mut cycles = Vec::new();
        for start in 0..self.tails.len() {
            if face_of[start] != usize::MAX || self.position[start] == usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = Vec::new();
            let mut d = start;
            loop {
                face_of[d] = id;
                cycle.push(d);
                d = self.face_successor(d);
                if d == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Faces { cycles, face_of }
    }

    /// Inserts a new vertex joined to `anchors` by new darts.
    ///
    /// Each anchor is a dart `a` leaving an existing vertex `x`; the new dart
    /// `x -> new` is placed immediately counterclockwise of `a`, i.e. inside
    /// the face on the left of `a`. The new vertex's rotation follows
    /// `anchors` in the given order, so anchoring every corner of one face in
    /// traversal order embeds the star inside that face. Returns the new
    /// vertex and, per anchor, the dart leaving the new vertex.
    pub(crate) fn attach_star(&mut self, anchors: &[DartId]) -> (VertexId, Vec<DartId>) {
        let hub = self.rotation.len();
        self.rotation.push(Vec::with_capacity(anchors.len()));
        let mut outgoing = Vec::with_capacity(anchors.len());
        for &a in anchors {
            let x = self.tails[a];
            let to_hub = self.tails.len();
            let from_hub = to_hub + 1;
            self.tails.push(x);
            self.tails.push(hub);
            let pos = self.rotation[x]
                .iter()
                .position(|&d| d == a)
                .expect("anchor dart is in its tail's rotation");
            self.rotation[x].insert(pos + 1, to_hub);
            self.rotation[hub].push(from_hub);
            outgoing.push(from_hub);
        }
        self.position = vec![usize::MAX; self.tails.len()];
        for darts in &self.rotation {
            for (i, &d) in darts.iter().enumerate() {
                self.position[d] = i;
            }
        }
        (hub, outgoing)
    }
}

/// Face cycles of a rotation system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Faces {
    /// Darts of each face, in traversal order.
    pub cycles: Vec<Vec<DartId>>,
    /// Face on the left of each dart.
    pub face_of: Vec<FaceId>,
}

impl Faces {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn left(&self, d: DartId) -> FaceId {
        self.face_of[d]
    }

    pub fn right(&self, d: DartId) -> FaceId {
        self.face_of[reverse(d)]
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> RotationSystem {
        // edges 0:(0,1) 1:(1,2) 2:(2,0)
        let tails = vec![0, 1, 1, 2, 2, 0];
        let rotation = vec![vec![0, 5], vec![2, 1], vec![4, 3]];
        RotationSystem::from_parts(tails, rotation)
    }

    #[test]
    fn triangle_has_two_faces_of_length_three() {
        let faces = triangle().trace_faces();
        assert_eq!(faces.len(), 2);
        assert_eq!(faces.lengths(), vec![3, 3]);
    }

    #[test]
    fn left_and_right_faces_of_a_dart_differ_on_a_cycle() {
        let faces = triangle().trace_faces();
        for d in 0..6 {
            assert_ne!(faces.left(d), faces.right(d));
        }
    }

    #[test]
    fn attach_star_keeps_euler_characteristic() {
        let mut rs = triangle();
        let faces = rs.trace_faces();
        let anchors = faces.cycles[1].clone();
        rs.attach_star(&anchors);
        let faces = rs.trace_faces();
        let (v, e) = (rs.num_vertices(), rs.num_darts() / 2);
        assert_eq!(v + faces.len(), e + 2);
    }
}
