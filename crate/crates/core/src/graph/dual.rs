use super::{reverse, DartId, FaceId, Faces, PlanarGraph, VertexId};
use crate::scalar::Scalar;

/// Plane dual of a [`PlanarGraph`].
///
/// Dual darts share ids with primal darts: the dual of `d` runs from the face
/// on the left of `d` to the face on its right, so it crosses `d` from left to
/// right. The dual of the dual of `d` is `reverse(d)`, so the composed
/// bijection `primal_dart ∘ dual_dart` is the identity and duality commutes
/// with reversal.
#[derive(Clone, Debug)]
pub struct DualGraph {
    faces: Faces,
    zeta: FaceId,
}

pub fn build_dual<S: Scalar>(g: &PlanarGraph<S>) -> DualGraph {
    let faces = g.trace_faces();
    let zeta = zeta_face(g, &faces);
    DualGraph { faces, zeta }
}

/// Face on the left of the first dart in the root's rotation.
pub(crate) fn zeta_face<S: Scalar>(g: &PlanarGraph<S>, faces: &Faces) -> FaceId {
    g.rotation(g.root())
        .first()
        .map(|&d| faces.left(d))
        .unwrap_or(0)
}

impl DualGraph {
    pub fn num_vertices(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.faces.face_of.len() / 2
    }

    pub fn faces(&self) -> &Faces {
        &self.faces
    }

    /// Reference dual vertex.
    pub fn zeta(&self) -> FaceId {
        self.zeta
    }

    pub fn dual_dart(&self, d: DartId) -> DartId {
        d
    }

    pub fn primal_dart(&self, dual: DartId) -> DartId {
        dual
    }

    pub fn tail(&self, dual: DartId) -> FaceId {
        self.faces.left(dual)
    }

    pub fn head(&self, dual: DartId) -> FaceId {
        self.faces.right(dual)
    }

    /// Dual darts leaving dual vertex `f`.
    pub fn out_darts(&self, f: FaceId) -> &[DartId] {
        &self.faces.cycles[f]
    }

    pub fn degree(&self, f: FaceId) -> usize {
        self.faces.cycles[f].len()
    }

    pub fn is_loop(&self, dual: DartId) -> bool {
        self.tail(dual) == self.head(dual)
    }

    /// The dual of the dual dart `dual`, as a primal dart.
    pub fn double_dual(&self, dual: DartId) -> DartId {
        reverse(dual)
    }

    /// Primal vertices around dual vertex `f`, in traversal order.
    pub fn face_vertices<S: Scalar>(&self, g: &PlanarGraph<S>, f: FaceId) -> Vec<VertexId> {
        self.faces.cycles[f].iter().map(|&d| g.tail(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{families, edge_of};

    #[test]
    fn triangle_dual_is_a_theta_graph() {
        let g = families::triangle::<f64>();
        let dual = build_dual(&g);
        assert_eq!(dual.num_vertices(), 2);
        assert_eq!(dual.num_edges(), 3);
        for d in 0..g.num_darts() {
            assert_ne!(dual.tail(d), dual.head(d));
        }
    }

    #[test]
    fn tree_dual_is_a_bouquet_of_loops() {
        let g = families::b_ary_tree::<f64>(2, 3).unwrap();
        let dual = build_dual(&g);
        assert_eq!(dual.num_vertices(), 1);
        assert_eq!(dual.num_edges(), g.num_edges());
        assert!((0..g.num_darts()).all(|d| dual.is_loop(d)));
    }

    #[test]
    fn chorded_square_dual_degrees() {
        let g = families::chorded_square::<f64>();
        let dual = build_dual(&g);
        assert_eq!(dual.num_vertices(), 3);
        assert_eq!(dual.num_edges(), 5);
        let mut degrees: Vec<_> = (0..3).map(|f| dual.degree(f)).collect();
        degrees.sort();
        assert_eq!(degrees, vec![3, 3, 4]);
    }

    #[test]
    fn dart_bijection_round_trips_and_commutes_with_reversal() {
        let g = families::chorded_square::<f64>();
        let dual = build_dual(&g);
        for d in 0..g.num_darts() {
            assert_eq!(dual.primal_dart(dual.dual_dart(d)), d);
            assert_eq!(dual.dual_dart(reverse(d)), reverse(dual.dual_dart(d)));
            assert_eq!(dual.tail(reverse(d)), dual.head(d));
            assert_eq!(edge_of(dual.double_dual(d)), edge_of(d));
        }
    }

    #[test]
    fn duals_of_darts_entering_a_vertex_form_a_directed_cycle() {
        // Duals of the darts entering vertex 2 chain into a cycle around it.
        let g = families::chorded_square::<f64>();
        let dual = build_dual(&g);
        let into: Vec<_> = g.rotation(2).iter().map(|&d| reverse(d)).collect();
        for (i, &d) in into.iter().enumerate() {
            let next = into[(i + 1) % into.len()];
            assert_eq!(dual.head(d), dual.tail(next));
        }
    }
}
