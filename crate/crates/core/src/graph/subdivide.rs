use super::{DummyVertex, Edge, EdgeId, GraphError, PlanarGraph, VertexId};
use crate::scalar::Scalar;

/// Splits edge `e` at parameter `t`, measured from its first endpoint.
///
/// Edge `e` keeps its id and becomes `u - m`; the far piece `m - v` is
/// appended. Conductances are `c / t` and `c / (1 - t)`, so the resistances
/// add up to `1 / c`. All other darts keep their ids and rotation positions.
pub fn subdivide_edge<S: Scalar>(
    g: &PlanarGraph<S>,
    e: EdgeId,
    t: S,
) -> Result<PlanarGraph<S>, GraphError> {
    subdivide_edges(g, vec![(e, t)]).map(|(g, _)| g)
}

/// Batch form of [`subdivide_edge`]; each edge may appear at most once.
/// Returns the new graph and the inserted vertices in input order.
pub(crate) fn subdivide_edges<S: Scalar>(
    g: &PlanarGraph<S>,
    cuts: Vec<(EdgeId, S)>,
) -> Result<(PlanarGraph<S>, Vec<VertexId>), GraphError> {
    let mut out = g.clone();
    let mut tails: Vec<VertexId> = (0..g.num_darts()).map(|d| g.tail(d)).collect();
    let mut rotation: Vec<Vec<usize>> = (0..g.num_vertices())
        .map(|v| g.rotation(v).to_vec())
        .collect();
    let mut inserted = Vec::with_capacity(cuts.len());
    for (e, t) in cuts {
        if e >= out.edges.len() {
            return Err(GraphError::EdgeOutOfRange(e));
        }
        if t <= S::zero() || t >= S::one() {
            return Err(GraphError::ParameterOutOfRange(t.to_string()));
        }
        let Edge { u, v, conductance } = out.edges[e].clone();
        let m = out.labels.len();
        let e2 = out.edges.len();
        out.labels.push(format!("{}@{}", out.edge_labels[e], m));
        out.edge_labels.push(format!("{}#{}", out.edge_labels[e], e2));
        out.edges[e] = Edge {
            u,
            v: m,
            conductance: conductance.clone() / t.clone(),
        };
        out.edges.push(Edge {
            u: m,
            v,
            conductance: conductance / (S::one() - t.clone()),
        });
        out.dummies.push(Some(DummyVertex {
            edge: out.edge_origin[e],
            ends: (u, v),
            t,
        }));
        out.edge_origin.push(out.edge_origin[e]);

        let (back, far, far_back) = (2 * e + 1, 2 * e2, 2 * e2 + 1);
        tails[back] = m;
        tails.push(m);
        tails.push(v);
        let slot = rotation[v]
            .iter()
            .position(|&d| d == back)
            .expect("reverse dart sits in the far endpoint's rotation");
        rotation[v][slot] = far_back;
        rotation.push(vec![back, far]);
        inserted.push(m);
    }
    out.rotation = super::RotationSystem::from_parts(tails, rotation);
    Ok((out, inserted))
}

/// Value at each dummy vertex interpolated linearly from its two ends,
/// `f(m) = f(u) + t (f(v) - f(u))`. Entries for original vertices are kept.
pub fn interpolate_dummies<S: Scalar>(g: &PlanarGraph<S>, values: &mut [S]) {
    for m in 0..g.num_vertices() {
        if let Some(d) = g.dummy(m) {
            let (u, v) = d.ends;
            values[m] = values[u].clone() + d.t.clone() * (values[v].clone() - values[u].clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn unit_edge_halved_gives_two_conductance_two_edges() {
        let g = families::path::<Rational>();
        let s = subdivide_edge(&g, 0, ratio(1, 2)).unwrap();
        assert_eq!(s.num_vertices(), 4);
        assert_eq!(s.conductance(0), &ratio(2, 1));
        assert_eq!(s.conductance(2), &ratio(2, 1));
        assert_eq!(s.euler_characteristic(), 2);
    }

    #[test]
    fn conductance_two_at_quarter() {
        let mut g = families::path::<Rational>();
        g.edges[1].conductance = ratio(2, 1);
        let s = subdivide_edge(&g, 1, ratio(1, 4)).unwrap();
        assert_eq!(s.conductance(1), &ratio(8, 1));
        assert_eq!(s.conductance(2), &ratio(8, 3));
        let dummy = s.dummy(3).unwrap();
        assert_eq!(dummy.edge, 1);
        assert_eq!(dummy.ends, (1, 2));
        assert_eq!(s.edge_origin(2), 1);
    }

    #[test]
    fn rejects_endpoint_parameters() {
        let g = families::path::<f64>();
        assert!(matches!(
            subdivide_edge(&g, 0, 1.0),
            Err(GraphError::ParameterOutOfRange(_))
        ));
        assert!(subdivide_edge(&g, 0, 0.0).is_err());
        assert!(matches!(
            subdivide_edge(&g, 7, 0.5),
            Err(GraphError::EdgeOutOfRange(7))
        ));
    }

    #[test]
    fn subdivision_keeps_faces_and_rotation_positions() {
        let g = families::chorded_square::<f64>();
        let s = subdivide_edge(&g, 4, 0.3).unwrap();
        assert_eq!(s.trace_faces().len(), g.trace_faces().len());
        for v in 0..g.num_vertices() {
            assert_eq!(s.degree(v), g.degree(v));
        }
        assert_eq!(s.rotation(4), &[9, 10]);
        assert_eq!(s.head(8), 4);
        assert_eq!(s.head(10), 2);
    }

    #[test]
    fn interpolation_at_dummies() {
        let g = families::path::<f64>();
        let s = subdivide_edge(&g, 1, 0.25).unwrap();
        let mut vals = vec![1.0, 0.5, 0.0, f64::NAN];
        interpolate_dummies(&s, &mut vals);
        assert_eq!(vals[3], 0.375);
    }
}
