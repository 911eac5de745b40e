use super::{subdivide_edges, GraphError, PlanarGraph, VertexId};
use crate::scalar::Scalar;

/// A graph cut along the level set `{h = level}`.
#[derive(Clone, Debug)]
pub struct LevelCut<S> {
    pub level: S,
    /// The input graph with every crossing edge subdivided at the level.
    pub graph: PlanarGraph<S>,
    /// Heights on `graph`, equal to `level` at every inserted vertex.
    pub heights: Vec<S>,
    /// Vertices at height exactly `level`.
    pub boundary: Vec<VertexId>,
    pub upper: Vec<bool>,
    pub lower: Vec<bool>,
}

/// Subdivides every edge whose endpoints lie strictly on opposite sides of
/// `level` at `t = (h(u) - level) / (h(u) - h(v))`.
pub fn cut_at_level<S: Scalar>(
    g: &PlanarGraph<S>,
    heights: &[S],
    level: S,
) -> Result<LevelCut<S>, GraphError> {
    if heights.len() != g.num_vertices() {
        return Err(GraphError::HeightLength {
            expected: g.num_vertices(),
            got: heights.len(),
        });
    }
    if level <= S::zero() || level >= S::one() {
        return Err(GraphError::LevelOutOfRange(level.to_string()));
    }
    if let Some(v) = heights.iter().position(|h| *h == level) {
        return Err(GraphError::LevelCollision {
            level: level.to_string(),
            vertex: g.label(v).to_string(),
        });
    }
    let mut cuts = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        let (hu, hv) = (&heights[edge.u], &heights[edge.v]);
        if (*hu > level) != (*hv > level) {
            let t = (hu.clone() - level.clone()) / (hu.clone() - hv.clone());
            cuts.push((e, t));
        }
    }
    let (graph, boundary) = subdivide_edges(g, cuts)?;
    let mut heights = heights.to_vec();
    heights.resize(graph.num_vertices(), level.clone());
    let upper = heights.iter().map(|h| *h >= level).collect();
    let lower = heights.iter().map(|h| *h <= level).collect();
    Ok(LevelCut {
        level,
        graph,
        heights,
        boundary,
        upper,
        lower,
    })
}

impl<S: Scalar> LevelCut<S> {
    /// The part at or above the level, rooted at the original root with the
    /// level vertices as sinks. Also returns new-to-cut vertex ids.
    pub fn upper_graph(&self) -> Result<(PlanarGraph<S>, Vec<VertexId>), GraphError> {
        self.graph
            .induced(&self.upper, self.graph.root(), &self.boundary)
    }

    pub fn upper_vertices(&self) -> Vec<VertexId> {
        (0..self.upper.len()).filter(|&v| self.upper[v]).collect()
    }

    pub fn lower_vertices(&self) -> Vec<VertexId> {
        (0..self.lower.len()).filter(|&v| self.lower[v]).collect()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.heights[v] == self.level
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::scalar::{ratio, Rational};

    fn tree_heights(g: &PlanarGraph<Rational>) -> Vec<Rational> {
        let mut h = vec![ratio(1, 1); g.num_vertices()];
        for e in 0..g.num_edges() {
            let edge = g.edge(e);
            h[edge.v] = h[edge.u].clone() / ratio(2, 1);
        }
        h
    }

    #[test]
    fn binary_tree_at_three_eighths_has_four_dummies() {
        let g = families::b_ary_tree::<Rational>(2, 4).unwrap();
        let h = tree_heights(&g);
        let cut = cut_at_level(&g, &h, ratio(3, 8)).unwrap();
        assert_eq!(cut.boundary.len(), 4);
        for &b in &cut.boundary {
            assert!(cut.graph.is_dummy(b));
            assert_eq!(cut.heights[b], ratio(3, 8));
            // (1/2 - 3/8) / (1/2 - 1/4)
            assert_eq!(cut.graph.dummy(b).unwrap().t, ratio(1, 2));
        }
        let (upper, _) = cut.upper_graph().unwrap();
        assert_eq!(upper.num_vertices(), 7);
        assert_eq!(upper.sinks().len(), 4);
    }

    #[test]
    fn level_just_below_one_keeps_only_root_and_stubs() {
        let g = families::b_ary_tree::<f64>(2, 3).unwrap();
        let h: Vec<f64> = (0..g.num_vertices())
            .map(|v| if v == 0 { 1.0 } else { 0.4 })
            .collect();
        let cut = cut_at_level(&g, &h, 0.999).unwrap();
        let (upper, _) = cut.upper_graph().unwrap();
        assert_eq!(upper.num_vertices(), 3);
        assert_eq!(upper.num_edges(), 2);
    }

    #[test]
    fn path_at_quarter_cuts_lower_edge_in_half() {
        let g = families::path::<Rational>();
        let h = vec![ratio(1, 1), ratio(1, 2), ratio(0, 1)];
        let cut = cut_at_level(&g, &h, ratio(1, 4)).unwrap();
        assert_eq!(cut.boundary, vec![3]);
        let d = cut.graph.dummy(3).unwrap();
        assert_eq!(d.edge, 1);
        assert_eq!(d.t, ratio(1, 2));
    }

    #[test]
    fn rejects_collisions_and_out_of_range_levels() {
        let g = families::path::<f64>();
        let h = vec![1.0, 0.5, 0.0];
        assert!(matches!(
            cut_at_level(&g, &h, 0.5),
            Err(GraphError::LevelCollision { .. })
        ));
        assert!(matches!(
            cut_at_level(&g, &h, 1.0),
            Err(GraphError::LevelOutOfRange(_))
        ));
    }

    #[test]
    fn upper_and_lower_overlap_exactly_in_boundary() {
        let g = families::b_ary_tree::<Rational>(2, 4).unwrap();
        let h = tree_heights(&g);
        let cut = cut_at_level(&g, &h, ratio(3, 16)).unwrap();
        for v in 0..cut.graph.num_vertices() {
            assert!(cut.upper[v] || cut.lower[v]);
            assert_eq!(cut.upper[v] && cut.lower[v], cut.is_boundary(v));
        }
        // Every edge lies entirely on one side.
        for e in cut.graph.edges() {
            let up = cut.upper[e.u] && cut.upper[e.v];
            let low = cut.lower[e.u] && cut.lower[e.v];
            assert!(up || low);
        }
    }
}
