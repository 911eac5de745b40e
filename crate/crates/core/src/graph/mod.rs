//! Rooted, conductance-weighted plane graphs.
//!
//! A [`PlanarGraph`] is immutable once built. Operations that change the
//! structure ([`subdivide_edge`], [`cut_at_level`]) return new graphs and keep
//! provenance so results can be mapped back onto the original edges.

mod dual;
pub mod families;
pub mod io;
mod level;
mod rotation;
mod subdivide;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use dual::{build_dual, DualGraph};
pub use level::{cut_at_level, LevelCut};
pub use rotation::{
    edge_of, forward_dart, reverse, DartId, EdgeId, FaceId, Faces, RotationSystem, VertexId,
};
pub use subdivide::{interpolate_dummies, subdivide_edge};
pub(crate) use subdivide::subdivide_edges;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("edge `{0}` is a loop")]
    Loop(String),
    #[error("edge `{edge}` has nonpositive conductance {value}")]
    NonPositiveConductance { edge: String, value: String },
    #[error("invalid conductance `{value}` on edge `{edge}`")]
    BadConductance { edge: String, value: String },
    #[error("rotation at `{vertex}` mentions unknown dart `{dart}`")]
    UnknownDart { vertex: String, dart: String },
    #[error("rotation at `{vertex}` is not a permutation of its outgoing darts")]
    BadRotation { vertex: String },
    #[error("rotation missing for vertex `{0}`")]
    MissingRotation(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
    #[error("invalid sink `{0}`")]
    BadSink(String),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(EdgeId),
    #[error("subdivision parameter must lie in (0, 1), got {0}")]
    ParameterOutOfRange(String),
    #[error("level must lie in (0, 1), got {0}")]
    LevelOutOfRange(String),
    #[error("level {level} coincides with the height of vertex `{vertex}`; perturb the level")]
    LevelCollision { level: String, vertex: String },
    #[error("height vector has {got} entries, graph has {expected} vertices")]
    HeightLength { expected: usize, got: usize },
    #[error("unsupported family parameters: {0}")]
    Family(String),
    #[error("malformed graph description: {0}")]
    Parse(String),
    #[error("schema mismatch: expected `{expected}`, found `{found}`")]
    Schema { expected: String, found: String },
}

/// Whether the graph is a complete finite network or a finite piece of an
/// infinite one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    FiniteWithSinks,
    ExhaustionLevel { depth: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge<S> {
    pub u: VertexId,
    pub v: VertexId,
    pub conductance: S,
}

/// Provenance of a vertex inserted by subdivision. The cut edge ran from
/// `ends.0` to `ends.1`; the fraction `t` of its resistance lies between
/// `ends.0` and the dummy. `edge` is the original edge it was cut from.
/// When a subgraph drops one of the ends, both ends point at the dummy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DummyVertex<S> {
    pub edge: EdgeId,
    pub ends: (VertexId, VertexId),
    pub t: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarGraph<S> {
    labels: Vec<String>,
    edge_labels: Vec<String>,
    edges: Vec<Edge<S>>,
    rotation: RotationSystem,
    root: VertexId,
    sinks: Vec<VertexId>,
    kind: GraphKind,
    dummies: Vec<Option<DummyVertex<S>>>,
    edge_origin: Vec<EdgeId>,
}

/// Raw, unvalidated graph description using index-based ids.
#[derive(Clone, Debug)]
pub struct GraphParts<S> {
    pub labels: Vec<String>,
    pub edge_labels: Vec<String>,
    pub edges: Vec<Edge<S>>,
    /// Per vertex, outgoing darts counterclockwise.
    pub rotation: Vec<Vec<DartId>>,
    pub root: VertexId,
    pub sinks: Vec<VertexId>,
    pub kind: GraphKind,
}

impl<S: Scalar> PlanarGraph<S> {
    /// Validates `parts` and builds the graph.
    pub fn from_parts(parts: GraphParts<S>) -> Result<Self, GraphError> {
        let n = parts.labels.len();
        let m = parts.edges.len();
        let edge_name = |e: usize| parts.edge_labels[e].clone();
        let mut seen = HashSet::with_capacity(n);
        for l in &parts.labels {
            if !seen.insert(l.as_str()) {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(m);
        for l in &parts.edge_labels {
            if !seen.insert(l.as_str()) {
                return Err(GraphError::DuplicateEdge(l.clone()));
            }
        }
        let mut tails = Vec::with_capacity(2 * m);
        for (e, edge) in parts.edges.iter().enumerate() {
            for end in [edge.u, edge.v] {
                if end >= n {
                    return Err(GraphError::UnknownVertex {
                        edge: edge_name(e),
                        vertex: end.to_string(),
                    });
                }
            }
            if edge.u == edge.v {
                return Err(GraphError::Loop(edge_name(e)));
            }
            if edge.conductance <= S::zero() {
                return Err(GraphError::NonPositiveConductance {
                    edge: edge_name(e),
                    value: edge.conductance.to_string(),
                });
            }
            tails.push(edge.u);
            tails.push(edge.v);
        }
        if parts.rotation.len() != n {
            return Err(GraphError::MissingRotation(
                parts.labels.get(parts.rotation.len()).cloned().unwrap_or_default(),
            ));
        }
        let mut placed = vec![false; 2 * m];
        for (v, darts) in parts.rotation.iter().enumerate() {
            for &d in darts {
                if d >= 2 * m || tails[d] != v {
                    return Err(GraphError::UnknownDart {
                        vertex: parts.labels[v].clone(),
                        dart: d.to_string(),
                    });
                }
                if placed[d] {
                    return Err(GraphError::BadRotation {
                        vertex: parts.labels[v].clone(),
                    });
                }
                placed[d] = true;
            }
        }
        if let Some(d) = placed.iter().position(|p| !p) {
            return Err(GraphError::BadRotation {
                vertex: parts.labels[tails[d]].clone(),
            });
        }
        if parts.root >= n {
            return Err(GraphError::UnknownRoot(parts.root.to_string()));
        }
        let mut sink_set = HashSet::new();
        for &s in &parts.sinks {
            if s >= n || s == parts.root || !sink_set.insert(s) {
                return Err(GraphError::BadSink(
                    parts.labels.get(s).cloned().unwrap_or_else(|| s.to_string()),
                ));
            }
        }
        let rotation = RotationSystem::from_parts(tails, parts.rotation);
        let graph = Self {
            dummies: vec![None; n],
            edge_origin: (0..m).collect(),
            labels: parts.labels,
            edge_labels: parts.edge_labels,
            edges: parts.edges,
            rotation,
            root: parts.root,
            sinks: parts.sinks,
            kind: parts.kind,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &d in self.rotation.rotation(x) {
                let y = self.rotation.head(d);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_darts(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn sinks(&self) -> &[VertexId] {
        &self.sinks
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edge_label(&self, e: EdgeId) -> &str {
        &self.edge_labels[e]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge<S> {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn conductance(&self, e: EdgeId) -> &S {
        &self.edges[e].conductance
    }

    pub fn rotation_system(&self) -> &RotationSystem {
        &self.rotation
    }

    pub fn rotation(&self, v: VertexId) -> &[DartId] {
        self.rotation.rotation(v)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation.degree(v)
    }

    #[inline]
    pub fn tail(&self, d: DartId) -> VertexId {
        self.rotation.tail(d)
    }

    #[inline]
    pub fn head(&self, d: DartId) -> VertexId {
        self.rotation.head(d)
    }

    /// Neighbours of `v` with the dart reaching each, in rotation order.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (DartId, VertexId)> + '_ {
        self.rotation
            .rotation(v)
            .iter()
            .map(move |&d| (d, self.rotation.head(d)))
    }

    /// `π_x`, the total conductance at `x`.
    pub fn pi(&self, x: VertexId) -> S {
        self.rotation
            .rotation(x)
            .iter()
            .fold(S::zero(), |acc, &d| acc + self.edges[edge_of(d)].conductance.clone())
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.sinks.contains(&v)
    }

    pub fn sink_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vertices()];
        for &s in &self.sinks {
            mask[s] = true;
        }
        mask
    }

    pub fn dummy(&self, v: VertexId) -> Option<&DummyVertex<S>> {
        self.dummies[v].as_ref()
    }

    pub fn is_dummy(&self, v: VertexId) -> bool {
        self.dummies[v].is_some()
    }

    /// Edge of the graph this edge was cut from (itself for original edges).
    pub fn edge_origin(&self, e: EdgeId) -> EdgeId {
        self.edge_origin[e]
    }

    pub fn trace_faces(&self) -> Faces {
        self.rotation.trace_faces()
    }

    /// `V - E + F`; equals 2 for every connected plane graph.
    pub fn euler_characteristic(&self) -> isize {
        let faces = self.trace_faces();
        let f = if self.num_edges() == 0 { 1 } else { faces.len() };
        self.num_vertices() as isize - self.num_edges() as isize + f as isize
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn with_sinks(&self, sinks: Vec<VertexId>) -> Result<Self, GraphError> {
        let mut set = HashSet::new();
        for &s in &sinks {
            if s >= self.num_vertices() || s == self.root || !set.insert(s) {
                return Err(GraphError::BadSink(s.to_string()));
            }
        }
        let mut g = self.clone();
        g.sinks = sinks;
        Ok(g)
    }

    pub fn with_root(&self, root: VertexId) -> Result<Self, GraphError> {
        if root >= self.num_vertices() || self.sinks.contains(&root) {
            return Err(GraphError::UnknownRoot(root.to_string()));
        }
        let mut g = self.clone();
        g.root = root;
        Ok(g)
    }

    /// Converts every conductance to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PlanarGraph<T> {
        PlanarGraph {
            labels: self.labels.clone(),
            edge_labels: self.edge_labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    u: e.u,
                    v: e.v,
                    conductance: f(&e.conductance),
                })
                .collect(),
            rotation: self.rotation.clone(),
            root: self.root,
            sinks: self.sinks.clone(),
            kind: self.kind,
            dummies: self
                .dummies
                .iter()
                .map(|d| {
                    d.as_ref().map(|d| DummyVertex {
                        edge: d.edge,
                        ends: d.ends,
                        t: f(&d.t),
                    })
                })
                .collect(),
            edge_origin: self.edge_origin.clone(),
        }
    }

    /// Subgraph induced by `keep`, re-indexed; returns the graph and the
    /// map from new vertex ids to old ones. `root` and `sinks` are old ids.
    pub fn induced(
        &self,
        keep: &[bool],
        root: VertexId,
        sinks: &[VertexId],
    ) -> Result<(Self, Vec<VertexId>), GraphError> {
        let mut new_id = vec![usize::MAX; self.num_vertices()];
        let mut old_of = Vec::new();
        for v in 0..self.num_vertices() {
            if keep[v] {
                new_id[v] = old_of.len();
                old_of.push(v);
            }
        }
        let mut edges = Vec::new();
        let mut edge_labels = Vec::new();
        let mut edge_origin = Vec::new();
        let mut new_dart = vec![usize::MAX; self.num_darts()];
        for (e, edge) in self.edges.iter().enumerate() {
            if keep[edge.u] && keep[edge.v] {
                let ne = edges.len();
                new_dart[2 * e] = 2 * ne;
                new_dart[2 * e + 1] = 2 * ne + 1;
                edges.push(Edge {
                    u: new_id[edge.u],
                    v: new_id[edge.v],
                    conductance: edge.conductance.clone(),
                });
                edge_labels.push(self.edge_labels[e].clone());
                edge_origin.push(self.edge_origin[e]);
            }
        }
        let rotation = old_of
            .iter()
            .map(|&v| {
                self.rotation(v)
                    .iter()
                    .filter(|&&d| new_dart[d] != usize::MAX)
                    .map(|&d| new_dart[d])
                    .collect()
            })
            .collect();
        let parts = GraphParts {
            labels: old_of.iter().map(|&v| self.labels[v].clone()).collect(),
            edge_labels,
            edges,
            rotation,
            root: new_id[root],
            sinks: sinks.iter().map(|&s| new_id[s]).collect(),
            kind: self.kind,
        };
        let mut g = Self::from_parts(parts)?;
        g.dummies = old_of
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                self.dummies[v].clone().map(|mut d| {
                    d.ends = match (new_id[d.ends.0], new_id[d.ends.1]) {
                        (a, b) if a != usize::MAX && b != usize::MAX => (a, b),
                        _ => (i, i),
                    };
                    d
                })
            })
            .collect();
        g.edge_origin = edge_origin;
        Ok((g, old_of))
    }
}

#[cfg(test)]
mod tests {
    use super::families;
    use super::*;

    fn parts_path() -> GraphParts<f64> {
        GraphParts {
            labels: vec!["o".into(), "a".into(), "t".into()],
            edge_labels: vec!["e0".into(), "e1".into()],
            edges: vec![
                Edge { u: 0, v: 1, conductance: 1.0 },
                Edge { u: 1, v: 2, conductance: 1.0 },
            ],
            rotation: vec![vec![0], vec![1, 2], vec![3]],
            root: 0,
            sinks: vec![2],
            kind: GraphKind::FiniteWithSinks,
        }
    }

    #[test]
    fn path_has_single_face_traced_through_both_darts() {
        let g = PlanarGraph::from_parts(parts_path()).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces.cycles[0].len(), 4);
        assert_eq!(g.euler_characteristic(), 2);
    }

    #[test]
    fn rejects_nonpositive_conductance() {
        let mut p = parts_path();
        p.edges[1].conductance = 0.0;
        assert!(matches!(
            PlanarGraph::from_parts(p),
            Err(GraphError::NonPositiveConductance { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_edge_ids() {
        let mut p = parts_path();
        p.edge_labels[1] = "e0".into();
        assert_eq!(
            PlanarGraph::from_parts(p),
            Err(GraphError::DuplicateEdge("e0".into()))
        );
    }

    #[test]
    fn rejects_rotation_with_foreign_dart() {
        let mut p = parts_path();
        p.rotation[0] = vec![0, 2];
        assert!(matches!(
            PlanarGraph::from_parts(p),
            Err(GraphError::UnknownDart { .. })
        ));
    }

    #[test]
    fn rejects_disconnected_graph() {
        let mut p = parts_path();
        p.labels.push("z".into());
        p.rotation.push(vec![]);
        assert_eq!(PlanarGraph::from_parts(p), Err(GraphError::Disconnected));
    }

    #[test]
    fn chorded_square_satisfies_euler() {
        let g = families::chorded_square::<f64>();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 3);
        let mut lens = faces.lengths();
        lens.sort();
        assert_eq!(lens, vec![3, 3, 4]);
        assert_eq!(g.euler_characteristic(), 2);
    }

    #[test]
    fn tree_has_exactly_one_face() {
        let g = families::b_ary_tree::<f64>(2, 5).unwrap();
        assert_eq!(g.trace_faces().len(), 1);
    }

    #[test]
    fn induced_subgraph_keeps_rotation_order() {
        let g = families::chorded_square::<f64>();
        let keep = vec![true, true, true, false];
        let (sub, old) = g.induced(&keep, 0, &[]).unwrap();
        assert_eq!(old, vec![0, 1, 2]);
        assert_eq!(sub.num_edges(), 3);
        assert_eq!(sub.euler_characteristic(), 2);
    }
}
