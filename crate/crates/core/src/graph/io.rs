//! `tiler-graph/1` JSON documents.
//!
//! ```json
//! {
//!   "schema": "tiler-graph/1",
//!   "vertices": ["o", "a", "t"],
//!   "edges": [{"id": "oa", "u": "o", "v": "a", "conductance": 1},
//!             {"id": "at", "u": "a", "v": "t", "conductance": "3/2"}],
//!   "rotation": {"o": ["oa"], "a": ["at", "oa"], "t": ["at"]},
//!   "root": "o",
//!   "sinks": ["t"]
//! }
//! ```
//!
//! Rotations list, counterclockwise, the edges leaving each vertex; since
//! loops are rejected, an edge id names the dart leaving that vertex.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Edge, GraphError, GraphKind, GraphParts, PlanarGraph};
use crate::scalar::Scalar;

pub const GRAPH_SCHEMA: &str = "tiler-graph/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexEntry {
    Id(String),
    Labeled { id: String, label: Option<String> },
}

impl VertexEntry {
    fn id(&self) -> &str {
        match self {
            VertexEntry::Id(id) | VertexEntry::Labeled { id, .. } => id,
        }
    }
}

/// A number or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub id: String,
    pub u: String,
    pub v: String,
    pub conductance: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub schema: String,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    pub rotation: BTreeMap<String, Vec<String>>,
    pub root: String,
    #[serde(default)]
    pub sinks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<GraphKind>,
}

/// Parses a decimal or `p/q` literal into `S`, exactly when `S` is exact
/// and the literal is a ratio of integers.
pub fn parse_number<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(S::from_f64(p as f64) / S::from_f64(q as f64));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Some(S::from_f64(n as f64));
    }
    let x: f64 = text.parse().ok()?;
    x.is_finite().then(|| S::from_f64(x))
}

fn number_to_scalar<S: Scalar>(n: &Number) -> Option<S> {
    match n {
        Number::Float(x) if x.is_finite() => Some(S::from_f64(*x)),
        Number::Float(_) => None,
        Number::Text(t) => parse_number(t),
    }
}

/// Exact types are written as `"p/q"` strings, floats as JSON numbers.
pub fn scalar_to_number<S: Scalar>(x: &S) -> Number {
    if S::EXACT {
        Number::Text(x.to_string())
    } else {
        Number::Float(x.to_f64())
    }
}

impl GraphDoc {
    pub fn into_graph<S: Scalar>(self) -> Result<PlanarGraph<S>, GraphError> {
        if self.schema != GRAPH_SCHEMA {
            return Err(GraphError::Schema {
                expected: GRAPH_SCHEMA.into(),
                found: self.schema,
            });
        }
        let labels: Vec<String> = self.vertices.iter().map(|v| v.id().to_string()).collect();
        let mut vindex = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if vindex.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let lookup = |edge: &str, name: &str| {
            vindex.get(name).copied().ok_or_else(|| GraphError::UnknownVertex {
                edge: edge.to_string(),
                vertex: name.to_string(),
            })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_labels = Vec::with_capacity(self.edges.len());
        let mut eindex = HashMap::new();
        for (e, entry) in self.edges.iter().enumerate() {
            if eindex.insert(entry.id.clone(), e).is_some() {
                return Err(GraphError::DuplicateEdge(entry.id.clone()));
            }
            let conductance = number_to_scalar::<S>(&entry.conductance).ok_or_else(|| {
                GraphError::BadConductance {
                    edge: entry.id.clone(),
                    value: format!("{:?}", entry.conductance),
                }
            })?;
            edges.push(Edge {
                u: lookup(&entry.id, &entry.u)?,
                v: lookup(&entry.id, &entry.v)?,
                conductance,
            });
            edge_labels.push(entry.id.clone());
        }
        let mut rotation = vec![Vec::new(); labels.len()];
        for (vname, eids) in &self.rotation {
            let v = *vindex
                .get(vname)
                .ok_or_else(|| GraphError::Parse(format!("rotation names unknown vertex `{vname}`")))?;
            for eid in eids {
                let unknown = || GraphError::UnknownDart {
                    vertex: vname.clone(),
                    dart: eid.clone(),
                };
                let e = *eindex.get(eid).ok_or_else(unknown)?;
                let dart = if edges[e].u == v {
                    2 * e
                } else if edges[e].v == v {
                    2 * e + 1
                } else {
                    return Err(unknown());
                };
                rotation[v].push(dart);
            }
        }
        for (v, l) in labels.iter().enumerate() {
            if !self.rotation.contains_key(l) && !edges.iter().all(|e| e.u != v && e.v != v) {
                return Err(GraphError::MissingRotation(l.clone()));
            }
        }
        let root = *vindex
            .get(&self.root)
            .ok_or_else(|| GraphError::UnknownRoot(self.root.clone()))?;
        let sinks = self
            .sinks
            .iter()
            .map(|s| vindex.get(s).copied().ok_or_else(|| GraphError::BadSink(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        PlanarGraph::from_parts(GraphParts {
            labels,
            edge_labels,
            edges,
            rotation,
            root,
            sinks,
            kind: self.kind.unwrap_or(GraphKind::FiniteWithSinks),
        })
    }

    pub fn from_graph<S: Scalar>(g: &PlanarGraph<S>) -> Self {
        let vertices = g.labels().iter().cloned().map(VertexEntry::Id).collect();
        let edges = (0..g.num_edges())
            .map(|e| {
                let edge = g.edge(e);
                EdgeEntry {
                    id: g.edge_label(e).to_string(),
                    u: g.label(edge.u).to_string(),
                    v: g.label(edge.v).to_string(),
                    conductance: scalar_to_number(&edge.conductance),
                }
            })
            .collect();
        let rotation = (0..g.num_vertices())
            .map(|v| {
                let darts = g
                    .rotation(v)
                    .iter()
                    .map(|&d| g.edge_label(d / 2).to_string())
                    .collect();
                (g.label(v).to_string(), darts)
            })
            .collect();
        GraphDoc {
            schema: GRAPH_SCHEMA.into(),
            vertices,
            edges,
            rotation,
            root: g.label(g.root()).to_string(),
            sinks: g.sinks().iter().map(|&s| g.label(s).to_string()).collect(),
            kind: Some(g.kind()),
        }
    }
}

pub fn graph_from_json<S: Scalar>(text: &str) -> Result<PlanarGraph<S>, GraphError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    doc.into_graph()
}

pub fn graph_to_json<S: Scalar>(g: &PlanarGraph<S>) -> String {
    serde_json::to_string_pretty(&GraphDoc::from_graph(g)).expect("graph documents serialize")
}
