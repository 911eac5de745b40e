//! Harmonic functions defined by boundary arcs.

use serde::{Deserialize, Serialize};

use super::{ArcSet, BoundaryError};
use crate::graph::{cut_at_level, GraphError, PlanarGraph, VertexId};
use crate::harmonic::{solve_dirichlet, SolverOptions};
use crate::scalar::Scalar;
use crate::tiling::Tiling;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpOptions {
    /// Required change between consecutive level solves at the probes.
    pub tolerance: f64,
    /// Levels `2^-1, ..., 2^-budget` are tried before the sinks.
    pub budget: usize,
    /// Vertices where consecutive solves are compared; empty means the root.
    pub probes: Vec<VertexId>,
    #[serde(skip)]
    pub solver: SolverOptions,
}

impl Default for SharpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            budget: 12,
            probes: Vec::new(),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpFunction {
    pub arcs: ArcSet,
    /// One value per vertex of the network.
    pub values: Vec<f64>,
    pub probes: Vec<VertexId>,
    /// Levels solved on, shallowest first; the last solve uses the sinks.
    pub levels: Vec<f64>,
    /// Sup change at the probes between consecutive solves.
    pub gaps: Vec<f64>,
    pub converged: bool,
}

impl SharpFunction {
    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    /// Largest change over the last refinement.
    pub fn gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(0.0)
    }
}

/// Interval `(start, width)` of each vertex.
pub(crate) fn intervals<S: Scalar>(t: &Tiling<S>) -> Vec<(f64, f64)> {
    t.vertices
        .iter()
        .map(|v| (v.start.to_f64(), v.width.to_f64()))
        .collect()
}

/// Vertices of the level set at `level` after cutting, with the interval
/// each projects to (the extent of the cut edge's rectangle) and the
/// interpolation data `(u, v, t)` of the cut.
pub struct LevelSet<S> {
    pub level: f64,
    pub cut: crate::graph::LevelCut<S>,
    pub intervals: Vec<(f64, f64)>,
    pub ends: Vec<(VertexId, VertexId, f64)>,
}

/// Cuts at `level`, nudging it down until it avoids every vertex height.
pub fn level_set<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    level: f64,
) -> Result<LevelSet<S>, BoundaryError> {
    let heights: Vec<S> = t.vertices.iter().map(|v| v.height.clone()).collect();
    let mut l = level;
    let cut = loop {
        match cut_at_level(g, &heights, S::from_f64(l)) {
            Err(GraphError::LevelCollision { .. }) => l *= 1.0 - 1e-9,
            other => break other?,
        }
    };
    let lv = S::from_f64(l);
    let crossing: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| (heights[e.u] > lv) != (heights[e.v] > lv))
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(crossing.len(), cut.boundary.len());
    let intervals = crossing
        .iter()
        .map(|&e| {
            let r = &t.rects[e];
            (r.start.to_f64(), r.width.to_f64())
        })
        .collect();
    let ends = crossing
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            let (hu, hv) = (heights[edge.u].to_f64(), heights[edge.v].to_f64());
            (edge.u, edge.v, (hu - l) / (hu - hv))
        })
        .collect();
    Ok(LevelSet {
        level: l,
        cut,
        intervals,
        ends,
    })
}

/// Two level sets `upper > lower`: the network cut at both, with the level
/// vertices of each and the intervals of the upper ones.
pub struct NestedLevels<S> {
    pub graph: PlanarGraph<S>,
    pub upper: Vec<VertexId>,
    pub upper_intervals: Vec<(f64, f64)>,
    pub lower: Vec<VertexId>,
}

pub fn nested_levels<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    upper: f64,
    lower: f64,
) -> Result<NestedLevels<S>, BoundaryError> {
    let ls = level_set(t, g, upper)?;
    let mut l = lower.min(ls.level * (1.0 - 1e-9));
    let cut = loop {
        match cut_at_level(&ls.cut.graph, &ls.cut.heights, S::from_f64(l)) {
            Err(GraphError::LevelCollision { .. }) => l *= 1.0 - 1e-9,
            other => break other?,
        }
    };
    Ok(NestedLevels {
        graph: cut.graph,
        upper: ls.cut.boundary,
        upper_intervals: ls.intervals,
        lower: cut.boundary,
    })
}

/// Harmonic values on the vertices at or above a level set, with boundary
/// data the share of each level-set interval inside `arcs`.
fn level_solve<S: Scalar>(
    ls: &LevelSet<S>,
    arcs: &ArcSet,
    n: usize,
    solver: &SolverOptions,
) -> Result<Vec<Option<f64>>, BoundaryError> {
    let (upper, old_of) = ls.cut.upper_graph()?;
    let first_dummy = n;
    let mut boundary: Vec<Option<S>> = vec![None; upper.num_vertices()];
    for (v, &ov) in old_of.iter().enumerate() {
        if ls.cut.is_boundary(ov) {
            let (s, w) = ls.intervals[ov - first_dummy];
            boundary[v] = Some(S::from_f64(arcs.fraction(s, w)));
        }
    }
    let sol = solve_dirichlet(&upper, &boundary, solver)?;
    let mut out = vec![None; n];
    for (v, &ov) in old_of.iter().enumerate() {
        if ov < n {
            out[ov] = Some(sol.values[v].to_f64().clamp(0.0, 1.0));
        }
    }
    Ok(out)
}

/// Values on the whole network with the sinks as boundary.
fn sink_solve<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    arcs: &ArcSet,
    solver: &SolverOptions,
) -> Result<Vec<f64>, BoundaryError> {
    let iv = intervals(t);
    let mut boundary: Vec<Option<S>> = vec![None; g.num_vertices()];
    for &s in g.sinks() {
        boundary[s] = Some(S::from_f64(arcs.fraction(iv[s].0, iv[s].1)));
    }
    let sol = solve_dirichlet(g, &boundary, solver)?;
    Ok(sol.values.iter().map(|v| v.to_f64().clamp(0.0, 1.0)).collect())
}

/// `s(v) = ν_v(arcs)`: solves on level sets at `2^-k` with the share of
/// each level interval inside `arcs` as boundary data until consecutive
/// solves agree at the probes, then on the sinks, whose values are
/// returned.
pub fn sharp_from_arc<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    arcs: &ArcSet,
    opts: &SharpOptions,
) -> Result<SharpFunction, BoundaryError> {
    if t.vertices.len() != g.num_vertices() {
        return Err(BoundaryError::Incompatible);
    }
    let n = g.num_vertices();
    let probes = if opts.probes.is_empty() {
        vec![g.root()]
    } else {
        opts.probes.clone()
    };
    let floor = g
        .sinks()
        .iter()
        .map(|&s| t.vertices[s].height.to_f64())
        .fold(0.0, f64::max);
    let mut levels = Vec::new();
    let mut gaps = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for k in 1..=opts.budget {
        let l = 0.5f64.powi(k as i32);
        if l <= floor + 1e-12 {
            break;
        }
        let ls = level_set(t, g, l)?;
        let vals = level_solve(&ls, arcs, n, &opts.solver)?;
        let at: Option<Vec<f64>> = probes.iter().map(|&p| vals[p]).collect();
        levels.push(ls.level);
        if let (Some(a), Some(b)) = (&at, &prev) {
            let gap = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            gaps.push(gap);
            if gap < opts.tolerance {
                prev = Some(a.clone());
                break;
            }
        }
        prev = at;
    }
    let values = sink_solve(t, g, arcs, &opts.solver)?;
    let last: Vec<f64> = probes.iter().map(|&p| values[p]).collect();
    let converged = match &prev {
        Some(b) => {
            let gap = last.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            gaps.push(gap);
            gap < opts.tolerance
        }
        None => true,
    };
    levels.push(floor);
    Ok(SharpFunction {
        arcs: arcs.clone(),
        values,
        probes,
        levels,
        gaps,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharpOp {
    Union,
    Intersection,
    Complement,
}

/// Combines arc-defined functions on their arcs and solves again.
pub fn combine_sharp<S: Scalar>(
    parts: &[&SharpFunction],
    op: SharpOp,
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    opts: &SharpOptions,
) -> Result<SharpFunction, BoundaryError> {
    let n = g.num_vertices();
    if parts.is_empty() || parts.iter().any(|p| p.values.len() != n) {
        return Err(BoundaryError::Incompatible);
    }
    let arcs = match op {
        SharpOp::Union => parts
            .iter()
            .fold(ArcSet::empty(), |acc, p| acc.union(&p.arcs)),
        SharpOp::Intersection => parts
            .iter()
            .fold(ArcSet::full(), |acc, p| acc.intersection(&p.arcs)),
        SharpOp::Complement => {
            if parts.len() != 1 {
                return Err(BoundaryError::Incompatible);
            }
            parts[0].arcs.complement()
        }
    };
    sharp_from_arc(t, g, &arcs, opts)
}

/// Largest `|s(x) - Σ_y p(x, y) s(y)|` over vertices that are neither the
/// root nor sinks.
pub fn harmonic_defect<S: Scalar>(g: &PlanarGraph<S>, values: &[f64]) -> f64 {
    let sink = g.sink_mask();
    (0..g.num_vertices())
        .filter(|&x| !sink[x] && g.degree(x) > 0)
        .map(|x| {
            let (mut num, mut den) = (0.0, 0.0);
            for &d in g.rotation(x) {
                let c = g.conductance(d / 2).to_f64();
                num += c * values[g.head(d)];
                den += c;
            }
            (values[x] - num / den).abs()
        })
        .fold(0.0, f64::max)
}
