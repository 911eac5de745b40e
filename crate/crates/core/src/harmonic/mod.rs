//! Escape-probability heights, random-walk flow and their diagnostics.

mod escape;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DartId, GraphError, PlanarGraph, VertexId};
use crate::scalar::Scalar;

pub use escape::{escape_profile, EscapeOptions, EscapeReport};
pub use solver::{solve_dirichlet, DirichletSolution, SolverMethod, SolverOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("boundary has {got} entries, graph has {expected} vertices")]
    BoundaryLength { expected: usize, got: usize },
    #[error("boundary set is empty")]
    EmptyBoundary,
    #[error("singular system: vertex `{vertex}` cannot reach the boundary")]
    SingularSystem { vertex: String },
    #[error("solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("root has no sinks to escape to")]
    NoSinks,
    #[error("total outflow at the root is zero")]
    ZeroOutflow,
    #[error("transience not established: Cauchy gap {gap:e} at depth {depth}")]
    TransienceNotEstablished { gap: f64, depth: usize },
    #[error("depths must be strictly increasing and non-empty")]
    BadDepths,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMode {
    KilledAtSinks,
    ExhaustionApproximation,
}

/// Heights, flow and conductances of one network.
///
/// Conductances live here rather than on the graph so normalization can
/// rescale them without rebuilding the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicProfile<S> {
    pub h: Vec<S>,
    /// Per dart; `flow[d ^ 1] == -flow[d]`.
    pub flow: Vec<S>,
    pub conductance: Vec<S>,
    pub pi: Vec<S>,
    pub eta: S,
    pub mode: ProfileMode,
    /// Solver residual for killed profiles, Cauchy gap for exhaustions.
    pub residual: f64,
}

/// Boundary data `1` at the root and `0` at the sinks.
pub fn killed_boundary<S: Scalar>(g: &PlanarGraph<S>) -> Vec<Option<S>> {
    let mut b = vec![None; g.num_vertices()];
    for &s in g.sinks() {
        b[s] = Some(S::zero());
    }
    b[g.root()] = Some(S::one());
    b
}

/// Ohm's law: `flow(x -> y) = c(xy) (h(x) - h(y))`.
pub fn compute_flow<S: Scalar>(g: &PlanarGraph<S>, h: &[S]) -> Vec<S> {
    let mut flow = Vec::with_capacity(g.num_darts());
    for e in 0..g.num_edges() {
        let edge = g.edge(e);
        let f = edge.conductance.clone() * (h[edge.u].clone() - h[edge.v].clone());
        flow.push(f.clone());
        flow.push(-f);
    }
    flow
}

impl<S: Scalar> HarmonicProfile<S> {
    /// Builds a profile from heights using the graph's conductances.
    pub fn from_heights(g: &PlanarGraph<S>, h: Vec<S>, mode: ProfileMode, residual: f64) -> Self {
        let flow = compute_flow(g, &h);
        let conductance: Vec<S> = g.edges().iter().map(|e| e.conductance.clone()).collect();
        let pi = (0..g.num_vertices()).map(|v| g.pi(v)).collect();
        let eta = dart_sum(g, &flow, g.root());
        Self {
            h,
            flow,
            conductance,
            pi,
            eta,
            mode,
            residual,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.h.len()
    }

    /// `w*(x)`, the net flow out of `x`.
    pub fn divergence(&self, g: &PlanarGraph<S>, x: VertexId) -> S {
        dart_sum(g, &self.flow, x)
    }

    /// `Σ_e c(e) (h(u) - h(v))^2` with the profile's conductances.
    pub fn dirichlet_energy(&self, g: &PlanarGraph<S>) -> S {
        g.edges()
            .iter()
            .zip(&self.conductance)
            .fold(S::zero(), |acc, (e, c)| {
                let dh = self.h[e.u].clone() - self.h[e.v].clone();
                acc + c.clone() * dh.clone() * dh
            })
    }

    /// Rescales conductances, flow and `π` by `1 / eta`.
    pub fn normalized(&self) -> Result<Self, HarmonicError> {
        if self.eta <= S::zero() {
            return Err(HarmonicError::ZeroOutflow);
        }
        let k = S::one() / self.eta.clone();
        let scale = |v: &Vec<S>| v.iter().map(|x| x.clone() * k.clone()).collect();
        Ok(Self {
            h: self.h.clone(),
            flow: scale(&self.flow),
            conductance: scale(&self.conductance),
            pi: scale(&self.pi),
            eta: S::one(),
            mode: self.mode,
            residual: self.residual,
        })
    }

    /// Largest `|w*(x)|` over vertices that are neither the root nor in
    /// `boundary`.
    pub fn max_interior_divergence(&self, g: &PlanarGraph<S>, boundary: &[bool]) -> f64 {
        (0..g.num_vertices())
            .filter(|&v| v != g.root() && !boundary[v])
            .map(|v| self.divergence(g, v).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn flow_on(&self, d: DartId) -> &S {
        &self.flow[d]
    }
}

fn dart_sum<S: Scalar>(g: &PlanarGraph<S>, flow: &[S], x: VertexId) -> S {
    g.rotation(x)
        .iter()
        .fold(S::zero(), |acc, &d| acc + flow[d].clone())
}

/// Solves `h = 1` at the root, `0` at the sinks, harmonic elsewhere.
pub fn killed_profile<S: Scalar>(
    g: &PlanarGraph<S>,
    opts: &SolverOptions,
) -> Result<HarmonicProfile<S>, HarmonicError> {
    if g.sinks().is_empty() {
        return Err(HarmonicError::NoSinks);
    }
    let sol = solve_dirichlet(g, &killed_boundary(g), opts)?;
    Ok(HarmonicProfile::from_heights(
        g,
        sol.values,
        ProfileMode::KilledAtSinks,
        sol.residual,
    ))
}

pub fn normalize_flow<S: Scalar>(p: &HarmonicProfile<S>) -> Result<HarmonicProfile<S>, HarmonicError> {
    p.normalized()
}

pub fn divergence<S: Scalar>(p: &HarmonicProfile<S>, g: &PlanarGraph<S>, x: VertexId) -> S {
    p.divergence(g, x)
}

pub fn dirichlet_energy<S: Scalar>(p: &HarmonicProfile<S>, g: &PlanarGraph<S>) -> S {
    p.dirichlet_energy(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::scalar::{ratio, Rational};

    fn exact() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn path_flow_and_normalization() {
        let g = families::path::<Rational>();
        let p = killed_profile(&g, &exact()).unwrap();
        assert_eq!(p.flow[0], ratio(1, 2));
        assert_eq!(p.flow[2], ratio(1, 2));
        assert_eq!(p.flow[1], ratio(-1, 2));
        assert_eq!(p.eta, ratio(1, 2));
        assert_eq!(p.dirichlet_energy(&g), ratio(1, 2));
        let n = p.normalized().unwrap();
        assert_eq!(n.conductance, vec![ratio(2, 1), ratio(2, 1)]);
        assert_eq!(n.flow[0], ratio(1, 1));
        assert_eq!(n.dirichlet_energy(&g), ratio(1, 1));
        assert_eq!(n.normalized().unwrap(), n);
    }

    #[test]
    fn binary_tree_flow_halves_per_level() {
        let g = families::b_ary_tree::<Rational>(2, 5).unwrap();
        let p = killed_profile(&g, &exact()).unwrap().normalized().unwrap();
        let depth = families::depths(&g);
        assert_eq!(p.divergence(&g, g.root()), ratio(1, 1));
        assert_eq!(p.dirichlet_energy(&g), ratio(1, 1));
        for e in 0..g.num_edges() {
            let d = depth[g.edge(e).u];
            assert_eq!(p.flow[2 * e], ratio(1, 2 << d));
        }
        for &s in g.sinks() {
            assert_eq!(p.divergence(&g, s), ratio(-1, 32));
        }
    }

    #[test]
    fn interior_divergence_vanishes() {
        let g = families::hyperbolic::<f64>(5, 4, 3).unwrap();
        let p = killed_profile(&g, &SolverOptions::default()).unwrap();
        let mask = g.sink_mask();
        assert!(p.max_interior_divergence(&g, &mask) < 1e-9);
        let n = p.normalized().unwrap();
        assert!((n.divergence(&g, g.root()) - 1.0).abs() < 1e-9);
        assert!((n.dirichlet_energy(&g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_heights_carry_no_flow() {
        let g = families::triangle::<f64>();
        let flow = compute_flow(&g, &[0.5, 0.5, 0.0]);
        assert_eq!(flow[0], 0.0);
        assert_eq!(flow[1], 0.0);
    }

    #[test]
    fn zero_outflow_is_an_error() {
        let g = families::path::<f64>();
        let p = HarmonicProfile::from_heights(&g, vec![0.0; 3], ProfileMode::KilledAtSinks, 0.0);
        assert_eq!(p.normalized(), Err(HarmonicError::ZeroOutflow));
    }
}
