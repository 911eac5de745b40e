//! Square tilings of the cylinder `R/Z x [0, 1]`.
//!
//! Edge `xy` with `h(x) > h(y)` becomes the rectangle between heights `h(y)`
//! and `h(x)` whose horizontal extent runs between the widths of the two
//! faces it separates. Its width is the flow and its aspect ratio the
//! (normalized) conductance.

mod audit;
mod svg;
mod widths;

use thiserror::Error;

use crate::graph::{DartId, EdgeId, FaceId, PlanarGraph, VertexId};
use crate::harmonic::{killed_profile, HarmonicError, HarmonicProfile, SolverOptions};
use crate::scalar::Scalar;

pub use audit::{audit_tiling, AuditOptions, TilingAudit};
pub use svg::{render_svg, SvgOptions};
pub use widths::{assign_dual_widths, augment, Augmented, TreeChoice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TilingError {
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error("not uniquely absorbing: {reason}")]
    NotUniquelyAbsorbing { reason: String },
    #[error("not uniquely absorbing / inconsistent flow: dual cycle through dart {dart} is off by {offset:e}")]
    InconsistentFlow { dart: DartId, offset: f64 },
    #[error("dual graph is disconnected")]
    DisconnectedDual,
}

/// Axis-aligned rectangle on the cylinder; `start` is circular in `[0, 1)`
/// and the extent `[start, start + width)` may wrap.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect<S> {
    pub start: S,
    pub width: S,
    pub low: S,
    pub high: S,
    /// Zero width or zero height.
    pub degenerate: bool,
}

impl<S: Scalar> Rect<S> {
    pub fn height(&self) -> S {
        self.high.clone() - self.low.clone()
    }

    pub fn area(&self) -> S {
        self.width.clone() * self.height()
    }
}

/// Horizontal segment of a vertex at its height.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexInterval<S> {
    pub start: S,
    pub width: S,
    pub height: S,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TilingOptions {
    /// Allowed failure of a dual cycle to close, modulo 1. Ignored for exact
    /// scalars, which must close exactly.
    pub cycle_tolerance: f64,
    pub tree: TreeChoice,
}

impl Default for TilingOptions {
    fn default() -> Self {
        Self {
            cycle_tolerance: 1e-9,
            tree: TreeChoice::Bfs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tiling<S> {
    /// One rectangle per edge of the network, by edge id.
    pub rects: Vec<Rect<S>>,
    /// Dart of each edge pointing down (non-negative flow).
    pub down: Vec<DartId>,
    /// `(upper, lower)` endpoints of each edge.
    pub ends: Vec<(VertexId, VertexId)>,
    /// Normalized conductance of each edge.
    pub conductance: Vec<S>,
    /// Rectangles below the boundary vertices, filling the part of the
    /// cylinder the network does not reach. Flat for killed networks.
    pub boundary_rects: Vec<(VertexId, Rect<S>)>,
    pub vertices: Vec<VertexInterval<S>>,
    pub root: VertexId,
    /// Widths of the faces of the augmented network.
    pub face_widths: Vec<S>,
    pub zeta: FaceId,
}

fn rect_for<S: Scalar>(aug: &Augmented<S>, widths: &[S], d: DartId) -> (DartId, Rect<S>) {
    let d = if aug.flow[d] >= S::zero() { d } else { d ^ 1 };
    let tail = aug.rotation.tail(d);
    let head = aug.rotation.head(d);
    let width = aug.flow[d].clone();
    let high = aug.heights[tail].clone();
    let low = aug.heights[head].clone();
    let degenerate = width == S::zero() || high == low;
    let rect = Rect {
        start: widths[aug.faces.right(d)].clone(),
        width,
        low,
        high,
        degenerate,
    };
    (d, rect)
}

/// Places one rectangle per edge from dual widths.
pub fn place_rectangles<S: Scalar>(
    g: &PlanarGraph<S>,
    p: &HarmonicProfile<S>,
    aug: &Augmented<S>,
    widths: &[S],
) -> Tiling<S> {
    let m = g.num_edges();
    let mut rects = Vec::with_capacity(m);
    let mut down = Vec::with_capacity(m);
    let mut ends = Vec::with_capacity(m);
    for e in 0..m {
        let (d, r) = rect_for(aug, widths, 2 * e);
        rects.push(r);
        down.push(d);
        ends.push((g.tail(d), g.head(d)));
    }
    let boundary_rects = aug
        .boundary_darts
        .iter()
        .map(|&(b, d)| (b, rect_for(aug, widths, d).1))
        .collect();
    let mut tiling = Tiling {
        rects,
        down,
        ends,
        conductance: p.conductance.clone(),
        boundary_rects,
        vertices: Vec::new(),
        root: g.root(),
        face_widths: widths.to_vec(),
        zeta: aug.zeta,
    };
    tiling.vertices = vertex_intervals(&tiling, &p.h);
    tiling
}

/// Circular union of the rectangles touching each vertex; a vertex covering
/// the whole circle starts at 0. The width is the flow leaving the vertex.
fn vertex_intervals<S: Scalar>(t: &Tiling<S>, h: &[S]) -> Vec<VertexInterval<S>> {
    let n = h.len();
    let mut incident: Vec<Vec<(S, S)>> = vec![Vec::new(); n];
    let mut outflow = vec![S::zero(); n];
    let mut push = |x: VertexId, r: &Rect<S>| {
        if r.width > S::zero() {
            incident[x].push((r.start.clone(), r.width.clone()));
        }
    };
    for (r, &(up, low)) in t.rects.iter().zip(&t.ends) {
        push(up, r);
        push(low, r);
        outflow[up] = outflow[up].clone() + r.width.clone();
    }
    for (b, r) in &t.boundary_rects {
        push(*b, r);
        outflow[*b] = outflow[*b].clone() + r.width.clone();
    }
    let eps = S::epsilon_for(1e-12);
    (0..n)
        .map(|x| {
            let arcs = &incident[x];
            // An arc start that no other arc reaches from the left.
            let covered_before = |s: &S| {
                arcs.iter().any(|(a, w)| {
                    let rel = (s.clone() - a.clone()).fract_unit();
                    *w >= S::one() - eps.clone() || (rel > eps && rel <= w.clone() + eps.clone())
                })
            };
            let start = arcs
                .iter()
                .map(|(s, _)| s)
                .find(|s| !covered_before(s))
                .cloned()
                .unwrap_or_else(S::zero);
            VertexInterval {
                start,
                width: outflow[x].clone(),
                height: h[x].clone(),
            }
        })
        .collect()
}

/// Tiles `g` from a profile, normalizing it first.
pub fn tile_profile<S: Scalar>(
    g: &PlanarGraph<S>,
    p: &HarmonicProfile<S>,
    opts: &TilingOptions,
) -> Result<Tiling<S>, TilingError> {
    let p = p.normalized()?;
    let aug = augment(g, &p)?;
    let tol = S::epsilon_for(opts.cycle_tolerance);
    let widths = assign_dual_widths(&aug.faces, &aug.flow, aug.zeta, &tol, opts.tree)?;
    Ok(place_rectangles(g, &p, &aug, &widths))
}

/// Solves the walk killed at the sinks, normalizes and tiles.
pub fn tile_killed<S: Scalar>(
    g: &PlanarGraph<S>,
    solver: &SolverOptions,
    opts: &TilingOptions,
) -> Result<(HarmonicProfile<S>, Tiling<S>), TilingError> {
    let p = killed_profile(g, solver)?.normalized()?;
    let t = tile_profile(g, &p, opts)?;
    Ok((p, t))
}

impl<S: Scalar> Tiling<S> {
    pub fn num_edges(&self) -> usize {
        self.rects.len()
    }

    /// Rectangles per original edge of a subdivided graph: pieces of one
    /// edge share start and width and are stacked, so they merge into one.
    pub fn collapsed(&self, g: &PlanarGraph<S>) -> Vec<Rect<S>> {
        let originals = (0..g.num_edges()).filter(|&e| g.edge_origin(e) == e).count();
        let mut out: Vec<Option<Rect<S>>> = vec![None; originals];
        for e in 0..g.num_edges() {
            let o: EdgeId = g.edge_origin(e);
            let r = &self.rects[e];
            out[o] = Some(match out[o].take() {
                None => r.clone(),
                Some(acc) => Rect {
                    start: acc.start,
                    width: acc.width,
                    low: S::min_of(acc.low, r.low.clone()),
                    high: S::max_of(acc.high, r.high.clone()),
                    degenerate: acc.degenerate && r.degenerate,
                },
            });
        }
        out.into_iter().map(|r| r.expect("every original edge has a piece")).collect()
    }

    /// Whether the circular extent of `r` contains `x`.
    pub fn extent_contains(r: &Rect<S>, x: &S) -> bool {
        let rel = (x.clone() - r.start.clone()).fract_unit();
        rel < r.width || r.width >= S::one()
    }
}
