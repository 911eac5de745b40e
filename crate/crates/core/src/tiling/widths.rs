//! Circular width coordinates on dual vertices.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TilingError;
use crate::graph::{reverse, DartId, FaceId, Faces, PlanarGraph, RotationSystem, VertexId};
use crate::harmonic::HarmonicProfile;
use crate::scalar::Scalar;

/// The input network plus a virtual vertex joined to every boundary vertex
/// inside the face that contains them all. Virtual darts carry the flow
/// leaving the network at each boundary vertex, so every vertex other than
/// the root and the virtual vertex is balanced.
#[derive(Clone, Debug)]
pub struct Augmented<S> {
    pub rotation: RotationSystem,
    pub faces: Faces,
    /// Per dart of `rotation`; the first `2 |E|` entries are the network's.
    pub flow: Vec<S>,
    /// Heights, with the virtual vertex at height 0.
    pub heights: Vec<S>,
    pub infinity: VertexId,
    /// Virtual dart `b -> infinity` for each boundary vertex `b`.
    pub boundary_darts: Vec<(VertexId, DartId)>,
    pub zeta: FaceId,
}

/// Index of the face whose boundary walk visits every vertex of `boundary`;
/// ties go to the longest face, then the lowest index.
fn outer_face<S: Scalar>(
    g: &PlanarGraph<S>,
    faces: &Faces,
    boundary: &[VertexId],
) -> Result<FaceId, TilingError> {
    let mut mark = vec![usize::MAX; g.num_vertices()];
    let mut best: Option<FaceId> = None;
    for (f, cycle) in faces.cycles.iter().enumerate() {
        let mut hits = 0;
        for &d in cycle {
            let x = g.tail(d);
            if mark[x] != f {
                mark[x] = f;
                if boundary.binary_search(&x).is_ok() {
                    hits += 1;
                }
            }
        }
        if hits == boundary.len() && best.is_none_or(|b| faces.cycles[b].len() < cycle.len()) {
            best = Some(f);
        }
    }
    best.ok_or_else(|| TilingError::NotUniquelyAbsorbing {
        reason: "no face contains every boundary vertex".into(),
    })
}

pub fn augment<S: Scalar>(
    g: &PlanarGraph<S>,
    p: &HarmonicProfile<S>,
) -> Result<Augmented<S>, TilingError> {
    let mut boundary: Vec<VertexId> = g.sinks().to_vec();
    boundary.sort_unstable();
    if boundary.is_empty() {
        return Err(TilingError::NotUniquelyAbsorbing {
            reason: "the network has no boundary vertices".into(),
        });
    }
    let faces = g.trace_faces();
    let outer = outer_face(g, &faces, &boundary)?;
    let mut seen = vec![false; g.num_vertices()];
    let mut anchors = Vec::with_capacity(boundary.len());
    let mut order = Vec::with_capacity(boundary.len());
    for &d in &faces.cycles[outer] {
        let x = g.tail(d);
        if !seen[x] && boundary.binary_search(&x).is_ok() {
            seen[x] = true;
            anchors.push(d);
            order.push(x);
        }
    }
    let mut rotation = g.rotation_system().clone();
    let (infinity, hub_darts) = rotation.attach_star(&anchors);
    let mut flow = p.flow.clone();
    let mut boundary_darts = Vec::with_capacity(order.len());
    for (&b, &from_hub) in order.iter().zip(&hub_darts) {
        let out = p.divergence(g, b);
        let to_hub = reverse(from_hub);
        debug_assert_eq!(to_hub, flow.len());
        flow.push(-out.clone());
        flow.push(out);
        boundary_darts.push((b, to_hub));
    }
    let mut heights = p.h.clone();
    heights.push(S::zero());
    let faces = rotation.trace_faces();
    let zeta = rotation
        .rotation(g.root())
        .first()
        .map(|&d| faces.left(d))
        .unwrap_or(0);
    Ok(Augmented {
        rotation,
        faces,
        flow,
        heights,
        infinity,
        boundary_darts,
        zeta,
    })
}

/// How the dual spanning tree used for propagation is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeChoice {
    /// Breadth-first from `zeta` in dart order.
    Bfs,
    /// Randomised depth-first tree from a randomly chosen dual root.
    Random(u64),
}

/// Width of each dual vertex in `[0, 1)` with `w(zeta) = 0` (for
/// [`TreeChoice::Bfs`]) and `w(left(d)) = w(right(d)) + flow(d)` along tree
/// darts. Every other dart is checked to satisfy the same relation modulo 1
/// within `tolerance`.
pub fn assign_dual_widths<S: Scalar>(
    faces: &Faces,
    flow: &[S],
    zeta: FaceId,
    tolerance: &S,
    choice: TreeChoice,
) -> Result<Vec<S>, TilingError> {
    let nf = faces.len();
    let mut width: Vec<Option<S>> = vec![None; nf];
    match choice {
        TreeChoice::Bfs => {
            width[zeta] = Some(S::zero());
            let mut queue = VecDeque::from([zeta]);
            while let Some(f) = queue.pop_front() {
                for &d in &faces.cycles[f] {
                    // `d` has `f` on its left; step to the face on its right.
                    let g = faces.right(d);
                    if width[g].is_none() {
                        let wf = width[f].clone().expect("visited");
                        width[g] = Some((wf - flow[d].clone()).fract_unit());
                        queue.push_back(g);
                    }
                }
            }
        }
        TreeChoice::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = rng.random_range(0..nf);
            width[start] = Some(S::zero());
            let mut stack = vec![start];
            while let Some(f) = stack.pop() {
                let mut darts = faces.cycles[f].clone();
                darts.shuffle(&mut rng);
                for d in darts {
                    let g = faces.right(d);
                    if width[g].is_none() {
                        let wf = width[f].clone().expect("visited");
                        width[g] = Some((wf - flow[d].clone()).fract_unit());
                        stack.push(f);
                        stack.push(g);
                        break;
                    }
                }
            }
        }
    }
    let width: Vec<S> = width
        .into_iter()
        .map(|w| w.ok_or(TilingError::DisconnectedDual))
        .collect::<Result<_, _>>()?;
    for d in 0..flow.len() {
        let off = (width[faces.left(d)].clone() - width[faces.right(d)].clone() - flow[d].clone())
            .circular_offset();
        if off.abs() > *tolerance {
            return Err(TilingError::InconsistentFlow {
                dart: d,
                offset: off.to_f64(),
            });
        }
    }
    Ok(width)
}
