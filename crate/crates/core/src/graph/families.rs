//! Built-in graph families. Infinite graphs are materialized to a requested
//! depth; vertex and edge ids of a shallower truncation are a prefix of those
//! of a deeper one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DartId, Edge, GraphError, GraphKind, GraphParts, PlanarGraph, VertexId};
use crate::scalar::Scalar;

/// Incremental builder that tracks rotations as darts are created.
struct Builder<S> {
    labels: Vec<String>,
    edges: Vec<Edge<S>>,
}

impl<S: Scalar> Builder<S> {
    fn new() -> Self {
        Self {
            labels: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn vertex(&mut self, label: String) -> VertexId {
        self.labels.push(label);
        self.labels.len() - 1
    }

    /// Returns the dart `u -> v`; its reverse is `dart ^ 1`.
    fn edge(&mut self, u: VertexId, v: VertexId, c: S) -> DartId {
        self.edges.push(Edge { u, v, conductance: c });
        2 * (self.edges.len() - 1)
    }

    fn finish(
        self,
        rotation: Vec<Vec<DartId>>,
        root: VertexId,
        sinks: Vec<VertexId>,
        kind: GraphKind,
    ) -> Result<PlanarGraph<S>, GraphError> {
        let edge_labels = (0..self.edges.len()).map(|e| format!("e{e}")).collect();
        PlanarGraph::from_parts(GraphParts {
            labels: self.labels,
            edge_labels,
            edges: self.edges,
            rotation,
            root,
            sinks,
            kind,
        })
    }
}

/// Path `o - a - t` with unit conductances and sink `t`.
pub fn path<S: Scalar>() -> PlanarGraph<S> {
    let mut b = Builder::new();
    let (o, a, t) = (b.vertex("o".into()), b.vertex("a".into()), b.vertex("t".into()));
    let oa = b.edge(o, a, S::one());
    let at = b.edge(a, t, S::one());
    b.finish(
        vec![vec![oa], vec![at, oa ^ 1], vec![at ^ 1]],
        o,
        vec![t],
        GraphKind::FiniteWithSinks,
    )
    .expect("path is valid")
}

/// Unit triangle rooted at `0` with sink `2`.
pub fn triangle<S: Scalar>() -> PlanarGraph<S> {
    let mut b = Builder::new();
    let v: Vec<_> = (0..3).map(|i| b.vertex(i.to_string())).collect();
    let d01 = b.edge(v[0], v[1], S::one());
    let d12 = b.edge(v[1], v[2], S::one());
    let d20 = b.edge(v[2], v[0], S::one());
    b.finish(
        vec![vec![d01, d20 ^ 1], vec![d12, d01 ^ 1], vec![d20, d12 ^ 1]],
        v[0],
        vec![v[2]],
        GraphKind::FiniteWithSinks,
    )
    .expect("triangle is valid")
}

/// Unit square `0 1 2 3` (counterclockwise) with chord `0 - 2`, rooted at `0`
/// with sinks `1` and `3`.
pub fn chorded_square<S: Scalar>() -> PlanarGraph<S> {
    chorded_square_with(S::one())
}

/// [`chorded_square`] with the chord's conductance set to `chord`.
pub fn chorded_square_with<S: Scalar>(chord: S) -> PlanarGraph<S> {
    let mut b = Builder::new();
    let v: Vec<_> = (0..4).map(|i| b.vertex(i.to_string())).collect();
    let d01 = b.edge(v[0], v[1], S::one());
    let d12 = b.edge(v[1], v[2], S::one());
    let d23 = b.edge(v[2], v[3], S::one());
    let d30 = b.edge(v[3], v[0], S::one());
    let d02 = b.edge(v[0], v[2], chord);
    let rotation = vec![
        vec![d01, d02, d30 ^ 1],
        vec![d12, d01 ^ 1],
        vec![d23, d02 ^ 1, d12 ^ 1],
        vec![d23 ^ 1, d30],
    ];
    b.finish(rotation, v[0], vec![v[1], v[3]], GraphKind::FiniteWithSinks)
        .expect("chorded square is valid")
}

fn tree_with<S: Scalar>(
    branching: usize,
    depth: usize,
    mut conductance: impl FnMut(usize) -> S,
) -> Result<PlanarGraph<S>, GraphError> {
    if !(2..=36).contains(&branching) {
        return Err(GraphError::Family(format!(
            "tree branching must be in 2..=36, got {branching}"
        )));
    }
    let mut b = Builder::new();
    let root = b.vertex("o".into());
    let mut rotation: Vec<Vec<DartId>> = vec![Vec::new()];
    let mut layer = vec![root];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(layer.len() * branching);
        for &p in &layer {
            for c in 0..branching {
                let digit = char::from_digit(c as u32, 36).expect("digit below 36");
                let label = format!("{}{}", b.labels[p], digit);
                let child = b.vertex(label);
                let e = b.edges.len();
                let d = b.edge(p, child, conductance(e));
                rotation[p].push(d);
                rotation.push(vec![d ^ 1]);
                next.push(child);
            }
        }
        layer = next;
    }
    let sinks = if depth == 0 { Vec::new() } else { layer };
    b.finish(rotation, root, sinks, GraphKind::ExhaustionLevel { depth })
}

/// The `b`-ary tree rooted at `o` truncated at `depth`, unit conductances,
/// with the depth-`depth` leaves as sinks. Each child's rotation starts at
/// its parent; children follow in counterclockwise order.
pub fn b_ary_tree<S: Scalar>(branching: usize, depth: usize) -> Result<PlanarGraph<S>, GraphError> {
    tree_with(branching, depth, |_| S::one())
}

/// Binary tree whose edge `e` has conductance `k / 64` with `k` drawn
/// uniformly from `32..=128` by a generator keyed on `(seed, e)`. The values
/// are dyadic, hence exact in every scalar type, and stable across depths.
pub fn perturbed_tree<S: Scalar>(seed: u64, depth: usize) -> Result<PlanarGraph<S>, GraphError> {
    tree_with(2, depth, |e| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(e as u64);
        let k: u32 = rng.random_range(32..=128);
        S::from_f64(k as f64 / 64.0)
    })
}

/// Truncation of the `{p, q}` tessellation (regular `p`-gons, `q` at each
/// vertex) grown in `layers` rings around the root, unit conductances. The
/// outermost ring is the sink set.
pub fn hyperbolic<S: Scalar>(p: usize, q: usize, layers: usize) -> Result<PlanarGraph<S>, GraphError> {
    if p < 4 || q < 3 || layers == 0 || (p - 2) * (q - 2) <= 4 {
        return Err(GraphError::Family(format!(
            "hyperbolic tessellation needs p >= 4, q >= 3, 1/p + 1/q < 1/2 and at least one layer; got p={p} q={q} layers={layers}"
        )));
    }

    #[derive(Default, Clone)]
    struct Slots {
        next: Option<DartId>,
        prev: Option<DartId>,
        inner: Vec<DartId>,
        outer: Vec<DartId>,
    }

    let mut b: Builder<S> = Builder::new();
    let mut slots: Vec<Slots> = Vec::new();
    fn add<S: Scalar>(b: &mut Builder<S>, slots: &mut Vec<Slots>, label: String) -> VertexId {
        slots.push(Slots::default());
        b.vertex(label)
    }
    let root = add(&mut b, &mut slots, "o".into());

    // Outward edges of the current ring as (position in ring, dart), in
    // counterclockwise order.
    let mut ring: Vec<VertexId> = vec![root];
    let mut outs: Vec<(usize, DartId)> = Vec::new();
    for _ in 0..q {
        let y = add(&mut b, &mut slots, String::new());
        let d = b.edge(root, y, S::one());
        slots[root].outer.push(d);
        slots[y].inner.push(d ^ 1);
        outs.push((0, d));
    }

    for layer in 1..=layers {
        let k = ring.len();
        let mut next_ring = Vec::new();
        for j in 0..outs.len() {
            let (a, da) = outs[j];
            let (bpos, _) = outs[(j + 1) % outs.len()];
            let r = if k == 1 || (a == bpos && j + 1 < outs.len()) {
                1
            } else if a == bpos {
                k + 1
            } else {
                (bpos + k - a) % k + 1
            };
            let fresh = (p as isize) - (r as isize) - 2;
            if fresh < 0 {
                return Err(GraphError::Family(format!(
                    "{{{p},{q}}} needs a face spanning {r} ring vertices, which this construction cannot close"
                )));
            }
            next_ring.push(b.head_of(da));
            for _ in 0..fresh {
                let w = add(&mut b, &mut slots, String::new());
                next_ring.push(w);
            }
        }
        for i in 0..next_ring.len() {
            let (x, y) = (next_ring[i], next_ring[(i + 1) % next_ring.len()]);
            let d = b.edge(x, y, S::one());
            slots[x].next = Some(d);
            slots[y].prev = Some(d ^ 1);
        }
        ring = next_ring;
        if layer == layers {
            break;
        }
        outs.clear();
        for (pos, &x) in ring.iter().enumerate() {
            let used = slots[x].inner.len() + 2;
            if used > q {
                return Err(GraphError::Family(format!(
                    "ring vertex with degree {used} exceeds q={q}"
                )));
            }
            for _ in used..q {
                let y = add(&mut b, &mut slots, String::new());
                let d = b.edge(x, y, S::one());
                slots[x].outer.push(d);
                slots[y].inner.push(d ^ 1);
                outs.push((pos, d));
            }
        }
        if outs.len() < 2 {
            return Err(GraphError::Family(format!("{{{p},{q}}} ring stops growing")));
        }
    }
    for (i, l) in b.labels.iter_mut().enumerate() {
        if l.is_empty() {
            *l = format!("v{i}");
        }
    }
    let rotation = slots
        .into_iter()
        .map(|s| {
            let mut r = Vec::new();
            r.extend(s.next);
            r.extend(s.inner);
            r.extend(s.prev);
            r.extend(s.outer);
            r
        })
        .collect();
    b.finish(rotation, root, ring, GraphKind::ExhaustionLevel { depth: layers })
}

impl<S> Builder<S> {
    fn head_of(&self, d: DartId) -> VertexId {
        let e = &self.edges[d / 2];
        if d % 2 == 0 {
            e.v
        } else {
            e.u
        }
    }
}

/// Square grid on `[-r, r]^2` rooted at the centre, with the box boundary as
/// sinks. Used as an exhaustion of a recurrent graph.
pub fn square_box<S: Scalar>(r: usize) -> Result<PlanarGraph<S>, GraphError> {
    if r == 0 {
        return Err(GraphError::Family("square box needs radius >= 1".into()));
    }
    let side = 2 * r + 1;
    let id = |i: usize, j: usize| j * side + i;
    let mut b = Builder::new();
    for j in 0..side {
        for i in 0..side {
            b.vertex(format!("{},{}", i as isize - r as isize, j as isize - r as isize));
        }
    }
    let mut east = vec![None; side * side];
    let mut north = vec![None; side * side];
    for j in 0..side {
        for i in 0..side {
            if i + 1 < side {
                east[id(i, j)] = Some(b.edge(id(i, j), id(i + 1, j), S::one()));
            }
            if j + 1 < side {
                north[id(i, j)] = Some(b.edge(id(i, j), id(i, j + 1), S::one()));
            }
        }
    }
    let mut rotation = Vec::with_capacity(side * side);
    let mut sinks = Vec::new();
    for j in 0..side {
        for i in 0..side {
            let v = id(i, j);
            let mut rot = Vec::with_capacity(4);
            rot.extend(east[v]);
            rot.extend(north[v]);
            if i > 0 {
                rot.extend(east[id(i - 1, j)].map(|d| d ^ 1));
            }
            if j > 0 {
                rot.extend(north[id(i, j - 1)].map(|d| d ^ 1));
            }
            rotation.push(rot);
            if i == 0 || j == 0 || i + 1 == side || j + 1 == side {
                sinks.push(v);
            }
        }
    }
    b.finish(
        rotation,
        id(r, r),
        sinks,
        GraphKind::ExhaustionLevel { depth: r },
    )
}

/// Depth of each vertex of a tree family (distance from the root).
pub fn depths<S: Scalar>(g: &PlanarGraph<S>) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.num_vertices()];
    depth[g.root()] = 0;
    let mut queue = std::collections::VecDeque::from([g.root()]);
    while let Some(x) = queue.pop_front() {
        for (_, y) in g.neighbors(x) {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_counts() {
        let g = b_ary_tree::<f64>(2, 10).unwrap();
        assert_eq!(g.num_vertices(), (1 << 11) - 1);
        assert_eq!(g.num_edges(), (1 << 11) - 2);
        assert_eq!(g.sinks().len(), 1 << 10);
        assert_eq!(g.trace_faces().len(), 1);
    }

    #[test]
    fn truncations_are_prefixes() {
        let small = perturbed_tree::<f64>(7, 4).unwrap();
        let big = perturbed_tree::<f64>(7, 6).unwrap();
        for e in 0..small.num_edges() {
            assert_eq!(small.edge(e), big.edge(e));
        }
        for v in 0..small.num_vertices() {
            assert_eq!(small.label(v), big.label(v));
        }
    }

    #[test]
    fn perturbed_conductances_are_dyadic_in_range() {
        let g = perturbed_tree::<f64>(1, 6).unwrap();
        let mut distinct = std::collections::BTreeSet::new();
        for e in g.edges() {
            let k = e.conductance * 64.0;
            assert_eq!(k.fract(), 0.0);
            assert!((32.0..=128.0).contains(&k));
            distinct.insert(k as u32);
        }
        assert!(distinct.len() > 20);
    }

    #[test]
    fn chorded_square_faces() {
        let g = chorded_square::<f64>();
        let mut lens = g.trace_faces().lengths();
        lens.sort();
        assert_eq!(lens, vec![3, 3, 4]);
    }

    fn check_tessellation(p: usize, q: usize, layers: usize) {
        let g = hyperbolic::<f64>(p, q, layers).unwrap();
        assert_eq!(g.euler_characteristic(), 2, "{{{p},{q}}}");
        let faces = g.trace_faces();
        let outer = faces.lengths().into_iter().max().unwrap();
        let inner: Vec<_> = faces.lengths().into_iter().filter(|&l| l != outer).collect();
        assert_eq!(inner.len() + 1, faces.len());
        assert!(inner.iter().all(|&l| l == p), "{{{p},{q}}}: {inner:?}");
        let sinks = g.sink_mask();
        for v in 0..g.num_vertices() {
            if !sinks[v] {
                assert_eq!(g.degree(v), q, "{{{p},{q}}} vertex {v}");
            }
        }
    }

    #[test]
    fn hyperbolic_interior_faces_are_p_gons_and_degrees_are_q() {
        check_tessellation(4, 5, 3);
        check_tessellation(5, 4, 3);
        check_tessellation(7, 3, 4);
        check_tessellation(6, 4, 2);
    }

    #[test]
    fn hyperbolic_rejects_euclidean_parameters() {
        assert!(hyperbolic::<f64>(4, 4, 2).is_err());
        assert!(hyperbolic::<f64>(3, 7, 2).is_err());
    }

    #[test]
    fn square_box_is_planar_with_boundary_sinks() {
        let g = square_box::<f64>(3).unwrap();
        assert_eq!(g.num_vertices(), 49);
        assert_eq!(g.sinks().len(), 24);
        assert_eq!(g.euler_characteristic(), 2);
        assert_eq!(g.degree(g.root()), 4);
        let mut lens = g.trace_faces().lengths();
        lens.sort();
        assert_eq!(lens[0], 4);
        assert_eq!(*lens.last().unwrap(), 24);
    }
}
