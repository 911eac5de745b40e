use proptest::prelude::*;
use proptest::sample::subsequence;
use tiler::boundary::level_set;
use tiler::graph::{families, interpolate_dummies, subdivide_edge};
use tiler::harmonic::{killed_profile, SolverOptions};
use tiler::scalar::ratio;
use tiler::tiling::{tile_killed, TilingOptions};
use tiler::{ExactGraph, ExactTiling, Graph, Rational, Scalar, Tiling64};

fn exact(g: &ExactGraph) -> ExactTiling {
    tile_killed(g, &SolverOptions::default(), &TilingOptions::default())
        .unwrap()
        .1
}

fn float(g: &Graph) -> Tiling64 {
    let solver = SolverOptions {
        tolerance: 1e-14,
        ..SolverOptions::default()
    };
    tile_killed(g, &solver, &TilingOptions::default()).unwrap().1
}

fn subdivide_all(g: &ExactGraph, cuts: &[(usize, Rational)]) -> ExactGraph {
    cuts.iter()
        .fold(g.clone(), |acc, (e, t)| subdivide_edge(&acc, *e, t.clone()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn split_edges_collapse_to_the_original_rectangles(
        edges in subsequence((0..60).collect::<Vec<usize>>(), 10),
        params in proptest::collection::vec(1i64..16, 10),
    ) {
        let g = families::hyperbolic::<Rational>(5, 4, 2).unwrap();
        let cuts: Vec<(usize, Rational)> =
            edges.iter().zip(&params).map(|(&e, &k)| (e, ratio(k, 16))).collect();
        let s = subdivide_all(&g, &cuts);
        prop_assert_eq!(s.num_vertices(), g.num_vertices() + 10);
        let t = exact(&g);
        let ts = exact(&s);
        prop_assert_eq!(ts.collapsed(&s), t.rects.clone());
        for v in 0..g.num_vertices() {
            prop_assert_eq!(&ts.vertices[v], &t.vertices[v]);
        }
    }

    /// A dummy's height is the linear interpolation of its endpoints.
    #[test]
    fn dummies_sit_on_the_segment(e in 0usize..30, k in 1i64..8) {
        let g = families::perturbed_tree::<Rational>(3, 4).unwrap();
        let s = subdivide_edge(&g, e, ratio(k, 8)).unwrap();
        let mut h = killed_profile(&g, &SolverOptions::default()).unwrap().h;
        h.push(Rational::from_usize(0));
        interpolate_dummies(&s, &mut h);
        let solved = killed_profile(&s, &SolverOptions::default()).unwrap().h;
        prop_assert_eq!(h, solved);
    }
}

#[test]
fn float_subdivision_keeps_other_rectangles() {
    let g = families::perturbed_tree::<f64>(11, 6).unwrap();
    let s = subdivide_edge(&g, 17, 0.375).unwrap();
    let t = float(&g);
    let ts = float(&s);
    for (a, b) in ts.collapsed(&s).iter().zip(&t.rects) {
        assert!((a.width - b.width).abs() < 1e-12);
        assert!((a.low - b.low).abs() < 1e-12);
        assert!((a.high - b.high).abs() < 1e-12);
        assert!((a.start - b.start).circular_offset().abs() < 1e-12);
    }
}

/// Killing the walk at a level set and retiling gives the part of the
/// tiling above that level, stretched affinely onto `[0, 1]`.
fn check_stretch(g: &Graph, level: f64) -> f64 {
    let t = float(g);
    let ls = level_set(&t, g, level).unwrap();
    let l = ls.level;
    let cut = &ls.cut;
    let (upper, old_of) = cut.graph.induced(&cut.upper, g.root(), &cut.boundary).unwrap();
    let tu = float(&upper);
    let mut worst = 0.0f64;
    for (new, &old) in old_of.iter().enumerate() {
        if old < g.num_vertices() {
            let expect = (t.vertices[old].height - l) / (1.0 - l);
            worst = worst.max((tu.vertices[new].height - expect).abs());
            worst = worst.max((tu.vertices[new].width - t.vertices[old].width).abs());
        }
    }
    let offset = tu.vertices[upper.root()].start - t.vertices[g.root()].start;
    for (e, r) in tu.rects.iter().enumerate() {
        // Origins point back into `g` through both the cut and the restriction.
        let base = &t.rects[upper.edge_origin(e)];
        worst = worst.max((r.width - base.width).abs());
        worst = worst.max((r.start - base.start - offset).circular_offset().abs());
        let stretch = |y: f64| ((y - l) / (1.0 - l)).max(0.0);
        worst = worst.max((r.high - stretch(base.high)).abs());
        worst = worst.max((r.low - stretch(base.low)).abs());
    }
    worst
}

#[test]
fn level_tiling_is_an_affine_stretch() {
    let g = families::perturbed_tree::<f64>(5, 9).unwrap();
    for level in [0.5, 0.3, 0.125, 0.07] {
        let d = check_stretch(&g, level);
        assert!(d < 1e-7, "level {level}: {d}");
    }
    let h = families::hyperbolic::<f64>(5, 4, 4).unwrap();
    for level in [0.4, 0.1] {
        let d = check_stretch(&h, level);
        assert!(d < 1e-7, "hyperbolic level {level}: {d}");
    }
}
