use proptest::prelude::*;
use tiler::graph::families;
use tiler::harmonic::SolverOptions;
use tiler::scalar::ratio;
use tiler::tiling::{audit_tiling, tile_killed, AuditOptions, TilingOptions};
use tiler::{ExactGraph, ExactTiling, Graph, Rational, Scalar, Tiling64};

fn exact(g: &ExactGraph) -> ExactTiling {
    tile_killed(g, &SolverOptions::default(), &TilingOptions::default())
        .unwrap()
        .1
}

fn float(g: &Graph) -> Tiling64 {
    let solver = SolverOptions {
        tolerance: 1e-13,
        ..SolverOptions::default()
    };
    tile_killed(g, &solver, &TilingOptions::default()).unwrap().1
}

fn assert_exact_identities(t: &ExactTiling) {
    let audit = audit_tiling(t, &AuditOptions::default());
    for (name, v, _) in audit.entries() {
        assert_eq!(v, 0.0, "{name} is not exact");
    }
    let area = t
        .rects
        .iter()
        .map(|r| r.area())
        .chain(t.boundary_rects.iter().map(|(_, r)| r.area()))
        .fold(Rational::from_usize(0), |a, b| a + b);
    assert_eq!(area, Rational::from_usize(1));
    for (r, c) in t.rects.iter().zip(&t.conductance) {
        if r.height() > Rational::from_usize(0) {
            assert_eq!(r.width.clone() / r.height(), c.clone());
        }
    }
}

fn assert_float_matches(tf: &Tiling64, te: &ExactTiling) {
    let audit = audit_tiling(tf, &AuditOptions::default());
    assert!(audit.pass, "{:?}", audit.entries());
    for (a, b) in tf.rects.iter().zip(&te.rects) {
        assert!((a.width - b.width.to_f64()).abs() < 1e-9);
        assert!((a.low - b.low.to_f64()).abs() < 1e-9);
        assert!((a.high - b.high.to_f64()).abs() < 1e-9);
        let ds = (a.start - b.start.to_f64()).circular_offset().abs();
        assert!(ds < 1e-9, "start differs by {ds}");
    }
}

#[test]
fn small_networks_tile_exactly() {
    for g in [
        families::path::<Rational>(),
        families::triangle(),
        families::chorded_square(),
        families::hyperbolic(5, 4, 2).unwrap(),
        families::square_box(3).unwrap(),
    ] {
        assert_exact_identities(&exact(&g));
    }
}

#[test]
fn float_pipeline_agrees_with_rationals() {
    let pairs: Vec<(ExactGraph, Graph)> = vec![
        (families::chorded_square(), families::chorded_square()),
        (families::perturbed_tree(7, 5).unwrap(), families::perturbed_tree(7, 5).unwrap()),
        (families::hyperbolic(5, 4, 3).unwrap(), families::hyperbolic(5, 4, 3).unwrap()),
        (families::square_box(4).unwrap(), families::square_box(4).unwrap()),
    ];
    for (ge, gf) in pairs {
        let te = exact(&ge);
        assert_exact_identities(&te);
        assert_float_matches(&float(&gf), &te);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_chord_tiles_exactly(num in 1i64..40, den in 1i64..40) {
        let g = families::chorded_square_with::<Rational>(ratio(num, den));
        assert_exact_identities(&exact(&g));
    }

    #[test]
    fn perturbed_trees_pass_the_audit(seed in 0u64..1000, depth in 2usize..7) {
        let t = float(&families::perturbed_tree(seed, depth).unwrap());
        let audit = audit_tiling(&t, &AuditOptions::default());
        prop_assert!(audit.pass, "{:?}", audit.entries());
    }

    #[test]
    fn children_partition_the_parent_interval(depth in 1usize..9) {
        let g = families::b_ary_tree::<Rational>(3, depth).unwrap();
        let t = exact(&g);
        for v in 0..g.num_vertices() {
            let below: Vec<_> = t
                .rects
                .iter()
                .zip(&t.ends)
                .filter(|(_, &(u, _))| u == v)
                .map(|(r, _)| r.width.clone())
                .collect();
            if !below.is_empty() {
                let total = below.into_iter().fold(Rational::from_usize(0), |a, b| a + b);
                prop_assert_eq!(total, t.vertices[v].width.clone());
            }
        }
    }
}
