use proptest::prelude::*;
use tiler::graph::families;
use tiler::harmonic::{escape_profile, killed_profile, EscapeOptions, SolverOptions};
use tiler::scalar::ratio;
use tiler::tiling::{tile_profile, TilingOptions};
use tiler::{Rational, Scalar};

/// Smallest root of `q = 1/3 + (2/3) q^2` by fixed-point iteration from 0:
/// the probability that a walk on the infinite binary tree ever steps back
/// to the parent of its start.
fn return_probability() -> f64 {
    let mut q = 0.0f64;
    for _ in 0..200 {
        q = 1.0 / 3.0 + 2.0 / 3.0 * q * q;
    }
    q
}

fn pow(base: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::from_usize(1), |acc, _| acc * base.clone())
}

#[test]
fn oracle_root_is_one_half() {
    assert!((return_probability() - 0.5).abs() < 1e-15);
}

#[test]
fn escape_heights_and_square_sides_match_the_oracle() {
    let q = return_probability();
    let depths: Vec<usize> = (12..=20).collect();
    let opts = EscapeOptions {
        tolerance: 1e-9,
        solver: SolverOptions {
            tolerance: 1e-14,
            ..SolverOptions::default()
        },
        ..EscapeOptions::default()
    };
    let (g, p, _) = escape_profile(|d| families::b_ary_tree::<f64>(2, d), &depths, &opts).unwrap();
    let depth = families::depths(&g);
    for v in 0..g.num_vertices() {
        assert!((p.h[v] - q.powi(depth[v] as i32)).abs() < 1e-7);
    }
    let t = tile_profile(&g, &p, &TilingOptions::default()).unwrap();
    for (r, &(u, _)) in t.rects.iter().zip(&t.ends) {
        let side = 0.5f64.powi(depth[u] as i32 + 1);
        assert!((r.width - side).abs() < 1e-7);
        assert!((r.height() - side).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Killed at depth `D`, heights are affine in `b^-d`:
    /// `h(d) = (b^-d - b^-D) / (1 - b^-D)`.
    #[test]
    fn killed_tree_heights_are_exact(b in 2usize..5, depth in 1usize..6) {
        let g = families::b_ary_tree::<Rational>(b, depth).unwrap();
        let p = killed_profile(&g, &SolverOptions::default()).unwrap();
        let inv = ratio(1, b as i64);
        let floor = pow(&inv, depth);
        let one = Rational::from_usize(1);
        let d = families::depths(&g);
        for v in 0..g.num_vertices() {
            let expect = (pow(&inv, d[v]) - floor.clone()) / (one.clone() - floor.clone());
            prop_assert_eq!(p.h[v].clone(), expect);
        }
    }
}
