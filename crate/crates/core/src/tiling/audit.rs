//! Geometric identities of a tiling.

use serde::{Deserialize, Serialize};

use super::{Rect, Tiling};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub tolerance: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7 }
    }
}

/// Largest violations found; every entry is `0` for a perfect tiling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingAudit {
    /// `|width / height - c| / c` over rectangles of positive height.
    pub aspect_deviation: f64,
    /// `|Σ area - 1|`, boundary rectangles included.
    pub area_error: f64,
    /// Uncovered length of the worst horizontal line.
    pub coverage_deficit: f64,
    /// Length covered twice on the worst horizontal line.
    pub overlap: f64,
    /// `|flow in - flow out|` over vertices other than the root.
    pub vertex_balance: f64,
    /// How far a rectangle sticks out of the interval of an endpoint.
    pub tangency: f64,
    /// Largest vertex width among vertices with height in
    /// `[2^-(k+1), 2^-k)`, as `(k, width)`. Diagnostic only.
    pub level_widths: Vec<(usize, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

impl TilingAudit {
    /// Named pass/fail entries.
    pub fn entries(&self) -> Vec<(&'static str, f64, bool)> {
        let t = self.tolerance;
        let ok = |v: f64| v <= t;
        vec![
            ("aspect-ratio", self.aspect_deviation, ok(self.aspect_deviation)),
            ("area", self.area_error, ok(self.area_error)),
            ("coverage", self.coverage_deficit, ok(self.coverage_deficit)),
            ("overlap", self.overlap, ok(self.overlap)),
            ("vertex-balance", self.vertex_balance, ok(self.vertex_balance)),
            ("tangency", self.tangency, ok(self.tangency)),
        ]
    }
}

/// Measure of the union of circular arcs `(start, width)` in `[0, 1)`.
fn union_length<S: Scalar>(arcs: &[(S, S)]) -> S {
    let one = S::one();
    let mut pieces: Vec<(S, S)> = Vec::with_capacity(arcs.len() + 1);
    for (s, w) in arcs {
        if *w >= one {
            return one;
        }
        let end = s.clone() + w.clone();
        if end > one {
            pieces.push((s.clone(), one.clone()));
            pieces.push((S::zero(), end - one.clone()));
        } else {
            pieces.push((s.clone(), end));
        }
    }
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut total = S::zero();
    let mut cur: Option<(S, S)> = None;
    for (a, b) in pieces {
        cur = match cur {
            Some((ca, cb)) if a <= cb => Some((ca, S::max_of(cb, b))),
            Some((ca, cb)) => {
                total = total + (cb - ca);
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((a, b)) = cur {
        total = total + (b - a);
    }
    total
}

/// Sorted heights with values within `eps` merged.
fn cluster<S: Scalar>(mut hs: Vec<S>, eps: &S) -> Vec<S> {
    hs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut out: Vec<S> = Vec::with_capacity(hs.len());
    for h in hs {
        if out.last().is_none_or(|l| h.clone() - l.clone() > *eps) {
            out.push(h);
        }
    }
    out
}

/// Worst coverage deficit and overlap over the horizontal bands between
/// consecutive rectangle heights.
fn band_sweep<S: Scalar>(rects: &[&Rect<S>], eps: &S) -> (f64, f64) {
    let solid: Vec<&Rect<S>> = rects
        .iter()
        .copied()
        .filter(|r| r.width > S::zero() && r.high.clone() - r.low.clone() > *eps)
        .collect();
    let mut levels = Vec::with_capacity(2 * solid.len());
    for r in &solid {
        levels.push(r.low.clone());
        levels.push(r.high.clone());
    }
    let levels = cluster(levels, eps);
    let index = |h: &S| {
        levels
            .partition_point(|l| l.clone() < h.clone() - eps.clone())
            .min(levels.len().saturating_sub(1))
    };
    let nb = levels.len().saturating_sub(1);
    let mut enter: Vec<Vec<usize>> = vec![Vec::new(); nb];
    let mut leave = vec![0usize; solid.len()];
    for (i, r) in solid.iter().enumerate() {
        let lo = index(&r.low);
        let hi = index(&r.high);
        if lo < nb && hi > lo {
            enter[lo].push(i);
        }
        leave[i] = hi;
    }
    let (zero, one) = (S::zero(), S::one());
    let mut active: Vec<usize> = Vec::new();
    let (mut deficit, mut overlap) = (0.0f64, 0.0f64);
    for b in 0..nb {
        active.retain(|&i| leave[i] > b);
        active.extend_from_slice(&enter[b]);
        if levels[b + 1] <= zero || levels[b] >= one {
            continue;
        }
        let arcs: Vec<(S, S)> = active
            .iter()
            .map(|&i| (solid[i].start.clone(), solid[i].width.clone()))
            .collect();
        let total = arcs.iter().fold(S::zero(), |acc, (_, w)| acc + w.clone());
        let union = union_length(&arcs);
        deficit = deficit.max((one.clone() - union.clone()).to_f64());
        overlap = overlap.max((total - union).to_f64());
    }
    (deficit, overlap)
}

/// Checks aspect ratios, total area, coverage of every horizontal line,
/// flow balance at vertices and tangency of rectangles to vertex intervals.
pub fn audit_tiling<S: Scalar>(t: &Tiling<S>, opts: &AuditOptions) -> TilingAudit {
    let eps = S::epsilon_for(1e-12);
    let n = t.vertices.len();

    let mut aspect = 0.0f64;
    for (r, c) in t.rects.iter().zip(&t.conductance) {
        let h = r.height();
        if h > S::zero() && *c > S::zero() {
            let dev = ((r.width.clone() / h - c.clone()) / c.clone()).abs();
            aspect = aspect.max(dev.to_f64());
        }
    }

    let area = t
        .rects
        .iter()
        .chain(t.boundary_rects.iter().map(|(_, r)| r))
        .fold(S::zero(), |acc, r| acc + r.area());
    let area_error = (area - S::one()).abs().to_f64();

    let all: Vec<&Rect<S>> = t
        .rects
        .iter()
        .chain(t.boundary_rects.iter().map(|(_, r)| r))
        .collect();
    let (coverage_deficit, overlap) = band_sweep(&all, &eps);

    let mut inflow = vec![S::zero(); n];
    let mut outflow = vec![S::zero(); n];
    for (r, &(up, low)) in t.rects.iter().zip(&t.ends) {
        outflow[up] = outflow[up].clone() + r.width.clone();
        inflow[low] = inflow[low].clone() + r.width.clone();
    }
    for (b, r) in &t.boundary_rects {
        outflow[*b] = outflow[*b].clone() + r.width.clone();
    }
    let vertex_balance = (0..n)
        .filter(|&x| x != t.root)
        .map(|x| (inflow[x].clone() - outflow[x].clone()).abs().to_f64())
        .fold(0.0, f64::max);

    let one = S::one();
    let mut tangency = 0.0f64;
    let mut check = |x: usize, r: &Rect<S>| {
        let iv = &t.vertices[x];
        if r.width == S::zero() || iv.width >= one.clone() - eps.clone() {
            return;
        }
        let rel = (r.start.clone() - iv.start.clone()).fract_unit();
        // A start just below the interval start wraps to nearly 1.
        let rel = if one.clone() - rel.clone() <= eps {
            S::zero()
        } else {
            rel
        };
        let excess = rel + r.width.clone() - iv.width.clone();
        tangency = tangency.max(excess.to_f64());
    };
    for (r, &(up, low)) in t.rects.iter().zip(&t.ends) {
        check(up, r);
        check(low, r);
    }
    for (b, r) in &t.boundary_rects {
        check(*b, r);
    }

    let mut level_widths: Vec<(usize, f64)> = Vec::new();
    for (x, iv) in t.vertices.iter().enumerate() {
        let h = iv.height.to_f64();
        if x == t.root || h <= 0.0 || h >= 1.0 {
            continue;
        }
        let k = (-h.log2()).floor() as usize;
        let w = iv.width.to_f64();
        match level_widths.binary_search_by_key(&k, |e| e.0) {
            Ok(i) => level_widths[i].1 = level_widths[i].1.max(w),
            Err(i) => level_widths.insert(i, (k, w)),
        }
    }

    let tol = S::epsilon_for(opts.tolerance).to_f64();
    let mut audit = TilingAudit {
        aspect_deviation: aspect,
        area_error,
        coverage_deficit,
        overlap,
        vertex_balance,
        tangency,
        level_widths,
        tolerance: tol,
        pass: false,
    };
    audit.pass = audit.entries().iter().all(|e| e.2);
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::harmonic::SolverOptions;
    use crate::scalar::{ratio, Rational};
    use crate::tiling::{tile_killed, TilingOptions};

    fn tiling<S: Scalar>(g: &crate::graph::PlanarGraph<S>) -> Tiling<S> {
        tile_killed(g, &SolverOptions::default(), &TilingOptions::default())
            .unwrap()
            .1
    }

    #[test]
    fn union_of_wrapping_arcs() {
        let arcs = vec![(0.75f64, 0.5), (0.1, 0.1)];
        assert!((union_length(&arcs) - 0.5).abs() < 1e-15);
        let exact = vec![(ratio(3, 4), ratio(1, 2)), (ratio(1, 8), ratio(1, 4))];
        assert_eq!(union_length(&exact), ratio(5, 8));
    }

    #[test]
    fn binary_tree_passes() {
        let g = families::b_ary_tree::<f64>(2, 12).unwrap();
        let a = audit_tiling(&tiling(&g), &AuditOptions::default());
        assert!(a.pass, "{a:?}");
        // The widest vertex in level k has width 2^-k.
        for &(k, w) in &a.level_widths {
            assert!((w - 0.5f64.powi(k as i32)).abs() < 1e-6, "{k}: {w}");
        }
    }

    #[test]
    fn exact_chorded_square_is_perfect() {
        let g = families::chorded_square_with::<Rational>(ratio(3, 2));
        let a = audit_tiling(&tiling(&g), &AuditOptions::default());
        assert!(a.pass);
        assert_eq!(a.tolerance, 0.0);
        assert_eq!(a.area_error, 0.0);
        assert_eq!(a.overlap, 0.0);
    }

    #[test]
    fn corrupted_width_is_caught() {
        let g = families::b_ary_tree::<f64>(2, 6).unwrap();
        let mut t = tiling(&g);
        t.rects[5].width += 1e-3;
        let a = audit_tiling(&t, &AuditOptions::default());
        assert!(!a.pass);
        assert!(a.overlap > 1e-4 || a.coverage_deficit > 1e-4);
    }

    #[test]
    fn shifted_rectangle_leaves_a_gap() {
        let g = families::b_ary_tree::<f64>(2, 6).unwrap();
        let mut t = tiling(&g);
        t.rects[3].start = (t.rects[3].start + 0.01).rem_euclid(1.0);
        let a = audit_tiling(&t, &AuditOptions::default());
        assert!(a.coverage_deficit > 1e-3);
        assert!(a.overlap > 1e-3);
        assert!(!a.pass);
    }

    #[test]
    fn unit_conductances_give_squares() {
        let g = families::hyperbolic::<f64>(5, 4, 3).unwrap();
        let t = tiling(&g);
        let a = audit_tiling(&t, &AuditOptions::default());
        assert!(a.pass, "{a:?}");
        // All conductances are equal, so every rectangle has the same aspect.
        let c = t.conductance[0];
        assert!(t.conductance.iter().all(|&x| (x - c).abs() < 1e-12));
    }
}
