//! Finite unions of half-open arcs of the circle `R/Z`.

use serde::{Deserialize, Serialize};

/// Disjoint, sorted, non-adjacent pieces `[a, b)` with `0 <= a < b <= 1`.
/// Set operations only copy endpoints, so they are exact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArcSet {
    pieces: Vec<(f64, f64)>,
}

fn normalize(mut pieces: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pieces.retain(|(a, b)| a < b);
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (a, b) in pieces {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

impl ArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            pieces: vec![(0.0, 1.0)],
        }
    }

    /// Union of arcs running counterclockwise from `a` to `b`, both taken
    /// modulo 1. `a == b` is the empty arc.
    pub fn from_arcs(arcs: &[(f64, f64)]) -> Self {
        let mut pieces = Vec::with_capacity(arcs.len() + 1);
        for &(a, b) in arcs {
            let (a, b) = (a.rem_euclid(1.0), b.rem_euclid(1.0));
            if a < b {
                pieces.push((a, b));
            } else if a > b {
                pieces.push((a, 1.0));
                pieces.push((0.0, b));
            }
        }
        Self {
            pieces: normalize(pieces),
        }
    }

    /// Union of intervals `[start, start + width)`.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Self {
        let mut pieces = Vec::with_capacity(intervals.len() + 1);
        for &(s, w) in intervals {
            if w >= 1.0 {
                return Self::full();
            }
            let s = s.rem_euclid(1.0);
            let e = s + w;
            if e > 1.0 {
                pieces.push((s, 1.0));
                pieces.push((0.0, e - 1.0));
            } else {
                pieces.push((s, e));
            }
        }
        Self {
            pieces: normalize(pieces),
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.pieces.iter().fold(0.0, |acc, (a, b)| acc + (b - a))
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = x.rem_euclid(1.0);
        let i = self.pieces.partition_point(|p| p.1 <= x);
        i < self.pieces.len() && self.pieces[i].0 <= x
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut at = 0.0;
        for &(a, b) in &self.pieces {
            if a > at {
                out.push((at, a));
            }
            at = b;
        }
        if at < 1.0 {
            out.push((at, 1.0));
        }
        Self { pieces: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.pieces.clone();
        all.extend_from_slice(&other.pieces);
        Self {
            pieces: normalize(all),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a, b) = self.pieces[i];
            let (c, d) = other.pieces[j];
            let (lo, hi) = (a.max(c), b.min(d));
            if lo < hi {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            pieces: normalize(out),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.difference(other).union(&other.difference(self))
    }

    /// Length of the part of `[start, start + width)` inside the set.
    pub fn overlap(&self, start: f64, width: f64) -> f64 {
        if width >= 1.0 {
            return self.measure();
        }
        let s = start.rem_euclid(1.0);
        let e = s + width;
        let within = |lo: f64, hi: f64| -> f64 {
            self.pieces
                .iter()
                .fold(0.0, |acc, &(a, b)| acc + (b.min(hi) - a.max(lo)).max(0.0))
        };
        if e > 1.0 {
            within(s, 1.0) + within(0.0, e - 1.0)
        } else {
            within(s, e)
        }
    }

    /// Share of `[start, start + width)` inside the set; for a zero width,
    /// whether `start` is inside.
    pub fn fraction(&self, start: f64, width: f64) -> f64 {
        if width <= 0.0 {
            return if self.contains(start) { 1.0 } else { 0.0 };
        }
        (self.overlap(start, width) / width.min(1.0)).clamp(0.0, 1.0)
    }

    /// Whether some piece endpoint lies within `eps` of `x` (modulo 1).
    pub fn has_endpoint_near(&self, x: f64, eps: f64) -> bool {
        let near = |p: f64| {
            let d = (p - x).rem_euclid(1.0);
            d < eps || d > 1.0 - eps
        };
        self.pieces
            .iter()
            .any(|&(a, b)| (a > 0.0 || b < 1.0) && (near(a) || near(b)))
    }
}
