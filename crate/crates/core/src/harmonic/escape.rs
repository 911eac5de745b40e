//! Escape probabilities of infinite graphs from nested truncations.
//!
//! Each truncation is solved with `h = 0` on its outermost layer. The killed
//! heights increase to the escape heights; when the raw Cauchy gap is still
//! too large but the gaps contract geometrically, the sequence is
//! accelerated with a vector Aitken step `h + Δ r / (1 - r)` using the
//! observed sup-norm ratio `r`. The step is linear in the solves, so the
//! accelerated heights stay harmonic on the base truncation.

use super::{killed_profile, HarmonicError, HarmonicProfile, ProfileMode, SolverOptions};
use crate::graph::{GraphError, GraphKind, PlanarGraph};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscapeOptions {
    pub solver: SolverOptions,
    /// Required sup-norm Cauchy gap.
    pub tolerance: f64,
    /// Largest gap ratio accepted as geometric contraction.
    pub max_ratio: f64,
    /// Largest change between consecutive ratios.
    pub ratio_drift: f64,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tolerance: 1e-6,
            max_ratio: 0.75,
            ratio_drift: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeReport {
    pub base_depth: usize,
    pub depths: Vec<usize>,
    /// Raw sup-norm gaps between consecutive depths.
    pub gaps: Vec<f64>,
    pub accelerated: bool,
    /// Gap that met the tolerance.
    pub gap: f64,
}

fn sup_diff<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs().to_f64())
        .fold(0.0, f64::max)
}

fn accelerate<S: Scalar>(last: &[S], prev: &[S], r: f64) -> Vec<S> {
    let k = S::from_f64(r / (1.0 - r));
    last.iter()
        .zip(prev)
        .map(|(x, y)| x.clone() + (x.clone() - y.clone()) * k.clone())
        .collect()
}

/// Escape profile on the truncation at `depths[0]`, from killed solves on
/// the truncations at every depth in `depths`. `gen(depth)` must return
/// nested truncations whose vertex ids extend those of shallower ones.
///
/// For a finite graph with sinks this is its killed profile.
pub fn escape_profile<S, F>(
    gen: F,
    depths: &[usize],
    opts: &EscapeOptions,
) -> Result<(PlanarGraph<S>, HarmonicProfile<S>, EscapeReport), HarmonicError>
where
    S: Scalar,
    F: Fn(usize) -> Result<PlanarGraph<S>, GraphError>,
{
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarmonicError::BadDepths);
    }
    let base = gen(depths[0])?;
    let n = base.num_vertices();
    if base.kind() == GraphKind::FiniteWithSinks {
        let p = killed_profile(&base, &opts.solver)?;
        let report = EscapeReport {
            base_depth: depths[0],
            depths: vec![depths[0]],
            gaps: Vec::new(),
            accelerated: false,
            gap: 0.0,
        };
        return Ok((base, p, report));
    }

    let mut solves: Vec<Vec<S>> = Vec::new();
    let mut gaps: Vec<f64> = Vec::new();
    let mut accelerated: Vec<Option<Vec<S>>> = Vec::new();
    for (k, &depth) in depths.iter().enumerate() {
        let g = if k == 0 { base.clone() } else { gen(depth)? };
        let mut h = killed_profile(&g, &opts.solver)?.h;
        h.truncate(n);
        solves.push(h);
        let done = |h: Vec<S>, gap: f64, acc: bool, gaps: Vec<f64>| {
            let profile =
                HarmonicProfile::from_heights(&base, h, ProfileMode::ExhaustionApproximation, gap);
            let report = EscapeReport {
                base_depth: depths[0],
                depths: depths[..=k].to_vec(),
                gaps,
                accelerated: acc,
                gap,
            };
            (profile, report)
        };
        if k == 0 {
            accelerated.push(None);
            continue;
        }
        let gap = sup_diff(&solves[k], &solves[k - 1]);
        gaps.push(gap);
        if gap < opts.tolerance {
            let (p, r) = done(solves[k].clone(), gap, false, gaps);
            return Ok((base, p, r));
        }
        let step = depths[k] - depths[k - 1];
        let spaced = |i: usize| k >= i && depths[k - i..=k].windows(2).all(|w| w[1] - w[0] == step);
        let mut acc = None;
        let m = gaps.len();
        if m >= 2 && spaced(2) {
            let r = gaps[m - 1] / gaps[m - 2];
            if r <= opts.max_ratio {
                let a = accelerate(&solves[k], &solves[k - 1], r);
                if let Some(Some(prev)) = accelerated.last() {
                    let r_prev = gaps[m - 2] / gaps[m - 3];
                    let acc_gap = sup_diff(&a, prev);
                    if (r - r_prev).abs() <= opts.ratio_drift && acc_gap < opts.tolerance {
                        let (p, rep) = done(a, acc_gap, true, gaps);
                        return Ok((base, p, rep));
                    }
                }
                acc = Some(a);
            }
        }
        accelerated.push(acc);
    }
    Err(HarmonicError::TransienceNotEstablished {
        gap: gaps.last().copied().unwrap_or(f64::INFINITY),
        depth: *depths.last().expect("non-empty"),
    })
}
