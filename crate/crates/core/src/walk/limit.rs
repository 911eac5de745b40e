//! Where walks end up on the boundary circle.

use serde::{Deserialize, Serialize};

use super::{mean_and_error, run_trials, to_fixed, trial_rng, WalkConfig, WalkError, Walker, FIXED};
use crate::graph::{PlanarGraph, VertexId};
use crate::scalar::Scalar;
use crate::tiling::Tiling;

/// Whether `x` lies in the half-open arc `[start, start + length)`.
pub(crate) fn in_arc(x: f64, start: f64, length: f64) -> bool {
    length >= 1.0 || (x - start).rem_euclid(1.0) < length
}

/// Whether the interval `[s, s + w)` lies inside the arc.
pub(crate) fn interval_in_arc(s: f64, w: f64, start: f64, length: f64) -> bool {
    if length >= 1.0 {
        return true;
    }
    let rel = (s - start).rem_euclid(1.0);
    let rel = if rel > 1.0 - 1e-12 { 0.0 } else { rel };
    rel + w <= length + 1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    /// Arcs `(start, length)` whose hitting mass is compared with their
    /// length.
    pub arcs: Vec<(f64, f64)>,
    pub arc_tolerance: f64,
    /// Meridian pairs `(a, b)` splitting the circle into `[a, b)` and `[b, a)`.
    pub meridian_pairs: Vec<(f64, f64)>,
    /// Bins of the boundary-point histogram.
    pub bins: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            arcs: vec![(0.0, 0.5)],
            arc_tolerance: 0.02,
            meridian_pairs: vec![(0.0, 0.5)],
            bins: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcMass {
    pub start: f64,
    pub length: f64,
    pub mass: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternations {
    pub pair: (f64, f64),
    /// Mean count over the first half of the step cap.
    pub mean_half_cap: f64,
    pub mean_full_cap: f64,
    /// Standard error of the per-walk difference.
    pub diff_error: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub trials: u64,
    /// Walks absorbed before the step cap.
    pub absorbed: u64,
    pub arcs: Vec<ArcMass>,
    pub histogram: Vec<u64>,
    pub mean_diameter: f64,
    pub alternations: Vec<Alternations>,
    /// `(step, mean height, standard error)` at steps `1, 2, 4, ...`.
    pub height_means: Vec<(u64, f64, f64)>,
    /// Mean height at step `2k` stays below the mean at `k` plus `3σ`.
    pub heights_decrease: bool,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Clone)]
struct LimitAcc {
    absorbed: u64,
    arc_counts: Vec<u64>,
    histogram: Vec<u64>,
    diameter: i128,
    alt_half: Vec<u64>,
    alt_full: Vec<u64>,
    alt_diff_sq: Vec<u64>,
    height: Vec<(i128, i128)>,
}

impl LimitAcc {
    fn new(arcs: usize, bins: usize, pairs: usize, marks: usize) -> Self {
        Self {
            absorbed: 0,
            arc_counts: vec![0; arcs],
            histogram: vec![0; bins],
            diameter: 0,
            alt_half: vec![0; pairs],
            alt_full: vec![0; pairs],
            alt_diff_sq: vec![0; pairs],
            height: vec![(0, 0); marks],
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.absorbed += o.absorbed;
        let add = |a: &mut Vec<u64>, b: Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.arc_counts, o.arc_counts);
        add(&mut self.histogram, o.histogram);
        add(&mut self.alt_half, o.alt_half);
        add(&mut self.alt_full, o.alt_full);
        add(&mut self.alt_diff_sq, o.alt_diff_sq);
        self.diameter += o.diameter;
        for (a, b) in self.height.iter_mut().zip(o.height) {
            a.0 += b.0;
            a.1 += b.1;
        }
        self
    }
}

/// Runs walks to absorption or the step cap and projects the last vertex
/// interval to the circle. Walks stopped by the cap are kept: their final
/// interval is simply wider.
pub fn trajectory_limit<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    start: VertexId,
    cfg: &WalkConfig,
    opts: &LimitOptions,
) -> Result<LimitReport, WalkError> {
    cfg.validate()?;
    if t.vertices.len() != g.num_vertices() {
        return Err(WalkError::TilingMismatch {
            tiling: t.vertices.len(),
            graph: g.num_vertices(),
        });
    }
    if opts.bins == 0 {
        return Err(WalkError::BadConfig("histogram needs at least one bin".into()));
    }
    let walker = Walker::new(g);
    let kill = cfg.kill_mask(g);
    walker.check(g, &kill)?;
    let n = g.num_vertices();
    let starts: Vec<f64> = t.vertices.iter().map(|v| v.start.to_f64()).collect();
    let widths: Vec<f64> = t.vertices.iter().map(|v| v.width.to_f64().min(1.0)).collect();
    let heights: Vec<f64> = t.vertices.iter().map(|v| v.height.to_f64()).collect();
    // Side of each vertex for each pair: 1 left, 2 right, 0 neither.
    let sides: Vec<Vec<u8>> = opts
        .meridian_pairs
        .iter()
        .map(|&(a, b)| {
            let left = (b - a).rem_euclid(1.0);
            (0..n)
                .map(|x| {
                    if interval_in_arc(starts[x], widths[x], a, left) {
                        1
                    } else if interval_in_arc(starts[x], widths[x], b, 1.0 - left) {
                        2
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let marks: Vec<u64> = std::iter::successors(Some(1u64), |&k| k.checked_mul(2))
        .take_while(|&k| k <= cfg.step_cap)
        .collect();
    let half = cfg.step_cap / 2;
    let pairs = sides.len();

    let acc = run_trials(
        cfg,
        || LimitAcc::new(opts.arcs.len(), opts.bins, pairs, marks.len()),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut x = start;
            let mut last_side: Vec<u8> = sides.iter().map(|s| s[x]).collect();
            let mut alt = vec![0u64; pairs];
            let mut alt_at_half = vec![0u64; pairs];
            let mut mark = 0;
            let mut k = 0u64;
            loop {
                if k == half {
                    alt_at_half.copy_from_slice(&alt);
                }
                if kill[x] || k == cfg.step_cap {
                    break;
                }
                x = walker.step(x, &mut rng).1;
                k += 1;
                for (j, s) in sides.iter().enumerate() {
                    let side = s[x];
                    if side != 0 {
                        if last_side[j] != 0 && last_side[j] != side {
                            alt[j] += 1;
                        }
                        last_side[j] = side;
                    }
                }
                while mark < marks.len() && marks[mark] == k {
                    let h = to_fixed(heights[x]);
                    acc.height[mark].0 += h;
                    acc.height[mark].1 += h * h;
                    mark += 1;
                }
            }
            if k < half {
                alt_at_half.copy_from_slice(&alt);
            }
            // Absorbed walks keep their height at later marks.
            let h = to_fixed(heights[x]);
            for m in &mut acc.height[mark..] {
                m.0 += h;
                m.1 += h * h;
            }
            if kill[x] {
                acc.absorbed += 1;
            }
            let mid = (starts[x] + widths[x] / 2.0).rem_euclid(1.0);
            for (j, &(a, l)) in opts.arcs.iter().enumerate() {
                if in_arc(mid, a, l) {
                    acc.arc_counts[j] += 1;
                }
            }
            let bin = ((mid * opts.bins as f64) as usize).min(opts.bins - 1);
            acc.histogram[bin] += 1;
            acc.diameter += to_fixed(widths[x]);
            for j in 0..pairs {
                acc.alt_half[j] += alt_at_half[j];
                acc.alt_full[j] += alt[j];
                let d = alt[j] - alt_at_half[j];
                acc.alt_diff_sq[j] += d * d;
            }
        },
        LimitAcc::merge,
    );

    let nt = cfg.trials as f64;
    let arcs: Vec<ArcMass> = opts
        .arcs
        .iter()
        .zip(&acc.arc_counts)
        .map(|(&(a, l), &c)| {
            let mass = c as f64 / nt;
            ArcMass {
                start: a,
                length: l,
                mass,
                pass: (mass - l.min(1.0)).abs() <= opts.arc_tolerance,
            }
        })
        .collect();
    let alternations: Vec<Alternations> = (0..pairs)
        .map(|j| {
            let diff = (acc.alt_full[j] - acc.alt_half[j]) as f64;
            let (mean_diff, err) = mean_and_error(diff, acc.alt_diff_sq[j] as f64, nt);
            Alternations {
                pair: opts.meridian_pairs[j],
                mean_half_cap: acc.alt_half[j] as f64 / nt,
                mean_full_cap: acc.alt_full[j] as f64 / nt,
                diff_error: err,
                stable: mean_diff <= 4.0 * err,
            }
        })
        .collect();
    let scale = FIXED;
    let height_means: Vec<(u64, f64, f64)> = marks
        .iter()
        .zip(&acc.height)
        .map(|(&k, &(s, sq))| {
            let (m, e) = mean_and_error(s as f64 / scale, sq as f64 / (scale * scale), nt);
            (k, m, e)
        })
        .collect();
    let heights_decrease = height_means.windows(2).all(|w| {
        let ((_, a, ea), (_, b, eb)) = (w[0], w[1]);
        b <= a + 3.0 * (ea * ea + eb * eb).sqrt()
    });
    let pass = arcs.iter().all(|a| a.pass) && alternations.iter().all(|a| a.stable) && heights_decrease;
    Ok(LimitReport {
        trials: cfg.trials,
        absorbed: acc.absorbed,
        arcs,
        histogram: acc.histogram,
        mean_diameter: acc.diameter as f64 / scale / nt,
        alternations,
        height_means,
        heights_decrease,
        seed: cfg.seed,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::harmonic::SolverOptions;
    use crate::tiling::{tile_killed, TilingOptions};

    fn cfg(trials: u64, cap: u64) -> WalkConfig {
        WalkConfig {
            seed: 21,
            trials,
            step_cap: cap,
            ..WalkConfig::default()
        }
    }

    #[test]
    fn arcs_and_intervals() {
        assert!(in_arc(0.95, 0.9, 0.2));
        assert!(in_arc(0.05, 0.9, 0.2));
        assert!(!in_arc(0.15, 0.9, 0.2));
        assert!(in_arc(0.3, 0.0, 1.0));
        assert!(interval_in_arc(0.95, 0.1, 0.9, 0.2));
        assert!(!interval_in_arc(0.95, 0.2, 0.9, 0.2));
    }

    #[test]
    fn binary_tree_mass_is_lebesgue() {
        let g = families::b_ary_tree::<f64>(2, 10).unwrap();
        let (_, t) = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default()).unwrap();
        let opts = LimitOptions {
            arcs: vec![(0.0, 0.5), (0.5, 0.5), (0.1, 0.3), (0.8, 0.35)],
            ..LimitOptions::default()
        };
        let r = trajectory_limit(&t, &g, g.root(), &cfg(50_000, 10_000), &opts).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.absorbed, 50_000);
        assert!((r.mean_diameter - 1.0 / 1024.0).abs() < 1e-9);
        assert_eq!(r.histogram.iter().sum::<u64>(), 50_000);
    }

    #[test]
    fn short_cap_keeps_walks_high() {
        let g = families::b_ary_tree::<f64>(2, 10).unwrap();
        let (_, t) = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default()).unwrap();
        let r = trajectory_limit(&t, &g, g.root(), &cfg(2000, 4), &LimitOptions::default()).unwrap();
        assert_eq!(r.absorbed, 0);
        assert!(r.mean_diameter > 1.0 / 32.0);
        assert_eq!(r.height_means.len(), 3);
    }
}
