//! Monte-Carlo and level-set audits of sharp functions.

use serde::{Deserialize, Serialize};

use super::sharp::{intervals, level_set};
use super::{ArcSet, BoundaryError};
use crate::graph::{PlanarGraph, VertexId};
use crate::scalar::Scalar;
use crate::tiling::Tiling;
use crate::walk::{
    exit_distribution, run_trials, run_walk, trajectory_limit, trial_rng, LimitOptions, Outcome,
    WalkConfig, WalkError, Walker,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessOptions {
    /// A walk counts towards a limit when its last `window` values agree.
    pub window: usize,
    pub eps0: f64,
    /// Largest middle-zone fraction accepted.
    pub delta0: f64,
    /// Allowed distance between the limit-1 fraction and `s(z)`.
    pub tolerance: f64,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        Self {
            window: 20,
            eps0: 0.05,
            delta0: 0.01,
            tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub vertex: String,
    pub value: f64,
    pub limit_one: f64,
    pub limit_zero: f64,
    pub middle: f64,
    /// Standard error of `limit_one`.
    pub sigma: f64,
    pub completed: u64,
    pub censored: u64,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdeReport {
    pub eps: f64,
    pub delta: f64,
    /// Start vertices, all with `s > 1 - eps`.
    pub starts: usize,
    pub completed: u64,
    pub censored: u64,
    /// Fraction of walks that ever enter `{s < 1 - delta}`.
    pub fraction: f64,
    pub sigma: f64,
    pub bound: f64,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoalterRow {
    pub k: usize,
    /// Fraction of walks with at least `k` alternations.
    pub probability: f64,
    pub bound: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoalterReport {
    pub r: f64,
    pub completed: u64,
    pub censored: u64,
    pub rows: Vec<NoalterRow>,
    pub seed: u64,
    pub pass: bool,
}

/// Comparison of consecutive levels `m < n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetDrift {
    pub level_m: f64,
    pub level_n: f64,
    /// Measure of `τ(F_m) △ τ(F_n)`.
    pub drift: f64,
    /// Same with the sets `X_i = {s > 1 - 2^-(i+1)}`.
    pub x_drift: f64,
    /// Width of the vertices of `B_n` whose interval meets an interval of
    /// `B_m` on the other side of the threshold.
    pub impurity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSeries {
    pub levels: Vec<f64>,
    /// Measure of `τ(F_i)` per level.
    pub f_measure: Vec<f64>,
    /// `w(F_i △ X_i)` per level.
    pub f_minus_x: Vec<f64>,
    pub pairs: Vec<LevelSetDrift>,
    pub terminal: Option<f64>,
    /// Mean drift over the deeper half of the pairs is at most the mean over
    /// the shallower half.
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    /// Points in `τ(F_i)` for every level in the deeper half.
    pub x: ArcSet,
    pub x_measure: f64,
    /// Fraction of walks where the limit-1 proxy and `limit ∈ x` disagree.
    pub estimate: f64,
    pub sigma: f64,
    pub completed: u64,
    pub censored: u64,
    pub drift_terminal: Option<f64>,
    pub drift_stable: bool,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Pass,
    Fail,
    InsufficientLevels,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredOptions {
    pub diameter: f64,
    pub arc_tolerance: f64,
    /// Exit mass of each tested arc must be within this many standard
    /// errors of its width.
    pub sigmas: f64,
    pub width_sum: f64,
    pub drift_terminal: f64,
}

impl Default for LayeredOptions {
    fn default() -> Self {
        Self {
            diameter: 0.01,
            arc_tolerance: 0.02,
            sigmas: 4.0,
            width_sum: 1e-7,
            drift_terminal: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredReport {
    pub hypotheses: Vec<Hypothesis>,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    hits: Vec<u64>,
    completed: u64,
    censored: u64,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            hits: vec![0; k],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        self.completed += other.completed;
        self.censored += other.censored;
        self
    }

    fn fraction(&self, i: usize) -> (f64, f64) {
        let n = self.completed.max(1) as f64;
        let p = self.hits[i] as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    fn censoring_ok(&self, max: f64) -> bool {
        let all = (self.completed + self.censored).max(1) as f64;
        self.censored as f64 / all <= max
    }
}

/// Lengths of the runs of values above `1 - eps` and below `eps` at the
/// end of a walk.
#[derive(Clone, Copy, Default)]
struct Streak {
    high: usize,
    low: usize,
    seen: usize,
}

impl Streak {
    fn push(&mut self, v: f64, eps: f64) {
        self.seen += 1;
        self.high = if v > 1.0 - eps { self.high + 1 } else { 0 };
        self.low = if v < eps { self.low + 1 } else { 0 };
    }

    fn limit_one(&self, window: usize) -> bool {
        self.high >= window.min(self.seen)
    }

    fn limit_zero(&self, window: usize) -> bool {
        self.low >= window.min(self.seen)
    }
}

/// Streak of the walk from `start` stopped on absorption, so its value is
/// held at the absorbing vertex up to the step cap. `None` when censored.
fn stopped_streak<R: rand::Rng>(
    walker: &Walker,
    values: &[f64],
    start: VertexId,
    kill: &[bool],
    cap: u64,
    rng: &mut R,
    opts: &SharpnessOptions,
) -> Option<(Streak, VertexId)> {
    let mut streak = Streak::default();
    streak.push(values[start], opts.eps0);
    let mut steps = 0u64;
    let out = run_walk(walker, start, kill, cap, rng, |k, _, y| {
        steps = k;
        streak.push(values[y], opts.eps0)
    });
    match out {
        Outcome::Censored(_) => None,
        Outcome::Absorbed(end) => {
            let pad = (cap - steps).min(opts.window as u64);
            for _ in 0..pad {
                streak.push(values[end], opts.eps0);
            }
            Some((streak, end))
        }
    }
}

fn check_values<S: Scalar>(g: &PlanarGraph<S>, values: &[f64]) -> Result<(), BoundaryError> {
    if values.len() != g.num_vertices() {
        return Err(BoundaryError::Incompatible);
    }
    Ok(())
}

fn prepare<S: Scalar>(
    g: &PlanarGraph<S>,
    cfg: &WalkConfig,
) -> Result<(Walker, Vec<bool>), BoundaryError> {
    cfg.validate()?;
    let walker = Walker::new(g);
    let kill = cfg.kill_mask(g);
    walker.check(g, &kill)?;
    Ok((walker, kill))
}

/// Fractions of walks from `z` whose values settle near 1, near 0, or
/// neither, reading the walk as stopped on absorption. The limit-1 fraction should match `s(z)`.
pub fn verify_sharpness<S: Scalar>(
    values: &[f64],
    g: &PlanarGraph<S>,
    z: VertexId,
    cfg: &WalkConfig,
    opts: &SharpnessOptions,
) -> Result<SharpnessReport, BoundaryError> {
    check_values(g, values)?;
    let (walker, kill) = prepare(g, cfg)?;
    let tally = run_trials(
        cfg,
        || Tally::new(3),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let Some((streak, _)) =
                stopped_streak(&walker, values, z, &kill, cfg.step_cap, &mut rng, opts)
            else {
                acc.censored += 1;
                return;
            };
            acc.completed += 1;
            if streak.limit_one(opts.window) {
                acc.hits[0] += 1;
            } else if streak.limit_zero(opts.window) {
                acc.hits[1] += 1;
            } else {
                acc.hits[2] += 1;
            }
        },
        Tally::merge,
    );
    let (one, sigma) = tally.fraction(0);
    let (zero, _) = tally.fraction(1);
    let (middle, _) = tally.fraction(2);
    let pass = (one - values[z]).abs() <= opts.tolerance
        && middle < opts.delta0
        && tally.censoring_ok(cfg.max_censored);
    Ok(SharpnessReport {
        vertex: g.label(z).to_string(),
        value: values[z],
        limit_one: one,
        limit_zero: zero,
        middle,
        sigma,
        completed: tally.completed,
        censored: tally.censored,
        seed: cfg.seed,
        pass,
    })
}

/// Walks started in `{s > 1 - eps}` (cycling over its non-absorbing
/// vertices) rarely reach `{s < 1 - delta}`: at most `eps / delta`.
pub fn ade_check<S: Scalar>(
    values: &[f64],
    g: &PlanarGraph<S>,
    eps: f64,
    delta: f64,
    cfg: &WalkConfig,
) -> Result<AdeReport, BoundaryError> {
    check_values(g, values)?;
    if !(eps > 0.0 && delta > 0.0) {
        return Err(WalkError::BadConfig("eps and delta must be positive".into()).into());
    }
    let (walker, kill) = prepare(g, cfg)?;
    let starts: Vec<VertexId> = (0..g.num_vertices())
        .filter(|&x| !kill[x] && values[x] > 1.0 - eps)
        .collect();
    let bound = eps / delta;
    if starts.is_empty() {
        return Ok(AdeReport {
            eps,
            delta,
            starts: 0,
            completed: 0,
            censored: 0,
            fraction: 0.0,
            sigma: 0.0,
            bound,
            seed: cfg.seed,
            pass: false,
        });
    }
    let tally = run_trials(
        cfg,
        || Tally::new(1),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let start = starts[(i % starts.len() as u64) as usize];
            let mut entered = false;
            let out = run_walk(&walker, start, &kill, cfg.step_cap, &mut rng, |_, _, y| {
                entered |= values[y] < 1.0 - delta
            });
            match out {
                Outcome::Censored(_) if !entered => acc.censored += 1,
                _ => {
                    acc.completed += 1;
                    acc.hits[0] += entered as u64;
                }
            }
        },
        Tally::merge,
    );
    let (fraction, sigma) = tally.fraction(0);
    Ok(AdeReport {
        eps,
        delta,
        starts: starts.len(),
        completed: tally.completed,
        censored: tally.censored,
        fraction,
        sigma,
        bound,
        seed: cfg.seed,
        pass: fraction < bound + 3.0 * sigma && tally.censoring_ok(cfg.max_censored),
    })
}

/// Alternations between `{s > 1 - r}` and `{s < r}` along walks from `z`;
/// at least `k` of them should have probability at most `(2r)^k`.
pub fn noalter_check<S: Scalar>(
    values: &[f64],
    g: &PlanarGraph<S>,
    z: VertexId,
    r: f64,
    max_k: usize,
    cfg: &WalkConfig,
) -> Result<NoalterReport, BoundaryError> {
    check_values(g, values)?;
    if !(r > 0.0 && r < 0.5) {
        return Err(WalkError::BadConfig("r must lie in (0, 1/2)".into()).into());
    }
    let (walker, kill) = prepare(g, cfg)?;
    let zone = |v: f64| -> u8 {
        if v > 1.0 - r {
            1
        } else if v < r {
            2
        } else {
            0
        }
    };
    let tally = run_trials(
        cfg,
        || Tally::new(max_k),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut last = zone(values[z]);
            let mut alternations = 0usize;
            let out = run_walk(&walker, z, &kill, cfg.step_cap, &mut rng, |_, _, y| {
                let now = zone(values[y]);
                if now != 0 {
                    if last != 0 && now != last {
                        alternations += 1;
                    }
                    last = now;
                }
            });
            if let Outcome::Censored(_) = out {
                acc.censored += 1;
                return;
            }
            acc.completed += 1;
            for k in 1..=alternations.min(max_k) {
                acc.hits[k - 1] += 1;
            }
        },
        Tally::merge,
    );
    let rows: Vec<NoalterRow> = (1..=max_k)
        .map(|k| {
            let (p, sigma) = tally.fraction(k - 1);
            let bound = (2.0 * r).powi(k as i32);
            NoalterRow {
                k,
                probability: p,
                bound,
                sigma,
                pass: p <= bound + 3.0 * sigma,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass) && tally.censoring_ok(cfg.max_censored);
    Ok(NoalterReport {
        r,
        completed: tally.completed,
        censored: tally.censored,
        rows,
        seed: cfg.seed,
        pass,
    })
}

/// Level-set vertices with their intervals and interpolated values.
struct Level {
    level: f64,
    intervals: Vec<(f64, f64)>,
    values: Vec<f64>,
}

fn level_values<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    values: &[f64],
    level: f64,
) -> Result<Level, BoundaryError> {
    let ls = level_set(t, g, level)?;
    let values = ls
        .ends
        .iter()
        .map(|&(u, v, f)| (1.0 - f) * values[u] + f * values[v])
        .collect();
    Ok(Level {
        level: ls.level,
        intervals: ls.intervals,
        values,
    })
}

fn projected(level: &Level, keep: impl Fn(f64) -> bool) -> ArcSet {
    let chosen: Vec<(f64, f64)> = level
        .intervals
        .iter()
        .zip(&level.values)
        .filter(|(_, &v)| keep(v))
        .map(|(&iv, _)| iv)
        .collect();
    ArcSet::from_intervals(&chosen)
}

/// Drift of the projected sets `F_i = {s > 1/2}` between consecutive
/// levels, with the `X_i` variant and impurity masses.
pub fn level_set_drift<S: Scalar>(
    values: &[f64],
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    levels: &[f64],
) -> Result<DriftSeries, BoundaryError> {
    check_values(g, values)?;
    let cuts: Vec<Level> = levels
        .iter()
        .map(|&l| level_values(t, g, values, l))
        .collect::<Result<_, _>>()?;
    let eps = |i: usize| 0.5f64.powi(i as i32 + 1);
    let f: Vec<ArcSet> = cuts.iter().map(|c| projected(c, |v| v > 0.5)).collect();
    let x: Vec<ArcSet> = cuts
        .iter()
        .enumerate()
        .map(|(i, c)| projected(c, |v| v > 1.0 - eps(i)))
        .collect();
    let f_minus_x = cuts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.intervals
                .iter()
                .zip(&c.values)
                .filter(|(_, &v)| v > 0.5 && v <= 1.0 - eps(i))
                .fold(0.0, |acc, (iv, _)| acc + iv.1)
        })
        .collect();
    let pairs: Vec<LevelSetDrift> = (1..cuts.len())
        .map(|n| {
            let m = n - 1;
            let other_m = [f[m].complement(), f[m].clone()];
            let impurity = cuts[n]
                .intervals
                .iter()
                .zip(&cuts[n].values)
                .filter(|(&(s, w), &v)| {
                    let opposite = &other_m[usize::from(v <= 0.5)];
                    w > 0.0 && opposite.overlap(s, w) > 1e-12
                })
                .fold(0.0, |acc, (iv, _)| acc + iv.1);
            LevelSetDrift {
                level_m: cuts[m].level,
                level_n: cuts[n].level,
                drift: f[m].symmetric_difference(&f[n]).measure(),
                x_drift: x[m].symmetric_difference(&x[n]).measure(),
                impurity,
            }
        })
        .collect();
    let terminal = pairs.last().map(|p| p.drift);
    let half = pairs.len() / 2;
    let mean = |ps: &[LevelSetDrift]| {
        if ps.is_empty() {
            0.0
        } else {
            ps.iter().map(|p| p.drift).sum::<f64>() / ps.len() as f64
        }
    };
    let decreasing = pairs.len() < 2 || mean(&pairs[pairs.len() - half..]) <= mean(&pairs[..half]) + 1e-12;
    Ok(DriftSeries {
        levels: cuts.iter().map(|c| c.level).collect(),
        f_measure: f.iter().map(ArcSet::measure).collect(),
        f_minus_x,
        pairs,
        terminal,
        decreasing,
    })
}

/// Estimates the arc set `x` as the points lying in `τ(F_i)` at every
/// level of the deeper half, then the probability that the walk from the
/// root settles near 1 exactly when its limit point misses `x` or the
/// other way round.
pub fn faithfulness_audit<S: Scalar>(
    values: &[f64],
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    levels: &[f64],
    cfg: &WalkConfig,
    opts: &SharpnessOptions,
) -> Result<FaithfulnessReport, BoundaryError> {
    check_values(g, values)?;
    if levels.is_empty() {
        return Err(WalkError::BadConfig("faithfulness needs at least one level".into()).into());
    }
    if t.vertices.len() != g.num_vertices() {
        return Err(BoundaryError::Incompatible);
    }
    let drift = level_set_drift(values, t, g, levels)?;
    let tail = levels.len() / 2;
    let mut x = ArcSet::full();
    for &l in &levels[tail..] {
        let c = level_values(t, g, values, l)?;
        x = x.intersection(&projected(&c, |v| v > 0.5));
    }
    let (walker, kill) = prepare(g, cfg)?;
    let mids: Vec<f64> = intervals(t)
        .iter()
        .map(|&(s, w)| s + w.min(1.0) / 2.0)
        .collect();
    let root = g.root();
    let tally = run_trials(
        cfg,
        || Tally::new(1),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            match stopped_streak(&walker, values, root, &kill, cfg.step_cap, &mut rng, opts) {
                None => acc.censored += 1,
                Some((streak, end)) => {
                    acc.completed += 1;
                    let one = streak.limit_one(opts.window);
                    acc.hits[0] += (one != x.contains(mids[end])) as u64;
                }
            }
        },
        Tally::merge,
    );
    let (estimate, sigma) = tally.fraction(0);
    let drift_stable = drift.terminal.is_none_or(|d| d < 0.05);
    Ok(FaithfulnessReport {
        x_measure: x.measure(),
        x,
        estimate,
        sigma,
        completed: tally.completed,
        censored: tally.censored,
        drift_terminal: drift.terminal,
        drift_stable,
        seed: cfg.seed,
        pass: estimate < opts.tolerance && tally.censoring_ok(cfg.max_censored),
    })
}

fn status(ok: bool) -> HypothesisStatus {
    if ok {
        HypothesisStatus::Pass
    } else {
        HypothesisStatus::Fail
    }
}

/// Exit masses at one level compared with the widths of the level
/// intervals: the widths must sum to 1 and every tested arc must carry
/// its width within `opts.sigmas` standard errors.
fn layered_at<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    level: f64,
    cfg: &WalkConfig,
    opts: &LayeredOptions,
) -> Result<(bool, f64, String), BoundaryError> {
    let ls = level_set(t, g, level)?;
    let n = g.num_vertices();
    let widths: Vec<f64> = ls.intervals.iter().map(|iv| iv.1).collect();
    let total: f64 = widths.iter().sum();
    let stats = exit_distribution(&ls.cut.graph, g.root(), &ls.cut.boundary, cfg)?;
    let mut arcs: Vec<(f64, f64)> = (0..8).map(|j| (j as f64 / 8.0, 0.125)).collect();
    arcs.extend([(0.0, 0.5), (0.5, 0.5)]);
    let completed = stats.completed.max(1) as f64;
    let mut worst = 0.0f64;
    for &(a, len) in &arcs {
        let (mut expected, mut hits) = (0.0, 0u64);
        for (j, &b) in stats.atoms.iter().enumerate() {
            let (s, w) = ls.intervals[b - n];
            let mid = (s + w / 2.0 - a).rem_euclid(1.0);
            if mid < len {
                expected += widths[b - n];
                hits += stats.counts[j];
            }
        }
        let p = hits as f64 / completed;
        let var = expected.clamp(1e-12, 1.0) * (1.0 - expected.clamp(0.0, 1.0 - 1e-12)) / completed;
        worst = worst.max((p - expected).abs() / var.sqrt());
    }
    let censoring_ok = stats.censored_fraction() <= cfg.max_censored;
    let sum_ok = (total - 1.0).abs() <= opts.width_sum;
    let ok = sum_ok && worst <= opts.sigmas && censoring_ok;
    let detail = format!(
        "level {:.6}: {} atoms, width sum {:.9}, largest |z| {:.2}",
        ls.level,
        widths.len(),
        total,
        worst
    );
    Ok((ok, worst, detail))
}

/// Checklist: convergence of trajectories, layeredness of the exit
/// measures at each level, and drift of every supplied sharp function.
pub fn layered_criterion<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    sharps: &[&[f64]],
    levels: &[f64],
    cfg: &WalkConfig,
    opts: &LayeredOptions,
) -> Result<LayeredReport, BoundaryError> {
    let mut hypotheses = Vec::new();

    let limit_opts = LimitOptions {
        arcs: (0..8).map(|j| (j as f64 / 8.0, 0.125)).collect(),
        arc_tolerance: opts.arc_tolerance,
        ..LimitOptions::default()
    };
    let limit = trajectory_limit(t, g, g.root(), cfg, &limit_opts)?;
    hypotheses.push(Hypothesis {
        name: "trajectory-convergence".into(),
        status: status(limit.pass && limit.mean_diameter < opts.diameter),
        value: limit.mean_diameter,
        tolerance: opts.diameter,
        detail: format!(
            "{} of {} walks absorbed, arc masses {}",
            limit.absorbed,
            limit.trials,
            if limit.arcs.iter().all(|a| a.pass) { "within tolerance" } else { "off" }
        ),
    });

    if levels.is_empty() {
        hypotheses.push(Hypothesis {
            name: "layeredness".into(),
            status: HypothesisStatus::InsufficientLevels,
            value: 0.0,
            tolerance: opts.sigmas,
            detail: "no levels supplied".into(),
        });
    } else {
        let mut ok = true;
        let mut worst = 0.0f64;
        let mut details = Vec::new();
        for &l in levels {
            let (pass, z, d) = layered_at(t, g, l, cfg, opts)?;
            ok &= pass;
            worst = worst.max(z);
            details.push(d);
        }
        hypotheses.push(Hypothesis {
            name: "layeredness".into(),
            status: status(ok),
            value: worst,
            tolerance: opts.sigmas,
            detail: details.join("; "),
        });
    }

    for (i, s) in sharps.iter().enumerate() {
        let name = format!("drift[{i}]");
        if levels.len() < 2 {
            hypotheses.push(Hypothesis {
                name,
                status: HypothesisStatus::InsufficientLevels,
                value: 0.0,
                tolerance: opts.drift_terminal,
                detail: "insufficient levels".into(),
            });
            continue;
        }
        let series = level_set_drift(s, t, g, levels)?;
        let terminal = series.terminal.unwrap_or(0.0);
        hypotheses.push(Hypothesis {
            name,
            status: status(terminal < opts.drift_terminal && series.decreasing),
            value: terminal,
            tolerance: opts.drift_terminal,
            detail: format!(
                "drifts {:?}, {}",
                series.pairs.iter().map(|p| p.drift).collect::<Vec<_>>(),
                if series.decreasing { "decreasing" } else { "not decreasing" }
            ),
        });
    }

    let pass = hypotheses.iter().all(|h| h.status == HypothesisStatus::Pass);
    Ok(LayeredReport {
        hypotheses,
        seed: cfg.seed,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{sharp_from_arc, SharpOptions};
    use super::*;
    use crate::graph::families;
    use crate::harmonic::SolverOptions;
    use crate::tiling::{tile_killed, TilingOptions};

    fn tree(depth: usize) -> (PlanarGraph<f64>, Tiling<f64>) {
        let g = families::b_ary_tree::<f64>(2, depth).unwrap();
        let (_, t) = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default()).unwrap();
        (g, t)
    }

    fn cfg(trials: u64) -> WalkConfig {
        WalkConfig {
            seed: 11,
            trials,
            ..WalkConfig::default()
        }
    }

    fn levels(k: std::ops::RangeInclusive<i32>) -> Vec<f64> {
        k.map(|k| 0.5f64.powi(k)).collect()
    }

    fn arc(g: &PlanarGraph<f64>, t: &Tiling<f64>, a: f64, b: f64) -> Vec<f64> {
        sharp_from_arc(t, g, &ArcSet::from_arcs(&[(a, b)]), &SharpOptions::default())
            .unwrap()
            .values
    }

    #[test]
    fn half_circle_is_sharp() {
        let (g, t) = tree(12);
        let s = arc(&g, &t, 0.0, 0.5);
        let r = verify_sharpness(&s, &g, g.root(), &cfg(50_000), &SharpnessOptions::default())
            .unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.limit_one + r.limit_zero + r.middle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_one_settles_at_one() {
        let (g, _) = tree(8);
        let s = vec![1.0; g.num_vertices()];
        let r = verify_sharpness(&s, &g, g.root(), &cfg(2_000), &SharpnessOptions::default())
            .unwrap();
        assert_eq!(r.limit_one, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn ade_bound_holds() {
        let (g, t) = tree(12);
        let s = arc(&g, &t, 0.0, 0.5);
        let r = ade_check(&s, &g, 0.1, 0.5, &cfg(20_000)).unwrap();
        assert!(r.starts > 0);
        assert!(r.pass, "{r:?}");
        assert!(r.fraction < 0.2);
    }

    #[test]
    fn few_alternations() {
        let (g, t) = tree(12);
        let s = arc(&g, &t, 0.0, 0.5);
        let r = noalter_check(&s, &g, g.root(), 0.1, 4, &cfg(20_000)).unwrap();
        assert!(r.pass, "{r:?}");
        let p: Vec<f64> = r.rows.iter().map(|r| r.probability).collect();
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn half_circle_has_no_drift() {
        let (g, t) = tree(10);
        let s = arc(&g, &t, 0.0, 0.5);
        let d = level_set_drift(&s, &t, &g, &levels(1..=8)).unwrap();
        assert_eq!(d.pairs.len(), 7);
        for p in &d.pairs {
            assert!(p.drift < 1e-12 && p.impurity < 1e-12, "{p:?}");
            assert!((0.0..=1.0).contains(&p.x_drift));
        }
        for m in &d.f_measure[1..] {
            assert!((m - 0.5).abs() < 1e-9, "{:?}", d.f_measure);
        }
        assert!(d.decreasing);
    }

    #[test]
    fn constant_one_drift_is_zero() {
        let (g, t) = tree(8);
        let s = vec![1.0; g.num_vertices()];
        let d = level_set_drift(&s, &t, &g, &levels(1..=6)).unwrap();
        assert!(d.pairs.iter().all(|p| p.drift < 1e-12));
        assert!(d.f_measure.iter().all(|m| (m - 1.0).abs() < 1e-9));
    }

    #[test]
    fn faithful_half_circle_and_zero() {
        let (g, t) = tree(12);
        let s = arc(&g, &t, 0.0, 0.5);
        let o = SharpnessOptions::default();
        let r = faithfulness_audit(&s, &t, &g, &levels(1..=10), &cfg(20_000), &o).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.x_measure - 0.5).abs() < 1e-9);
        let zero = vec![0.0; g.num_vertices()];
        let r = faithfulness_audit(&zero, &t, &g, &levels(1..=10), &cfg(2_000), &o).unwrap();
        assert!(r.x.is_empty());
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn layered_checklist_on_tree() {
        let (g, t) = tree(12);
        let half = arc(&g, &t, 0.0, 0.5);
        let quarter = arc(&g, &t, 0.25, 0.5);
        let r = layered_criterion(
            &t,
            &g,
            &[&half, &quarter],
            &levels(2..=5),
            &cfg(20_000),
            &LayeredOptions::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.hypotheses.len(), 4);
    }

    #[test]
    fn misscaled_widths_break_layeredness() {
        let (g, mut t) = tree(10);
        for r in t.rects.iter_mut() {
            if r.start < 0.5 {
                r.width *= 1.01;
            }
        }
        let r = layered_criterion(&t, &g, &[], &levels(3..=3), &cfg(20_000), &LayeredOptions::default())
            .unwrap();
        let h = r.hypotheses.iter().find(|h| h.name == "layeredness").unwrap();
        assert_eq!(h.status, HypothesisStatus::Fail, "{h:?}");
    }

    #[test]
    fn single_level_is_insufficient_for_drift() {
        let (g, t) = tree(8);
        let s = arc(&g, &t, 0.0, 0.5);
        let r = layered_criterion(&t, &g, &[&s], &levels(2..=2), &cfg(2_000), &LayeredOptions::default())
            .unwrap();
        let h = r.hypotheses.iter().find(|h| h.name == "drift[0]").unwrap();
        assert_eq!(h.status, HypothesisStatus::InsufficientLevels);
        assert_eq!(h.detail, "insufficient levels");
        assert!(!r.pass);
    }
}
