//! Seeded random walks on networks and on their tilings.
//!
//! Trial `i` of a run with seed `s` draws from ChaCha8 keyed by `s` on
//! stream `i`, so results do not depend on scheduling. Accumulators are
//! integers (or fixed point), so merging is exact in any order.

mod exit;
mod flux;
mod limit;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DartId, PlanarGraph, VertexId};
use crate::scalar::Scalar;

pub use exit::{
    check_exit, exit_distribution, last_visit_distribution, vertex_widths, ExitCheck, ExitStats,
};
pub use flux::{
    interior_subwalk_flux, meridian_flux, DartFlux, FluxStats, MeridianReport, MeridianResult,
    SubwalkFlux, VertexCrossing,
};
pub use limit::{trajectory_limit, Alternations, ArcMass, LimitOptions, LimitReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("vertex `{vertex}` has no neighbours")]
    Isolated { vertex: String },
    #[error("meridian crossings need horizontal sampling")]
    HorizontalSamplingOff,
    #[error("invalid walk configuration: {0}")]
    BadConfig(String),
    #[error("meridian {position} meets an endpoint of the interval of `{vertex}`; perturb meridian")]
    MeridianOnEndpoint { position: f64, vertex: String },
    #[error("tiling has {tiling} vertices, graph has {graph}")]
    TilingMismatch { tiling: usize, graph: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KillRule {
    AtSinks,
    /// At the given vertices (a level set).
    AtSet(Vec<VertexId>),
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub trials: u64,
    /// Trials run are `first_trial..first_trial + trials`.
    #[serde(default)]
    pub first_trial: u64,
    pub step_cap: u64,
    pub kill: KillRule,
    /// Draw a uniform point of the current vertex interval at every step.
    pub horizontal_sampling: bool,
    /// Largest censored fraction before a run is flagged.
    pub max_censored: f64,
    pub parallel: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 10_000,
            first_trial: 0,
            step_cap: 100_000,
            kill: KillRule::AtSinks,
            horizontal_sampling: false,
            max_censored: 1e-3,
            parallel: true,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.trials == 0 {
            return Err(WalkError::BadConfig("trials must be at least 1".into()));
        }
        if self.step_cap == 0 {
            return Err(WalkError::BadConfig("step cap must be at least 1".into()));
        }
        Ok(())
    }

    /// Absorbing vertices under the kill rule.
    pub fn kill_mask<S: Scalar>(&self, g: &PlanarGraph<S>) -> Vec<bool> {
        let mut mask = vec![false; g.num_vertices()];
        match &self.kill {
            KillRule::AtSinks => g.sinks().iter().for_each(|&s| mask[s] = true),
            KillRule::AtSet(set) => set.iter().for_each(|&s| mask[s] = true),
            KillRule::Never => {}
        }
        mask
    }
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One step from `x`: neighbour `y` with probability `c(xy) / π(x)`.
pub fn sample_step<S: Scalar, R: Rng>(
    g: &PlanarGraph<S>,
    x: VertexId,
    rng: &mut R,
) -> Result<VertexId, WalkError> {
    let darts = g.rotation(x);
    let total: f64 = darts.iter().map(|&d| g.conductance(d / 2).to_f64()).sum();
    if darts.is_empty() || total <= 0.0 {
        return Err(WalkError::Isolated {
            vertex: g.label(x).to_string(),
        });
    }
    let mut u = rng.random::<f64>() * total;
    for &d in darts {
        u -= g.conductance(d / 2).to_f64();
        if u < 0.0 {
            return Ok(g.head(d));
        }
    }
    Ok(g.head(*darts.last().expect("non-empty")))
}

/// Transition tables in compressed rows.
#[derive(Clone, Debug)]
pub struct Walker {
    offsets: Vec<usize>,
    darts: Vec<DartId>,
    heads: Vec<VertexId>,
    cumulative: Vec<f64>,
}

impl Walker {
    pub fn new<S: Scalar>(g: &PlanarGraph<S>) -> Self {
        let n = g.num_vertices();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut darts = Vec::with_capacity(g.num_darts());
        let mut heads = Vec::with_capacity(g.num_darts());
        let mut cumulative = Vec::with_capacity(g.num_darts());
        offsets.push(0);
        for x in 0..n {
            let mut acc = 0.0;
            for &d in g.rotation(x) {
                acc += g.conductance(d / 2).to_f64();
                darts.push(d);
                heads.push(g.head(d));
                cumulative.push(acc);
            }
            offsets.push(darts.len());
        }
        Self {
            offsets,
            darts,
            heads,
            cumulative,
        }
    }

    pub fn check<S: Scalar>(&self, g: &PlanarGraph<S>, kill: &[bool]) -> Result<(), WalkError> {
        for x in 0..self.offsets.len() - 1 {
            if !kill[x] && self.offsets[x] == self.offsets[x + 1] {
                return Err(WalkError::Isolated {
                    vertex: g.label(x).to_string(),
                });
            }
        }
        Ok(())
    }

    /// Dart taken from `x`.
    #[inline]
    pub fn step<R: Rng>(&self, x: VertexId, rng: &mut R) -> (DartId, VertexId) {
        let (a, b) = (self.offsets[x], self.offsets[x + 1]);
        let row = &self.cumulative[a..b];
        let u = rng.random::<f64>() * row[row.len() - 1];
        let i = row.partition_point(|&c| c <= u).min(row.len() - 1);
        (self.darts[a + i], self.heads[a + i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Absorbed(VertexId),
    Censored(VertexId),
}

/// Runs one walk from `start`. `on_step(k, dart, to)` sees step `k >= 1`.
/// A walk starting on an absorbing vertex is absorbed at once.
pub(crate) fn run_walk<R: Rng>(
    walker: &Walker,
    start: VertexId,
    kill: &[bool],
    cap: u64,
    rng: &mut R,
    mut on_step: impl FnMut(u64, DartId, VertexId),
) -> Outcome {
    let mut x = start;
    if kill[x] {
        return Outcome::Absorbed(x);
    }
    for k in 1..=cap {
        let (d, y) = walker.step(x, rng);
        on_step(k, d, y);
        x = y;
        if kill[x] {
            return Outcome::Absorbed(x);
        }
    }
    Outcome::Censored(x)
}

/// Folds `trial` over the configured trial range and merges the partial accumulators.
pub(crate) fn run_trials<A, I, T, M>(cfg: &WalkConfig, init: I, trial: T, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    T: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let trials = cfg.first_trial..cfg.first_trial + cfg.trials;
    if cfg.parallel {
        trials
            .into_par_iter()
            .fold(&init, |mut acc, i| {
                trial(&mut acc, i);
                acc
            })
            .reduce(&init, &merge)
    } else {
        let mut acc = init();
        for i in trials {
            trial(&mut acc, i);
        }
        acc
    }
}

/// Fixed-point scale for sums of values in `[0, 1]`.
pub(crate) const FIXED: f64 = (1u64 << 40) as f64;

pub(crate) fn to_fixed(x: f64) -> i128 {
    (x * FIXED).round() as i128
}

/// Mean and standard error from integer sums over `n` samples.
pub(crate) fn mean_and_error(sum: f64, sumsq: f64, n: f64) -> (f64, f64) {
    if n <= 0.0 {
        return (0.0, 0.0);
    }
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// TV acceptance threshold for `atoms` outcomes and `n` samples, capped at
/// `cap`.
pub fn tv_threshold(atoms: usize, n: u64, cap: f64) -> f64 {
    (4.0 * (atoms as f64 / n.max(1) as f64).sqrt()).min(cap)
}
