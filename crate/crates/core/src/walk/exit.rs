//! First-hit and last-visit distributions on a vertex set.

use serde::{Deserialize, Serialize};

use super::{run_trials, run_walk, trial_rng, tv_threshold, Outcome, WalkConfig, WalkError, Walker};
use crate::graph::{PlanarGraph, VertexId};
use crate::scalar::Scalar;
use crate::tiling::Tiling;

/// Counts per atom. Walks absorbed outside the atoms are `missed`; walks
/// stopped by the step cap are `censored`. Neither is in `completed`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitStats {
    pub atoms: Vec<VertexId>,
    pub counts: Vec<u64>,
    pub completed: u64,
    pub censored: u64,
    pub missed: u64,
    pub seed: u64,
}

impl ExitStats {
    pub fn empty(atoms: Vec<VertexId>, seed: u64) -> Self {
        let k = atoms.len();
        Self {
            atoms,
            counts: vec![0; k],
            completed: 0,
            censored: 0,
            missed: 0,
            seed,
        }
    }

    pub fn trials(&self) -> u64 {
        self.completed + self.censored + self.missed
    }

    /// Adds the counts of another run over the same atoms.
    pub fn merge(mut self, other: Self) -> Self {
        debug_assert_eq!(self.atoms, other.atoms);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.completed += other.completed;
        self.censored += other.censored;
        self.missed += other.missed;
        self
    }

    pub fn distribution(&self) -> Vec<f64> {
        let n = self.completed.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Half the l1 distance to `reference`.
    pub fn tv(&self, reference: &[f64]) -> f64 {
        0.5 * self
            .distribution()
            .iter()
            .zip(reference)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.trials().max(1) as f64
    }

    pub fn to_csv(&self, labels: &[String], reference: Option<&[f64]>) -> String {
        let mut out = String::from("vertex,label,count,frequency,width\n");
        let freq = self.distribution();
        for (i, &v) in self.atoms.iter().enumerate() {
            let w = reference.map_or(String::new(), |r| format!("{:.12}", r[i]));
            out.push_str(&format!(
                "{v},{},{},{:.12},{w}\n",
                labels[v], self.counts[i], freq[i]
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitCheck {
    pub tv: f64,
    pub threshold: f64,
    pub censored_fraction: f64,
    pub censoring_ok: bool,
    pub pass: bool,
}

/// Compares an empirical distribution with `reference` at the TV threshold
/// `4 sqrt(K / N)` capped at `cap`.
pub fn check_exit(stats: &ExitStats, reference: &[f64], cap: f64, max_censored: f64) -> ExitCheck {
    let tv = stats.tv(reference);
    let threshold = tv_threshold(stats.atoms.len(), stats.completed, cap);
    let censored_fraction = stats.censored_fraction();
    let censoring_ok = censored_fraction <= max_censored && stats.missed == 0;
    ExitCheck {
        tv,
        threshold,
        censored_fraction,
        censoring_ok,
        pass: censoring_ok && tv < threshold,
    }
}

/// Widths of the vertex intervals of `atoms`.
pub fn vertex_widths<S: Scalar>(t: &Tiling<S>, atoms: &[VertexId]) -> Vec<f64> {
    atoms.iter().map(|&b| t.vertices[b].width.to_f64()).collect()
}

fn atom_index(n: usize, atoms: &[VertexId]) -> Vec<Option<usize>> {
    let mut index = vec![None; n];
    for (i, &b) in atoms.iter().enumerate() {
        index[b] = Some(i);
    }
    index
}

/// First vertex of `targets` hit by the walk from `start`. The walk is
/// killed on `targets` and on the configured kill set.
pub fn exit_distribution<S: Scalar>(
    g: &PlanarGraph<S>,
    start: VertexId,
    targets: &[VertexId],
    cfg: &WalkConfig,
) -> Result<ExitStats, WalkError> {
    cfg.validate()?;
    let walker = Walker::new(g);
    let mut kill = cfg.kill_mask(g);
    for &b in targets {
        kill[b] = true;
    }
    walker.check(g, &kill)?;
    let index = atom_index(g.num_vertices(), targets);
    let stats = run_trials(
        cfg,
        || ExitStats::empty(targets.to_vec(), cfg.seed),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            match run_walk(&walker, start, &kill, cfg.step_cap, &mut rng, |_, _, _| {}) {
                Outcome::Absorbed(b) => match index[b] {
                    Some(j) => {
                        acc.counts[j] += 1;
                        acc.completed += 1;
                    }
                    None => acc.missed += 1,
                },
                Outcome::Censored(_) => acc.censored += 1,
            }
        },
        ExitStats::merge,
    );
    Ok(stats)
}

/// Last vertex of `level_m` visited by the walk from `start` killed on
/// `level_n` (and on the configured kill set).
pub fn last_visit_distribution<S: Scalar>(
    g: &PlanarGraph<S>,
    start: VertexId,
    level_m: &[VertexId],
    level_n: &[VertexId],
    cfg: &WalkConfig,
) -> Result<ExitStats, WalkError> {
    cfg.validate()?;
    let walker = Walker::new(g);
    let mut kill = cfg.kill_mask(g);
    let mut on_n = vec![false; g.num_vertices()];
    for &b in level_n {
        kill[b] = true;
        on_n[b] = true;
    }
    walker.check(g, &kill)?;
    let index = atom_index(g.num_vertices(), level_m);
    let stats = run_trials(
        cfg,
        || ExitStats::empty(level_m.to_vec(), cfg.seed),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut last = index[start];
            let outcome = run_walk(&walker, start, &kill, cfg.step_cap, &mut rng, |_, _, y| {
                if let Some(j) = index[y] {
                    last = Some(j);
                }
            });
            match (outcome, last) {
                (Outcome::Absorbed(b), Some(j)) if on_n[b] => {
                    acc.counts[j] += 1;
                    acc.completed += 1;
                }
                (Outcome::Censored(_), _) => acc.censored += 1,
                _ => acc.missed += 1,
            }
        },
        ExitStats::merge,
    );
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::harmonic::{killed_profile, SolverOptions};
    use crate::tiling::{tile_killed, TilingOptions};

    fn at_depth<S: Scalar>(g: &PlanarGraph<S>, k: usize) -> Vec<VertexId> {
        let depth = families::depths(g);
        (0..g.num_vertices()).filter(|&v| depth[v] == k).collect()
    }

    fn cfg(trials: u64) -> WalkConfig {
        WalkConfig {
            seed: 11,
            trials,
            ..WalkConfig::default()
        }
    }

    #[test]
    fn binary_tree_first_hits_are_uniform() {
        let g = families::b_ary_tree::<f64>(2, 8).unwrap();
        let (_, t) = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default()).unwrap();
        let b = at_depth(&g, 3);
        let stats = exit_distribution(&g, g.root(), &b, &cfg(100_000)).unwrap();
        let widths = vertex_widths(&t, &b);
        assert!(widths.iter().all(|&w| (w - 0.125).abs() < 1e-12));
        let check = check_exit(&stats, &widths, 0.02, 1e-3);
        assert!(check.pass, "{check:?}");
    }

    #[test]
    fn path_mass_sits_on_the_sink() {
        let g = families::path::<f64>();
        let t = g.sinks()[0];
        let stats = exit_distribution(&g, g.root(), &[t], &cfg(1000)).unwrap();
        assert_eq!(stats.counts, vec![1000]);
    }

    #[test]
    fn exits_match_sink_divergence() {
        let g = families::chorded_square_with::<f64>(2.5);
        let p = killed_profile(&g, &SolverOptions::default()).unwrap().normalized().unwrap();
        let sinks = g.sinks().to_vec();
        let reference: Vec<f64> = sinks.iter().map(|&s| -p.divergence(&g, s)).collect();
        let stats = exit_distribution(&g, g.root(), &sinks, &cfg(200_000)).unwrap();
        assert!(check_exit(&stats, &reference, 0.02, 0.0).pass);
    }

    #[test]
    fn last_visit_equals_first_visit_on_the_killing_level() {
        let g = families::perturbed_tree::<f64>(4, 6).unwrap();
        let b = at_depth(&g, 3);
        let first = exit_distribution(&g, g.root(), &b, &cfg(5000)).unwrap();
        let last = last_visit_distribution(&g, g.root(), &b, &b, &cfg(5000)).unwrap();
        assert_eq!(first, last);
    }

    #[test]
    fn last_visit_matches_widths() {
        let g = families::b_ary_tree::<f64>(2, 7).unwrap();
        let (_, t) = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default()).unwrap();
        let bm = at_depth(&g, 2);
        let bn = at_depth(&g, 5);
        let stats = last_visit_distribution(&g, g.root(), &bm, &bn, &cfg(100_000)).unwrap();
        assert!(check_exit(&stats, &vertex_widths(&t, &bm), 0.02, 1e-3).pass);
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let g = families::perturbed_tree::<f64>(2, 6).unwrap();
        let b = at_depth(&g, 4);
        let mut c = cfg(20_000);
        let par = exit_distribution(&g, g.root(), &b, &c).unwrap();
        c.parallel = false;
        let ser = exit_distribution(&g, g.root(), &b, &c).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn tiny_step_cap_censors() {
        let g = families::b_ary_tree::<f64>(2, 8).unwrap();
        let b = at_depth(&g, 8);
        let mut c = cfg(1000);
        c.step_cap = 3;
        let stats = exit_distribution(&g, g.root(), &b, &c).unwrap();
        assert_eq!(stats.censored, 1000);
        let check = check_exit(&stats, &vec![1.0 / 256.0; 256], 0.02, 1e-3);
        assert!(!check.censoring_ok && !check.pass);
    }

    #[test]
    fn split_runs_merge_to_the_whole() {
        let g = families::b_ary_tree::<f64>(2, 4).unwrap();
        let b = at_depth(&g, 2);
        let whole = exit_distribution(&g, g.root(), &b, &cfg(3000)).unwrap();
        let mut c = cfg(1200);
        let head = exit_distribution(&g, g.root(), &b, &c).unwrap();
        c.first_trial = 1200;
        c.trials = 1800;
        let tail = exit_distribution(&g, g.root(), &b, &c).unwrap();
        assert_eq!(head.merge(tail), whole);
    }
}
