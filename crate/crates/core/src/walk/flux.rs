//! Net traversal counts of darts and of meridians.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mean_and_error, run_trials, run_walk, trial_rng, Outcome, WalkConfig, WalkError, Walker};
use crate::graph::{reverse, DartId, PlanarGraph, VertexId};
use crate::harmonic::HarmonicProfile;
use crate::scalar::Scalar;
use crate::tiling::Tiling;

/// Sums of one integer per completed trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxStats {
    pub sum: i64,
    pub sumsq: u128,
}

impl FluxStats {
    pub fn add(&mut self, x: i64) {
        self.sum += x;
        self.sumsq += (x as i128 * x as i128) as u128;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.sum += other.sum;
        self.sumsq += other.sumsq;
        self
    }

    pub fn mean(&self, n: u64) -> f64 {
        mean_and_error(self.sum as f64, self.sumsq as f64, n as f64).0
    }

    pub fn std_error(&self, n: u64) -> f64 {
        mean_and_error(self.sum as f64, self.sumsq as f64, n as f64).1
    }

    /// `(mean - expected) / std_error`; a zero error gives 0 only for an
    /// exact match.
    pub fn z(&self, n: u64, expected: f64) -> f64 {
        let (m, se) = mean_and_error(self.sum as f64, self.sumsq as f64, n as f64);
        let d = m - expected;
        if se > 0.0 {
            d / se
        } else if d.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DartFlux {
    pub dart: DartId,
    /// Normalized flow of the dart.
    pub flow: f64,
    /// Net traversals by interior subwalks.
    pub interior: FluxStats,
    /// Net traversals by the whole walk.
    pub total: FluxStats,
    pub interior_z: f64,
    pub total_z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubwalkFlux {
    pub darts: Vec<DartFlux>,
    pub completed: u64,
    pub censored: u64,
    pub missed: u64,
    /// Interior subwalks seen over all completed trials.
    pub interior_subwalks: u64,
    pub seed: u64,
    pub sigmas: f64,
    pub pass: bool,
}

#[derive(Clone)]
struct SubwalkAcc {
    interior: Vec<FluxStats>,
    total: Vec<FluxStats>,
    completed: u64,
    censored: u64,
    missed: u64,
    subwalks: u64,
}

impl SubwalkAcc {
    fn new(k: usize) -> Self {
        Self {
            interior: vec![FluxStats::default(); k],
            total: vec![FluxStats::default(); k],
            completed: 0,
            censored: 0,
            missed: 0,
            subwalks: 0,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for (a, b) in self.interior.iter_mut().zip(o.interior) {
            *a = a.merge(b);
        }
        for (a, b) in self.total.iter_mut().zip(o.total) {
            *a = a.merge(b);
        }
        self.completed += o.completed;
        self.censored += o.censored;
        self.missed += o.missed;
        self.subwalks += o.subwalks;
        self
    }
}

/// Net traversals of `darts` by the walk from `start` killed on `level_n`,
/// split at its visits to `level_m`. Subwalks between two visits to
/// `level_m` are interior; their net flux should vanish, while the whole
/// walk's net flux should equal the normalized flow of `p`.
pub fn interior_subwalk_flux<S: Scalar>(
    g: &PlanarGraph<S>,
    p: &HarmonicProfile<S>,
    start: VertexId,
    level_m: &[VertexId],
    level_n: &[VertexId],
    darts: &[DartId],
    cfg: &WalkConfig,
) -> Result<SubwalkFlux, WalkError> {
    cfg.validate()?;
    let p = p
        .normalized()
        .map_err(|e| WalkError::BadConfig(e.to_string()))?;
    let walker = Walker::new(g);
    let n = g.num_vertices();
    let mut kill = cfg.kill_mask(g);
    let mut on_n = vec![false; n];
    for &b in level_n {
        kill[b] = true;
        on_n[b] = true;
    }
    walker.check(g, &kill)?;
    let mut on_m = vec![false; n];
    for &b in level_m {
        on_m[b] = true;
    }
    let mut slots: Vec<Vec<(usize, i64)>> = vec![Vec::new(); g.num_darts()];
    for (i, &d) in darts.iter().enumerate() {
        if d >= g.num_darts() {
            return Err(WalkError::BadConfig(format!("dart {d} out of range")));
        }
        slots[d].push((i, 1));
        slots[reverse(d)].push((i, -1));
    }
    let k = darts.len();
    let acc = run_trials(
        cfg,
        || SubwalkAcc::new(k),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut seg = vec![0i64; k];
            let mut interior = vec![0i64; k];
            let mut total = vec![0i64; k];
            let mut seen_m = on_m[start];
            let mut subwalks = 0u64;
            let outcome = run_walk(&walker, start, &kill, cfg.step_cap, &mut rng, |_, d, y| {
                for &(j, s) in &slots[d] {
                    seg[j] += s;
                }
                if on_m[y] {
                    if seen_m {
                        subwalks += 1;
                        for j in 0..k {
                            interior[j] += seg[j];
                        }
                    }
                    for j in 0..k {
                        total[j] += seg[j];
                        seg[j] = 0;
                    }
                    seen_m = true;
                }
            });
            match outcome {
                Outcome::Absorbed(b) if on_n[b] => {
                    for j in 0..k {
                        acc.interior[j].add(interior[j]);
                        acc.total[j].add(total[j] + seg[j]);
                    }
                    acc.completed += 1;
                    acc.subwalks += subwalks;
                }
                Outcome::Absorbed(_) => acc.missed += 1,
                Outcome::Censored(_) => acc.censored += 1,
            }
        },
        SubwalkAcc::merge,
    );
    let sigmas = 4.0;
    let out: Vec<DartFlux> = darts
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let flow = p.flow[d].to_f64();
            DartFlux {
                dart: d,
                flow,
                interior: acc.interior[j],
                total: acc.total[j],
                interior_z: acc.interior[j].z(acc.completed, 0.0),
                total_z: acc.total[j].z(acc.completed, flow),
            }
        })
        .collect();
    let censored_ok = (acc.censored as f64) <= cfg.max_censored * cfg.trials as f64;
    let pass = censored_ok
        && acc.missed == 0
        && out
            .iter()
            .all(|f| f.interior_z.abs() <= sigmas && f.total_z.abs() <= sigmas);
    Ok(SubwalkFlux {
        darts: out,
        completed: acc.completed,
        censored: acc.censored,
        missed: acc.missed,
        interior_subwalks: acc.subwalks,
        seed: cfg.seed,
        sigmas,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexCrossing {
    pub vertex: VertexId,
    pub left_to_right: u64,
    pub right_to_left: u64,
    pub net: FluxStats,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianResult {
    pub position: f64,
    pub vertices: Vec<VertexCrossing>,
    pub total: FluxStats,
    pub total_z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianReport {
    pub meridians: Vec<MeridianResult>,
    pub completed: u64,
    pub censored: u64,
    pub seed: u64,
    pub sigmas: f64,
    pub pass: bool,
}

/// Per meridian: per-vertex `(net, lr, rl)` stats and the total.
#[derive(Clone)]
struct MeridianAcc {
    vertices: Vec<Vec<(VertexId, FluxStats, u64, u64)>>,
    total: Vec<FluxStats>,
    completed: u64,
    censored: u64,
}

impl MeridianAcc {
    fn new(k: usize) -> Self {
        Self {
            vertices: vec![Vec::new(); k],
            total: vec![FluxStats::default(); k],
            completed: 0,
            censored: 0,
        }
    }

    fn entry(list: &mut Vec<(VertexId, FluxStats, u64, u64)>, v: VertexId) -> usize {
        match list.binary_search_by_key(&v, |e| e.0) {
            Ok(i) => i,
            Err(i) => {
                list.insert(i, (v, FluxStats::default(), 0, 0));
                i
            }
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for (mine, theirs) in self.vertices.iter_mut().zip(o.vertices) {
            for (v, f, lr, rl) in theirs {
                let i = Self::entry(mine, v);
                mine[i].1 = mine[i].1.merge(f);
                mine[i].2 += lr;
                mine[i].3 += rl;
            }
        }
        for (a, b) in self.total.iter_mut().zip(o.total) {
            *a = a.merge(b);
        }
        self.completed += o.completed;
        self.censored += o.censored;
        self
    }
}

/// Horizontal geometry of a tiling relative to each vertex interval.
struct Strip {
    width: Vec<f64>,
    /// Offset of the rectangle of `edge(d)` inside the interval of `tail(d)`.
    dart_offset: Vec<f64>,
    rect_width: Vec<f64>,
}

impl Strip {
    fn new<S: Scalar>(t: &Tiling<S>, g: &PlanarGraph<S>) -> Self {
        let width: Vec<f64> = t.vertices.iter().map(|v| v.width.to_f64().min(1.0)).collect();
        let start: Vec<f64> = t.vertices.iter().map(|v| v.start.to_f64()).collect();
        let mut dart_offset = vec![0.0; g.num_darts()];
        for (d, off) in dart_offset.iter_mut().enumerate() {
            let x = g.tail(d);
            let mut rel = (t.rects[d / 2].start.to_f64() - start[x]).rem_euclid(1.0);
            if rel > width[x] && rel > 1.0 - 1e-9 {
                rel -= 1.0;
            }
            *off = rel;
        }
        let rect_width = t.rects.iter().map(|r| r.width.to_f64()).collect();
        Self {
            width,
            dart_offset,
            rect_width,
        }
    }
}

/// Counts crossings of vertical lines `w = position` by the walk drawn in
/// the tiling. At each visit of `x` the walk moves horizontally inside the
/// interval of `x` from its entry point to a uniform point and on to the
/// uniform exit point in the rectangle of the next edge; the entry point of
/// the next vertex is the same point of that rectangle. Net crossings per
/// vertex and in total should vanish.
pub fn meridian_flux<S: Scalar>(
    t: &Tiling<S>,
    g: &PlanarGraph<S>,
    meridians: &[f64],
    start: VertexId,
    cfg: &WalkConfig,
) -> Result<MeridianReport, WalkError> {
    cfg.validate()?;
    if !cfg.horizontal_sampling {
        return Err(WalkError::HorizontalSamplingOff);
    }
    if t.vertices.len() != g.num_vertices() {
        return Err(WalkError::TilingMismatch {
            tiling: t.vertices.len(),
            graph: g.num_vertices(),
        });
    }
    let walker = Walker::new(g);
    let kill = cfg.kill_mask(g);
    walker.check(g, &kill)?;
    let strip = Strip::new(t, g);
    let k = meridians.len();
    // Meridian position relative to each interval, or NaN when it misses.
    // A full interval is cut opposite the meridian.
    let full: Vec<bool> = strip.width.iter().map(|&w| w >= 1.0 - 1e-12).collect();
    let mut rel: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &m in meridians {
        let mut r = Vec::with_capacity(g.num_vertices());
        for (x, v) in t.vertices.iter().enumerate() {
            let w = strip.width[x];
            let pos = (m - v.start.to_f64()).rem_euclid(1.0);
            if full[x] {
                r.push(pos);
                continue;
            }
            let near = |a: f64| (pos - a).abs() < 1e-9;
            if w > 0.0 && (near(0.0) || near(w) || near(1.0)) {
                return Err(WalkError::MeridianOnEndpoint {
                    position: m,
                    vertex: g.label(x).to_string(),
                });
            }
            r.push(if pos < w { pos } else { f64::NAN });
        }
        rel.push(r);
    }
    // Side of a point of the interval of `x` relative to meridian `m`.
    let right_of = |x: VertexId, m: f64, a: f64| {
        if full[x] {
            (a - m - 0.5).rem_euclid(1.0) > 0.5
        } else {
            a > m
        }
    };

    let acc = run_trials(
        cfg,
        || MeridianAcc::new(k),
        |acc, i| {
            let mut rng = trial_rng(cfg.seed, i);
            // (meridian, vertex, net, lr, rl) for this trial.
            let mut local: Vec<(usize, VertexId, i64, u64, u64)> = Vec::new();
            let mut record = |x: VertexId, a: f64, b: f64| {
                for (j, r) in rel.iter().enumerate() {
                    let m = r[x];
                    if m.is_nan() {
                        continue;
                    }
                    let lr = right_of(x, m, b);
                    if right_of(x, m, a) == lr {
                        continue;
                    }
                    let pos = local.iter().position(|e| e.0 == j && e.1 == x);
                    let e = match pos {
                        Some(p) => &mut local[p],
                        None => {
                            local.push((j, x, 0, 0, 0));
                            local.last_mut().expect("pushed")
                        }
                    };
                    if lr {
                        e.2 += 1;
                        e.3 += 1;
                    } else {
                        e.2 -= 1;
                        e.4 += 1;
                    }
                }
            };
            let mut x = start;
            let mut entry = rng.random::<f64>() * strip.width[x];
            let mut absorbed = kill[x];
            let mut steps = 0;
            while !absorbed && steps < cfg.step_cap {
                let p = rng.random::<f64>() * strip.width[x];
                record(x, entry, p);
                let (d, y) = walker.step(x, &mut rng);
                let u = rng.random::<f64>() * strip.rect_width[d / 2];
                record(x, p, strip.dart_offset[d] + u);
                entry = strip.dart_offset[reverse(d)] + u;
                x = y;
                steps += 1;
                absorbed = kill[x];
            }
            if !absorbed {
                acc.censored += 1;
                return;
            }
            let p = rng.random::<f64>() * strip.width[x];
            record(x, entry, p);
            acc.completed += 1;
            let mut totals = vec![0i64; k];
            for &(j, v, net, lr, rl) in &local {
                totals[j] += net;
                let list = &mut acc.vertices[j];
                let at = MeridianAcc::entry(list, v);
                list[at].1.add(net);
                list[at].2 += lr;
                list[at].3 += rl;
            }
            for (j, tot) in totals.into_iter().enumerate() {
                acc.total[j].add(tot);
            }
        },
        MeridianAcc::merge,
    );

    let sigmas = 4.0;
    let n = acc.completed;
    let censored_ok = (acc.censored as f64) <= cfg.max_censored * cfg.trials as f64;
    let results: Vec<MeridianResult> = meridians
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let vertices: Vec<VertexCrossing> = acc.vertices[j]
                .iter()
                .map(|&(v, net, lr, rl)| VertexCrossing {
                    vertex: v,
                    left_to_right: lr,
                    right_to_left: rl,
                    net,
                    z: net.z(n, 0.0),
                })
                .collect();
            let total_z = acc.total[j].z(n, 0.0);
            let pass = censored_ok
                && total_z.abs() <= sigmas
                && vertices.iter().all(|v| v.z.abs() <= sigmas);
            MeridianResult {
                position: m,
                vertices,
                total: acc.total[j],
                total_z,
                pass,
            }
        })
        .collect();
    let pass = results.iter().all(|r| r.pass);
    Ok(MeridianReport {
        meridians: results,
        completed: acc.completed,
        censored: acc.censored,
        seed: cfg.seed,
        sigmas,
        pass,
    })
}
