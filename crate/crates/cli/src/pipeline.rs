//! Build, solve, tile, simulate, audit and render for one configuration.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use tiler::boundary::{
    ade_check, combine_sharp, faithfulness_audit, harmonic_defect, layered_criterion,
    level_set, level_set_drift, nested_levels, noalter_check, sharp_from_arc, verify_sharpness,
    ArcSet, HypothesisStatus, LayeredOptions, SharpFunction, SharpOp, SharpOptions,
    SharpnessOptions,
};
use tiler::graph::{DartId, VertexId};
use tiler::harmonic::{killed_profile, HarmonicProfile, SolverOptions};
use tiler::tiling::{audit_tiling, render_svg, tile_killed, AuditOptions, SvgOptions, TilingOptions};
use tiler::walk::{
    check_exit, exit_distribution, interior_subwalk_flux, last_visit_distribution, meridian_flux,
    trajectory_limit, ExitStats, KillRule, LimitOptions, WalkConfig,
};
use tiler::{Graph, Scalar, Tiling64};

use crate::artifact::{csv_artifact, json_artifact, svg_artifact, Artifact, Kind};
use crate::config::{Command, Format, RunConfig, WalkKind};

/// Fractional parts of `k·φ`, away from dyadic interval endpoints.
const MERIDIANS: [f64; 5] = [0.618034, 0.236068, 0.854102, 0.472136, 0.090170];
const MAX_ATOMS: usize = 64;

pub struct Output {
    pub artifacts: Vec<Artifact>,
    pub pass: bool,
}

impl Output {
    pub fn get(&self, kind: Kind) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.kind == kind)
    }
}

/// Artifact written to `--out` (or stdout) for a configuration.
pub fn primary(cfg: &RunConfig) -> Kind {
    match (cfg.command, cfg.format) {
        (_, Format::Csv) => Kind::Csv,
        (Command::Tile, Format::Svg) | (Command::Render, _) => Kind::Svg,
        (Command::Tile, _) => Kind::Tiling,
        (Command::Verify, _) => Kind::Audit,
        (Command::Walk, _) => Kind::Stats,
        (Command::Boundary, _) => Kind::Sharp,
    }
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass,
            detail: String::new(),
        }
    }

    fn with(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

struct Built {
    g: Graph,
    profile: HarmonicProfile<f64>,
    t: Tiling64,
}

fn solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tolerance: cfg.tolerances.solver,
        ..SolverOptions::default()
    }
}

fn walk_config(cfg: &RunConfig, horizontal: bool) -> WalkConfig {
    WalkConfig {
        seed: cfg.walk.seed,
        trials: cfg.walk.trials,
        first_trial: 0,
        step_cap: cfg.walk.step_cap,
        kill: KillRule::AtSinks,
        horizontal_sampling: horizontal,
        max_censored: 1e-3,
        parallel: cfg.walk.parallel,
    }
}

fn build(cfg: &RunConfig) -> Result<Built> {
    let g = cfg.source.load()?;
    let (profile, t) = tile_killed(&g, &solver(cfg), &TilingOptions::default())
        .context("cannot tile the network")?;
    Ok(Built { g, profile, t })
}

fn floor(b: &Built) -> f64 {
    b.g.sinks()
        .iter()
        .map(|&s| b.t.vertices[s].height.to_f64())
        .fold(0.0, f64::max)
}

/// Dyadic levels `2^-k` strictly above every sink.
fn dyadic_levels(b: &Built, from: i32, to: i32) -> Vec<f64> {
    let f = floor(b);
    (from..=to)
        .map(|k| 0.5f64.powi(k))
        .filter(|&l| l > f + 1e-12)
        .collect()
}

/// Deepest dyadic level whose level set has at most `MAX_ATOMS` vertices.
fn auto_level(b: &Built) -> Result<f64> {
    let mut best = None;
    for l in dyadic_levels(b, 1, 40) {
        if level_set(&b.t, &b.g, l)?.cut.boundary.len() > MAX_ATOMS {
            break;
        }
        best = Some(l);
    }
    best.context("no level set with at most 64 vertices lies above the sinks")
}

fn labels(g: &Graph, vs: &[VertexId]) -> Vec<String> {
    vs.iter().map(|&v| g.label(v).to_string()).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    match cfg.command {
        Command::Tile => tile(cfg),
        Command::Render => render(cfg),
        Command::Verify => verify(cfg),
        Command::Walk => walk(cfg),
        Command::Boundary => boundary(cfg),
    }
}

fn tiling_data(b: &Built, audit: &Value) -> Value {
    let (g, t) = (&b.g, &b.t);
    let rects: Vec<Value> = t
        .rects
        .iter()
        .enumerate()
        .map(|(e, r)| {
            json!({
                "edge": g.edge_label(e),
                "start": r.start,
                "width": r.width,
                "low": r.low,
                "high": r.high,
                "degenerate": r.degenerate,
            })
        })
        .collect();
    let boundary: Vec<Value> = t
        .boundary_rects
        .iter()
        .map(|(v, r)| {
            json!({
                "vertex": g.label(*v),
                "start": r.start,
                "width": r.width,
                "low": r.low,
                "high": r.high,
            })
        })
        .collect();
    let vertices: Vec<Value> = t
        .vertices
        .iter()
        .enumerate()
        .map(|(v, iv)| {
            json!({
                "vertex": g.label(v),
                "start": iv.start,
                "width": iv.width,
                "height": iv.height,
            })
        })
        .collect();
    json!({
        "root": g.label(t.root),
        "zeta": t.zeta,
        "rects": rects,
        "boundary_rects": boundary,
        "vertices": vertices,
        "audit": audit,
    })
}

fn profile_data(b: &Built) -> Value {
    let (g, p) = (&b.g, &b.profile);
    let mut fixed = g.sink_mask();
    fixed[g.root()] = true;
    let h: Vec<Value> = p
        .h
        .iter()
        .enumerate()
        .map(|(v, h)| json!({"vertex": g.label(v), "h": h}))
        .collect();
    let flow: Vec<Value> = (0..g.num_edges())
        .map(|e| json!({"edge": g.edge_label(e), "flow": p.flow[2 * e]}))
        .collect();
    json!({
        "mode": p.mode,
        "eta": p.eta,
        "residual": p.residual,
        "max_interior_divergence": p.max_interior_divergence(g, &fixed),
        "h": h,
        "flow": flow,
    })
}

fn svg_options(cfg: &RunConfig) -> SvgOptions {
    SvgOptions {
        width: cfg.svg.width,
        height: cfg.svg.height,
        stroke_width: cfg.svg.stroke,
    }
}

fn tile(cfg: &RunConfig) -> Result<Output> {
    let b = build(cfg)?;
    let audit = audit_tiling(
        &b.t,
        &AuditOptions {
            tolerance: cfg.tolerances.audit,
        },
    );
    let audit_value = serde_json::to_value(&audit)?;
    Ok(Output {
        artifacts: vec![
            json_artifact("tiler-tiling/1", Kind::Tiling, cfg, tiling_data(&b, &audit_value)),
            json_artifact("tiler-profile/1", Kind::Profile, cfg, profile_data(&b)),
            svg_artifact("tiler-tiling/1", cfg, &render_svg(&b.t, &svg_options(cfg))),
        ],
        pass: audit.pass,
    })
}

fn render(cfg: &RunConfig) -> Result<Output> {
    let b = build(cfg)?;
    Ok(Output {
        artifacts: vec![svg_artifact("tiler-tiling/1", cfg, &render_svg(&b.t, &svg_options(cfg)))],
        pass: true,
    })
}

fn exit_json(stats: &ExitStats, names: Vec<String>, widths: &[f64], tv_cap: f64, level: f64) -> (Value, bool) {
    let check = check_exit(stats, widths, tv_cap, 1e-3);
    let v = json!({
        "level": level,
        "atoms": names,
        "counts": stats.counts,
        "widths": widths,
        "completed": stats.completed,
        "censored": stats.censored,
        "missed": stats.missed,
        "tv": check.tv,
        "threshold": check.threshold,
        "censored_fraction": check.censored_fraction,
        "pass": check.pass,
    });
    (v, check.pass)
}

struct ExitRun {
    stats: ExitStats,
    names: Vec<String>,
    /// Labels of every vertex of the walked graph.
    all: Vec<String>,
    widths: Vec<f64>,
    level: f64,
}

fn first_hits(b: &Built, cfg: &RunConfig) -> Result<ExitRun> {
    let level = match cfg.level {
        Some(l) => l,
        None => auto_level(b)?,
    };
    let ls = level_set(&b.t, &b.g, level)?;
    let n = b.g.num_vertices();
    let widths: Vec<f64> = ls.cut.boundary.iter().map(|&v| ls.intervals[v - n].1).collect();
    let stats = exit_distribution(&ls.cut.graph, b.g.root(), &ls.cut.boundary, &walk_config(cfg, false))?;
    Ok(ExitRun {
        names: labels(&ls.cut.graph, &ls.cut.boundary),
        all: ls.cut.graph.labels().to_vec(),
        stats,
        widths,
        level: ls.level,
    })
}

fn last_visits(b: &Built, cfg: &RunConfig) -> Result<ExitRun> {
    let upper = match cfg.level {
        Some(l) => l,
        None => auto_level(b)?,
    };
    let nest = nested_levels(&b.t, &b.g, upper, upper / 8.0)?;
    let stats = last_visit_distribution(
        &nest.graph,
        b.g.root(),
        &nest.upper,
        &nest.lower,
        &walk_config(cfg, false),
    )?;
    Ok(ExitRun {
        names: labels(&nest.graph, &nest.upper),
        all: nest.graph.labels().to_vec(),
        stats,
        widths: nest.upper_intervals.iter().map(|iv| iv.1).collect(),
        level: upper,
    })
}

/// Ten darts pointing down inside the strip between two nested levels.
fn strip_flux(b: &Built, cfg: &RunConfig) -> Result<tiler::walk::SubwalkFlux> {
    let upper = match cfg.level {
        Some(l) => l,
        None => auto_level(b)?,
    };
    let nest = nested_levels(&b.t, &b.g, upper, upper / 8.0)?;
    let g2 = &nest.graph;
    let p = killed_profile(g2, &solver(cfg))?;
    let (hi, lo) = (upper * (1.0 + 1e-9), upper / 8.0 * (1.0 - 1e-9));
    let strip: Vec<DartId> = (0..g2.num_darts())
        .filter(|&d| {
            let (a, z) = (p.h[g2.tail(d)], p.h[g2.head(d)]);
            a > z && a <= hi && z >= lo
        })
        .collect();
    if strip.is_empty() {
        bail!("no edges lie between levels {upper} and {}", upper / 8.0);
    }
    let step = strip.len().div_ceil(10);
    let darts: Vec<DartId> = strip.into_iter().step_by(step).take(10).collect();
    Ok(interior_subwalk_flux(
        g2,
        &p,
        b.g.root(),
        &nest.upper,
        &nest.lower,
        &darts,
        &walk_config(cfg, false),
    )?)
}

fn limit_options() -> LimitOptions {
    LimitOptions {
        arcs: (0..8).map(|j| (j as f64 / 8.0, 0.125)).collect(),
        ..LimitOptions::default()
    }
}

fn walk(cfg: &RunConfig) -> Result<Output> {
    let b = build(cfg)?;
    let (data, pass, csv) = match cfg.walk_kind {
        WalkKind::Exit | WalkKind::LastVisit => {
            let r = if cfg.walk_kind == WalkKind::Exit {
                first_hits(&b, cfg)?
            } else {
                last_visits(&b, cfg)?
            };
            let (mut v, pass) = exit_json(&r.stats, r.names.clone(), &r.widths, cfg.tolerances.tv, r.level);
            v["kind"] = json!(cfg.walk_kind);
            (v, pass, Some(r.stats.to_csv(&r.all, Some(&r.widths))))
        }
        WalkKind::Flux => {
            let r = strip_flux(&b, cfg)?;
            (json!({"kind": cfg.walk_kind, "flux": r}), r.pass, None)
        }
        WalkKind::Meridian => {
            let r = meridian_flux(&b.t, &b.g, &MERIDIANS, b.g.root(), &walk_config(cfg, true))?;
            (json!({"kind": cfg.walk_kind, "meridians": r}), r.pass, None)
        }
        WalkKind::Limit => {
            let r = trajectory_limit(&b.t, &b.g, b.g.root(), &walk_config(cfg, false), &limit_options())?;
            (json!({"kind": cfg.walk_kind, "limit": r}), r.pass, None)
        }
    };
    let mut artifacts = vec![json_artifact("tiler-stats/1", Kind::Stats, cfg, data)];
    if let Some(csv) = csv {
        artifacts.push(csv_artifact("tiler-stats/1", cfg, &csv));
    }
    Ok(Output { artifacts, pass })
}

fn sharp_options(cfg: &RunConfig) -> SharpOptions {
    SharpOptions {
        tolerance: cfg.tolerances.sharp,
        solver: solver(cfg),
        ..SharpOptions::default()
    }
}

/// The root and two more non-absorbing vertices spread over the ids.
fn probes(g: &Graph) -> Vec<VertexId> {
    let n = g.num_vertices();
    let sink = g.sink_mask();
    let mut out = vec![g.root()];
    for k in [n / 3, 2 * n / 3] {
        if let Some(v) = (k..n).chain(0..k).find(|&v| !sink[v] && !out.contains(&v)) {
            out.push(v);
        }
    }
    out
}

fn sharp_for(b: &Built, arcs: &ArcSet, cfg: &RunConfig) -> Result<SharpFunction> {
    Ok(sharp_from_arc(&b.t, &b.g, arcs, &sharp_options(cfg))?)
}

fn boundary(cfg: &RunConfig) -> Result<Output> {
    let b = build(cfg)?;
    let opts = SharpOptions {
        probes: probes(&b.g),
        ..sharp_options(cfg)
    };
    let s = match cfg.op {
        None => sharp_from_arc(&b.t, &b.g, &ArcSet::from_arcs(&cfg.arcs), &opts)?,
        Some(op) => {
            let parts: Vec<SharpFunction> = cfg
                .arcs
                .iter()
                .map(|&a| sharp_from_arc(&b.t, &b.g, &ArcSet::from_arcs(&[a]), &opts))
                .collect::<Result<_, _>>()?;
            let refs: Vec<&SharpFunction> = parts.iter().collect();
            combine_sharp(&refs, op, &b.t, &b.g, &opts)?
        }
    };
    let probe_values: Vec<Value> = s
        .probes
        .iter()
        .map(|&v| json!({"vertex": b.g.label(v), "value": s.value(v)}))
        .collect();
    let mut data = json!({
        "arcs": s.arcs.pieces(),
        "probes": probe_values,
        "levels": s.levels,
        "gaps": s.gaps,
        "converged": s.converged,
        "harmonic_defect": harmonic_defect(&b.g, &s.values),
    });
    let mut pass = s.converged;
    if cfg.audit {
        let wc = walk_config(cfg, false);
        let sharp = verify_sharpness(&s.values, &b.g, b.g.root(), &wc, &SharpnessOptions::default())?;
        let levels = dyadic_levels(&b, 1, 40);
        let faith = faithfulness_audit(&s.values, &b.t, &b.g, &levels, &wc, &SharpnessOptions::default())?;
        pass &= sharp.pass && faith.pass;
        data["sharpness"] = serde_json::to_value(&sharp)?;
        data["faithfulness"] = serde_json::to_value(&faith)?;
    }
    data["pass"] = json!(pass);
    Ok(Output {
        artifacts: vec![json_artifact("tiler-sharp/1", Kind::Sharp, cfg, data)],
        pass,
    })
}

fn walk_checks(b: &Built, cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<()> {
    for (name, r) in [
        ("first-hit-distribution", first_hits(b, cfg)?),
        ("last-visit-distribution", last_visits(b, cfg)?),
    ] {
        let c = check_exit(&r.stats, &r.widths, cfg.tolerances.tv, 1e-3);
        checks.push(
            Check::new(name, c.tv, c.threshold, c.pass)
                .with(format!("level {:.6}, {} atoms, censored {:.2e}", r.level, r.widths.len(), c.censored_fraction)),
        );
    }

    let flux = strip_flux(b, cfg)?;
    let worst_interior = flux.darts.iter().map(|d| d.interior_z.abs()).fold(0.0, f64::max);
    let worst_total = flux.darts.iter().map(|d| d.total_z.abs()).fold(0.0, f64::max);
    checks.push(
        Check::new("interior-subwalk-flux", worst_interior, flux.sigmas, flux.pass)
            .with(format!(
                "{} darts, {} interior subwalks, largest total |z| {:.2}",
                flux.darts.len(),
                flux.interior_subwalks,
                worst_total
            )),
    );

    let mer = meridian_flux(&b.t, &b.g, &MERIDIANS, b.g.root(), &walk_config(cfg, true))?;
    let worst = mer.meridians.iter().map(|m| m.total_z.abs()).fold(0.0, f64::max);
    checks.push(
        Check::new("meridian-flux", worst, mer.sigmas, mer.pass)
            .with(format!("{} meridians", mer.meridians.len())),
    );

    let lim = trajectory_limit(&b.t, &b.g, b.g.root(), &walk_config(cfg, false), &limit_options())?;
    let worst = lim.arcs.iter().map(|a| (a.mass - a.length).abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "boundary-arc-mass",
        worst,
        limit_options().arc_tolerance,
        lim.arcs.iter().all(|a| a.pass),
    ));
    checks.push(Check::new("final-interval-diameter", lim.mean_diameter, 0.01, lim.mean_diameter < 0.01));
    checks.push(Check::new(
        "alternations-stable",
        lim.alternations.iter().filter(|a| !a.stable).count() as f64,
        0.0,
        lim.alternations.iter().all(|a| a.stable),
    ));
    checks.push(Check::new(
        "heights-decrease",
        0.0,
        0.0,
        lim.heights_decrease,
    ));
    Ok(())
}

fn boundary_checks(b: &Built, cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<()> {
    let wc = walk_config(cfg, false);
    let half = ArcSet::from_arcs(&[(0.0, 0.5)]);
    let quarter = ArcSet::from_arcs(&[(0.0, 0.25)]);
    let odd = ArcSet::from_arcs(&[(0.3, 0.8)]);
    let s_half = sharp_for(b, &half, cfg)?;
    let s_quarter = sharp_for(b, &quarter, cfg)?;
    let s_odd = sharp_for(b, &odd, cfg)?;
    let s_comp = combine_sharp(&[&s_half], SharpOp::Complement, &b.t, &b.g, &sharp_options(cfg))?;

    let defect = [&s_half, &s_quarter, &s_odd, &s_comp]
        .iter()
        .map(|s| harmonic_defect(&b.g, &s.values))
        .fold(0.0, f64::max);
    checks.push(Check::new("harmonicity", defect, cfg.tolerances.audit, defect <= cfg.tolerances.audit));
    let comp = s_half
        .values
        .iter()
        .zip(&s_comp.values)
        .map(|(a, c)| (a + c - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("complement-law", comp, cfg.tolerances.audit, comp <= cfg.tolerances.audit));

    let sets = [&half, &quarter, &odd];
    let mut exact = true;
    for a in sets {
        for c in sets {
            exact &= a.union(c).complement() == a.complement().intersection(&c.complement());
            exact &= a.intersection(c).complement() == a.complement().union(&c.complement());
        }
    }
    checks.push(Check::new("de-morgan", if exact { 0.0 } else { 1.0 }, 0.0, exact));

    let so = SharpnessOptions::default();
    for v in probes(&b.g) {
        let r = verify_sharpness(&s_half.values, &b.g, v, &wc, &so)?;
        checks.push(
            Check::new(format!("limit-frequency[{}]", b.g.label(v)), (r.limit_one - r.value).abs(), so.tolerance, r.pass)
                .with(format!("s = {:.6}, limit-1 {:.6}, middle {:.6}", r.value, r.limit_one, r.middle)),
        );
    }

    let ade = ade_check(&s_half.values, &b.g, 0.1, 0.5, &wc)?;
    checks.push(
        Check::new("ade-bound", ade.fraction, ade.bound, ade.pass)
            .with(format!("{} start vertices, sigma {:.2e}", ade.starts, ade.sigma)),
    );
    let na = noalter_check(&s_half.values, &b.g, b.g.root(), 0.1, 4, &wc)?;
    let excess = na
        .rows
        .iter()
        .map(|r| r.probability - r.bound - 3.0 * r.sigma)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(
        Check::new("no-alternation", excess, 0.0, na.pass).with(
            na.rows
                .iter()
                .map(|r| format!("k={}: {:.5} vs {:.5}", r.k, r.probability, r.bound))
                .collect::<Vec<_>>()
                .join(", "),
        ),
    );

    let levels = dyadic_levels(b, 1, 40);
    for (name, s) in [("half", &s_half), ("quarter", &s_quarter), ("arc", &s_odd)] {
        let d = level_set_drift(&s.values, &b.t, &b.g, &levels)?;
        let terminal = d.terminal.unwrap_or(0.0);
        checks.push(
            Check::new(format!("level-set-drift[{name}]"), terminal, 0.05, terminal < 0.05 && d.decreasing)
                .with(format!("{} levels, decreasing {}", d.levels.len(), d.decreasing)),
        );
        let f = faithfulness_audit(&s.values, &b.t, &b.g, &levels, &wc, &so)?;
        checks.push(
            Check::new(format!("faithfulness[{name}]"), f.estimate, so.tolerance, f.pass)
                .with(format!("sigma {:.2e}, |X| {:.6}", f.sigma, f.x_measure)),
        );
    }

    let layered_levels = dyadic_levels(b, 2, 5);
    let r = layered_criterion(
        &b.t,
        &b.g,
        &[&s_half.values, &s_quarter.values],
        &layered_levels,
        &wc,
        &LayeredOptions::default(),
    )?;
    for h in r.hypotheses {
        checks.push(
            Check::new(format!("layered:{}", h.name), h.value, h.tolerance, h.status == HypothesisStatus::Pass)
                .with(h.detail),
        );
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<Output> {
    let b = build(cfg)?;
    let audit = audit_tiling(
        &b.t,
        &AuditOptions {
            tolerance: cfg.tolerances.audit,
        },
    );
    let mut checks: Vec<Check> = audit
        .entries()
        .into_iter()
        .map(|(name, v, ok)| Check::new(format!("tiling:{name}"), v, audit.tolerance, ok))
        .collect();
    if cfg.checks.walks {
        walk_checks(&b, cfg, &mut checks)?;
    }
    if cfg.checks.boundary {
        boundary_checks(&b, cfg, &mut checks)?;
    }
    let pass = checks.iter().all(|c| c.pass);
    let mut csv = String::from("name,value,tolerance,pass\n");
    for c in &checks {
        csv.push_str(&format!("{},{:e},{:e},{}\n", c.name, c.value, c.tolerance, c.pass));
    }
    let data = json!({"checks": checks, "pass": pass});
    Ok(Output {
        artifacts: vec![
            json_artifact("tiler-audit/1", Kind::Audit, cfg, data),
            csv_artifact("tiler-audit/1", cfg, &csv),
        ],
        pass,
    })
}
