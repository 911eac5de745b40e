//! Run configuration, echoed into every artifact.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tiler::boundary::SharpOp;
use tiler::graph::families;
use tiler::graph::io::graph_from_json;
use tiler::PlanarGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Tile,
    Verify,
    Walk,
    Boundary,
    Render,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BinaryTree,
    BAryTree,
    PerturbedTree,
    Hyperbolic,
    Path,
    Triangle,
    ChordedSquare,
    SquareBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    Input {
        path: PathBuf,
    },
    Family {
        family: Family,
        depth: usize,
        branching: usize,
        seed: u64,
        p: usize,
        q: usize,
    },
}

impl Source {
    pub fn load(&self) -> Result<PlanarGraph<f64>> {
        match self {
            Source::Input { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read input `{}`", path.display()))?;
                graph_from_json(&text).with_context(|| format!("invalid graph in `{}`", path.display()))
            }
            Source::Family {
                family,
                depth,
                branching,
                seed,
                p,
                q,
            } => {
                let g = match family {
                    Family::BinaryTree => families::b_ary_tree(2, *depth)?,
                    Family::BAryTree => families::b_ary_tree(*branching, *depth)?,
                    Family::PerturbedTree => families::perturbed_tree(*seed, *depth)?,
                    Family::Hyperbolic => families::hyperbolic(*p, *q, *depth)?,
                    Family::Path => families::path(),
                    Family::Triangle => families::triangle(),
                    Family::ChordedSquare => families::chorded_square(),
                    Family::SquareBox => families::square_box(*depth)?,
                };
                Ok(g)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual of the iterative solver.
    pub solver: f64,
    /// Geometric identities of the tiling.
    pub audit: f64,
    /// Cap on the total-variation threshold.
    pub tv: f64,
    /// Refinement gap of sharp functions.
    pub sharp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-12,
            audit: 1e-7,
            tv: 0.02,
            sharp: 1e-3,
        }
    }
}

impl Tolerances {
    /// Applies `key=value` overrides.
    pub fn apply(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .with_context(|| format!("tolerance override `{o}` is not key=value"))?;
            let v: f64 = value
                .trim()
                .parse()
                .with_context(|| format!("tolerance `{key}` has non-numeric value `{value}`"))?;
            let slot = match key.trim() {
                "solver" => &mut self.solver,
                "audit" => &mut self.audit,
                "tv" => &mut self.tv,
                "sharp" => &mut self.sharp,
                other => bail!("unknown tolerance `{other}` (expected solver, audit, tv or sharp)"),
            };
            *slot = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("solver", self.solver),
            ("audit", self.audit),
            ("tv", self.tv),
            ("sharp", self.sharp),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerance `{name}` must be positive, got {v}");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSettings {
    pub seed: u64,
    pub trials: u64,
    pub step_cap: u64,
    pub parallel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    Exit,
    LastVisit,
    Flux,
    Meridian,
    Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgSettings {
    pub width: f64,
    pub height: f64,
    pub stroke: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub walks: bool,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    pub tolerances: Tolerances,
    pub walk: WalkSettings,
    pub format: Format,
    pub svg: SvgSettings,
    pub checks: Checks,
    pub walk_kind: WalkKind,
    /// Level of the exit distribution, or the upper level of a pair.
    pub level: Option<f64>,
    pub arcs: Vec<(f64, f64)>,
    pub op: Option<SharpOp>,
    pub audit: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.walk.trials == 0 {
            bail!("`trials` must be at least 1");
        }
        if self.walk.step_cap == 0 {
            bail!("`step_cap` must be at least 1");
        }
        if let Some(l) = self.level {
            if !(l > 0.0 && l < 1.0) {
                bail!("`level` must lie strictly between 0 and 1, got {l}");
            }
        }
        if !(self.svg.width > 0.0 && self.svg.height > 0.0 && self.svg.stroke >= 0.0) {
            bail!("svg `width` and `height` must be positive and `stroke` non-negative");
        }
        let allowed: &[Format] = match self.command {
            Command::Tile => &[Format::Json, Format::Svg],
            Command::Verify => &[Format::Json, Format::Csv],
            Command::Walk => match self.walk_kind {
                WalkKind::Exit | WalkKind::LastVisit => &[Format::Json, Format::Csv],
                _ => &[Format::Json],
            },
            Command::Boundary => &[Format::Json],
            Command::Render => &[Format::Svg],
        };
        if !allowed.contains(&self.format) {
            bail!(
                "`format` {:?} is not available for this command",
                self.format
            );
        }
        if self.command == Command::Boundary {
            if self.arcs.is_empty() {
                bail!("`arc` is required: give at least one arc as a,b");
            }
            for &(a, b) in &self.arcs {
                if !(a.is_finite() && b.is_finite()) {
                    bail!("`arc` endpoints must be finite");
                }
            }
            if self.op == Some(SharpOp::Complement) && self.arcs.len() != 1 {
                bail!("`op` complement takes exactly one arc");
            }
        }
        Ok(())
    }
}
