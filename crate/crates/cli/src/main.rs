//! `tiler`: square tilings of planar networks and their random-walk audits.
//!
//! Exit status: 0 when every requested audit passes, 2 when one fails (or a
//! reproduction differs), 1 on bad input or a solver error.

mod artifact;
mod config;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tiler::boundary::SharpOp;

use crate::artifact::{read_header, Kind};
use crate::config::{
    Checks, Command, Family, Format, RunConfig, Source, SvgSettings, Tolerances, WalkKind,
    WalkSettings,
};

#[derive(Parser)]
#[command(name = "tiler", version, about = "Square tilings of planar electrical networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Graph document (tiler-graph/1).
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Truncation depth (layers for hyperbolic, radius for square-box).
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    /// Conductance seed of perturbed-tree.
    #[arg(long, default_value_t = 0)]
    family_seed: u64,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    q: usize,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 100_000)]
    step_cap: u64,
    /// Override a tolerance: solver, audit, tv or sharp (e.g. audit=1e-6).
    #[arg(long, value_name = "KEY=VALUE")]
    tolerance: Vec<String>,
    /// Primary artifact path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run Monte-Carlo trials on one thread.
    #[arg(long)]
    serial: bool,
    #[arg(long, default_value_t = 1000.0)]
    width: f64,
    #[arg(long, default_value_t = 1000.0)]
    height: f64,
    #[arg(long, default_value_t = 0.5)]
    stroke: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve, tile and audit the tiling.
    Tile {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Also write the SVG drawing here.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Also write the harmonic profile here.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Audit the tiling and, on request, the walk and boundary identities.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Walk and boundary suites as well.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        walks: bool,
        #[arg(long)]
        boundary: bool,
    },
    /// One Monte-Carlo experiment.
    Walk {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = WalkKind::Exit)]
        kind: WalkKind,
        /// Level set of the experiment; the deepest one with at most 64
        /// vertices when absent.
        #[arg(long)]
        level: Option<f64>,
    },
    /// Harmonic function of a boundary arc set.
    Boundary {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Arc `a,b` running counterclockwise from a to b; repeatable.
        #[arg(long, value_parser = parse_arc)]
        arc: Vec<(f64, f64)>,
        /// Combine the arcs one function each instead of as one set.
        #[arg(long, value_parser = parse_op)]
        op: Option<SharpOp>,
        /// Walk-based sharpness and faithfulness audits.
        #[arg(long)]
        audit: bool,
    },
    /// Draw the tiling as SVG.
    Render {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-run an emitted artifact's configuration and compare byte for byte.
    Reproduce { report: PathBuf },
}

fn parse_arc(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("arc must be written a,b")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("arc start `{a}` is not a number"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("arc end `{b}` is not a number"))?;
    Ok((a, b))
}

fn parse_op(s: &str) -> Result<SharpOp, String> {
    match s {
        "union" => Ok(SharpOp::Union),
        "intersection" => Ok(SharpOp::Intersection),
        "complement" => Ok(SharpOp::Complement),
        _ => Err("op must be union, intersection or complement".into()),
    }
}

fn source(args: &SourceArgs) -> Result<Source> {
    match (&args.input, args.family) {
        (Some(path), _) => Ok(Source::Input { path: path.clone() }),
        (None, Some(family)) => Ok(Source::Family {
            family,
            depth: args.depth,
            branching: args.branching,
            seed: args.family_seed,
            p: args.p,
            q: args.q,
        }),
        (None, None) => bail!("give a graph with --input or --family"),
    }
}

fn base(command: Command, src: &SourceArgs, run: &RunArgs, format: Format) -> Result<RunConfig> {
    let mut tolerances = Tolerances::default();
    tolerances.apply(&run.tolerance)?;
    Ok(RunConfig {
        command,
        source: source(src)?,
        tolerances,
        walk: WalkSettings {
            seed: run.seed,
            trials: run.trials,
            step_cap: run.step_cap,
            parallel: !run.serial,
        },
        format: run.format.unwrap_or(format),
        svg: SvgSettings {
            width: run.width,
            height: run.height,
            stroke: run.stroke,
        },
        checks: Checks {
            walks: false,
            boundary: false,
        },
        walk_kind: WalkKind::Exit,
        level: None,
        arcs: Vec::new(),
        op: None,
        audit: false,
    })
}

fn write(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cfg: &RunConfig, out: Option<&Path>, extra: &[(Kind, &Path)]) -> Result<u8> {
    let output = pipeline::run(cfg)?;
    let main = pipeline::primary(cfg);
    let artifact = output.get(main).context("command produced no primary artifact")?;
    write(out, &artifact.text)?;
    for &(kind, path) in extra {
        let a = output.get(kind).context("command produced no such artifact")?;
        write(Some(path), &a.text)?;
    }
    Ok(if output.pass { 0 } else { 2 })
}

fn reproduce(path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read report `{}`", path.display()))?;
    let header = read_header(&text)?;
    let output = pipeline::run(&header.config)?;
    let again = output
        .get(header.artifact)
        .context("configuration does not produce this kind of artifact")?;
    if again.text == text {
        eprintln!("reproduced: identical");
        return Ok(0);
    }
    let line = again
        .text
        .lines()
        .zip(text.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| again.text.lines().count().min(text.lines().count()));
    eprintln!("mismatch: first difference at line {}", line + 1);
    Ok(2)
}

fn main_inner(cli: Cli) -> Result<u8> {
    match cli.command {
        Cmd::Tile {
            source,
            run,
            render,
            profile,
        } => {
            let cfg = base(Command::Tile, &source, &run, Format::Json)?;
            let mut extra = Vec::new();
            if let Some(p) = &render {
                extra.push((Kind::Svg, p.as_path()));
            }
            if let Some(p) = &profile {
                extra.push((Kind::Profile, p.as_path()));
            }
            execute(&cfg, run.out.as_deref(), &extra)
        }
        Cmd::Verify {
            source,
            run,
            all,
            walks,
            boundary,
        } => {
            let mut cfg = base(Command::Verify, &source, &run, Format::Json)?;
            cfg.checks = Checks {
                walks: all || walks,
                boundary: all || boundary,
            };
            execute(&cfg, run.out.as_deref(), &[])
        }
        Cmd::Walk {
            source,
            run,
            kind,
            level,
        } => {
            let mut cfg = base(Command::Walk, &source, &run, Format::Json)?;
            cfg.walk_kind = kind;
            cfg.level = level;
            execute(&cfg, run.out.as_deref(), &[])
        }
        Cmd::Boundary {
            source,
            run,
            arc,
            op,
            audit,
        } => {
            let mut cfg = base(Command::Boundary, &source, &run, Format::Json)?;
            cfg.arcs = arc;
            cfg.op = op;
            cfg.audit = audit;
            execute(&cfg, run.out.as_deref(), &[])
        }
        Cmd::Render { source, run } => {
            let cfg = base(Command::Render, &source, &run, Format::Svg)?;
            execute(&cfg, run.out.as_deref(), &[])
        }
        Cmd::Reproduce { report } => reproduce(&report),
    }
}

fn main() -> ExitCode {
    // Usage errors are input errors: exit 1, keeping 2 for failed audits.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
