mod commands;
mod config;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Command, Format, LadderOverrides, QuadratureOverrides, RunConfig};

/// Curvature, Gauss-Bonnet and renormalized-area numerics for hypersurfaces in H3 and H5.
#[derive(Parser, Debug)]
#[command(name = "renormgeo", version)]
struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores). Falls back to RENORMGEO_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[command(flatten)]
    ladder: LadderFlags,
    #[command(flatten)]
    quadrature: QuadratureFlags,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug)]
struct LadderFlags {
    /// Largest truncation height of the ladder.
    #[arg(long, global = true)]
    eps0: Option<f64>,
    /// Ratio between successive rungs.
    #[arg(long, global = true)]
    ratio: Option<f64>,
    #[arg(long, global = true)]
    rungs: Option<usize>,
}

#[derive(Args, Debug)]
struct QuadratureFlags {
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    profile_nodes: Option<usize>,
    #[arg(long, global = true)]
    transverse_nodes: Option<usize>,
    #[arg(long, global = true)]
    transverse_panels: Option<usize>,
    #[arg(long, global = true)]
    panels: Option<usize>,
    #[arg(long, global = true)]
    grading_ratio: Option<f64>,
    /// Recompute with doubled nodes and fail if the value moves.
    #[arg(long, global = true)]
    refine_check: bool,
    /// Evaluate quadrature lines and ladder rungs on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Debug, Default)]
struct SurfaceArgs {
    /// `builtin:<name>?k=v&...` or a path to a JSON surface spec.
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List the builtin surface families.
    Catalog {
        #[arg(value_parser = ["list"])]
        action: Option<String>,
    },
    /// Pointwise extrinsic and intrinsic curvature at a parameter point.
    Curvature {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Comma-separated parameter coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
    },
    /// Integral over the truncated surface (or its boundary with --boundary).
    Integrate {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        quantity: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        boundary: bool,
    },
    /// Finite part of a divergent integral from a fitted eps-expansion.
    Renorm {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        quantity: Option<String>,
        /// Basis exponents, comma-separated; `log` adds a log term.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        basis: Option<Vec<String>>,
    },
    /// The raw ladder of truncated integrals.
    Expand {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        quantity: Option<String>,
    },
    /// Check one identity on a surface.
    Verify {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run the acceptance checks; exit status 0 iff all selected checks pass.
    Suite {
        /// Restrict to these criterion ids, comma-separated.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
    },
}

impl Cli {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            output: self.output,
            format: self.format,
            threads: self.threads,
            ladder: LadderOverrides {
                eps0: self.ladder.eps0,
                ratio: self.ladder.ratio,
                rungs: self.ladder.rungs,
            },
            quadrature: QuadratureOverrides {
                nodes: self.quadrature.nodes,
                profile_nodes: self.quadrature.profile_nodes,
                transverse_nodes: self.quadrature.transverse_nodes,
                transverse_panels: self.quadrature.transverse_panels,
                panels: self.quadrature.panels,
                grading_ratio: self.quadrature.grading_ratio,
                refine_check: self.quadrature.refine_check.then_some(true),
                sequential: self.quadrature.sequential.then_some(true),
            },
            ..Default::default()
        };
        let take_surface = |cfg: &mut RunConfig, s: SurfaceArgs| {
            cfg.surface = s.surface;
            cfg.metric = s.metric;
        };
        cfg.command = self.command.as_ref().map(|c| match c {
            Cmd::Catalog { .. } => Command::Catalog,
            Cmd::Curvature { .. } => Command::Curvature,
            Cmd::Integrate { .. } => Command::Integrate,
            Cmd::Renorm { .. } => Command::Renorm,
            Cmd::Expand { .. } => Command::Expand,
            Cmd::Verify { .. } => Command::Verify,
            Cmd::Suite { .. } => Command::Suite,
        });
        match self.command {
            None | Some(Cmd::Catalog { .. }) => {}
            Some(Cmd::Curvature { surface, point }) => {
                take_surface(&mut cfg, surface);
                cfg.point = point;
            }
            Some(Cmd::Integrate { surface, quantity, eps, boundary }) => {
                take_surface(&mut cfg, surface);
                cfg.quantity = quantity;
                cfg.eps = eps;
                cfg.boundary = boundary.then_some(true);
            }
            Some(Cmd::Renorm { surface, quantity, basis }) => {
                take_surface(&mut cfg, surface);
                cfg.quantity = quantity;
                cfg.basis = basis;
            }
            Some(Cmd::Expand { surface, quantity }) => {
                take_surface(&mut cfg, surface);
                cfg.quantity = quantity;
            }
            Some(Cmd::Verify { surface, theorem, eps }) => {
                take_surface(&mut cfg, surface);
                cfg.theorem = theorem;
                cfg.eps = eps;
            }
            Some(Cmd::Suite { only }) => cfg.only = only,
        }
        if let Some(path) = &self.config {
            let file = RunConfig::from_file(path)?;
            if let (Some(a), Some(b)) = (cfg.command, file.command) {
                if a != b {
                    bail!("config file is for `{b:?}` but `{a:?}` was requested");
                }
            }
            cfg = cfg.fill_from(file);
        }
        Ok(cfg)
    }
}

fn configure_threads(cfg: &RunConfig) -> Result<()> {
    let threads = match cfg.threads {
        Some(t) => t,
        None => match std::env::var("RENORMGEO_THREADS") {
            Ok(v) => v.trim().parse().with_context(|| format!("RENORMGEO_THREADS={v} is not a count"))?,
            Err(_) => 0,
        },
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn run(cfg: RunConfig) -> Result<bool> {
    configure_threads(&cfg)?;
    let command = cfg.command.context("no subcommand given (pass one, or `command` in --config)")?;
    let (artifact, table) = match command {
        Command::Catalog => (commands::catalog()?, None),
        Command::Curvature => (commands::curvature(&cfg)?, None),
        Command::Integrate => (commands::integrate(&cfg)?, None),
        Command::Renorm => (commands::renorm(&cfg)?, None),
        Command::Expand => (commands::expand(&cfg)?, None),
        Command::Verify => (commands::verify_theorem(&cfg)?, None),
        Command::Suite => {
            let (a, t) = commands::run_suite(&cfg)?;
            (a, Some(t))
        }
    };
    let format = cfg.format.unwrap_or(artifact.default_format);
    let text = artifact.render(format)?;
    match (&cfg.output, table) {
        (Some(path), table) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            if let Some(t) = table {
                print!("{t}");
            }
        }
        (None, Some(t)) => print!("{t}"),
        (None, None) => print!("{text}"),
    }
    Ok(artifact.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.into_config().and_then(run) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
