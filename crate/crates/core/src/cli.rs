//! Command-line surface. Every subcommand runs exactly one computation and
//! writes a CSV or JSON result; diagnostics and the replay line go to
//! stderr.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::emit::{emit_record, emit_table, Format};
use crate::error::{Error, Result};
use crate::free_energy::{psi_report, Validity};
use crate::maximizer::{classify, Region, DEFAULT_TIE_TOL};
use crate::phase::{trace_curves, v_bounds, CurveRow};
use crate::scalar::{critical_point, ModelParams};
use crate::sim::{
    exact_enumeration, jump_experiment, run_chain, Init, ModelSpec, Schedule, Subgraph, GENERATOR,
};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "ergm-phase",
    version,
    about = "Phase diagrams of edge/H2 exponential random graph models"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for sweeps and multi-chain runs.
    #[arg(long, global = true, env = "ERGM_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum H2Kind {
    Star,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Empty,
    Complete,
    Density,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Edge count of the second subgraph.
    #[arg(long)]
    pub p: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Second subgraph.
    #[arg(long, value_enum, default_value_t = H2Kind::Star)]
    pub h2: H2Kind,
    /// Edges of the star (must be 3, or omitted, for the triangle).
    #[arg(long)]
    pub p: Option<u32>,
}

impl GraphArgs {
    fn subgraph(&self) -> Result<Subgraph> {
        match (self.h2, self.p) {
            (H2Kind::Star, Some(p)) => Ok(Subgraph::PStar(p)),
            (H2Kind::Star, None) => Err(Error::Parameter("--p is required for --h2 star".into())),
            (H2Kind::Triangle, None | Some(3)) => Ok(Subgraph::Triangle),
            (H2Kind::Triangle, Some(p)) => Err(Error::Parameter(format!(
                "the triangle has 3 edges, got --p {p}"
            ))),
        }
    }

    fn replay(&self) -> String {
        let h2 = match self.h2 {
            H2Kind::Star => "star",
            H2Kind::Triangle => "triangle",
        };
        let p = self.p.unwrap_or(3);
        format!("--h2 {h2} --p {p}")
    }
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 100_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 100)]
    pub thin: u64,
    #[arg(long, env = "ERGM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

impl ChainArgs {
    fn schedule(&self) -> Result<Schedule> {
        Schedule::new(self.steps, self.burn_in, self.thin)
    }

    fn replay(&self) -> String {
        format!(
            "--steps {} --burn-in {} --thin {} --seed {}",
            self.steps, self.burn_in, self.thin, self.seed
        )
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Critical point (β1_c, β2_c).
    Critical {
        #[arg(long)]
        p: u32,
    },
    /// Local and global maximizers of the free-energy functional.
    Maximize {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
        tie_tol: f64,
    },
    /// Bounding curves of the V-shaped region at one β1.
    Bounds {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_negative_numbers = true)]
        beta1: f64,
    },
    /// Bounding curves and transition curve on a uniform β1 grid.
    Curve {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_negative_numbers = true, default_value_t = -3.0)]
        beta1_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -0.5)]
        beta1_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Limiting free energy and its derivatives at one point.
    Psi {
        #[command(flatten)]
        point: PointArgs,
        /// Second subgraph, used for the validity label.
        #[arg(long, value_enum, default_value_t = H2Kind::Star)]
        h2: H2Kind,
    },
    /// Free energy and derivatives along a β1 grid at fixed β2.
    Sweep {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -3.0)]
        beta1_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        beta1_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = H2Kind::Star)]
        h2: H2Kind,
    },
    /// Heat-bath chain; emits the retained samples.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, allow_negative_numbers = true)]
        beta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, value_enum, default_value_t = InitKind::Empty)]
        init: InitKind,
        /// Edge probability for `--init density`.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Exact Gibbs expectations by enumeration (n <= 6).
    Enumerate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, allow_negative_numbers = true)]
        beta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long)]
        n: usize,
    },
    /// Edge-density jump across the transition at fixed β2.
    Jump {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
        #[arg(long)]
        n: usize,
        /// Comma-separated offsets from q⁻¹(β2).
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-0.3,0.3"
        )]
        offsets: Vec<f64>,
        #[command(flatten)]
        chain: ChainArgs,
    },
}

fn h2_of(kind: H2Kind, p: u32) -> Subgraph {
    match kind {
        H2Kind::Star => Subgraph::PStar(p),
        H2Kind::Triangle => Subgraph::Triangle,
    }
}

fn h2_name(kind: H2Kind) -> &'static str {
    match kind {
        H2Kind::Star => "star",
        H2Kind::Triangle => "triangle",
    }
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// The full, normalised flag set including defaults.
    pub fn replay_line(&self) -> String {
        let body = match &self.command {
            Command::Critical { p } => format!("critical --p {p}"),
            Command::Maximize { point, tie_tol } => format!(
                "maximize --p {} --beta1 {} --beta2 {} --tie-tol {tie_tol}",
                point.p, point.beta1, point.beta2
            ),
            Command::Bounds { p, beta1 } => format!("bounds --p {p} --beta1 {beta1}"),
            Command::Curve { p, beta1_min, beta1_max, steps } => format!(
                "curve --p {p} --beta1-min {beta1_min} --beta1-max {beta1_max} --steps {steps}"
            ),
            Command::Psi { point, h2 } => format!(
                "psi --p {} --beta1 {} --beta2 {} --h2 {}",
                point.p,
                point.beta1,
                point.beta2,
                h2_name(*h2)
            ),
            Command::Sweep { p, beta2, beta1_min, beta1_max, steps, h2 } => format!(
                "sweep --p {p} --beta2 {beta2} --beta1-min {beta1_min} --beta1-max {beta1_max} --steps {steps} --h2 {}",
                h2_name(*h2)
            ),
            Command::Simulate { graph, beta1, beta2, n, chain, init, density } => {
                let init = match init {
                    InitKind::Empty => "empty".to_string(),
                    InitKind::Complete => "complete".to_string(),
                    InitKind::Density => format!("density --density {density}"),
                };
                format!(
                    "simulate {} --beta1 {beta1} --beta2 {beta2} --n {n} {} --init {init}",
                    graph.replay(),
                    chain.replay()
                )
            }
            Command::Enumerate { graph, beta1, beta2, n } => {
                format!("enumerate {} --beta1 {beta1} --beta2 {beta2} --n {n}", graph.replay())
            }
            Command::Jump { graph, beta2, n, offsets, chain } => format!(
                "jump {} --beta2 {beta2} --n {n} --offsets={} {}",
                graph.replay(),
                join_f64(offsets),
                chain.replay()
            ),
        };
        let workers = self
            .workers
            .map(|w| format!(" --workers {w}"))
            .unwrap_or_default();
        let output = self
            .output
            .as_ref()
            .map(|p| format!(" --output {}", p.display()))
            .unwrap_or_default();
        format!(
            "ergm-phase {body} --format {}{output}{workers}",
            self.format.as_str()
        )
    }
}

#[derive(Debug, Clone, Serialize)]
struct MaximizerRow {
    region: Region,
    u: f64,
    l_value: f64,
    l_curvature: f64,
    is_global: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    beta1: f64,
    beta2: f64,
    region: Region,
    psi: f64,
    du_beta1: Option<f64>,
    du_beta2: Option<f64>,
    d2_b1b1: Option<f64>,
    d2_b1b2: Option<f64>,
    d2_b2b2: Option<f64>,
    on_curve: bool,
    validity: Validity,
}

#[derive(Debug, Clone, Serialize)]
struct EnumerationRow {
    n: usize,
    psi_n: f64,
    e_t_edge: f64,
    e_t_h2: f64,
}

pub const CRITICAL_HEADERS: &[&str] = &["beta1_c", "beta2_c"];
pub const MAXIMIZER_HEADERS: &[&str] = &["region", "u", "l_value", "l_curvature", "is_global"];
pub const BOUNDS_HEADERS: &[&str] = &["beta1", "a", "b", "lower", "upper"];
pub const CURVE_HEADERS: &[&str] = &["beta1", "lower", "q", "upper", "u_low", "u_high", "psi"];
pub const PSI_HEADERS: &[&str] = &[
    "psi", "du_beta1", "du_beta2", "d2_b1b1", "d2_b1b2", "d2_b2b2", "on_curve", "validity",
];
pub const SWEEP_HEADERS: &[&str] = &[
    "beta1", "beta2", "region", "psi", "du_beta1", "du_beta2", "d2_b1b1", "d2_b1b2", "d2_b2b2",
    "on_curve", "validity",
];
pub const SAMPLE_HEADERS: &[&str] = &["step", "t_edge", "t_h2"];
pub const ENUMERATION_HEADERS: &[&str] = &["n", "psi_n", "e_t_edge", "e_t_h2"];
pub const JUMP_HEADERS: &[&str] = &[
    "offset",
    "beta1",
    "init",
    "seed",
    "mean_edge",
    "se_edge",
    "u1",
    "u2",
    "on_predicted_side",
];

fn grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Parameter(format!("steps must be >= 2, got {steps}")));
    }
    if !(min < max) {
        return Err(Error::Parameter(format!(
            "grid minimum {min} must be below maximum {max}"
        )));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + i as f64 * h
            }
        })
        .collect())
}

/// Runs the configured computation and returns the rendered output.
/// Progress notes are appended to `diagnostics`.
pub fn dispatch(config: &RunConfig, diagnostics: &mut Vec<String>) -> Result<Vec<u8>> {
    let format = config.format;
    match &config.command {
        Command::Critical { p } => emit_record(CRITICAL_HEADERS, &critical_point(*p)?, format),

        Command::Maximize { point, tie_tol } => {
            let params = ModelParams::new(point.p, point.beta1, point.beta2)?;
            let report = crate::maximizer::analyze(&params, *tie_tol)?;
            match format {
                Format::Json => emit_record(MAXIMIZER_HEADERS, &report, format),
                Format::Csv => {
                    let rows: Vec<MaximizerRow> = report
                        .locals
                        .iter()
                        .map(|lm| MaximizerRow {
                            region: report.region,
                            u: lm.u,
                            l_value: lm.l_value,
                            l_curvature: lm.l_curvature,
                            is_global: report.globals.contains(&lm.u),
                        })
                        .collect();
                    emit_table(MAXIMIZER_HEADERS, &rows, format)
                }
            }
        }

        Command::Bounds { p, beta1 } => emit_record(BOUNDS_HEADERS, &v_bounds(*beta1, *p)?, format),

        Command::Curve {
            p,
            beta1_min,
            beta1_max,
            steps,
        } => {
            let rows: Vec<CurveRow> = trace_curves(*p, *beta1_min, *beta1_max, *steps)?
                .iter()
                .map(|(vb, cp)| CurveRow::new(vb, cp))
                .collect();
            emit_table(CURVE_HEADERS, &rows, format)
        }

        Command::Psi { point, h2 } => {
            let params = ModelParams::new(point.p, point.beta1, point.beta2)?;
            let h2 = h2_of(*h2, point.p);
            ModelSpec::from_params(params, h2)?;
            emit_record(PSI_HEADERS, &psi_report(&params, h2)?, format)
        }

        Command::Sweep {
            p,
            beta2,
            beta1_min,
            beta1_max,
            steps,
            h2,
        } => {
            let h2 = h2_of(*h2, *p);
            ModelSpec::from_params(ModelParams::new(*p, *beta1_min, *beta2)?, h2)?;
            let rows: Vec<SweepRow> = grid(*beta1_min, *beta1_max, *steps)?
                .into_par_iter()
                .map(|beta1| {
                    let params = ModelParams::new(*p, beta1, *beta2)?;
                    let rep = psi_report(&params, h2)?;
                    Ok(SweepRow {
                        beta1,
                        beta2: *beta2,
                        region: classify(&params)?,
                        psi: rep.psi,
                        du_beta1: rep.du_beta1,
                        du_beta2: rep.du_beta2,
                        d2_b1b1: rep.d2_b1b1,
                        d2_b1b2: rep.d2_b1b2,
                        d2_b2b2: rep.d2_b2b2,
                        on_curve: rep.on_curve,
                        validity: rep.validity,
                    })
                })
                .collect::<Result<_>>()?;
            emit_table(SWEEP_HEADERS, &rows, format)
        }

        Command::Simulate {
            graph,
            beta1,
            beta2,
            n,
            chain,
            init,
            density,
        } => {
            let spec = ModelSpec::new(graph.subgraph()?, *beta1, *beta2)?;
            let init = match init {
                InitKind::Empty => Init::Empty,
                InitKind::Complete => Init::Complete,
                InitKind::Density => Init::Density(*density),
            };
            let stats = run_chain(&spec, *n, chain.schedule()?, chain.seed, init)?;
            diagnostics.push(format!(
                "summary: samples={} mean_edge={} sd_edge={} se_edge={} mean_h2={} se_h2={} validity={} generator={} seed={}",
                stats.samples.len(),
                stats.mean_edge,
                stats.sd_edge,
                stats.se_edge,
                stats.mean_h2,
                stats.se_h2,
                stats.validity.as_str(),
                stats.generator,
                stats.seed
            ));
            emit_table(SAMPLE_HEADERS, &stats.samples, format)
        }

        Command::Enumerate {
            graph,
            beta1,
            beta2,
            n,
        } => {
            let spec = ModelSpec::new(graph.subgraph()?, *beta1, *beta2)?;
            let r = exact_enumeration(&spec, *n)?;
            let row = EnumerationRow {
                n: r.n,
                psi_n: r.psi_n,
                e_t_edge: r.e_t_edge,
                e_t_h2: r.e_t_h2,
            };
            emit_record(ENUMERATION_HEADERS, &row, format)
        }

        Command::Jump {
            graph,
            beta2,
            n,
            offsets,
            chain,
        } => {
            let rows = jump_experiment(
                graph.subgraph()?,
                *n,
                *beta2,
                offsets,
                chain.schedule()?,
                chain.seed,
            )?;
            diagnostics.push(format!(
                "generator={GENERATOR} seeds={}..{}",
                chain.seed,
                chain
                    .seed
                    .wrapping_add(offsets.len().saturating_sub(1) as u64)
            ));
            emit_table(JUMP_HEADERS, &rows, format)
        }
    }
}

/// Parses `args`, runs the command and writes the output. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(workers) = config.workers {
        if workers == 0 {
            eprintln!("error: invalid parameter: --workers must be >= 1");
            return 2;
        }
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    eprintln!("replay: {}", config.replay_line());

    let mut diagnostics = Vec::new();
    let result =
        dispatch(&config, &mut diagnostics).and_then(|bytes| write_output(&config, &bytes));
    for line in &diagnostics {
        eprintln!("{line}");
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(config: &RunConfig, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    match &config.output {
        Some(path) => std::fs::write(path, bytes).map_err(Error::from),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
