//! `cvent`: deterministic parameter sweeps over two-mode squeezed light in
//! lossy fibers. Every subcommand emits one CSV table; plotting is left to
//! external tools.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure (failed rows
//! are flagged as `nan` cells in the partial output).

// Validation uses negated comparisons so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{FidelityInput, FidelityMode, FidelitySpec, GlobalOpts};
use sweep::Axis;

#[derive(Parser)]
#[command(
    name = "cvent",
    version,
    about = "Entanglement and teleportation sweeps for lossy two-mode squeezed light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Absorption length; all lengths are measured in these units.
    #[arg(long, global = true, default_value_t = 1.0)]
    labs: f64,

    /// Photon-number cutoff per mode for Fock-basis quantifiers.
    #[arg(long, global = true, default_value_t = 30)]
    nmax: usize,

    /// Number of minimizer starts for the distance measure.
    #[arg(long, global = true, default_value_t = 8)]
    starts: usize,

    /// Seed for the deterministic start perturbations.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Significant digits in the CSV output.
    #[arg(long, global = true, default_value_t = 9)]
    precision: usize,

    /// Worker threads for grid evaluation; 0 uses the available parallelism.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct QlAxes {
    #[arg(long, default_value_t = 0.0)]
    q_min: f64,
    #[arg(long, default_value_t = 0.95)]
    q_max: f64,
    #[arg(long, default_value_t = 25)]
    q_points: usize,
    #[arg(long, default_value_t = 0.0)]
    l_min: f64,
    #[arg(long, default_value_t = 1.0)]
    l_max: f64,
    #[arg(long, default_value_t = 25)]
    l_points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form extraction estimate over (q, l), equal fibers.
    EstimateSurface(QlAxes),
    /// Schmidt-block convex bound over (q, l), equal fibers.
    BoundSurface(QlAxes),
    /// Distance measure over length, normalized, for nbar = 1..1000.
    DistanceCurves {
        #[arg(long, default_value_t = 0.0)]
        l_min: f64,
        #[arg(long, default_value_t = 1.0)]
        l_max: f64,
        #[arg(long, default_value_t = 21)]
        l_points: usize,
    },
    /// Bound, direct extraction estimate and distance side by side (nbar = 1).
    Compare {
        #[arg(long, default_value_t = 0.05)]
        l_min: f64,
        #[arg(long, default_value_t = 0.5)]
        l_max: f64,
        #[arg(long, default_value_t = 10)]
        l_points: usize,
    },
    /// Distance measure against source squeezing for l = 0, 0.01, 0.1.
    AvailableEntanglement {
        #[arg(long, default_value_t = 0.5)]
        zeta_min: f64,
        #[arg(long, default_value_t = 3.0)]
        zeta_max: f64,
        #[arg(long, default_value_t = 11)]
        zeta_points: usize,
    },
    /// Teleportation fidelity sweeps.
    Fidelity {
        /// Which sweep to run.
        #[arg(long, value_enum)]
        figure: Figure,
        /// Signal state family (ignored by gain-comparison, which is
        /// defined for the squeezed vacuum).
        #[arg(long, value_enum, default_value_t = InputKind::Squeezed)]
        input: InputKind,
        #[arg(long, default_value_t = 0.0)]
        zeta_min: f64,
        #[arg(long, default_value_t = 3.0)]
        zeta_max: f64,
        #[arg(long, default_value_t = 31)]
        zeta_points: usize,
        #[arg(long, default_value_t = 0.5)]
        t2_min: f64,
        #[arg(long, default_value_t = 1.0)]
        t2_max: f64,
        #[arg(long, default_value_t = 26)]
        t2_points: usize,
        #[arg(long, default_value_t = 0.0)]
        l2_min: f64,
        #[arg(long, default_value_t = 0.5)]
        l2_max: f64,
        #[arg(long, default_value_t = 26)]
        l2_points: usize,
        #[arg(long, default_value_t = 0.02)]
        l12_min: f64,
        #[arg(long, default_value_t = 0.3)]
        l12_max: f64,
        #[arg(long, default_value_t = 15)]
        l12_points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    /// Surface over (zeta, |T2|): unit vs canonical gain.
    F1,
    /// Curves over zeta: optimal vs canonical vs state-matched gain.
    F2,
    /// Surface over (zeta, |T2|) at canonical gain.
    F3,
    /// Curves over the receiver arm length at infinite squeezing.
    F4,
    /// Optimal source position against total distance.
    F5,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputKind {
    Squeezed,
    Fock,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .ok();
    }
    let opts = GlobalOpts {
        l_abs: cli.labs,
        n_max: cli.nmax,
        starts: cli.starts,
        seed: cli.seed,
    };
    let table = match &cli.command {
        Command::EstimateSurface(axes) => {
            let q = Axis::linear("q", axes.q_min, axes.q_max, axes.q_points)?;
            let l = Axis::linear("l_over_la", axes.l_min, axes.l_max, axes.l_points)?;
            commands::estimate_surface(&opts, &q, &l)?
        }
        Command::BoundSurface(axes) => {
            let q = Axis::linear("q", axes.q_min, axes.q_max, axes.q_points)?;
            let l = Axis::linear("l_over_la", axes.l_min, axes.l_max, axes.l_points)?;
            commands::bound_surface(&opts, &q, &l)?
        }
        Command::DistanceCurves {
            l_min,
            l_max,
            l_points,
        } => {
            let l = Axis::linear("l_over_la", *l_min, *l_max, *l_points)?;
            commands::distance_curves(&opts, &l)?
        }
        Command::Compare {
            l_min,
            l_max,
            l_points,
        } => {
            let l = Axis::linear("l_over_la", *l_min, *l_max, *l_points)?;
            commands::compare(&opts, &l)?
        }
        Command::AvailableEntanglement {
            zeta_min,
            zeta_max,
            zeta_points,
        } => {
            let z = Axis::linear("zeta", *zeta_min, *zeta_max, *zeta_points)?;
            commands::available_entanglement(&opts, &z)?
        }
        Command::Fidelity {
            figure,
            input,
            zeta_min,
            zeta_max,
            zeta_points,
            t2_min,
            t2_max,
            t2_points,
            l2_min,
            l2_max,
            l2_points,
            l12_min,
            l12_max,
            l12_points,
        } => {
            let mode = match figure {
                Figure::F1 => FidelityMode::GainComparison,
                Figure::F2 => FidelityMode::GainOptimality,
                Figure::F3 => FidelityMode::Saturation,
                Figure::F4 => FidelityMode::RangeCurves,
                Figure::F5 => FidelityMode::SourcePlacement,
            };
            let zeta_lo = match mode {
                // The state-matched gain needs |S| > 0.
                FidelityMode::GainOptimality => zeta_min.max(0.1),
                _ => *zeta_min,
            };
            let spec = FidelitySpec {
                mode,
                input: match input {
                    InputKind::Squeezed => FidelityInput::Squeezed,
                    InputKind::Fock => FidelityInput::Fock,
                },
                zeta_axis: Axis::linear("zeta", zeta_lo, *zeta_max, *zeta_points)?,
                t2_axis: Axis::linear("t2", *t2_min, *t2_max, *t2_points)?,
                l2_axis: Axis::linear("l2_over_la", *l2_min, *l2_max, *l2_points)?,
                l12_axis: Axis::linear("l12_over_la", *l12_min, *l12_max, *l12_points)?,
            };
            commands::fidelity(&opts, &spec)?
        }
    };
    commands::write_output(&table, cli.out.as_deref(), cli.precision)?;
    Ok(table.has_failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
