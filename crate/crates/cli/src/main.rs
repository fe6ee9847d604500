//! `abelquad`: Abel-Jacobi verification of quad-mesh divisors and genus-zero
//! quartic differential texturing.
//!
//! Exit status: 0 when the check passes, 1 when it runs but fails, 2 on any
//! error. Set `ABELQUAD_LOG` (e.g. `info`, `debug`) for diagnostics on stderr.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use abelquad::abel_jacobi::{MetricChoice, DEFAULT_TOLERANCE};
use abelquad::quartic::integrate::DEFAULT_QUADRATURE;
use abelquad::quartic::DEFAULT_CHECKER_SCALE;
use abelquad::solver::DEFAULT_SOLVER;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Outcome, QuarticArgs, Shape, VerifyArgs};

#[derive(Parser)]
#[command(name = "abelquad", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Auto,
    Quad,
    Embedded,
}

impl From<Metric> for MetricChoice {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Auto => MetricChoice::Auto,
            Metric::Quad => MetricChoice::Quad,
            Metric::Embedded => MetricChoice::Embedded,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a divisor satisfies the Abel-Jacobi condition.
    Verify {
        /// Closed mesh (OBJ). Without --divisor it must be all quads.
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        input: Option<PathBuf>,
        /// Verify every .obj in this directory.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Divisor JSON, `{"entries":[{"vertex":3,"order":1}, ...]}`.
        #[arg(long)]
        divisor: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        omega_index: usize,
        #[arg(long, value_enum, default_value = "auto")]
        metric: Metric,
        #[arg(long, default_value = DEFAULT_SOLVER)]
        solver: String,
        /// Keep the zeros of the reference form at mesh vertices.
        #[arg(long)]
        coarse_zeros: bool,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Texture a genus-zero mesh with the integrated fourth root of a
    /// rational quartic differential.
    Quartic {
        input: PathBuf,
        /// Singularity JSON, `{"zeros":[{"re":..,"im":..,"mult":1}],"poles":[..]}`.
        #[arg(long)]
        singular: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CHECKER_SCALE)]
        checker_scale: f64,
        /// Textured OBJ output.
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON path; stdout when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_SOLVER)]
        solver: String,
        #[arg(long, default_value = DEFAULT_QUADRATURE)]
        quadrature: String,
    },
    /// Topology, valences and quad divisor of a mesh.
    Report {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in test mesh.
    Generate {
        #[arg(value_enum)]
        shape: Shape,
        /// Resolution; its meaning depends on the shape.
        #[arg(long, default_value_t = 8)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Verify {
            input,
            batch,
            divisor,
            tolerance,
            omega_index,
            metric,
            solver,
            coarse_zeros,
            out,
        } => commands::verify(&VerifyArgs {
            input,
            batch,
            divisor,
            tolerance,
            omega_index,
            metric: metric.into(),
            solver,
            coarse_zeros,
            out,
        }),
        Command::Quartic {
            input,
            singular,
            checker_scale,
            out,
            summary,
            solver,
            quadrature,
        } => commands::quartic(&QuarticArgs {
            input,
            singular,
            checker_scale,
            out,
            summary,
            solver,
            quadrature,
        }),
        Command::Report { input, out } => commands::report(&input, out.as_deref()),
        Command::Generate { shape, size, out } => commands::generate(shape, size, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ABELQUAD_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
