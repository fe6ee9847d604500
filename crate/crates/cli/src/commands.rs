use std::path::{Path, PathBuf};

use abelquad::abel_jacobi::{verify_abel, MetricChoice, VerificationReport, VerifyConfig};
use abelquad::divisor::divisor_of_quad_mesh;
use abelquad::obj::{load_mesh, save_mesh};
use abelquad::quartic::{
    export_obj_with_uv, quadratures, run_quartic, IntegrationConfig, RationalQuartic,
};
use abelquad::report::mesh_report;
use abelquad::solver::solvers;
use abelquad::{generators, Divisor, Mesh};
use anyhow::{bail, Context, Result};
use log::info;
use serde::Serialize;

use crate::output::emit;

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

pub struct VerifyArgs {
    pub input: Option<PathBuf>,
    pub batch: Option<PathBuf>,
    pub divisor: Option<PathBuf>,
    pub tolerance: f64,
    pub omega_index: usize,
    pub metric: MetricChoice,
    pub solver: String,
    pub coarse_zeros: bool,
    pub out: Option<PathBuf>,
}

fn verify_config(args: &VerifyArgs) -> Result<VerifyConfig> {
    if !(args.tolerance > 0.0 && args.tolerance < 0.5) {
        bail!("tolerance {} must lie in (0, 0.5)", args.tolerance);
    }
    let mut config = VerifyConfig {
        tolerance: args.tolerance,
        omega_index: args.omega_index,
        metric: args.metric,
        solver: solvers().get(&args.solver)?,
        ..Default::default()
    };
    if args.coarse_zeros {
        config.zero_refinement = None;
    }
    Ok(config)
}

fn load_divisor(path: &Path) -> Result<Divisor> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Divisor::from_json(&text)?)
}

fn verify_one(
    mesh_path: &Path,
    divisor: Option<&Divisor>,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let mesh = load_mesh(mesh_path).with_context(|| format!("loading {}", mesh_path.display()))?;
    let d = match divisor {
        Some(d) => d.clone(),
        None => divisor_of_quad_mesh(&mesh)
            .context("without --divisor the input must be a closed all-quad mesh")?,
    };
    info!(
        "{}: {} vertices, {} faces, divisor degree {}",
        mesh_path.display(),
        mesh.num_vertices(),
        mesh.num_faces(),
        d.degree()
    );
    Ok(verify_abel(&mesh, &d, config)?)
}

#[derive(Serialize)]
struct BatchEntry {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let config = verify_config(args)?;
    let divisor = args.divisor.as_deref().map(load_divisor).transpose()?;
    match (&args.input, &args.batch) {
        (Some(input), None) => {
            let report = verify_one(input, divisor.as_ref(), &config)?;
            emit(&report, args.out.as_deref())?;
            Ok(if report.verdict {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        (None, Some(dir)) => verify_batch(dir, divisor.as_ref(), &config, args.out.as_deref()),
        _ => bail!("give either an input mesh or --batch <dir>"),
    }
}

/// Verifies every `.obj` in `dir` concurrently; results are ordered by file
/// name. Any error makes the whole batch an error after the report is written.
fn verify_batch(
    dir: &Path,
    divisor: Option<&Divisor>,
    config: &VerifyConfig,
    out: Option<&Path>,
) -> Result<Outcome> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("obj")))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .obj files in {}", dir.display());
    }
    let results: Vec<Result<VerificationReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| s.spawn(move || verify_one(f, divisor, config)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(anyhow::anyhow!("worker panicked")))
            })
            .collect()
    });
    let mut any_error = false;
    let mut all_pass = true;
    let entries: Vec<BatchEntry> = files
        .iter()
        .zip(results)
        .map(|(f, r)| {
            let file = f
                .file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            match r {
                Ok(report) => {
                    all_pass &= report.verdict;
                    BatchEntry {
                        file,
                        report: Some(report),
                        error: None,
                    }
                }
                Err(e) => {
                    any_error = true;
                    BatchEntry {
                        file,
                        report: None,
                        error: Some(format!("{e:#}")),
                    }
                }
            }
        })
        .collect();
    emit(&entries, out)?;
    if any_error {
        bail!("batch had failing inputs");
    }
    Ok(if all_pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

pub struct QuarticArgs {
    pub input: PathBuf,
    pub singular: Option<PathBuf>,
    pub checker_scale: f64,
    pub out: PathBuf,
    pub summary: Option<PathBuf>,
    pub solver: String,
    pub quadrature: String,
}

pub fn quartic(args: &QuarticArgs) -> Result<Outcome> {
    if !(args.checker_scale.is_finite() && args.checker_scale > 0.0) {
        bail!("checker scale must be positive");
    }
    let mesh =
        load_mesh(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let rq = match &args.singular {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RationalQuartic::from_json(&text)?
        }
        None => RationalQuartic::default(),
    };
    let config = IntegrationConfig {
        quadrature: quadratures().get(&args.quadrature)?,
        ..Default::default()
    };
    let solver = solvers().get(&args.solver)?;
    let run = run_quartic(&mesh, &rq, &*solver, &config)?;
    export_obj_with_uv(&mesh, &run.atlas, &args.out, args.checker_scale)?;
    let summary = run.summary(&mesh);
    info!(
        "{} singularities, {} cut edges, {} tears",
        summary.singularities.len(),
        summary.cut_edges,
        summary.branch_tears
    );
    emit(&summary, args.summary.as_deref())?;
    Ok(if summary.branch_tears == 0 {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

pub fn report(input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let mesh = load_mesh(input).with_context(|| format!("loading {}", input.display()))?;
    emit(&mesh_report(&mesh), out)?;
    Ok(Outcome::Pass)
}

/// Built-in test meshes.
#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Shape {
    Cube,
    Torus,
    Origami,
    Icosphere,
    Disk,
    Hemisphere,
    Rectangle,
}

pub fn generate(shape: Shape, size: usize, out: &Path) -> Result<Outcome> {
    if size == 0 {
        bail!("size must be positive");
    }
    let mesh: Mesh = match shape {
        Shape::Cube => generators::cube(),
        Shape::Torus => generators::torus_grid(size, size),
        Shape::Origami => generators::origami_genus2(size.max(3)),
        Shape::Icosphere => generators::icosphere(size.min(7)),
        Shape::Disk => generators::polar_disk(size, 2 * size.max(2), 1.5),
        Shape::Hemisphere => generators::hemisphere(size, 2 * size.max(2)),
        Shape::Rectangle => generators::rectangle(size, size, 1.0, 1.0),
    };
    save_mesh(&mesh, out)?;
    Ok(Outcome::Pass)
}
