//! Genus-zero construction: conformal charts, rational quartic
//! differentials, cut graphs and the integrated fourth root.

pub mod cut;
pub mod flatten;
pub mod integrate;
pub mod rational;

pub use cut::{singular_cut_graph, snap_singularities, CutGraph, SnappedSingularity};
pub use flatten::{conformal_flatten, ChartDomain, ConformalChart};
pub use integrate::{
    corner_uv, export_obj_with_uv, integrate_fourth_root, integrate_fourth_root_report,
    quadratures, ConeMeasurement, CutTransition, IntegrationConfig, Quadrature, UvAtlas,
    DEFAULT_CHECKER_SCALE,
};
pub use rational::{RationalQuartic, SingularPoint};

use serde::Serialize;

use crate::error::Result;
use crate::mesh::Mesh;
use crate::solver::LinearSolver;

/// All stages of one genus-zero construction.
#[derive(Debug, Clone)]
pub struct QuarticRun {
    pub chart: ConformalChart,
    pub singular: Vec<SnappedSingularity>,
    pub cut: CutGraph,
    pub atlas: UvAtlas,
}

/// Flattens, snaps, cuts and integrates. Closed meshes must carry a
/// balanced differential so that infinity is regular. Branch tears are left
/// in the atlas for the caller to judge.
pub fn run_quartic(
    mesh: &Mesh,
    rq: &RationalQuartic,
    solver: &dyn LinearSolver,
    config: &IntegrationConfig,
) -> Result<QuarticRun> {
    rq.validate()?;
    if mesh.is_closed() {
        rq.validate_sphere()?;
    }
    let chart = conformal_flatten(mesh, solver)?;
    let singular = snap_singularities(mesh, &chart, rq)?;
    let cut = singular_cut_graph(mesh, &chart, &singular);
    let atlas = integrate_fourth_root_report(mesh, &chart, &singular, &cut, config)?;
    Ok(QuarticRun {
        chart,
        singular,
        cut,
        atlas,
    })
}

/// Serializable digest of a [`QuarticRun`].
#[derive(Debug, Clone, Serialize)]
pub struct QuarticSummary {
    pub domain: ChartDomain,
    pub faces: usize,
    pub corners: usize,
    pub singularities: Vec<SnappedSingularity>,
    pub max_snap_distance: f64,
    pub cut_edges: usize,
    pub branch_tears: usize,
    pub cones: Vec<ConeMeasurement>,
    pub transitions: usize,
    pub max_transition_error_deg: f64,
    pub continuity_residual: f64,
    pub path_residual: f64,
    pub root_residual: f64,
}

impl QuarticRun {
    pub fn summary(&self, mesh: &Mesh) -> QuarticSummary {
        QuarticSummary {
            domain: self.chart.domain,
            faces: mesh.num_faces(),
            corners: self.atlas.corner_w.len(),
            singularities: self.singular.clone(),
            max_snap_distance: self
                .singular
                .iter()
                .map(|s| s.snap_distance)
                .fold(0.0, f64::max),
            cut_edges: self.cut.edges.len(),
            branch_tears: self.atlas.tears.len(),
            cones: self.atlas.cones.clone(),
            transitions: self.atlas.transitions.len(),
            max_transition_error_deg: self.atlas.max_transition_error_deg(),
            continuity_residual: self.atlas.continuity_residual,
            path_residual: self.atlas.path_residual,
            root_residual: self.atlas.root_residual,
        }
    }
}
