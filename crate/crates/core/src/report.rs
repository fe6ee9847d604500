//! Topological summary of a mesh and its quad divisor.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::divisor::{divisor_of_quad_mesh, Divisor};
use crate::mesh::Mesh;
use crate::metric::{gauss_bonnet_report, GaussBonnetReport};

#[derive(Debug, Clone, Serialize)]
pub struct MeshReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub closed: bool,
    pub all_quads: bool,
    pub boundary_loops: usize,
    pub chi: i64,
    pub genus: i64,
    /// Vertex count per valence.
    pub valence_histogram: BTreeMap<usize, usize>,
    /// Quad divisor; only for closed all-quad meshes.
    pub divisor: Option<Divisor>,
    pub divisor_degree: Option<i64>,
    /// `8g - 8`.
    pub expected_degree: i64,
    pub degree_ok: Option<bool>,
    pub gauss_bonnet: Option<GaussBonnetReport>,
}

pub fn mesh_report(mesh: &Mesh) -> MeshReport {
    let mut valence_histogram = BTreeMap::new();
    for v in 0..mesh.num_vertices() {
        *valence_histogram.entry(mesh.valence(v)).or_insert(0) += 1;
    }
    let genus = mesh.genus();
    let divisor = divisor_of_quad_mesh(mesh).ok();
    let divisor_degree = divisor.as_ref().map(Divisor::degree);
    MeshReport {
        vertices: mesh.num_vertices(),
        edges: mesh.num_edges(),
        faces: mesh.num_faces(),
        closed: mesh.is_closed(),
        all_quads: mesh.is_all_quads(),
        boundary_loops: mesh.boundary_loops().len(),
        chi: mesh.euler_characteristic(),
        genus,
        valence_histogram,
        divisor,
        divisor_degree,
        expected_degree: 8 * genus - 8,
        degree_ok: divisor_degree.map(|d| d == 8 * genus - 8),
        gauss_bonnet: gauss_bonnet_report(mesh).ok(),
    }
}
