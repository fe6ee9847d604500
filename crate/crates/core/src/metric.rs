//! Metrics on a mesh: the unit-square quad metric and the embedded metric,
//! both carried by an auxiliary triangulation that shares vertex ids.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Every quad is a unit square.
    Quad,
    /// Edge lengths from vertex positions.
    Embedded,
}

#[derive(Debug, Clone)]
pub struct MetricMesh {
    kind: MetricKind,
    mesh: Mesh,
    tri: Mesh,
    /// Squared length per edge of `tri`. Exact (1 or 2) for the quad metric.
    tri_len2: Vec<f64>,
    he_to_tri: Vec<usize>,
    tri_parent: Vec<usize>,
    /// Interior angle at the origin corner of each `tri` halfedge.
    tri_angle: Vec<f64>,
}

/// Splits each quad along the diagonal from its lowest-indexed vertex.
fn triangulate(mesh: &Mesh) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut faces = Vec::with_capacity(2 * mesh.num_faces());
    let mut parent = Vec::with_capacity(2 * mesh.num_faces());
    for f in 0..mesh.num_faces() {
        let vs: Vec<usize> = mesh.face_vertices(f).collect();
        if vs.len() == 3 {
            faces.push(vs);
            parent.push(f);
        } else {
            let k = (0..4).min_by_key(|&i| vs[i]).unwrap();
            let c = |i: usize| vs[(k + i) % 4];
            faces.push(vec![c(0), c(1), c(2)]);
            faces.push(vec![c(0), c(2), c(3)]);
            parent.push(f);
            parent.push(f);
        }
    }
    (faces, parent)
}

/// Places a triangle with the given squared side lengths (`l01`, `l12`, `l20`)
/// counter-clockwise in the plane with its first vertex at the origin.
pub fn layout_triangle(l01: f64, l12: f64, l20: f64) -> Option<[[f64; 2]; 3]> {
    let a = l01.sqrt();
    if a <= 0.0 {
        return None;
    }
    let x = (l01 + l20 - l12) / (2.0 * a);
    let y2 = l20 - x * x;
    if y2 <= 0.0 {
        return None;
    }
    Some([[0.0, 0.0], [a, 0.0], [x, y2.sqrt()]])
}

fn corner_angle(adj1: f64, adj2: f64, opp: f64) -> f64 {
    let c = (adj1 + adj2 - opp) / (2.0 * (adj1 * adj2).sqrt());
    c.clamp(-1.0, 1.0).acos()
}

impl MetricMesh {
    /// Unit-square metric of an all-quad mesh.
    pub fn quad(mesh: &Mesh) -> Result<Self> {
        mesh.require_quads()?;
        Self::build(mesh, MetricKind::Quad, |tri, e| {
            let (a, b) = tri.edge_vertices(e);
            // Quad sides are original edges; the rest are diagonals.
            if mesh.find_halfedge(a, b).is_some() || mesh.find_halfedge(b, a).is_some() {
                1.0
            } else {
                2.0
            }
        })
    }

    /// Metric induced by the vertex positions.
    pub fn embedded(mesh: &Mesh) -> Result<Self> {
        let p = mesh.positions().ok_or(Error::MissingPositions)?.to_vec();
        Self::build(mesh, MetricKind::Embedded, |tri, e| {
            let (a, b) = tri.edge_vertices(e);
            (0..3).map(|k| (p[a][k] - p[b][k]).powi(2)).sum()
        })
    }

    /// Quad metric for all-quad meshes, embedded metric otherwise.
    pub fn auto(mesh: &Mesh) -> Result<Self> {
        if mesh.is_all_quads() {
            Self::quad(mesh)
        } else {
            Self::embedded(mesh)
        }
    }

    fn build(mesh: &Mesh, kind: MetricKind, len2: impl Fn(&Mesh, usize) -> f64) -> Result<Self> {
        let (faces, tri_parent) = triangulate(mesh);
        let tri = Mesh::from_faces(
            mesh.num_vertices(),
            &faces,
            mesh.positions().map(<[_]>::to_vec),
        )?;
        let tri_len2: Vec<f64> = (0..tri.num_edges()).map(|e| len2(&tri, e)).collect();
        for (e, &l) in tri_len2.iter().enumerate() {
            if !(l > 0.0) {
                return Err(Error::ZeroLengthEdge { edge: e });
            }
        }
        let mut tri_angle = vec![0.0; tri.num_halfedges()];
        for t in 0..tri.num_faces() {
            let hs: Vec<usize> = tri.face_halfedges(t).collect();
            let l: Vec<f64> = hs.iter().map(|&h| tri_len2[tri.edge(h)]).collect();
            if layout_triangle(l[0], l[1], l[2]).is_none() {
                return Err(Error::DegenerateTriangle(t));
            }
            for k in 0..3 {
                // corner at origin of hs[k]: adjacent sides k and k-1, opposite k+1
                tri_angle[hs[k]] = corner_angle(l[k], l[(k + 2) % 3], l[(k + 1) % 3]);
            }
        }
        let he_to_tri = (0..mesh.num_halfedges())
            .map(|h| {
                tri.find_halfedge(mesh.origin(h), mesh.dest(h))
                    .expect("original edges survive triangulation")
            })
            .collect();
        Ok(MetricMesh {
            kind,
            mesh: mesh.clone(),
            tri,
            tri_len2,
            he_to_tri,
            tri_parent,
            tri_angle,
        })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Auxiliary triangulation; same vertex ids as [`Self::mesh`].
    pub fn tri(&self) -> &Mesh {
        &self.tri
    }

    pub fn tri_len2(&self, e: usize) -> f64 {
        self.tri_len2[e]
    }

    pub fn tri_parent(&self, t: usize) -> usize {
        self.tri_parent[t]
    }

    /// Halfedge of the triangulation matching original halfedge `h`.
    pub fn to_tri(&self, h: usize) -> usize {
        self.he_to_tri[h]
    }

    /// Interior angle at the origin corner of triangulation halfedge `h`.
    pub fn tri_angle(&self, h: usize) -> f64 {
        self.tri_angle[h]
    }

    /// Interior angle at the corner of original halfedge `h`.
    pub fn corner_angle(&self, h: usize) -> f64 {
        if self.kind == MetricKind::Quad {
            return FRAC_PI_2;
        }
        let f = self.mesh.face(h);
        let prev_dir = self.mesh.origin(self.mesh.prev(h));
        // sum the triangulation corners between the two original sides
        let mut th = self.he_to_tri[h];
        let mut total = 0.0;
        loop {
            total += self.tri_angle[th];
            let back = self.tri.prev(th);
            if self.tri.origin(back) == prev_dir && self.tri_parent[self.tri.face(th)] == f {
                break;
            }
            th = self.tri.ccw_next(th).expect("interior corner of a face");
        }
        total
    }

    pub fn cone_angle(&self, v: usize) -> f64 {
        self.tri
            .outgoing(v)
            .iter()
            .map(|&h| self.tri_angle[h])
            .sum()
    }

    /// Angle defect: `2π - cone` inside, `π - cone` on the boundary.
    pub fn curvature(&self, v: usize) -> f64 {
        let full = if self.tri.is_boundary_vertex(v) {
            PI
        } else {
            2.0 * PI
        };
        full - self.cone_angle(v)
    }

    /// Exact quad-metric curvature in quarter turns, `4 - valence`.
    pub fn quad_curvature_quarter_turns(&self, v: usize) -> Option<i64> {
        (self.kind == MetricKind::Quad && self.mesh.is_closed())
            .then(|| 4 - self.mesh.valence(v) as i64)
    }

    /// Cotangent weight `(cot α + cot β) / 2` of each triangulation edge.
    pub fn cotan_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.tri.num_edges()];
        for h in 0..self.tri.num_halfedges() {
            // angle opposite to h sits at the origin of prev(h)
            let a = self.tri_angle[self.tri.prev(h)];
            w[self.tri.edge(h)] += 0.5 / a.tan();
        }
        w
    }

    /// Planar layout of triangle `t`, vertices in face order.
    pub fn tri_layout(&self, t: usize) -> [[f64; 2]; 3] {
        let hs: Vec<usize> = self.tri.face_halfedges(t).collect();
        let l: Vec<f64> = hs
            .iter()
            .map(|&h| self.tri_len2[self.tri.edge(h)])
            .collect();
        layout_triangle(l[0], l[1], l[2]).expect("validated at construction")
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        let p = self.tri_layout(t);
        0.5 * p[1][0] * p[2][1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaussBonnetReport {
    /// `Σ (4 - valence)` over all vertices.
    pub lhs: i64,
    /// `4 χ`.
    pub rhs: i64,
    pub ok: bool,
}

/// Integer Gauss-Bonnet check for a closed quad mesh: each vertex carries
/// curvature `(π/2)(4 - k)` and the total is `2πχ`.
pub fn gauss_bonnet_report(mesh: &Mesh) -> Result<GaussBonnetReport> {
    mesh.require_quads()?;
    mesh.require_closed()?;
    let lhs: i64 = (0..mesh.num_vertices())
        .map(|v| 4 - mesh.valence(v) as i64)
        .sum();
    let rhs = 4 * mesh.euler_characteristic();
    Ok(GaussBonnetReport {
        lhs,
        rhs,
        ok: lhs == rhs,
    })
}
