//! Snapping singular points to chart vertices and cutting the domain so a
//! single branch of the fourth root exists on the complement.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use num_complex::Complex64;
use serde::Serialize;

use super::flatten::ConformalChart;
use super::rational::RationalQuartic;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// A singular point of the differential after snapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnappedSingularity {
    /// Position in `RationalQuartic::singularities()` order.
    pub index: usize,
    pub vertex: usize,
    /// Positive for zeros, negative for poles.
    pub order: i64,
    pub re: f64,
    pub im: f64,
    pub snap_distance: f64,
}

impl SnappedSingularity {
    pub fn exponent(&self) -> f64 {
        self.order as f64 / 4.0
    }
}

/// Faces, edges and vertices of the flattened domain.
#[derive(Debug, Clone)]
pub struct Domain {
    pub face: Vec<bool>,
    /// Edges with a domain face on both sides.
    pub interior_edge: Vec<bool>,
    /// Vertices on the boundary of the domain.
    pub boundary_vertex: Vec<bool>,
    pub vertex: Vec<bool>,
}

impl Domain {
    pub fn new(mesh: &Mesh, chart: &ConformalChart) -> Self {
        let face: Vec<bool> = (0..mesh.num_faces())
            .map(|f| chart.contains_face(f))
            .collect();
        let mut interior_edge = vec![false; mesh.num_edges()];
        let mut boundary_vertex = vec![false; mesh.num_vertices()];
        let mut vertex = vec![false; mesh.num_vertices()];
        for h in 0..mesh.num_halfedges() {
            if !face[mesh.face(h)] {
                continue;
            }
            vertex[mesh.origin(h)] = true;
            match mesh.twin(h) {
                Some(t) if face[mesh.face(t)] => interior_edge[mesh.edge(h)] = true,
                _ => {
                    boundary_vertex[mesh.origin(h)] = true;
                    boundary_vertex[mesh.dest(h)] = true;
                }
            }
        }
        Domain {
            face,
            interior_edge,
            boundary_vertex,
            vertex,
        }
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_vertex.iter().any(|&b| b)
    }
}

/// Moves every singular point to its nearest domain vertex in the chart.
pub fn snap_singularities(
    mesh: &Mesh,
    chart: &ConformalChart,
    rq: &RationalQuartic,
) -> Result<Vec<SnappedSingularity>> {
    let domain = Domain::new(mesh, chart);
    let candidates: Vec<usize> = (0..mesh.num_vertices())
        .filter(|&v| domain.vertex[v])
        .collect();
    let mut out: Vec<SnappedSingularity> = Vec::new();
    for (index, s) in rq.singularities().iter().enumerate() {
        let (vertex, d) = candidates
            .iter()
            .map(|&v| (v, (chart.z[v] - s.z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .ok_or(Error::EmptyMesh)?;
        if let Some(prev) = out.iter().find(|p| p.vertex == vertex) {
            return Err(Error::SnapCollision(prev.index, index, vertex));
        }
        out.push(SnappedSingularity {
            index,
            vertex,
            order: s.order,
            re: s.z.re,
            im: s.z.im,
            snap_distance: d,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutGraph {
    /// Mesh edge ids, sorted.
    pub edges: Vec<usize>,
    /// Domain boundary vertex the tree is attached to.
    pub anchor: Option<usize>,
}

impl CutGraph {
    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    // min-heap on distance, ties by vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Multi-source Dijkstra over interior domain edges with chart lengths.
/// Returns the reached vertex set's predecessor halfedges and distances.
fn dijkstra(
    mesh: &Mesh,
    chart: &ConformalChart,
    domain: &Domain,
    sources: &[usize],
    enter: impl Fn(usize) -> bool,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = mesh.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
    }
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for h in mesh.outgoing(v) {
            if !domain.interior_edge[mesh.edge(h)] {
                continue;
            }
            let w = mesh.dest(h);
            if !enter(w) {
                continue;
            }
            let nd = d + (chart.z[w] - chart.z[v]).norm();
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = Some(h);
                heap.push(Item(nd, w));
            }
        }
    }
    (dist, pred)
}

/// Tree of shortest chart paths joining every singular vertex and, when the
/// domain has a boundary, one boundary vertex. Terminals are added greedily,
/// nearest first.
pub fn singular_cut_graph(
    mesh: &Mesh,
    chart: &ConformalChart,
    singular: &[SnappedSingularity],
) -> CutGraph {
    let domain = Domain::new(mesh, chart);
    let mut terminals: Vec<usize> = singular.iter().map(|s| s.vertex).collect();
    let mut edges = BTreeSet::new();
    if terminals.is_empty() {
        return CutGraph {
            edges: Vec::new(),
            anchor: None,
        };
    }
    let is_terminal = |v: usize, t: &[usize]| t.contains(&v);
    let mut tree: Vec<usize>;
    let mut anchor = None;
    if domain.has_boundary() {
        let sources: Vec<usize> = (0..mesh.num_vertices())
            .filter(|&v| domain.boundary_vertex[v])
            .collect();
        let all = terminals.clone();
        let (dist, pred) = dijkstra(mesh, chart, &domain, &sources, |w| {
            !domain.boundary_vertex[w] || is_terminal(w, &all)
        });
        let first = *terminals
            .iter()
            .min_by(|&&a, &&b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .unwrap();
        tree = vec![first];
        let mut v = first;
        while let Some(h) = pred[v] {
            edges.insert(mesh.edge(h));
            v = mesh.origin(h);
            tree.push(v);
        }
        anchor = Some(v);
        terminals.retain(|&t| !tree.contains(&t));
    } else {
        tree = vec![terminals.remove(0)];
    }
    while !terminals.is_empty() {
        let all: Vec<usize> = singular.iter().map(|s| s.vertex).collect();
        let (dist, pred) = dijkstra(mesh, chart, &domain, &tree, |w| {
            !domain.boundary_vertex[w] || is_terminal(w, &all)
        });
        let next = *terminals
            .iter()
            .min_by(|&&a, &&b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .unwrap();
        let mut v = next;
        let mut path = vec![v];
        while let Some(h) = pred[v] {
            edges.insert(mesh.edge(h));
            v = mesh.origin(h);
            path.push(v);
        }
        tree.extend(path);
        terminals.retain(|t| !tree.contains(t));
    }
    CutGraph {
        edges: edges.into_iter().collect(),
        anchor,
    }
}

/// Number of connected components of domain faces joined across interior
/// edges that are not cut.
pub fn complement_components(mesh: &Mesh, chart: &ConformalChart, cut: &CutGraph) -> usize {
    let domain = Domain::new(mesh, chart);
    let mut seen = vec![false; mesh.num_faces()];
    let mut count = 0;
    for f0 in 0..mesh.num_faces() {
        if seen[f0] || !domain.face[f0] {
            continue;
        }
        count += 1;
        seen[f0] = true;
        let mut stack = vec![f0];
        while let Some(f) = stack.pop() {
            for h in mesh.face_halfedges(f) {
                let e = mesh.edge(h);
                if !domain.interior_edge[e] || cut.contains(e) {
                    continue;
                }
                let g = mesh.face(mesh.twin(h).unwrap());
                if !seen[g] {
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
    }
    count
}

/// Snapped chart position of each singularity, in input order.
pub fn snapped_sites(chart: &ConformalChart, singular: &[SnappedSingularity]) -> Vec<Complex64> {
    singular.iter().map(|s| chart.z[s.vertex]).collect()
}

#[cfg(test)]
mod tests {
    use super::super::flatten::conformal_flatten;
    use super::super::rational::{fixtures, SingularPoint};
    use super::*;
    use crate::generators;
    use crate::solver::ConjugateGradient;

    fn disk() -> (Mesh, ConformalChart) {
        let m = generators::polar_disk(20, 40, 1.0);
        let c = conformal_flatten(&m, &ConjugateGradient::default()).unwrap();
        (m, c)
    }

    #[test]
    fn no_singularities_no_cut() {
        let (m, c) = disk();
        let cut = singular_cut_graph(&m, &c, &[]);
        assert!(cut.edges.is_empty());
        assert_eq!(complement_components(&m, &c, &cut), 1);
    }

    #[test]
    fn single_pole_reaches_boundary() {
        let (m, c) = disk();
        let rq = RationalQuartic::new(
            vec![],
            vec![SingularPoint::new(Complex64::new(0.3, 0.1), 1)],
        )
        .unwrap();
        let s = snap_singularities(&m, &c, &rq).unwrap();
        let cut = singular_cut_graph(&m, &c, &s);
        let anchor = cut.anchor.unwrap();
        assert!(m.is_boundary_vertex(anchor));
        // a simple path: every vertex has cut degree <= 2, endpoints have 1
        let mut deg = vec![0; m.num_vertices()];
        for &e in &cut.edges {
            let (a, b) = m.edge_vertices(e);
            deg[a] += 1;
            deg[b] += 1;
        }
        assert_eq!(deg[anchor], 1);
        assert_eq!(deg[s[0].vertex], 1);
        assert!(deg.iter().all(|&d| d <= 2));
        assert_eq!(complement_components(&m, &c, &cut), 1);
    }

    #[test]
    fn six_poles_form_a_tree() {
        let (m, c) = disk();
        let s = snap_singularities(&m, &c, &fixtures::face_six_poles()).unwrap();
        assert!(s.iter().all(|x| x.snap_distance < 0.1));
        let cut = singular_cut_graph(&m, &c, &s);
        // tree: edges = vertices - 1
        let mut vs = BTreeSet::new();
        for &e in &cut.edges {
            let (a, b) = m.edge_vertices(e);
            vs.insert(a);
            vs.insert(b);
        }
        assert_eq!(cut.edges.len() + 1, vs.len());
        assert!(s.iter().all(|x| vs.contains(&x.vertex)));
        assert_eq!(complement_components(&m, &c, &cut), 1);
    }

    #[test]
    fn collision_is_reported() {
        let (m, c) = disk();
        let rq = RationalQuartic::new(
            vec![SingularPoint::new(Complex64::new(0.5, 0.0), 1)],
            vec![SingularPoint::new(Complex64::new(0.5001, 0.0), 1)],
        )
        .unwrap();
        assert!(matches!(
            snap_singularities(&m, &c, &rq),
            Err(Error::SnapCollision(0, 1, _))
        ));
    }
}
