//! Halfedge surface mesh with triangle and quad faces.
//!
//! Halfedges of face `f` are stored contiguously, in face order, so the
//! halfedge at local corner `k` of `f` is `face_start[f] + k` and starts at the
//! `k`-th vertex of the face. Boundary edges carry a single halfedge whose twin
//! is `None`; there are no explicit boundary loops.

use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mesh {
    num_vertices: usize,
    positions: Option<Vec<[f64; 3]>>,
    face_start: Vec<usize>,
    he_origin: Vec<usize>,
    he_face: Vec<usize>,
    he_twin: Vec<Option<usize>>,
    he_edge: Vec<usize>,
    edge_he: Vec<usize>,
    /// Outgoing halfedge per vertex. Boundary vertices store their boundary
    /// outgoing halfedge so that counter-clockwise rotation covers the fan.
    vertex_he: Vec<usize>,
}

impl Mesh {
    pub fn from_faces(
        num_vertices: usize,
        faces: &[Vec<usize>],
        positions: Option<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(p) = &positions {
            if p.len() != num_vertices {
                return Err(Error::PositionCount {
                    expected: num_vertices,
                    got: p.len(),
                });
            }
        }

        let mut face_start = Vec::with_capacity(faces.len() + 1);
        let mut he_origin = Vec::new();
        let mut he_face = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            if face.len() != 3 && face.len() != 4 {
                return Err(Error::UnsupportedFaceDegree {
                    face: f,
                    degree: face.len(),
                });
            }
            for (k, &v) in face.iter().enumerate() {
                if v >= num_vertices {
                    return Err(Error::VertexOutOfRange { face: f, vertex: v });
                }
                if face[..k].contains(&v) {
                    return Err(Error::DegenerateFace { face: f });
                }
            }
            face_start.push(he_origin.len());
            for &v in face {
                he_origin.push(v);
                he_face.push(f);
            }
        }
        face_start.push(he_origin.len());
        let nh = he_origin.len();

        let mut mesh = Mesh {
            num_vertices,
            positions,
            face_start,
            he_origin,
            he_face,
            he_twin: vec![None; nh],
            he_edge: vec![usize::MAX; nh],
            edge_he: Vec::new(),
            vertex_he: vec![usize::MAX; num_vertices],
        };

        // Undirected edge -> incident halfedges.
        let mut undirected: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(nh);
        for h in 0..nh {
            let (a, b) = (mesh.origin(h), mesh.dest(h));
            undirected.entry((a.min(b), a.max(b))).or_default().push(h);
        }
        let mut keys: Vec<_> = undirected.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let hs = &undirected[&key];
            if hs.len() > 2 {
                return Err(Error::NonManifoldEdge(key.0, key.1));
            }
            if hs.len() == 2 {
                let (h0, h1) = (hs[0], hs[1]);
                if mesh.origin(h0) == mesh.origin(h1) {
                    return Err(Error::MixedOrientation(key.0, key.1));
                }
                mesh.he_twin[h0] = Some(h1);
                mesh.he_twin[h1] = Some(h0);
            }
        }
        for h in 0..nh {
            if mesh.he_edge[h] != usize::MAX {
                continue;
            }
            let e = mesh.edge_he.len();
            mesh.edge_he.push(h);
            mesh.he_edge[h] = e;
            if let Some(t) = mesh.he_twin[h] {
                mesh.he_edge[t] = e;
            }
        }

        // Vertex fans.
        let mut outgoing_count = vec![0usize; num_vertices];
        for h in 0..nh {
            let v = mesh.he_origin[h];
            outgoing_count[v] += 1;
            if mesh.he_twin[h].is_none() {
                if mesh.vertex_he[v] != usize::MAX && mesh.he_twin[mesh.vertex_he[v]].is_none() {
                    return Err(Error::NonManifoldVertex(v));
                }
                mesh.vertex_he[v] = h;
            } else if mesh.vertex_he[v] == usize::MAX {
                mesh.vertex_he[v] = h;
            }
        }
        for v in 0..num_vertices {
            if mesh.vertex_he[v] == usize::MAX {
                return Err(Error::IsolatedVertex(v));
            }
            if mesh.outgoing(v).len() != outgoing_count[v] {
                return Err(Error::NonManifoldVertex(v));
            }
        }

        // Face connectivity.
        let nf = mesh.num_faces();
        let mut seen = vec![false; nf];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(f) = queue.pop_front() {
            for h in mesh.face_halfedges(f) {
                if let Some(t) = mesh.he_twin[h] {
                    let g = mesh.he_face[t];
                    if !seen[g] {
                        seen[g] = true;
                        count += 1;
                        queue.push_back(g);
                    }
                }
            }
        }
        if count != nf {
            return Err(Error::Disconnected);
        }
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_faces(&self) -> usize {
        self.face_start.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_he.len()
    }

    pub fn num_halfedges(&self) -> usize {
        self.he_origin.len()
    }

    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }

    pub fn with_positions(mut self, positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.len() != self.num_vertices {
            return Err(Error::PositionCount {
                expected: self.num_vertices,
                got: positions.len(),
            });
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn face_degree(&self, f: usize) -> usize {
        self.face_start[f + 1] - self.face_start[f]
    }

    pub fn face_halfedges(&self, f: usize) -> Range<usize> {
        self.face_start[f]..self.face_start[f + 1]
    }

    /// Halfedge leaving local corner `k` of face `f`.
    pub fn corner_halfedge(&self, f: usize, k: usize) -> usize {
        self.face_start[f] + k
    }

    /// Local corner index of halfedge `h` within its face.
    pub fn corner_index(&self, h: usize) -> usize {
        h - self.face_start[self.he_face[h]]
    }

    pub fn face_vertices(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_halfedges(f).map(move |h| self.he_origin[h])
    }

    pub fn faces(&self) -> Vec<Vec<usize>> {
        (0..self.num_faces())
            .map(|f| self.face_vertices(f).collect())
            .collect()
    }

    pub fn origin(&self, h: usize) -> usize {
        self.he_origin[h]
    }

    pub fn dest(&self, h: usize) -> usize {
        self.he_origin[self.next(h)]
    }

    pub fn next(&self, h: usize) -> usize {
        let f = self.he_face[h];
        if h + 1 == self.face_start[f + 1] {
            self.face_start[f]
        } else {
            h + 1
        }
    }

    pub fn prev(&self, h: usize) -> usize {
        let f = self.he_face[h];
        if h == self.face_start[f] {
            self.face_start[f + 1] - 1
        } else {
            h - 1
        }
    }

    pub fn twin(&self, h: usize) -> Option<usize> {
        self.he_twin[h]
    }

    pub fn face(&self, h: usize) -> usize {
        self.he_face[h]
    }

    pub fn edge(&self, h: usize) -> usize {
        self.he_edge[h]
    }

    /// Canonical halfedge of edge `e`.
    pub fn edge_halfedge(&self, e: usize) -> usize {
        self.edge_he[e]
    }

    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let h = self.edge_he[e];
        (self.origin(h), self.dest(h))
    }

    /// +1 if `h` is the canonical halfedge of its edge, -1 otherwise.
    pub fn edge_sign(&self, h: usize) -> f64 {
        if self.edge_he[self.he_edge[h]] == h {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_boundary_halfedge(&self, h: usize) -> bool {
        self.he_twin[h].is_none()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.he_twin[self.edge_he[e]].is_none()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.he_twin[self.vertex_he[v]].is_none()
    }

    pub fn is_closed(&self) -> bool {
        self.he_twin.iter().all(Option::is_some)
    }

    /// Next outgoing halfedge counter-clockwise around `origin(h)`.
    pub fn ccw_next(&self, h: usize) -> Option<usize> {
        self.he_twin[self.prev(h)]
    }

    /// Next outgoing halfedge clockwise around `origin(h)`.
    pub fn cw_next(&self, h: usize) -> Option<usize> {
        self.he_twin[h].map(|t| self.next(t))
    }

    /// Outgoing halfedges of `v` in counter-clockwise order. For boundary
    /// vertices the first entry is the boundary halfedge.
    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        let start = self.vertex_he[v];
        let mut out = vec![start];
        let mut h = start;
        while let Some(n) = self.ccw_next(h) {
            if n == start {
                break;
            }
            out.push(n);
            h = n;
            if out.len() > self.he_origin.len() {
                break;
            }
        }
        out
    }

    /// Number of faces incident to `v`.
    pub fn valence(&self, v: usize) -> usize {
        self.outgoing(v).len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Boundary loops as sequences of boundary halfedges, face on the left.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_halfedges()];
        let mut loops = Vec::new();
        for h0 in 0..self.num_halfedges() {
            if self.he_twin[h0].is_some() || seen[h0] {
                continue;
            }
            let mut lp = Vec::new();
            let mut h = h0;
            loop {
                seen[h] = true;
                lp.push(h);
                let mut o = self.next(h);
                while let Some(t) = self.he_twin[o] {
                    o = self.next(t);
                }
                h = o;
                if h == h0 {
                    break;
                }
            }
            loops.push(lp);
        }
        loops
    }

    /// Genus of the (connected, orientable) surface.
    pub fn genus(&self) -> i64 {
        let b = self.boundary_loops().len() as i64;
        (2 - self.euler_characteristic() - b) / 2
    }

    pub fn is_all_quads(&self) -> bool {
        (0..self.num_faces()).all(|f| self.face_degree(f) == 4)
    }

    pub fn require_quads(&self) -> Result<()> {
        match (0..self.num_faces()).find(|&f| self.face_degree(f) != 4) {
            Some(f) => Err(Error::NotQuadMesh {
                face: f,
                degree: self.face_degree(f),
            }),
            None => Ok(()),
        }
    }

    pub fn require_closed(&self) -> Result<()> {
        if self.is_closed() {
            Ok(())
        } else {
            Err(Error::HasBoundary)
        }
    }

    /// Euclidean edge length from the embedding.
    pub fn edge_length(&self, e: usize) -> Option<f64> {
        let p = self.positions.as_ref()?;
        let (a, b) = self.edge_vertices(e);
        Some(dist(p[a], p[b]))
    }

    /// Halfedge from `a` to `b`, if any.
    pub fn find_halfedge(&self, a: usize, b: usize) -> Option<usize> {
        self.outgoing(a).into_iter().find(|&h| self.dest(h) == b)
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Mesh {
        let faces = vec![
            vec![0, 3, 2, 1],
            vec![4, 5, 6, 7],
            vec![0, 1, 5, 4],
            vec![1, 2, 6, 5],
            vec![2, 3, 7, 6],
            vec![3, 0, 4, 7],
        ];
        Mesh::from_faces(8, &faces, None).unwrap()
    }

    #[test]
    fn cube_counts() {
        let m = cube();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (8, 12, 6));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed());
        assert_eq!(m.genus(), 0);
        for v in 0..8 {
            assert_eq!(m.valence(v), 3);
        }
    }

    #[test]
    fn twin_and_next_cycles() {
        let m = cube();
        for h in 0..m.num_halfedges() {
            let t = m.twin(h).unwrap();
            assert_eq!(m.twin(t), Some(h));
            assert_eq!(m.origin(t), m.dest(h));
            let mut g = h;
            for _ in 0..4 {
                g = m.next(g);
            }
            assert_eq!(g, h);
            assert_eq!(m.prev(m.next(h)), h);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Mesh::from_faces(5, &[vec![0, 1, 2, 3, 4]], None),
            Err(Error::UnsupportedFaceDegree { degree: 5, .. })
        ));
        assert!(matches!(
            Mesh::from_faces(0, &[], None),
            Err(Error::EmptyMesh)
        ));
        assert!(matches!(
            Mesh::from_faces(4, &[vec![0, 1, 2], vec![0, 1, 3]], None),
            Err(Error::MixedOrientation(0, 1))
        ));
        assert!(matches!(
            Mesh::from_faces(5, &[vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]], None),
            Err(Error::NonManifoldEdge(0, 1))
        ));
        assert!(matches!(
            Mesh::from_faces(6, &[vec![0, 1, 2], vec![3, 4, 5]], None),
            Err(Error::Disconnected)
        ));
        // two triangles touching only at a vertex
        assert!(matches!(
            Mesh::from_faces(5, &[vec![0, 1, 2], vec![0, 3, 4]], None),
            Err(Error::NonManifoldVertex(0))
        ));
    }

    #[test]
    fn open_square_boundary() {
        let m = Mesh::from_faces(4, &[vec![0, 1, 2, 3]], None).unwrap();
        assert!(!m.is_closed());
        let loops = m.boundary_loops();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 4);
        assert_eq!(m.genus(), 0);
        assert_eq!(m.find_halfedge(1, 0), None);
        assert_eq!(m.find_halfedge(0, 1), Some(0));
    }
}
