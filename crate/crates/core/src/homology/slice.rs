use std::collections::VecDeque;

use serde::Serialize;

use super::{crossing_cochain, twin, EdgeLoop, HomologyBasis};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// One traversal of a cut-graph branch along the disk boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLetter {
    /// Homology class of the branch, e.g. `a1` or `a1-b2`.
    pub label: String,
    /// `+1` when the boundary runs along the branch's reference direction.
    pub exponent: i32,
    /// Class in the canonical basis, `a` coefficients then `b` coefficients.
    pub class: Vec<i64>,
}

/// Fundamental domain obtained by cutting along the canonical loops.
///
/// The disk shares face and halfedge numbering with the original mesh; only
/// vertices on the cut are duplicated.
#[derive(Debug, Clone)]
pub struct SlicedMesh {
    original: Mesh,
    cut_edges: Vec<usize>,
    disk: Mesh,
    to_original: Vec<usize>,
    boundary_word: Vec<BoundaryLetter>,
    unchanged: bool,
}

impl SlicedMesh {
    pub fn original(&self) -> &Mesh {
        &self.original
    }

    pub fn disk(&self) -> &Mesh {
        &self.disk
    }

    pub fn cut_edges(&self) -> &[usize] {
        &self.cut_edges
    }

    pub fn to_original(&self, v: usize) -> usize {
        self.to_original[v]
    }

    /// Disk vertices that are copies of original vertex `v`, ascending.
    pub fn copies(&self, v: usize) -> Vec<usize> {
        (0..self.to_original.len())
            .filter(|&w| self.to_original[w] == v)
            .collect()
    }

    /// Lowest-index copy of `v` in the disk.
    pub fn representative(&self, v: usize) -> Option<usize> {
        self.to_original.iter().position(|&w| w == v)
    }

    pub fn boundary_word(&self) -> &[BoundaryLetter] {
        &self.boundary_word
    }

    /// `a1 b1 a1^-1 b1^-1` style rendering.
    pub fn boundary_word_string(&self) -> String {
        self.boundary_word
            .iter()
            .map(|l| {
                if l.exponent > 0 {
                    l.label.clone()
                } else {
                    format!("{}^-1", l.label)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// True when the input was a sphere and nothing was cut.
    pub fn is_unchanged(&self) -> bool {
        self.unchanged
    }
}

fn class_label(class: &[i64], g: usize) -> String {
    let mut s = String::new();
    for (k, &c) in class.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let name = if k < g {
            format!("a{}", k + 1)
        } else {
            format!("b{}", k - g + 1)
        };
        let sign = if c < 0 {
            "-"
        } else if s.is_empty() {
            ""
        } else {
            "+"
        };
        let mag = if c.abs() == 1 {
            String::new()
        } else {
            c.abs().to_string()
        };
        s.push_str(&format!("{sign}{mag}{name}"));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

struct Branch {
    halfedges: Vec<usize>,
}

/// Splits the cut graph into branches between vertices of degree ≠ 2.
fn branches(mesh: &Mesh, is_cut: &[bool]) -> Vec<Branch> {
    let cut_out = |v: usize| -> Vec<usize> {
        mesh.outgoing(v)
            .into_iter()
            .filter(|&h| is_cut[mesh.edge(h)])
            .collect()
    };
    let deg: Vec<usize> = (0..mesh.num_vertices()).map(|v| cut_out(v).len()).collect();
    let mut stop: Vec<bool> = deg.iter().map(|&d| d != 0 && d != 2).collect();
    let mut used = vec![false; mesh.num_edges()];
    let mut out = Vec::new();
    loop {
        for v in 0..mesh.num_vertices() {
            if !stop[v] {
                continue;
            }
            for h0 in cut_out(v) {
                if used[mesh.edge(h0)] {
                    continue;
                }
                let mut path = vec![h0];
                used[mesh.edge(h0)] = true;
                let mut w = mesh.dest(h0);
                while !stop[w] {
                    let back = twin(mesh, *path.last().unwrap());
                    let h = cut_out(w)
                        .into_iter()
                        .find(|&h| h != back)
                        .expect("degree two");
                    used[mesh.edge(h)] = true;
                    path.push(h);
                    w = mesh.dest(h);
                }
                out.push(Branch { halfedges: path });
            }
        }
        // closed cycles without a branch vertex get an arbitrary one
        match (0..mesh.num_edges()).find(|&e| is_cut[e] && !used[e]) {
            Some(e) => stop[mesh.edge_vertices(e).0] = true,
            None => break,
        }
    }
    out
}

/// Cuts the mesh along the union of the basis loops.
pub fn slice(mesh: &Mesh, basis: &HomologyBasis) -> Result<SlicedMesh> {
    let g = basis.genus();
    if g == 0 {
        return Ok(SlicedMesh {
            original: mesh.clone(),
            cut_edges: Vec::new(),
            disk: mesh.clone(),
            to_original: (0..mesh.num_vertices()).collect(),
            boundary_word: Vec::new(),
            unchanged: true,
        });
    }
    mesh.require_closed()?;
    let mut is_cut = vec![false; mesh.num_edges()];
    for l in basis.loops() {
        for &h in l.halfedges() {
            is_cut[mesh.edge(h)] = true;
        }
    }
    let cut_edges: Vec<usize> = (0..mesh.num_edges()).filter(|&e| is_cut[e]).collect();
    let fail = |chi: i64, loops: usize| Error::SliceFailed {
        chi,
        loops,
        edges: cut_edges.clone(),
    };

    // Each vertex splits into wedges separated by cut edges.
    let mut corner_vertex = vec![usize::MAX; mesh.num_halfedges()];
    let mut to_original = Vec::new();
    for v in 0..mesh.num_vertices() {
        let out = mesh.outgoing(v);
        let start = out.iter().position(|&h| is_cut[mesh.edge(h)]).unwrap_or(0);
        for k in 0..out.len() {
            let h = out[(start + k) % out.len()];
            if k == 0 || is_cut[mesh.edge(h)] {
                to_original.push(v);
            }
            corner_vertex[h] = to_original.len() - 1;
        }
    }
    let faces: Vec<Vec<usize>> = (0..mesh.num_faces())
        .map(|f| mesh.face_halfedges(f).map(|h| corner_vertex[h]).collect())
        .collect();
    let positions = mesh
        .positions()
        .map(|p| to_original.iter().map(|&v| p[v]).collect());
    let disk = Mesh::from_faces(to_original.len(), &faces, positions).map_err(|_| fail(0, 0))?;
    let loops = disk.boundary_loops();
    if disk.euler_characteristic() != 1 || loops.len() != 1 {
        return Err(fail(disk.euler_characteristic(), loops.len()));
    }

    let boundary_word = boundary_word(mesh, basis, &is_cut, &loops[0]);
    Ok(SlicedMesh {
        original: mesh.clone(),
        cut_edges,
        disk,
        to_original,
        boundary_word,
        unchanged: false,
    })
}

fn boundary_word(
    mesh: &Mesh,
    basis: &HomologyBasis,
    is_cut: &[bool],
    boundary: &[usize],
) -> Vec<BoundaryLetter> {
    let g = basis.genus();
    let bs = branches(mesh, is_cut);

    // Spanning tree of the branch graph; the remaining branches generate.
    let ends = |b: &Branch| {
        (
            mesh.origin(b.halfedges[0]),
            mesh.dest(*b.halfedges.last().unwrap()),
        )
    };
    let mut reach: Vec<Option<Vec<usize>>> = vec![None; mesh.num_vertices()];
    let root = ends(&bs[0]).0;
    reach[root] = Some(Vec::new());
    let mut in_tree = vec![false; bs.len()];
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for (k, b) in bs.iter().enumerate() {
            let (s, t) = ends(b);
            let (next, walk): (usize, Vec<usize>) = if s == v && reach[t].is_none() {
                (t, b.halfedges.clone())
            } else if t == v && reach[s].is_none() {
                (
                    s,
                    b.halfedges.iter().rev().map(|&h| twin(mesh, h)).collect(),
                )
            } else {
                continue;
            };
            let mut path = reach[v].clone().unwrap();
            path.extend(walk);
            reach[next] = Some(path);
            in_tree[k] = true;
            q.push_back(next);
        }
    }

    let cochains: Vec<Vec<i64>> = basis
        .loops()
        .into_iter()
        .map(|l| crossing_cochain(mesh, l))
        .collect();
    // (reference halfedge at the start, reversed start, class)
    let mut letters: Vec<(usize, usize, Vec<i64>, String)> = Vec::new();
    for (k, b) in bs.iter().enumerate() {
        if in_tree[k] {
            continue;
        }
        let (s, t) = ends(b);
        let mut cyc = reach[s].clone().unwrap();
        cyc.extend_from_slice(&b.halfedges);
        cyc.extend(
            reach[t]
                .clone()
                .unwrap()
                .iter()
                .rev()
                .map(|&h| twin(mesh, h)),
        );
        let c = EdgeLoop { halfedges: cyc };
        // x = Σ (x·b_j) a_j − (x·a_j) b_j, and x·y = −∫_x θ_y
        let mut class = vec![0i64; 2 * g];
        for j in 0..g {
            class[j] = -c.integrate(&cochains[g + j]);
            class[g + j] = c.integrate(&cochains[j]);
        }
        let (mut fwd, mut bwd) = (b.halfedges[0], twin(mesh, *b.halfedges.last().unwrap()));
        if class.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            class.iter_mut().for_each(|x| *x = -*x);
            std::mem::swap(&mut fwd, &mut bwd);
        }
        let label = class_label(&class, g);
        letters.push((fwd, bwd, class, label));
    }

    let mut word = Vec::new();
    for &h in boundary {
        for (fwd, bwd, class, label) in &letters {
            let exponent = if h == *fwd {
                1
            } else if h == *bwd {
                -1
            } else {
                continue;
            };
            word.push(BoundaryLetter {
                label: label.clone(),
                exponent,
                class: class.clone(),
            });
        }
    }
    word
}

#[cfg(test)]
mod tests {
    use super::super::homology_basis;
    use super::*;
    use crate::generators;

    #[test]
    fn torus_unfolds_to_square() {
        let n = 6;
        let m = generators::torus_grid(n, n);
        let b = homology_basis(&m).unwrap();
        let s = slice(&m, &b).unwrap();
        let d = s.disk();
        assert_eq!(d.euler_characteristic(), 1);
        assert_eq!(d.num_vertices(), (n + 1) * (n + 1));
        let interior = (0..d.num_vertices())
            .filter(|&v| !d.is_boundary_vertex(v))
            .count();
        assert_eq!(interior, (n - 1) * (n - 1));
        let word: Vec<(String, i32)> = s
            .boundary_word()
            .iter()
            .map(|l| (l.label.clone(), l.exponent))
            .collect();
        assert_eq!(word.len(), 4);
        // commutator pattern x y x⁻¹ y⁻¹ up to rotation
        for i in 0..4 {
            assert_eq!(word[i].0, word[(i + 2) % 4].0);
            assert_eq!(word[i].1, -word[(i + 2) % 4].1);
        }
        let mut labels: Vec<&str> = word.iter().map(|w| w.0.as_str()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels, vec!["a1", "b1"]);
    }

    #[test]
    fn sphere_is_untouched() {
        let m = generators::cube();
        let s = slice(&m, &HomologyBasis::empty()).unwrap();
        assert!(s.is_unchanged());
        assert_eq!(s.disk().num_faces(), 6);
    }

    #[test]
    fn genus_two_word() {
        let m = generators::origami_genus2(4);
        let b = homology_basis(&m).unwrap();
        let s = slice(&m, &b).unwrap();
        assert_eq!(s.disk().euler_characteristic(), 1);
        let w = s.boundary_word();
        assert_eq!(w.len(), 8);
        let mut total = vec![0i64; 4];
        for l in w {
            for (t, c) in total.iter_mut().zip(&l.class) {
                *t += l.exponent as i64 * c;
            }
        }
        assert_eq!(total, vec![0; 4]);
        // the four generator branches span H₁
        let mut classes: Vec<Vec<i64>> = w.iter().map(|l| l.class.clone()).collect();
        classes.sort();
        classes.dedup();
        assert_eq!(super::super::integer_rank(&classes), 4);
    }
}
