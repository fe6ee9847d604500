//! First homology of closed meshes: generator loops from a tree-cotree
//! decomposition, combinatorial intersection numbers, integer symplectic
//! reduction and slicing into a fundamental domain.

mod slice;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub use slice::{slice, BoundaryLetter, SlicedMesh};

/// Closed walk along mesh edges, stored as consecutive halfedges with
/// `dest(h[i]) == origin(h[i + 1])` cyclically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLoop {
    halfedges: Vec<usize>,
}

impl EdgeLoop {
    pub fn new(mesh: &Mesh, halfedges: Vec<usize>) -> Result<Self> {
        let n = halfedges.len();
        for i in 0..n {
            let (a, b) = (halfedges[i], halfedges[(i + 1) % n]);
            if mesh.dest(a) != mesh.origin(b) {
                return Err(Error::Topology(format!(
                    "halfedges {a} and {b} are not consecutive"
                )));
            }
        }
        Ok(EdgeLoop { halfedges })
    }

    pub fn halfedges(&self) -> &[usize] {
        &self.halfedges
    }

    pub fn len(&self) -> usize {
        self.halfedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfedges.is_empty()
    }

    /// Vertex sequence; the first vertex is not repeated at the end.
    pub fn vertices(&self, mesh: &Mesh) -> Vec<usize> {
        self.halfedges.iter().map(|&h| mesh.origin(h)).collect()
    }

    pub fn reversed(&self, mesh: &Mesh) -> Self {
        EdgeLoop {
            halfedges: self
                .halfedges
                .iter()
                .rev()
                .map(|&h| twin(mesh, h))
                .collect(),
        }
    }

    /// Sum of a per-halfedge quantity along the loop.
    pub fn integrate<T>(&self, values: &[T]) -> T
    where
        T: Copy + std::iter::Sum<T>,
    {
        self.halfedges.iter().map(|&h| values[h]).sum()
    }
}

fn twin(mesh: &Mesh, h: usize) -> usize {
    mesh.twin(h).expect("closed mesh")
}

/// Cancels immediate backtracking `h, twin(h)`, including across the seam
/// of the cycle.
fn reduce_cyclic(mesh: &Mesh, walk: &[usize]) -> Vec<usize> {
    let mut st: Vec<usize> = Vec::with_capacity(walk.len());
    for &h in walk {
        if st.last().is_some_and(|&l| twin(mesh, l) == h) {
            st.pop();
        } else {
            st.push(h);
        }
    }
    let (mut lo, mut hi) = (0, st.len());
    while hi - lo >= 2 && twin(mesh, st[lo]) == st[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    st[lo..hi].to_vec()
}

/// Breadth-first spanning tree from vertex 0: `(parent halfedge, depth)`.
fn bfs_tree(mesh: &Mesh) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = mesh.num_vertices();
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[0] = 0;
    let mut q = VecDeque::from([0]);
    while let Some(v) = q.pop_front() {
        for h in mesh.outgoing(v) {
            let w = mesh.dest(h);
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = Some(h);
                q.push_back(w);
            }
        }
    }
    (parent, depth)
}

fn root_path(mesh: &Mesh, parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut path = Vec::new();
    while let Some(h) = parent[v] {
        path.push(h);
        v = mesh.origin(h);
    }
    path.reverse();
    path
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Generators of `H₁` based at vertex 0, each closed by one edge outside a
/// BFS tree and a maximum-weight dual spanning tree (weights are the lengths
/// of the loops the edges would close, so the shortest loops survive).
fn based_generators(mesh: &Mesh) -> Result<Vec<Vec<usize>>> {
    mesh.require_closed()?;
    let g = mesh.genus();
    if g <= 0 {
        return Ok(Vec::new());
    }
    let (parent, depth) = bfs_tree(mesh);
    let mut in_tree = vec![false; mesh.num_edges()];
    for h in parent.iter().flatten() {
        in_tree[mesh.edge(*h)] = true;
    }
    let mut dual: Vec<(usize, usize)> = (0..mesh.num_edges())
        .filter(|&e| !in_tree[e])
        .map(|e| {
            let (a, b) = mesh.edge_vertices(e);
            (depth[a] + depth[b] + 1, e)
        })
        .collect();
    dual.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut uf = UnionFind((0..mesh.num_faces()).collect());
    let mut leftover = Vec::new();
    for &(_, e) in &dual {
        let h = mesh.edge_halfedge(e);
        if !uf.union(mesh.face(h), mesh.face(twin(mesh, h))) {
            leftover.push(e);
        }
    }
    if leftover.len() != 2 * g as usize {
        return Err(Error::Topology(format!(
            "tree-cotree left {} edges, expected {}",
            leftover.len(),
            2 * g
        )));
    }
    Ok(leftover
        .into_iter()
        .map(|e| {
            let h = mesh.edge_halfedge(e);
            let mut walk = root_path(mesh, &parent, mesh.origin(h));
            walk.push(h);
            let back = root_path(mesh, &parent, mesh.dest(h));
            walk.extend(back.iter().rev().map(|&x| twin(mesh, x)));
            walk
        })
        .collect())
}

/// `2g` loops generating `H₁(mesh, ℤ)`; empty for a sphere.
pub fn raw_generators(mesh: &Mesh) -> Result<Vec<EdgeLoop>> {
    Ok(based_generators(mesh)?
        .iter()
        .map(|w| EdgeLoop {
            halfedges: reduce_cyclic(mesh, w),
        })
        .collect())
}

/// Closed integer cochain Poincaré dual to `lp`.
///
/// At every vertex the loop enters along `h_in` and leaves along `h_out`.
/// The outgoing halfedges strictly between `h_out` and `twin(h_in)` in
/// counter-clockwise order point into the region on the loop's left; each
/// gets `+1` (its twin `-1`). Summing this cochain along another loop `b`
/// counts the signed crossings of `b` with a copy of the loop pushed off to
/// its left, which is the algebraic intersection number `loop · b`: it is
/// `+1` when `b` crosses from the right side of the loop to its left.
/// The cochain sums to zero around every face, so the pairing only depends
/// on the homology class of `b`.
pub fn crossing_cochain(mesh: &Mesh, lp: &EdgeLoop) -> Vec<i64> {
    let mut theta = vec![0i64; mesh.num_halfedges()];
    let hs = &lp.halfedges;
    let n = hs.len();
    for i in 0..n {
        let h_in = hs[(i + n - 1) % n];
        let h_out = hs[i];
        let stop = twin(mesh, h_in);
        if h_out == stop {
            continue;
        }
        let mut o = mesh.ccw_next(h_out).expect("closed mesh");
        while o != stop {
            theta[o] += 1;
            theta[twin(mesh, o)] -= 1;
            o = mesh.ccw_next(o).expect("closed mesh");
        }
    }
    theta
}

/// Algebraic intersection number `a · b`.
pub fn intersection_number(mesh: &Mesh, a: &EdgeLoop, b: &EdgeLoop) -> i64 {
    b.integrate(&crossing_cochain(mesh, a))
}

pub fn intersection_matrix(mesh: &Mesh, loops: &[EdgeLoop]) -> Vec<Vec<i64>> {
    let cochains: Vec<Vec<i64>> = loops.iter().map(|l| crossing_cochain(mesh, l)).collect();
    cochains
        .iter()
        .map(|c| loops.iter().map(|l| l.integrate(c)).collect())
        .collect()
}

/// Rank over ℚ via fraction-free elimination.
pub fn integer_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let (f, g) = (a[rank][c], a[r][c]);
                for k in 0..cols {
                    a[r][k] = a[r][k] * f - a[rank][k] * g;
                }
                let gcd = a[r].iter().fold(0i128, |x, &y| gcd(x, y.abs()));
                if gcd > 1 {
                    a[r].iter_mut().for_each(|x| *x /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Canonical basis `a₁..a_g, b₁..b_g` with `aᵢ·bⱼ = δᵢⱼ`, `aᵢ·aⱼ = bᵢ·bⱼ = 0`.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    a: Vec<EdgeLoop>,
    b: Vec<EdgeLoop>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledLoop {
    pub label: String,
    pub vertices: Vec<usize>,
}

impl HomologyBasis {
    pub fn empty() -> Self {
        HomologyBasis {
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn genus(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, i: usize) -> &EdgeLoop {
        &self.a[i]
    }

    pub fn b(&self, i: usize) -> &EdgeLoop {
        &self.b[i]
    }

    /// Loops in the order `a₁..a_g, b₁..b_g`.
    pub fn loops(&self) -> Vec<&EdgeLoop> {
        self.a.iter().chain(&self.b).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        let g = self.genus();
        (1..=g)
            .map(|i| format!("a{i}"))
            .chain((1..=g).map(|i| format!("b{i}")))
            .collect()
    }

    /// Intersection matrix in the order `a₁..a_g, b₁..b_g`.
    pub fn intersection_matrix(&self, mesh: &Mesh) -> Vec<Vec<i64>> {
        let loops: Vec<EdgeLoop> = self.loops().into_iter().cloned().collect();
        intersection_matrix(mesh, &loops)
    }

    pub fn labeled(&self, mesh: &Mesh) -> Vec<LabeledLoop> {
        self.labels()
            .into_iter()
            .zip(self.loops())
            .map(|(label, l)| LabeledLoop {
                label,
                vertices: l.vertices(mesh),
            })
            .collect()
    }

    pub fn to_json(&self, mesh: &Mesh) -> String {
        serde_json::json!({ "loops": self.labeled(mesh) }).to_string()
    }
}

/// Standard symplectic matrix `[[0, I], [-I, 0]]`.
pub fn standard_symplectic(g: usize) -> Vec<Vec<i64>> {
    let mut j = vec![vec![0; 2 * g]; 2 * g];
    for i in 0..g {
        j[i][g + i] = 1;
        j[g + i][i] = -1;
    }
    j
}

fn form(m: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let mut s = 0;
    for (i, xi) in x.iter().enumerate() {
        if *xi != 0 {
            for (j, yj) in y.iter().enumerate() {
                s += xi * m[i][j] * yj;
            }
        }
    }
    s
}

fn axpy(y: &mut [i64], a: i64, x: &[i64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Unimodular change of basis turning the intersection form `m` into the
/// standard symplectic form. Returns coefficient vectors for `a` then `b`.
/// `weights` are per-generator lengths used to break pivot ties.
pub fn symplectic_reduce(
    m: &[Vec<i64>],
    weights: &[usize],
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let n = m.len();
    let rank = integer_rank(m);
    if rank < n {
        return Err(Error::DependentLoops { rank, expected: n });
    }
    let cost = |v: &[i64]| -> i64 {
        v.iter()
            .zip(weights)
            .map(|(c, &w)| c.abs() * w as i64)
            .sum()
    };
    let mut work: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    while !work.is_empty() {
        let x = work.remove(0);
        let mut c: Vec<i64> = work.iter().map(|w| form(m, &x, w)).collect();
        // Euclid on the pairings of x with the remaining vectors
        loop {
            let nz: Vec<usize> = (0..c.len()).filter(|&k| c[k] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz
                .iter()
                .min_by_key(|&&k| (c[k].abs(), cost(&work[k]), k))
                .unwrap();
            for &k in &nz {
                if k != p {
                    let q = c[k] / c[p];
                    let wp = work[p].clone();
                    axpy(&mut work[k], -q, &wp);
                    c[k] -= q * c[p];
                }
            }
        }
        let Some(p) = (0..c.len()).find(|&k| c[k] != 0) else {
            return Err(Error::NonUnimodular { pivot: 0 });
        };
        if c[p].abs() != 1 {
            return Err(Error::NonUnimodular { pivot: c[p] });
        }
        let mut y = work.remove(p);
        if c[p] == -1 {
            y.iter_mut().for_each(|t| *t = -*t);
        }
        for w in work.iter_mut() {
            let (wy, wx) = (form(m, w, &y), form(m, w, &x));
            axpy(w, -wy, &x);
            axpy(w, wx, &y);
        }
        a.push(x);
        b.push(y);
    }
    Ok((a, b))
}

/// Concatenates based walks with integer multiplicities and reduces.
fn realize(mesh: &Mesh, based: &[Vec<usize>], coeffs: &[i64]) -> EdgeLoop {
    let mut walk = Vec::new();
    for (w, &c) in based.iter().zip(coeffs) {
        for _ in 0..c.abs() {
            if c > 0 {
                walk.extend_from_slice(w);
            } else {
                walk.extend(w.iter().rev().map(|&h| twin(mesh, h)));
            }
        }
    }
    EdgeLoop {
        halfedges: reduce_cyclic(mesh, &walk),
    }
}

/// Symplectic basis from loops generating `H₁`. The loops need not pass
/// through a common vertex; recombined loops are realized by joining each
/// generator to vertex 0 along a BFS tree.
pub fn canonicalize(loops: &[EdgeLoop], mesh: &Mesh) -> Result<HomologyBasis> {
    if loops.is_empty() {
        return Ok(HomologyBasis::empty());
    }
    let m = intersection_matrix(mesh, loops);
    let weights: Vec<usize> = loops.iter().map(EdgeLoop::len).collect();
    let (ca, cb) = symplectic_reduce(&m, &weights)?;
    let (parent, _) = bfs_tree(mesh);
    let based: Vec<Vec<usize>> = loops
        .iter()
        .map(|l| {
            let start = mesh.origin(l.halfedges[0]);
            let stem = root_path(mesh, &parent, start);
            let mut w = stem.clone();
            w.extend_from_slice(&l.halfedges);
            w.extend(stem.iter().rev().map(|&h| twin(mesh, h)));
            w
        })
        .collect();
    Ok(HomologyBasis {
        a: ca.iter().map(|c| realize(mesh, &based, c)).collect(),
        b: cb.iter().map(|c| realize(mesh, &based, c)).collect(),
    })
}

/// Raw generators followed by canonicalization.
pub fn homology_basis(mesh: &Mesh) -> Result<HomologyBasis> {
    canonicalize(&raw_generators(mesh)?, mesh)
}
