//! Branch-consistent integration of `h = f^{1/4}` over the cut domain.
//!
//! Every face carries the value of `h` at its chart centroid. Along a
//! straight segment that avoids the singular points, `h` continues exactly
//! as `h(y) = h(x) Π ((y - s)/(x - s))^{e_s}` with principal powers, so the
//! branch never has to be guessed from nearby samples.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::cut::{CutGraph, Domain, SnappedSingularity};
use super::flatten::ConformalChart;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::obj::mesh_to_obj_string;
use crate::registry::Registry;

/// Quadrature rule on `[0, 1]`.
pub trait Quadrature: Send + Sync {
    /// `(node, weight)` pairs; weights sum to one.
    fn rule(&self) -> &[(f64, f64)];
}

pub struct Midpoint;

impl Quadrature for Midpoint {
    fn rule(&self) -> &[(f64, f64)] {
        &[(0.5, 1.0)]
    }
}

/// Three-point Gauss-Legendre.
pub struct Gauss3;

const G3: f64 = 0.387_298_334_620_741_7; // sqrt(3/5) / 2

impl Quadrature for Gauss3 {
    fn rule(&self) -> &[(f64, f64)] {
        &[
            (0.5 - G3, 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.5 + G3, 5.0 / 18.0),
        ]
    }
}

pub fn quadratures() -> Registry<dyn Quadrature> {
    let mut r: Registry<dyn Quadrature> = Registry::new("quadrature");
    r.register("midpoint", Arc::new(Midpoint));
    r.register("gauss3", Arc::new(Gauss3));
    r
}

/// The midpoint rule leaves face loops open by about 1e-2 a few rings from
/// a simple pole, enough to skew cut transitions past a degree.
pub const DEFAULT_QUADRATURE: &str = "gauss3";

#[derive(Clone)]
pub struct IntegrationConfig {
    pub quadrature: Arc<dyn Quadrature>,
    /// Edges within this many rings of a singular vertex are subdivided.
    pub refine_rings: usize,
    pub refine_factor: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            quadrature: quadratures().get(DEFAULT_QUADRATURE).expect("registered"),
            refine_rings: 2,
            refine_factor: 4,
        }
    }
}

/// Mismatch of the atlas across one cut edge: `w' = i^k w + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutTransition {
    pub edge: usize,
    pub rotation: u8,
    /// Deviation of the measured rotation from `k π/2`, in degrees.
    pub angle_error_deg: f64,
    /// `|ratio| - 1` of the measured edge images.
    pub scale_error: f64,
    pub translation_re: f64,
    pub translation_im: f64,
}

/// Total image angle around a singular vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeMeasurement {
    pub vertex: usize,
    pub order: i64,
    pub measured: f64,
    /// `(order + 4) π / 2` at interior vertices, `None` on the boundary.
    pub expected: Option<f64>,
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct UvAtlas {
    /// Integrated coordinate per corner (halfedge).
    pub corner_w: Vec<Complex64>,
    /// `k` with `h(centroid) = i^k · principal f^{1/4}` per domain face.
    pub branch: Vec<Option<u8>>,
    pub cut: CutGraph,
    pub transitions: Vec<CutTransition>,
    /// Non-cut edges where the branches of the two faces disagree.
    pub tears: Vec<(usize, usize)>,
    /// Largest corner mismatch across non-cut edges relative to the edge image.
    pub continuity_residual: f64,
    /// Largest `|∮ h dz|` around a face over its perimeter image, for faces
    /// without a singular corner.
    pub path_residual: f64,
    pub cones: Vec<ConeMeasurement>,
    /// Largest `|h⁴ - f| / |f|` over all evaluation points.
    pub root_residual: f64,
}

impl UvAtlas {
    pub fn max_transition_error_deg(&self) -> f64 {
        self.transitions
            .iter()
            .map(|t| t.angle_error_deg)
            .fold(0.0, f64::max)
    }
}

/// Texture scale used when none is given; purely cosmetic.
pub const DEFAULT_CHECKER_SCALE: f64 = 8.0;

/// Per-corner texture coordinates `(Re w, Im w) · checker_scale`.
pub fn corner_uv(atlas: &UvAtlas, checker_scale: f64) -> Vec<[f64; 2]> {
    atlas
        .corner_w
        .iter()
        .map(|w| [w.re * checker_scale, w.im * checker_scale])
        .collect()
}

/// Writes the mesh with one `vt` per corner. Integer isolines of the
/// texture trace the trajectories of the differential.
pub fn export_obj_with_uv(
    mesh: &Mesh,
    atlas: &UvAtlas,
    path: impl AsRef<Path>,
    checker_scale: f64,
) -> Result<()> {
    let uv = corner_uv(atlas, checker_scale);
    std::fs::write(path, mesh_to_obj_string(mesh, Some(&uv)))?;
    Ok(())
}

/// Fourth root continued along straight segments.
struct Root {
    /// `(site, exponent, order)`.
    sites: Vec<(Complex64, f64, i64)>,
}

impl Root {
    fn continue_to(&self, from: Complex64, h: Complex64, to: Complex64) -> Complex64 {
        self.sites
            .iter()
            .fold(h, |acc, &(s, e, _)| acc * ((to - s) / (from - s)).powf(e))
    }

    fn log_f(&self, z: Complex64) -> Complex64 {
        self.sites
            .iter()
            .map(|&(s, _, k)| (z - s).ln() * k as f64)
            .sum()
    }

    /// `f^{1/4}` with argument in `(-π/4, π/4]`.
    fn principal(&self, z: Complex64) -> Complex64 {
        let l = self.log_f(z);
        let arg = l.im.sin().atan2(l.im.cos());
        (Complex64::new(l.re, arg) / 4.0).exp()
    }

    fn residual(&self, z: Complex64, h: Complex64) -> f64 {
        let f = self.log_f(z).exp();
        (h.powu(4) - f).norm() / f.norm()
    }
}

fn ring_distance(mesh: &Mesh, singular: &[SnappedSingularity], limit: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; mesh.num_vertices()];
    let mut queue = VecDeque::new();
    for s in singular {
        dist[s.vertex] = 0;
        queue.push_back(s.vertex);
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] >= limit {
            continue;
        }
        for h in mesh.outgoing(v) {
            for w in [mesh.dest(h), mesh.origin(mesh.prev(h))] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    dist
}

struct Integrator<'a> {
    mesh: &'a Mesh,
    chart: &'a ConformalChart,
    root: Root,
    config: &'a IntegrationConfig,
    ring: Vec<usize>,
    exponent_at: Vec<Option<f64>>,
    residual: std::cell::Cell<f64>,
}

/// Longest piece relative to its distance from a singular site.
const PIECE_RATIO: f64 = 0.25;
const MAX_PIECES: usize = 64;

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() > 0.0 {
        ((p - a) * d.conj()).re / d.norm_sqr()
    } else {
        0.0
    };
    (a + d * t.clamp(0.0, 1.0) - p).norm()
}

/// Clipping of the singular end of an edge when `∫ h` diverges there.
const DIVERGENT_OFFSET: f64 = 0.05;

impl Integrator<'_> {
    fn h_at(&self, c: Complex64, hc: Complex64, x: Complex64) -> Complex64 {
        let h = self.root.continue_to(c, hc, x);
        self.residual
            .set(self.residual.get().max(self.root.residual(x, h)));
        h
    }

    /// `∫ h dz` from vertex `a` to vertex `b` inside a face with centroid
    /// `c` where `h(c) = hc`.
    fn edge_integral(&self, a: usize, b: usize, c: Complex64, hc: Complex64) -> Complex64 {
        let (mut za, mut zb) = (self.chart.z[a], self.chart.z[b]);
        let (ea, eb) = (self.exponent_at[a], self.exponent_at[b]);
        // integrals that diverge at a singular end stop short of it
        if ea.is_some_and(|e| e <= -1.0) {
            za += (zb - za) * DIVERGENT_OFFSET;
        }
        if eb.is_some_and(|e| e <= -1.0) {
            zb += (za - zb) * DIVERGENT_OFFSET;
        }
        let near = self.ring[a].max(self.ring[b]) <= self.config.refine_rings;
        let n = if near {
            self.config.refine_factor.max(1)
        } else {
            1
        }
        .max(self.pieces(za, zb));
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let z0 = za + (zb - za) * (k as f64 / n as f64);
            let z1 = za + (zb - za) * ((k + 1) as f64 / n as f64);
            let sing = if k == 0 {
                ea.filter(|&e| e > -1.0).map(|e| (z0, e))
            } else {
                None
            }
            .or(if k + 1 == n {
                eb.filter(|&e| e > -1.0).map(|e| (z1, e))
            } else {
                None
            });
            total += match sing {
                Some((s, e)) => self.product_rule(s, e, z0, z1, c, hc),
                None => {
                    let d = z1 - z0;
                    self.config
                        .quadrature
                        .rule()
                        .iter()
                        .map(|&(t, w)| self.h_at(c, hc, z0 + d * t) * w)
                        .sum::<Complex64>()
                        * d
                }
            };
        }
        total
    }

    /// Subintervals needed to keep each piece short against its distance to
    /// the nearest singular site. Far from all sites the distance grows like
    /// `|z|`, which also resolves the decay of `h` towards infinity.
    fn pieces(&self, za: Complex64, zb: Complex64) -> usize {
        let len = (zb - za).norm();
        let rho = self
            .root
            .sites
            .iter()
            .map(|&(s, _, _)| segment_distance(s, za, zb))
            .fold(f64::INFINITY, f64::min);
        let n = (len / (PIECE_RATIO * rho)).ceil();
        if n.is_finite() {
            (n as usize).clamp(1, MAX_PIECES)
        } else {
            1
        }
    }

    /// `∫ h` over a segment ending at the singular point `s`, treating
    /// `h / (z - s)^e` as constant.
    fn product_rule(
        &self,
        s: Complex64,
        e: f64,
        z0: Complex64,
        z1: Complex64,
        c: Complex64,
        hc: Complex64,
    ) -> Complex64 {
        let m = 0.5 * (z0 + z1);
        let hm = self.h_at(c, hc, m);
        let r = m - s;
        let t0 = ((z0 - s) / r).re.max(0.0);
        let t1 = ((z1 - s) / r).re.max(0.0);
        hm * r * (t1.powf(e + 1.0) - t0.powf(e + 1.0)) / (e + 1.0)
    }
}

fn centroid(mesh: &Mesh, chart: &ConformalChart, f: usize) -> Complex64 {
    chart.face_centroid(mesh, f)
}

fn point_in_triangle(p: Complex64, a: Complex64, b: Complex64, c: Complex64) -> bool {
    let s = |u: Complex64, v: Complex64| ((v - u).conj() * (p - u)).im;
    let (d1, d2, d3) = (s(a, b), s(b, c), s(c, a));
    (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
}

/// Domain face containing the centroid of the chart, or the face whose
/// centroid is nearest to it.
fn seed_face(mesh: &Mesh, chart: &ConformalChart, domain: &Domain) -> usize {
    let pts: Vec<Complex64> = (0..mesh.num_vertices())
        .filter(|&v| domain.vertex[v])
        .map(|v| chart.z[v])
        .collect();
    let g = pts.iter().sum::<Complex64>() / pts.len() as f64;
    let faces = || (0..mesh.num_faces()).filter(|&f| domain.face[f]);
    faces()
        .find(|&f| {
            let vs: Vec<Complex64> = mesh.face_vertices(f).map(|v| chart.z[v]).collect();
            (1..vs.len() - 1).any(|k| point_in_triangle(g, vs[0], vs[k], vs[k + 1]))
        })
        .unwrap_or_else(|| {
            faces()
                .min_by(|&a, &b| {
                    (centroid(mesh, chart, a) - g)
                        .norm()
                        .total_cmp(&(centroid(mesh, chart, b) - g).norm())
                })
                .expect("domain has faces")
        })
}

/// Integrates `h dz` over the domain of `chart`, propagating the branch
/// through a breadth-first tree of faces that never crosses the cut.
/// Tears are recorded, not raised; see [`integrate_fourth_root`].
pub fn integrate_fourth_root_report(
    mesh: &Mesh,
    chart: &ConformalChart,
    singular: &[SnappedSingularity],
    cut: &CutGraph,
    config: &IntegrationConfig,
) -> Result<UvAtlas> {
    let domain = Domain::new(mesh, chart);
    let root = Root {
        sites: singular
            .iter()
            .map(|s| (chart.z[s.vertex], s.exponent(), s.order))
            .collect(),
    };
    let mut exponent_at = vec![None; mesh.num_vertices()];
    for s in singular {
        exponent_at[s.vertex] = Some(s.exponent());
    }
    let it = Integrator {
        mesh,
        chart,
        root,
        config,
        ring: ring_distance(mesh, singular, config.refine_rings + 1),
        exponent_at,
        residual: std::cell::Cell::new(0.0),
    };
    let nf = mesh.num_faces();
    let wedge = wedges(mesh, &domain, cut);
    let mut wedge_w: Vec<Option<Complex64>> = vec![None; mesh.num_halfedges()];
    let mut h_face: Vec<Option<Complex64>> = vec![None; nf];
    let seed = seed_face(mesh, chart, &domain);
    h_face[seed] = Some(it.root.principal(centroid(mesh, chart, seed)));
    wedge_w[wedge[mesh.face_halfedges(seed).start]] = Some(Complex64::new(0.0, 0.0));
    let mut closure: f64 = 0.0;
    let mut queue = VecDeque::from([seed]);
    while let Some(f) = queue.pop_front() {
        let cf = centroid(mesh, chart, f);
        let hf = h_face[f].unwrap();
        closure = closure.max(fill_face(&it, &wedge, &mut wedge_w, f, cf, hf));
        for h in mesh.face_halfedges(f) {
            let e = mesh.edge(h);
            if !domain.interior_edge[e] || cut.contains(e) {
                continue;
            }
            let g = mesh.face(mesh.twin(h).unwrap());
            if h_face[g].is_some() {
                continue;
            }
            let mid = 0.5 * (chart.z[mesh.origin(h)] + chart.z[mesh.dest(h)]);
            h_face[g] = Some(it.h_at(mid, it.h_at(cf, hf, mid), centroid(mesh, chart, g)));
            queue.push_back(g);
        }
    }
    let mut corner_w: Vec<Complex64> = (0..mesh.num_halfedges())
        .map(|h| wedge_w[wedge[h]].unwrap_or(Complex64::new(f64::NAN, 0.0)))
        .collect();
    let mut tears = Vec::new();
    let mut continuity: f64 = 0.0;
    let mut transitions = Vec::new();
    for e in 0..mesh.num_edges() {
        if !domain.interior_edge[e] {
            continue;
        }
        let h = mesh.edge_halfedge(e);
        let t = mesh.twin(h).unwrap();
        let (f, g) = (mesh.face(h), mesh.face(t));
        let (Some(hf), Some(hg)) = (h_face[f], h_face[g]) else {
            continue;
        };
        // corner values at origin(h) and dest(h) seen from both faces
        let (fu, fv) = (corner_w[h], corner_w[mesh.next(h)]);
        let (gu, gv) = (corner_w[mesh.next(t)], corner_w[t]);
        if cut.contains(e) {
            let ratio = (gv - gu) / (fv - fu);
            let k = (ratio.arg() / FRAC_PI_2).round();
            let rot = Complex64::from_polar(1.0, k * FRAC_PI_2);
            let tr = gu - rot * fu;
            transitions.push(CutTransition {
                edge: e,
                rotation: (k as i64).rem_euclid(4) as u8,
                angle_error_deg: (ratio.arg() - k * FRAC_PI_2).abs().to_degrees(),
                scale_error: ratio.norm() - 1.0,
                translation_re: tr.re,
                translation_im: tr.im,
            });
            continue;
        }
        let mid = 0.5 * (chart.z[mesh.origin(h)] + chart.z[mesh.dest(h)]);
        let a = it.h_at(centroid(mesh, chart, f), hf, mid);
        let b = it.h_at(centroid(mesh, chart, g), hg, mid);
        if (a / b).arg().abs() > FRAC_PI_4 {
            tears.push(mesh.edge_vertices(e));
        }
        let scale = (fv - fu).norm().max(f64::MIN_POSITIVE);
        continuity = continuity.max((fu - gu).norm().max((fv - gv).norm()) / scale);
    }
    let branch = h_face
        .iter()
        .enumerate()
        .map(|(f, h)| {
            h.map(|h| {
                let p = it.root.principal(centroid(mesh, chart, f));
                (((h / p).arg() / FRAC_PI_2).round() as i64).rem_euclid(4) as u8
            })
        })
        .collect();
    fill_outside(mesh, &domain, &mut corner_w);
    let cones = singular
        .iter()
        .map(|s| measure_cone(mesh, &domain, &corner_w, s))
        .collect();
    Ok(UvAtlas {
        corner_w,
        branch,
        cut: cut.clone(),
        transitions,
        tears,
        continuity_residual: continuity,
        path_residual: closure,
        cones,
        root_residual: it.residual.get(),
    })
}

/// As [`integrate_fourth_root_report`], failing on the first branch tear.
pub fn integrate_fourth_root(
    mesh: &Mesh,
    chart: &ConformalChart,
    singular: &[SnappedSingularity],
    cut: &CutGraph,
    config: &IntegrationConfig,
) -> Result<UvAtlas> {
    let atlas = integrate_fourth_root_report(mesh, chart, singular, cut, config)?;
    match atlas.tears.first() {
        Some(&(a, b)) => Err(Error::BranchTear(a, b)),
        None => Ok(atlas),
    }
}

/// Gives a value to every unset wedge of face `f` by integrating from a
/// set neighbour, then returns how badly the face loop closes relative to
/// its perimeter image.
fn fill_face(
    it: &Integrator,
    wedge: &[usize],
    wedge_w: &mut [Option<Complex64>],
    f: usize,
    c: Complex64,
    hc: Complex64,
) -> f64 {
    let hs: Vec<usize> = it.mesh.face_halfedges(f).collect();
    let n = hs.len();
    let steps: Vec<Complex64> = hs
        .iter()
        .map(|&h| it.edge_integral(it.mesh.origin(h), it.mesh.dest(h), c, hc))
        .collect();
    let start = (0..n)
        .find(|&k| wedge_w[wedge[hs[k]]].is_some())
        .expect("face touches a set wedge");
    for j in 1..n {
        let k = (start + j) % n;
        let prev = (start + j - 1) % n;
        if wedge_w[wedge[hs[k]]].is_none() {
            wedge_w[wedge[hs[k]]] = Some(wedge_w[wedge[hs[prev]]].unwrap() + steps[prev]);
        }
    }
    let loop_sum: Complex64 = steps.iter().sum();
    let perimeter: f64 = steps.iter().map(|s| s.norm()).sum();
    let singular_corner = hs
        .iter()
        .any(|&h| it.exponent_at[it.mesh.origin(h)].is_some());
    if singular_corner || perimeter == 0.0 {
        0.0
    } else {
        loop_sum.norm() / perimeter
    }
}

/// Union of corners around each vertex that are not separated by the cut
/// or the domain boundary. Returns a representative halfedge per corner.
fn wedges(mesh: &Mesh, domain: &Domain, cut: &CutGraph) -> Vec<usize> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..mesh.num_halfedges()).collect();
    for h in 0..mesh.num_halfedges() {
        let e = mesh.edge(h);
        if !domain.interior_edge[e] || cut.contains(e) {
            continue;
        }
        // corner at origin(h) in face(h) meets the corner after the twin
        let other = mesh.next(mesh.twin(h).unwrap());
        let (a, b) = (find(&mut parent, h), find(&mut parent, other));
        parent[a.max(b)] = a.min(b);
    }
    (0..mesh.num_halfedges())
        .map(|h| find(&mut parent, h))
        .collect()
}

/// Corners of faces outside the domain copy a domain corner at the same
/// vertex, or the mean of the face's known corners at the puncture.
fn fill_outside(mesh: &Mesh, domain: &Domain, corner_w: &mut [Complex64]) {
    let mut at_vertex = vec![None; mesh.num_vertices()];
    for h in 0..mesh.num_halfedges() {
        if domain.face[mesh.face(h)] && !corner_w[h].is_nan() && at_vertex[mesh.origin(h)].is_none()
        {
            at_vertex[mesh.origin(h)] = Some(corner_w[h]);
        }
    }
    for f in (0..mesh.num_faces()).filter(|&f| !domain.face[f]) {
        let hs: Vec<usize> = mesh.face_halfedges(f).collect();
        let known: Vec<Complex64> = hs
            .iter()
            .filter_map(|&h| at_vertex[mesh.origin(h)])
            .collect();
        let mean = if known.is_empty() {
            Complex64::new(0.0, 0.0)
        } else {
            known.iter().sum::<Complex64>() / known.len() as f64
        };
        for &h in &hs {
            corner_w[h] = at_vertex[mesh.origin(h)].unwrap_or(mean);
        }
    }
}

fn measure_cone(
    mesh: &Mesh,
    domain: &Domain,
    corner_w: &[Complex64],
    s: &SnappedSingularity,
) -> ConeMeasurement {
    let measured: f64 = mesh
        .outgoing(s.vertex)
        .iter()
        .filter(|&&h| domain.face[mesh.face(h)])
        .map(|&h| {
            let ws = corner_w[h];
            let wb = corner_w[mesh.next(h)];
            let wa = corner_w[mesh.prev(h)];
            ((wa - ws) / (wb - ws)).arg()
        })
        .sum();
    let interior = !domain.boundary_vertex[s.vertex];
    let expected = interior.then(|| (s.order + 4) as f64 * PI / 2.0);
    ConeMeasurement {
        vertex: s.vertex,
        order: s.order,
        measured,
        expected,
        relative_error: expected.map(|x| (measured - x).abs() / x),
    }
}

#[cfg(test)]
mod tests {
    use super::super::cut::{singular_cut_graph, snap_singularities};
    use super::super::flatten::conformal_flatten;
    use super::super::rational::{RationalQuartic, SingularPoint};
    use super::*;
    use crate::generators;
    use crate::solver::ConjugateGradient;

    fn run(m: &Mesh, rq: &RationalQuartic) -> (ConformalChart, UvAtlas) {
        let chart = conformal_flatten(m, &ConjugateGradient::default()).unwrap();
        let s = snap_singularities(m, &chart, rq).unwrap();
        let cut = singular_cut_graph(m, &chart, &s);
        let atlas =
            integrate_fourth_root(m, &chart, &s, &cut, &IntegrationConfig::default()).unwrap();
        (chart, atlas)
    }

    #[test]
    fn flat_rectangle_is_identity() {
        let m = generators::rectangle(6, 4, 1.5, 1.0);
        let (chart, atlas) = run(&m, &RationalQuartic::default());
        assert!(atlas.cut.edges.is_empty());
        // w = z + const in the chart
        let h0 = 0;
        let off = atlas.corner_w[h0] - chart.z[m.origin(h0)];
        for h in 0..m.num_halfedges() {
            assert!((atlas.corner_w[h] - chart.z[m.origin(h)] - off).norm() < 1e-12);
        }
        assert!(atlas.continuity_residual < 1e-12);
    }

    #[test]
    fn cone_angles_at_the_centre() {
        let m = generators::polar_disk(30, 48, 2.0);
        for k in [-3i64, -2, -1, 1, 2] {
            let p = SingularPoint::new(Complex64::new(0.0, 0.0), k.unsigned_abs() as u32);
            let rq = if k > 0 {
                RationalQuartic::new(vec![p], vec![]).unwrap()
            } else {
                RationalQuartic::new(vec![], vec![p]).unwrap()
            };
            let (_, atlas) = run(&m, &rq);
            let cone = atlas.cones[0];
            assert!(cone.relative_error.unwrap() < 0.02, "k={k}: {cone:?}");
            assert!(atlas.max_transition_error_deg() < 1.0);
            assert!(atlas.root_residual < 1e-9);
        }
    }

    #[test]
    fn face_fixtures_on_a_disk() {
        use super::super::rational::fixtures;
        let m = generators::polar_disk(40, 96, 1.0);
        for rq in [
            fixtures::face_six_poles(),
            fixtures::face_two_zeros_four_poles(),
        ] {
            let (_, atlas) = run(&m, &rq);
            assert!(atlas.tears.is_empty());
            assert!(!atlas.transitions.is_empty());
            assert!(
                atlas.max_transition_error_deg() < 1.0,
                "{}",
                atlas.max_transition_error_deg()
            );
            assert!(
                atlas.continuity_residual < 1e-6,
                "{}",
                atlas.continuity_residual
            );
            assert!(atlas.path_residual < 1e-6, "{}", atlas.path_residual);
            assert!(atlas.root_residual < 1e-9);
            assert_eq!(atlas.cones.len(), 6);
            for c in &atlas.cones {
                assert!(c.relative_error.unwrap() < 0.1, "{c:?}");
            }
        }
    }

    #[test]
    fn sphere_fixtures() {
        use super::super::rational::fixtures;
        let m = generators::icosphere(4);
        for rq in [
            fixtures::max_planck_eight_poles(),
            fixtures::max_planck_two_zeros_ten_poles(),
        ] {
            let (_, atlas) = run(&m, &rq);
            assert!(atlas.tears.is_empty());
            assert!(
                atlas.max_transition_error_deg() < 1.0,
                "{}",
                atlas.max_transition_error_deg()
            );
            assert!(atlas.continuity_residual < 1e-6);
            assert!(atlas.path_residual < 1e-6, "{}", atlas.path_residual);
            assert!(atlas.corner_w.iter().all(|w| w.is_finite()));
        }
    }

    #[test]
    fn obj_vt_match_across_uncut_edges() {
        let m = generators::polar_disk(16, 32, 1.5);
        let rq = RationalQuartic::new(
            vec![],
            vec![SingularPoint::new(Complex64::new(0.2, 0.1), 1)],
        )
        .unwrap();
        let (_, atlas) = run(&m, &rq);
        let path = std::env::temp_dir().join(format!("uv_{}.obj", std::process::id()));
        export_obj_with_uv(&m, &atlas, &path, 1.0).unwrap();
        let data = crate::obj::parse_obj(&std::fs::read_to_string(&path).unwrap()).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(data.texcoords.len(), 3 * m.num_faces());
        for e in (0..m.num_edges()).filter(|&e| !m.is_boundary_edge(e) && !atlas.cut.contains(e)) {
            let h = m.edge_halfedge(e);
            let t = m.twin(h).unwrap();
            for (a, b) in [(h, m.next(t)), (m.next(h), t)] {
                let (p, q) = (data.texcoords[a], data.texcoords[b]);
                assert!((p[0] - q[0]).abs() < 1e-6 && (p[1] - q[1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn quadrature_registry() {
        let r = quadratures();
        assert_eq!(r.names(), vec!["midpoint", "gauss3"]);
        for name in r.names() {
            let w: f64 = r.get(&name).unwrap().rule().iter().map(|p| p.1).sum();
            assert!((w - 1.0).abs() < 1e-15);
        }
    }
}
