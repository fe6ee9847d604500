//! Conformal flattening of genus-zero meshes.
//!
//! Disks are mapped harmonically with the boundary pinned to the unit circle
//! by arc length. Closed spheres lose the star of one vertex, which goes to
//! infinity: the star is an exact flat cone, so its outer ring receives the
//! values `1/ζ` of a cone coordinate `ζ` and the rest is harmonic.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metric::MetricMesh;
use crate::solver::{solve_with_fixed, LinearSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartDomain {
    Disk,
    /// Plane chart of a sphere. `puncture` maps to infinity; the faces
    /// around it are not part of the domain.
    Plane {
        puncture: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ConformalChart {
    /// Chart coordinate per vertex; infinite at the puncture.
    pub z: Vec<Complex64>,
    pub domain: ChartDomain,
    /// Inverse stereographic image of the plane chart (sphere case only).
    pub sphere: Option<Vec<[f64; 3]>>,
    /// Original faces outside the domain, sorted.
    pub removed_faces: Vec<usize>,
}

impl ConformalChart {
    /// Whether original face `f` belongs to the flattened domain.
    pub fn contains_face(&self, f: usize) -> bool {
        self.removed_faces.binary_search(&f).is_err()
    }

    /// Chart centroid of an original face.
    pub fn face_centroid(&self, mesh: &Mesh, f: usize) -> Complex64 {
        let n = mesh.face_degree(f) as f64;
        mesh.face_vertices(f).map(|v| self.z[v]).sum::<Complex64>() / n
    }
}

/// Metric used for flattening: positions when present, unit squares otherwise.
pub fn flattening_metric(mesh: &Mesh) -> Result<MetricMesh> {
    if mesh.positions().is_some() {
        MetricMesh::embedded(mesh)
    } else {
        MetricMesh::quad(mesh)
    }
}

fn laplacian(mm: &MetricMesh) -> Vec<(usize, usize, f64)> {
    let tri = mm.tri();
    let w = mm.cotan_weights();
    let mut trips = Vec::with_capacity(4 * tri.num_edges());
    for e in 0..tri.num_edges() {
        let (a, b) = tri.edge_vertices(e);
        trips.push((a, a, w[e]));
        trips.push((b, b, w[e]));
        trips.push((a, b, -w[e]));
        trips.push((b, a, -w[e]));
    }
    trips
}

fn signed_area(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    0.5 * ((b - a).conj() * (c - a)).im
}

/// Triangles of the auxiliary triangulation that are not positively
/// oriented in the chart, ignoring removed faces.
pub fn flipped_triangles(mm: &MetricMesh, chart: &ConformalChart) -> usize {
    let tri = mm.tri();
    (0..tri.num_faces())
        .filter(|&t| chart.contains_face(mm.tri_parent(t)))
        .filter(|&t| {
            let v: Vec<usize> = tri.face_vertices(t).collect();
            signed_area(chart.z[v[0]], chart.z[v[1]], chart.z[v[2]]) <= 0.0
        })
        .count()
}

/// Flattens a genus-zero mesh: disk meshes onto the unit disk, closed
/// meshes onto the plane.
pub fn conformal_flatten(mesh: &Mesh, solver: &dyn LinearSolver) -> Result<ConformalChart> {
    if mesh.genus() != 0 {
        return Err(Error::Topology(format!(
            "genus {} is not zero",
            mesh.genus()
        )));
    }
    let mm = flattening_metric(mesh)?;
    let loops = mesh.boundary_loops();
    let chart = match loops.len() {
        0 => flatten_sphere(&mm, solver)?,
        1 => {
            let boundary: Vec<usize> = loops[0].iter().map(|&h| mesh.origin(h)).collect();
            flatten_disk(&mm, &boundary, solver)?
        }
        n => {
            return Err(Error::Topology(format!(
                "{n} boundary loops; only disks and spheres can be flattened"
            )))
        }
    };
    match flipped_triangles(&mm, &chart) {
        0 => Ok(chart),
        n => Err(Error::FlippedTriangles(n)),
    }
}

fn flatten_disk(
    mm: &MetricMesh,
    boundary: &[usize],
    solver: &dyn LinearSolver,
) -> Result<ConformalChart> {
    let tri = mm.tri();
    let n = tri.num_vertices();
    let seg = |a: usize, b: usize| {
        let h = tri
            .find_halfedge(a, b)
            .or_else(|| tri.find_halfedge(b, a))
            .expect("boundary edge");
        mm.tri_len2(tri.edge(h)).sqrt()
    };
    let m = boundary.len();
    let mut arc = vec![0.0; m + 1];
    for k in 0..m {
        arc[k + 1] = arc[k] + seg(boundary[k], boundary[(k + 1) % m]);
    }
    let total = arc[m];
    let fixed: Vec<(usize, Complex64)> = boundary
        .iter()
        .zip(&arc)
        .map(|(&v, &s)| (v, Complex64::from_polar(1.0, 2.0 * PI * s / total)))
        .collect();
    let trips = laplacian(mm);
    let zero = vec![0.0; n];
    let re: Vec<(usize, f64)> = fixed.iter().map(|(v, z)| (*v, z.re)).collect();
    let im: Vec<(usize, f64)> = fixed.iter().map(|(v, z)| (*v, z.im)).collect();
    let x = solve_with_fixed(solver, n, &trips, &zero, &re)?;
    let y = solve_with_fixed(solver, n, &trips, &zero, &im)?;
    let mut z: Vec<Complex64> = x
        .iter()
        .zip(&y)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    orient(mm, &mut z);
    Ok(ConformalChart {
        z,
        domain: ChartDomain::Disk,
        sphere: None,
        removed_faces: Vec::new(),
    })
}

/// Conjugates the chart if it reverses orientation overall.
fn orient(mm: &MetricMesh, z: &mut [Complex64]) {
    let tri = mm.tri();
    let area: f64 = (0..tri.num_faces())
        .map(|t| {
            let v: Vec<usize> = tri.face_vertices(t).collect();
            signed_area(z[v[0]], z[v[1]], z[v[2]])
        })
        .sum();
    if area < 0.0 {
        z.iter_mut().for_each(|w| *w = w.conj());
    }
}

fn flatten_sphere(mm: &MetricMesh, solver: &dyn LinearSolver) -> Result<ConformalChart> {
    let mesh = mm.mesh();
    let tri = mm.tri();
    let n = tri.num_vertices();
    let puncture = 0;
    let mut removed_faces: Vec<usize> = mesh
        .outgoing(puncture)
        .iter()
        .map(|&h| mesh.face(h))
        .collect();
    removed_faces.sort_unstable();
    removed_faces.dedup();
    let zeta = cone_coordinates(mm, puncture, &removed_faces);
    let fixed_re: Vec<(usize, f64)> = zeta.iter().map(|&(v, c)| (v, c.inv().re)).collect();
    let fixed_im: Vec<(usize, f64)> = zeta.iter().map(|&(v, c)| (v, c.inv().im)).collect();
    let mut trips = laplacian(mm);
    // the puncture is eliminated with its star; give it a dummy row
    trips.retain(|&(i, j, _)| i != puncture && j != puncture);
    trips.push((puncture, puncture, 1.0));
    let zero = vec![0.0; n];
    let x = solve_with_fixed(solver, n, &trips, &zero, &fixed_re)?;
    let y = solve_with_fixed(solver, n, &trips, &zero, &fixed_im)?;
    let mut z: Vec<Complex64> = x
        .iter()
        .zip(&y)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    z[puncture] = Complex64::new(0.0, 0.0);
    let chart = ConformalChart {
        z: Vec::new(),
        domain: ChartDomain::Plane { puncture },
        sphere: None,
        removed_faces,
    };
    orient_plane(mm, &mut z, &chart);
    normalize_plane(&mut z, puncture);
    z[puncture] = Complex64::new(f64::INFINITY, 0.0);
    let sphere = z.iter().map(|&w| inverse_stereographic(w)).collect();
    Ok(ConformalChart {
        z,
        sphere: Some(sphere),
        ..chart
    })
}

/// Conformal coordinate `ζ = r^s e^{i s θ}`, `s = 2π / cone angle`, of every
/// vertex of `faces` other than the apex `v0`, in the flat cone metric of
/// the star of `v0`.
fn cone_coordinates(mm: &MetricMesh, v0: usize, faces: &[usize]) -> Vec<(usize, Complex64)> {
    let tri = mm.tri();
    let around = tri.outgoing(v0);
    let cone = mm.cone_angle(v0);
    let s = 2.0 * PI / cone;
    // polar position per vertex, as (radius, angle)
    let mut polar: std::collections::BTreeMap<usize, (f64, f64)> = Default::default();
    let mut theta = 0.0;
    let mut sectors = Vec::new();
    for &h in &around {
        let r = mm.tri_len2(tri.edge(h)).sqrt();
        polar.entry(tri.dest(h)).or_insert((r, theta));
        sectors.push((tri.face(h), theta));
        theta += mm.tri_angle(h);
    }
    // vertices of the removed faces that are not joined to v0 in the
    // triangulation: unfold the neighbouring triangle of the same face
    let in_removed = |t: usize| faces.binary_search(&mm.tri_parent(t)).is_ok();
    let mut changed = true;
    while changed {
        changed = false;
        for t in (0..tri.num_faces()).filter(|&t| in_removed(t)) {
            let hs: Vec<usize> = tri.face_halfedges(t).collect();
            let vs: Vec<usize> = hs.iter().map(|&h| tri.origin(h)).collect();
            if vs.contains(&v0) {
                continue;
            }
            let known: Vec<usize> = (0..3).filter(|&k| polar.contains_key(&vs[k])).collect();
            if known.len() != 2 {
                continue;
            }
            let k = (0..3).find(|&k| !polar.contains_key(&vs[k])).unwrap();
            let (a, b) = (vs[(k + 1) % 3], vs[(k + 2) % 3]);
            let to_xy = |(r, th): (f64, f64)| Complex64::from_polar(r, th);
            let (pa, pb) = (to_xy(polar[&a]), to_xy(polar[&b]));
            let p = mm.tri_layout(t);
            let c = |i: usize| Complex64::new(p[i][0], p[i][1]);
            let i0 = (k + 1) % 3;
            let i1 = (k + 2) % 3;
            let x = pa + (pb - pa) * (c(k) - c(i0)) / (c(i1) - c(i0));
            // keep the angle continuous with the sector of `a`
            let base = polar[&a].1;
            let th = base + (x * Complex64::from_polar(1.0, -base)).arg();
            polar.insert(vs[k], (x.norm(), th));
            changed = true;
        }
    }
    polar
        .into_iter()
        .map(|(v, (r, th))| (v, Complex64::from_polar(r.powf(s), s * th)))
        .collect()
}

fn orient_plane(mm: &MetricMesh, z: &mut [Complex64], chart: &ConformalChart) {
    let tri = mm.tri();
    let area: f64 = (0..tri.num_faces())
        .filter(|&t| chart.contains_face(mm.tri_parent(t)))
        .map(|t| {
            let v: Vec<usize> = tri.face_vertices(t).collect();
            signed_area(z[v[0]], z[v[1]], z[v[2]])
        })
        .sum();
    if area < 0.0 {
        z.iter_mut().for_each(|w| *w = w.conj());
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Centres the chart at the coordinate-wise median and scales the median
/// radius to one, so half the vertices land on each hemisphere.
fn normalize_plane(z: &mut [Complex64], skip: usize) {
    let others = |z: &[Complex64]| -> Vec<Complex64> {
        z.iter()
            .enumerate()
            .filter(|(v, _)| *v != skip)
            .map(|(_, w)| *w)
            .collect()
    };
    let rest = others(z);
    let c = Complex64::new(
        median(rest.iter().map(|w| w.re).collect()),
        median(rest.iter().map(|w| w.im).collect()),
    );
    z.iter_mut().for_each(|w| *w -= c);
    let r = median(others(z).iter().map(|w| w.norm()).collect());
    if r > 0.0 {
        z.iter_mut().for_each(|w| *w /= r);
    }
}

/// Unit-sphere point whose stereographic projection from the south pole is
/// `w`; orientation preserving for the outward normal.
pub fn inverse_stereographic(w: Complex64) -> [f64; 3] {
    if !w.is_finite() {
        return [0.0, 0.0, -1.0];
    }
    let r2 = w.norm_sqr();
    let d = 1.0 + r2;
    [2.0 * w.re / d, 2.0 * w.im / d, (1.0 - r2) / d]
}

/// Stereographic projection from the south pole.
pub fn stereographic(p: [f64; 3]) -> Complex64 {
    Complex64::new(p[0], p[1]) / (1.0 + p[2])
}

/// Area-weighted mean of `|∂f/∂z̄|²` over the triangulation, relative to the
/// mean of `|∇f|²/2`; zero for a conformal chart.
pub fn conformal_energy(mm: &MetricMesh, chart: &ConformalChart) -> f64 {
    let tri = mm.tri();
    let (mut anti, mut total) = (0.0, 0.0);
    for t in 0..tri.num_faces() {
        if !chart.contains_face(mm.tri_parent(t)) {
            continue;
        }
        let v: Vec<usize> = tri.face_vertices(t).collect();
        let p = mm.tri_layout(t);
        let (fz, fzb) = wirtinger(p, [chart.z[v[0]], chart.z[v[1]], chart.z[v[2]]]);
        let area = mm.tri_area(t);
        anti += area * fzb.norm_sqr();
        total += area * (fz.norm_sqr() + fzb.norm_sqr());
    }
    if total > 0.0 {
        anti / total
    } else {
        0.0
    }
}

/// `(∂f/∂z, ∂f/∂z̄)` of the linear map taking layout `p` to values `f`.
fn wirtinger(p: [[f64; 2]; 3], f: [Complex64; 3]) -> (Complex64, Complex64) {
    let (e1, e2) = (
        [p[1][0] - p[0][0], p[1][1] - p[0][1]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1]],
    );
    let (d1, d2) = (f[1] - f[0], f[2] - f[0]);
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let fx = (d1 * e2[1] - d2 * e1[1]) / det;
    let fy = (d2 * e1[0] - d1 * e2[0]) / det;
    let i = Complex64::i();
    (0.5 * (fx - i * fy), 0.5 * (fx + i * fy))
}

/// Median absolute change of triangle angles between the metric and the
/// chart, in radians.
pub fn median_angle_distortion(mm: &MetricMesh, chart: &ConformalChart) -> f64 {
    let tri = mm.tri();
    let mut diffs = Vec::new();
    for t in 0..tri.num_faces() {
        if !chart.contains_face(mm.tri_parent(t)) {
            continue;
        }
        let hs: Vec<usize> = tri.face_halfedges(t).collect();
        for &h in &hs {
            let o = chart.z[tri.origin(h)];
            let a = chart.z[tri.dest(h)] - o;
            let b = chart.z[tri.origin(tri.prev(h))] - o;
            diffs.push(((b / a).arg() - mm.tri_angle(h)).abs());
        }
    }
    median(diffs)
}

/// Cross-ratio `(a, b; c, d)`.
pub fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    (a - c) * (b - d) / ((a - d) * (b - c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::solver::ConjugateGradient;

    #[test]
    fn flat_disk_is_fixed_up_to_rotation() {
        let m = generators::polar_disk(12, 24, 1.0);
        let chart = conformal_flatten(&m, &ConjugateGradient::default()).unwrap();
        let p = m.positions().unwrap();
        let pos = |v: usize| Complex64::new(p[v][0], p[v][1]);
        let b = m.origin(m.boundary_loops()[0][0]);
        let rot = chart.z[b] / pos(b);
        let err = (0..m.num_vertices())
            .map(|v| (chart.z[v] - rot * pos(v)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let mm = flattening_metric(&m).unwrap();
        assert!(conformal_energy(&mm, &chart) < 1e-8);
    }

    #[test]
    fn hemisphere_angles_survive() {
        let m = generators::hemisphere(24, 48);
        let chart = conformal_flatten(&m, &ConjugateGradient::default()).unwrap();
        let mm = flattening_metric(&m).unwrap();
        let d = median_angle_distortion(&mm, &chart);
        assert!(d < 2f64.to_radians(), "{}", d.to_degrees());
        for &h in m.boundary_loops()[0].iter() {
            assert!((chart.z[m.origin(h)].norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sphere_chart_preserves_cross_ratios() {
        let m = generators::icosphere(4);
        let chart = conformal_flatten(&m, &ConjugateGradient::default()).unwrap();
        assert_eq!(chart.domain, ChartDomain::Plane { puncture: 0 });
        let p = m.positions().unwrap();
        // away from the puncture, and finite under projection from the south pole
        let usable = |v: usize| {
            let d2: f64 = (0..3).map(|k| (p[v][k] - p[0][k]).powi(2)).sum();
            d2 > 1.0 && p[v][2] > -0.99
        };
        let picks: Vec<usize> = (0..m.num_vertices())
            .step_by(97)
            .filter(|&v| usable(v))
            .collect();
        let mut errs: Vec<f64> = picks
            .chunks_exact(4)
            .map(|q| {
                let c = cross_ratio(chart.z[q[0]], chart.z[q[1]], chart.z[q[2]], chart.z[q[3]]);
                let s = |v: usize| stereographic(p[v]);
                let e = cross_ratio(s(q[0]), s(q[1]), s(q[2]), s(q[3]));
                (c - e).norm() / e.norm().max(1.0)
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[errs.len() - 1] < 1e-3, "{errs:?}");
        let sph = chart.sphere.as_ref().unwrap();
        assert!(sph
            .iter()
            .all(|x| ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn stereographic_roundtrip() {
        for w in [Complex64::new(0.3, -2.0), Complex64::new(0.0, 0.0)] {
            assert!((stereographic(inverse_stereographic(w)) - w).norm() < 1e-12);
        }
    }

    #[test]
    fn torus_is_rejected() {
        let m = generators::torus_grid(4, 4);
        assert!(matches!(
            conformal_flatten(&m, &ConjugateGradient::default()),
            Err(Error::Topology(_))
        ));
    }
}
