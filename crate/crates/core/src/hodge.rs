//! Harmonic and holomorphic 1-forms.
//!
//! Forms are stored per halfedge of the input mesh. All metric computations
//! run on the auxiliary triangulation, where values on the added diagonals
//! follow from closedness.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::homology::{crossing_cochain, HomologyBasis};
use crate::metric::MetricMesh;
use crate::solver::{solve_with_fixed, LinearSolver};

/// Antisymmetric per-halfedge values: `value(twin h) = -value(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOneForm<T> {
    values: Vec<T>,
}

pub type RealForm = DiscreteOneForm<f64>;
pub type ComplexForm = DiscreteOneForm<Complex64>;

impl<T: Copy> DiscreteOneForm<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        DiscreteOneForm { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, h: usize) -> T {
        self.values[h]
    }
}

impl<T> DiscreteOneForm<T>
where
    T: Copy + std::iter::Sum<T> + std::ops::Add<Output = T>,
{
    /// Sum along a chain of halfedges.
    pub fn integrate(&self, path: &[usize]) -> T {
        path.iter().map(|&h| self.values[h]).sum()
    }

    /// Largest absolute sum around a face, via `norm`.
    pub fn closedness_residual(&self, mm: &MetricMesh, norm: impl Fn(T) -> f64) -> f64 {
        let m = mm.mesh();
        (0..m.num_faces())
            .map(|f| norm(m.face_halfedges(f).map(|h| self.values[h]).sum()))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct CornerValue {
    face: usize,
    corner: usize,
    re: f64,
    im: f64,
}

impl ComplexForm {
    fn corner_values(&self, mm: &MetricMesh) -> Vec<CornerValue> {
        let m = mm.mesh();
        (0..m.num_halfedges())
            .map(|h| CornerValue {
                face: m.face(h),
                corner: m.corner_index(h),
                re: self.values[h].re,
                im: self.values[h].im,
            })
            .collect()
    }
}

/// Extends original-halfedge values to the triangulation. Every added
/// diagonal closes a triangle whose other two sides are original.
fn to_tri_values<T>(mm: &MetricMesh, values: &[T]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Neg<Output = T>,
{
    let tri = mm.tri();
    let mut out = vec![T::default(); tri.num_halfedges()];
    let mut known = vec![false; tri.num_halfedges()];
    for (h, v) in values.iter().enumerate() {
        let th = mm.to_tri(h);
        out[th] = *v;
        known[th] = true;
    }
    for th in 0..tri.num_halfedges() {
        if !known[th] {
            let (a, b) = (tri.next(th), tri.prev(th));
            out[th] = -(out[a] + out[b]);
        }
    }
    out
}

fn restrict<T: Copy>(mm: &MetricMesh, tri_values: &[T]) -> Vec<T> {
    (0..mm.mesh().num_halfedges())
        .map(|h| tri_values[mm.to_tri(h)])
        .collect()
}

/// Harmonic representatives, one per loop of `basis` in the order
/// `a₁..a_g, b₁..b_g`. Form `k` integrates to `loop_k · γ` over any cycle γ.
pub fn harmonic_basis(
    mm: &MetricMesh,
    basis: &HomologyBasis,
    solver: &dyn LinearSolver,
) -> Result<Vec<RealForm>> {
    let mesh = mm.mesh();
    if basis.genus() == 0 {
        return Ok(Vec::new());
    }
    mesh.require_closed()?;
    let tri = mm.tri();
    let w = mm.cotan_weights();
    let n = tri.num_vertices();
    let mut trips = Vec::with_capacity(4 * tri.num_edges());
    for e in 0..tri.num_edges() {
        let (i, j) = tri.edge_vertices(e);
        trips.extend([(i, i, w[e]), (j, j, w[e]), (i, j, -w[e]), (j, i, -w[e])]);
    }
    basis
        .loops()
        .into_iter()
        .map(|lp| {
            let theta: Vec<f64> = crossing_cochain(mesh, lp)
                .iter()
                .map(|&x| x as f64)
                .collect();
            let theta_t = to_tri_values(mm, &theta);
            // minimise Σ w (θ - df)²:  L f = -Σ_out w θ
            let mut rhs = vec![0.0; n];
            for th in 0..tri.num_halfedges() {
                rhs[tri.origin(th)] -= w[tri.edge(th)] * theta_t[th];
            }
            let f = solve_with_fixed(solver, n, &trips, &rhs, &[(0, 0.0)])?;
            let eta: Vec<f64> = (0..tri.num_halfedges())
                .map(|th| theta_t[th] - (f[tri.dest(th)] - f[tri.origin(th)]))
                .collect();
            Ok(DiscreteOneForm::from_values(restrict(mm, &eta)))
        })
        .collect()
}

/// Weighted divergence of a real form at every vertex (cotangent weights).
pub fn divergence(mm: &MetricMesh, form: &RealForm) -> Vec<f64> {
    let tri = mm.tri();
    let w = mm.cotan_weights();
    let vals = to_tri_values(mm, form.values());
    let mut div = vec![0.0; tri.num_vertices()];
    for th in 0..tri.num_halfedges() {
        div[tri.origin(th)] += w[tri.edge(th)] * vals[th];
    }
    div
}

/// Constant vector field per triangle reproducing the form on its edges.
fn triangle_vectors(mm: &MetricMesh, form: &RealForm) -> Vec<Vector2<f64>> {
    let tri = mm.tri();
    let vals = to_tri_values(mm, form.values());
    (0..tri.num_faces())
        .map(|t| {
            let hs: Vec<usize> = tri.face_halfedges(t).collect();
            let p = mm.tri_layout(t);
            let e = Matrix2::new(p[1][0], p[1][1], p[2][0], p[2][1]);
            let rhs = Vector2::new(vals[hs[0]], -vals[hs[2]]);
            e.lu().solve(&rhs).unwrap_or_else(Vector2::zeros)
        })
        .collect()
}

/// Matrix `C` with `★η_k = Σ_l C[l][k] η_l`: the per-triangle rotation by a
/// quarter turn, projected in the L² sense onto the span of `forms`.
pub fn hodge_star_matrix(mm: &MetricMesh, forms: &[RealForm]) -> Result<DMatrix<f64>> {
    let n = forms.len();
    let fields: Vec<Vec<Vector2<f64>>> = forms.iter().map(|f| triangle_vectors(mm, f)).collect();
    let area: Vec<f64> = (0..mm.tri().num_faces()).map(|t| mm.tri_area(t)).collect();
    let mut g = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for (t, a) in area.iter().enumerate() {
        for l in 0..n {
            let ul = fields[l][t];
            for m in 0..n {
                let um = fields[m][t];
                g[(l, m)] += a * ul.dot(&um);
                k[(l, m)] += a * ul.dot(&Vector2::new(-um.y, um.x));
            }
        }
    }
    g.lu().solve(&k).ok_or(Error::SingularPeriodMatrix)
}

/// Applies the coefficient matrix `C` to real forms.
pub fn apply_star(forms: &[RealForm], c: &DMatrix<f64>, k: usize) -> RealForm {
    let len = forms[0].values.len();
    let mut out = vec![0.0; len];
    for (l, f) in forms.iter().enumerate() {
        let s = c[(l, k)];
        if s != 0.0 {
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += s * v;
            }
        }
    }
    DiscreteOneForm::from_values(out)
}

/// Holomorphic forms `ω₁..ω_g` with `∫_{a_i} ω_j = δ_ij`.
#[derive(Debug, Clone)]
pub struct HolomorphicFormBasis {
    forms: Vec<ComplexForm>,
    star: DMatrix<f64>,
}

impl HolomorphicFormBasis {
    pub fn genus(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[ComplexForm] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &ComplexForm {
        &self.forms[i]
    }

    /// Hodge star in the harmonic basis (see [`hodge_star_matrix`]).
    pub fn star_matrix(&self) -> &DMatrix<f64> {
        &self.star
    }

    pub fn to_json(&self, mm: &MetricMesh) -> String {
        let forms: Vec<_> = self
            .forms
            .iter()
            .map(|f| serde_json::json!({ "values": f.corner_values(mm) }))
            .collect();
        serde_json::json!({ "forms": forms }).to_string()
    }
}

/// Builds `η + i★η` from the harmonic duals of the `b` loops and normalizes
/// against the `a` loops.
pub fn holomorphic_basis(
    harmonics: &[RealForm],
    mm: &MetricMesh,
    basis: &HomologyBasis,
) -> Result<HolomorphicFormBasis> {
    let g = basis.genus();
    if g == 0 {
        return Ok(HolomorphicFormBasis {
            forms: Vec::new(),
            star: DMatrix::zeros(0, 0),
        });
    }
    let star = hodge_star_matrix(mm, harmonics)?;
    // The dual of b_i integrates to -1 along a_i, hence the sign.
    let cand: Vec<ComplexForm> = (0..g)
        .map(|i| {
            let eta = &harmonics[g + i];
            let s = apply_star(harmonics, &star, g + i);
            DiscreteOneForm::from_values(
                eta.values
                    .iter()
                    .zip(&s.values)
                    .map(|(&x, &y)| -Complex64::new(x, y))
                    .collect(),
            )
        })
        .collect();
    let a_per = DMatrix::from_fn(g, g, |j, i| cand[i].integrate(basis.a(j).halfedges()));
    let svd = a_per.clone().svd(false, false);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-10 * smax.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularPeriodMatrix);
    }
    let inv = a_per.try_inverse().ok_or(Error::SingularPeriodMatrix)?;
    let len = mm.mesh().num_halfedges();
    let forms = (0..g)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); len];
            for (i, c) in cand.iter().enumerate() {
                let s = inv[(i, j)];
                for (o, x) in v.iter_mut().zip(&c.values) {
                    *o += s * x;
                }
            }
            DiscreteOneForm::from_values(v)
        })
        .collect();
    Ok(HolomorphicFormBasis { forms, star })
}

/// Zero divisor of a holomorphic form from the winding of its values
/// around each vertex star.
///
/// At a vertex the outgoing values turn by `2π(m + 1)` where `m` is the
/// order of vanishing. Every triangle whose image under the form is
/// reversed contributes one extra unit at its lowest vertex, which keeps
/// the total degree at exactly `2g - 2`.
pub fn form_zero_divisor(form: &ComplexForm, mm: &MetricMesh) -> Result<Divisor> {
    let tri = mm.tri();
    let vals = to_tri_values(mm, form.values());
    let mean = vals.iter().map(|z| z.norm()).sum::<f64>() / vals.len() as f64;
    for (th, z) in vals.iter().enumerate() {
        if z.norm() < 1e-12 * mean {
            let h = (0..mm.mesh().num_halfedges())
                .find(|&h| mm.to_tri(h) == th)
                .unwrap_or(th);
            return Err(Error::ZeroOnEdge(h));
        }
    }
    let mut turn = vec![0.0; tri.num_vertices()];
    let mut extra = vec![0i64; tri.num_vertices()];
    for t in 0..tri.num_faces() {
        let hs: Vec<usize> = tri.face_halfedges(t).collect();
        let mut orient = 0.0;
        for k in 0..3 {
            let (out, inc) = (hs[k], hs[(k + 2) % 3]);
            // corner at origin(out): from out to the reversed incoming side
            let step = (-vals[inc] / vals[out]).arg();
            turn[tri.origin(out)] += step;
            orient += step;
        }
        if orient < 0.0 {
            let low = hs.iter().map(|&h| tri.origin(h)).min().unwrap();
            extra[low] += 1;
        }
    }
    Ok(Divisor::from_vertices((0..tri.num_vertices()).map(|v| {
        let winding = (turn[v] / (2.0 * PI)).round() as i64;
        (v, winding - 1 + extra[v])
    })))
}

/// Harmonic and holomorphic bases in one call.
pub fn holomorphic_basis_for(
    mm: &MetricMesh,
    basis: &HomologyBasis,
    solver: &dyn LinearSolver,
) -> Result<HolomorphicFormBasis> {
    let h = harmonic_basis(mm, basis, solver)?;
    holomorphic_basis(&h, mm, basis)
}

/// Residual of the real linear system `★★ = -1` on the harmonic span.
pub fn star_involution_residual(c: &DMatrix<f64>) -> f64 {
    let n = c.nrows();
    (c * c + DMatrix::identity(n, n)).amax()
}

/// Complex periods `∫_loop ω` for a list of halfedge chains.
pub fn periods(form: &ComplexForm, loops: &[&[usize]]) -> DVector<Complex64> {
    DVector::from_iterator(loops.len(), loops.iter().map(|l| form.integrate(l)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::homology::homology_basis;
    use crate::solver::ConjugateGradient;

    fn setup(m: &crate::mesh::Mesh) -> (MetricMesh, HomologyBasis) {
        (MetricMesh::quad(m).unwrap(), homology_basis(m).unwrap())
    }

    #[test]
    fn flat_torus_harmonics_are_constant() {
        let n = 6;
        let m = generators::torus_grid(n, n);
        let (mm, b) = setup(&m);
        let hs = harmonic_basis(&mm, &b, &ConjugateGradient::default()).unwrap();
        assert_eq!(hs.len(), 2);
        for (k, eta) in hs.iter().enumerate() {
            assert!(eta.closedness_residual(&mm, f64::abs) < 1e-9);
            assert!(divergence(&mm, eta).iter().all(|d| d.abs() < 1e-8));
            // the form dual to loop k is 1/n across one grid direction
            let mut vals: Vec<f64> = eta.values().iter().map(|x| x.abs()).collect();
            vals.sort_by(f64::total_cmp);
            assert!(vals[0] < 1e-9);
            assert!(
                (vals[vals.len() - 1] - 1.0 / n as f64).abs() < 1e-9,
                "form {k}"
            );
        }
    }

    #[test]
    fn flat_torus_star_is_involutive() {
        let m = generators::torus_grid(5, 5);
        let (mm, b) = setup(&m);
        let hs = harmonic_basis(&mm, &b, &ConjugateGradient::default()).unwrap();
        let c = hodge_star_matrix(&mm, &hs).unwrap();
        assert!(star_involution_residual(&c) < 1e-8);
    }

    #[test]
    fn square_torus_periods() {
        let m = generators::torus_grid(7, 7);
        let (mm, b) = setup(&m);
        let hb = holomorphic_basis_for(&mm, &b, &ConjugateGradient::default()).unwrap();
        let w = hb.form(0);
        assert!((w.integrate(b.a(0).halfedges()) - 1.0).norm() < 1e-8);
        assert!((w.integrate(b.b(0).halfedges()) - Complex64::i()).norm() < 1e-8);
        assert!(form_zero_divisor(w, &mm).unwrap().is_empty());
    }

    #[test]
    fn rectangular_torus_modulus() {
        // embedded metric of a flat 1 × 2 torus: a 4 × 8 grid on a flat
        // parallelogram is not embeddable, so use the quad metric on 4 × 8
        let m = generators::torus_grid(4, 8);
        let (mm, b) = setup(&m);
        let hb = holomorphic_basis_for(&mm, &b, &ConjugateGradient::default()).unwrap();
        let tau = hb.form(0).integrate(b.b(0).halfedges());
        // τ is 2i or i/2 up to the modular action that swaps the loops
        let ok = [Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.5)]
            .iter()
            .any(|t| (tau - t).norm() < 1e-8);
        assert!(ok, "tau = {tau}");
    }

    #[test]
    fn genus_two_forms() {
        let m = generators::origami_genus2(4);
        let (mm, b) = setup(&m);
        let hs = harmonic_basis(&mm, &b, &ConjugateGradient::default()).unwrap();
        assert_eq!(hs.len(), 4);
        let loops = b.loops();
        let gram = DMatrix::from_fn(4, 4, |i, j| hs[j].integrate(loops[i].halfedges()));
        assert!(gram.determinant().abs() > 1e-6);
        let hb = holomorphic_basis(&hs, &mm, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let p = hb.form(j).integrate(b.a(i).halfedges());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p - want).norm() < 1e-6);
            }
            assert!(hb.form(i).closedness_residual(&mm, |z| z.norm()) < 1e-9);
            let d = form_zero_divisor(hb.form(i), &mm).unwrap();
            assert_eq!(d.degree(), 2);
        }
    }

    #[test]
    fn forms_json_keyed_by_corner() {
        let m = generators::torus_grid(3, 3);
        let (mm, b) = setup(&m);
        let hb = holomorphic_basis_for(&mm, &b, &ConjugateGradient::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&hb.to_json(&mm)).unwrap();
        let vals = v["forms"][0]["values"].as_array().unwrap();
        assert_eq!(vals.len(), m.num_halfedges());
        assert!(vals[0].get("face").is_some() && vals[0].get("corner").is_some());
    }
}

/// A zero of a holomorphic form located inside the star of a vertex.
#[derive(Debug, Clone, Serialize)]
pub struct RefinedZero {
    /// Vertex the zero was detected at and developed around.
    pub anchor: usize,
    pub order: i64,
    /// Position relative to the anchor in a local flat chart.
    pub offset: Complex64,
    /// `∫ ω_j` from the anchor to the zero, for every form of the basis.
    pub increments: Vec<Complex64>,
}

/// Tuning of [`refine_zeros`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRefinement {
    /// Rings of the developed chart around an isolated zero.
    pub rings: usize,
    /// Polynomial degree above the cluster order.
    pub extra_degree: usize,
    /// Degree of the `z̄` terms that absorb the non-holomorphic part of the
    /// discrete primitive.
    pub conjugate_degree: usize,
    /// Detected zeros within this graph distance form one cluster.
    pub cluster_reach: usize,
}

impl Default for ZeroRefinement {
    fn default() -> Self {
        Self {
            rings: 2,
            extra_degree: 3,
            conjugate_degree: 3,
            cluster_reach: 2,
        }
    }
}

/// Finds the roots of a complex polynomial `Σ c_k z^k` (Durand-Kerner).
pub fn polynomial_roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| {
        monic
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, k| acc * z + k)
    };
    let seed = Complex64::from_polar(1.0, 0.4);
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius * 0.5).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    roots
}

/// Flat development of the triangles within `rings` of `anchor`, stopping at
/// cone vertices. Returns `(vertex, chart position, tri halfedge path value
/// accumulator parent)` in BFS order.
fn develop(mm: &MetricMesh, anchor: usize, rings: usize) -> Vec<(usize, Complex64, Option<usize>)> {
    let tri = mm.tri();
    let flat = |v: usize| (mm.curvature(v)).abs() < 1e-9;
    let mut pos: Vec<Option<Complex64>> = vec![None; tri.num_vertices()];
    let mut via: Vec<Option<usize>> = vec![None; tri.num_vertices()];
    let mut depth = vec![usize::MAX; tri.num_vertices()];
    let mut order = Vec::new();
    pos[anchor] = Some(Complex64::new(0.0, 0.0));
    depth[anchor] = 0;
    order.push(anchor);
    // first neighbour fixes the frame
    let h0 = tri.outgoing(anchor)[0];
    let l0 = mm.tri_len2(tri.edge(h0)).sqrt();
    let mut queue = VecDeque::new();
    let first = tri.dest(h0);
    pos[first] = Some(Complex64::new(l0, 0.0));
    via[first] = Some(h0);
    depth[first] = 1;
    order.push(first);
    queue.push_back(anchor);
    queue.push_back(first);
    while let Some(v) = queue.pop_front() {
        if depth[v] >= rings || (v != anchor && !flat(v)) {
            continue;
        }
        // place neighbours by unfolding triangles around v
        let mut changed = true;
        while changed {
            changed = false;
            for h in tri.outgoing(v) {
                let t = tri.face(h);
                let hs: Vec<usize> = tri.face_halfedges(t).collect();
                let vs: Vec<usize> = hs.iter().map(|&x| tri.origin(x)).collect();
                let placed: Vec<usize> = (0..3).filter(|&k| pos[vs[k]].is_some()).collect();
                if placed.len() != 2 {
                    continue;
                }
                let k = (0..3).find(|&k| pos[vs[k]].is_none()).unwrap();
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                let p = mm.tri_layout(t);
                let c = |i: usize| Complex64::new(p[i][0], p[i][1]);
                let (pa, pb) = (pos[vs[a]].unwrap(), pos[vs[b]].unwrap());
                let z = pa + (pb - pa) * (c(k) - c(a)) / (c(b) - c(a));
                let w = vs[k];
                pos[w] = Some(z);
                // reach w from an already placed corner
                via[w] = Some(hs[b]);
                depth[w] = depth[v] + 1;
                order.push(w);
                queue.push_back(w);
                changed = true;
            }
        }
    }
    order
        .into_iter()
        .map(|w| (w, pos[w].unwrap(), via[w]))
        .collect()
}

/// Least-squares fit of `Σ_{k ≤ deg} c_k z^k + Σ_{1 ≤ k ≤ conj} d_k z̄^k`
/// through `(z, value)` pairs; returns the holomorphic coefficients `c`.
fn fit_polynomial(
    pts: &[(Complex64, Complex64)],
    deg: usize,
    conj: usize,
    scale: f64,
) -> Option<Vec<Complex64>> {
    let n = pts.len();
    let cols = deg + 1 + conj;
    if n < cols {
        return None;
    }
    let m = DMatrix::from_fn(n, cols, |i, k| {
        let z = pts[i].0 / scale;
        if k <= deg {
            z.powu(k as u32)
        } else {
            z.conj().powu((k - deg) as u32)
        }
    });
    let rhs = DVector::from_iterator(n, pts.iter().map(|p| p.1));
    let svd = m.svd(true, true);
    let c = svd.solve(&rhs, 1e-12).ok()?;
    Some(
        c.iter()
            .take(deg + 1)
            .enumerate()
            .map(|(k, x)| x / scale.powi(k as i32))
            .collect(),
    )
}

fn poly_eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, k| acc * z + k)
}

/// Locates the zeros of `forms[index]` below vertex resolution.
///
/// Detected zeros within two rings of each other are merged into clusters.
/// Around each cluster anchor the flat neighbourhood is developed into the
/// plane, the local primitive of every form is fitted by a polynomial, and
/// the zeros are the roots of the fitted derivative nearest the anchor.
/// Clusters at cone vertices stay at the vertex.
pub fn refine_zeros(
    forms: &HolomorphicFormBasis,
    index: usize,
    zeros: &Divisor,
    mm: &MetricMesh,
    params: &ZeroRefinement,
) -> Vec<RefinedZero> {
    let tri = mm.tri();
    let g = forms.genus();
    let entries: Vec<(usize, i64)> = zeros
        .entries()
        .iter()
        .filter_map(|e| e.site.as_vertex().map(|v| (v, e.order)))
        .collect();
    // cluster by graph distance ≤ 2
    let near = |a: usize, b: usize| -> bool {
        let mut frontier = vec![a];
        let mut seen = std::collections::HashSet::from([a]);
        for _ in 0..params.cluster_reach {
            let mut next = Vec::new();
            for v in frontier {
                for h in tri.outgoing(v) {
                    let w = tri.dest(h);
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen.contains(&b)
    };
    let mut cluster: Vec<usize> = (0..entries.len()).collect();
    for i in 0..entries.len() {
        for j in 0..i {
            if near(entries[i].0, entries[j].0) {
                let (ci, cj) = (cluster[i], cluster[j]);
                for c in cluster.iter_mut() {
                    if *c == ci {
                        *c = cj;
                    }
                }
            }
        }
    }
    let tri_forms: Vec<Vec<Complex64>> = forms
        .forms()
        .iter()
        .map(|f| to_tri_values(mm, f.values()))
        .collect();
    let mut out = Vec::new();
    let mut ids: Vec<usize> = cluster.clone();
    ids.sort();
    ids.dedup();
    for id in ids {
        let members: Vec<(usize, i64)> = (0..entries.len())
            .filter(|&i| cluster[i] == id)
            .map(|i| entries[i])
            .collect();
        let order: i64 = members.iter().map(|m| m.1).sum();
        let at_vertex = |v: usize, o: i64| RefinedZero {
            anchor: v,
            order: o,
            offset: Complex64::new(0.0, 0.0),
            increments: vec![Complex64::new(0.0, 0.0); g],
        };
        if order == 0 {
            continue;
        }
        if let Some(&(c, _)) = members.iter().find(|m| mm.curvature(m.0).abs() > 1e-9) {
            out.push(at_vertex(c, order));
            continue;
        }
        if order < 0 {
            out.extend(members.iter().map(|&(v, o)| at_vertex(v, o)));
            continue;
        }
        let anchor = members
            .iter()
            .max_by_key(|m| (m.1, std::cmp::Reverse(m.0)))
            .unwrap()
            .0;
        // smeared clusters get a chart wide enough to contain all members
        let spread = members
            .iter()
            .map(|m| match m.0 {
                v if v == anchor => 0,
                v if tri.outgoing(anchor).iter().any(|&h| tri.dest(h) == v) => 1,
                _ => params.cluster_reach,
            })
            .max()
            .unwrap_or(0);
        let chart = develop(mm, anchor, params.rings + spread);
        let mut local: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); chart.len()]; g];
        let slot: std::collections::HashMap<usize, usize> =
            chart.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
        for (i, &(_, _, via)) in chart.iter().enumerate() {
            if let Some(h) = via {
                let from = slot[&tri.origin(h)];
                for j in 0..g {
                    local[j][i] = local[j][from] + tri_forms[j][h];
                }
            }
        }
        let scale = chart
            .iter()
            .map(|c| c.1.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let deg = (order as usize + params.extra_degree).min(chart.len().saturating_sub(1));
        let fits: Option<Vec<Vec<Complex64>>> = (0..g)
            .map(|j| {
                let pts: Vec<(Complex64, Complex64)> = chart
                    .iter()
                    .zip(&local[j])
                    .map(|(c, &f)| (c.1, f))
                    .collect();
                fit_polynomial(&pts, deg, params.conjugate_degree, scale)
            })
            .collect();
        let Some(fits) = fits else {
            out.extend(members.iter().map(|&(v, o)| at_vertex(v, o)));
            continue;
        };
        let deriv: Vec<Complex64> = fits[index]
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        let mut roots = polynomial_roots(&deriv);
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let radius = if spread > 0 {
            0.75 * scale
        } else {
            2.0 * chart
                .iter()
                .skip(1)
                .map(|c| c.1.norm())
                .fold(f64::MAX, f64::min)
        };
        for k in 0..order as usize {
            match roots.get(k).filter(|r| r.norm() <= radius) {
                Some(&r) => out.push(RefinedZero {
                    anchor,
                    order: 1,
                    offset: r,
                    increments: fits
                        .iter()
                        .map(|c| poly_eval(c, r) - poly_eval(c, Complex64::new(0.0, 0.0)))
                        .collect(),
                }),
                None => out.push(at_vertex(anchor, 1)),
            }
        }
    }
    out
}
