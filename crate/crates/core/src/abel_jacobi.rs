//! Period matrices, the Abel-Jacobi map and the integrality test for
//! `μ(D - 4(ω₀))`.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::hodge::{
    form_zero_divisor, holomorphic_basis_for, refine_zeros, HolomorphicFormBasis, ZeroRefinement,
};
use crate::homology::{homology_basis, slice, HomologyBasis, SlicedMesh};
use crate::mesh::Mesh;
use crate::metric::MetricMesh;
use crate::solver::{solvers, LinearSolver, DEFAULT_SOLVER};

/// Period matrices. Column `i` of `A` is the period vector of `a_i`, i.e.
/// `A[(j, i)] = ∫_{a_i} ω_j`; likewise for `B` and `b_i`. With a-normalized
/// forms `A` is the identity and `B` is symmetric.
#[derive(Debug, Clone)]
pub struct PeriodMatrices {
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl PeriodMatrices {
    pub fn genus(&self) -> usize {
        self.a.nrows()
    }

    /// Columns of `[A | B]` as real `2g`-vectors.
    pub fn real_lattice(&self) -> DMatrix<f64> {
        let g = self.genus();
        DMatrix::from_fn(2 * g, 2 * g, |r, c| {
            let z = if c < g {
                self.a[(r % g, c)]
            } else {
                self.b[(r % g, c - g)]
            };
            if r < g {
                z.re
            } else {
                z.im
            }
        })
    }

    /// Numerical rank of the real lattice.
    pub fn lattice_rank(&self) -> usize {
        let m = self.real_lattice();
        if m.is_empty() {
            return 0;
        }
        let sv = m.svd(false, false).singular_values;
        let tol = 1e-9 * sv.max();
        sv.iter().filter(|&&s| s > tol).count()
    }

    /// Distance of `A` from the identity (max entry).
    pub fn a_identity_error(&self) -> f64 {
        let g = self.genus();
        (0..g)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .map(|(i, j)| {
                let want = if i == j { 1.0 } else { 0.0 };
                (self.a[(i, j)] - want).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn period_matrices(forms: &HolomorphicFormBasis, basis: &HomologyBasis) -> PeriodMatrices {
    let g = basis.genus();
    let a = DMatrix::from_fn(g, g, |j, i| forms.form(j).integrate(basis.a(i).halfedges()));
    let b = DMatrix::from_fn(g, g, |j, i| forms.form(j).integrate(basis.b(i).halfedges()));
    PeriodMatrices { a, b }
}

/// Abel-Jacobi potentials on the sliced disk: `μ` of every disk vertex
/// relative to a base vertex, accumulated along BFS paths.
#[derive(Debug, Clone)]
pub struct AbelJacobiMap {
    base: usize,
    potential: Vec<DVector<Complex64>>,
}

impl AbelJacobiMap {
    pub fn new(sliced: &SlicedMesh, forms: &HolomorphicFormBasis, base: usize) -> Result<Self> {
        let disk = sliced.disk();
        let g = forms.genus();
        let start = sliced.representative(base).ok_or(Error::IndexOutOfRange {
            index: base,
            len: sliced.original().num_vertices(),
        })?;
        let mut potential: Vec<Option<DVector<Complex64>>> = vec![None; disk.num_vertices()];
        potential[start] = Some(DVector::zeros(g));
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            for h in disk.outgoing(v) {
                let w = disk.dest(h);
                if potential[w].is_none() {
                    let step = DVector::from_iterator(g, forms.forms().iter().map(|f| f.value(h)));
                    potential[w] = Some(potential[v].as_ref().unwrap() + step);
                    q.push_back(w);
                }
            }
        }
        let potential = potential
            .into_iter()
            .map(|p| p.ok_or_else(|| Error::Topology("sliced disk is not connected".into())))
            .collect::<Result<_>>()?;
        Ok(AbelJacobiMap { base, potential })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Value at a disk vertex.
    pub fn at_disk_vertex(&self, w: usize) -> &DVector<Complex64> {
        &self.potential[w]
    }

    /// `μ(p)` using the lowest-index copy of `p` in the disk.
    pub fn point(&self, sliced: &SlicedMesh, p: usize) -> Result<DVector<Complex64>> {
        let w = sliced.representative(p).ok_or(Error::IndexOutOfRange {
            index: p,
            len: sliced.original().num_vertices(),
        })?;
        Ok(self.potential[w].clone())
    }

    pub fn divisor(&self, sliced: &SlicedMesh, d: &Divisor) -> Result<DVector<Complex64>> {
        let g = self.potential.first().map_or(0, |p| p.len());
        let mut acc = DVector::zeros(g);
        for (v, n) in d.vertex_entries(sliced.original())? {
            acc += self.point(sliced, v)? * Complex64::new(n as f64, 0.0);
        }
        Ok(acc)
    }
}

/// `∫ ω` along BFS paths in the sliced disk from `base` to `p`.
pub fn abel_jacobi_point(
    p: usize,
    base: usize,
    sliced: &SlicedMesh,
    forms: &HolomorphicFormBasis,
) -> Result<DVector<Complex64>> {
    AbelJacobiMap::new(sliced, forms, base)?.point(sliced, p)
}

pub fn abel_jacobi_divisor(
    d: &Divisor,
    base: usize,
    sliced: &SlicedMesh,
    forms: &HolomorphicFormBasis,
) -> Result<DVector<Complex64>> {
    AbelJacobiMap::new(sliced, forms, base)?.divisor(sliced, d)
}

/// Real lattice coordinates of a point of `ℂ^g` with `v ≈ Aα + Bβ`.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeCoords {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Largest imaginary part discarded when solving for `α`.
    pub leakage: f64,
    /// `‖v - Aα - Bβ‖∞` with the real `α`, `β`.
    pub reconstruction_error: f64,
}

/// Leakage above this is reported as suspicious.
pub const LEAKAGE_THRESHOLD: f64 = 1e-5;

/// Solves `Im(B) β = Im(v)`, then `A α = v - Bβ` keeping the real part.
pub fn lattice_reduce(v: &DVector<Complex64>, p: &PeriodMatrices) -> Result<LatticeCoords> {
    let g = p.genus();
    if g == 0 {
        return Ok(LatticeCoords {
            alpha: Vec::new(),
            beta: Vec::new(),
            leakage: 0.0,
            reconstruction_error: 0.0,
        });
    }
    let im_b = p.b.map(|z| z.im);
    let sv = im_b.clone().svd(false, false).singular_values;
    if !(sv.min() > 1e-12 * sv.max().max(1e-300)) {
        return Err(Error::DegeneratePeriodLattice);
    }
    let beta = im_b
        .lu()
        .solve(&v.map(|z| z.im))
        .ok_or(Error::DegeneratePeriodLattice)?;
    let rest = v - &p.b * beta.map(|x| Complex64::new(x, 0.0));
    let alpha_c =
        p.a.clone()
            .lu()
            .solve(&rest)
            .ok_or(Error::SingularPeriodMatrix)?;
    let leakage = alpha_c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let alpha = alpha_c.map(|z| z.re);
    let recon = v
        - &p.a * alpha.map(|x| Complex64::new(x, 0.0))
        - &p.b * beta.map(|x| Complex64::new(x, 0.0));
    Ok(LatticeCoords {
        alpha: alpha.iter().copied().collect(),
        beta: beta.iter().copied().collect(),
        leakage,
        reconstruction_error: recon.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

/// Which metric the forms are computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricChoice {
    /// Unit squares for all-quad meshes, the embedding otherwise.
    Auto,
    Quad,
    Embedded,
}

#[derive(Clone)]
pub struct VerifyConfig {
    pub tolerance: f64,
    pub omega_index: usize,
    pub base: usize,
    pub metric: MetricChoice,
    pub solver: Arc<dyn LinearSolver>,
    /// Locate the zeros of `ω₀` inside faces; `None` keeps them at vertices.
    pub zero_refinement: Option<ZeroRefinement>,
}

/// Default integrality tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tolerance: DEFAULT_TOLERANCE,
            omega_index: 0,
            base: 0,
            metric: MetricChoice::Auto,
            solver: solvers()
                .get(DEFAULT_SOLVER)
                .expect("default solver registered"),
            zero_refinement: Some(ZeroRefinement::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

/// A zero of `ω₀` as used in `μ`: `order` times the point at `offset` from
/// `anchor` in a local flat chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSite {
    pub anchor: usize,
    pub order: i64,
    pub offset: ComplexValue,
}

fn matrix_json(m: &DMatrix<Complex64>) -> Vec<Vec<ComplexValue>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

/// Outcome of the Abel-Jacobi test, with all intermediate data.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub genus: usize,
    pub degree: i64,
    pub expected_degree: i64,
    pub degree_ok: bool,
    /// `DegreeMismatch` when the precheck fails.
    pub reason: Option<String>,
    pub metric: MetricChoice,
    pub omega_index: usize,
    pub base_vertex: usize,
    pub period_a: Vec<Vec<ComplexValue>>,
    pub period_b: Vec<Vec<ComplexValue>>,
    pub lattice_rank: usize,
    pub omega_zeros: Option<Divisor>,
    pub combined_divisor: Option<Divisor>,
    pub refined_zeros: Vec<ZeroSite>,
    pub mu: Vec<ComplexValue>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub residuals_alpha: Vec<f64>,
    pub residuals_beta: Vec<f64>,
    pub max_residual: f64,
    pub leakage: f64,
    pub leakage_ok: bool,
    pub reconstruction_error: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

impl VerificationReport {
    fn precheck_only(g: usize, degree: i64, expected: i64, config: &VerifyConfig) -> Self {
        let ok = degree == expected;
        VerificationReport {
            genus: g,
            degree,
            expected_degree: expected,
            degree_ok: ok,
            reason: (!ok).then(|| "DegreeMismatch".to_string()),
            metric: config.metric,
            omega_index: config.omega_index,
            base_vertex: config.base,
            period_a: Vec::new(),
            period_b: Vec::new(),
            lattice_rank: 0,
            omega_zeros: None,
            combined_divisor: None,
            refined_zeros: Vec::new(),
            mu: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            residuals_alpha: Vec::new(),
            residuals_beta: Vec::new(),
            max_residual: 0.0,
            leakage: 0.0,
            leakage_ok: true,
            reconstruction_error: 0.0,
            tolerance: config.tolerance,
            verdict: ok,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn frac_residual(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Everything the verification pipeline derives from the mesh alone.
pub struct AbelContext {
    pub metric: MetricMesh,
    pub basis: HomologyBasis,
    pub sliced: SlicedMesh,
    pub forms: HolomorphicFormBasis,
    pub periods: PeriodMatrices,
}

impl AbelContext {
    pub fn build(mesh: &Mesh, metric: MetricChoice, solver: &dyn LinearSolver) -> Result<Self> {
        let mm = match metric {
            MetricChoice::Auto => MetricMesh::auto(mesh)?,
            MetricChoice::Quad => MetricMesh::quad(mesh)?,
            MetricChoice::Embedded => MetricMesh::embedded(mesh)?,
        };
        let basis = homology_basis(mesh)?;
        let sliced = slice(mesh, &basis)?;
        let forms = holomorphic_basis_for(&mm, &basis, solver)?;
        let periods = period_matrices(&forms, &basis);
        Ok(AbelContext {
            metric: mm,
            basis,
            sliced,
            forms,
            periods,
        })
    }
}

/// Tests whether `μ(D - 4(ω₀))` lies on the period lattice.
pub fn verify_abel(mesh: &Mesh, d: &Divisor, config: &VerifyConfig) -> Result<VerificationReport> {
    if !(config.tolerance > 0.0 && config.tolerance < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {} outside (0, 0.5)",
            config.tolerance
        )));
    }
    mesh.require_closed()?;
    d.vertex_entries(mesh)?;
    let g = mesh.genus().max(0) as usize;
    let expected = 8 * g as i64 - 8;
    let degree = d.degree();
    if degree != expected || g == 0 {
        return Ok(VerificationReport::precheck_only(
            g, degree, expected, config,
        ));
    }
    if config.omega_index >= g {
        return Err(Error::IndexOutOfRange {
            index: config.omega_index,
            len: g,
        });
    }
    if config.base >= mesh.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: config.base,
            len: mesh.num_vertices(),
        });
    }
    let ctx = AbelContext::build(mesh, config.metric, &*config.solver)?;
    verify_with_context(&ctx, d, config)
}

/// Verification reusing a prepared context (for batches on one mesh).
pub fn verify_with_context(
    ctx: &AbelContext,
    d: &Divisor,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let g = ctx.basis.genus();
    let mut report = VerificationReport::precheck_only(g, d.degree(), 8 * g as i64 - 8, config);
    if !report.degree_ok || g == 0 {
        return Ok(report);
    }
    let omega = ctx
        .forms
        .forms()
        .get(config.omega_index)
        .ok_or(Error::IndexOutOfRange {
            index: config.omega_index,
            len: g,
        })?;
    let zeros = form_zero_divisor(omega, &ctx.metric)?;
    let combined = d - &(&zeros * 4);
    let map = AbelJacobiMap::new(&ctx.sliced, &ctx.forms, config.base)?;
    let (mu, sites) = match &config.zero_refinement {
        None => (map.divisor(&ctx.sliced, &combined)?, Vec::new()),
        Some(params) => {
            let refined = refine_zeros(&ctx.forms, config.omega_index, &zeros, &ctx.metric, params);
            let mut mu = map.divisor(&ctx.sliced, d)?;
            for r in &refined {
                let at =
                    map.point(&ctx.sliced, r.anchor)? + DVector::from_column_slice(&r.increments);
                mu -= at * Complex64::new(4.0 * r.order as f64, 0.0);
            }
            let sites = refined
                .iter()
                .map(|r| ZeroSite {
                    anchor: r.anchor,
                    order: r.order,
                    offset: r.offset.into(),
                })
                .collect();
            (mu, sites)
        }
    };
    let coords = lattice_reduce(&mu, &ctx.periods)?;
    let ra: Vec<f64> = coords.alpha.iter().map(|&x| frac_residual(x)).collect();
    let rb: Vec<f64> = coords.beta.iter().map(|&x| frac_residual(x)).collect();
    let max_residual = ra.iter().chain(&rb).copied().fold(0.0, f64::max);
    report.period_a = matrix_json(&ctx.periods.a);
    report.period_b = matrix_json(&ctx.periods.b);
    report.lattice_rank = ctx.periods.lattice_rank();
    report.omega_zeros = Some(zeros);
    report.combined_divisor = Some(combined);
    report.refined_zeros = sites;
    report.mu = mu.iter().map(|&z| z.into()).collect();
    report.alpha = coords.alpha;
    report.beta = coords.beta;
    report.residuals_alpha = ra;
    report.residuals_beta = rb;
    report.max_residual = max_residual;
    report.leakage = coords.leakage;
    report.leakage_ok = coords.leakage < LEAKAGE_THRESHOLD;
    report.reconstruction_error = coords.reconstruction_error;
    report.verdict = max_residual < config.tolerance && report.leakage_ok;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::divisor_of_quad_mesh;
    use crate::generators;
    use crate::solver::ConjugateGradient;

    fn torus_ctx(n: usize) -> (Mesh, AbelContext) {
        let m = generators::torus_grid(n, n);
        let ctx =
            AbelContext::build(&m, MetricChoice::Quad, &ConjugateGradient::default()).unwrap();
        (m, ctx)
    }

    #[test]
    fn torus_periods() {
        let (_, ctx) = torus_ctx(6);
        assert!(ctx.periods.a_identity_error() < 1e-8);
        assert!((ctx.periods.b[(0, 0)] - Complex64::i()).norm() < 1e-8);
        assert_eq!(ctx.periods.lattice_rank(), 2);
    }

    #[test]
    fn torus_point_offsets() {
        let n = 16;
        let (m, ctx) = torus_ctx(n);
        let id = |i: usize, j: usize| j * n + i;
        let map = AbelJacobiMap::new(&ctx.sliced, &ctx.forms, id(0, 0)).unwrap();
        assert!(map.point(&ctx.sliced, id(0, 0)).unwrap()[0].norm() < 1e-15);
        let d = Divisor::from_vertices([(id(5, 6), 1), (id(2, 1), -1)]);
        let mu = map.divisor(&ctx.sliced, &d).unwrap();
        // ω = dz / ∫_a dz and the a-loop runs along a grid axis, so
        // n·μ is 3 + 5i up to a quarter-turn
        let scaled = mu[0] * n as f64;
        let z = Complex64::new(3.0, 5.0);
        let units = [
            Complex64::new(1.0, 0.0),
            Complex64::i(),
            -Complex64::new(1.0, 0.0),
            -Complex64::i(),
        ];
        assert!(
            units.iter().any(|u| (scaled - z * u).norm() < 1e-8),
            "{scaled}"
        );
        let lc = lattice_reduce(&mu, &ctx.periods).unwrap();
        let neg = map.divisor(&ctx.sliced, &(&d * -1)).unwrap();
        assert!((mu[0] + neg[0]).norm() < 1e-15);
        assert!(lc.reconstruction_error < 1e-6);
        assert_eq!(m.genus(), 1);
    }

    #[test]
    fn lattice_reduce_examples() {
        let p = PeriodMatrices {
            a: DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
            b: DMatrix::from_element(1, 1, Complex64::i()),
        };
        let v = |z: Complex64| DVector::from_element(1, z);
        let lc = lattice_reduce(&v(Complex64::new(0.0, 0.0)), &p).unwrap();
        assert_eq!((lc.alpha[0], lc.beta[0]), (0.0, 0.0));
        let lc = lattice_reduce(&v(Complex64::new(1.0, 1.0)), &p).unwrap();
        assert!((lc.alpha[0] - 1.0).abs() < 1e-12 && (lc.beta[0] - 1.0).abs() < 1e-12);
        let lc = lattice_reduce(&v(Complex64::new(0.5, 0.0)), &p).unwrap();
        assert!((lc.alpha[0] - 0.5).abs() < 1e-12 && lc.beta[0].abs() < 1e-12);
        let flat = PeriodMatrices {
            a: p.a.clone(),
            b: DMatrix::from_element(1, 1, Complex64::new(2.0, 0.0)),
        };
        assert!(matches!(
            lattice_reduce(&v(Complex64::new(1.0, 0.0)), &flat),
            Err(Error::DegeneratePeriodLattice)
        ));
    }

    #[test]
    fn torus_verdicts() {
        let m = generators::torus_grid(12, 12);
        let cfg = VerifyConfig::default();
        let r = verify_abel(&m, &Divisor::new(), &cfg).unwrap();
        assert!(r.verdict);
        let d = Divisor::from_vertices([(0, 1), (12 * 3 + 5, -1)]);
        let r = verify_abel(&m, &d, &cfg).unwrap();
        assert!(!r.verdict);
        assert!(r.max_residual >= 1.0 / 12.0 - 1e-9);
        let r = verify_abel(&m, &Divisor::from_vertices([(0, 1)]), &cfg).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.reason.as_deref(), Some("DegreeMismatch"));
    }

    #[test]
    fn sphere_only_needs_degree() {
        let m = generators::cube();
        let d = divisor_of_quad_mesh(&m).unwrap();
        assert!(
            verify_abel(&m, &d, &VerifyConfig::default())
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn origami_needs_refined_zeros() {
        let m = generators::origami_genus2(24);
        let d = divisor_of_quad_mesh(&m).unwrap();
        let refined = verify_abel(&m, &d, &VerifyConfig::default()).unwrap();
        assert!(refined.verdict, "{}", refined.max_residual);
        assert_eq!(
            refined.refined_zeros.iter().map(|z| z.order).sum::<i64>(),
            2
        );
        let coarse = VerifyConfig {
            zero_refinement: None,
            ..VerifyConfig::default()
        };
        let r = verify_abel(&m, &d, &coarse).unwrap();
        assert!(r.max_residual > refined.max_residual);
    }
}
