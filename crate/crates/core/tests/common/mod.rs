//! Shared randomized checks for the property and acceptance suites.

use abelquad::abel_jacobi::{lattice_reduce, AbelContext, AbelJacobiMap, MetricChoice};
use abelquad::divisor::divisor_of_quad_mesh;
use abelquad::hodge::{divergence, form_zero_divisor, harmonic_basis};
use abelquad::homology::standard_symplectic;
use abelquad::metric::gauss_bonnet_report;
use abelquad::solver::ConjugateGradient;
use abelquad::{generators, Divisor, Mesh};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng};

/// Permutation pairs on up to four squares whose generated group is
/// transitive, i.e. connected square-tiled surfaces.
pub fn origami_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..=4)
        .prop_flat_map(|k| {
            let perm = Just((0..k).collect::<Vec<usize>>()).prop_shuffle();
            (perm.clone(), perm)
        })
        .prop_filter("connected", |(r, u)| {
            let mut seen = vec![false; r.len()];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(s) = stack.pop() {
                for t in [r[s], u[s]] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            seen.iter().all(|&b| b)
        })
}

/// Random spanning tree of the disk grown in random order from `start`;
/// returns the halfedge path from `start` to `target`.
pub fn random_path(disk: &Mesh, start: usize, target: usize, rng: &mut TestRng) -> Vec<usize> {
    let mut pred: Vec<Option<usize>> = vec![None; disk.num_vertices()];
    let mut seen = vec![false; disk.num_vertices()];
    seen[start] = true;
    let mut frontier: Vec<usize> = disk.outgoing(start);
    while !frontier.is_empty() {
        let h = frontier.swap_remove(rng.random_range(0..frontier.len()));
        let w = disk.dest(h);
        if seen[w] {
            continue;
        }
        seen[w] = true;
        pred[w] = Some(h);
        frontier.extend(disk.outgoing(w));
    }
    let mut path = Vec::new();
    let mut v = target;
    while let Some(h) = pred[v] {
        path.push(h);
        v = disk.origin(h);
    }
    path.reverse();
    path
}

/// A connected origami, a subdivision level, an RNG seed and four vertex picks.
pub type SquareTiledCase = ((Vec<usize>, Vec<usize>), usize, [u8; 32], Vec<Index>);

pub fn square_tiled_case() -> impl Strategy<Value = SquareTiledCase> {
    (
        origami_strategy(),
        3usize..=4,
        any::<[u8; 32]>(),
        prop::collection::vec(any::<Index>(), 4),
    )
}

/// Symplectic basis, closed and harmonic forms, zero and quad divisor
/// degrees, path independence and lattice reconstruction.
pub fn check_square_tiled(case: SquareTiledCase) -> Result<(), TestCaseError> {
    let ((right, up), n, seed, picks) = case;
    let mesh = generators::origami(&right, &up, n);
    let g = mesh.genus() as usize;
    prop_assert!(g >= 1);
    // degree and curvature laws
    prop_assert!(gauss_bonnet_report(&mesh).unwrap().ok);
    let d = divisor_of_quad_mesh(&mesh).unwrap();
    prop_assert_eq!(d.degree(), 8 * g as i64 - 8);

    let ctx = AbelContext::build(&mesh, MetricChoice::Quad, &ConjugateGradient::default()).unwrap();
    prop_assert_eq!(ctx.basis.intersection_matrix(&mesh), standard_symplectic(g));

    let harmonics = harmonic_basis(&ctx.metric, &ctx.basis, &ConjugateGradient::default()).unwrap();
    for eta in &harmonics {
        prop_assert!(eta.closedness_residual(&ctx.metric, f64::abs) < 1e-9);
        prop_assert!(divergence(&ctx.metric, eta).iter().all(|x| x.abs() < 1e-8));
    }
    for w in ctx.forms.forms() {
        prop_assert!(w.closedness_residual(&ctx.metric, |z| z.norm()) < 1e-9);
    }
    let zeros = form_zero_divisor(ctx.forms.form(0), &ctx.metric).unwrap();
    prop_assert_eq!(zeros.degree(), 2 * g as i64 - 2);

    // path independence inside the sliced disk
    let mut rng = TestRng::from_seed(RngAlgorithm::ChaCha, &seed);
    let disk = ctx.sliced.disk();
    let start = picks[0].index(disk.num_vertices());
    let target = picks[1].index(disk.num_vertices());
    let p1 = random_path(disk, start, target, &mut rng);
    let p2 = random_path(disk, start, target, &mut rng);
    for w in ctx.forms.forms() {
        prop_assert!((w.integrate(&p1) - w.integrate(&p2)).norm() < 1e-9);
    }

    // lattice reconstruction of a random divisor image
    let nv = mesh.num_vertices();
    let base = picks[2].index(nv);
    let map = AbelJacobiMap::new(&ctx.sliced, &ctx.forms, base).unwrap();
    let dv = Divisor::from_vertices([
        (picks[3].index(nv), 3),
        (base, -1),
        (picks[0].index(nv), -2),
    ]);
    let mu: DVector<Complex64> = map.divisor(&ctx.sliced, &dv).unwrap();
    let lc = lattice_reduce(&mu, &ctx.periods).unwrap();
    prop_assert!(lc.reconstruction_error < 1e-6);
    Ok(())
}
