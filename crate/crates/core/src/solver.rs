//! Sparse symmetric systems and the solvers that handle them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::registry::Registry;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square `n × n` matrix from `(row, col, value)` triplets; duplicates add.
    pub fn from_triplets(n: usize, trips: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = trips.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_start[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        CsrMatrix {
            n,
            row_start,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(j, _)| j == i).map_or(0.0, |(_, a)| a))
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                m[(i, j)] += a;
            }
        }
        m
    }

    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.mul_vec(x, &mut ax);
        ax.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }
}

/// Solver for symmetric positive definite systems.
pub trait LinearSolver: Send + Sync {
    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>>;
}

/// Jacobi-preconditioned conjugate gradients.
#[derive(Debug, Clone)]
pub struct ConjugateGradient {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ConjugateGradient {
    fn default() -> Self {
        ConjugateGradient {
            rel_tol: 1e-13,
            max_iter: 200_000,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearSolver for ConjugateGradient {
    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.dim();
        let diag = a.diagonal();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::Solver("non-positive diagonal entry".into()));
        }
        let bnorm = dot(b, b).sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for _ in 0..self.max_iter {
            a.mul_vec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::Solver("matrix is not positive definite".into()));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if dot(&r, &r).sqrt() <= self.rel_tol * bnorm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Solver(format!(
            "conjugate gradients did not converge in {} iterations",
            self.max_iter
        )))
    }
}

/// Dense Cholesky factorization; intended for small systems.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    pub max_dim: usize,
}

impl Default for DenseCholesky {
    fn default() -> Self {
        DenseCholesky { max_dim: 4000 }
    }
}

impl LinearSolver for DenseCholesky {
    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        if a.dim() > self.max_dim {
            return Err(Error::Solver(format!(
                "dense solver limited to {} unknowns, got {}",
                self.max_dim,
                a.dim()
            )));
        }
        let chol = a
            .to_dense()
            .cholesky()
            .ok_or_else(|| Error::Solver("matrix is not positive definite".into()))?;
        Ok(chol
            .solve(&DVector::from_column_slice(b))
            .as_slice()
            .to_vec())
    }
}

pub fn solvers() -> Registry<dyn LinearSolver> {
    let mut r: Registry<dyn LinearSolver> = Registry::new("solver");
    r.register("cg", Arc::new(ConjugateGradient::default()));
    r.register("dense", Arc::new(DenseCholesky::default()));
    r
}

pub const DEFAULT_SOLVER: &str = "cg";

/// Solves `A x = b` with the entries listed in `fixed` prescribed.
/// `trips` describe the full `n × n` matrix; the reduced system on the free
/// unknowns must be positive definite.
pub fn solve_with_fixed(
    solver: &dyn LinearSolver,
    n: usize,
    trips: &[(usize, usize, f64)],
    b: &[f64],
    fixed: &[(usize, f64)],
) -> Result<Vec<f64>> {
    let mut value = vec![None; n];
    for &(i, v) in fixed {
        value[i] = Some(v);
    }
    let mut index = vec![usize::MAX; n];
    let mut free = 0;
    for i in 0..n {
        if value[i].is_none() {
            index[i] = free;
            free += 1;
        }
    }
    let mut rhs: Vec<f64> = (0..n)
        .filter(|&i| value[i].is_none())
        .map(|i| b[i])
        .collect();
    let mut reduced = Vec::with_capacity(trips.len());
    for &(i, j, a) in trips {
        if value[i].is_some() {
            continue;
        }
        match value[j] {
            Some(v) => rhs[index[i]] -= a * v,
            None => reduced.push((index[i], index[j], a)),
        }
    }
    let sol = if free > 0 {
        solver.solve(&CsrMatrix::from_triplets(free, &reduced), &rhs)?
    } else {
        Vec::new()
    };
    Ok((0..n)
        .map(|i| value[i].unwrap_or_else(|| sol[index[i]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([
                (i, i, 1.0),
                (i + 1, i + 1, 1.0),
                (i, i + 1, -1.0),
                (i + 1, i, -1.0),
            ]);
        }
        t
    }

    #[test]
    fn duplicates_sum() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.diagonal(), vec![3.0, 0.0]);
        assert_eq!(m.row(1).collect::<Vec<_>>(), vec![(0, 4.0)]);
    }

    #[test]
    fn dirichlet_path_is_linear() {
        let n = 30;
        let t = path_laplacian(n);
        for name in ["cg", "dense"] {
            let s = solvers().get(name).unwrap();
            let x = solve_with_fixed(&*s, n, &t, &vec![0.0; n], &[(0, 0.0), (n - 1, 1.0)]).unwrap();
            for (i, xi) in x.iter().enumerate() {
                assert!((xi - i as f64 / (n - 1) as f64).abs() < 1e-10, "{name}");
            }
        }
    }

    #[test]
    fn solvers_agree() {
        let n = 40;
        let mut t = path_laplacian(n);
        for i in 0..n {
            t.push((i, i, 0.1 * (i % 3) as f64 + 0.05));
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let a = CsrMatrix::from_triplets(n, &t);
        let x1 = ConjugateGradient::default().solve(&a, &b).unwrap();
        let x2 = DenseCholesky::default().solve(&a, &b).unwrap();
        assert!(a.residual_norm(&x1, &b) < 1e-10);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-8);
        }
    }
}
