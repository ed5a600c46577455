//! Sparse storage, LU solves and the left action of the matrix exponential.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::linalg::solvers::Lu as SparseLu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

/// Matrices up to this order are factorized densely; larger ones sparsely.
pub const DENSE_LIMIT: usize = 2000;

/// Poisson tail mass dropped per uniformization step.
const UNIFORMIZATION_TAIL: f64 = 1e-14;

/// Largest `Λ·dt` handled in one uniformization step; keeps `e^{-Λ dt}` far
/// from underflow.
const UNIFORMIZATION_STEP: f64 = 30.0;

/// Square matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self { n, row_ptr, cols, vals };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        *self = Self { n: self.n, row_ptr, cols, vals };
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `y = x A` for a row vector `x`, written into `y`.
    pub fn left_mul_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr != 0.0 {
                for (c, v) in self.row(r) {
                    y[c] += xr * v;
                }
            }
        }
    }

    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.left_mul_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }
}

/// LU factorization of a square matrix, dense or sparse depending on order.
pub enum Factorization {
    Dense(PartialPivLu<f64>),
    Sparse(SparseLu<usize, f64>),
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factorization::Dense(_) => f.write_str("Factorization::Dense"),
            Factorization::Sparse(_) => f.write_str("Factorization::Sparse"),
        }
    }
}

impl Factorization {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        Self::with_limit(a, DENSE_LIMIT)
    }

    pub fn with_limit(a: &SparseMatrix, dense_limit: usize) -> Result<Self> {
        let n = a.order();
        if n <= dense_limit {
            let mut m = Mat::<f64>::zeros(n, n);
            for (r, c, v) in a.triplets() {
                m[(r, c)] = v;
            }
            Ok(Factorization::Dense(m.partial_piv_lu()))
        } else {
            let trips: Vec<_> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
            let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
                .map_err(|e| Error::Solver(format!("sparse assembly: {e:?}")))?;
            let lu = m.sp_lu().map_err(|e| Error::Solver(format!("sparse LU: {e:?}")))?;
            Ok(Factorization::Sparse(lu))
        }
    }

    fn run(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        match (self, transpose) {
            (Factorization::Dense(lu), false) => lu.solve_in_place(rhs.as_mut()),
            (Factorization::Dense(lu), true) => lu.solve_transpose_in_place(rhs.as_mut()),
            (Factorization::Sparse(lu), false) => lu.solve_in_place(rhs.as_mut()),
            (Factorization::Sparse(lu), true) => lu.solve_transpose_in_place(rhs.as_mut()),
        }
        let x: Vec<f64> = (0..b.len()).map(|i| rhs[(i, 0)]).collect();
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::Solver("non-finite solution (singular matrix)".into()))
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, false)
    }

    /// Solve `x A = b` for a row vector `x`.
    pub fn solve_left(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, true)
    }
}

/// Left action `v ↦ v e^{A t}` by uniformization, for `A` with nonnegative
/// off-diagonal entries.
///
/// With `Λ ≥ max |a_ii|` and `P = I + A/Λ`, `e^{At} = Σ_k e^{-Λt} (Λt)^k/k! P^k`;
/// the series is summed until the dropped Poisson mass is below `1e-14`, in
/// steps of `Λ dt ≤ 30`.
#[derive(Clone, Debug)]
pub struct Uniformizer {
    rate: f64,
    jump: SparseMatrix,
}

impl Uniformizer {
    pub fn new(a: &SparseMatrix) -> Self {
        let rate = a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let n = a.order();
        let jump = if rate > 0.0 {
            let mut trips: Vec<_> = a.triplets().map(|(r, c, v)| (r, c, v / rate)).collect();
            trips.extend((0..n).map(|i| (i, i, 1.0)));
            SparseMatrix::from_triplets(n, trips)
        } else {
            SparseMatrix::from_triplets(n, vec![])
        };
        Self { rate, jump }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn apply(&self, v: &[f64], t: f64) -> Result<Vec<f64>> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vector".into()));
        }
        let mut out = v.to_vec();
        if t == 0.0 || self.rate == 0.0 {
            return Ok(out);
        }
        let n = v.len();
        let mut term = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let mut remaining = t;
        while remaining > 0.0 {
            let dt = remaining.min(UNIFORMIZATION_STEP / self.rate);
            remaining -= dt;
            if remaining < 1e-15 * t {
                remaining = 0.0;
            }
            let q = self.rate * dt;
            let mut weight = (-q).exp();
            let mut mass = weight;
            term.copy_from_slice(&out);
            out.iter_mut().for_each(|o| *o *= weight);
            let max_terms = (q + 12.0 * q.sqrt() + 60.0) as usize;
            let mut k = 0;
            while 1.0 - mass > UNIFORMIZATION_TAIL && k < max_terms {
                k += 1;
                self.jump.left_mul_into(&term, &mut scratch);
                std::mem::swap(&mut term, &mut scratch);
                weight *= q / k as f64;
                mass += weight;
                for (o, x) in out.iter_mut().zip(&term) {
                    *o += weight * x;
                }
            }
        }
        Ok(out)
    }
}

/// `alpha · e^{W x}` for a row vector `alpha`.
pub fn expm_left_action(alpha: &[f64], w: &SparseMatrix, x: f64) -> Result<Vec<f64>> {
    if alpha.len() != w.order() {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} against a {}x{} matrix",
            alpha.len(),
            w.order(),
            w.order()
        )));
    }
    Uniformizer::new(w).apply(alpha, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_left_action(alpha: &[f64], a: &[Vec<f64>], t: f64) -> Vec<f64> {
        // Plain Taylor series with scaling and squaring of the vector steps.
        let steps = 64;
        let h = t / steps as f64;
        let n = alpha.len();
        let mut v = alpha.to_vec();
        for _ in 0..steps {
            let mut acc = v.clone();
            let mut term = v.clone();
            for k in 1..60 {
                let mut next = vec![0.0; n];
                for (i, &ti) in term.iter().enumerate() {
                    for j in 0..n {
                        next[j] += ti * a[i][j];
                    }
                }
                term = next.iter().map(|x| x * h / k as f64).collect();
                acc.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
                if term.iter().map(|x| x.abs()).sum::<f64>() < 1e-20 * acc.iter().map(|x| x.abs()).sum::<f64>() {
                    break;
                }
            }
            v = acc;
        }
        v
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.0), (1, 1, -4.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.left_mul(&[1.0, 1.0]), vec![0.0, -1.0]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, -4.0]);
    }

    #[test]
    fn scalar_exponential() {
        let w = SparseMatrix::from_triplets(1, vec![(0, 0, -2.0)]);
        let v = expm_left_action(&[1.0], &w, 1.0).unwrap();
        assert!((v[0] - (-2.0f64).exp()).abs() < 1e-15);
        let v = expm_left_action(&[1.0], &w, 100.0).unwrap();
        assert!((v[0] / (-200.0f64).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_time_is_identity() {
        let w = SparseMatrix::from_triplets(2, vec![(0, 0, -1.0), (0, 1, 0.5), (1, 1, -3.0)]);
        let alpha = [0.25, 0.75];
        assert_eq!(expm_left_action(&alpha, &w, 0.0).unwrap(), alpha.to_vec());
        assert!(expm_left_action(&alpha, &w, -1.0).is_err());
        assert!(expm_left_action(&[f64::NAN, 0.0], &w, 1.0).is_err());
    }

    #[test]
    fn matches_taylor_oracle() {
        let trips = vec![
            (0, 0, -3.0),
            (0, 1, 1.0),
            (0, 2, 1.5),
            (1, 1, -2.0),
            (1, 0, 0.5),
            (1, 3, 1.0),
            (2, 2, -4.0),
            (2, 3, 2.0),
            (2, 0, 1.0),
            (3, 3, -1.0),
            (3, 2, 0.25),
        ];
        let w = SparseMatrix::from_triplets(4, trips);
        let alpha = [0.1, 0.2, 0.3, 0.4];
        for t in [0.1, 0.5, 3.0, 40.0] {
            let got = expm_left_action(&alpha, &w, t).unwrap();
            let want = taylor_left_action(&alpha, &w.to_dense(), t);
            for (g, e) in got.iter().zip(&want) {
                assert!((g - e).abs() <= 1e-11 * e.abs().max(1e-300), "t={t}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn dense_and_sparse_solves_agree() {
        let trips = vec![(0, 0, -3.0), (0, 1, 1.0), (1, 1, -2.0), (1, 2, 1.0), (2, 0, 0.5), (2, 2, -1.0)];
        let a = SparseMatrix::from_triplets(3, trips);
        let dense = Factorization::with_limit(&a, 10).unwrap();
        let sparse = Factorization::with_limit(&a, 0).unwrap();
        let b = [1.0, -2.0, 0.5];
        for f in [&dense, &sparse] {
            let x = f.solve(&b).unwrap();
            let r = a.mul_vec(&x);
            assert!(r.iter().zip(&b).all(|(r, b)| (r - b).abs() < 1e-13));
            let y = f.solve_left(&b).unwrap();
            let r = a.left_mul(&y);
            assert!(r.iter().zip(&b).all(|(r, b)| (r - b).abs() < 1e-13));
        }
    }
}
