//! Sparse symmetric storage, Jacobi-preconditioned CG and dense symmetric
//! eigenvalues for spectral condition numbers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse row matrix. Column indices are sorted within each row.
///
/// Entries produced by assembly are kept even when their value cancels to
/// zero, so the pattern is the structural one.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicates in insertion order.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        if let Some(&(row, col, _)) = entries.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(Error::IndexOutOfRange { row, col, n });
        }
        // stable: duplicates are summed in the order they were pushed
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch in matvec");
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Stored `(row, col)` positions in row-major order.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, _)| (i, j))).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |M_ij - M_ji|` over all stored entries, or infinity if the
    /// pattern itself is not symmetric.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let range = self.row_ptr[j]..self.row_ptr[j + 1];
                match self.col_idx[range.clone()].binary_search(&i) {
                    Ok(k) => worst = worst.max((v - self.values[range.start + k]).abs()),
                    Err(_) => return f64::INFINITY,
                }
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// The principal submatrix on `keep` (in the given order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = self
                .row(i)
                .filter(|&(j, _)| new_index[j] != usize::MAX)
                .map(|(j, v)| (new_index[j], v))
                .collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[k + 1] = col_idx.len();
        }
        Self { n: keep.len(), row_ptr, col_idx, values }
    }

    /// Entrywise `self + c * other` on the union of both patterns.
    pub fn add_scaled(&self, c: f64, other: &CsrMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let entries = (0..self.n).flat_map(|i| {
            self.row(i)
                .map(move |(j, v)| (i, j, v))
                .chain(other.row(i).map(move |(j, v)| (i, j, c * v)))
        });
        Self::from_triplets(self.n, entries).expect("indices in range")
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)));
        Self::from_triplets(self.n, entries).expect("indices in range")
    }
}

/// Symmetric diagonal scaling `D^{-1/2} M D^{-1/2}`.
pub fn jacobi_scale(m: &CsrMatrix) -> Result<CsrMatrix> {
    let diag = m.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::NonPositiveDiagonal { row, value });
    }
    let s: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut out = m.clone();
    for i in 0..m.n {
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            let j = m.col_idx[k];
            out.values[k] = if i == j { 1.0 } else { out.values[k] * s[i] * s[j] };
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - Mx|| / ||b||`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients with Jacobi preconditioning (plain CG when some
/// diagonal entry is not positive). Stops on the true relative residual.
pub fn cg_solve(m: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = m.n();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("rhs has length {} for dimension {n}", b.len())));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let diag = m.diagonal();
    let inv_diag: Vec<f64> = if diag.iter().all(|&d| d > 0.0) {
        diag.iter().map(|d| 1.0 / d).collect()
    } else {
        vec![1.0; n]
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;
    let mut restart = false;
    for it in 1..=max_iter {
        let mp = m.matvec(&p);
        let curvature = dot(&p, &mp);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        residual = norm(&r) / bnorm;
        if residual <= tol {
            // confirm against the true residual to rule out drift
            let mx = m.matvec(&x);
            let true_res = b.iter().zip(&mx).map(|(b, v)| (b - v).powi(2)).sum::<f64>().sqrt() / bnorm;
            if true_res <= tol {
                return Ok(CgSolution { x, iterations: it, residual: true_res });
            }
            // restart from the true residual
            r = b.iter().zip(&mx).map(|(b, v)| b - v).collect();
            residual = true_res;
            restart = true;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = if restart { 0.0 } else { rz_new / rz };
        restart = false;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual })
}

/// Eigenvalues of a dense symmetric matrix in ascending order, by
/// Householder reduction to tridiagonal form and implicit QL.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(f64::total_cmp);
    d
}

/// Row-major in-place Householder tridiagonalization; returns the diagonal
/// and the sub-diagonal (`e[i]` couples rows `i - 1` and `i`).
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
            } else {
                for k in 0..=l {
                    a[at(i, k)] /= scale;
                    h += a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[at(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[at(j, k)] * a[at(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[at(i, i)];
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 200, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Cyclic Jacobi rotations; ascending eigenvalues. Iterates until the
/// off-diagonal Frobenius norm drops below `1e-12 ||M||_F`. Intended for
/// small matrices and as a cross-check of [`sym_eigenvalues`].
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut a = m.clone();
    let fro = m.norm();
    let off = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-12 * fro {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `lambda_min <= UNSTABLE_RATIO * lambda_max` marks the system unstable.
pub const UNSTABLE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Conditioning {
    Finite(f64),
    Unstable,
}

impl Conditioning {
    pub fn value(self) -> Option<f64> {
        match self {
            Conditioning::Finite(c) => Some(c),
            Conditioning::Unstable => None,
        }
    }

    pub fn is_unstable(self) -> bool {
        matches!(self, Conditioning::Unstable)
    }
}

/// Extreme eigenvalues of the diagonally scaled matrix. Both are NaN when
/// the scaling itself failed (non-positive diagonal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: Conditioning,
}

/// Spectral condition number of `D^{-1/2} M D^{-1/2}` via a dense
/// eigensolve.
pub fn condition_number(m: &CsrMatrix) -> SpectralReport {
    let scaled = match jacobi_scale(m) {
        Ok(s) => s,
        Err(_) => {
            return SpectralReport {
                lambda_min: f64::NAN,
                lambda_max: f64::NAN,
                cond: Conditioning::Unstable,
            }
        }
    };
    let ev = sym_eigenvalues(&scaled.to_dense());
    let (lambda_min, lambda_max) = match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (f64::NAN, f64::NAN),
    };
    let cond = if lambda_max > 0.0 && lambda_min > UNSTABLE_RATIO * lambda_max {
        Conditioning::Finite(lambda_max / lambda_min)
    } else {
        Conditioning::Unstable
    };
    SpectralReport { lambda_min, lambda_max, cond }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    fn dense_to_csr(d: &DMatrix<f64>) -> CsrMatrix {
        let n = d.nrows();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| d[(i, j)] != 0.0)
            .map(|(i, j)| (i, j, d[(i, j)]))
            .collect::<Vec<_>>();
        CsrMatrix::from_triplets(n, entries).unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, [(0, 1, 1.5), (1, 1, 2.0), (0, 1, 0.25)]).unwrap();
        assert_eq!(m.get(0, 1), 1.75);
        assert_eq!(m.get(1, 1), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn identity_and_empty() {
        let id = CsrMatrix::from_triplets(3, (0..3).map(|i| (i, i, 1.0))).unwrap();
        assert_eq!(id, CsrMatrix::identity(3));
        assert_eq!(id.matvec(&[1.0, -2.0, 3.5]), vec![1.0, -2.0, 3.5]);
        let z = CsrMatrix::from_triplets(4, std::iter::empty()).unwrap();
        assert_eq!(z.nnz(), 0);
        assert_eq!(z.matvec(&[1.0; 4]), vec![0.0; 4]);
    }

    #[test]
    fn out_of_range_triplet() {
        let err = CsrMatrix::from_triplets(2, [(0, 2, 1.0)]).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { row: 0, col: 2, n: 2 });
    }

    #[test]
    fn jacobi_scaling_examples() {
        let d = CsrMatrix::from_triplets(3, [(0, 0, 4.0), (1, 1, 0.5), (2, 2, 9.0)]).unwrap();
        assert_eq!(jacobi_scale(&d).unwrap().to_dense(), DMatrix::identity(3, 3));

        let m = CsrMatrix::from_triplets(2, [(0, 0, 4.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]).unwrap();
        let s = jacobi_scale(&m).unwrap().to_dense();
        assert_relative_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]), epsilon = 1e-15);

        let neg = CsrMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(matches!(jacobi_scale(&neg), Err(Error::NonPositiveDiagonal { row: 1, .. })));
        assert!(condition_number(&neg).cond.is_unstable());
    }

    #[test]
    fn cg_identity_one_iteration() {
        let b = vec![1.0, -3.0, 2.0, 0.5];
        let sol = cg_solve(&CsrMatrix::identity(4), &b, 1e-12, 10).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, b);
    }

    #[test]
    fn cg_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let spd = a.transpose() * &a + DMatrix::identity(n, n);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense = spd.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        let sol = cg_solve(&dense_to_csr(&spd), &b, 1e-13, 1000).unwrap();
        for i in 0..n {
            assert!((sol.x[i] - dense[i]).abs() <= 1e-8 * dense.amax());
        }
    }

    #[test]
    fn cg_detects_indefiniteness() {
        let m = CsrMatrix::from_triplets(2, [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        let err = cg_solve(&m, &[1.0, -1.0], 1e-10, 50).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. } | Error::NotConverged { .. }));
    }

    #[test]
    fn eigen_small_examples() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(sym_eigenvalues(&d), vec![1.0, 2.0, 3.0]);
        assert_eq!(jacobi_eigenvalues(&d), vec![1.0, 2.0, 3.0]);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for ev in [sym_eigenvalues(&swap), jacobi_eigenvalues(&swap)] {
            assert_relative_eq!(ev[0], -1.0, epsilon = 1e-15);
            assert_relative_eq!(ev[1], 1.0, epsilon = 1e-15);
        }
        assert_eq!(sym_eigenvalues(&DMatrix::from_element(1, 1, 5.0)), vec![5.0]);
    }

    #[test]
    fn trace_and_determinant_oracles() {
        let m = random_symmetric(30, 11);
        let det = m.clone().lu().determinant();
        for ev in [sym_eigenvalues(&m), jacobi_eigenvalues(&m)] {
            let sum: f64 = ev.iter().sum();
            let prod: f64 = ev.iter().product();
            assert_relative_eq!(sum, m.trace(), max_relative = 1e-9);
            assert_relative_eq!(prod, det, max_relative = 1e-9);
        }
    }

    #[test]
    fn householder_ql_agrees_with_jacobi() {
        for (n, seed) in [(5, 1), (17, 2), (64, 3)] {
            let m = random_symmetric(n, seed);
            let a = sym_eigenvalues(&m);
            let b = jacobi_eigenvalues(&m);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * m.norm());
            }
        }
    }

    #[test]
    fn condition_number_of_identity_and_scaling() {
        let r = condition_number(&CsrMatrix::identity(5));
        assert_eq!(r.cond, Conditioning::Finite(1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(12, 12, |_, _| rng.gen_range(-1.0..1.0));
        let spd = a.transpose() * &a + DMatrix::identity(12, 12) * 0.1;
        let c1 = condition_number(&dense_to_csr(&spd)).cond.value().unwrap();
        let c2 = condition_number(&dense_to_csr(&(spd * 1234.5))).cond.value().unwrap();
        assert_relative_eq!(c1, c2, max_relative = 1e-10);
    }

    #[test]
    fn singular_and_indefinite_are_unstable() {
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(condition_number(&dense_to_csr(&sing)).cond.is_unstable());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let r = condition_number(&dense_to_csr(&indef));
        assert!(r.cond.is_unstable());
        assert_relative_eq!(r.lambda_min, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn submatrix_and_transpose() {
        let m = dense_to_csr(&DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 3.0, 4.0, 5.0, 0.0, 6.0, 7.0]));
        let sub = m.principal_submatrix(&[2, 0]);
        assert_eq!(sub.to_dense(), DMatrix::from_row_slice(2, 2, &[7.0, 0.0, 0.0, 1.0]));
        assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
        assert_eq!(m.asymmetry(), 1.0);
        let lopsided = CsrMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(lopsided.asymmetry(), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(seed in 0u64..1000, n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = DMatrix::from_fn(n, n, |_, _| if rng.gen_bool(0.4) { rng.gen_range(-1.0..1.0) } else { 0.0 });
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = dense_to_csr(&d).matvec(&x);
            let yd = &d * nalgebra::DVector::from_column_slice(&x);
            for i in 0..n {
                prop_assert!((y[i] - yd[i]).abs() <= 1e-13);
            }
        }

        #[test]
        fn scaling_preserves_symmetry_and_inertia(seed in 0u64..1000, n in 2usize..12) {
            let mut m = random_symmetric(n, seed);
            for i in 0..n {
                m[(i, i)] = m[(i, i)].abs() + 0.1;
            }
            let scaled = jacobi_scale(&dense_to_csr(&m)).unwrap();
            prop_assert!(scaled.asymmetry() <= 1e-15);
            let neg = |ev: Vec<f64>| ev.iter().filter(|&&x| x < 0.0).count();
            prop_assert_eq!(neg(jacobi_eigenvalues(&m)), neg(jacobi_eigenvalues(&scaled.to_dense())));
        }

        #[test]
        fn condition_number_is_scale_invariant(seed in 0u64..1000, n in 2usize..12, c in 1e-3f64..1e3) {
            let a = random_symmetric(n, seed);
            let spd = &a * &a + DMatrix::identity(n, n) * 0.5;
            let k1 = condition_number(&dense_to_csr(&spd)).cond.value().unwrap();
            let k2 = condition_number(&dense_to_csr(&(spd * c))).cond.value().unwrap();
            prop_assert!((k1 - k2).abs() <= 1e-9 * k1);
        }
    }
}
