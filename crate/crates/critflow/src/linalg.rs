//! Dense symmetric matrices, a cyclic Jacobi eigensolver, and the few
//! vector/solve helpers the rest of the toolkit needs.
//!
//! Everything here works on small dense data (dimensions in the tens,
//! occasionally a few hundred), so plain `Vec<f64>` storage and textbook
//! algorithms are the right tool.

use serde::Serialize;

/// Dense symmetric matrix with full row-major storage.
///
/// `set` writes both `(i, j)` and `(j, i)`, so instances built through the
/// public API are symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds from an entry function, symmetrizing as `(a_ij + a_ji) / 2`.
    pub fn from_fn(dim: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = 0.5 * (entry(i, j) + entry(j, i));
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds from full row data, rejecting asymmetry beyond `tol`.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self, String> {
        let dim = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(format!("row {i} has length {} in a {dim}x{dim} matrix", r.len()));
            }
        }
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                worst = worst.max((rows[i][j] - rows[j][i]).abs());
            }
        }
        if worst > tol {
            return Err(format!("asymmetry {worst:.3e} exceeds tolerance {tol:.3e}"));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Adds `c * v v^T` in place.
    pub fn add_outer(&mut self, v: &[f64], c: f64) {
        assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i * self.dim + j] += c * v[i] * v[j];
            }
        }
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                dot(row, x)
            })
            .collect()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute off-diagonal deviation from symmetry; zero for
    /// matrices built through the symmetric API.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn leading_principal(&self, k: usize) -> SymMatrix {
        assert!(k <= self.dim);
        SymMatrix::from_fn(k, |i, j| self.get(i, j))
    }
}

/// Eigenvalues (ascending) with matching orthonormal eigenvector columns.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub tol: f64,
}

impl SpectralDecomposition {
    /// Residual `max_k ||M v_k - mu_k v_k||`, for diagnostics and tests.
    pub fn residual(&self, m: &SymMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (mu, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let mv = m.mat_vec(v);
            let r: f64 = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - mu * b) * (a - mu * b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps annihilate every off-diagonal entry in turn until the off-diagonal
/// Frobenius norm drops below `1e-12 * ||M||`. Unconditionally stable on
/// symmetric input; quadratically convergent once nearly diagonal.
pub fn eigen_sym(m: &SymMatrix) -> SpectralDecomposition {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let threshold = 1e-12 * m.frob_norm().max(f64::MIN_POSITIVE);

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = a[p * n + r];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[r * n + r];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[r * n + r] = aqq + t * apq;
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != r {
                        let akp = a[k * n + p];
                        let akq = a[k * n + r];
                        let new_p = akp - s * (akq + tau * akp);
                        let new_q = akq + s * (akp - tau * akq);
                        a[k * n + p] = new_p;
                        a[p * n + k] = new_p;
                        a[k * n + r] = new_q;
                        a[r * n + k] = new_q;
                    }
                }
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkq = q[k * n + r];
                    q[k * n + p] = qkp - s * (qkq + tau * qkp);
                    q[k * n + r] = qkq + s * (qkp - tau * qkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| q[row * n + col]).collect())
        .collect();
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        tol: threshold,
    }
}

/// Solves `A x = b` by LU with partial pivoting. Returns `None` when a pivot
/// falls below `1e-12` times the matrix scale.
pub fn solve_dense(a: &SymMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.dim;
    assert_eq!(b.len(), n);
    let mut lu = a.data.clone();
    let mut x: Vec<f64> = b.to_vec();
    let scale = a.frob_norm().max(f64::MIN_POSITIVE);
    let pivot_floor = 1e-12 * scale;

    for col in 0..n {
        let mut best = col;
        let mut best_abs = lu[col * n + col].abs();
        for row in (col + 1)..n {
            let v = lu[row * n + col].abs();
            if v > best_abs {
                best = row;
                best_abs = v;
            }
        }
        if best_abs < pivot_floor {
            return None;
        }
        if best != col {
            for k in 0..n {
                lu.swap(col * n + k, best * n + k);
            }
            x.swap(col, best);
        }
        let inv = 1.0 / lu[col * n + col];
        for row in (col + 1)..n {
            let factor = lu[row * n + col] * inv;
            lu[row * n + col] = factor;
            for k in (col + 1)..n {
                lu[row * n + k] -= factor * lu[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= lu[col * n + col];
        for row in 0..col {
            let f = lu[row * n + col];
            x[row] -= f * x[col];
        }
    }
    Some(x)
}

/// Rank of a set of column vectors, by Gaussian elimination with a relative
/// pivot tolerance. Used for subspace-dimension arithmetic on orthonormal
/// eigenvector bases.
pub fn column_rank(columns: &[Vec<f64>], tol: f64) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let nrows = columns[0].len();
    let mut cols: Vec<Vec<f64>> = columns.to_vec();
    let mut rank = 0;
    let mut used = vec![false; nrows];
    for _ in 0..cols.len() {
        // pick the column with the largest remaining entry
        let mut best = None;
        let mut best_abs = tol;
        for (ci, c) in cols.iter().enumerate() {
            for (ri, &v) in c.iter().enumerate() {
                if !used[ri] && v.abs() > best_abs {
                    best = Some((ci, ri));
                    best_abs = v.abs();
                }
            }
        }
        let Some((ci, ri)) = best else { break };
        rank += 1;
        used[ri] = true;
        let pivot_col = cols.swap_remove(ci);
        let inv = 1.0 / pivot_col[ri];
        for c in cols.iter_mut() {
            let factor = c[ri] * inv;
            if factor != 0.0 {
                for (r, v) in c.iter_mut().enumerate() {
                    *v -= factor * pivot_col[r];
                }
            }
        }
        if cols.is_empty() {
            break;
        }
    }
    rank
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn jacobi_diagonal_passthrough() {
        let m = SymMatrix::diagonal(&[3.0, -1.0, 2.0]);
        let d = eigen_sym(&m);
        assert_eq!(d.eigenvalues.len(), 3);
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_known_3x3() {
        // eigenvalues of [[2,0,0],[0,3,4],[0,4,9]] are 2, 1, 11
        let m = SymMatrix::from_fn(3, |i, j| match (i, j) {
            (0, 0) => 2.0,
            (1, 1) => 3.0,
            (2, 2) => 9.0,
            (1, 2) | (2, 1) => 4.0,
            _ => 0.0,
        });
        let d = eigen_sym(&m);
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues[2] - 11.0).abs() < 1e-12);
        assert!(d.residual(&m) < 1e-10);
    }

    #[test]
    fn solve_dense_roundtrip() {
        let a = SymMatrix::from_fn(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let x_true = vec![1.0, -2.0, 0.5];
        let b = a.mat_vec(&x_true);
        let x = solve_dense(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_dense_rejects_singular() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        assert!(solve_dense(&a, &[1.0, 0.0]).is_none());
    }

    #[test]
    fn column_rank_counts() {
        let c1 = vec![1.0, 0.0, 0.0];
        let c2 = vec![0.0, 1.0, 0.0];
        let c3 = vec![1.0, 1.0, 0.0];
        assert_eq!(column_rank(&[c1.clone()], 1e-10), 1);
        assert_eq!(column_rank(&[c1.clone(), c2.clone()], 1e-10), 2);
        assert_eq!(column_rank(&[c1, c2, c3], 1e-10), 2);
    }

    proptest! {
        #[test]
        fn jacobi_reconstructs(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed as usize % 7);
            let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let d = eigen_sym(&m);
            // eigen residual
            prop_assert!(d.residual(&m) <= 1e-9 * (1.0 + m.frob_norm()));
            // orthonormal vectors
            for a in 0..n {
                for b in a..n {
                    let g = dot(&d.eigenvectors[a], &d.eigenvectors[b]);
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((g - want).abs() < 1e-10);
                }
            }
            // ascending
            for w in d.eigenvalues.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }
}
