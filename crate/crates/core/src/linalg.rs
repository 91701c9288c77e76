//! Small dense/sparse linear algebra kernels shared by the solver stack.
//!
//! Everything here is sized for the regime this crate targets: a sparse
//! constraint matrix with few rows (`m ≪ n`) and dense symmetric work of
//! order at most a few dozen. No BLAS, no pivoting heroics; the kernels are
//! deterministic so that identical inputs give bit-identical results.

// substitution and scatter kernels read clearest in index form
#![allow(clippy::needless_range_loop)]

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// A triplet addressed a coordinate outside the declared shape.
    TripletOutOfBounds {
        index: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    /// Cholesky pivot fell below the rank tolerance.
    RankDeficient {
        pivot: usize,
    },
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::TripletOutOfBounds {
                index,
                row,
                col,
                rows,
                cols,
            } => write!(
                f,
                "triplet {index} addresses ({row}, {col}) outside a {rows}x{cols} matrix"
            ),
            LinalgError::RankDeficient { pivot } => write!(
                f,
                "matrix is numerically rank deficient at pivot {pivot}; remove redundant rows"
            ),
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for LinalgError {}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `a + s * b`, elementwise.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Compressed sparse row matrix. Rows are stored with strictly increasing
/// column indices; duplicate triplets are summed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        for (index, &(r, c, _)) in triplets.iter().enumerate() {
            if r >= rows || c >= cols {
                return Err(LinalgError::TripletOutOfBounds {
                    index,
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            per_row[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for entries in per_row.iter_mut() {
            entries.sort_by_key(|&(c, _)| c);
            let mut last_col = usize::MAX;
            for &(c, v) in entries.iter() {
                if c == last_col {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last_col = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Build from dense row-major data, dropping exact zeros.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let triplets: Vec<(usize, usize, f64)> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j, data[i * cols + j])))
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        SparseMatrix::from_triplets(rows, cols, &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| self.row_entries(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut ops = 0u64;
        self.mul_vec_counted(x, &mut ops)
    }

    /// `A x`, counting one multiply-add per stored entry.
    pub fn mul_vec_counted(&self, x: &[f64], ops: &mut u64) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec: length mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for (j, v) in self.row_entries(i) {
                acc += v * x[j];
                *ops += 1;
            }
            out[i] = acc;
        }
        out
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut ops = 0u64;
        self.tr_mul_vec_counted(y, &mut ops)
    }

    /// `Aᵀ y` by row scatter, counting one multiply-add per stored entry.
    pub fn tr_mul_vec_counted(&self, y: &[f64], ops: &mut u64) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mul_vec: length mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (j, v) in self.row_entries(i) {
                out[j] += v * yi;
                *ops += 1;
            }
        }
        out
    }

    /// Append one dense row (zeros dropped).
    pub fn vstack_row(&self, row: &[f64]) -> Result<SparseMatrix, LinalgError> {
        if row.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        let mut m = self.clone();
        m.rows += 1;
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                m.col_idx.push(j);
                m.values.push(v);
            }
        }
        m.row_ptr.push(m.col_idx.len());
        Ok(m)
    }

    /// Dense Gram matrix `A Aᵀ`, row-major `rows × rows`.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.rows;
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let mut acc = 0.0;
                let mut it_a = self.row_entries(i).peekable();
                let mut it_b = self.row_entries(j).peekable();
                while let (Some(&(ca, va)), Some(&(cb, vb))) = (it_a.peek(), it_b.peek()) {
                    match ca.cmp(&cb) {
                        std::cmp::Ordering::Less => {
                            it_a.next();
                        }
                        std::cmp::Ordering::Greater => {
                            it_b.next();
                        }
                        std::cmp::Ordering::Equal => {
                            acc += va * vb;
                            it_a.next();
                            it_b.next();
                        }
                    }
                }
                g[i * k + j] = acc;
                g[j * k + i] = acc;
            }
        }
        g
    }
}

/// Relative pivot tolerance for the Cholesky factorization: a pivot below
/// `1e-12` times the corresponding diagonal (the row-norm scale of the
/// underlying constraint row) is treated as rank deficiency.
pub const CHOLESKY_PIVOT_REL_TOL: f64 = 1e-12;

/// Dense Cholesky factor `G = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>, // row-major lower triangle (full square storage)
}

impl DenseCholesky {
    pub fn factor(n: usize, g: &[f64]) -> Result<Self, LinalgError> {
        assert_eq!(g.len(), n * n, "cholesky: shape mismatch");
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = g[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    let scale = g[i * n + i].abs().max(f64::MIN_POSITIVE);
                    if sum <= CHOLESKY_PIVOT_REL_TOL * scale {
                        return Err(LinalgError::RankDeficient { pivot: i });
                    }
                    l[i * n + j] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut ops = 0u64;
        self.solve_counted(b, &mut ops)
    }

    /// Solve `L Lᵀ x = b`; counts one op per multiply-add or divide.
    pub fn solve_counted(&self, b: &[f64], ops: &mut u64) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "cholesky solve: length mismatch");
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= self.l[i * n + k] * y[k];
                *ops += 1;
            }
            y[i] = acc / self.l[i * n + i];
            *ops += 1;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= self.l[k * n + i] * y[k];
                *ops += 1;
            }
            y[i] = acc / self.l[i * n + i];
            *ops += 1;
        }
        y
    }
}

/// Solve a small dense square system by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n, "solve_dense: shape mismatch");
    assert_eq!(b.len(), n, "solve_dense: rhs mismatch");
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    m[r * n + j] -= f * m[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in col + 1..n {
            acc -= m[col * n + j] * x[j];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

/// Off-diagonal convergence threshold factor for the Jacobi eigensolver,
/// relative to the Frobenius norm of the input.
pub const JACOBI_THRESHOLD_REL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations with a
/// fixed sweep order, so repeated calls are reproducible bit for bit.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns of a row-major `n × n` matrix, each scaled to unit norm with its
/// first non-negligible component positive.
pub fn sym_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n, "sym_eigen: shape mismatch");
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro > 0.0 {
        let thresh = JACOBI_THRESHOLD_REL * fro;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| 2.0 * m[p * n + q] * m[p * n + q])
                .sum::<f64>()
                .sqrt();
            if off <= thresh {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    m[p * n + p] = app - t * apq;
                    m[q * n + q] = aqq + t * apq;
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = m[i * n + p];
                            let aiq = m[i * n + q];
                            m[i * n + p] = c * aip - s * aiq;
                            m[p * n + i] = m[i * n + p];
                            m[i * n + q] = s * aip + c * aiq;
                            m[q * n + i] = m[i * n + q];
                        }
                    }
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = c * vip - s * viq;
                        v[i * n + q] = s * vip + c * viq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[i * n + i]
            .partial_cmp(&m[j * n + j])
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        let mut flip = 1.0;
        for i in 0..n {
            let x = v[i * n + src];
            if x.abs() > 1e-12 {
                if x < 0.0 {
                    flip = -1.0;
                }
                break;
            }
        }
        for i in 0..n {
            vectors[i * n + dst] = flip * v[i * n + src];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_build_and_mul() {
        let a =
            SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, -2.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 1.0]), vec![1.0, -1.0, 2.0]);
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 0, 2.5)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.mul_vec(&[1.0, 0.0]), vec![3.5]);
    }

    #[test]
    fn triplets_out_of_bounds() {
        let err = SparseMatrix::from_triplets(1, 2, &[(0, 7, 1.0)]).unwrap_err();
        match err {
            LinalgError::TripletOutOfBounds { index, col, .. } => {
                assert_eq!(index, 0);
                assert_eq!(col, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gram_matches_dense() {
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(a.gram(), vec![3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn cholesky_solves_hand_inverse() {
        // G = [[3,1],[1,1]] has inverse (1/2)[[1,-1],[-1,3]].
        let chol = DenseCholesky::factor(2, &[3.0, 1.0, 1.0, 1.0]).unwrap();
        let u = chol.solve(&[1.0, 0.0]);
        assert!((u[0] - 0.5).abs() < 1e-14);
        assert!((u[1] + 0.5).abs() < 1e-14);
        let u = chol.solve(&[0.0, 1.0]);
        assert!((u[0] + 0.5).abs() < 1e-14);
        assert!((u[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_singular() {
        // duplicated row of ones
        let g = [2.0, 2.0, 2.0, 2.0];
        match DenseCholesky::factor(2, &g) {
            Err(LinalgError::RankDeficient { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_diagonal_is_exact() {
        let (vals, vecs) = sym_eigen(3, &[3.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(vals, vec![-2.0, 1.0, 3.0]);
        // eigenvector for -2 (first column) is the second basis vector
        assert_eq!(vecs[0], 0.0);
        assert_eq!(vecs[3], 1.0);
    }

    #[test]
    fn jacobi_residual_small() {
        // fixed symmetric matrix, check A v = λ v and orthonormality
        let n = 4;
        let a = [
            4.0, 1.0, -2.0, 0.5, 1.0, 3.0, 0.0, -1.0, -2.0, 0.0, 1.0, 0.3, 0.5, -1.0, 0.3, -2.0,
        ];
        let (vals, vecs) = sym_eigen(n, &a);
        for k in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * vecs[j * n + k]).sum();
                assert!((av - vals[k] * vecs[i * n + k]).abs() < 1e-10);
            }
        }
        for k in 0..n {
            for l in 0..n {
                let d: f64 = (0..n).map(|i| vecs[i * n + k] * vecs[i * n + l]).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
