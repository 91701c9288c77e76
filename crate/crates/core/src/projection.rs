//! Orthogonal projection onto the subspace `L = {v : Av = 0, c·v = 0}`.
//!
//! The constraint rows and the objective are stacked once into
//! `Ā = [A; cᵀ]`, the small Gram matrix `Ā Āᵀ` is factored once, and every
//! subsequent projection costs `O(m² + nnz(Ā))`:
//!
//! ```text
//! w = Ā g   →   u = (Ā Āᵀ)⁻¹ w   →   v = Āᵀ u   →   P g = g − v
//! ```
//!
//! Nothing here ever touches an `n × n` object.

use crate::linalg::{DenseCholesky, LinalgError, SparseMatrix};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionError {
    /// The stacked rows are linearly dependent. The factorization refuses to
    /// regularize: a pseudo-inverse would silently change the subspace.
    RankDeficient {
        pivot: usize,
    },
    ZeroObjective,
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for ProjectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectionError::RankDeficient { pivot } => write!(
                f,
                "stacked constraint rows are rank deficient (pivot {pivot}); \
                 remove redundant rows (the objective row counts as the last one)"
            ),
            ProjectionError::ZeroObjective => {
                write!(
                    f,
                    "objective vector is zero; every feasible point would be optimal"
                )
            }
            ProjectionError::DimensionMismatch { expected, got } => {
                write!(f, "expected length {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for ProjectionError {}

impl From<LinalgError> for ProjectionError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient { pivot } => ProjectionError::RankDeficient { pivot },
            LinalgError::DimensionMismatch { expected, got } => {
                ProjectionError::DimensionMismatch { expected, got }
            }
            LinalgError::TripletOutOfBounds { .. } => ProjectionError::DimensionMismatch {
                expected: 0,
                got: 0,
            },
        }
    }
}

/// `Ā = [A; cᵀ]`: the constraint rows with the objective appended last.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedConstraints {
    rows: SparseMatrix,
}

/// Stack the objective under the constraint rows.
pub fn build_stacked(a: &SparseMatrix, c: &[f64]) -> Result<StackedConstraints, ProjectionError> {
    if c.len() != a.cols() {
        return Err(ProjectionError::DimensionMismatch {
            expected: a.cols(),
            got: c.len(),
        });
    }
    if c.iter().all(|&v| v == 0.0) {
        return Err(ProjectionError::ZeroObjective);
    }
    let rows = a.vstack_row(c)?;
    Ok(StackedConstraints { rows })
}

impl StackedConstraints {
    pub fn rows(&self) -> &SparseMatrix {
        &self.rows
    }

    /// Factor `Ā Āᵀ` once; fails on rank deficiency.
    pub fn factorize(&self) -> Result<Projector, ProjectionError> {
        Projector::for_matrix(self.rows.clone())
    }
}

/// Preprocessed orthogonal projector onto the nullspace of a sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: SparseMatrix,
    chol: Option<DenseCholesky>, // None when there are no rows
}

impl Projector {
    /// Build a projector onto `{v : Mv = 0}`. With zero rows this is the
    /// identity, which covers instances without equality constraints.
    pub fn for_matrix(matrix: SparseMatrix) -> Result<Self, ProjectionError> {
        if matrix.rows() == 0 {
            return Ok(Projector { matrix, chol: None });
        }
        let gram = matrix.gram();
        let chol = DenseCholesky::factor(matrix.rows(), &gram)?;
        Ok(Projector {
            matrix,
            chol: Some(chol),
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `g − Āᵀ(Ā Āᵀ)⁻¹ Ā g`.
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        self.project_counted(g).0
    }

    /// Projection plus the number of multiply-add/divide operations spent,
    /// which is bounded by `2·nnz(Ā) + (m+1)² + 2(m+1)`; the cost contract
    /// is asserted in tests by counting, not by wall clock.
    pub fn project_counted(&self, g: &[f64]) -> (Vec<f64>, u64) {
        assert_eq!(
            g.len(),
            self.matrix.cols(),
            "project: vector length mismatch"
        );
        let mut ops = 0u64;
        let chol = match &self.chol {
            Some(c) => c,
            None => return (g.to_vec(), 0),
        };
        let w = self.matrix.mul_vec_counted(g, &mut ops);
        let u = chol.solve_counted(&w, &mut ops);
        let mut out = g.to_vec();
        #[allow(clippy::needless_range_loop)]
        for i in 0..self.matrix.rows() {
            let ui = u[i];
            for (j, v) in self.matrix.row_entries(i) {
                out[j] -= v * ui;
                ops += 1;
            }
        }
        (out, ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm_inf};
    use proptest::prelude::*;

    fn worked_stack() -> StackedConstraints {
        let a = SparseMatrix::from_dense(1, 3, &[1.0, 1.0, 1.0]).unwrap();
        build_stacked(&a, &[1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn stacking_puts_objective_last() {
        let sc = worked_stack();
        assert_eq!(sc.rows().rows(), 2);
        let last: Vec<(usize, f64)> = sc.rows().row_entries(1).collect();
        assert_eq!(last, vec![(0, 1.0)]);

        let empty = SparseMatrix::zeros(0, 2);
        let sc = build_stacked(&empty, &[1.0, 1.0]).unwrap();
        assert_eq!(sc.rows().rows(), 1);
    }

    #[test]
    fn zero_objective_rejected() {
        let a = SparseMatrix::zeros(0, 2);
        assert!(matches!(
            build_stacked(&a, &[0.0, 0.0]),
            Err(ProjectionError::ZeroObjective)
        ));
    }

    #[test]
    fn factorize_matches_hand_inverse() {
        // ĀĀᵀ = [[3,1],[1,1]] with inverse (1/2)[[1,−1],[−1,3]]
        let p = worked_stack().factorize().unwrap();
        let g = p.matrix().gram();
        assert_eq!(g, vec![3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn factorize_identity_gram() {
        let a = SparseMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.gram(), vec![1.0, 0.0, 0.0, 1.0]);
        let sc = StackedConstraints { rows: a };
        sc.factorize().unwrap();
    }

    #[test]
    fn dependent_objective_row_is_rank_deficient() {
        // rows of A span R², so stacking any c is dependent
        let a = SparseMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let sc = build_stacked(&a, &[1.0, 1.0]).unwrap();
        assert!(matches!(
            sc.factorize(),
            Err(ProjectionError::RankDeficient { pivot: 2 })
        ));
    }

    #[test]
    fn duplicated_row_is_rank_deficient() {
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let sc = build_stacked(&a, &[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            sc.factorize(),
            Err(ProjectionError::RankDeficient { .. })
        ));
    }

    #[test]
    fn projection_worked_example() {
        let p = worked_stack().factorize().unwrap();
        let v = p.project(&[0.0, 1.0, 0.0]);
        assert!((v[0] - 0.0).abs() < 1e-14);
        assert!((v[1] - 0.5).abs() < 1e-14);
        assert!((v[2] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn row_space_annihilated_and_nullspace_fixed() {
        let p = worked_stack().factorize().unwrap();
        // g in range(Āᵀ): combination of the two rows
        let g = vec![1.0 + 2.0, 1.0, 1.0];
        let v = p.project(&g);
        assert!(norm_inf(&v) < 1e-12);
        // g already in null(Ā)
        let g = vec![0.0, 1.0, -1.0];
        let v = p.project(&g);
        for (a, b) in v.iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_row_projector_is_identity() {
        let p = Projector::for_matrix(SparseMatrix::zeros(0, 3)).unwrap();
        let g = vec![1.0, -2.0, 3.0];
        assert_eq!(p.project(&g), g);
    }

    #[test]
    fn per_call_cost_is_counted_not_timed() {
        // 40 columns, 3 constraint rows + objective; the bound must not
        // depend on n beyond nnz
        let n = 40;
        let mut triplets = Vec::new();
        for j in 0..n {
            triplets.push((0, j, 1.0 + (j % 3) as f64));
        }
        triplets.push((1, 0, 2.0));
        triplets.push((1, 5, -1.0));
        triplets.push((2, 7, 1.0));
        triplets.push((2, 30, 4.0));
        let a = SparseMatrix::from_triplets(3, n, &triplets).unwrap();
        let c: Vec<f64> = (0..n)
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let p = build_stacked(&a, &c).unwrap().factorize().unwrap();
        let g: Vec<f64> = (0..n).map(|j| (j as f64).sin()).collect();
        let (_, ops) = p.project_counted(&g);
        let k = 4u64; // m + 1
        let nnz = p.matrix().nnz() as u64;
        assert!(
            ops <= 2 * nnz + k * k + 2 * k,
            "projection spent {ops} ops, bound is {}",
            2 * nnz + k * k + 2 * k
        );
    }

    proptest! {
        #[test]
        fn projected_vectors_satisfy_constraints(seed in 0u64..2000) {
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 8;
            let mut triplets = Vec::new();
            for j in 0..n {
                triplets.push((0, j, rng.random_range(0.5..1.5)));
                if rng.random_bool(0.5) {
                    triplets.push((1, j, rng.random_range(-1.0..1.0)));
                }
            }
            triplets.push((1, 0, 1.0));
            let a = SparseMatrix::from_triplets(2, n, &triplets).unwrap();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = match build_stacked(&a, &c).unwrap().factorize() {
                Ok(p) => p,
                Err(ProjectionError::RankDeficient { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let g: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v = p.project(&g);
            let residual = p.matrix().mul_vec(&v);
            let gnorm = dot(&g, &g).sqrt();
            prop_assert!(norm_inf(&residual) <= 1e-9 * gnorm.max(1.0));
            // idempotence
            let vv = p.project(&v);
            for (x, y) in vv.iter().zip(&v) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
            // complement orthogonal to the nullspace: ⟨g − v, v⟩ ≈ 0
            let diff: Vec<f64> = g.iter().zip(&v).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&diff, &v).abs() <= 1e-8 * (1.0 + gnorm * gnorm));
        }
    }
}
