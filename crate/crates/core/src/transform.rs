//! The conic program and its radially transformed equivalent.
//!
//! A [`ConicInstance`] is `min c·x` over `{Ax = b} ∩ K` together with a
//! strictly feasible `e`. For any target value `z < c·e` the program is
//! equivalent to maximizing λ_min over the slice `Affine_z = {Ax = b, c·x = z}`:
//! radially projecting a slice point to the cone boundary recovers a feasible
//! point, and the objective gap maps through
//!
//! ```text
//! (c·π(x) − z*) / (c·e − z*) = (λ*_z − λ_min(x)) / (1 − λ_min(x)),
//! λ*_z = (z − z*) / (c·e − z*).
//! ```
//!
//! This module owns instance validation, the Algorithm-1 starting point,
//! the relative-error bookkeeping, and the primal-dual embedding that
//! manufactures an instance with known optimal value zero.

use crate::cones::{BlockKind, ConeBlock, ConeError, ConeSpec, DistinguishedDirection};
use crate::linalg::{dot, norm2, norm_inf, SparseMatrix};
use crate::projection::{build_stacked, Projector};
use std::fmt;

/// Conic program data: `min c·x  s.t.  Ax = b, x ∈ K`, with a strictly
/// feasible `e` (`Ae = b`, λ_min(e) = 1) serving as the distinguished
/// direction. `z_star` and `x_bar` are optional extras: the known optimal
/// value and a warm affine point with `c·x̄ < c·e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicInstance {
    pub cone: ConeSpec,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub e: DistinguishedDirection,
    pub z_star: Option<f64>,
    pub x_bar: Option<Vec<f64>>,
}

impl ConicInstance {
    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn c_dot_e(&self) -> f64 {
        dot(&self.c, self.e.as_slice())
    }
}

/// Accuracy bookkeeping for one target slice: reaching λ_min within
/// `lambda_gap_tol` of the slice optimum certifies relative error ≤ ε.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorLedger {
    pub c_dot_e: f64,
    pub z_target: f64,
    pub epsilon: f64,
    pub lambda_gap_tol: f64,
}

impl ErrorLedger {
    pub fn new(
        c_dot_e: f64,
        z_target: f64,
        epsilon: f64,
        z_star: f64,
    ) -> Result<Self, TransformError> {
        let below = z_target < c_dot_e; // false for NaN inputs too
        if !below {
            return Err(TransformError::ZTargetNotBelowObjectiveAtE { z_target, c_dot_e });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TransformError::EpsilonOutOfRange { epsilon });
        }
        let mut ledger = ErrorLedger {
            c_dot_e,
            z_target,
            epsilon,
            lambda_gap_tol: 0.0,
        };
        ledger.lambda_gap_tol = lambda_gap_tolerance(&ledger, z_star);
        Ok(ledger)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformError {
    MissingZStar,
    MissingWarmPoint,
    NotSelfDual { block: usize },
    EmbeddingPointNotInterior { side: &'static str, detail: String },
    DualDirectionNotFound,
    ZTargetNotBelowObjectiveAtE { z_target: f64, c_dot_e: f64 },
    EpsilonOutOfRange { epsilon: f64 },
    Cone(ConeError),
    Projection(crate::projection::ProjectionError),
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::MissingZStar => write!(f, "instance has no known optimal value z*"),
            TransformError::MissingWarmPoint => {
                write!(f, "instance has no warm point x̄ with c·x̄ < c·e")
            }
            TransformError::NotSelfDual { block } => write!(
                f,
                "cone block {block} is not self-dual; the embedding supports orthant and psd blocks"
            ),
            TransformError::EmbeddingPointNotInterior { side, detail } => {
                write!(
                    f,
                    "{side} embedding point is not strictly interior: {detail}"
                )
            }
            TransformError::DualDirectionNotFound => write!(
                f,
                "could not derive a strictly interior dual slack automatically; supply y0"
            ),
            TransformError::ZTargetNotBelowObjectiveAtE { z_target, c_dot_e } => {
                write!(f, "target value {z_target} is not below c·e = {c_dot_e}")
            }
            TransformError::EpsilonOutOfRange { epsilon } => {
                write!(f, "epsilon {epsilon} is outside (0, 1)")
            }
            TransformError::Cone(e) => write!(f, "{e}"),
            TransformError::Projection(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TransformError {}

impl From<ConeError> for TransformError {
    fn from(e: ConeError) -> Self {
        TransformError::Cone(e)
    }
}

impl From<crate::projection::ProjectionError> for TransformError {
    fn from(e: crate::projection::ProjectionError) -> Self {
        TransformError::Projection(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingCode {
    NotStrictlyFeasible,
    AffineMismatch,
    WarmPointAffineMismatch,
    WarmPointNotImproving,
    ObjectiveConstantOnAffine,
    ZStarDegenerate,
    RankDeficientConstraints,
}

impl FindingCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FindingCode::NotStrictlyFeasible => "NotStrictlyFeasible",
            FindingCode::AffineMismatch => "AffineMismatch",
            FindingCode::WarmPointAffineMismatch => "WarmPointAffineMismatch",
            FindingCode::WarmPointNotImproving => "WarmPointNotImproving",
            FindingCode::ObjectiveConstantOnAffine => "ObjectiveConstantOnAffine",
            FindingCode::ZStarDegenerate => "ZStarDegenerate",
            FindingCode::RankDeficientConstraints => "RankDeficientConstraints",
        }
    }
}

/// One violated standing assumption. Every finding is fatal for a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
}

const VALIDATION_REL_TOL: f64 = 1e-9;

/// Assemble an instance from raw parts, reporting every violated standing
/// assumption as a finding instead of a hard error. This is the entry point
/// for data arriving from problem files, where `e` has not yet been proven
/// interior.
pub fn build_instance(
    cone: ConeSpec,
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    e: Vec<f64>,
    z_star: Option<f64>,
    x_bar: Option<Vec<f64>>,
) -> Result<ConicInstance, Vec<Finding>> {
    match DistinguishedDirection::new(&cone, e) {
        Ok(e) => {
            let inst = ConicInstance {
                cone,
                a,
                b,
                c,
                e,
                z_star,
                x_bar,
            };
            let findings = validate_instance(&inst);
            if findings.is_empty() {
                Ok(inst)
            } else {
                Err(findings)
            }
        }
        Err(err) => Err(vec![Finding {
            code: FindingCode::NotStrictlyFeasible,
            message: err.to_string(),
        }]),
    }
}

/// Check the standing assumptions: `Ae = b`, λ_min(e) = 1, the warm point
/// (when present) lies on the affine space and improves on `e`, z* (when
/// present) sits below `c·e`, and the objective is not constant on the
/// feasible affine space (otherwise every feasible point is optimal).
pub fn validate_instance(inst: &ConicInstance) -> Vec<Finding> {
    let mut findings = Vec::new();
    let e = inst.e.as_slice();

    match inst.cone.lambda_min(e, &inst.e) {
        Ok(lam) if (lam - 1.0).abs() <= VALIDATION_REL_TOL => {}
        Ok(lam) => findings.push(Finding {
            code: FindingCode::NotStrictlyFeasible,
            message: format!("lambda_min(e) = {lam}, expected 1"),
        }),
        Err(err) => findings.push(Finding {
            code: FindingCode::NotStrictlyFeasible,
            message: err.to_string(),
        }),
    }

    let residual_ok = |m: &SparseMatrix, x: &[f64], rhs: &[f64]| -> Option<(usize, f64)> {
        let ax = m.mul_vec(x);
        for i in 0..m.rows() {
            let mut scale = 1.0 + rhs[i].abs();
            for (j, v) in m.row_entries(i) {
                scale += (v * x[j]).abs();
            }
            let r = ax[i] - rhs[i];
            if r.abs() > VALIDATION_REL_TOL * scale {
                return Some((i, r));
            }
        }
        None
    };

    if let Some((row, r)) = residual_ok(&inst.a, e, &inst.b) {
        findings.push(Finding {
            code: FindingCode::AffineMismatch,
            message: format!("(Ae − b) row {row} = {r}"),
        });
    }

    if let Some(x_bar) = &inst.x_bar {
        if x_bar.len() != inst.dim() {
            findings.push(Finding {
                code: FindingCode::WarmPointAffineMismatch,
                message: format!("x̄ has length {}, expected {}", x_bar.len(), inst.dim()),
            });
        } else {
            if let Some((row, r)) = residual_ok(&inst.a, x_bar, &inst.b) {
                findings.push(Finding {
                    code: FindingCode::WarmPointAffineMismatch,
                    message: format!("(Ax̄ − b) row {row} = {r}"),
                });
            }
            let (cx, ce) = (dot(&inst.c, x_bar), inst.c_dot_e());
            let improves = cx < ce;
            if !improves {
                findings.push(Finding {
                    code: FindingCode::WarmPointNotImproving,
                    message: format!("c·x̄ = {cx} is not below c·e = {ce}"),
                });
            }
        }
    }

    if let Some(z_star) = inst.z_star {
        let below = z_star < inst.c_dot_e();
        if !below {
            findings.push(Finding {
                code: FindingCode::ZStarDegenerate,
                message: format!("z* = {z_star} is not below c·e = {}", inst.c_dot_e()),
            });
        }
    }

    match Projector::for_matrix(inst.a.clone()) {
        Ok(p) => {
            let pc = p.project(&inst.c);
            if norm2(&pc) <= VALIDATION_REL_TOL * norm2(&inst.c) {
                findings.push(Finding {
                    code: FindingCode::ObjectiveConstantOnAffine,
                    message: "objective is constant on the feasible affine space; \
                              all feasible points are optimal"
                        .into(),
                });
            }
        }
        Err(err) => findings.push(Finding {
            code: FindingCode::RankDeficientConstraints,
            message: err.to_string(),
        }),
    }

    findings
}

/// Algorithm-1 starting point `x₀ = e + (c·e − z*)/(c·e − c·x̄) (x̄ − e)`,
/// which lands on the slice `c·x₀ = z*`.
pub fn initial_point_alg1(inst: &ConicInstance) -> Result<Vec<f64>, TransformError> {
    let z_star = inst.z_star.ok_or(TransformError::MissingZStar)?;
    let x_bar = inst
        .x_bar
        .as_ref()
        .ok_or(TransformError::MissingWarmPoint)?;
    let ce = inst.c_dot_e();
    let cx = dot(&inst.c, x_bar);
    let ratio = (ce - z_star) / (ce - cx);
    let x0: Vec<f64> = inst
        .e
        .as_slice()
        .iter()
        .zip(x_bar)
        .map(|(ei, xi)| ei + ratio * (xi - ei))
        .collect();
    let achieved = dot(&inst.c, &x0);
    debug_assert!(
        (achieved - z_star).abs() <= 1e-9 * (1.0 + z_star.abs() + ce.abs()),
        "initial point misses the target slice: c·x0 = {achieved}, z* = {z_star}"
    );
    Ok(x0)
}

/// Default warm point `x̄ = e − P_null(A) c`: stays on the affine space and
/// strictly improves on `e` whenever the objective is not constant there.
pub fn default_warm_point(inst: &ConicInstance) -> Result<Vec<f64>, TransformError> {
    let p = Projector::for_matrix(inst.a.clone())?;
    let pc = p.project(&inst.c);
    Ok(inst
        .e
        .as_slice()
        .iter()
        .zip(&pc)
        .map(|(ei, gi)| ei - gi)
        .collect())
}

/// Relative improvement over `e`: `(c·π − z*)/(c·e − z*)`.
pub fn relative_error(inst: &ConicInstance, pi: &[f64]) -> Result<f64, TransformError> {
    let z_star = inst.z_star.ok_or(TransformError::MissingZStar)?;
    let ce = inst.c_dot_e();
    Ok((dot(&inst.c, pi) - z_star) / (ce - z_star))
}

/// Optimal value of λ_min over the slice `Affine_z`: `(z − z*)/(c·e − z*)`.
pub fn optimal_lambda(inst: &ConicInstance, z: f64) -> Result<f64, TransformError> {
    let z_star = inst.z_star.ok_or(TransformError::MissingZStar)?;
    Ok((z - z_star) / (inst.c_dot_e() - z_star))
}

/// Gap `(ε/(1−ε))·(c·e − z)/(c·e − z*)`: coming within this much of the
/// slice optimum λ*_z is equivalent to relative error ≤ ε after projection.
pub fn lambda_gap_tolerance(ledger: &ErrorLedger, z_star: f64) -> f64 {
    let eps = ledger.epsilon;
    (eps / (1.0 - eps)) * (ledger.c_dot_e - ledger.z_target) / (ledger.c_dot_e - z_star)
}

/// The combined primal-dual program over `(x, y, s)`:
///
/// ```text
/// min  c·x − b·y   s.t.  Ax = b,  Aᵀy + s = c,  x ∈ K,  s ∈ K*, y free
/// ```
///
/// For self-dual K with both sides strictly feasible its optimal value is
/// zero, so Algorithm 1 applies without an external z*. The caller supplies
/// the interior pair: `x0` (primal, `Ax0 = b`, interior) and `y0` with
/// `s0 = c − Aᵀy0` interior. Free `y` coordinates are simply left out of the
/// cone blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualEmbedding {
    pub instance: ConicInstance,
    n: usize,
    m: usize,
}

impl PrimalDualEmbedding {
    pub fn split<'a>(&self, w: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (x, rest) = w.split_at(self.n);
        let (y, s) = rest.split_at(self.m);
        (x, y, s)
    }

    pub fn primal_dim(&self) -> usize {
        self.n
    }

    pub fn dual_dim(&self) -> usize {
        self.m
    }
}

pub fn build_primal_dual_embedding(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    cone: &ConeSpec,
    x0: &[f64],
    y0: &[f64],
) -> Result<PrimalDualEmbedding, TransformError> {
    let (n, m) = (a.cols(), a.rows());
    for (i, blk) in cone.blocks().iter().enumerate() {
        match blk.kind {
            BlockKind::Orthant | BlockKind::Psd { .. } => {}
            _ => return Err(TransformError::NotSelfDual { block: i }),
        }
    }

    // s0 = c − Aᵀ y0 must be interior to K* = K
    let aty = a.tr_mul_vec(y0);
    let s0: Vec<f64> = c.iter().zip(&aty).map(|(ci, vi)| ci - vi).collect();
    DistinguishedDirection::new(cone, x0.to_vec()).map_err(|e| {
        TransformError::EmbeddingPointNotInterior {
            side: "primal",
            detail: e.to_string(),
        }
    })?;
    DistinguishedDirection::new(cone, s0.clone()).map_err(|e| {
        TransformError::EmbeddingPointNotInterior {
            side: "dual",
            detail: e.to_string(),
        }
    })?;
    let ax = a.mul_vec(x0);
    for i in 0..m {
        if (ax[i] - b[i]).abs() > VALIDATION_REL_TOL * (1.0 + b[i].abs() + ax[i].abs()) {
            return Err(TransformError::EmbeddingPointNotInterior {
                side: "primal",
                detail: format!("Ax0 row {i} misses b by {}", ax[i] - b[i]),
            });
        }
    }

    // stacked operator [[A, 0, 0], [0, Aᵀ, I]] over (x, y, s)
    let total = n + m + n;
    let mut triplets = Vec::with_capacity(2 * a.nnz() + n);
    for i in 0..m {
        for (j, v) in a.row_entries(i) {
            triplets.push((i, j, v));
            triplets.push((m + j, n + i, v));
        }
    }
    for j in 0..n {
        triplets.push((m + j, n + m + j, 1.0));
    }
    let a_emb = SparseMatrix::from_triplets(m + n, total, &triplets)
        .expect("embedding triplets are in range");
    let mut b_emb = b.to_vec();
    b_emb.extend_from_slice(c);
    let mut c_emb = c.to_vec();
    c_emb.extend(b.iter().map(|v| -v));
    c_emb.extend(std::iter::repeat_n(0.0, n));

    // cone blocks: K on the x range, K on the s range, y free
    let mut blocks: Vec<ConeBlock> = cone.blocks().to_vec();
    for blk in cone.blocks() {
        blocks.push(ConeBlock {
            kind: blk.kind.clone(),
            range: blk.range.start + n + m..blk.range.end + n + m,
        });
    }
    let cone_emb = ConeSpec::new(total, blocks)?;

    let mut e_emb = x0.to_vec();
    e_emb.extend_from_slice(y0);
    e_emb.extend_from_slice(&s0);
    let e_emb = DistinguishedDirection::new(&cone_emb, e_emb)?;

    let mut instance = ConicInstance {
        cone: cone_emb,
        a: a_emb,
        b: b_emb,
        c: c_emb,
        e: e_emb,
        z_star: Some(0.0),
        x_bar: None,
    };
    instance.x_bar = Some(default_warm_point(&instance)?);
    Ok(PrimalDualEmbedding { instance, n, m })
}

/// Derive `y0` for an orthant (LP) embedding by scaling: with
/// `v = Aᵀ(AAᵀ)⁻¹A·1` strictly positive, `y0 = −σ·(AAᵀ)⁻¹A·1` makes
/// `s0 = c + σv` interior for large enough σ. Fails (rather than guessing)
/// when the derived direction is not strictly positive; PSD callers must
/// supply their own pair.
pub fn lp_dual_interior_offset(a: &SparseMatrix, c: &[f64]) -> Result<Vec<f64>, TransformError> {
    let m = a.rows();
    if m == 0 {
        return Ok(Vec::new());
    }
    let p = Projector::for_matrix(a.clone())?;
    let ones = vec![1.0; a.cols()];
    // Aᵀ(AAᵀ)⁻¹A·1 = 1 − P·1
    let p1 = p.project(&ones);
    let v: Vec<f64> = ones.iter().zip(&p1).map(|(o, q)| o - q).collect();
    let vmax = norm_inf(&v);
    if v.iter().any(|&vi| vi <= 1e-9 * vmax.max(1.0)) {
        return Err(TransformError::DualDirectionNotFound);
    }
    let sigma = c
        .iter()
        .zip(&v)
        .map(|(ci, vi)| (1.0 - ci) / vi)
        .fold(1.0f64, f64::max);
    // recover y_dir from v = Aᵀ y_dir via the Gram solve, then scale
    let gram = crate::linalg::DenseCholesky::factor(m, &a.gram())?;
    let y_dir = gram.solve(&a.mul_vec(&ones));
    Ok(y_dir.iter().map(|yi| -sigma * yi).collect())
}

impl From<crate::linalg::LinalgError> for TransformError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        TransformError::Projection(e.into())
    }
}

/// Stacked projector for the solve subspace `L = {v : Av = 0, c·v = 0}`.
pub fn solve_projector(inst: &ConicInstance) -> Result<Projector, TransformError> {
    Ok(build_stacked(&inst.a, &inst.c)?.factorize()?)
}
