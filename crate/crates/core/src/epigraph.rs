//! Epigraph lifting: minimize a maximum of affine functions over a simple
//! set intersected with equalities, as a conic program.
//!
//! For `f(x) = max_i (a_i·x + β_i)` over `Feas = {x ∈ S : Ax = b}` the
//! problem is rewritten over `(x, s, t)` as
//!
//! ```text
//! min t   s.t.  Ax = b,  s = 1,  (x, s) ∈ K₁,  a_i·x + β_i s ≤ t ∀i
//! ```
//!
//! where `K₁` homogenizes the simple set (`S = {x : (x, 1) ∈ K₁}`). The
//! distinguished direction is `e = (x̃, 1, f̂)` built from a base point `x̃`
//! interior to `S` and a cap `f̂` dominating `f` on the unit ball around `x̃`
//! inside the affine space. With that construction the Lipschitz constant of
//! λ_min on every slice is at most 1, so the iteration budget depends only
//! on the sublevel diameter `D` and ε — no Lipschitz constant of `f` enters
//! anywhere. (That is not an accident of the max-of-affine restriction: two
//! objectives agreeing on the unit ball around `x̃` get identical budgets no
//! matter how steep one of them is further out.)
//!
//! Restrictions here: `f` is a finite maximum of affine pieces, and `S` is
//! an orthant, a box, or the unit ball, all of which homogenize into
//! existing cone blocks. The lifted space keeps the plain dot product with
//! unit weights on the `s` and `t` coordinates; reweighting those axes
//! would only rescale the Lipschitz constant.

use crate::cones::{BlockKind, ConeBlock, ConeSpec, DistinguishedDirection};
use crate::linalg::{dot, norm2, SparseMatrix};
use crate::transform::ConicInstance;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimpleSet {
    /// `x ≥ 0`
    Orthant,
    /// `lo ≤ x ≤ hi` componentwise
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `‖x‖₂ ≤ 1`
    UnitBall,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpigraphError {
    /// `f̂` is below the verified maximum of `f` on the constrained unit
    /// ball (or does not strictly dominate `f(x̃)`).
    CapTooSmall {
        required: f64,
        got: f64,
    },
    BasePointNotInterior {
        detail: String,
    },
    /// Condition violated: the unit ball around `x̃` inside `{Ax = b}` must
    /// lie in `S`.
    UnitBallNotContained {
        detail: String,
    },
    BasePointNotOnAffine {
        row: usize,
        residual: f64,
    },
    InfeasibleLiftedPoint {
        detail: String,
    },
    Shape(String),
    Unsupported(String),
}

impl fmt::Display for EpigraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpigraphError::CapTooSmall { required, got } => write!(
                f,
                "cap f̂ = {got} is below the verified requirement {required}"
            ),
            EpigraphError::BasePointNotInterior { detail } => {
                write!(f, "base point is not interior to the simple set: {detail}")
            }
            EpigraphError::UnitBallNotContained { detail } => write!(
                f,
                "the unit ball around the base point inside the affine space leaves the simple set: {detail}"
            ),
            EpigraphError::BasePointNotOnAffine { row, residual } => {
                write!(f, "A·x̃ misses b at row {row} by {residual}")
            }
            EpigraphError::InfeasibleLiftedPoint { detail } => {
                write!(f, "lifted point is not feasible: {detail}")
            }
            EpigraphError::Shape(msg) => write!(f, "shape error: {msg}"),
            EpigraphError::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl std::error::Error for EpigraphError {}

/// The lifting data plus the induced conic instance over `(x, s, t)`.
/// Coordinates: `0..n` carry `x`, `n` carries `s`, `n+1` carries `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphModel {
    pub pieces: Vec<AffinePiece>,
    pub set: SimpleSet,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub f_hat: f64,
    pub lifted: ConicInstance,
}

impl EpigraphModel {
    pub fn n(&self) -> usize {
        self.x_tilde.len()
    }

    pub fn s_index(&self) -> usize {
        self.n()
    }

    pub fn t_index(&self) -> usize {
        self.n() + 1
    }
}

/// `f(x) = max_i (a_i·x + β_i)`.
pub fn f_value(pieces: &[AffinePiece], x: &[f64]) -> f64 {
    pieces
        .iter()
        .map(|p| dot(&p.a, x) + p.beta)
        .fold(f64::NEG_INFINITY, f64::max)
}

const BALL_SAMPLES: usize = 10_000;
const CHECK_TOL: f64 = 1e-12;

pub fn build_epigraph_instance(
    pieces: Vec<AffinePiece>,
    set: SimpleSet,
    a: SparseMatrix,
    b: Vec<f64>,
    x_tilde: Vec<f64>,
    f_hat: f64,
) -> Result<EpigraphModel, EpigraphError> {
    let n = x_tilde.len();
    if pieces.is_empty() {
        return Err(EpigraphError::Shape(
            "need at least one affine piece".into(),
        ));
    }
    for (i, p) in pieces.iter().enumerate() {
        if p.a.len() != n {
            return Err(EpigraphError::Shape(format!(
                "piece {i} has {} coefficients, expected {n}",
                p.a.len()
            )));
        }
    }
    if a.cols() != n && a.rows() > 0 {
        return Err(EpigraphError::Shape(format!(
            "equality matrix has {} columns, expected {n}",
            a.cols()
        )));
    }
    match &set {
        SimpleSet::Box { lo, hi } => {
            if lo.len() != n || hi.len() != n {
                return Err(EpigraphError::Shape("box bounds length mismatch".into()));
            }
            if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                return Err(EpigraphError::Shape("box has an empty side".into()));
            }
        }
        SimpleSet::Orthant | SimpleSet::UnitBall => {}
    }

    // base point on the affine space
    let ax = a.mul_vec(&x_tilde);
    for i in 0..a.rows() {
        let r = ax[i] - b[i];
        if r.abs() > 1e-9 * (1.0 + b[i].abs() + ax[i].abs()) {
            return Err(EpigraphError::BasePointNotOnAffine {
                row: i,
                residual: r,
            });
        }
    }

    // base point strictly interior to S
    match &set {
        SimpleSet::Orthant => {
            if let Some(j) = x_tilde.iter().position(|&v| v <= CHECK_TOL) {
                return Err(EpigraphError::BasePointNotInterior {
                    detail: format!("coordinate {j} is {} <= 0", x_tilde[j]),
                });
            }
        }
        SimpleSet::Box { lo, hi } => {
            for (j, (&xt, (&l, &h))) in x_tilde.iter().zip(lo.iter().zip(hi)).enumerate() {
                if xt <= l + CHECK_TOL || xt >= h - CHECK_TOL {
                    return Err(EpigraphError::BasePointNotInterior {
                        detail: format!("coordinate {j} = {xt} is not strictly inside [{l}, {h}]"),
                    });
                }
            }
        }
        SimpleSet::UnitBall => {
            let r = norm2(&x_tilde);
            if r >= 1.0 - CHECK_TOL {
                return Err(EpigraphError::BasePointNotInterior {
                    detail: format!("‖x̃‖ = {r} >= 1"),
                });
            }
        }
    }

    // the unit ball around x̃ inside {Ax = b} must stay in S: exact facet
    // distances for polyhedral sets, sampled directions for the ball
    let projector = crate::projection::Projector::for_matrix(a.clone())
        .map_err(|e| EpigraphError::Shape(e.to_string()))?;
    let facet_distance = |j: usize, slack: f64| -> f64 {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        let pu = norm2(&projector.project(&unit));
        if pu <= 1e-14 {
            f64::INFINITY
        } else {
            slack / pu
        }
    };
    match &set {
        SimpleSet::Orthant => {
            for (j, &xt) in x_tilde.iter().enumerate() {
                let d = facet_distance(j, xt);
                if d < 1.0 - CHECK_TOL {
                    return Err(EpigraphError::UnitBallNotContained {
                        detail: format!("facet x_{j} = 0 at distance {d} < 1"),
                    });
                }
            }
        }
        SimpleSet::Box { lo, hi } =>
        {
            #[allow(clippy::needless_range_loop)]
            for j in 0..n {
                let d_lo = facet_distance(j, x_tilde[j] - lo[j]);
                let d_hi = facet_distance(j, hi[j] - x_tilde[j]);
                if d_lo < 1.0 - CHECK_TOL || d_hi < 1.0 - CHECK_TOL {
                    return Err(EpigraphError::UnitBallNotContained {
                        detail: format!("box side {j} at distance {} < 1", d_lo.min(d_hi)),
                    });
                }
            }
        }
        SimpleSet::UnitBall => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x0e11_ba11);
            for k in 0..BALL_SAMPLES {
                let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v = projector.project(&raw);
                let vn = norm2(&v);
                if vn < 1e-12 {
                    continue;
                }
                let p: Vec<f64> = x_tilde.iter().zip(&v).map(|(x, vi)| x + vi / vn).collect();
                if norm2(&p) > 1.0 + CHECK_TOL {
                    return Err(EpigraphError::UnitBallNotContained {
                        detail: format!(
                            "sampled direction {k} exits the ball (‖p‖ = {})",
                            norm2(&p)
                        ),
                    });
                }
            }
        }
    }

    // cap: f̂ must dominate every piece on the constrained unit ball, where
    // the piece maximum is a_i·x̃ + β_i + ‖P a_i‖, and strictly dominate f(x̃)
    let mut required = f64::NEG_INFINITY;
    for p in &pieces {
        let reach = dot(&p.a, &x_tilde) + p.beta + norm2(&projector.project(&p.a));
        required = required.max(reach);
    }
    if f_hat < required - CHECK_TOL * (1.0 + required.abs()) {
        return Err(EpigraphError::CapTooSmall {
            required,
            got: f_hat,
        });
    }
    let f_tilde = f_value(&pieces, &x_tilde);
    if f_hat <= f_tilde + CHECK_TOL * (1.0 + f_tilde.abs()) {
        return Err(EpigraphError::CapTooSmall {
            required: f_tilde,
            got: f_hat,
        });
    }

    // assemble the lifted instance over (x, s, t)
    let total = n + 2;
    let s_index = n;
    let t_index = n + 1;
    let mut triplets = a.to_triplets();
    triplets.push((a.rows(), s_index, 1.0));
    let a_lift = SparseMatrix::from_triplets(a.rows() + 1, total, &triplets)
        .expect("lifted triplets in range");
    let mut b_lift = b.clone();
    b_lift.push(1.0);
    let mut c_lift = vec![0.0; total];
    c_lift[t_index] = 1.0;

    let mut blocks: Vec<ConeBlock> = Vec::new();
    match &set {
        SimpleSet::Orthant => blocks.push(ConeBlock {
            kind: BlockKind::Orthant,
            range: 0..n + 1,
        }),
        SimpleSet::Box { lo, hi } => {
            for j in 0..n {
                // x_j ≥ lo_j s  ⟺  lo_j s ≤ w_j
                let mut normal = vec![0.0; n + 1];
                normal[s_index] = lo[j];
                blocks.push(ConeBlock {
                    kind: BlockKind::HalfspaceLift { normal, offset: j },
                    range: 0..n + 1,
                });
                // x_j ≤ hi_j s  ⟺  x_j + (1 − hi_j) s ≤ w_s
                let mut normal = vec![0.0; n + 1];
                normal[j] = 1.0;
                normal[s_index] = 1.0 - hi[j];
                blocks.push(ConeBlock {
                    kind: BlockKind::HalfspaceLift {
                        normal,
                        offset: s_index,
                    },
                    range: 0..n + 1,
                });
            }
            blocks.push(ConeBlock {
                kind: BlockKind::Orthant,
                range: s_index..s_index + 1,
            });
        }
        SimpleSet::UnitBall => blocks.push(ConeBlock {
            kind: BlockKind::SecondOrder,
            range: 0..n + 1,
        }),
    }
    for p in &pieces {
        let mut normal = vec![0.0; total];
        normal[..n].copy_from_slice(&p.a);
        normal[s_index] = p.beta;
        blocks.push(ConeBlock {
            kind: BlockKind::HalfspaceLift {
                normal,
                offset: t_index,
            },
            range: 0..total,
        });
    }
    let cone = ConeSpec::new(total, blocks).map_err(|e| EpigraphError::Shape(e.to_string()))?;

    let mut e_raw = x_tilde.clone();
    e_raw.push(1.0);
    e_raw.push(f_hat);
    let e = DistinguishedDirection::new(&cone, e_raw).map_err(|err| {
        EpigraphError::BasePointNotInterior {
            detail: err.to_string(),
        }
    })?;

    let mut x_bar = x_tilde.clone();
    x_bar.push(1.0);
    x_bar.push(f_tilde);

    let lifted = ConicInstance {
        cone,
        a: a_lift,
        b: b_lift,
        c: c_lift,
        e,
        z_star: None,
        x_bar: Some(x_bar),
    };
    let lam_e = lifted
        .cone
        .lambda_min(lifted.e.as_slice(), &lifted.e)
        .expect("e is finite");
    debug_assert!((lam_e - 1.0).abs() <= 1e-9, "λ_min(e) = {lam_e}");

    Ok(EpigraphModel {
        pieces,
        set,
        a,
        b,
        x_tilde,
        f_hat,
        lifted,
    })
}

/// Pull the `x`-slice and `t` out of a feasible lifted point, asserting
/// `s = 1`, near-membership of the cone, `f(x) ≤ t`, and `x ∈ S`.
pub fn recover_solution(
    model: &EpigraphModel,
    lifted_point: &[f64],
) -> Result<(Vec<f64>, f64), EpigraphError> {
    let n = model.n();
    if lifted_point.len() != n + 2 {
        return Err(EpigraphError::Shape(format!(
            "lifted point has length {}, expected {}",
            lifted_point.len(),
            n + 2
        )));
    }
    let s = lifted_point[model.s_index()];
    if (s - 1.0).abs() > 1e-8 {
        return Err(EpigraphError::InfeasibleLiftedPoint {
            detail: format!("s = {s}, expected 1"),
        });
    }
    let lam = model
        .lifted
        .cone
        .lambda_min(lifted_point, &model.lifted.e)
        .map_err(|e| EpigraphError::InfeasibleLiftedPoint {
            detail: e.to_string(),
        })?;
    if lam < -1e-8 {
        return Err(EpigraphError::InfeasibleLiftedPoint {
            detail: format!("lambda_min = {lam} < 0"),
        });
    }
    let x = lifted_point[..n].to_vec();
    let t = lifted_point[model.t_index()];
    let scale = 1.0 + model.f_hat.abs() + t.abs();
    let fx = f_value(&model.pieces, &x);
    if fx > t + 1e-8 * scale {
        return Err(EpigraphError::InfeasibleLiftedPoint {
            detail: format!("f(x) = {fx} exceeds t = {t}"),
        });
    }
    let in_set = match &model.set {
        SimpleSet::Orthant => x.iter().all(|&v| v >= -1e-8 * scale),
        SimpleSet::Box { lo, hi } => x
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(&v, (&l, &h))| v >= l - 1e-8 * scale && v <= h + 1e-8 * scale),
        SimpleSet::UnitBall => norm2(&x) <= 1.0 + 1e-8 * scale,
    };
    if !in_set {
        return Err(EpigraphError::InfeasibleLiftedPoint {
            detail: "x leaves the simple set".into(),
        });
    }
    Ok((x, t))
}

/// Iteration budget for Algorithm 2 on a lifted model, in terms of the
/// sublevel diameter `D` and ε alone:
///
/// ```text
/// 8 D² ( 1/ε² + (1/ε)·log_{4/3}((D+1)(1−ε)) + 1 )
/// ```
///
/// The signature is the structural guarantee: no Lipschitz constant of `f`
/// can influence the budget because none is accepted.
pub fn epigraph_budget(d: f64, epsilon: f64) -> f64 {
    8.0 * d
        * d
        * (1.0 / (epsilon * epsilon)
            + (1.0 / epsilon) * crate::oracles::log_four_thirds((d + 1.0) * (1.0 - epsilon))
            + 1.0)
}

/// Express the lifted problem as `{min c·p : A_std p = b_std, p ≥ 0}` for
/// the brute-force oracle (box and orthant sets only). The optimum of the
/// lifted program equals `offset + z*_std`.
pub fn to_standard_form_lp(
    model: &EpigraphModel,
) -> Result<(SparseMatrix, Vec<f64>, Vec<f64>, f64), EpigraphError> {
    let n = model.n();
    let k = model.pieces.len();
    let m = model.a.rows();
    match &model.set {
        SimpleSet::Box { lo, hi } => {
            // variables: p (x = lo + p), q (p + q = hi − lo), σ (piece slack), t'
            let vars = 2 * n + k + 1;
            let rows = m + n + k;
            let t_col = 2 * n + k;
            let offset = lower_bound_over_box(&model.pieces, lo, hi) - 1.0;
            let mut triplets = Vec::new();
            let mut rhs = Vec::with_capacity(rows);
            for i in 0..m {
                for (j, v) in model.a.row_entries(i) {
                    triplets.push((i, j, v));
                }
                let a_lo: f64 = model.a.row_entries(i).map(|(j, v)| v * lo[j]).sum();
                rhs.push(model.b[i] - a_lo);
            }
            for j in 0..n {
                triplets.push((m + j, j, 1.0));
                triplets.push((m + j, n + j, 1.0));
                rhs.push(hi[j] - lo[j]);
            }
            for (i, p) in model.pieces.iter().enumerate() {
                for (j, &v) in p.a.iter().enumerate() {
                    if v != 0.0 {
                        triplets.push((m + n + i, j, v));
                    }
                }
                triplets.push((m + n + i, t_col, -1.0));
                triplets.push((m + n + i, 2 * n + i, 1.0));
                rhs.push(offset - p.beta - dot(&p.a, lo));
            }
            let a_std = SparseMatrix::from_triplets(rows, vars, &triplets)
                .expect("standard form triplets in range");
            let mut c_std = vec![0.0; vars];
            c_std[t_col] = 1.0;
            Ok((a_std, rhs, c_std, offset))
        }
        SimpleSet::Orthant => {
            // variables: x, σ, t'
            let vars = n + k + 1;
            let rows = m + k;
            let t_col = n + k;
            // any finite lower bound works as long as it sits strictly below
            // the optimum; pieces over the orthant are minimized either at 0
            // or unbounded (the oracle will flag the latter)
            let offset = model
                .pieces
                .iter()
                .map(|p| p.beta + p.a.iter().map(|v| v.min(0.0) * 1e6).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                - 1.0;
            let mut triplets = model.a.to_triplets();
            let mut rhs = model.b.clone();
            for (i, p) in model.pieces.iter().enumerate() {
                for (j, &v) in p.a.iter().enumerate() {
                    if v != 0.0 {
                        triplets.push((m + i, j, v));
                    }
                }
                triplets.push((m + i, t_col, -1.0));
                triplets.push((m + i, n + i, 1.0));
                rhs.push(offset - p.beta);
            }
            let a_std = SparseMatrix::from_triplets(rows, vars, &triplets)
                .expect("standard form triplets in range");
            let mut c_std = vec![0.0; vars];
            c_std[t_col] = 1.0;
            Ok((a_std, rhs, c_std, offset))
        }
        SimpleSet::UnitBall => Err(EpigraphError::Unsupported(
            "no polyhedral oracle for ball sets".into(),
        )),
    }
}

fn lower_bound_over_box(pieces: &[AffinePiece], lo: &[f64], hi: &[f64]) -> f64 {
    pieces
        .iter()
        .map(|p| {
            p.beta
                + p.a
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&a, (&l, &h))| (a * l).min(a * h))
                    .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Diameter of `{x ∈ S : Ax = b, f(x) ≤ tau}` by vertex enumeration
/// (box sets only); this is the constant `D` when `tau = f(x̃)`.
pub fn sublevel_diameter_box(model: &EpigraphModel, tau: f64) -> Result<f64, EpigraphError> {
    let (lo, hi) = match &model.set {
        SimpleSet::Box { lo, hi } => (lo.clone(), hi.clone()),
        _ => {
            return Err(EpigraphError::Unsupported(
                "sublevel diameter needs a box set".into(),
            ))
        }
    };
    let n = model.n();
    let k = model.pieces.len();
    let m = model.a.rows();
    // variables p, q, σ with x = lo + p
    let vars = 2 * n + k;
    let rows = m + n + k;
    let mut triplets = Vec::new();
    let mut rhs = Vec::with_capacity(rows);
    for i in 0..m {
        for (j, v) in model.a.row_entries(i) {
            triplets.push((i, j, v));
        }
        let a_lo: f64 = model.a.row_entries(i).map(|(j, v)| v * lo[j]).sum();
        rhs.push(model.b[i] - a_lo);
    }
    for j in 0..n {
        triplets.push((m + j, j, 1.0));
        triplets.push((m + j, n + j, 1.0));
        rhs.push(hi[j] - lo[j]);
    }
    for (i, p) in model.pieces.iter().enumerate() {
        for (j, &v) in p.a.iter().enumerate() {
            if v != 0.0 {
                triplets.push((m + n + i, j, v));
            }
        }
        triplets.push((m + n + i, 2 * n + i, 1.0));
        rhs.push(tau - p.beta - dot(&p.a, &lo));
    }
    let a_std =
        SparseMatrix::from_triplets(rows, vars, &triplets).expect("diameter triplets in range");
    let limits = crate::oracles::EnumLimits {
        max_vars: 14,
        max_rows: 10,
    };
    let vertices = crate::oracles::enumerate_vertices(&a_std, &rhs, limits)
        .map_err(|e| EpigraphError::Unsupported(e.to_string()))?;
    if vertices.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let mut best = 0.0f64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let d: f64 = (0..n)
                .map(|idx| (vertices[i][idx] - vertices[j][idx]).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.max(d);
        }
    }
    Ok(best)
}
