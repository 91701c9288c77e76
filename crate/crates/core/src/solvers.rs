//! The two projected supgradient methods on the transformed problem.
//!
//! Both walk the affine slice with supgradients of λ_min projected onto
//! `L = {v : Av = 0, c·v = 0}` and radially project every iterate to a
//! feasible boundary point `π_k`.
//!
//! **Algorithm 1** needs the optimal value `z*`. Starting from
//! `x₀ = e + (c·e − z*)/(c·e − c·x̄)(x̄ − e)` (so `c·x₀ = z*`) it applies the
//! Polyak-type step `x_{k+1} = x_k − (λ_min(x_k)/‖g_k‖²) g_k`. On that slice
//! λ_min ≤ 0 with equality exactly at optimizers, and the relative error of
//! `π_k` equals `−λ_k/(1 − λ_k)`.
//!
//! **Algorithm 2** needs only ε. From `x₀ = π(x̄)` it takes fixed steps
//! `x̃_{k+1} = x_k + (ε/2‖g_k‖²) g_k`; when
//! `c·(e − π(x̃_{k+1})) ≥ (4/3)·c·(e − x̃_{k+1})` — equivalently
//! `λ_min(x̃_{k+1}) ≥ 1/4` — it restarts from the boundary, opening a new
//! outer iteration whose objective gap has grown by at least 4/3.
//!
//! A zero projected supgradient at a point with λ_min < 0 on the z*-slice
//! means the slice maximum of λ_min is negative, i.e. the supplied z* lies
//! below the true optimal value; the run reports that signal instead of
//! looping.

use crate::cones::ConeError;
use crate::linalg::dot;
use crate::projection::Projector;
use crate::transform::{
    default_warm_point, initial_point_alg1, relative_error, solve_projector, validate_instance,
    ConicInstance, Finding, TransformError,
};
use std::fmt;

/// λ_min at or above this (negative) level counts as an exact optimum for
/// Algorithm 1.
const OPTIMAL_LAMBDA_TOL: f64 = 1e-8;
/// ‖g‖² below this is treated as a vanished supgradient regardless of the
/// configured stall tolerance.
const ZERO_GRADIENT_SQ: f64 = 1e-20;
/// Allowed disagreement between the printed restart test and λ_min ≥ 1/4.
const RESTART_CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Alg1,
    Alg2,
}

/// Run parameters. `seed` is reserved for randomized extensions; the core
/// methods are deterministic and ignore it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub stall_tolerance: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(
        algorithm: Algorithm,
        epsilon: f64,
        max_iterations: usize,
    ) -> Result<Self, SolverError> {
        let cfg = RunConfig {
            algorithm,
            epsilon,
            max_iterations,
            stall_tolerance: 1e-10,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SolverError::BadConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::BadConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the iterate log. `lambda` is λ_min(x_k), `g_norm` the norm of
/// the projected supgradient at x_k, `objective_pi` is `c·π_k`, and
/// `restarted` marks iterates produced by an Algorithm-2 boundary restart.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub outer_index: usize,
    pub lambda: f64,
    pub g_norm: f64,
    pub objective_pi: f64,
    pub relative_error: Option<f64>,
    pub restarted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    EpsilonReached,
    MaxIterations,
    OptimalExact,
    /// The supplied z* is below the true optimal value: the slice maximum of
    /// λ_min stayed strictly negative while the supgradient vanished.
    ZTargetInfeasibleSignal,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::EpsilonReached => "EpsilonReached",
            Termination::MaxIterations => "MaxIterations",
            Termination::OptimalExact => "OptimalExact",
            Termination::ZTargetInfeasibleSignal => "ZTargetInfeasibleSignal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub records: Vec<IterateRecord>,
    pub best_pi: Vec<f64>,
    pub best_objective: f64,
    pub termination: Termination,
    /// max over k of |λ_min(π_k)|; the radial projection is never
    /// re-normalized, so this is the honest boundary drift.
    pub boundary_residual_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    BadConfig(String),
    Validation(Vec<Finding>),
    MissingZStar,
    /// The two forms of the restart test disagreed beyond tolerance.
    RestartTestMismatch {
        lambda: f64,
    },
    Cone(ConeError),
    Transform(TransformError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::BadConfig(msg) => write!(f, "bad run configuration: {msg}"),
            SolverError::Validation(findings) => {
                write!(f, "instance failed validation:")?;
                for fd in findings {
                    write!(f, " [{}] {};", fd.code.as_str(), fd.message)?;
                }
                Ok(())
            }
            SolverError::MissingZStar => write!(f, "Algorithm 1 requires a known z*"),
            SolverError::RestartTestMismatch { lambda } => write!(
                f,
                "internal error: restart tests disagree at lambda_min = {lambda}"
            ),
            SolverError::Cone(e) => write!(f, "{e}"),
            SolverError::Transform(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<ConeError> for SolverError {
    fn from(e: ConeError) -> Self {
        SolverError::Cone(e)
    }
}

impl From<TransformError> for SolverError {
    fn from(e: TransformError) -> Self {
        SolverError::Transform(e)
    }
}

/// What a single step decided.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Advanced(Vec<f64>),
    Finished(Termination),
}

fn record_at(
    inst: &ConicInstance,
    k: usize,
    outer_index: usize,
    restarted: bool,
    g_norm: f64,
    lambda: f64,
    pi: &[f64],
) -> IterateRecord {
    IterateRecord {
        k,
        outer_index,
        lambda,
        g_norm,
        objective_pi: dot(&inst.c, pi),
        relative_error: inst
            .z_star
            .map(|_| relative_error(inst, pi).expect("z_star checked")),
        restarted,
    }
}

/// One Algorithm-1 step from `x_k` on the slice `c·x = z*`.
pub fn algorithm1_step(
    inst: &ConicInstance,
    projector: &Projector,
    x_k: &[f64],
    k: usize,
) -> Result<(StepOutcome, IterateRecord, f64), SolverError> {
    #[cfg(debug_assertions)]
    if let Some(z_star) = inst.z_star {
        let cx = dot(&inst.c, x_k);
        debug_assert!(
            (cx - z_star).abs() <= 1e-8 * (1.0 + z_star.abs() + cx.abs()),
            "iterate left the z* slice: c·x = {cx}, z* = {z_star}"
        );
    }
    let lambda = inst.cone.lambda_min(x_k, &inst.e)?;
    let pi = inst.cone.project_to_boundary(x_k, &inst.e)?;
    let residual = inst.cone.lambda_min(&pi, &inst.e)?.abs();
    let g_hat = inst.cone.supgradient(x_k, &inst.e)?;
    let g = projector.project(&g_hat);
    let g_norm_sq = dot(&g, &g);
    let g_norm = g_norm_sq.sqrt();
    let record = record_at(inst, k, 0, false, g_norm, lambda, &pi);

    if lambda >= -OPTIMAL_LAMBDA_TOL {
        return Ok((
            StepOutcome::Finished(Termination::OptimalExact),
            record,
            residual,
        ));
    }
    if g_norm_sq < ZERO_GRADIENT_SQ {
        // λ_min cannot be raised to 0 on this slice: z* was set too low
        return Ok((
            StepOutcome::Finished(Termination::ZTargetInfeasibleSignal),
            record,
            residual,
        ));
    }
    let step = -lambda / g_norm_sq;
    let x_next: Vec<f64> = x_k.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect();
    Ok((StepOutcome::Advanced(x_next), record, residual))
}

/// Position of Algorithm 2 in its iteration structure: the global step
/// index, the outer iteration it belongs to, and whether the current iterate
/// was produced by a boundary restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alg2Cursor {
    pub k: usize,
    pub outer_index: usize,
    pub restarted: bool,
}

/// One Algorithm-2 step from `x_k`. The restart comparison uses `≥` (so a
/// tie restarts) and is cross-checked against the equivalent form
/// `λ_min(x̃) ≥ 1/4`.
pub fn algorithm2_step(
    inst: &ConicInstance,
    projector: &Projector,
    x_k: &[f64],
    epsilon: f64,
    stall_tolerance: f64,
    cursor: Alg2Cursor,
) -> Result<(StepOutcome, IterateRecord, f64, bool), SolverError> {
    let lambda = inst.cone.lambda_min(x_k, &inst.e)?;
    let pi = inst.cone.project_to_boundary(x_k, &inst.e)?;
    let residual = inst.cone.lambda_min(&pi, &inst.e)?.abs();
    let g_hat = inst.cone.supgradient(x_k, &inst.e)?;
    let g = projector.project(&g_hat);
    let g_norm_sq = dot(&g, &g);
    let g_norm = g_norm_sq.sqrt();
    let record = record_at(
        inst,
        cursor.k,
        cursor.outer_index,
        cursor.restarted,
        g_norm,
        lambda,
        &pi,
    );

    if g_norm_sq < ZERO_GRADIENT_SQ || g_norm <= stall_tolerance {
        // λ_min is maximal on this slice, so π(x_k) is optimal
        return Ok((
            StepOutcome::Finished(Termination::OptimalExact),
            record,
            residual,
            false,
        ));
    }

    let step = epsilon / (2.0 * g_norm_sq);
    let x_tilde: Vec<f64> = x_k.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect();
    let lambda_tilde = inst.cone.lambda_min(&x_tilde, &inst.e)?;
    let pi_tilde = inst.cone.project_to_boundary(&x_tilde, &inst.e)?;

    // c·(e − π̃) ≥ (4/3)·c·(e − x̃), with e − π̃ = (e − x̃)/(1 − λ̃)
    let gap_tilde = inst.c_dot_e() - dot(&inst.c, &x_tilde);
    let gap_pi = (1.0 / (1.0 - lambda_tilde)) * gap_tilde;
    let restart_gap = gap_pi >= (4.0 / 3.0) * gap_tilde;
    let restart_lambda = lambda_tilde >= 0.25;
    if restart_gap != restart_lambda && (lambda_tilde - 0.25).abs() > RESTART_CROSS_CHECK_TOL {
        return Err(SolverError::RestartTestMismatch {
            lambda: lambda_tilde,
        });
    }

    if restart_gap {
        Ok((StepOutcome::Advanced(pi_tilde), record, residual, true))
    } else {
        Ok((StepOutcome::Advanced(x_tilde), record, residual, false))
    }
}

/// Drive one of the algorithms to termination.
///
/// * Alg1 stops once the gap-identity error `−λ_k/(1 − λ_k)` drops to ε,
///   at an exact optimum, or on the z*-infeasibility signal.
/// * Alg2 with `z_star` present (validation mode) stops once the best π has
///   relative error ≤ ε; without `z_star` it runs to `max_iterations` or a
///   supgradient stall.
///
/// When the instance carries no `x_bar`, the default warm point
/// `e − P_null(A) c` is used.
pub fn run(inst: &ConicInstance, cfg: &RunConfig) -> Result<RunReport, SolverError> {
    cfg.validate()?;
    let findings = validate_instance(inst);
    if !findings.is_empty() {
        return Err(SolverError::Validation(findings));
    }

    let mut owned;
    let inst = if inst.x_bar.is_none() {
        owned = inst.clone();
        owned.x_bar = Some(default_warm_point(&owned)?);
        &owned
    } else {
        inst
    };

    let projector = solve_projector(inst)?;
    match cfg.algorithm {
        Algorithm::Alg1 => run_alg1(inst, &projector, cfg),
        Algorithm::Alg2 => run_alg2(inst, &projector, cfg),
    }
}

struct BestTracker {
    pi: Vec<f64>,
    objective: f64,
}

impl BestTracker {
    fn new() -> Self {
        BestTracker {
            pi: Vec::new(),
            objective: f64::INFINITY,
        }
    }

    /// `obj` is the already-computed `c·π(x)`; the projection is redone
    /// only when it improves on the best so far.
    fn consider(&mut self, inst: &ConicInstance, x: &[f64], obj: f64) -> Result<(), SolverError> {
        if obj < self.objective {
            self.objective = obj;
            self.pi = inst.cone.project_to_boundary(x, &inst.e)?;
        }
        Ok(())
    }
}

fn run_alg1(
    inst: &ConicInstance,
    projector: &Projector,
    cfg: &RunConfig,
) -> Result<RunReport, SolverError> {
    if inst.z_star.is_none() {
        return Err(SolverError::MissingZStar);
    }
    let mut x = initial_point_alg1(inst)?;
    let mut records = Vec::new();
    let mut best = BestTracker::new();
    let mut residual_max = 0.0f64;

    for k in 0..=cfg.max_iterations {
        let (outcome, record, residual) = algorithm1_step(inst, projector, &x, k)?;
        residual_max = residual_max.max(residual);
        best.consider(inst, &x, record.objective_pi)?;
        let lambda = record.lambda;
        records.push(record);

        match outcome {
            StepOutcome::Finished(t) => return Ok(finish(records, best, t, residual_max)),
            StepOutcome::Advanced(next) => {
                // gap identity on the z* slice: rel err of π_k is −λ_k/(1 − λ_k)
                if -lambda / (1.0 - lambda) <= cfg.epsilon {
                    return Ok(finish(
                        records,
                        best,
                        Termination::EpsilonReached,
                        residual_max,
                    ));
                }
                if k == cfg.max_iterations {
                    return Ok(finish(
                        records,
                        best,
                        Termination::MaxIterations,
                        residual_max,
                    ));
                }
                x = next;
            }
        }
    }
    unreachable!("loop always returns");
}

fn run_alg2(
    inst: &ConicInstance,
    projector: &Projector,
    cfg: &RunConfig,
) -> Result<RunReport, SolverError> {
    let x_bar = inst.x_bar.as_ref().expect("warm point installed by run()");
    let mut x = inst.cone.project_to_boundary(x_bar, &inst.e)?;
    let mut records = Vec::new();
    let mut best = BestTracker::new();
    let mut residual_max = 0.0f64;
    let mut outer_index = 1;
    let mut restarted = false;

    for k in 0..=cfg.max_iterations {
        let (outcome, record, residual, did_restart) = algorithm2_step(
            inst,
            projector,
            &x,
            cfg.epsilon,
            cfg.stall_tolerance,
            Alg2Cursor {
                k,
                outer_index,
                restarted,
            },
        )?;
        residual_max = residual_max.max(residual);
        best.consider(inst, &x, record.objective_pi)?;
        records.push(record);

        // validation mode: stop as soon as the best feasible point is inside ε
        if let Some(z_star) = inst.z_star {
            let rel = (best.objective - z_star) / (inst.c_dot_e() - z_star);
            if rel <= cfg.epsilon {
                return Ok(finish(
                    records,
                    best,
                    Termination::EpsilonReached,
                    residual_max,
                ));
            }
        }

        match outcome {
            StepOutcome::Finished(t) => return Ok(finish(records, best, t, residual_max)),
            StepOutcome::Advanced(next) => {
                if k == cfg.max_iterations {
                    return Ok(finish(
                        records,
                        best,
                        Termination::MaxIterations,
                        residual_max,
                    ));
                }
                if did_restart {
                    outer_index += 1;
                }
                restarted = did_restart;
                x = next;
            }
        }
    }
    unreachable!("loop always returns");
}

fn finish(
    records: Vec<IterateRecord>,
    best: BestTracker,
    termination: Termination,
    boundary_residual_max: f64,
) -> RunReport {
    RunReport {
        records,
        best_pi: best.pi,
        best_objective: best.objective,
        termination,
        boundary_residual_max,
    }
}
