//! Independent ground truth at desk scale.
//!
//! Nothing in here shares a code path with the iterative solvers: linear
//! programs are solved by enumerating basic feasible solutions, geometric
//! constants come from least-squares distances to the orthant facets, and
//! supgradients are checked against the concavity inequality directly. The
//! iteration budgets of the two methods are computed from these constants so
//! that runs can be checked against them.

use crate::cones::{BlockKind, ConeSpec, DistinguishedDirection};
use crate::linalg::{dot, norm2, solve_dense, SparseMatrix};
use crate::projection::Projector;
use crate::transform::{default_warm_point, solve_projector, validate_instance, ConicInstance};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    Infeasible,
    Unbounded,
    EnumerationTooLarge { vars: usize, rows: usize },
    UnsupportedCone(String),
    RankDeficient,
    Transform(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Infeasible => write!(f, "no basic feasible solution exists"),
            OracleError::Unbounded => write!(f, "objective is unbounded below"),
            OracleError::EnumerationTooLarge { vars, rows } => write!(
                f,
                "vertex enumeration over {vars} variables and {rows} rows exceeds the oracle limits"
            ),
            OracleError::UnsupportedCone(msg) => write!(f, "oracle needs an orthant cone: {msg}"),
            OracleError::RankDeficient => {
                write!(
                    f,
                    "constraint rows are rank deficient; the enumeration would miss vertices"
                )
            }
            OracleError::Transform(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for OracleError {}

/// Enumeration caps; both brute-force routines refuse bigger systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumLimits {
    pub max_vars: usize,
    pub max_rows: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_vars: 12,
            max_rows: 6,
        }
    }
}

const FEAS_TOL: f64 = 1e-9;

/// All vertices (basic feasible solutions) of `{Ax = b, x ≥ 0}`, assuming
/// full row rank. Bases are visited in lexicographic column order, which
/// fixes tie-breaking everywhere downstream.
pub fn enumerate_vertices(
    a: &SparseMatrix,
    b: &[f64],
    limits: EnumLimits,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let (m, n) = (a.rows(), a.cols());
    if n > limits.max_vars || m > limits.max_rows {
        return Err(OracleError::EnumerationTooLarge { vars: n, rows: m });
    }
    if m == 0 {
        return Ok(vec![vec![0.0; n]]);
    }
    if m > n {
        return Err(OracleError::RankDeficient);
    }
    let dense: Vec<f64> = {
        let mut d = vec![0.0; m * n];
        for i in 0..m {
            for (j, v) in a.row_entries(i) {
                d[i * n + j] = v;
            }
        }
        d
    };
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut vertices = Vec::new();
    let mut any_invertible = false;
    let mut basis: Vec<usize> = (0..m).collect();
    loop {
        let sub: Vec<f64> = (0..m)
            .flat_map(|i| basis.iter().map(move |&j| (i, j)))
            .map(|(i, j)| dense[i * n + j])
            .collect();
        if let Some(xb) = solve_dense(m, &sub, b) {
            any_invertible = true;
            if xb.iter().all(|&v| v >= -FEAS_TOL * scale) {
                let mut x = vec![0.0; n];
                for (slot, &j) in basis.iter().enumerate() {
                    x[j] = xb[slot].max(0.0);
                }
                vertices.push(x);
            }
        }
        // next lexicographic m-subset of {0, …, n−1}
        let mut i = m;
        loop {
            if i == 0 {
                return if any_invertible || !vertices.is_empty() {
                    Ok(vertices)
                } else {
                    Err(OracleError::RankDeficient)
                };
            }
            i -= 1;
            if basis[i] != i + n - m {
                basis[i] += 1;
                for k in i + 1..m {
                    basis[k] = basis[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Minimize `c·x` over `{Ax = b, x ≥ 0}` by enumeration. Returns the optimal
/// value and the first vertex attaining it (in basis order). Unboundedness
/// is detected through the recession system `{Ad = 0, c·d = −1, d ≥ 0}`.
pub fn lp_brute_force(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    limits: EnumLimits,
) -> Result<(f64, Vec<f64>), OracleError> {
    assert_eq!(a.cols(), c.len(), "objective length mismatch");
    assert_eq!(a.rows(), b.len(), "rhs length mismatch");
    let vertices = enumerate_vertices(a, b, limits)?;
    if vertices.is_empty() {
        return Err(OracleError::Infeasible);
    }
    let ray_system = a.vstack_row(c).expect("same width");
    let mut ray_rhs = vec![0.0; a.rows()];
    ray_rhs.push(-1.0);
    let ray_limits = EnumLimits {
        max_vars: limits.max_vars,
        max_rows: limits.max_rows + 1,
    };
    match enumerate_vertices(&ray_system, &ray_rhs, ray_limits) {
        Ok(rays) if !rays.is_empty() => return Err(OracleError::Unbounded),
        Ok(_) => {}
        Err(OracleError::RankDeficient) => {
            // c is dependent on the rows of A: no descent ray exists
        }
        Err(e) => return Err(e),
    }
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    for v in vertices {
        let val = dot(c, &v);
        if val < best {
            best = val;
            arg = v;
        }
    }
    Ok((best, arg))
}

/// Report of a direct supgradient check at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupgradientCheck {
    /// max over sampled y of λ_min(y) − λ_min(x) − ⟨ĝ, y − x⟩ (≤ 0 up to
    /// rounding for a valid supgradient)
    pub max_violation: f64,
    /// |⟨ĝ, e⟩ − 1|
    pub pairing_error: f64,
}

/// Check the returned supgradient against the concavity inequality on
/// `trials` deterministic pseudo-random probe points.
pub fn finite_diff_supgradient_check(
    cone: &ConeSpec,
    x: &[f64],
    e: &DistinguishedDirection,
    trials: usize,
) -> SupgradientCheck {
    let g = cone
        .supgradient(x, e)
        .expect("supgradient at the probe point");
    let lam_x = cone
        .lambda_min(x, e)
        .expect("lambda_min at the probe point");
    let pairing_error = (dot(&g, e.as_slice()) - 1.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let span = 1.0 + crate::linalg::norm_inf(x);
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..trials {
        let y: Vec<f64> = (0..x.len())
            .map(|_| rng.random_range(-3.0 * span..3.0 * span))
            .collect();
        let lam_y = cone.lambda_min(&y, e).expect("lambda_min at probe");
        let lin: f64 = lam_x
            + g.iter()
                .zip(y.iter().zip(x))
                .map(|(gi, (yi, xi))| gi * (yi - xi))
                .sum::<f64>();
        max_violation = max_violation.max(lam_y - lin);
    }
    SupgradientCheck {
        max_violation,
        pairing_error,
    }
}

/// Inner radius of the cone around `e` within the slice through `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub value: f64,
    /// Exact for orthant cones (per-facet least squares); otherwise a
    /// sampled estimate, which can only overestimate the true radius.
    pub exact: bool,
}

fn is_pure_orthant(cone: &ConeSpec) -> bool {
    cone.is_fully_covered()
        && cone
            .blocks()
            .iter()
            .all(|b| matches!(b.kind, BlockKind::Orthant))
}

const SAMPLED_RADIUS_DIRECTIONS: usize = 512;

/// `r̄ = max{r : B(e, r) ∩ Affine_{c·e} ⊆ K}`. For the orthant the distance
/// from `e` to the facet `x_j = 0` inside the slice is
/// `e_j / ‖P u_j‖` with `P` the projector onto `{Av = 0, c·v = 0}`;
/// facets with `P u_j = 0` are unreachable. Other cones get a sampled
/// estimate, flagged as such.
pub fn inner_radius(inst: &ConicInstance) -> Result<RadiusEstimate, OracleError> {
    let projector = solve_projector(inst).map_err(|e| OracleError::Transform(e.to_string()))?;
    if is_pure_orthant(&inst.cone) {
        let n = inst.dim();
        let e = inst.e.as_slice();
        let mut r = f64::INFINITY;
        for j in 0..n {
            let mut unit = vec![0.0; n];
            unit[j] = 1.0;
            let pu = projector.project(&unit);
            let denom = norm2(&pu);
            if denom > 1e-14 {
                r = r.min(e[j] / denom);
            }
        }
        return Ok(RadiusEstimate {
            value: r,
            exact: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bad_5eed);
    let n = inst.dim();
    let mut r = f64::INFINITY;
    for _ in 0..SAMPLED_RADIUS_DIRECTIONS {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = projector.project(&raw);
        let vn = norm2(&v);
        if vn < 1e-12 {
            continue;
        }
        let v: Vec<f64> = v.iter().map(|x| x / vn).collect();
        r = r.min(boundary_step(inst, &v));
    }
    Ok(RadiusEstimate {
        value: r,
        exact: false,
    })
}

/// Largest `t ≥ 0` with `λ_min(e + t v) ≥ 0`, by bisection on the concave
/// section `t ↦ λ_min(e + t v)` which starts at 1.
fn boundary_step(inst: &ConicInstance, v: &[f64]) -> f64 {
    let lam = |t: f64| -> f64 {
        let p: Vec<f64> = inst
            .e
            .as_slice()
            .iter()
            .zip(v)
            .map(|(ei, vi)| ei + t * vi)
            .collect();
        inst.cone.lambda_min(&p, &inst.e).expect("finite point")
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while lam(hi) >= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 120 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lam(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Diameter of the sublevel polytope `{Ax = b, x ≥ 0, c·x ≤ z}`: the maximum
/// pairwise distance among its vertices, which upper-bounds the diameter of
/// every level set at value ≤ z. Returns `−∞` when the polytope is empty.
pub fn sublevel_diameter(
    inst: &ConicInstance,
    z: f64,
    limits: EnumLimits,
) -> Result<f64, OracleError> {
    if !is_pure_orthant(&inst.cone) {
        return Err(OracleError::UnsupportedCone(
            "sublevel diameter enumerates orthant vertices".into(),
        ));
    }
    let n = inst.dim();
    // lift the budget constraint: c·x + s = z, s ≥ 0
    let mut triplets = inst.a.to_triplets();
    let m = inst.a.rows();
    for (j, &cj) in inst.c.iter().enumerate() {
        if cj != 0.0 {
            triplets.push((m, j, cj));
        }
    }
    triplets.push((m, n, 1.0));
    let lifted = SparseMatrix::from_triplets(m + 1, n + 1, &triplets).expect("in range");
    let mut rhs = inst.b.clone();
    rhs.push(z);
    let lifted_limits = EnumLimits {
        max_vars: limits.max_vars + 1,
        max_rows: limits.max_rows + 1,
    };
    let vertices = enumerate_vertices(&lifted, &rhs, lifted_limits)?;
    if vertices.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let mut best = 0.0f64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let d: f64 = (0..n)
                .map(|k| (vertices[i][k] - vertices[j][k]).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.max(d);
        }
    }
    Ok(best)
}

/// Iteration budget for Algorithm 1 (Polyak steps with known z*):
///
/// ```text
/// (2·M·Diam)²·( (4/3)((1−ε)/ε)² + 4(1−ε)/ε + log₂(ρ₀/ε) + log₂((1−ε)/(1−ρ₀)) + 1 )
/// ```
///
/// valid in the regime `ε < ρ₀`, where ρ₀ is the relative error of π₀.
pub fn algorithm1_budget(m_times_diam: f64, epsilon: f64, rho0: f64) -> f64 {
    let q = (1.0 - epsilon) / epsilon;
    (2.0 * m_times_diam).powi(2)
        * ((4.0 / 3.0) * q * q
            + 4.0 * q
            + (rho0 / epsilon).log2()
            + ((1.0 - epsilon) / (1.0 - rho0)).log2()
            + 1.0)
}

/// Iteration budget for Algorithm 2 (ε-steps with 4/3 restarts):
///
/// ```text
/// 8·(M·Diam)²·( 1/ε² + (1/ε)·log_{4/3}((1−ε)/(1−ρ₀)) + 1 )
/// ```
///
/// valid in the regime `ε ≤ ρ₀`.
pub fn algorithm2_budget(m_times_diam: f64, epsilon: f64, rho0: f64) -> f64 {
    8.0 * m_times_diam.powi(2)
        * (1.0 / (epsilon * epsilon)
            + (1.0 / epsilon) * log_four_thirds((1.0 - epsilon) / (1.0 - rho0))
            + 1.0)
}

pub fn log_four_thirds(x: f64) -> f64 {
    x.ln() / (4.0f64 / 3.0).ln()
}

/// Geometric constants and the induced iteration budgets for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub r_bar: f64,
    pub r_bar_exact: bool,
    /// Lipschitz bound M ≤ 1/r̄ for λ_min on any slice.
    pub m_upper: f64,
    /// Objective value of the initial feasible point π₀ = π(x̄).
    pub z1: f64,
    /// Horizontal diameter at z1 (vertex enumeration; orthant only).
    pub diam_z: Option<f64>,
    /// Relative error of π₀, when z* is known.
    pub rho0: Option<f64>,
    pub budget_alg1: Option<f64>,
    pub budget_alg2: Option<f64>,
}

/// Assemble the geometry constants for an instance. Budgets are filled when
/// both the diameter (orthant instances) and z* are available and π₀ does
/// not already meet the target.
pub fn geometry_report(
    inst: &ConicInstance,
    epsilon: f64,
    limits: EnumLimits,
) -> Result<GeometryReport, OracleError> {
    let radius = inner_radius(inst)?;
    let m_upper = 1.0 / radius.value;
    let x_bar = match &inst.x_bar {
        Some(x) => x.clone(),
        None => default_warm_point(inst).map_err(|e| OracleError::Transform(e.to_string()))?,
    };
    let pi0 = inst
        .cone
        .project_to_boundary(&x_bar, &inst.e)
        .map_err(|e| OracleError::Transform(e.to_string()))?;
    let z1 = dot(&inst.c, &pi0);
    let diam_z = match sublevel_diameter(inst, z1, limits) {
        Ok(d) => Some(d),
        Err(OracleError::UnsupportedCone(_)) => None,
        Err(e) => return Err(e),
    };
    let rho0 = inst
        .z_star
        .map(|z_star| (z1 - z_star) / (inst.c_dot_e() - z_star));
    let (budget_alg1, budget_alg2) = match (diam_z, rho0) {
        (Some(d), Some(r)) if r > epsilon && d.is_finite() => {
            let md = m_upper * d;
            (
                Some(algorithm1_budget(md, epsilon, r)),
                Some(algorithm2_budget(md, epsilon, r)),
            )
        }
        _ => (None, None),
    };
    Ok(GeometryReport {
        r_bar: radius.value,
        r_bar_exact: radius.exact,
        m_upper,
        z1,
        diam_z,
        rho0,
        budget_alg1,
        budget_alg2,
    })
}

/// Deterministic random LP generator for the test harness: first constraint
/// row strictly positive (this bounds the feasible set), `e` drawn positive
/// with `b = Ae`, and instances whose objective is constant on the feasible
/// affine space are rejected and redrawn.
pub fn random_lp(seed: u64, max_n: usize, max_m: usize) -> ConicInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));
    loop {
        let n = rng.random_range(3..=max_n.max(3));
        let m = rng.random_range(1..=max_m.min(n.saturating_sub(2)).max(1));
        let mut triplets = Vec::new();
        for j in 0..n {
            triplets.push((0, j, rng.random_range(0.5..1.5)));
        }
        for i in 1..m {
            for j in 0..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                if v.abs() > 0.15 {
                    triplets.push((i, j, v));
                }
            }
        }
        let a = SparseMatrix::from_triplets(m, n, &triplets).expect("in range");
        let e_raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        let b = a.mul_vec(&e_raw);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

        let cone = ConeSpec::orthant(n);
        let e = match DistinguishedDirection::new(&cone, e_raw) {
            Ok(e) => e,
            Err(_) => continue,
        };
        let inst = ConicInstance {
            cone,
            a,
            b,
            c,
            e,
            z_star: None,
            x_bar: None,
        };
        if !validate_instance(&inst).is_empty() {
            continue;
        }
        // the stacked projector must factor (full rank including the c row)
        if solve_projector(&inst).is_err() {
            continue;
        }
        let z_star = match lp_brute_force(&inst.a, &inst.b, &inst.c, EnumLimits::default()) {
            Ok((z, _)) => z,
            Err(_) => continue,
        };
        if inst.c_dot_e() - z_star < 1e-6 * (1.0 + z_star.abs()) {
            continue;
        }
        return inst;
    }
}

/// Projection onto the nullspace of `A` alone (no objective row); used for
/// facet distances inside the feasible affine space.
pub fn affine_projector(a: &SparseMatrix) -> Result<Projector, OracleError> {
    Projector::for_matrix(a.clone()).map_err(|e| OracleError::Transform(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::svec;
    use crate::cones::ConeSpec;

    fn worked_lp() -> ConicInstance {
        let cone = ConeSpec::orthant(3);
        let e = DistinguishedDirection::new(&cone, vec![1.0, 1.0, 1.0]).unwrap();
        ConicInstance {
            cone,
            a: SparseMatrix::from_dense(1, 3, &[1.0, 1.0, 1.0]).unwrap(),
            b: vec![3.0],
            c: vec![1.0, 0.0, 0.0],
            e,
            z_star: Some(0.0),
            x_bar: Some(vec![0.5, 0.25, 2.25]),
        }
    }

    #[test]
    fn brute_force_worked_examples() {
        let inst = worked_lp();
        let (z, v) = lp_brute_force(&inst.a, &inst.b, &inst.c, EnumLimits::default()).unwrap();
        assert_eq!(z, 0.0);
        assert_eq!(v, vec![0.0, 3.0, 0.0]);

        let (z, _) =
            lp_brute_force(&inst.a, &inst.b, &[1.0, 1.0, 1.0], EnumLimits::default()).unwrap();
        assert_eq!(z, 3.0);
    }

    #[test]
    fn brute_force_infeasible_and_unbounded() {
        let a = SparseMatrix::from_dense(1, 1, &[1.0]).unwrap();
        assert_eq!(
            lp_brute_force(&a, &[-1.0], &[1.0], EnumLimits::default()),
            Err(OracleError::Infeasible)
        );

        // min −x₂ over {x₁ = 1, x ≥ 0}: x₂ is a descent ray
        let a = SparseMatrix::from_dense(1, 2, &[1.0, 0.0]).unwrap();
        assert_eq!(
            lp_brute_force(&a, &[1.0], &[0.0, -1.0], EnumLimits::default()),
            Err(OracleError::Unbounded)
        );
    }

    #[test]
    fn brute_force_respects_limits() {
        let a = SparseMatrix::zeros(0, 20);
        assert!(matches!(
            lp_brute_force(&a, &[], &[1.0; 20], EnumLimits::default()),
            Err(OracleError::EnumerationTooLarge { vars: 20, .. })
        ));
    }

    #[test]
    fn supgradient_checks_pass_on_examples() {
        let cone = ConeSpec::orthant(3);
        let e = DistinguishedDirection::new(&cone, vec![1.0, 1.0, 1.0]).unwrap();
        let chk = finite_diff_supgradient_check(&cone, &[2.0, 0.5, 3.0], &e, 200);
        assert!(chk.max_violation <= 1e-12, "λ_min is locally linear here");
        assert!(chk.pairing_error <= 1e-12);

        let psd = ConeSpec::psd(2);
        let ep = DistinguishedDirection::new(&psd, crate::cones::svec_identity(2)).unwrap();
        let chk = finite_diff_supgradient_check(&psd, &svec(2, &[3.0, 0.0, 0.0, -2.0]), &ep, 200);
        assert!(chk.max_violation <= 1e-9);
        assert!(chk.pairing_error <= 1e-9);

        let soc = ConeSpec::second_order(3);
        let es = DistinguishedDirection::new(&soc, vec![0.0, 0.0, 1.0]).unwrap();
        let chk = finite_diff_supgradient_check(&soc, &[3.0, 4.0, 6.0], &es, 200);
        assert!(chk.max_violation <= 1e-9);
        assert!(chk.pairing_error <= 1e-9);
    }

    #[test]
    fn inner_radius_worked_example() {
        let inst = worked_lp();
        let r = inner_radius(&inst).unwrap();
        assert!(r.exact);
        assert!((r.value - 2.0f64.sqrt()).abs() < 1e-12);

        // Lipschitz constant along the only slice direction (0, 1, −1)/√2
        // is 1/√2, matching 1/r̄ exactly
        let projector = solve_projector(&inst).unwrap();
        let v = projector.project(&[0.0, 1.0, 0.0]);
        let vn = norm2(&v);
        let v: Vec<f64> = v.iter().map(|x| x / vn).collect();
        let quotient = crate::linalg::norm_inf(&v); // |λ(e+tv) − λ(e)|/t for small t
        assert!((quotient - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((quotient - 1.0 / r.value).abs() < 1e-12);
    }

    #[test]
    fn inner_radius_scales_with_e() {
        let cone = ConeSpec::orthant(3);
        let e = DistinguishedDirection::new(&cone, vec![2.0, 2.0, 2.0]).unwrap();
        let inst = ConicInstance {
            cone,
            a: SparseMatrix::from_dense(1, 3, &[1.0, 1.0, 1.0]).unwrap(),
            b: vec![6.0],
            c: vec![1.0, 0.0, 0.0],
            e,
            z_star: Some(0.0),
            x_bar: None,
        };
        let r = inner_radius(&inst).unwrap();
        assert!((r.value - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampled_radius_is_flagged() {
        let cone = ConeSpec::second_order(3);
        let e = DistinguishedDirection::new(&cone, vec![0.0, 0.0, 1.0]).unwrap();
        let inst = ConicInstance {
            cone,
            a: SparseMatrix::zeros(0, 3),
            b: vec![],
            c: vec![0.0, 0.0, 1.0],
            e,
            z_star: None,
            x_bar: None,
        };
        let r = inner_radius(&inst).unwrap();
        assert!(!r.exact);
        assert!(r.value > 0.0);
    }

    #[test]
    fn sublevel_diameter_worked_examples() {
        let inst = worked_lp();
        let d = sublevel_diameter(&inst, 0.5, EnumLimits::default()).unwrap();
        assert!((d - 18.0f64.sqrt()).abs() < 1e-9);

        // empty below z*
        let d = sublevel_diameter(&inst, -0.5, EnumLimits::default()).unwrap();
        assert_eq!(d, f64::NEG_INFINITY);

        // constant objective: the whole simplex
        let mut flat = inst.clone();
        flat.c = vec![1.0, 1.0, 1.0];
        let d = sublevel_diameter(&flat, 3.0, EnumLimits::default()).unwrap();
        assert!((d - 18.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sublevel_diameter_monotone() {
        let inst = worked_lp();
        let mut last = f64::NEG_INFINITY;
        for z in [0.0, 0.25, 0.5, 1.0, 2.0, 3.0] {
            let d = sublevel_diameter(&inst, z, EnumLimits::default()).unwrap();
            assert!(
                d >= last - 1e-12,
                "diameter shrank from {last} to {d} at z = {z}"
            );
            last = d;
        }
    }

    #[test]
    fn geometry_report_fills_budgets() {
        let inst = worked_lp();
        let g = geometry_report(&inst, 0.05, EnumLimits::default()).unwrap();
        assert!((g.r_bar - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((g.m_upper - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((g.z1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((g.rho0.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let b1 = g.budget_alg1.unwrap();
        let b2 = g.budget_alg2.unwrap();
        assert!(b1.is_finite() && b1 > 0.0);
        assert!(b2.is_finite() && b2 > 0.0);
        // reproduce the closed forms
        let md = g.m_upper * g.diam_z.unwrap();
        assert!((b1 - algorithm1_budget(md, 0.05, g.rho0.unwrap())).abs() < 1e-9);
        assert!((b2 - algorithm2_budget(md, 0.05, g.rho0.unwrap())).abs() < 1e-9);
    }

    #[test]
    fn random_lp_is_deterministic_and_valid() {
        let a = random_lp(42, 8, 3);
        let b = random_lp(42, 8, 3);
        assert_eq!(a, b);
        assert!(validate_instance(&a).is_empty());
        let (z, _) = lp_brute_force(&a.a, &a.b, &a.c, EnumLimits::default()).unwrap();
        assert!(a.c_dot_e() > z);
    }
}
