//! Cone oracles built around the boundary-parameter map λ_min.
//!
//! For a closed convex cone `K` with an interior point `e` (the
//! "distinguished direction"), every `x` has a unique scalar
//!
//! ```text
//! λ_min(x) = inf { λ : x − λ e ∉ K }
//! ```
//!
//! so `x − λ_min(x)·e` sits on the boundary of `K`. The map is concave,
//! positively homogeneous along `e` (`λ_min(sx + te) = s·λ_min(x) + t` for
//! `s ≥ 0`), and Lipschitz with constant 1 in the seminorm induced by the
//! largest symmetric body `{v : e ± v ∈ K}`. For the non-negative orthant
//! with `e > 0` it is `min_j x_j/e_j`; for the PSD cone with `e = svec(I)`
//! it is the smallest eigenvalue.
//!
//! A [`ConeSpec`] describes `K` as a collection of primitive blocks, each
//! pinned to a contiguous range of the ambient coordinates. Blocks on
//! disjoint ranges form a product; blocks sharing coordinates intersect.
//! Either way the feasible λ set of each block is a ray `(−∞, λ_block]`, so
//! the composite λ_min is the blockwise minimum. Coordinates covered by no
//! block are unconstrained and invisible to every oracle here.
//!
//! Supgradients are taken with respect to the ambient dot product; the
//! √2-scaled PSD vectorization exists precisely so that this matches the
//! trace inner product on symmetric matrices. Supporting a different
//! computational inner product would need a metric-aware supgradient and is
//! deliberately out of scope.

use crate::linalg::{dot, sym_eigen};
use std::fmt;
use std::ops::Range;

/// λ_min above this value counts as strictly interior.
pub const INTERIOR_TOL: f64 = 1e-10;

/// `project_to_boundary` refuses inputs with λ_min within this distance of 1:
/// the ray from `e` through `x` never exits the cone.
pub const DEGENERATE_RAY_TOL: f64 = 1e-12;

/// Discriminant cutoff (relative to the coefficient scale) below which the
/// second-order-cone quadratic is considered ill-conditioned and λ_min is
/// found by bisection on the membership predicate instead.
pub const SOC_DISCRIMINANT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeError {
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    NonFinite {
        index: usize,
    },
    /// λ_min(x) ≥ 1 − tol: the half-line from `e` through `x` stays in `K`.
    DegenerateRay {
        lambda: f64,
    },
    /// The candidate distinguished direction is not strictly interior.
    NotInterior {
        block: usize,
        detail: String,
    },
    InvalidSpec(String),
}

impl fmt::Display for ConeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeError::DimensionMismatch { expected, got } => {
                write!(f, "expected a vector of length {expected}, got {got}")
            }
            ConeError::NonFinite { index } => {
                write!(f, "coordinate {index} is not finite")
            }
            ConeError::DegenerateRay { lambda } => write!(
                f,
                "lambda_min = {lambda} >= 1: the ray from e through x never exits the cone"
            ),
            ConeError::NotInterior { block, detail } => {
                write!(f, "direction is not interior to block {block}: {detail}")
            }
            ConeError::InvalidSpec(msg) => write!(f, "invalid cone specification: {msg}"),
        }
    }
}

impl std::error::Error for ConeError {}

/// A primitive cone pinned to a contiguous coordinate range.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    /// `{ w : w_j ≥ 0 }` on the whole range.
    Orthant,
    /// PSD cone of symmetric matrices of the given order in scaled (svec)
    /// coordinates, so the ambient dot product is the trace inner product.
    Psd { order: usize },
    /// `{ (u, t) : ‖u‖₂ ≤ t }` with `t` the **last** coordinate of the range.
    SecondOrder,
    /// `{ w : normal·w ≤ w_offset }`; `normal` and `offset` are relative to
    /// the block range. Used for homogenized affine pieces and box faces.
    HalfspaceLift { normal: Vec<f64>, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub kind: BlockKind,
    pub range: Range<usize>,
}

/// Convenience descriptor for the common all-product case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveCone {
    Orthant(usize),
    Psd(usize),
    SecondOrder(usize),
}

impl PrimitiveCone {
    pub fn coords(&self) -> usize {
        match *self {
            PrimitiveCone::Orthant(d) => d,
            PrimitiveCone::Psd(order) => svec_len(order),
            PrimitiveCone::SecondOrder(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    dim: usize,
    blocks: Vec<ConeBlock>,
}

impl ConeSpec {
    /// Validates that every block range is contiguous within bounds, has the
    /// right length for its kind, and that any two ranges are disjoint or
    /// nested (products may leave coordinates uncovered; those are free).
    pub fn new(dim: usize, blocks: Vec<ConeBlock>) -> Result<Self, ConeError> {
        if blocks.is_empty() {
            return Err(ConeError::InvalidSpec("no cone blocks given".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.range.start >= b.range.end || b.range.end > dim {
                return Err(ConeError::InvalidSpec(format!(
                    "block {i} range {:?} is empty or exceeds ambient dimension {dim}",
                    b.range
                )));
            }
            let len = b.range.len();
            match &b.kind {
                BlockKind::Orthant => {}
                BlockKind::Psd { order } => {
                    if len != svec_len(*order) {
                        return Err(ConeError::InvalidSpec(format!(
                            "block {i}: psd of order {order} needs {} coordinates, range has {len}",
                            svec_len(*order)
                        )));
                    }
                }
                BlockKind::SecondOrder => {
                    if len < 2 {
                        return Err(ConeError::InvalidSpec(format!(
                            "block {i}: second-order cone needs at least 2 coordinates"
                        )));
                    }
                }
                BlockKind::HalfspaceLift { normal, offset } => {
                    if normal.len() != len {
                        return Err(ConeError::InvalidSpec(format!(
                            "block {i}: halfspace normal length {} does not match range length {len}",
                            normal.len()
                        )));
                    }
                    if *offset >= len {
                        return Err(ConeError::InvalidSpec(format!(
                            "block {i}: halfspace offset coordinate {offset} outside range"
                        )));
                    }
                    if normal.iter().any(|v| !v.is_finite()) {
                        return Err(ConeError::InvalidSpec(format!(
                            "block {i}: halfspace normal has non-finite entries"
                        )));
                    }
                }
            }
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let a = &blocks[i].range;
                let b = &blocks[j].range;
                let disjoint = a.end <= b.start || b.end <= a.start;
                let nested = (a.start <= b.start && b.end <= a.end)
                    || (b.start <= a.start && a.end <= b.end);
                if !disjoint && !nested {
                    return Err(ConeError::InvalidSpec(format!(
                        "blocks {i} and {j} overlap partially ({:?} vs {:?}); ranges must be disjoint or nested",
                        a, b
                    )));
                }
            }
        }
        Ok(ConeSpec { dim, blocks })
    }

    pub fn orthant(dim: usize) -> Self {
        ConeSpec::new(
            dim,
            vec![ConeBlock {
                kind: BlockKind::Orthant,
                range: 0..dim,
            }],
        )
        .expect("orthant spec is valid")
    }

    pub fn psd(order: usize) -> Self {
        let dim = svec_len(order);
        ConeSpec::new(
            dim,
            vec![ConeBlock {
                kind: BlockKind::Psd { order },
                range: 0..dim,
            }],
        )
        .expect("psd spec is valid")
    }

    pub fn second_order(dim: usize) -> Self {
        ConeSpec::new(
            dim,
            vec![ConeBlock {
                kind: BlockKind::SecondOrder,
                range: 0..dim,
            }],
        )
        .expect("second-order spec is valid")
    }

    /// Product of primitive cones laid out consecutively from coordinate 0.
    pub fn product(parts: &[PrimitiveCone]) -> Result<Self, ConeError> {
        let mut blocks = Vec::with_capacity(parts.len());
        let mut at = 0;
        for p in parts {
            let len = p.coords();
            let kind = match *p {
                PrimitiveCone::Orthant(_) => BlockKind::Orthant,
                PrimitiveCone::Psd(order) => BlockKind::Psd { order },
                PrimitiveCone::SecondOrder(_) => BlockKind::SecondOrder,
            };
            blocks.push(ConeBlock {
                kind,
                range: at..at + len,
            });
            at += len;
        }
        ConeSpec::new(at, blocks)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    /// True when every ambient coordinate is covered by at least one block.
    pub fn is_fully_covered(&self) -> bool {
        let mut covered = vec![false; self.dim];
        for b in &self.blocks {
            for c in covered[b.range.clone()].iter_mut() {
                *c = true;
            }
        }
        covered.into_iter().all(|c| c)
    }

    fn check_vector(&self, x: &[f64]) -> Result<(), ConeError> {
        if x.len() != self.dim {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(ConeError::NonFinite { index });
        }
        Ok(())
    }

    /// The boundary parameter λ_min(x) with respect to `e`.
    ///
    /// Each block's feasible λ set is a ray `(−∞, λ_block]`, so the composite
    /// value is the minimum over blocks. Satisfies
    /// `λ_min(sx + te) = s·λ_min(x) + t` for `s ≥ 0`.
    pub fn lambda_min(&self, x: &[f64], e: &DistinguishedDirection) -> Result<f64, ConeError> {
        self.check_vector(x)?;
        self.check_vector(e.as_slice())?;
        let mut best = f64::INFINITY;
        for b in &self.blocks {
            let lam = block_lambda_min(b, &x[b.range.clone()], &e.as_slice()[b.range.clone()]);
            if lam < best {
                best = lam;
            }
        }
        Ok(best)
    }

    /// One supgradient `g` of λ_min at `x`: `⟨g, e⟩ = 1` and
    /// `λ_min(y) ≤ λ_min(x) + ⟨g, y − x⟩` for all `y`.
    ///
    /// Ties between blocks go to the lowest block index; within an orthant
    /// block to the lowest achieving coordinate; for PSD blocks the
    /// eigenvector comes from the deterministic Jacobi solver.
    pub fn supgradient(
        &self,
        x: &[f64],
        e: &DistinguishedDirection,
    ) -> Result<Vec<f64>, ConeError> {
        self.check_vector(x)?;
        self.check_vector(e.as_slice())?;
        let mut best = f64::INFINITY;
        let mut best_block = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            let lam = block_lambda_min(b, &x[b.range.clone()], &e.as_slice()[b.range.clone()]);
            if lam < best {
                best = lam;
                best_block = i;
            }
        }
        let b = &self.blocks[best_block];
        let g_block =
            block_supgradient(b, &x[b.range.clone()], &e.as_slice()[b.range.clone()], best);
        let mut g = vec![0.0; self.dim];
        g[b.range.clone()].copy_from_slice(&g_block);
        Ok(g)
    }

    /// The radial projection `π(x) = e + (x − e)/(1 − λ_min(x))`, the point
    /// where the half-line from `e` through `x` meets the boundary of `K`.
    pub fn project_to_boundary(
        &self,
        x: &[f64],
        e: &DistinguishedDirection,
    ) -> Result<Vec<f64>, ConeError> {
        let lam = self.lambda_min(x, e)?;
        if lam >= 1.0 - DEGENERATE_RAY_TOL {
            return Err(ConeError::DegenerateRay { lambda: lam });
        }
        let inv = 1.0 / (1.0 - lam);
        Ok(x.iter()
            .zip(e.as_slice())
            .map(|(xi, ei)| ei + inv * (xi - ei))
            .collect())
    }

    /// Seminorm of the symmetric body `{v : e ± v ∈ K}`:
    /// `‖v‖∞ = max(−λ_min(v), −λ_min(−v))`, which follows from
    /// `{t : te ± v ∈ K} = [−λ_min(±v), ∞)`.
    pub fn seminorm_inf(&self, v: &[f64], e: &DistinguishedDirection) -> Result<f64, ConeError> {
        let lam_pos = self.lambda_min(v, e)?;
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let lam_neg = self.lambda_min(&neg, e)?;
        Ok((-lam_pos).max(-lam_neg).max(0.0))
    }

    /// `λ_min(x) > INTERIOR_TOL`. Malformed input is simply not interior.
    pub fn is_interior(&self, x: &[f64], e: &DistinguishedDirection) -> bool {
        self.lambda_min(x, e)
            .map(|lam| lam > INTERIOR_TOL)
            .unwrap_or(false)
    }

    /// Strict interiority of `e` restricted to every block; used when
    /// constructing a [`DistinguishedDirection`].
    fn check_interior_direction(&self, e: &[f64]) -> Result<(), ConeError> {
        self.check_vector(e)?;
        for (i, b) in self.blocks.iter().enumerate() {
            block_check_interior(b, &e[b.range.clone()])
                .map_err(|detail| ConeError::NotInterior { block: i, detail })?;
        }
        Ok(())
    }
}

/// A strictly interior point of a [`ConeSpec`], validated at construction.
/// By the affine identity, λ_min(e) = 1 with respect to itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinguishedDirection {
    values: Vec<f64>,
}

impl DistinguishedDirection {
    pub fn new(cone: &ConeSpec, values: Vec<f64>) -> Result<Self, ConeError> {
        cone.check_interior_direction(&values)?;
        Ok(DistinguishedDirection { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl AsRef<[f64]> for DistinguishedDirection {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

// ---------------------------------------------------------------------------
// svec: scaled vectorization of symmetric matrices
// ---------------------------------------------------------------------------

/// Number of svec coordinates for a symmetric matrix of the given order.
pub fn svec_len(order: usize) -> usize {
    order * (order + 1) / 2
}

/// Scaled vectorization: lower triangle in row-major order, off-diagonal
/// entries multiplied by √2, so `svec(X)·svec(Y) = tr(XY)`.
pub fn svec(order: usize, dense_row_major: &[f64]) -> Vec<f64> {
    assert_eq!(dense_row_major.len(), order * order, "svec: shape mismatch");
    let mut out = Vec::with_capacity(svec_len(order));
    for i in 0..order {
        for j in 0..=i {
            let v = dense_row_major[i * order + j];
            out.push(if i == j {
                v
            } else {
                std::f64::consts::SQRT_2 * v
            });
        }
    }
    out
}

/// Inverse of [`svec`], producing a dense row-major symmetric matrix.
pub fn unsvec(order: usize, s: &[f64]) -> Vec<f64> {
    assert_eq!(s.len(), svec_len(order), "unsvec: length mismatch");
    let mut out = vec![0.0; order * order];
    let mut k = 0;
    for i in 0..order {
        for j in 0..=i {
            let v = if i == j {
                s[k]
            } else {
                s[k] / std::f64::consts::SQRT_2
            };
            out[i * order + j] = v;
            out[j * order + i] = v;
            k += 1;
        }
    }
    out
}

pub fn svec_identity(order: usize) -> Vec<f64> {
    let mut id = vec![0.0; order * order];
    for i in 0..order {
        id[i * order + i] = 1.0;
    }
    svec(order, &id)
}

// ---------------------------------------------------------------------------
// per-block oracles
// ---------------------------------------------------------------------------

fn block_lambda_min(block: &ConeBlock, x: &[f64], e: &[f64]) -> f64 {
    match &block.kind {
        BlockKind::Orthant => orthant_lambda_min(x, e).0,
        BlockKind::Psd { order } => psd_lambda_min(*order, x, e).0,
        BlockKind::SecondOrder => soc_lambda_min(x, e),
        BlockKind::HalfspaceLift { normal, offset } => halfspace_lambda_min(normal, *offset, x, e),
    }
}

fn block_supgradient(block: &ConeBlock, x: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    match &block.kind {
        BlockKind::Orthant => {
            let (_, k) = orthant_lambda_min(x, e);
            let mut g = vec![0.0; x.len()];
            g[k] = 1.0 / e[k];
            g
        }
        BlockKind::Psd { order } => psd_supgradient(*order, x, e),
        BlockKind::SecondOrder => soc_supgradient(x, e, lambda),
        BlockKind::HalfspaceLift { normal, offset } => {
            // λ is affine here; the gradient is (normal − u_offset)/(normal·e − e_offset)
            let denom = dot(normal, e) - e[*offset];
            let mut g: Vec<f64> = normal.iter().map(|v| v / denom).collect();
            g[*offset] -= 1.0 / denom;
            g
        }
    }
}

fn block_check_interior(block: &ConeBlock, e: &[f64]) -> Result<(), String> {
    if let Some(i) = e.iter().position(|v| !v.is_finite()) {
        return Err(format!("coordinate {i} of the direction is not finite"));
    }
    match &block.kind {
        BlockKind::Orthant => {
            if let Some(i) = e.iter().position(|&v| v <= 0.0) {
                return Err(format!("orthant coordinate {i} is {} <= 0", e[i]));
            }
            Ok(())
        }
        BlockKind::Psd { order } => {
            let mat = unsvec(*order, e);
            let (vals, _) = sym_eigen(*order, &mat);
            if vals[0] <= 0.0 {
                return Err(format!("psd direction has minimum eigenvalue {}", vals[0]));
            }
            Ok(())
        }
        BlockKind::SecondOrder => {
            let d = e.len();
            let u_norm = crate::linalg::norm2(&e[..d - 1]);
            if u_norm >= e[d - 1] {
                return Err(format!(
                    "second-order direction has ‖u‖ = {u_norm} >= t = {}",
                    e[d - 1]
                ));
            }
            Ok(())
        }
        BlockKind::HalfspaceLift { normal, offset } => {
            let slack = e[*offset] - dot(normal, e);
            if slack <= 0.0 {
                return Err(format!("halfspace slack at the direction is {slack} <= 0"));
            }
            Ok(())
        }
    }
}

fn orthant_lambda_min(x: &[f64], e: &[f64]) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (j, (&xj, &ej)) in x.iter().zip(e).enumerate() {
        let r = xj / ej;
        if r < best {
            best = r;
            arg = j;
        }
    }
    (best, arg)
}

/// Whether the svec coordinates encode an exact identity matrix, the common
/// default direction for PSD blocks.
fn psd_is_identity(order: usize, e: &[f64]) -> bool {
    let mut k = 0;
    for i in 0..order {
        for j in 0..=i {
            let want = if i == j { 1.0 } else { 0.0 };
            if e[k] != want {
                return false;
            }
            k += 1;
        }
    }
    true
}

/// λ_min of a PSD block with direction E is the smallest eigenvalue of
/// `E^{-1/2} X E^{-1/2}`; with E = I it is the smallest eigenvalue of X.
fn psd_lambda_min(order: usize, x: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
    let mat = unsvec(order, x);
    if psd_is_identity(order, e) {
        let (vals, vecs) = sym_eigen(order, &mat);
        let v: Vec<f64> = (0..order).map(|i| vecs[i * order]).collect();
        return (vals[0], v);
    }
    let s = psd_inverse_sqrt(order, e);
    let w = sym_sandwich(order, &s, &mat);
    let (vals, vecs) = sym_eigen(order, &w);
    // map the eigenvector back so that g = svec(u uᵀ) pairs to 1 with e
    let v: Vec<f64> = (0..order).map(|i| vecs[i * order]).collect();
    let u = mat_vec(order, &s, &v);
    (vals[0], u)
}

fn psd_supgradient(order: usize, x: &[f64], e: &[f64]) -> Vec<f64> {
    let (_, u) = psd_lambda_min(order, x, e);
    let mut outer = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            outer[i * order + j] = u[i] * u[j];
        }
    }
    svec(order, &outer)
}

fn psd_inverse_sqrt(order: usize, e: &[f64]) -> Vec<f64> {
    let mat = unsvec(order, e);
    let (vals, vecs) = sym_eigen(order, &mat);
    // interiority was validated when the direction was constructed
    let mut out = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            let mut acc = 0.0;
            for k in 0..order {
                acc += vecs[i * order + k] * vecs[j * order + k] / vals[k].sqrt();
            }
            out[i * order + j] = acc;
        }
    }
    out
}

fn sym_sandwich(order: usize, s: &[f64], x: &[f64]) -> Vec<f64> {
    // S X S with symmetric S
    let mut tmp = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            let mut acc = 0.0;
            for k in 0..order {
                acc += s[i * order + k] * x[k * order + j];
            }
            tmp[i * order + j] = acc;
        }
    }
    let mut out = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            let mut acc = 0.0;
            for k in 0..order {
                acc += tmp[i * order + k] * s[k * order + j];
            }
            out[i * order + j] = acc;
        }
    }
    // symmetrize rounding
    for i in 0..order {
        for j in 0..i {
            let m = 0.5 * (out[i * order + j] + out[j * order + i]);
            out[i * order + j] = m;
            out[j * order + i] = m;
        }
    }
    out
}

fn mat_vec(order: usize, m: &[f64], v: &[f64]) -> Vec<f64> {
    (0..order)
        .map(|i| (0..order).map(|j| m[i * order + j] * v[j]).sum())
        .collect()
}

/// Membership boundary for `‖u − λ e_u‖² = (t − λ e_t)²` with `t − λ e_t ≥ 0`.
/// The quadratic `aλ² + bλ + c` has `a < 0` for interior `e`, and the smaller
/// root is λ_min. Falls back to bisection when the discriminant is tiny.
fn soc_lambda_min(x: &[f64], e: &[f64]) -> f64 {
    let d = x.len();
    let (u, t) = (&x[..d - 1], x[d - 1]);
    let (eu, et) = (&e[..d - 1], e[d - 1]);
    let a = dot(eu, eu) - et * et;
    let b = 2.0 * (t * et - dot(u, eu));
    let c = dot(u, u) - t * t;
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs());
    if scale < f64::MIN_POSITIVE {
        return 0.0;
    }
    if disc < SOC_DISCRIMINANT_TOL * scale {
        return soc_lambda_min_bisect(u, t, eu, et);
    }
    let sqrt_disc = disc.sqrt();
    if b >= 0.0 {
        -2.0 * c / (b + sqrt_disc)
    } else {
        (-b + sqrt_disc) / (2.0 * a)
    }
}

fn soc_member(u: &[f64], t: f64, eu: &[f64], et: f64, lam: f64) -> bool {
    let shifted: Vec<f64> = u.iter().zip(eu).map(|(ui, ei)| ui - lam * ei).collect();
    crate::linalg::norm2(&shifted) <= t - lam * et
}

fn soc_lambda_min_bisect(u: &[f64], t: f64, eu: &[f64], et: f64) -> f64 {
    let u_norm = crate::linalg::norm2(u);
    let eu_gap = et - crate::linalg::norm2(eu); // > 0 for interior e
    let mut hi = t / et + 1.0 + (t / et).abs();
    let mut lo = -(1.0f64).max((u_norm - t) / eu_gap + 1.0);
    debug_assert!(soc_member(u, t, eu, et, lo));
    let width_tol = 1e-16 * (1.0 + lo.abs().max(hi.abs()));
    for _ in 0..300 {
        if hi - lo <= width_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if soc_member(u, t, eu, et, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn soc_supgradient(x: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let d = x.len();
    let (eu, et) = (&e[..d - 1], e[d - 1]);
    // boundary point p = x − λe; its u-part drives the normal cone direction
    let pu: Vec<f64> = x[..d - 1]
        .iter()
        .zip(eu)
        .map(|(ui, ei)| ui - lambda * ei)
        .collect();
    let pu_norm = crate::linalg::norm2(&pu);
    let scale = crate::linalg::norm_inf(x)
        .max(crate::linalg::norm_inf(e))
        .max(1.0);
    let mut g = vec![0.0; d];
    if pu_norm <= 1e-14 * scale {
        // apex: any g with ⟨g, e⟩ = 1 and −g in the polar cone works
        g[d - 1] = 1.0 / et;
        return g;
    }
    let denom = et - dot(&pu, eu) / pu_norm; // > 0 since ‖eu‖ < et
    for i in 0..d - 1 {
        g[i] = -pu[i] / (pu_norm * denom);
    }
    g[d - 1] = 1.0 / denom;
    g
}

fn halfspace_lambda_min(normal: &[f64], offset: usize, x: &[f64], e: &[f64]) -> f64 {
    // w − λe ∈ {n·w ≤ w_offset}  ⟺  λ ≤ (n·x − x_offset)/(n·e − e_offset),
    // the denominator being negative for interior e.
    (dot(normal, x) - x[offset]) / (dot(normal, e) - e[offset])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dd(cone: &ConeSpec, e: Vec<f64>) -> DistinguishedDirection {
        DistinguishedDirection::new(cone, e).unwrap()
    }

    #[test]
    fn orthant_lambda_min_examples() {
        let cone = ConeSpec::orthant(3);
        let e = dd(&cone, vec![1.0, 1.0, 1.0]);
        assert_eq!(cone.lambda_min(&[2.0, 0.5, 3.0], &e).unwrap(), 0.5);
        assert_eq!(cone.lambda_min(e.as_slice(), &e).unwrap(), 1.0);

        let cone2 = ConeSpec::orthant(2);
        let e2 = dd(&cone2, vec![2.0, 1.0]);
        assert_eq!(cone2.lambda_min(&[3.0, -1.0], &e2).unwrap(), -1.0);
    }

    #[test]
    fn psd_lambda_min_diagonal() {
        let cone = ConeSpec::psd(2);
        let e = dd(&cone, svec_identity(2));
        let x = svec(2, &[3.0, 0.0, 0.0, -2.0]);
        assert_eq!(cone.lambda_min(&x, &e).unwrap(), -2.0);
        assert!(!cone.is_interior(&svec(2, &[1.0, 0.0, 0.0, -1e-3]), &e));
    }

    #[test]
    fn psd_general_direction_scales_eigenvalues() {
        // with E = diag(2, 1/2), λ_min(X) = min eig of E^{-1/2} X E^{-1/2};
        // for X = I that is min(1/2, 2) = 1/2
        let cone = ConeSpec::psd(2);
        let e = dd(&cone, svec(2, &[2.0, 0.0, 0.0, 0.5]));
        let x = svec_identity(2);
        let lam = cone.lambda_min(&x, &e).unwrap();
        assert!((lam - 0.5).abs() < 1e-12);
        assert!((cone.lambda_min(e.as_slice(), &e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn soc_lambda_min_closed_form() {
        let cone = ConeSpec::second_order(3);
        let e = dd(&cone, vec![0.0, 0.0, 1.0]);
        let lam = cone.lambda_min(&[3.0, 4.0, 6.0], &e).unwrap();
        assert!((lam - 1.0).abs() < 1e-12, "t − ‖u‖ = 6 − 5 = 1");
    }

    #[test]
    fn soc_quadratic_agrees_with_bisection_oracle() {
        // independent route: bisect the membership predicate directly
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cone = ConeSpec::second_order(4);
        for _ in 0..200 {
            let mut ev: Vec<f64> = (0..3).map(|_| rng.random_range(-0.4..0.4)).collect();
            ev.push(rng.random_range(1.0..2.0));
            let e = dd(&cone, ev.clone());
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lam = cone.lambda_min(&x, &e).unwrap();
            let oracle = soc_lambda_min_bisect(&x[..3], x[3], &ev[..3], ev[3]);
            assert!(
                (lam - oracle).abs() < 1e-9 * (1.0 + lam.abs()),
                "quadratic {lam} vs bisection {oracle}"
            );
        }
    }

    #[test]
    fn soc_degenerate_quadratic_falls_back() {
        // x exactly along e: double root at the common scale
        let cone = ConeSpec::second_order(3);
        let e = dd(&cone, vec![0.3, 0.1, 1.0]);
        let x: Vec<f64> = e.as_slice().iter().map(|v| 2.0 * v).collect();
        let lam = cone.lambda_min(&x, &e).unwrap();
        assert!((lam - 2.0).abs() < 1e-9);
    }

    #[test]
    fn supgradient_examples() {
        let cone = ConeSpec::orthant(3);
        let e = dd(&cone, vec![1.0, 1.0, 1.0]);
        assert_eq!(
            cone.supgradient(&[2.0, 0.5, 3.0], &e).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        // tie at the first two coordinates: lowest index wins
        assert_eq!(
            cone.supgradient(&[1.0, 1.0, 2.0], &e).unwrap(),
            vec![1.0, 0.0, 0.0]
        );

        let psd = ConeSpec::psd(2);
        let ep = dd(&psd, svec_identity(2));
        let g = psd
            .supgradient(&svec(2, &[3.0, 0.0, 0.0, -2.0]), &ep)
            .unwrap();
        let want = svec(2, &[0.0, 0.0, 0.0, 1.0]);
        for (a, b) in g.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }

        let soc = ConeSpec::second_order(3);
        let es = dd(&soc, vec![0.0, 0.0, 1.0]);
        let g = soc.supgradient(&[3.0, 4.0, 6.0], &es).unwrap();
        assert!((g[0] + 0.6).abs() < 1e-12);
        assert!((g[1] + 0.8).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn soc_apex_supgradient_is_valid() {
        let cone = ConeSpec::second_order(3);
        let e = dd(&cone, vec![0.0, 0.0, 2.0]);
        // x = 3e has boundary point at the apex
        let x = vec![0.0, 0.0, 6.0];
        let g = cone.supgradient(&x, &e).unwrap();
        assert!((dot(&g, e.as_slice()) - 1.0).abs() < 1e-12);
        let lam_x = cone.lambda_min(&x, &e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let lam_y = cone.lambda_min(&y, &e).unwrap();
            let lin = lam_x + dot(&g, &axdiff(&y, &x));
            assert!(lam_y <= lin + 1e-9);
        }
    }

    fn axdiff(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    #[test]
    fn boundary_projection_examples() {
        let cone = ConeSpec::orthant(2);
        let e = dd(&cone, vec![1.0, 1.0]);
        let pi = cone.project_to_boundary(&[-1.0, 3.0], &e).unwrap();
        assert_eq!(pi, vec![0.0, 2.0]);

        // identity on the boundary
        let x = vec![0.0, 2.0];
        assert_eq!(cone.project_to_boundary(&x, &e).unwrap(), x);

        match cone.project_to_boundary(&[1.0, 1.0], &e) {
            Err(ConeError::DegenerateRay { lambda }) => assert!((lambda - 1.0).abs() < 1e-12),
            other => panic!("expected DegenerateRay, got {other:?}"),
        }
    }

    #[test]
    fn seminorm_examples() {
        let cone = ConeSpec::orthant(3);
        let e = dd(&cone, vec![1.0, 1.0, 1.0]);
        assert_eq!(cone.seminorm_inf(&[1.0, -2.0, 0.0], &e).unwrap(), 2.0);
        assert_eq!(cone.seminorm_inf(&[0.0, 0.0, 0.0], &e).unwrap(), 0.0);
        assert_eq!(cone.seminorm_inf(&[1.0, 1.0, 1.0], &e).unwrap(), 1.0);
    }

    #[test]
    fn interior_examples() {
        let cone = ConeSpec::orthant(2);
        let e = dd(&cone, vec![1.0, 1.0]);
        assert!(cone.is_interior(&[0.1, 5.0], &e));
        assert!(!cone.is_interior(&[0.0, 2.0], &e));
    }

    #[test]
    fn halfspace_block_oracles() {
        // {(w0, w1) : 2 w0 ≤ w1} with e = (0, 1)
        let cone = ConeSpec::new(
            2,
            vec![ConeBlock {
                kind: BlockKind::HalfspaceLift {
                    normal: vec![2.0, 0.0],
                    offset: 1,
                },
                range: 0..2,
            }],
        )
        .unwrap();
        let e = dd(&cone, vec![0.0, 1.0]);
        // λ = (2x0 − x1)/(2e0 − e1) = (2·1 − 0)/(−1) = −2
        assert_eq!(cone.lambda_min(&[1.0, 0.0], &e).unwrap(), -2.0);
        let g = cone.supgradient(&[1.0, 0.0], &e).unwrap();
        assert!((dot(&g, e.as_slice()) - 1.0).abs() < 1e-12);
        assert_eq!(g, vec![-2.0, 1.0]);
    }

    #[test]
    fn composite_product_is_blockwise_min() {
        let cone = ConeSpec::product(&[
            PrimitiveCone::Orthant(2),
            PrimitiveCone::Psd(2),
            PrimitiveCone::SecondOrder(3),
        ])
        .unwrap();
        let mut ev = vec![1.0, 2.0];
        ev.extend(svec_identity(2));
        ev.extend([0.1, 0.0, 1.0]);
        let e = dd(&cone, ev.clone());

        let mut x = vec![0.4, -1.0];
        x.extend(svec(2, &[2.0, 0.3, 0.3, 1.0]));
        x.extend([1.0, 1.0, 3.0]);
        let lam = cone.lambda_min(&x, &e).unwrap();

        let orthant = ConeSpec::orthant(2);
        let eo = dd(&orthant, ev[..2].to_vec());
        let psd = ConeSpec::psd(2);
        let ep = dd(&psd, ev[2..5].to_vec());
        let soc = ConeSpec::second_order(3);
        let es = dd(&soc, ev[5..].to_vec());
        let parts = [
            orthant.lambda_min(&x[..2], &eo).unwrap(),
            psd.lambda_min(&x[2..5], &ep).unwrap(),
            soc.lambda_min(&x[5..], &es).unwrap(),
        ];
        let want = parts.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!((lam - want).abs() <= 1e-12);
    }

    #[test]
    fn nested_intersection_ranges_allowed() {
        // orthant on a sub-range of a halfspace over the full range
        let cone = ConeSpec::new(
            3,
            vec![
                ConeBlock {
                    kind: BlockKind::Orthant,
                    range: 0..2,
                },
                ConeBlock {
                    kind: BlockKind::HalfspaceLift {
                        normal: vec![1.0, 0.0, 0.0],
                        offset: 2,
                    },
                    range: 0..3,
                },
            ],
        )
        .unwrap();
        let e = dd(&cone, vec![1.0, 1.0, 2.0]);
        let lam = cone.lambda_min(&[0.5, 3.0, 1.0], &e).unwrap();
        // orthant gives 0.5, halfspace gives (0.5 − 1)/(1 − 2) = 0.5: tie
        assert!((lam - 0.5).abs() < 1e-12);
        // the tie goes to the lower block index (the orthant)
        let g = cone.supgradient(&[0.5, 3.0, 1.0], &e).unwrap();
        assert_eq!(g, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn partial_overlap_rejected() {
        let err = ConeSpec::new(
            3,
            vec![
                ConeBlock {
                    kind: BlockKind::Orthant,
                    range: 0..2,
                },
                ConeBlock {
                    kind: BlockKind::Orthant,
                    range: 1..3,
                },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ConeError::InvalidSpec(_)));
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let cone = ConeSpec::orthant(2);
        let e = dd(&cone, vec![1.0, 1.0]);
        assert!(matches!(
            cone.lambda_min(&[1.0], &e),
            Err(ConeError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            cone.lambda_min(&[1.0, f64::NAN], &e),
            Err(ConeError::NonFinite { index: 1 })
        ));
        assert!(DistinguishedDirection::new(&cone, vec![1.0, -1.0]).is_err());
    }

    // ------------------------------------------------------------------
    // randomized properties
    // ------------------------------------------------------------------

    #[derive(Clone, Debug)]
    enum Family {
        Orthant,
        Psd,
        Soc,
        Product,
    }

    fn build_family(which: &Family, seed: u64) -> (ConeSpec, DistinguishedDirection, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match which {
            Family::Orthant => {
                let n = 4;
                let cone = ConeSpec::orthant(n);
                let ev: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
                let e = DistinguishedDirection::new(&cone, ev).unwrap();
                (cone, e, n)
            }
            Family::Psd => {
                let order = 3;
                let cone = ConeSpec::psd(order);
                let ev = if seed.is_multiple_of(2) {
                    svec_identity(order)
                } else {
                    // random well-conditioned SPD direction
                    let mut m = vec![0.0; order * order];
                    for i in 0..order {
                        for j in 0..=i {
                            let v = rng.random_range(-0.3..0.3);
                            m[i * order + j] = v;
                            m[j * order + i] = v;
                        }
                        m[i * order + i] += rng.random_range(1.0..2.0);
                    }
                    svec(order, &m)
                };
                let e = DistinguishedDirection::new(&cone, ev).unwrap();
                (cone, e, svec_len(order))
            }
            Family::Soc => {
                let d = 4;
                let cone = ConeSpec::second_order(d);
                let mut ev: Vec<f64> = (0..d - 1).map(|_| rng.random_range(-0.3..0.3)).collect();
                ev.push(rng.random_range(1.0..2.0));
                let e = DistinguishedDirection::new(&cone, ev).unwrap();
                (cone, e, d)
            }
            Family::Product => {
                let cone =
                    ConeSpec::product(&[PrimitiveCone::Orthant(2), PrimitiveCone::SecondOrder(3)])
                        .unwrap();
                let mut ev: Vec<f64> = (0..2).map(|_| rng.random_range(0.5..2.0)).collect();
                ev.extend([0.1, -0.1, 1.5]);
                let e = DistinguishedDirection::new(&cone, ev).unwrap();
                (cone, e, 5)
            }
        }
    }

    fn family_strategy() -> impl Strategy<Value = Family> {
        prop_oneof![
            Just(Family::Orthant),
            Just(Family::Psd),
            Just(Family::Soc),
            Just(Family::Product),
        ]
    }

    proptest! {
        #[test]
        fn affine_identity(which in family_strategy(), seed in 0u64..5000,
                           s in 0.0f64..10.0, t in -10.0f64..10.0) {
            let (cone, e, n) = build_family(&which, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lam = cone.lambda_min(&x, &e).unwrap();
            let y: Vec<f64> = x.iter().zip(e.as_slice())
                .map(|(xi, ei)| s * xi + t * ei).collect();
            let lam_y = cone.lambda_min(&y, &e).unwrap();
            prop_assert!((lam_y - (s * lam + t)).abs() <= 1e-9 * (1.0 + lam.abs()));
        }

        #[test]
        fn lipschitz_in_seminorm(which in family_strategy(), seed in 0u64..5000) {
            let (cone, e, n) = build_family(&which, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1234);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lx = cone.lambda_min(&x, &e).unwrap();
            let ly = cone.lambda_min(&y, &e).unwrap();
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let sn = cone.seminorm_inf(&diff, &e).unwrap();
            prop_assert!((lx - ly).abs() <= sn + 1e-9);
        }

        #[test]
        fn supgradient_is_valid(which in family_strategy(), seed in 0u64..5000) {
            let (cone, e, n) = build_family(&which, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = cone.supgradient(&x, &e).unwrap();
            prop_assert!((dot(&g, e.as_slice()) - 1.0).abs() <= 1e-9);
            let lam_x = cone.lambda_min(&x, &e).unwrap();
            for _ in 0..100 {
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let lam_y = cone.lambda_min(&y, &e).unwrap();
                let lin = lam_x + dot(&g, &axdiff(&y, &x));
                prop_assert!(lam_y <= lin + 1e-9,
                    "concavity violated: λ(y) = {lam_y} > {lin}");
            }
        }

        #[test]
        fn boundary_projection_residual(which in family_strategy(), seed in 0u64..5000) {
            let (cone, e, n) = build_family(&which, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lam = cone.lambda_min(&x, &e).unwrap();
            prop_assume!(lam <= 1.0 - 1e-6);
            let pi = cone.project_to_boundary(&x, &e).unwrap();
            let resid = cone.lambda_min(&pi, &e).unwrap();
            prop_assert!(resid.abs() <= 1e-8);
        }

        #[test]
        fn seminorm_is_absolutely_homogeneous(which in family_strategy(), seed in 0u64..5000,
                                              t in -4.0f64..4.0) {
            let (cone, e, n) = build_family(&which, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let sv = cone.seminorm_inf(&v, &e).unwrap();
            let tv: Vec<f64> = v.iter().map(|x| t * x).collect();
            let stv = cone.seminorm_inf(&tv, &e).unwrap();
            prop_assert!((stv - t.abs() * sv).abs() <= 1e-9 * (1.0 + sv));
            prop_assert!(sv >= 0.0);
        }
    }

    #[test]
    fn svec_round_trip_and_trace_inner_product() {
        let x = [3.0, 1.0, 1.0, -2.0];
        let y = [1.0, 0.5, 0.5, 4.0];
        let sx = svec(2, &x);
        let sy = svec(2, &y);
        let trace_xy: f64 = 3.0 * 1.0 + 1.0 * 0.5 + 1.0 * 0.5 + (-2.0) * 4.0;
        assert!((dot(&sx, &sy) - trace_xy).abs() < 1e-12);
        let back = unsvec(2, &sx);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(norm2(&svec_identity(3)), 3.0f64.sqrt());
    }
}
