//! Problem files, iterate logs, and run summaries.
//!
//! Three bit-exact contracts live here:
//!
//! * **Problem file** (JSON): `blocks` (consecutive orthant/psd/soc blocks),
//!   `A` as `{rows, cols, triplets}`, dense `b`, `c`, `e`, optional `x_bar`
//!   and `z_star`, or an `epigraph` object (`pieces`, `set`, `x_tilde`,
//!   `f_hat`) replacing `blocks`/`c`/`e`.
//! * **Iterate log** (JSONL): one record per iterate with keys
//!   `k, outer, lambda, g_norm, obj_pi, rel_err, restarted`.
//! * **Summary** (JSON): termination, iterations, best objective, boundary
//!   residual, geometry budgets when available, findings otherwise.
//!
//! Every float is rendered with 17 significant digits (`{:.16e}`), which
//! round-trips f64 exactly and keeps logs byte-identical across runs.

use crate::cones::PrimitiveCone;
use crate::epigraph::{build_epigraph_instance, AffinePiece, EpigraphModel, SimpleSet};
use crate::linalg::SparseMatrix;
use crate::oracles::GeometryReport;
use crate::solvers::RunReport;
use crate::transform::{build_instance, ConicInstance, Finding};
use crate::ConeSpec;
use serde_json::Value;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    Parse { path: String, detail: String },
    Validation(Vec<Finding>),
    Epigraph(String),
    Unsupported(String),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "i/o failure: {e}"),
            IoError::Parse { path, detail } => write!(f, "bad problem file at {path}: {detail}"),
            IoError::Validation(findings) => {
                write!(f, "instance failed validation:")?;
                for fd in findings {
                    write!(f, " [{}] {};", fd.code.as_str(), fd.message)?;
                }
                Ok(())
            }
            IoError::Epigraph(msg) => write!(f, "epigraph model rejected: {msg}"),
            IoError::Unsupported(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ParsedProblem {
    Conic(ConicInstance),
    Epigraph(Box<EpigraphModel>),
}

/// 17 significant digits: enough to reproduce any f64 bit for bit.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "null".to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(","))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

fn parse_err(path: &str, detail: impl fmt::Display) -> IoError {
    IoError::Parse {
        path: path.to_string(),
        detail: detail.to_string(),
    }
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, IoError> {
    v.get(key)
        .ok_or_else(|| parse_err(&format!("{path}.{key}"), "missing key"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, IoError> {
    v.as_f64()
        .ok_or_else(|| parse_err(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array()
        .ok_or_else(|| parse_err(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, IoError> {
    v.as_str()
        .ok_or_else(|| parse_err(path, "expected a string"))
}

fn number_vec(v: &Value, path: &str) -> Result<Vec<f64>, IoError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn parse_matrix(v: &Value, path: &str) -> Result<SparseMatrix, IoError> {
    let rows = as_usize(get(v, "rows", path)?, &format!("{path}.rows"))?;
    let cols = as_usize(get(v, "cols", path)?, &format!("{path}.cols"))?;
    let raw = as_array(get(v, "triplets", path)?, &format!("{path}.triplets"))?;
    let mut triplets = Vec::with_capacity(raw.len());
    for (i, t) in raw.iter().enumerate() {
        let tp = format!("{path}.triplets[{i}]");
        let fields = as_array(t, &tp)?;
        if fields.len() != 3 {
            return Err(parse_err(&tp, "expected [row, col, value]"));
        }
        let r = as_usize(&fields[0], &format!("{tp}[0]"))?;
        let c = as_usize(&fields[1], &format!("{tp}[1]"))?;
        let x = as_f64(&fields[2], &format!("{tp}[2]"))?;
        if r >= rows || c >= cols {
            return Err(parse_err(
                &tp,
                format!("index ({r}, {c}) outside a {rows}x{cols} matrix"),
            ));
        }
        triplets.push((r, c, x));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets).map_err(|e| parse_err(path, e))
}

fn parse_blocks(v: &Value, path: &str) -> Result<Vec<PrimitiveCone>, IoError> {
    let raw = as_array(v, path)?;
    if raw.is_empty() {
        return Err(parse_err(path, "at least one cone block is required"));
    }
    raw.iter()
        .enumerate()
        .map(|(i, b)| {
            let bp = format!("{path}[{i}]");
            let ty = as_str(get(b, "type", &bp)?, &format!("{bp}.type"))?;
            match ty {
                "orthant" => {
                    let d = as_usize(get(b, "dim", &bp)?, &format!("{bp}.dim"))?;
                    Ok(PrimitiveCone::Orthant(d))
                }
                "soc" => {
                    let d = as_usize(get(b, "dim", &bp)?, &format!("{bp}.dim"))?;
                    Ok(PrimitiveCone::SecondOrder(d))
                }
                "psd" => {
                    let o = as_usize(get(b, "order", &bp)?, &format!("{bp}.order"))?;
                    Ok(PrimitiveCone::Psd(o))
                }
                other => Err(parse_err(
                    &format!("{bp}.type"),
                    format!("unknown block type \"{other}\""),
                )),
            }
        })
        .collect()
}

fn parse_set(v: &Value, path: &str) -> Result<SimpleSet, IoError> {
    let ty = as_str(get(v, "type", path)?, &format!("{path}.type"))?;
    match ty {
        "orthant" => Ok(SimpleSet::Orthant),
        "ball" => Ok(SimpleSet::UnitBall),
        "box" => {
            let lo = number_vec(get(v, "lo", path)?, &format!("{path}.lo"))?;
            let hi = number_vec(get(v, "hi", path)?, &format!("{path}.hi"))?;
            Ok(SimpleSet::Box { lo, hi })
        }
        other => Err(parse_err(
            &format!("{path}.type"),
            format!("unknown set type \"{other}\""),
        )),
    }
}

pub fn parse_problem_str(text: &str) -> Result<ParsedProblem, IoError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| parse_err("$", format!("malformed JSON: {e}")))?;
    if !root.is_object() {
        return Err(parse_err("$", "expected a JSON object"));
    }

    let a = parse_matrix(get(&root, "A", "$")?, "$.A")?;
    let b = number_vec(get(&root, "b", "$")?, "$.b")?;
    if b.len() != a.rows() {
        return Err(parse_err(
            "$.b",
            format!("length {} does not match A.rows = {}", b.len(), a.rows()),
        ));
    }
    let z_star = match root.get("z_star") {
        Some(v) => Some(as_f64(v, "$.z_star")?),
        None => None,
    };

    if let Some(epi) = root.get("epigraph") {
        for key in ["blocks", "c", "e"] {
            if root.get(key).is_some() {
                return Err(parse_err(
                    &format!("$.{key}"),
                    "key not allowed alongside \"epigraph\" (it is derived from the lifting)",
                ));
            }
        }
        let raw_pieces = as_array(get(epi, "pieces", "$.epigraph")?, "$.epigraph.pieces")?;
        let mut pieces = Vec::with_capacity(raw_pieces.len());
        for (i, p) in raw_pieces.iter().enumerate() {
            let pp = format!("$.epigraph.pieces[{i}]");
            pieces.push(AffinePiece {
                a: number_vec(get(p, "a", &pp)?, &format!("{pp}.a"))?,
                beta: as_f64(get(p, "beta", &pp)?, &format!("{pp}.beta"))?,
            });
        }
        let set = parse_set(get(epi, "set", "$.epigraph")?, "$.epigraph.set")?;
        let x_tilde = number_vec(get(epi, "x_tilde", "$.epigraph")?, "$.epigraph.x_tilde")?;
        let f_hat = as_f64(get(epi, "f_hat", "$.epigraph")?, "$.epigraph.f_hat")?;
        let mut model = build_epigraph_instance(pieces, set, a, b, x_tilde, f_hat)
            .map_err(|e| IoError::Epigraph(e.to_string()))?;
        model.lifted.z_star = z_star;
        return Ok(ParsedProblem::Epigraph(Box::new(model)));
    }

    let blocks = parse_blocks(get(&root, "blocks", "$")?, "$.blocks")?;
    let cone = ConeSpec::product(&blocks).map_err(|e| parse_err("$.blocks", e))?;
    let c = number_vec(get(&root, "c", "$")?, "$.c")?;
    let e = number_vec(get(&root, "e", "$")?, "$.e")?;
    let n = cone.dim();
    for (name, len) in [("c", c.len()), ("e", e.len())] {
        if len != n {
            return Err(parse_err(
                &format!("$.{name}"),
                format!("length {len} does not match the cone dimension {n}"),
            ));
        }
    }
    if a.cols() != n {
        return Err(parse_err(
            "$.A.cols",
            format!("{} does not match the cone dimension {n}", a.cols()),
        ));
    }
    let x_bar = match root.get("x_bar") {
        Some(v) => {
            let xb = number_vec(v, "$.x_bar")?;
            if xb.len() != n {
                return Err(parse_err(
                    "$.x_bar",
                    format!("length {} does not match the cone dimension {n}", xb.len()),
                ));
            }
            Some(xb)
        }
        None => None,
    };

    let inst = build_instance(cone, a, b, c, e, z_star, x_bar).map_err(IoError::Validation)?;
    Ok(ParsedProblem::Conic(inst))
}

pub fn parse_problem(path: &Path) -> Result<ParsedProblem, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem_str(&text)
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

fn matrix_json(a: &SparseMatrix) -> String {
    let trips: Vec<String> = a
        .to_triplets()
        .iter()
        .map(|&(i, j, v)| format!("[{},{},{}]", i, j, fmt_f64(v)))
        .collect();
    format!(
        "{{\"rows\":{},\"cols\":{},\"triplets\":[{}]}}",
        a.rows(),
        a.cols(),
        trips.join(",")
    )
}

fn blocks_json(cone: &ConeSpec) -> Result<String, IoError> {
    let mut parts = Vec::new();
    let mut at = 0;
    for b in cone.blocks() {
        if b.range.start != at {
            return Err(IoError::Unsupported(
                "cone blocks are not a consecutive product; no file form exists".into(),
            ));
        }
        let json = match &b.kind {
            crate::cones::BlockKind::Orthant => {
                format!("{{\"type\":\"orthant\",\"dim\":{}}}", b.range.len())
            }
            crate::cones::BlockKind::SecondOrder => {
                format!("{{\"type\":\"soc\",\"dim\":{}}}", b.range.len())
            }
            crate::cones::BlockKind::Psd { order } => {
                format!("{{\"type\":\"psd\",\"order\":{order}}}")
            }
            crate::cones::BlockKind::HalfspaceLift { .. } => {
                return Err(IoError::Unsupported(
                    "halfspace blocks have no problem-file form".into(),
                ))
            }
        };
        parts.push(json);
        at = b.range.end;
    }
    if at != cone.dim() {
        return Err(IoError::Unsupported(
            "cone blocks leave free coordinates; no file form exists".into(),
        ));
    }
    Ok(format!("[{}]", parts.join(",")))
}

fn set_json(set: &SimpleSet) -> String {
    match set {
        SimpleSet::Orthant => "{\"type\":\"orthant\"}".to_string(),
        SimpleSet::UnitBall => "{\"type\":\"ball\"}".to_string(),
        SimpleSet::Box { lo, hi } => format!(
            "{{\"type\":\"box\",\"lo\":{},\"hi\":{}}}",
            fmt_vec(lo),
            fmt_vec(hi)
        ),
    }
}

/// Serialize a parsed problem back to the file format. Round-trips exactly:
/// re-parsing the output reproduces the same structures.
pub fn emit_problem(problem: &ParsedProblem) -> Result<String, IoError> {
    match problem {
        ParsedProblem::Conic(inst) => {
            let mut s = String::from("{");
            s.push_str(&format!("\"blocks\":{},", blocks_json(&inst.cone)?));
            s.push_str(&format!("\"A\":{},", matrix_json(&inst.a)));
            s.push_str(&format!("\"b\":{},", fmt_vec(&inst.b)));
            s.push_str(&format!("\"c\":{},", fmt_vec(&inst.c)));
            s.push_str(&format!("\"e\":{}", fmt_vec(inst.e.as_slice())));
            if let Some(xb) = &inst.x_bar {
                s.push_str(&format!(",\"x_bar\":{}", fmt_vec(xb)));
            }
            if let Some(z) = inst.z_star {
                s.push_str(&format!(",\"z_star\":{}", fmt_f64(z)));
            }
            s.push('}');
            Ok(s)
        }
        ParsedProblem::Epigraph(model) => {
            let pieces: Vec<String> = model
                .pieces
                .iter()
                .map(|p| format!("{{\"a\":{},\"beta\":{}}}", fmt_vec(&p.a), fmt_f64(p.beta)))
                .collect();
            let mut s = String::from("{");
            s.push_str(&format!("\"A\":{},", matrix_json(&model.a)));
            s.push_str(&format!("\"b\":{},", fmt_vec(&model.b)));
            s.push_str(&format!(
                "\"epigraph\":{{\"pieces\":[{}],\"set\":{},\"x_tilde\":{},\"f_hat\":{}}}",
                pieces.join(","),
                set_json(&model.set),
                fmt_vec(&model.x_tilde),
                fmt_f64(model.f_hat)
            ));
            if let Some(z) = model.lifted.z_star {
                s.push_str(&format!(",\"z_star\":{}", fmt_f64(z)));
            }
            s.push('}');
            Ok(s)
        }
    }
}

/// One JSONL line per iterate: `k, outer, lambda, g_norm, obj_pi, rel_err,
/// restarted`, in that order.
pub fn render_iterate_log(report: &RunReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        out.push_str(&format!(
            "{{\"k\":{},\"outer\":{},\"lambda\":{},\"g_norm\":{},\"obj_pi\":{},\"rel_err\":{},\"restarted\":{}}}\n",
            r.k,
            r.outer_index,
            fmt_f64(r.lambda),
            fmt_f64(r.g_norm),
            fmt_f64(r.objective_pi),
            fmt_opt(r.relative_error),
            r.restarted
        ));
    }
    out
}

fn geometry_json(g: &GeometryReport) -> String {
    format!(
        "{{\"r_bar\":{},\"r_bar_exact\":{},\"m_upper\":{},\"z1\":{},\"diam\":{},\"rho0\":{},\"alg1\":{},\"alg2\":{}}}",
        fmt_f64(g.r_bar),
        g.r_bar_exact,
        fmt_f64(g.m_upper),
        fmt_f64(g.z1),
        fmt_opt(g.diam_z),
        fmt_opt(g.rho0),
        fmt_opt(g.budget_alg1),
        fmt_opt(g.budget_alg2)
    )
}

/// Summary of a completed run.
pub fn render_summary(report: &RunReport, geometry: Option<&GeometryReport>) -> String {
    let budgets = match geometry {
        Some(g) => geometry_json(g),
        None => "null".to_string(),
    };
    format!(
        "{{\"termination\":\"{}\",\"iterations\":{},\"best_objective\":{},\"boundary_residual_max\":{},\"best_pi\":{},\"budgets\":{},\"findings\":[]}}",
        report.termination.as_str(),
        report.records.len(),
        fmt_f64(report.best_objective),
        fmt_f64(report.boundary_residual_max),
        fmt_vec(&report.best_pi),
        budgets
    )
}

/// Summary of a run that never started because validation failed.
pub fn render_findings_summary(findings: &[Finding]) -> String {
    let items: Vec<String> = findings
        .iter()
        .map(|f| {
            format!(
                "{{\"code\":\"{}\",\"message\":\"{}\"}}",
                f.code.as_str(),
                escape(&f.message)
            )
        })
        .collect();
    format!(
        "{{\"termination\":null,\"findings\":[{}]}}",
        items.join(",")
    )
}

/// Standalone geometry report (the `geometry` subcommand output).
pub fn render_geometry(g: &GeometryReport) -> String {
    geometry_json(g)
}

/// Write the iterate log (JSONL) and summary (JSON) files.
pub fn emit_report(
    report: &RunReport,
    geometry: Option<&GeometryReport>,
    log_path: Option<&Path>,
    summary_path: Option<&Path>,
) -> Result<(), IoError> {
    if let Some(p) = log_path {
        std::fs::write(p, render_iterate_log(report))?;
    }
    if let Some(p) = summary_path {
        std::fs::write(p, render_summary(report, geometry))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{run, Algorithm, RunConfig, Termination};

    fn minimal_lp_json() -> &'static str {
        r#"{
            "blocks": [{"type": "orthant", "dim": 3}],
            "A": {"rows": 1, "cols": 3, "triplets": [[0,0,1.0],[0,1,1.0],[0,2,1.0]]},
            "b": [3.0],
            "c": [1.0, 0.0, 0.0],
            "e": [1.0, 1.0, 1.0],
            "x_bar": [0.5, 0.25, 2.25],
            "z_star": 0.0
        }"#
    }

    #[test]
    fn parses_minimal_lp() {
        let parsed = parse_problem_str(minimal_lp_json()).unwrap();
        match parsed {
            ParsedProblem::Conic(inst) => {
                assert_eq!(inst.a.rows(), 1);
                assert_eq!(inst.dim(), 3);
                assert_eq!(inst.z_star, Some(0.0));
            }
            other => panic!("expected a conic instance, got {other:?}"),
        }
    }

    #[test]
    fn parses_psd_block_with_svec_coords() {
        let text = r#"{
            "blocks": [{"type": "psd", "order": 2}],
            "A": {"rows": 1, "cols": 3, "triplets": [[0,0,1.0],[0,2,1.0]]},
            "b": [1.0],
            "c": [1.0, 0.0, 0.0],
            "e": [0.5, 0.0, 0.5]
        }"#;
        let parsed = parse_problem_str(text).unwrap();
        match parsed {
            ParsedProblem::Conic(inst) => assert_eq!(inst.dim(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn triplet_out_of_range_names_the_index() {
        let text = r#"{
            "blocks": [{"type": "orthant", "dim": 3}],
            "A": {"rows": 1, "cols": 3, "triplets": [[0,0,1.0],[0,7,1.0]]},
            "b": [3.0],
            "c": [1.0, 0.0, 0.0],
            "e": [1.0, 1.0, 1.0]
        }"#;
        match parse_problem_str(text) {
            Err(IoError::Parse { path, .. }) => {
                assert_eq!(path, "$.A.triplets[1]");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_block_type_rejected() {
        let text = r#"{
            "blocks": [{"type": "exp", "dim": 3}],
            "A": {"rows": 0, "cols": 3, "triplets": []},
            "b": [],
            "c": [1.0, 0.0, 0.0],
            "e": [1.0, 1.0, 1.0]
        }"#;
        match parse_problem_str(text) {
            Err(IoError::Parse { path, detail }) => {
                assert_eq!(path, "$.blocks[0].type");
                assert!(detail.contains("exp"));
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_direction_is_a_validation_failure() {
        let text = r#"{
            "blocks": [{"type": "orthant", "dim": 3}],
            "A": {"rows": 1, "cols": 3, "triplets": [[0,0,1.0],[0,1,1.0],[0,2,1.0]]},
            "b": [1.0],
            "c": [1.0, 0.0, 0.0],
            "e": [1.0, 1.0, -1.0]
        }"#;
        assert!(matches!(
            parse_problem_str(text),
            Err(IoError::Validation(_))
        ));
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let first = parse_problem_str(minimal_lp_json()).unwrap();
        let emitted = emit_problem(&first).unwrap();
        let second = parse_problem_str(&emitted).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn epigraph_round_trip() {
        let text = r#"{
            "A": {"rows": 0, "cols": 1, "triplets": []},
            "b": [],
            "epigraph": {
                "pieces": [{"a": [1.0], "beta": 0.0}, {"a": [-1.0], "beta": 0.0}],
                "set": {"type": "box", "lo": [-2.0], "hi": [2.0]},
                "x_tilde": [1.0],
                "f_hat": 2.0
            },
            "z_star": 0.0
        }"#;
        let first = parse_problem_str(text).unwrap();
        match &first {
            ParsedProblem::Epigraph(model) => {
                assert_eq!(model.lifted.dim(), 3);
                assert_eq!(model.lifted.z_star, Some(0.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        let emitted = emit_problem(&first).unwrap();
        let second = parse_problem_str(&emitted).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn epigraph_forbids_cone_keys() {
        let text = r#"{
            "A": {"rows": 0, "cols": 1, "triplets": []},
            "b": [],
            "c": [1.0],
            "epigraph": {
                "pieces": [{"a": [1.0], "beta": 0.0}],
                "set": {"type": "orthant"},
                "x_tilde": [1.0],
                "f_hat": 3.0
            }
        }"#;
        match parse_problem_str(text) {
            Err(IoError::Parse { path, .. }) => assert_eq!(path, "$.c"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn embedding_instances_have_no_file_form() {
        // free y coordinates cannot be expressed in the block list
        let parsed = parse_problem_str(minimal_lp_json()).unwrap();
        let inst = match parsed {
            ParsedProblem::Conic(inst) => inst,
            other => panic!("unexpected {other:?}"),
        };
        let y0 = crate::transform::lp_dual_interior_offset(&inst.a, &inst.c).unwrap();
        let emb = crate::transform::build_primal_dual_embedding(
            &inst.a,
            &inst.b,
            &inst.c,
            &inst.cone,
            inst.e.as_slice(),
            &y0,
        )
        .unwrap();
        assert!(matches!(
            emit_problem(&ParsedProblem::Conic(emb.instance)),
            Err(IoError::Unsupported(_))
        ));
    }

    #[test]
    fn float_format_is_17_digits_and_round_trips() {
        let values = [0.5, -1.0 / 3.0, 2.0f64.sqrt() * 1e-7, 3.0, 1e300];
        for &v in &values {
            let s = fmt_f64(v);
            assert!(s.contains('e'));
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s} did not round-trip");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn iterate_log_matches_run_length() {
        let parsed = parse_problem_str(minimal_lp_json()).unwrap();
        let inst = match parsed {
            ParsedProblem::Conic(i) => i,
            other => panic!("unexpected {other:?}"),
        };
        let cfg = RunConfig::new(Algorithm::Alg1, 0.01, 50).unwrap();
        let report = run(&inst, &cfg).unwrap();
        assert_eq!(report.termination, Termination::OptimalExact);
        let log = render_iterate_log(&report);
        assert_eq!(log.lines().count(), 2);
        for line in log.lines() {
            let v: Value = serde_json::from_str(line).unwrap();
            for key in [
                "k",
                "outer",
                "lambda",
                "g_norm",
                "obj_pi",
                "rel_err",
                "restarted",
            ] {
                assert!(v.get(key).is_some(), "missing key {key}");
            }
        }
        let summary = render_summary(&report, None);
        let v: Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(v["termination"], "OptimalExact");
        assert_eq!(v["iterations"], 2);
    }

    #[test]
    fn findings_summary_is_valid_json() {
        let findings = vec![Finding {
            code: crate::transform::FindingCode::NotStrictlyFeasible,
            message: "orthant coordinate 2 is -1 <= 0 \"quoted\"".into(),
        }];
        let s = render_findings_summary(&findings);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert!(v["termination"].is_null());
        assert_eq!(v["findings"][0]["code"], "NotStrictlyFeasible");
    }
}
