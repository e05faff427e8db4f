//! JSON wire formats shared between the library and the command-line tool.
//!
//! Conventions, fixed across every document:
//! - complex numbers are `[re, im]` pairs;
//! - matrices are row-major nested arrays with explicit `rows`/`cols`
//!   fields, never inferred;
//! - overlap matrices carry an explicit `dim`;
//! - behaviors store `p[y][x1][x2][a][b]` with the Alice output order
//!   0:'1', 1:'2', 2:'bot';
//! - all indices (strategy outputs, removed pairs, columns) are 0-based;
//! - floats are rendered with 17 significant digits so every emitted
//!   document re-parses to bit-identical values.

use crate::bases::{BasisPair, OverlapMatrix};
use crate::functional::Behavior;
use crate::functional::QuantumRealization;
use crate::localvalue::{DeterministicStrategy, LocalValueReport, SimplexExtremal};
use crate::matcore::{C64, ComplexMatrix};
use crate::search::{SearchConfig, SearchResult};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("invalid content: {0}")]
    Invalid(String),
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Malformed(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Wire structs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapJson {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisPairJson {
    pub dim: usize,
    pub e_basis: MatrixJson,
    pub f_basis: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorJson {
    pub d: usize,
    /// `p[y][x1][x2][a][b]`, `a` in the order '1', '2', 'bot'.
    pub p: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationJson {
    pub d: usize,
    pub dims: [usize; 2],
    pub state: MatrixJson,
    /// Alice observables indexed `[x1][x2]`.
    pub alice: Vec<Vec<MatrixJson>>,
    #[serde(rename = "bobP")]
    pub bob_p: Vec<MatrixJson>,
    #[serde(rename = "bobQ")]
    pub bob_q: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyJson {
    pub u: usize,
    pub v: usize,
    /// Alice responses indexed `[x1][x2]`, entries in {-1, 0, 1}.
    pub alice: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalValueReportJson {
    #[serde(rename = "beta_L")]
    pub beta_l: f64,
    pub nu_star: f64,
    pub best_strategy: StrategyJson,
    /// `s(u, v)` indexed `[u][v]`.
    pub per_strategy_scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfigJson {
    pub d: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub step_min: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResultJson {
    #[serde(rename = "best_beta_L")]
    pub best_beta_l: f64,
    pub best_unitary: MatrixJson,
    pub best_overlap: OverlapJson,
    /// Improvement events `[evaluation index, objective]`.
    pub trajectory: Vec<(usize, f64)>,
    pub restart_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasesJson {
    pub d: usize,
    pub bases: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexExtremalJson {
    pub tau: f64,
    pub n_coords: usize,
    pub vector: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let entries = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        MatrixJson { rows: m.rows(), cols: m.cols(), entries }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = JsonError;
    fn try_from(w: &MatrixJson) -> Result<Self, JsonError> {
        if w.entries.len() != w.rows {
            return Err(JsonError::Invalid(format!(
                "matrix declares {} rows but carries {}",
                w.rows,
                w.entries.len()
            )));
        }
        let mut entries = Vec::with_capacity(w.rows * w.cols);
        for row in &w.entries {
            if row.len() != w.cols {
                return Err(JsonError::Invalid(format!(
                    "matrix declares {} cols but a row carries {}",
                    w.cols,
                    row.len()
                )));
            }
            for &[re, im] in row {
                if !re.is_finite() || !im.is_finite() {
                    return Err(JsonError::Invalid("non-finite matrix entry".into()));
                }
                entries.push(C64::new(re, im));
            }
        }
        Ok(ComplexMatrix::new(w.rows, w.cols, entries))
    }
}

impl From<&OverlapMatrix> for OverlapJson {
    fn from(o: &OverlapMatrix) -> Self {
        let d = o.dim();
        let entries = (0..d).map(|i| (0..d).map(|j| o.get(i, j)).collect()).collect();
        OverlapJson { dim: d, entries }
    }
}

impl TryFrom<&OverlapJson> for OverlapMatrix {
    type Error = JsonError;
    fn try_from(w: &OverlapJson) -> Result<Self, JsonError> {
        if w.entries.len() != w.dim || w.entries.iter().any(|r| r.len() != w.dim) {
            return Err(JsonError::Invalid(format!(
                "overlap matrix declares dim {} but rows disagree",
                w.dim
            )));
        }
        let flat: Vec<f64> = w.entries.iter().flatten().copied().collect();
        OverlapMatrix::new(w.dim, flat).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

impl From<&BasisPair> for BasisPairJson {
    fn from(p: &BasisPair) -> Self {
        BasisPairJson {
            dim: p.dim(),
            e_basis: p.e_basis().into(),
            f_basis: p.f_basis().into(),
        }
    }
}

impl TryFrom<&BasisPairJson> for BasisPair {
    type Error = JsonError;
    fn try_from(w: &BasisPairJson) -> Result<Self, JsonError> {
        let e = ComplexMatrix::try_from(&w.e_basis)?;
        let f = ComplexMatrix::try_from(&w.f_basis)?;
        if e.rows() != w.dim || f.rows() != w.dim || !e.is_square() || !f.is_square() {
            return Err(JsonError::Invalid(format!(
                "basis matrices must be square of declared dim {}",
                w.dim
            )));
        }
        BasisPair::new(e, f).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

impl From<&Behavior> for BehaviorJson {
    fn from(beh: &Behavior) -> Self {
        let d = beh.d();
        let p = (0..2)
            .map(|y| {
                (0..d)
                    .map(|x1| {
                        (0..d)
                            .map(|x2| {
                                (0..3)
                                    .map(|a| (0..d).map(|b| beh.get(y, x1, x2, a, b)).collect())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BehaviorJson { d, p }
    }
}

impl TryFrom<&BehaviorJson> for Behavior {
    type Error = JsonError;
    fn try_from(w: &BehaviorJson) -> Result<Self, JsonError> {
        let d = w.d;
        let mut flat = Vec::with_capacity(2 * d * d * 3 * d);
        if w.p.len() != 2 {
            return Err(JsonError::Invalid("behavior must carry two y slices".into()));
        }
        for slab in &w.p {
            if slab.len() != d {
                return Err(JsonError::Invalid("x1 axis length mismatch".into()));
            }
            for x1 in slab {
                if x1.len() != d {
                    return Err(JsonError::Invalid("x2 axis length mismatch".into()));
                }
                for x2 in x1 {
                    if x2.len() != 3 {
                        return Err(JsonError::Invalid("Alice output axis must have 3 entries".into()));
                    }
                    for a in x2 {
                        if a.len() != d {
                            return Err(JsonError::Invalid("Bob output axis length mismatch".into()));
                        }
                        flat.extend_from_slice(a);
                    }
                }
            }
        }
        Behavior::new(d, flat).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

impl From<&QuantumRealization> for RealizationJson {
    fn from(r: &QuantumRealization) -> Self {
        let d = r.d();
        RealizationJson {
            d,
            dims: [r.dims().0, r.dims().1],
            state: r.state().into(),
            alice: (0..d)
                .map(|x1| (0..d).map(|x2| r.alice(x1, x2).into()).collect())
                .collect(),
            bob_p: r.bob_p().iter().map(MatrixJson::from).collect(),
            bob_q: r.bob_q().iter().map(MatrixJson::from).collect(),
        }
    }
}

impl TryFrom<&RealizationJson> for QuantumRealization {
    type Error = JsonError;
    fn try_from(w: &RealizationJson) -> Result<Self, JsonError> {
        let state = ComplexMatrix::try_from(&w.state)?;
        let mut alice = Vec::with_capacity(w.d * w.d);
        if w.alice.len() != w.d {
            return Err(JsonError::Invalid("alice table must have d rows".into()));
        }
        for row in &w.alice {
            if row.len() != w.d {
                return Err(JsonError::Invalid("alice table must have d columns".into()));
            }
            for m in row {
                alice.push(ComplexMatrix::try_from(m)?);
            }
        }
        let bob_p: Result<Vec<_>, _> = w.bob_p.iter().map(ComplexMatrix::try_from).collect();
        let bob_q: Result<Vec<_>, _> = w.bob_q.iter().map(ComplexMatrix::try_from).collect();
        QuantumRealization::new(w.d, (w.dims[0], w.dims[1]), state, alice, bob_p?, bob_q?)
            .map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

impl From<&LocalValueReport> for LocalValueReportJson {
    fn from(r: &LocalValueReport) -> Self {
        let d = (r.per_strategy_scores.len() as f64).sqrt() as usize;
        let strategy = &r.best_strategy;
        LocalValueReportJson {
            beta_l: r.beta_l,
            nu_star: r.nu_star,
            best_strategy: StrategyJson {
                u: strategy.u,
                v: strategy.v,
                alice: (0..d)
                    .map(|x1| (0..d).map(|x2| strategy.alice[x1 * d + x2]).collect())
                    .collect(),
            },
            per_strategy_scores: (0..d)
                .map(|u| (0..d).map(|v| r.per_strategy_scores[u * d + v]).collect())
                .collect(),
        }
    }
}

impl TryFrom<&LocalValueReportJson> for LocalValueReport {
    type Error = JsonError;
    fn try_from(w: &LocalValueReportJson) -> Result<Self, JsonError> {
        let d = w.per_strategy_scores.len();
        if w.best_strategy.alice.len() != d || w.per_strategy_scores.iter().any(|r| r.len() != d) {
            return Err(JsonError::Invalid("score table and strategy must be d x d".into()));
        }
        Ok(LocalValueReport {
            beta_l: w.beta_l,
            nu_star: w.nu_star,
            best_strategy: DeterministicStrategy {
                u: w.best_strategy.u,
                v: w.best_strategy.v,
                alice: w.best_strategy.alice.iter().flatten().copied().collect(),
            },
            per_strategy_scores: w.per_strategy_scores.iter().flatten().copied().collect(),
        })
    }
}

impl From<&SearchConfig> for SearchConfigJson {
    fn from(c: &SearchConfig) -> Self {
        SearchConfigJson {
            d: c.d,
            restarts: c.restarts,
            max_iters: c.max_iters,
            step_init: c.step_init,
            step_min: c.step_min,
            seed: c.seed,
        }
    }
}

impl TryFrom<&SearchConfigJson> for SearchConfig {
    type Error = JsonError;
    fn try_from(w: &SearchConfigJson) -> Result<Self, JsonError> {
        if w.d < 2 || w.restarts == 0 || !(w.step_min < w.step_init) {
            return Err(JsonError::Invalid(
                "search config needs d >= 2, restarts >= 1 and step_min < step_init".into(),
            ));
        }
        Ok(SearchConfig {
            d: w.d,
            restarts: w.restarts,
            max_iters: w.max_iters,
            step_init: w.step_init,
            step_min: w.step_min,
            seed: w.seed,
        })
    }
}

impl From<&SearchResult> for SearchResultJson {
    fn from(r: &SearchResult) -> Self {
        SearchResultJson {
            best_beta_l: r.best_beta_l,
            best_unitary: (&r.best_unitary).into(),
            best_overlap: (&r.best_overlap).into(),
            trajectory: r.trajectory.clone(),
            restart_values: r.restart_values.clone(),
        }
    }
}

impl From<&SimplexExtremal> for SimplexExtremalJson {
    fn from(e: &SimplexExtremal) -> Self {
        SimplexExtremalJson { tau: e.tau, n_coords: e.n_coords, vector: e.vector.clone() }
    }
}

// ---------------------------------------------------------------------------
// Rendering with 17 significant digits
// ---------------------------------------------------------------------------

/// Serializes any wire struct to the canonical JSON text: two-space pretty
/// printing, object keys sorted, floats rendered as `{:.16e}` (17
/// significant digits, enough for a bit-exact f64 round trip).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, JsonError> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    render(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn render(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                let x = n.as_f64().expect("number is one of u64/i64/f64");
                out.push_str(&format!("{x:.16e}"));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(|i| !matches!(i, Value::Array(_) | Value::Object(_))) {
                // Scalar-only arrays (complex pairs, score rows) stay on one line.
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    render(item, indent, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    render(item, indent + 1, out);
                    if k + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
            } else {
                out.push_str("{\n");
                for (k, (key, item)) in map.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                    out.push_str(": ");
                    render(item, indent + 1, out);
                    if k + 1 < map.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// Parses a JSON document into a wire struct.
pub fn from_json_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, JsonError> {
    Ok(serde_json::from_str(text)?)
}
