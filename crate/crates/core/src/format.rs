//! JSON scenario, model and state files.
//!
//! Complex numbers are `[re, im]` (a bare number is read as real); matrices
//! are row-major nested arrays. An operator is given by exactly one of
//!
//! - `"matrix"`: full matrix,
//! - `"ray"`: unit vector `v`, loaded as `|v⟩⟨v|`,
//! - `"diag"`: real diagonal,
//! - `"pauli"`: Pauli string such as `"XZ"` or `"-ZZ"`.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "items": [{"label": "A", "kind": "dichotomic", "pauli": "ZI"}, ...],
//!   "contexts": [["A", "B"], {"labels": ["P1", "P2"], "resolvesIdentity": true}],
//!   "products": [{"labels": ["A", "B", "C"], "sign": -1}],
//!   "state": "singlet",
//!   "chsh": {"alice": ["A", "A'"], "bob": ["B", "B'"]}
//! }
//! ```
//!
//! A model file uses the same `items` and `state` plus `phaseSpace`
//! (`points`, `weights`) and `values` (label to per-point values). Item kinds
//! in model files may also be `"observable"`, the default there.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::feasibility::{named_state, pauli_string, ChshRoles, ContextSpec, ItemKind, ItemSpec, ProductSpec, Scenario};
use crate::hvmodel::{HVModel, PhaseSpace, ValueMap};
use crate::opcore::{c, CMat, Tolerances, C64};
use crate::quantum::{Density, Observable};

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    fn value(self) -> C64 {
        match self {
            Num::Real(r) => c(r, 0.0),
            Num::Complex([re, im]) => c(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorFile {
    matrix: Option<Vec<Vec<Num>>>,
    ray: Option<Vec<Num>>,
    diag: Option<Vec<f64>>,
    pauli: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemFile {
    label: String,
    kind: Option<String>,
    matrix: Option<Vec<Vec<Num>>>,
    ray: Option<Vec<Num>>,
    diag: Option<Vec<f64>>,
    pauli: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextObject {
    labels: Vec<String>,
    #[serde(default, rename = "resolvesIdentity")]
    resolves_identity: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ContextFile {
    Labels(Vec<String>),
    Object(ContextObject),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductFile {
    labels: Vec<String>,
    sign: i8,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChshFile {
    alice: [String; 2],
    bob: [String; 2],
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Named(String),
    Operator(OperatorFile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    dim: usize,
    items: Vec<ItemFile>,
    #[serde(default)]
    contexts: Vec<ContextFile>,
    #[serde(default)]
    products: Vec<ProductFile>,
    state: Option<StateFile>,
    chsh: Option<ChshFile>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PhaseSpaceFile {
    points: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ModelFile {
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    dim: usize,
    items: Vec<ItemFile>,
    state: StateFile,
    phase_space: PhaseSpaceFile,
    values: BTreeMap<String, Vec<f64>>,
}

struct Ctx<'a> {
    path: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, field: &str, needle: Option<&str>, message: impl std::fmt::Display) -> Error {
        let line = needle.and_then(|n| line_of(self.text, n));
        let location = match line {
            Some(l) => format!("line {l}, field `{field}`"),
            None => format!("field `{field}`"),
        };
        Error::Format { path: self.path.to_string(), message: format!("{location}: {message}") }
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_str(self.text)
            .map_err(|e| Error::Format { path: self.path.to_string(), message: e.to_string() })
    }
}

fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.lines().position(|l| l.contains(needle)).map(|i| i + 1)
}

fn quoted(label: &str) -> String {
    format!("\"{label}\"")
}

fn build_operator(
    ctx: &Ctx,
    field: &str,
    needle: Option<&str>,
    op: (Option<Vec<Vec<Num>>>, Option<Vec<Num>>, Option<Vec<f64>>, Option<String>),
    dim: usize,
) -> Result<CMat> {
    let (matrix, ray, diag, pauli) = op;
    let given = [matrix.is_some(), ray.is_some(), diag.is_some(), pauli.is_some()].iter().filter(|b| **b).count();
    if given != 1 {
        return Err(ctx.err(field, needle, "give exactly one of matrix, ray, diag, pauli"));
    }
    let m = if let Some(rows) = matrix {
        let rows: Vec<Vec<C64>> = rows.into_iter().map(|r| r.into_iter().map(Num::value).collect()).collect();
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(ctx.err(field, needle, "matrix must be square"));
        }
        CMat::from_rows(&rows).map_err(|e| ctx.err(field, needle, e))?
    } else if let Some(v) = ray {
        let v: Vec<C64> = v.into_iter().map(Num::value).collect();
        CMat::ray_projector(&v).map_err(|e| ctx.err(field, needle, e))?
    } else if let Some(d) = diag {
        if d.is_empty() || d.iter().any(|x| !x.is_finite()) {
            return Err(ctx.err(field, needle, "diag must be a nonempty list of finite reals"));
        }
        CMat::diag(&d)
    } else {
        let s = pauli.unwrap_or_default();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
        };
        pauli_string(body)
            .ok_or_else(|| ctx.err(field, needle, format!("`{s}` is not a Pauli string over I, X, Y, Z")))?
            .scale(sign)
    };
    if m.dim() != dim {
        return Err(ctx.err(field, needle, format!("operator has dimension {}, expected {dim}", m.dim())));
    }
    Ok(m)
}

fn item_operator(ctx: &Ctx, k: usize, it: ItemFile, dim: usize) -> Result<(String, Option<String>, CMat)> {
    let field = format!("items[{k}]");
    let needle = quoted(&it.label);
    let m = build_operator(ctx, &field, Some(&needle), (it.matrix, it.ray, it.diag, it.pauli), dim)?;
    Ok((it.label, it.kind, m))
}

fn build_state(ctx: &Ctx, s: StateFile, dim: usize, tols: Tolerances) -> Result<Density> {
    match s {
        StateFile::Named(name) => named_state(&name, dim)
            .filter(|d| d.dim() == dim)
            .ok_or_else(|| ctx.err("state", Some("\"state\""), format!("unknown state `{name}` for dimension {dim}"))),
        StateFile::Operator(op) => {
            let m = build_operator(ctx, "state", Some("\"state\""), (op.matrix, op.ray, op.diag, op.pauli), dim)?;
            Density::new(m, tols).map_err(|e| ctx.err("state", Some("\"state\""), e))
        }
    }
}

pub fn parse_scenario(text: &str, path: &str, tols: Tolerances) -> Result<Scenario> {
    let ctx = Ctx { path, text };
    let file: ScenarioFile = ctx.parse()?;
    if file.dim == 0 {
        return Err(ctx.err("dim", Some("\"dim\""), "must be positive"));
    }
    let mut items = Vec::with_capacity(file.items.len());
    for (k, it) in file.items.into_iter().enumerate() {
        let (label, kind, mat) = item_operator(&ctx, k, it, file.dim)?;
        let kind = match kind.as_deref() {
            Some("projector") => ItemKind::Projector,
            Some("dichotomic") => ItemKind::Dichotomic,
            other => {
                return Err(ctx.err(
                    &format!("items[{k}].kind"),
                    Some(&quoted(&label)),
                    format!("expected \"projector\" or \"dichotomic\", got {other:?}"),
                ))
            }
        };
        items.push(ItemSpec { label, kind, mat });
    }
    let contexts = file
        .contexts
        .into_iter()
        .map(|c| match c {
            ContextFile::Labels(labels) => ContextSpec { labels, resolves_identity: false },
            ContextFile::Object(o) => ContextSpec { labels: o.labels, resolves_identity: o.resolves_identity },
        })
        .collect();
    let products = file.products.into_iter().map(|p| ProductSpec { labels: p.labels, sign: p.sign }).collect();
    let state = file.state.map(|s| build_state(&ctx, s, file.dim, tols)).transpose()?;
    let chsh = file.chsh.map(|c| ChshRoles { alice: c.alice, bob: c.bob });
    Scenario::new(file.dim, items, contexts, products, state, chsh, tols).map_err(|e| match e {
        Error::Format { .. } => e,
        other => Error::Format { path: path.to_string(), message: other.to_string() },
    })
}

pub fn parse_model(text: &str, path: &str, tols: Tolerances) -> Result<HVModel> {
    let ctx = Ctx { path, text };
    let file: ModelFile = ctx.parse()?;
    if file.dim == 0 {
        return Err(ctx.err("dim", Some("\"dim\""), "must be positive"));
    }
    let npoints = file.phase_space.points.len();
    let mut registered = Vec::with_capacity(file.items.len());
    let mut columns = Vec::with_capacity(file.items.len());
    for (k, it) in file.items.into_iter().enumerate() {
        let (label, kind, mat) = item_operator(&ctx, k, it, file.dim)?;
        let needle = quoted(&label);
        if !matches!(kind.as_deref(), None | Some("observable" | "projector" | "dichotomic")) {
            return Err(ctx.err(&format!("items[{k}].kind"), Some(&needle), format!("unknown kind {kind:?}")));
        }
        let obs = Observable::new(mat, tols).map_err(|e| ctx.err(&format!("items[{k}]"), Some(&needle), e))?;
        let col = file
            .values
            .get(&label)
            .ok_or_else(|| ctx.err("values", Some("\"values\""), format!("no values for `{label}`")))?;
        if col.len() != npoints {
            return Err(ctx.err(
                &format!("values.{label}"),
                Some(&needle),
                format!("{} values for {npoints} points", col.len()),
            ));
        }
        columns.push(col.clone());
        registered.push((label, obs));
    }
    if let Some(extra) = file.values.keys().find(|k| !registered.iter().any(|(l, _)| l == *k)) {
        return Err(ctx.err("values", Some(&quoted(extra)), format!("`{extra}` is not an item")));
    }
    let table: Vec<Vec<f64>> = (0..npoints).map(|w| columns.iter().map(|col| col[w]).collect()).collect();
    let state = build_state(&ctx, file.state, file.dim, tols)?;
    let wrap = |e: Error| ctx.err("phaseSpace", Some("\"phaseSpace\""), e);
    let space = PhaseSpace::unchecked(file.phase_space.points, file.phase_space.weights).map_err(wrap)?;
    let values = ValueMap::new(registered, table).map_err(|e| ctx.err("values", Some("\"values\""), e))?;
    HVModel::new(space, values, state).map_err(|e| ctx.err("items", None, e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Format { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_scenario(path: &Path, tols: Tolerances) -> Result<Scenario> {
    parse_scenario(&read(path)?, &path.display().to_string(), tols)
}

pub fn load_model(path: &Path, tols: Tolerances) -> Result<HVModel> {
    parse_model(&read(path)?, &path.display().to_string(), tols)
}

/// A named state, or a JSON file holding a state object.
pub fn load_state(arg: &str, dim: usize, tols: Tolerances) -> Result<Density> {
    if let Some(d) = named_state(arg, dim) {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: d.dim() });
        }
        return Ok(d);
    }
    let path = Path::new(arg);
    let text = read(path)?;
    let ctx = Ctx { path: arg, text: &text };
    let s: StateFile = ctx.parse()?;
    build_state(&ctx, s, dim, tols)
}

fn matrix_json(m: &CMat) -> Value {
    let n = m.dim();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let z = m.entry(i, j);
                            json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Model file contents for `m`, readable by [`parse_model`].
pub fn model_to_json(m: &HVModel) -> Value {
    let vals = m.values();
    let items: Vec<Value> = vals
        .labels()
        .iter()
        .zip(vals.observables())
        .map(|(l, o)| json!({"label": l, "kind": "observable", "matrix": matrix_json(o.mat())}))
        .collect();
    let mut values = serde_json::Map::new();
    for (k, l) in vals.labels().iter().enumerate() {
        let col: Vec<f64> = (0..m.space().len()).map(|w| vals.value(w, k)).collect();
        values.insert(l.clone(), json!(col));
    }
    json!({
        "dim": m.dim(),
        "items": items,
        "state": {"matrix": matrix_json(m.state().mat())},
        "phaseSpace": {"points": m.space().points(), "weights": m.space().weights()},
        "values": values,
    })
}
