//! JSON encoding of operator expressions and monotone operator specs.
//!
//! Every node is an object with a `"type"` tag and type-specific fields, plus
//! an optional `"label"`:
//!
//! ```json
//! {"type": "compose", "children": [
//!     {"type": "proj_hyperplane", "normal": [0, 1], "offset": 0, "label": "P1"},
//!     {"type": "translation", "a": [0, 2]}
//! ]}
//! ```
//!
//! Parse errors carry a stable code and the JSON pointer of the offending value.

use std::fmt;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::Error as CoreError;
use crate::operator::{Node, OperatorExpr};
use crate::resolvent::{resolvent, MonotoneKind, MonotoneSpec};
use crate::scalar::Real;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorCode {
    Io,
    MalformedJson,
    UnknownType,
    MissingField,
    InvalidField,
    WeightRange,
    WeightSum,
    DimMismatch,
    TooFewChildren,
    InvalidParameter,
}

impl DslErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DslErrorCode::Io => "IO",
            DslErrorCode::MalformedJson => "MALFORMED_JSON",
            DslErrorCode::UnknownType => "UNKNOWN_TYPE",
            DslErrorCode::MissingField => "MISSING_FIELD",
            DslErrorCode::InvalidField => "INVALID_FIELD",
            DslErrorCode::WeightRange => "WEIGHT_RANGE",
            DslErrorCode::WeightSum => "WEIGHT_SUM",
            DslErrorCode::DimMismatch => "DIM_MISMATCH",
            DslErrorCode::TooFewChildren => "TOO_FEW_CHILDREN",
            DslErrorCode::InvalidParameter => "INVALID_PARAMETER",
        }
    }
}

impl fmt::Display for DslErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{code} at '{pointer}': {message}")]
pub struct DslError {
    pub code: DslErrorCode,
    /// JSON pointer to the offending value (`""` is the document root).
    pub pointer: String,
    pub message: String,
}

impl DslError {
    pub fn new(code: DslErrorCode, pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    fn from_core(err: CoreError, pointer: &str) -> Self {
        let (code, pointer) = match &err {
            CoreError::WeightRange { index, .. } => (DslErrorCode::WeightRange, format!("{pointer}/weights/{index}")),
            CoreError::WeightSum { .. } => (DslErrorCode::WeightSum, format!("{pointer}/weights")),
            CoreError::DimensionMismatch { .. } => (DslErrorCode::DimMismatch, pointer.to_string()),
            CoreError::TooFewChildren { .. } => (DslErrorCode::TooFewChildren, pointer.to_string()),
            CoreError::EmptyVector | CoreError::NonFiniteCoordinate { .. } => {
                (DslErrorCode::InvalidField, pointer.to_string())
            }
            _ => (DslErrorCode::InvalidParameter, pointer.to_string()),
        };
        Self::new(code, pointer, err.to_string())
    }
}

type ParseResult<T> = Result<T, DslError>;

pub fn parse_operator_str(text: &str) -> ParseResult<OperatorExpr<f64>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| DslError::new(DslErrorCode::MalformedJson, "", e.to_string()))?;
    parse_operator(&value)
}

pub fn parse_operator(value: &Value) -> ParseResult<OperatorExpr<f64>> {
    parse_node(value, "")
}

pub fn parse_monotone(value: &Value) -> ParseResult<MonotoneSpec<f64>> {
    parse_spec(value, "")
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    ptr: &'a str,
}

impl<'a> Fields<'a> {
    fn new(value: &'a Value, ptr: &'a str) -> ParseResult<Self> {
        value
            .as_object()
            .map(|obj| Self { obj, ptr })
            .ok_or_else(|| DslError::new(DslErrorCode::InvalidField, ptr, "expected an object"))
    }

    fn path(&self, key: &str) -> String {
        format!("{}/{}", self.ptr, key)
    }

    fn get(&self, key: &str) -> ParseResult<&'a Value> {
        self.obj.get(key).ok_or_else(|| {
            DslError::new(
                DslErrorCode::MissingField,
                self.path(key),
                format!("missing field \"{key}\""),
            )
        })
    }

    fn number(&self, key: &str) -> ParseResult<f64> {
        number_at(self.get(key)?, &self.path(key))
    }

    fn vector(&self, key: &str) -> ParseResult<Vector<f64>> {
        vector_at(self.get(key)?, &self.path(key))
    }

    fn array(&self, key: &str) -> ParseResult<&'a Vec<Value>> {
        self.get(key)?
            .as_array()
            .ok_or_else(|| DslError::new(DslErrorCode::InvalidField, self.path(key), "expected an array"))
    }

    fn type_tag(&self) -> ParseResult<&'a str> {
        self.get("type")?
            .as_str()
            .ok_or_else(|| DslError::new(DslErrorCode::InvalidField, self.path("type"), "expected a string"))
    }
}

fn number_at(value: &Value, ptr: &str) -> ParseResult<f64> {
    match value.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(DslError::new(
            DslErrorCode::InvalidField,
            ptr,
            "expected a finite number",
        )),
    }
}

fn vector_at(value: &Value, ptr: &str) -> ParseResult<Vector<f64>> {
    let items = value
        .as_array()
        .ok_or_else(|| DslError::new(DslErrorCode::InvalidField, ptr, "expected an array of numbers"))?;
    let coords = items
        .iter()
        .enumerate()
        .map(|(i, v)| number_at(v, &format!("{ptr}/{i}")))
        .collect::<ParseResult<Vec<_>>>()?;
    Vector::new(coords).map_err(|e| DslError::from_core(e, ptr))
}

fn parse_children(fields: &Fields<'_>) -> ParseResult<Vec<OperatorExpr<f64>>> {
    let base = fields.path("children");
    fields
        .array("children")?
        .iter()
        .enumerate()
        .map(|(i, child)| parse_node(child, &format!("{base}/{i}")))
        .collect()
}

fn parse_node(value: &Value, ptr: &str) -> ParseResult<OperatorExpr<f64>> {
    let f = Fields::new(value, ptr)?;
    let core = |r: Result<OperatorExpr<f64>, CoreError>| r.map_err(|e| DslError::from_core(e, ptr));
    let op = match f.type_tag()? {
        "translation" => OperatorExpr::translation(f.vector("a")?),
        "affine_scale" => core(OperatorExpr::affine_scale(f.number("beta")?, f.vector("a")?))?,
        "proj_hyperplane" => core(OperatorExpr::proj_hyperplane(f.vector("normal")?, f.number("offset")?))?,
        "proj_halfspace" => core(OperatorExpr::proj_halfspace(f.vector("normal")?, f.number("offset")?))?,
        "proj_box" => {
            let (lo, hi) = (f.vector("lo")?, f.vector("hi")?);
            core(OperatorExpr::proj_box(lo, hi))?
        }
        "proj_ball" => core(OperatorExpr::proj_ball(f.vector("center")?, f.number("radius")?))?,
        "proj_hyperbola_epi" => OperatorExpr::proj_hyperbola_epi(),
        "resolvent" => {
            let spec = parse_spec(f.get("spec")?, &f.path("spec"))?;
            core(resolvent(&spec))?
        }
        "compose" => core(OperatorExpr::compose(parse_children(&f)?))?,
        "convex_combo" => {
            let weights = f
                .array("weights")?
                .iter()
                .enumerate()
                .map(|(i, w)| number_at(w, &format!("{}/{i}", f.path("weights"))))
                .collect::<ParseResult<Vec<_>>>()?;
            core(OperatorExpr::convex_combination(weights, parse_children(&f)?))?
        }
        "averaged" => {
            let inner = parse_node(f.get("inner")?, &f.path("inner"))?;
            core(OperatorExpr::averaged(f.number("alpha")?, inner))?
        }
        other => {
            return Err(DslError::new(
                DslErrorCode::UnknownType,
                f.path("type"),
                format!("unknown operator type \"{other}\""),
            ))
        }
    };
    match f.obj.get("label") {
        None => Ok(op),
        Some(Value::String(label)) => Ok(op.with_label(label.clone())),
        Some(_) => Err(DslError::new(
            DslErrorCode::InvalidField,
            f.path("label"),
            "expected a string",
        )),
    }
}

fn parse_spec(value: &Value, ptr: &str) -> ParseResult<MonotoneSpec<f64>> {
    let f = Fields::new(value, ptr)?;
    let core = |r: Result<MonotoneSpec<f64>, CoreError>| r.map_err(|e| DslError::from_core(e, ptr));
    match f.type_tag()? {
        "constant_map" => Ok(MonotoneSpec::constant_map(f.vector("c")?)),
        "psd_linear" => {
            let base = f.path("matrix");
            let rows = f
                .array("matrix")?
                .iter()
                .enumerate()
                .map(|(i, row)| vector_at(row, &format!("{base}/{i}")).map(Vector::into_coords))
                .collect::<ParseResult<Vec<_>>>()?;
            core(MonotoneSpec::psd_linear(rows))
        }
        "subdiff_abs" => {
            let dim = f.get("dim")?.as_u64().ok_or_else(|| {
                DslError::new(DslErrorCode::InvalidField, f.path("dim"), "expected a positive integer")
            })?;
            core(MonotoneSpec::subdiff_abs(f.number("weight")?, dim as usize))
        }
        "normal_cone_box" => {
            let (lo, hi) = (f.vector("lo")?, f.vector("hi")?);
            core(MonotoneSpec::normal_cone_box(lo, hi))
        }
        "shifted" => {
            let inner = parse_spec(f.get("inner")?, &f.path("inner"))?;
            core(inner.shifted(f.vector("v")?))
        }
        other => Err(DslError::new(
            DslErrorCode::UnknownType,
            f.path("type"),
            format!("unknown monotone operator type \"{other}\""),
        )),
    }
}

fn vec_json<S: Real>(v: &Vector<S>) -> Value {
    Value::from(v.to_f64())
}

/// Encodes an expression in the operator DSL.
///
/// Block nodes (which only arise from block resolvents) are written with
/// type `"block"` and are not accepted back by the parser.
pub fn operator_to_json<S: Real>(op: &OperatorExpr<S>) -> Value {
    let children = |c: &[OperatorExpr<S>]| Value::from(c.iter().map(operator_to_json).collect::<Vec<_>>());
    let mut value = match op.node() {
        Node::Translation { a } => json!({"type": "translation", "a": vec_json(a)}),
        Node::AffineScale { beta, a } => {
            json!({"type": "affine_scale", "beta": beta.as_f64(), "a": vec_json(a)})
        }
        Node::ProjHyperplane { normal, offset } => {
            json!({"type": "proj_hyperplane", "normal": vec_json(normal), "offset": offset.as_f64()})
        }
        Node::ProjHalfspace { normal, offset } => {
            json!({"type": "proj_halfspace", "normal": vec_json(normal), "offset": offset.as_f64()})
        }
        Node::ProjBox { lo, hi } => json!({"type": "proj_box", "lo": vec_json(lo), "hi": vec_json(hi)}),
        Node::ProjBall { center, radius } => {
            json!({"type": "proj_ball", "center": vec_json(center), "radius": radius.as_f64()})
        }
        Node::ProjHyperbolaEpi => json!({"type": "proj_hyperbola_epi"}),
        Node::Resolvent(map) => json!({"type": "resolvent", "spec": monotone_to_json(map.spec())}),
        Node::Block { children: c } => json!({"type": "block", "children": children(c)}),
        Node::Compose { children: c } => json!({"type": "compose", "children": children(c)}),
        Node::ConvexCombo { weights, children: c } => json!({
            "type": "convex_combo",
            "weights": weights.iter().map(|w| w.as_f64()).collect::<Vec<_>>(),
            "children": children(c),
        }),
        Node::Averaged { alpha, inner } => {
            json!({"type": "averaged", "alpha": alpha.as_f64(), "inner": operator_to_json(inner)})
        }
    };
    if let (Some(label), Value::Object(obj)) = (op.label(), &mut value) {
        obj.insert("label".into(), Value::from(label));
    }
    value
}

pub fn monotone_to_json<S: Real>(spec: &MonotoneSpec<S>) -> Value {
    match spec.kind() {
        MonotoneKind::ConstantMap { c } => json!({"type": "constant_map", "c": vec_json(c)}),
        MonotoneKind::PsdLinear { matrix } => json!({
            "type": "psd_linear",
            "matrix": matrix
                .iter()
                .map(|r| r.iter().map(|x| x.as_f64()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        MonotoneKind::SubdiffAbs { weight } => {
            json!({"type": "subdiff_abs", "weight": weight.as_f64(), "dim": spec.dim()})
        }
        MonotoneKind::NormalConeBox { lo, hi } => {
            json!({"type": "normal_cone_box", "lo": vec_json(lo), "hi": vec_json(hi)})
        }
        MonotoneKind::Shifted { inner, v } => {
            json!({"type": "shifted", "inner": monotone_to_json(inner), "v": vec_json(v)})
        }
    }
}
