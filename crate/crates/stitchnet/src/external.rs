//! Reader for GarmentCodeData pattern specification files.
//!
//! Panels live in an object keyed by name under `pattern.panels`; edges carry
//! `endpoints` and optional `curvature`, and stitches address edges by panel
//! name. Curvature may be a bare `[x, y]` (quadratic control point) or an
//! object `{type, params}` with type `quadratic`, `cubic` or `circle`.
//! Control points are already in the edge-local frame. 3D placement
//! (`translation`, `rotation`) is ignored.

use serde_json::{Map, Value};
use stitchnet_core::geometry::{CurvatureSpec, Vertex2};
use stitchnet_core::math::{self, PI};
use stitchnet_core::pattern::{validate_pattern, EdgeRef, Panel, PanelEdge, Pattern, StitchPair};

use crate::error::{Error, Result};

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("{ctx}: missing field `{key}`")))
}

fn number(v: &Value, ctx: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(format!("{ctx}: not a number"))),
        Value::Bool(b) => Ok(f64::from(u8::from(*b))),
        _ => Err(schema(format!("{ctx}: expected a number"))),
    }
}

fn index(v: &Value, ctx: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema(format!("{ctx}: expected a non-negative integer")))
}

fn point(v: &Value, ctx: &str) -> Result<Vertex2> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(Vertex2::new(number(x, ctx)?, number(y, ctx)?)),
        _ => Err(schema(format!("{ctx}: expected [x, y]"))),
    }
}

fn points(v: &Value, n: usize, ctx: &str) -> Result<Vec<Vertex2>> {
    let arr = v.as_array().ok_or_else(|| schema(format!("{ctx}: expected a list of points")))?;
    if arr.len() != n {
        return Err(schema(format!("{ctx}: expected {n} control point(s), found {}", arr.len())));
    }
    arr.iter().map(|p| point(p, ctx)).collect()
}

/// `[radius, large_arc, right]` with the chord from the edge endpoints.
fn circle(params: &Value, chord: f64, ctx: &str) -> Result<CurvatureSpec> {
    let arr = params.as_array().ok_or_else(|| schema(format!("{ctx}: circle params must be a list")))?;
    if arr.len() != 3 {
        return Err(schema(format!("{ctx}: circle params must be [radius, large_arc, right]")));
    }
    let radius = number(&arr[0], ctx)?;
    let large = number(&arr[1], ctx)? != 0.0;
    let right = number(&arr[2], ctx)? != 0.0;
    if !(radius > 0.0) {
        return Err(schema(format!("{ctx}: circle radius must be positive")));
    }
    let small = 2.0 * math::asin((chord / (2.0 * radius)).min(1.0));
    let angle = if large { 2.0 * PI - small } else { small };
    Ok(CurvatureSpec::arc(radius, if right { -1.0 } else { 1.0 }, angle))
}

fn curvature(v: Option<&Value>, chord: f64, ctx: &str) -> Result<CurvatureSpec> {
    let Some(v) = v.filter(|v| !v.is_null()) else {
        return Ok(CurvatureSpec::straight());
    };
    if v.is_array() {
        return Ok(CurvatureSpec::quad(point(v, ctx)?));
    }
    let obj = v.as_object().ok_or_else(|| schema(format!("{ctx}: curvature must be a list or object")))?;
    let ty = field(obj, "type", ctx)?.as_str().ok_or_else(|| schema(format!("{ctx}: curvature type must be a string")))?;
    let params = field(obj, "params", ctx)?;
    match ty {
        "quadratic" => Ok(CurvatureSpec::quad(points(params, 1, ctx)?[0])),
        "cubic" => {
            let p = points(params, 2, ctx)?;
            Ok(CurvatureSpec::cubic(p[0], p[1]))
        }
        "circle" => circle(params, chord, ctx),
        other => Err(Error::Unsupported(format!("curvature type {other}"))),
    }
}

fn panel(id: &str, v: &Value) -> Result<Panel> {
    let obj = v.as_object().ok_or_else(|| schema(format!("panel `{id}` must be an object")))?;
    let vertices = field(obj, "vertices", id)?
        .as_array()
        .ok_or_else(|| schema(format!("{id}: vertices must be a list")))?
        .iter()
        .map(|p| point(p, id))
        .collect::<Result<Vec<_>>>()?;
    let edges = field(obj, "edges", id)?.as_array().ok_or_else(|| schema(format!("{id}: edges must be a list")))?;
    let mut out = Vec::with_capacity(edges.len());
    for (k, e) in edges.iter().enumerate() {
        let ctx = format!("{id} edge {k}");
        let e = e.as_object().ok_or_else(|| schema(format!("{ctx}: must be an object")))?;
        let ends = field(e, "endpoints", &ctx)?.as_array().ok_or_else(|| schema(format!("{ctx}: endpoints must be a list")))?;
        let [s, t] = ends.as_slice() else {
            return Err(schema(format!("{ctx}: endpoints must have two entries")));
        };
        let (s, t) = (index(s, &ctx)?, index(t, &ctx)?);
        let chord = match (vertices.get(s), vertices.get(t)) {
            (Some(a), Some(b)) => a.distance(*b),
            _ => return Err(schema(format!("{ctx}: endpoint out of range"))),
        };
        out.push(PanelEdge::new(s, t, curvature(e.get("curvature"), chord, &ctx)?));
    }
    Ok(Panel { id: id.to_string(), vertices, edges: out })
}

/// Reads a GarmentCodeData specification into a validated [`Pattern`].
/// Panels follow `panel_order` when present, otherwise name order.
pub fn ingest_external(bytes: &[u8]) -> Result<Pattern> {
    let root: Value = serde_json::from_slice(bytes)?;
    let root = root.as_object().ok_or_else(|| schema("document must be an object"))?;
    let spec = match root.get("pattern") {
        Some(Value::Object(p)) => p,
        _ => root,
    };
    let panels = field(spec, "panels", "pattern")?.as_object().ok_or_else(|| schema("panels must be an object"))?;
    let order: Vec<String> = match spec.get("panel_order").and_then(Value::as_array) {
        Some(list) => list
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| schema("panel_order entries must be strings")))
            .collect::<Result<_>>()?,
        None => panels.keys().cloned().collect(),
    };
    let mut out = Vec::with_capacity(order.len());
    for id in &order {
        out.push(panel(id, panels.get(id).ok_or_else(|| schema(format!("panel_order names unknown panel `{id}`")))?)?);
    }
    let lookup = |v: &Value, ctx: &str| -> Result<EdgeRef> {
        let obj = v.as_object().ok_or_else(|| schema(format!("{ctx}: stitch side must be an object")))?;
        let name = field(obj, "panel", ctx)?.as_str().ok_or_else(|| schema(format!("{ctx}: panel must be a name")))?;
        let pi = order.iter().position(|x| x == name).ok_or_else(|| schema(format!("{ctx}: unknown panel `{name}`")))?;
        Ok(EdgeRef::new(pi, index(field(obj, "edge", ctx)?, ctx)?))
    };
    let mut stitches = Vec::new();
    if let Some(list) = spec.get("stitches") {
        for (k, s) in list.as_array().ok_or_else(|| schema("stitches must be a list"))?.iter().enumerate() {
            let ctx = format!("stitch {k}");
            let sides = s.as_array().ok_or_else(|| schema(format!("{ctx}: must be a list")))?;
            let [a, b] = sides.as_slice() else {
                return Err(Error::Unsupported(format!("{}-sided stitch", sides.len())));
            };
            stitches.push(StitchPair::new(lookup(a, &ctx)?, lookup(b, &ctx)?));
        }
    }
    let name = root.get("name").or_else(|| spec.get("name")).and_then(Value::as_str).unwrap_or_default().to_string();
    let p = Pattern { name, panels: out, stitches };
    let violations = validate_pattern(&p);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(p)
}

/// True when the document looks like a GarmentCodeData specification rather
/// than a canonical pattern.
pub fn is_external(bytes: &[u8]) -> bool {
    match serde_json::from_slice::<Value>(bytes) {
        Ok(Value::Object(root)) => {
            let spec = match root.get("pattern") {
                Some(Value::Object(p)) => p,
                _ => &root,
            };
            spec.get("panels").is_some_and(Value::is_object)
        }
        _ => false,
    }
}
