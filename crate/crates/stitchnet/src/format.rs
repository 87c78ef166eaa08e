//! Canonical pattern documents.
//!
//! ```json
//! {
//!   "name": "tube-00000",
//!   "panels": [
//!     { "id": "front",
//!       "vertices": [[0, 0], [40, 0], [40, 60], [0, 60]],
//!       "edges": [{ "start": 0, "end": 1, "curvature": { "kind": "straight", "params": [0, 0, 0, 0, 0, 0, 0, 0, 0, 0] } }] }
//!   ],
//!   "stitches": [[{ "panel": 0, "edge": 1 }, { "panel": 1, "edge": 3 }]]
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stitchnet_core::geometry::{CurvatureSpec, CurveKind, Vertex2, CURVATURE_SLOTS};
use stitchnet_core::pattern::{validate_pattern, EdgeRef, Panel, PanelEdge, Pattern, StitchPair};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct PatternDoc {
    name: String,
    panels: Vec<PanelDoc>,
    stitches: Vec<[RefDoc; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PanelDoc {
    id: String,
    vertices: Vec<[f64; 2]>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDoc {
    start: usize,
    end: usize,
    curvature: CurvatureDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurvatureDoc {
    kind: String,
    params: [f64; CURVATURE_SLOTS],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub(crate) struct RefDoc {
    pub panel: usize,
    pub edge: usize,
}

impl From<EdgeRef> for RefDoc {
    fn from(r: EdgeRef) -> Self {
        Self { panel: r.panel, edge: r.edge }
    }
}

impl From<RefDoc> for EdgeRef {
    fn from(r: RefDoc) -> Self {
        EdgeRef::new(r.panel, r.edge)
    }
}

/// Parses and validates a canonical pattern document.
pub fn parse_pattern(bytes: &[u8]) -> Result<Pattern> {
    let p = parse_unchecked(bytes)?;
    let violations = validate_pattern(&p);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(p)
}

/// Parses without validating. Stitch pairs are still put in canonical order.
pub fn parse_unchecked(bytes: &[u8]) -> Result<Pattern> {
    let doc: PatternDoc = serde_json::from_slice(bytes)?;
    let panels = doc
        .panels
        .into_iter()
        .map(|p| {
            let edges = p
                .edges
                .into_iter()
                .map(|e| {
                    let kind = CurveKind::from_name(&e.curvature.kind)
                        .ok_or_else(|| Error::Schema(format!("unknown curvature kind `{}`", e.curvature.kind)))?;
                    Ok(PanelEdge::new(e.start, e.end, CurvatureSpec { kind, params: e.curvature.params }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Panel { id: p.id, vertices: p.vertices.iter().map(|v| Vertex2::new(v[0], v[1])).collect(), edges })
        })
        .collect::<Result<Vec<_>>>()?;
    let stitches = doc.stitches.into_iter().map(|[a, b]| StitchPair::new(a.into(), b.into())).collect();
    Ok(Pattern { name: doc.name, panels, stitches })
}

/// Deterministic pretty-printed document; `parse_pattern` inverts it exactly.
pub fn serialize_pattern(p: &Pattern) -> String {
    let doc = PatternDoc {
        name: p.name.clone(),
        panels: p
            .panels
            .iter()
            .map(|panel| PanelDoc {
                id: panel.id.clone(),
                vertices: panel.vertices.iter().map(|v| [v.x, v.y]).collect(),
                edges: panel
                    .edges
                    .iter()
                    .map(|e| EdgeDoc {
                        start: e.start,
                        end: e.end,
                        curvature: CurvatureDoc { kind: e.curvature.kind.name().to_string(), params: e.curvature.params },
                    })
                    .collect(),
            })
            .collect(),
        stitches: p.stitches.iter().map(|s| [s.a().into(), s.b().into()]).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("pattern documents always serialize");
    out.push('\n');
    out
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn load_pattern(path: &Path) -> Result<Pattern> {
    parse_pattern(&read_file(path)?).map_err(|e| e.in_file(path))
}

pub fn save_pattern(path: &Path, p: &Pattern) -> Result<()> {
    write_file(path, serialize_pattern(p).as_bytes())
}

/// `*.json` files directly inside `dir`, sorted by path. The split manifest
/// written by `synth` is skipped.
pub fn pattern_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_json = path.extension().is_some_and(|x| x == "json");
        let is_manifest = path.file_name().is_some_and(|n| n == crate::MANIFEST_FILE);
        if path.is_file() && is_json && !is_manifest {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
