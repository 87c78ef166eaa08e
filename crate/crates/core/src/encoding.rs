//! Per-edge geometric features and the ring-shaped stitch graph.
//!
//! Encoded slot layout (24 values):
//! `[x0, y0, x1, y1, l, ox, oy, k_t, k1..k10, sin αl, cos αl, sin αr, cos αr, N, u]`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geometry::{interior_angle, CurveKind, Vertex2, CURVATURE_SLOTS};
use crate::math;
use crate::pattern::{EdgeRef, Panel, Pattern, StitchPair};
use crate::tensor::Matrix;
use crate::{Error, Result};

/// Width of an encoded feature vector.
pub const FEATURE_DIM: usize = 24;

/// Tag stored in checkpoints; bump whenever the slot layout changes.
pub const LAYOUT_TAG: &str = "edge24-v1";

/// Geometric scale applied to cm-valued features.
pub const GEOMETRY_SCALE: f64 = 0.01;

pub mod slot {
    pub const START: usize = 0;
    pub const END: usize = 2;
    pub const LENGTH: usize = 4;
    pub const ORIENTATION: usize = 5;
    pub const KIND: usize = 7;
    pub const PARAMS: usize = 8;
    pub const ANGLE_LEFT: usize = 18;
    pub const ANGLE_RIGHT: usize = 20;
    pub const EDGE_COUNT: usize = 22;
    pub const PANEL_ID: usize = 23;
}

/// The 22 raw per-edge descriptors, in cm and radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEdgeFeatures {
    pub start: Vertex2,
    pub end: Vertex2,
    pub length: f64,
    pub orientation: Vertex2,
    pub kind: CurveKind,
    pub params: [f64; CURVATURE_SLOTS],
    pub angle_left: f64,
    pub angle_right: f64,
    pub edge_count: usize,
    pub panel_index: usize,
}

/// Feature-subset switches used for ablations. Disabled groups are zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureMask {
    pub panel_id: bool,
    /// Interior angles, edge count and panel id.
    pub topology: bool,
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self { panel_id: true, topology: true }
    }
}

/// Maps edges of an input pattern to the canonical pattern produced by
/// [`preprocess_pattern`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRemap {
    /// `panel[old] = new`
    pub panel: Vec<usize>,
    /// `edge[old_panel][old_edge] = new_edge`
    pub edge: Vec<Vec<usize>>,
    inverse: Vec<(usize, Vec<usize>)>,
}

impl PatternRemap {
    fn new(panel: Vec<usize>, edge: Vec<Vec<usize>>) -> Self {
        let mut inverse = vec![(0, Vec::new()); panel.len()];
        for (old, &new) in panel.iter().enumerate() {
            let mut inv = vec![0; edge[old].len()];
            for (oe, &ne) in edge[old].iter().enumerate() {
                inv[ne] = oe;
            }
            inverse[new] = (old, inv);
        }
        Self { panel, edge, inverse }
    }

    pub fn forward(&self, r: EdgeRef) -> EdgeRef {
        EdgeRef::new(self.panel[r.panel], self.edge[r.panel][r.edge])
    }

    pub fn backward(&self, r: EdgeRef) -> EdgeRef {
        let (old, inv) = &self.inverse[r.panel];
        EdgeRef::new(*old, inv[r.edge])
    }
}

/// Translates the panel so its lower-left bounding-box corner sits at the
/// origin and rewrites the loop anticlockwise, starting from the edge whose
/// start vertex is lowest (then leftmost). Returns the old-to-new edge map.
pub fn preprocess_panel(p: &Panel) -> Result<(Panel, Vec<usize>)> {
    let area = p.signed_area();
    if !(math::abs(area) > 0.0) {
        return Err(Error::DegeneratePanel { panel: p.id.clone() });
    }
    let (oriented, first) = p
        .relooped(0, area < 0.0)
        .ok_or(Error::DegeneratePanel { panel: p.id.clone() })?;
    let (lo, _) = oriented.bbox();
    let start = (0..oriented.edges.len())
        .min_by(|&i, &j| {
            let (a, b) = (oriented.vertices[i], oriented.vertices[j]);
            a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
        })
        .unwrap_or(0);
    let (mut out, second) = oriented.relooped(start, false).expect("relooped panel is a loop");
    for v in &mut out.vertices {
        *v = *v - lo;
    }
    let remap = first.iter().map(|&k| second[k]).collect();
    Ok((out, remap))
}

fn cmp_f64s(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> Ordering {
    let mut b = b;
    for x in a {
        match b.next() {
            None => return Ordering::Greater,
            Some(y) => match x.total_cmp(&y) {
                Ordering::Equal => {}
                o => return o,
            },
        }
    }
    if b.next().is_some() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn panel_key(p: &Panel) -> impl Iterator<Item = f64> + '_ {
    p.edges.iter().flat_map(move |e| {
        let v = p.vertices[e.start];
        [v.x, v.y, e.curvature.kind.code() as f64].into_iter().chain(e.curvature.params)
    })
}

fn panel_order(a: &Panel, b: &Panel) -> Ordering {
    a.edges
        .len()
        .cmp(&b.edges.len())
        .then(a.signed_area().total_cmp(&b.signed_area()))
        .then_with(|| cmp_f64s(panel_key(a), panel_key(b)))
        .then_with(|| a.id.cmp(&b.id))
}

/// Preprocesses every panel and sorts panels by geometry, so the result does
/// not depend on the order in which panels or edges were listed. Stitches are
/// re-addressed into the canonical pattern.
pub fn preprocess_pattern(p: &Pattern) -> Result<(Pattern, PatternRemap)> {
    let violations = p.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidPattern(violations));
    }
    let mut prepared = Vec::with_capacity(p.panels.len());
    for panel in &p.panels {
        prepared.push(preprocess_panel(panel)?);
    }
    let mut order: Vec<usize> = (0..prepared.len()).collect();
    order.sort_by(|&i, &j| panel_order(&prepared[i].0, &prepared[j].0));
    let mut panel_map = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        panel_map[old] = new;
    }
    let edge_maps = prepared.iter().map(|(_, m)| m.clone()).collect();
    let remap = PatternRemap::new(panel_map, edge_maps);
    let panels = order.iter().map(|&old| prepared[old].0.clone()).collect();
    let mut stitches: Vec<StitchPair> =
        p.stitches.iter().map(|s| StitchPair::new(remap.forward(s.a()), remap.forward(s.b()))).collect();
    stitches.sort();
    Ok((Pattern { name: p.name.clone(), panels, stitches }, remap))
}

/// Raw descriptors for every edge, in node order (panel major, edge minor).
/// Interior angles use curve tangents at the shared vertex.
pub fn extract_raw(p: &Pattern) -> Vec<RawEdgeFeatures> {
    let mut out = Vec::with_capacity(p.edge_count());
    for (u, panel) in p.panels.iter().enumerate() {
        let n = panel.edges.len();
        let geoms: Vec<_> = (0..n).map(|k| panel.edge_geometry(k)).collect();
        for k in 0..n {
            let g = &geoms[k];
            let prev = &geoms[(k + n - 1) % n];
            let next = &geoms[(k + 1) % n];
            let chord = g.chord();
            out.push(RawEdgeFeatures {
                start: g.start,
                end: g.end,
                length: g.chord_length(),
                orientation: chord.normalized().unwrap_or(Vertex2::ZERO),
                kind: g.curvature.kind,
                params: g.curvature.params,
                angle_left: interior_angle(prev.end_tangent(), g.start_tangent()),
                angle_right: interior_angle(g.end_tangent(), next.start_tangent()),
                edge_count: n,
                panel_index: u,
            });
        }
    }
    out
}

/// Encodes raw descriptors of one pattern into an `M x 24` matrix.
pub fn encode(raw: &[RawEdgeFeatures], mask: FeatureMask) -> Matrix {
    let (min_n, max_n) = raw
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.edge_count), hi.max(r.edge_count)));
    let mut x = Matrix::zeros(raw.len(), FEATURE_DIM);
    for (i, r) in raw.iter().enumerate() {
        let row = x.row_mut(i);
        row[slot::START] = r.start.x * GEOMETRY_SCALE;
        row[slot::START + 1] = r.start.y * GEOMETRY_SCALE;
        row[slot::END] = r.end.x * GEOMETRY_SCALE;
        row[slot::END + 1] = r.end.y * GEOMETRY_SCALE;
        row[slot::LENGTH] = r.length * GEOMETRY_SCALE;
        row[slot::ORIENTATION] = r.orientation.x;
        row[slot::ORIENTATION + 1] = r.orientation.y;
        row[slot::KIND] = r.kind.code() as f64 / 5.0;
        let params = &mut row[slot::PARAMS..slot::PARAMS + CURVATURE_SLOTS];
        params.copy_from_slice(&r.params);
        if r.kind == CurveKind::CircularArc {
            params[0] *= GEOMETRY_SCALE;
        }
        if mask.topology {
            row[slot::ANGLE_LEFT] = math::sin(r.angle_left);
            row[slot::ANGLE_LEFT + 1] = math::cos(r.angle_left);
            row[slot::ANGLE_RIGHT] = math::sin(r.angle_right);
            row[slot::ANGLE_RIGHT + 1] = math::cos(r.angle_right);
            row[slot::EDGE_COUNT] = if max_n > min_n {
                (r.edge_count - min_n) as f64 / (max_n - min_n) as f64
            } else {
                0.0
            };
            if mask.panel_id {
                row[slot::PANEL_ID] = r.panel_index as f64 * GEOMETRY_SCALE;
            }
        }
    }
    x
}

/// Nodes are contour edges; each is linked to its predecessor and successor
/// on its panel contour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StitchGraph {
    refs: Vec<EdgeRef>,
    offsets: Vec<usize>,
    neighbors: Vec<[usize; 2]>,
}

impl StitchGraph {
    /// Ring graph for panels with the given edge counts.
    pub fn from_panel_sizes(sizes: &[usize]) -> Self {
        let mut refs = Vec::new();
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut neighbors = Vec::new();
        for (p, &n) in sizes.iter().enumerate() {
            let base = refs.len();
            offsets.push(base);
            for e in 0..n {
                refs.push(EdgeRef::new(p, e));
                neighbors.push([base + (e + n - 1) % n, base + (e + 1) % n]);
            }
        }
        offsets.push(refs.len());
        Self { refs, offsets, neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.refs.len()
    }

    pub fn panel_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn node(&self, r: EdgeRef) -> Option<usize> {
        let base = *self.offsets.get(r.panel)?;
        let end = self.offsets[r.panel + 1];
        (base + r.edge < end).then_some(base + r.edge)
    }

    pub fn edge_ref(&self, node: usize) -> EdgeRef {
        self.refs[node]
    }

    /// Contour predecessor and successor.
    pub fn neighbors(&self, node: usize) -> [usize; 2] {
        self.neighbors[node]
    }

    /// The same graph with nodes relabelled so old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.node_count();
        let mut refs = vec![EdgeRef::new(0, 0); n];
        let mut neighbors = vec![[0, 0]; n];
        for i in 0..n {
            refs[perm[i]] = self.refs[i];
            let [a, b] = self.neighbors[i];
            neighbors[perm[i]] = [perm[a], perm[b]];
        }
        Self { refs, offsets: self.offsets.clone(), neighbors }
    }
}

pub fn build_graph(p: &Pattern) -> StitchGraph {
    let sizes: Vec<usize> = p.panels.iter().map(|x| x.edges.len()).collect();
    StitchGraph::from_panel_sizes(&sizes)
}

/// Node-addressed ground-truth pairs of a (preprocessed) pattern.
pub fn node_pairs(p: &Pattern, g: &StitchGraph) -> Vec<(usize, usize)> {
    p.stitches
        .iter()
        .filter_map(|s| Some((g.node(s.a())?, g.node(s.b())?)))
        .collect()
}

/// Everything the model needs from one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPattern {
    pub pattern: Pattern,
    pub remap: PatternRemap,
    pub graph: StitchGraph,
    pub features: Matrix,
}

pub fn encode_pattern(p: &Pattern, mask: FeatureMask) -> Result<EncodedPattern> {
    let (pattern, remap) = preprocess_pattern(p)?;
    let graph = build_graph(&pattern);
    let features = encode(&extract_raw(&pattern), mask);
    Ok(EncodedPattern { pattern, remap, graph, features })
}
