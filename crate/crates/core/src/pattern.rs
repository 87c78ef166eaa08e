//! Canonical data model for sewing patterns.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use crate::geometry::{CurvatureSpec, CurveKind, EdgeGeometry, Vertex2};

/// One boundary segment of a panel, addressed by vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelEdge {
    pub start: usize,
    pub end: usize,
    pub curvature: CurvatureSpec,
}

impl PanelEdge {
    pub fn new(start: usize, end: usize, curvature: CurvatureSpec) -> Self {
        Self { start, end, curvature }
    }

    pub fn straight(start: usize, end: usize) -> Self {
        Self::new(start, end, CurvatureSpec::straight())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub id: String,
    pub vertices: Vec<Vertex2>,
    pub edges: Vec<PanelEdge>,
}

impl Panel {
    /// Builds a panel whose edges run through `points` in order, closing back
    /// to the first point. `curvatures[i]` shapes the edge leaving `points[i]`.
    pub fn from_loop(id: impl Into<String>, points: Vec<Vertex2>, curvatures: Vec<CurvatureSpec>) -> Self {
        assert_eq!(points.len(), curvatures.len());
        let n = points.len();
        let edges = curvatures
            .into_iter()
            .enumerate()
            .map(|(i, c)| PanelEdge::new(i, (i + 1) % n, c))
            .collect();
        Self { id: id.into(), vertices: points, edges }
    }

    pub fn polygon(id: impl Into<String>, points: Vec<Vertex2>) -> Self {
        let n = points.len();
        Self::from_loop(id, points, vec![CurvatureSpec::straight(); n])
    }

    pub fn edge_geometry(&self, edge: usize) -> EdgeGeometry {
        let e = &self.edges[edge];
        EdgeGeometry::new(self.vertices[e.start], self.vertices[e.end], e.curvature)
    }

    /// Edge indices in traversal order starting from edge 0, or `None` when
    /// the edges do not form one closed loop over all vertices.
    pub fn loop_order(&self) -> Option<Vec<usize>> {
        let n = self.edges.len();
        if n < 2 || n != self.vertices.len() {
            return None;
        }
        let mut outgoing = vec![usize::MAX; n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.start >= n || e.end >= n || e.start == e.end || outgoing[e.start] != usize::MAX {
                return None;
            }
            outgoing[e.start] = i;
        }
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut current = 0;
        for _ in 0..n {
            if seen[current] {
                return None;
            }
            seen[current] = true;
            order.push(current);
            current = outgoing[self.edges[current].end];
            if current == usize::MAX {
                return None;
            }
        }
        (current == 0).then_some(order)
    }

    /// Rebuilds the panel with vertices listed in traversal order, so edge `k`
    /// runs from vertex `k` to vertex `k + 1`. Traversal starts at
    /// `first_edge`; with `reverse` the loop is walked backwards and every
    /// edge flipped. Returns the panel and the old-to-new edge index map.
    pub fn relooped(&self, first_edge: usize, reverse: bool) -> Option<(Panel, Vec<usize>)> {
        let order = self.loop_order()?;
        let n = order.len();
        let pos = order.iter().position(|&e| e == first_edge)?;
        let mut points = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        let mut remap = vec![0; n];
        for k in 0..n {
            let old = if reverse { order[(pos + n - k) % n] } else { order[(pos + k) % n] };
            let e = &self.edges[old];
            if reverse {
                points.push(self.vertices[e.end]);
                curvatures.push(e.curvature.reversed());
            } else {
                points.push(self.vertices[e.start]);
                curvatures.push(e.curvature);
            }
            remap[old] = k;
        }
        Some((Panel::from_loop(self.id.clone(), points, curvatures), remap))
    }

    /// Closed polyline approximating the contour in traversal order.
    pub fn outline(&self) -> Vec<Vertex2> {
        let mut pts = Vec::new();
        for i in self.loop_order().unwrap_or_default() {
            self.edge_geometry(i).samples(&mut pts);
        }
        pts
    }

    pub fn signed_area(&self) -> f64 {
        crate::geometry::signed_area(&self.outline())
    }

    /// Lower-left and upper-right corners of the vertex bounding box.
    pub fn bbox(&self) -> (Vertex2, Vertex2) {
        let mut lo = Vertex2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vertex2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Vertex2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vertex2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }
}

/// Address of one contour edge: panel index and edge index within the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    pub panel: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub const fn new(panel: usize, edge: usize) -> Self {
        Self { panel, edge }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.panel, self.edge)
    }
}

/// Undirected stitch between two edges, stored smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StitchPair {
    a: EdgeRef,
    b: EdgeRef,
}

impl StitchPair {
    pub fn new(x: EdgeRef, y: EdgeRef) -> Self {
        if x <= y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }

    pub fn a(&self) -> EdgeRef {
        self.a
    }

    pub fn b(&self) -> EdgeRef {
        self.b
    }

    pub fn contains(&self, e: EdgeRef) -> bool {
        self.a == e || self.b == e
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pattern {
    pub name: String,
    pub panels: Vec<Panel>,
    pub stitches: Vec<StitchPair>,
}

impl Pattern {
    /// Total number of contour edges.
    pub fn edge_count(&self) -> usize {
        self.panels.iter().map(|p| p.edges.len()).sum()
    }

    pub fn is_valid_ref(&self, r: EdgeRef) -> bool {
        self.panels.get(r.panel).is_some_and(|p| r.edge < p.edges.len())
    }

    pub fn panel_index(&self, id: &str) -> Option<usize> {
        self.panels.iter().position(|p| p.id == id)
    }

    pub fn stitch_set(&self) -> BTreeSet<StitchPair> {
        self.stitches.iter().copied().collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_pattern(self)
    }
}

/// A broken invariant, naming where it was found.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewEdges { panel: usize, edges: usize },
    VertexEdgeCountMismatch { panel: usize, vertices: usize, edges: usize },
    NonFiniteVertex { panel: usize, vertex: usize },
    VertexOutOfRange { panel: usize, edge: usize },
    ZeroLengthEdge { panel: usize, edge: usize },
    OpenLoop { panel: usize },
    NonFiniteCurvature { panel: usize, edge: usize },
    UnusedSlotNonZero { panel: usize, edge: usize },
    DuplicatePanelId { panel: usize },
    DanglingStitch { stitch: usize, edge: EdgeRef },
    SelfStitch { stitch: usize, edge: EdgeRef },
    DuplicateStitch { stitch: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewEdges { panel, edges } => {
                write!(f, "panel {panel}: needs at least 2 edges, has {edges}")
            }
            Violation::VertexEdgeCountMismatch { panel, vertices, edges } => write!(
                f,
                "panel {panel}: {vertices} vertices but {edges} edges, a single loop needs equal counts"
            ),
            Violation::NonFiniteVertex { panel, vertex } => {
                write!(f, "panel {panel}: vertex {vertex} is not finite")
            }
            Violation::VertexOutOfRange { panel, edge } => {
                write!(f, "panel {panel}: edge {edge} references a missing vertex")
            }
            Violation::ZeroLengthEdge { panel, edge } => {
                write!(f, "panel {panel}: edge {edge} starts and ends at the same vertex")
            }
            Violation::OpenLoop { panel } => {
                write!(f, "panel {panel}: edges do not form one closed loop")
            }
            Violation::NonFiniteCurvature { panel, edge } => {
                write!(f, "panel {panel}: edge {edge} has non-finite curvature parameters")
            }
            Violation::UnusedSlotNonZero { panel, edge } => {
                write!(f, "panel {panel}: edge {edge} has non-zero unused curvature slots")
            }
            Violation::DuplicatePanelId { panel } => {
                write!(f, "panel {panel}: id is not unique")
            }
            Violation::DanglingStitch { stitch, edge } => {
                write!(f, "stitch {stitch}: edge {edge} does not exist")
            }
            Violation::SelfStitch { stitch, edge } => {
                write!(f, "stitch {stitch}: edge {edge} is stitched to itself")
            }
            Violation::DuplicateStitch { stitch } => write!(f, "stitch {stitch}: duplicate pair"),
        }
    }
}

/// Checks every structural invariant of a pattern. An empty result means the
/// pattern is valid.
pub fn validate_pattern(p: &Pattern) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (pi, panel) in p.panels.iter().enumerate() {
        if !ids.insert(panel.id.as_str()) {
            out.push(Violation::DuplicatePanelId { panel: pi });
        }
        if panel.edges.len() < 2 {
            out.push(Violation::TooFewEdges { panel: pi, edges: panel.edges.len() });
        }
        if panel.vertices.len() != panel.edges.len() {
            out.push(Violation::VertexEdgeCountMismatch {
                panel: pi,
                vertices: panel.vertices.len(),
                edges: panel.edges.len(),
            });
        }
        for (vi, v) in panel.vertices.iter().enumerate() {
            if !v.is_finite() {
                out.push(Violation::NonFiniteVertex { panel: pi, vertex: vi });
            }
        }
        let mut edges_ok = true;
        for (ei, e) in panel.edges.iter().enumerate() {
            if e.start >= panel.vertices.len() || e.end >= panel.vertices.len() {
                out.push(Violation::VertexOutOfRange { panel: pi, edge: ei });
                edges_ok = false;
            } else if e.start == e.end {
                out.push(Violation::ZeroLengthEdge { panel: pi, edge: ei });
                edges_ok = false;
            }
            if e.curvature.params.iter().any(|v| !v.is_finite()) {
                out.push(Violation::NonFiniteCurvature { panel: pi, edge: ei });
            }
            if !e.curvature.unused_slots_zero() {
                out.push(Violation::UnusedSlotNonZero { panel: pi, edge: ei });
            }
        }
        if edges_ok && panel.edges.len() >= 2 && panel.loop_order().is_none() {
            out.push(Violation::OpenLoop { panel: pi });
        }
    }
    let mut seen = BTreeSet::new();
    for (si, s) in p.stitches.iter().enumerate() {
        for e in [s.a(), s.b()] {
            if !p.is_valid_ref(e) {
                out.push(Violation::DanglingStitch { stitch: si, edge: e });
            }
        }
        if s.a() == s.b() {
            out.push(Violation::SelfStitch { stitch: si, edge: s.a() });
        }
        if !seen.insert(*s) {
            out.push(Violation::DuplicateStitch { stitch: si });
        }
    }
    out
}
