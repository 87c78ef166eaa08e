//! Conversion of mirrored half-panels into whole panels with multi-edge stitch
//! annotations: mirroring, merging along a shared seam run, and collapsing of
//! adjacent edges that continue each other.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{self, CurvatureSpec, CurveKind, EdgeGeometry, Vertex2};
use crate::math;
use crate::pattern::{EdgeRef, Panel, Pattern, StitchPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorAxis {
    /// Reflect across the horizontal line through the bounding-box center.
    Horizontal,
    /// Reflect across the vertical line through the bounding-box center.
    Vertical,
}

/// Reflects vertex positions and curvature, keeping the edge listing. The
/// resulting loop runs clockwise if the input ran anticlockwise.
pub fn reflect_panel(p: &Panel, axis: MirrorAxis) -> Panel {
    let (lo, hi) = p.bbox();
    let c = (lo + hi) * 0.5;
    let vertices = p
        .vertices
        .iter()
        .map(|v| match axis {
            MirrorAxis::Horizontal => Vertex2::new(v.x, 2.0 * c.y - v.y),
            MirrorAxis::Vertical => Vertex2::new(2.0 * c.x - v.x, v.y),
        })
        .collect();
    let mut edges = p.edges.clone();
    for e in &mut edges {
        e.curvature = e.curvature.reflected();
    }
    Panel { id: p.id.clone(), vertices, edges }
}

/// Mirror image of a panel, re-normalized to anticlockwise traversal.
pub fn mirror_panel(p: &Panel, axis: MirrorAxis) -> Panel {
    mirror_panel_indexed(p, axis).0
}

/// Like [`mirror_panel`], also returning the old-to-new edge index map.
pub fn mirror_panel_indexed(p: &Panel, axis: MirrorAxis) -> (Panel, Vec<usize>) {
    orient_anticlockwise(&reflect_panel(p, axis))
}

/// Reverses the traversal when the contour runs clockwise. The panel is
/// always returned in normalized loop form.
pub fn orient_anticlockwise(p: &Panel) -> (Panel, Vec<usize>) {
    let reverse = p.signed_area() < 0.0;
    p.relooped(0, reverse)
        .unwrap_or_else(|| (p.clone(), (0..p.edges.len()).collect()))
}

/// Edges of panel `a` paired with the edges of panel `b` that trace the same
/// seam in the opposite direction. Pairs are listed in `a`'s traversal order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

/// Where each edge of the merge inputs ended up. `None` marks an edge that was
/// consumed by the shared seam.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRemap {
    pub a: Vec<Option<usize>>,
    pub b: Vec<Option<usize>>,
}

impl EdgeRemap {
    pub fn identity(n: usize) -> Self {
        Self { a: (0..n).map(Some).collect(), b: Vec::new() }
    }

    fn compose(&self, next: &[usize]) -> Self {
        let f = |v: &Vec<Option<usize>>| v.iter().map(|o| o.map(|i| next[i])).collect();
        Self { a: f(&self.a), b: f(&self.b) }
    }
}

/// Tolerances for seam matching and collapsing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeTolerance {
    /// Length (cm) and curvature-parameter tolerance.
    pub tol: f64,
    /// Collinearity / tangent-continuity tolerance in radians.
    pub angle_tol: f64,
}

impl Default for MergeTolerance {
    fn default() -> Self {
        Self { tol: 1e-3, angle_tol: 1e-4 }
    }
}

fn edges_compatible(a: &EdgeGeometry, b: &EdgeGeometry, tol: f64) -> bool {
    if a.curvature.kind != b.curvature.kind || math::abs(a.chord_length() - b.chord_length()) > tol {
        return false;
    }
    let rb = b.curvature.reversed();
    let n = a.curvature.kind.used_slots();
    a.curvature.params[..n]
        .iter()
        .zip(&rb.params[..n])
        .all(|(x, y)| math::abs(x - y) <= tol)
}

/// Rigid motion (rotation about the origin, then translation) placing `b`
/// next to `a`.
#[derive(Debug, Clone, Copy)]
struct Rigid {
    angle: f64,
    b_anchor: Vertex2,
    a_anchor: Vertex2,
}

impl Rigid {
    fn apply(&self, p: Vertex2) -> Vertex2 {
        self.a_anchor + (p - self.b_anchor).rotate(self.angle)
    }
}

struct Candidate {
    corr: Correspondence,
    length: f64,
    preferred: bool,
}

/// Finds the seam run along which `b` can be attached to `a`: a maximal run
/// of consecutive edges of `a` and `b` (the latter traversed backwards) with
/// matching lengths and curvature that can be brought into coincidence by a
/// rigid motion without the merged outline crossing itself.
pub fn panels_mergeable(a: &Panel, b: &Panel, tol: f64) -> Option<Correspondence> {
    let tol = MergeTolerance { tol, ..MergeTolerance::default() };
    find_merge_run(a, b, tol, |_, _| false)
}

/// [`panels_mergeable`] with a preference predicate: runs whose every edge
/// pair satisfies `prefer(a_edge, b_edge)` win over longer runs that do not.
pub fn find_merge_run(
    a: &Panel,
    b: &Panel,
    tol: MergeTolerance,
    prefer: impl Fn(usize, usize) -> bool,
) -> Option<Correspondence> {
    let oa = a.loop_order()?;
    let ob = b.loop_order()?;
    let (na, nb) = (oa.len(), ob.len());
    let max_len = na.min(nb) - 1;
    let mut best: Option<Candidate> = None;
    for i in 0..na {
        for j in 0..nb {
            let ga = a.edge_geometry(oa[i]);
            let gb = b.edge_geometry(ob[j]);
            if !edges_compatible(&ga, &gb, tol.tol) {
                continue;
            }
            // b's edge runs from near a's end back to near a's start
            let angle = (ga.start - ga.end).angle() - (gb.end - gb.start).angle();
            let rigid = Rigid { angle, b_anchor: gb.start, a_anchor: ga.end };
            let mut pairs = Vec::new();
            let mut length = 0.0;
            for k in 0..max_len {
                let ea = oa[(i + k) % na];
                let eb = ob[(j + nb - k) % nb];
                let ga = a.edge_geometry(ea);
                let gb = b.edge_geometry(eb);
                if !edges_compatible(&ga, &gb, tol.tol)
                    || rigid.apply(gb.start).distance(ga.end) > tol.tol
                    || rigid.apply(gb.end).distance(ga.start) > tol.tol
                {
                    break;
                }
                pairs.push((ea, eb));
                length += ga.chord_length();
            }
            if pairs.is_empty() {
                continue;
            }
            let preferred = pairs.iter().all(|&(x, y)| prefer(x, y));
            let corr = Correspondence { pairs };
            let better = match &best {
                None => true,
                Some(c) => {
                    (preferred, length, corr.pairs.len())
                        > (c.preferred, c.length + tol.tol, c.corr.pairs.len())
                        || (preferred && !c.preferred)
                }
            };
            if better && merge_panels(a, b, &corr).is_ok() {
                best = Some(Candidate { corr, length, preferred });
            }
        }
    }
    best.map(|c| c.corr)
}

/// Joins `b` onto `a` along the corresponding seam run. The result lies in
/// `a`'s frame; its boundary is the union of both contours minus the run.
pub fn merge_panels(a: &Panel, b: &Panel, corr: &Correspondence) -> Result<(Panel, EdgeRemap)> {
    let oa = a.loop_order().ok_or(Error::MergeFailed("first panel is not a closed loop"))?;
    let ob = b.loop_order().ok_or(Error::MergeFailed("second panel is not a closed loop"))?;
    let (na, nb) = (oa.len(), ob.len());
    let k = corr.pairs.len();
    if k == 0 {
        return Err(Error::MergeFailed("empty correspondence"));
    }
    if k >= na || k >= nb {
        return Err(Error::MergeFailed("correspondence covers a whole panel"));
    }
    let pos_a = |e: usize| oa.iter().position(|&x| x == e);
    let pos_b = |e: usize| ob.iter().position(|&x| x == e);
    let ia = pos_a(corr.pairs[0].0).ok_or(Error::MergeFailed("unknown edge of first panel"))?;
    let jb = pos_b(corr.pairs[0].1).ok_or(Error::MergeFailed("unknown edge of second panel"))?;
    for (step, &(ea, eb)) in corr.pairs.iter().enumerate() {
        if oa[(ia + step) % na] != ea || ob[(jb + nb - step) % nb] != eb {
            return Err(Error::MergeFailed("correspondence is not a contiguous run"));
        }
    }

    let ga0 = a.edge_geometry(oa[ia]);
    let gb0 = b.edge_geometry(ob[jb]);
    let rigid = Rigid {
        angle: (ga0.start - ga0.end).angle() - (gb0.end - gb0.start).angle(),
        b_anchor: gb0.start,
        a_anchor: ga0.end,
    };

    let mut points = Vec::with_capacity(na + nb - 2 * k);
    let mut curvatures = Vec::with_capacity(na + nb - 2 * k);
    let mut remap = EdgeRemap { a: vec![None; na], b: vec![None; nb] };
    for step in k..na {
        let e = oa[(ia + step) % na];
        remap.a[e] = Some(points.len());
        points.push(a.vertices[a.edges[e].start]);
        curvatures.push(a.edges[e].curvature);
    }
    let run_start = a.vertices[a.edges[oa[ia]].start];
    for step in 1..=(nb - k) {
        let e = ob[(jb + step) % nb];
        remap.b[e] = Some(points.len());
        let p = if step == 1 { run_start } else { rigid.apply(b.vertices[b.edges[e].start]) };
        points.push(p);
        curvatures.push(b.edges[e].curvature);
    }

    let merged = Panel::from_loop(a.id.clone(), points, curvatures);
    let outline = merged.outline();
    if geometry::self_intersects(&outline) {
        return Err(Error::MergeFailed("merged outline intersects itself"));
    }
    if geometry::signed_area(&outline) <= 0.0 {
        return Err(Error::MergeFailed("merged outline is not anticlockwise"));
    }
    Ok((merged, remap))
}

fn collapsible(p: &Panel, i: usize, j: usize, tol: MergeTolerance) -> bool {
    let (gi, gj) = (p.edge_geometry(i), p.edge_geometry(j));
    let (ki, kj) = (gi.curvature.kind, gj.curvature.kind);
    let turn = |u: Vertex2, v: Vertex2| math::abs(math::atan2(u.cross(v), u.dot(v)));
    if ki == CurveKind::Straight && kj == CurveKind::Straight {
        match (gi.chord().normalized(), gj.chord().normalized()) {
            (Some(u), Some(v)) => turn(u, v) < tol.angle_tol,
            _ => false,
        }
    } else if ki.is_bezier() && kj.is_bezier() {
        turn(gi.end_tangent(), gj.start_tangent()) < tol.angle_tol
    } else {
        false
    }
}

fn join(p: &Panel, i: usize, j: usize) -> (Vertex2, CurvatureSpec) {
    let (gi, gj) = (p.edge_geometry(i), p.edge_geometry(j));
    let joined = EdgeGeometry::new(gi.start, gj.end, CurvatureSpec::straight());
    if gi.curvature.kind == CurveKind::Straight {
        return (gi.start, CurvatureSpec::straight());
    }
    let first = gi.cubic_pieces()[0];
    let second = gj.cubic_pieces()[0];
    let local = |v: Vertex2| joined.world_to_local(v);
    let spline = CurvatureSpec::bspline(
        local(first[1]),
        local(first[2]),
        local(first[3]),
        local(second[1]),
        local(second[2]),
    );
    (gi.start, spline)
}

/// Collapses consecutive collinear straight edges into one straight edge and
/// tangent-continuous pairs of quadratic/cubic Bézier edges into one B-spline.
/// `remap` is composed with the collapse so it keeps pointing at edges of the
/// returned panel.
pub fn collapse_edges(p: &Panel, remap: &EdgeRemap, tol: MergeTolerance) -> (Panel, EdgeRemap) {
    let Some((mut cur, first_map)) = p.relooped(0, false) else {
        return (p.clone(), remap.clone());
    };
    // origins[k] = edges of `p` that make up current edge k
    let mut origins: Vec<Vec<usize>> = (0..cur.edges.len()).map(|_| Vec::new()).collect();
    for (old, &new) in first_map.iter().enumerate() {
        origins[new].push(old);
    }
    loop {
        let n = cur.edges.len();
        if n <= 2 {
            break;
        }
        let Some(i) = (0..n).find(|&i| collapsible(&cur, i, (i + 1) % n, tol)) else {
            break;
        };
        let j = (i + 1) % n;
        let (start, curvature) = join(&cur, i, j);
        let mut points = Vec::with_capacity(n - 1);
        let mut curvatures = Vec::with_capacity(n - 1);
        let mut new_origins = Vec::with_capacity(n - 1);
        // the joined edge takes slot i; when it wraps (j == 0) it becomes the first edge
        let order: Vec<usize> = if j == 0 { core::iter::once(i).chain(1..i).collect() } else { (0..n).collect() };
        for &k in &order {
            if k == j {
                continue;
            }
            if k == i {
                points.push(start);
                curvatures.push(curvature);
                let mut o = origins[i].clone();
                o.extend_from_slice(&origins[j]);
                new_origins.push(o);
            } else {
                points.push(cur.vertices[cur.edges[k].start]);
                curvatures.push(cur.edges[k].curvature);
                new_origins.push(origins[k].clone());
            }
        }
        cur = Panel::from_loop(cur.id.clone(), points, curvatures);
        origins = new_origins;
    }
    let mut map = vec![0; p.edges.len()];
    for (new, olds) in origins.iter().enumerate() {
        for &o in olds {
            map[o] = new;
        }
    }
    (cur, remap.compose(&map))
}

/// Panel-role patterns and tolerances for [`transform_pattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct MergeConfig {
    pub sleeve_id_pattern: String,
    pub cuff_id_pattern: String,
    pub torso_id_patterns: Vec<String>,
    pub tolerance: MergeTolerance,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            sleeve_id_pattern: "sleeve".to_string(),
            cuff_id_pattern: "cuff".to_string(),
            torso_id_patterns: vec!["ftorso".to_string(), "btorso".to_string()],
            tolerance: MergeTolerance::default(),
        }
    }
}

/// A pair of half-panels to be fused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeGroup {
    pub merged_id: String,
    pub keep: String,
    pub absorb: String,
    pub mirror: Option<MirrorAxis>,
}

/// Pairs up half-panels by id. Sleeve and cuff halves differ by a trailing
/// `_f` / `_b`; the back half is mirrored (horizontally for sleeves,
/// vertically for cuffs). Torso halves differ by a leading `left_` /
/// `right_` and are merged as drawn.
pub fn find_merge_groups(p: &Pattern, cfg: &MergeConfig) -> Vec<MergeGroup> {
    let mut groups = Vec::new();
    let ids: Vec<&str> = p.panels.iter().map(|x| x.id.as_str()).collect();
    let has = |id: &str| ids.contains(&id);
    let nonempty = |pat: &str| !pat.is_empty();
    for id in &ids {
        let is_cuff = nonempty(&cfg.cuff_id_pattern) && id.contains(cfg.cuff_id_pattern.as_str());
        let is_sleeve =
            !is_cuff && nonempty(&cfg.sleeve_id_pattern) && id.contains(cfg.sleeve_id_pattern.as_str());
        if is_cuff || is_sleeve {
            if let Some(key) = id.strip_suffix("_f") {
                let back = alloc::format!("{key}_b");
                if has(&back) {
                    groups.push(MergeGroup {
                        merged_id: key.to_string(),
                        keep: id.to_string(),
                        absorb: back,
                        mirror: Some(if is_cuff { MirrorAxis::Vertical } else { MirrorAxis::Horizontal }),
                    });
                }
            }
            continue;
        }
        let is_torso = cfg.torso_id_patterns.iter().any(|t| nonempty(t) && id.contains(t.as_str()));
        if is_torso {
            if let Some(key) = id.strip_prefix("left_") {
                let right = alloc::format!("right_{key}");
                if has(&right) {
                    groups.push(MergeGroup {
                        merged_id: key.to_string(),
                        keep: id.to_string(),
                        absorb: right,
                        mirror: None,
                    });
                }
            }
        }
    }
    groups
}

/// Mirrors, merges and collapses every identified half-panel pair, carrying
/// stitch annotations through. Stitches between the two halves of a merged
/// seam disappear; stitches on collapsed edges end up on the combined edge,
/// which is how one-to-many seams arise.
pub fn transform_pattern(p: &Pattern, cfg: &MergeConfig) -> Result<Pattern> {
    let mut cur = p.clone();
    for group in find_merge_groups(p, cfg) {
        let (Some(ia), Some(ib)) = (cur.panel_index(&group.keep), cur.panel_index(&group.absorb)) else {
            continue;
        };
        cur = merge_group(&cur, ia, ib, &group, cfg.tolerance)?;
    }
    Ok(cur)
}

fn merge_group(p: &Pattern, ia: usize, ib: usize, group: &MergeGroup, tol: MergeTolerance) -> Result<Pattern> {
    let a = &p.panels[ia];
    let (b, b_map) = match group.mirror {
        Some(axis) => mirror_panel_indexed(&p.panels[ib], axis),
        None => (p.panels[ib].clone(), (0..p.panels[ib].edges.len()).collect()),
    };
    let mut b_inverse = vec![0; b_map.len()];
    for (old, &new) in b_map.iter().enumerate() {
        b_inverse[new] = old;
    }
    let stitched: BTreeSet<StitchPair> = p.stitches.iter().copied().collect();
    let prefer = |ea: usize, eb: usize| {
        stitched.contains(&StitchPair::new(EdgeRef::new(ia, ea), EdgeRef::new(ib, b_inverse[eb])))
    };
    let corr = find_merge_run(a, &b, tol, prefer).ok_or_else(|| Error::NotMergeable {
        a: group.keep.clone(),
        b: group.absorb.clone(),
    })?;
    let (merged, remap) = merge_panels(a, &b, &corr)?;
    let (mut merged, remap) = collapse_edges(&merged, &remap, tol);
    merged.id = group.merged_id.clone();

    let mut panels = Vec::with_capacity(p.panels.len() - 1);
    let mut panel_map = vec![None; p.panels.len()];
    for (i, panel) in p.panels.iter().enumerate() {
        if i == ib {
            continue;
        }
        panel_map[i] = Some(panels.len());
        panels.push(if i == ia { merged.clone() } else { panel.clone() });
    }
    let new_ia = panel_map[ia].expect("kept panel survives");
    let map_ref = |r: EdgeRef| -> Option<EdgeRef> {
        if r.panel == ia {
            remap.a[r.edge].map(|e| EdgeRef::new(new_ia, e))
        } else if r.panel == ib {
            remap.b[b_map[r.edge]].map(|e| EdgeRef::new(new_ia, e))
        } else {
            Some(EdgeRef::new(panel_map[r.panel].expect("other panels survive"), r.edge))
        }
    };

    let mut stitches = Vec::with_capacity(p.stitches.len());
    let mut seen = BTreeSet::new();
    for s in &p.stitches {
        match (map_ref(s.a()), map_ref(s.b())) {
            (Some(x), Some(y)) if x != y => {
                let pair = StitchPair::new(x, y);
                if seen.insert(pair) {
                    stitches.push(pair);
                }
            }
            (Some(_), Some(_)) | (None, None) => {}
            (None, Some(_)) => return Err(orphan(p, s.a())),
            (Some(_), None) => return Err(orphan(p, s.b())),
        }
    }
    Ok(Pattern { name: p.name.clone(), panels, stitches })
}

fn orphan(p: &Pattern, r: EdgeRef) -> Error {
    Error::OrphanedStitch { panel: p.panels[r.panel].id.clone(), edge: r.edge }
}
