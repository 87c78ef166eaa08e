//! Planar geometry of panel edges.
//!
//! Curved edges store their control points in the edge-local frame where the
//! start vertex is `(0, 0)` and the end vertex is `(1, 0)`. A local point
//! `(u, v)` maps to `start + u * d + v * perp(d)` with `d = end - start` and
//! `perp` the counter-clockwise quarter turn.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{self, PI};

/// A point or vector in the pattern plane, in centimetres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vertex2 {
    pub x: f64,
    pub y: f64,
}

impl Vertex2 {
    pub const ZERO: Vertex2 = Vertex2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        math::atan2(self.y, self.x)
    }

    pub fn from_angle(a: f64) -> Self {
        Self::new(math::cos(a), math::sin(a))
    }

    pub fn rotate(self, a: f64) -> Self {
        let (s, c) = (math::sin(a), math::cos(a));
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 1e-12).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vertex2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vertex2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vertex2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Vertex2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Curvature family of an edge. The discriminant is the integer code used in
/// the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum CurveKind {
    #[default]
    Straight = 0,
    CircularArc = 1,
    QuadBezier = 2,
    CubicBezier = 3,
    BSpline = 4,
}

impl CurveKind {
    pub const ALL: [CurveKind; 5] = [
        CurveKind::Straight,
        CurveKind::CircularArc,
        CurveKind::QuadBezier,
        CurveKind::CubicBezier,
        CurveKind::BSpline,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Number of leading parameter slots that carry meaning.
    pub fn used_slots(self) -> usize {
        match self {
            CurveKind::Straight => 0,
            CurveKind::CircularArc => 3,
            CurveKind::QuadBezier => 2,
            CurveKind::CubicBezier => 4,
            CurveKind::BSpline => 10,
        }
    }

    pub fn is_bezier(self) -> bool {
        matches!(self, CurveKind::QuadBezier | CurveKind::CubicBezier)
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Straight => "straight",
            CurveKind::CircularArc => "arc",
            CurveKind::QuadBezier => "quad",
            CurveKind::CubicBezier => "cubic",
            CurveKind::BSpline => "bspline",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

pub const CURVATURE_SLOTS: usize = 10;

/// Shape of an edge between its two endpoints.
///
/// Slot layout of `params`:
/// - arc: `[r, d, theta, 0..]`, radius in cm, `d = +1` bulges to the left of
///   travel and `d = -1` to the right, `theta` the central angle in radians;
/// - quadratic Bézier: one local control point `[qx, qy, 0..]`;
/// - cubic Bézier: two local control points;
/// - B-spline: two cubic pieces joined at a junction point, stored as
///   `[q1, q2, c, q3, q4]` in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureSpec {
    pub kind: CurveKind,
    pub params: [f64; CURVATURE_SLOTS],
}

impl CurvatureSpec {
    pub fn straight() -> Self {
        Self::default()
    }

    pub fn arc(radius: f64, direction: f64, angle: f64) -> Self {
        let mut params = [0.0; CURVATURE_SLOTS];
        params[..3].copy_from_slice(&[radius, direction, angle]);
        Self { kind: CurveKind::CircularArc, params }
    }

    pub fn quad(q: Vertex2) -> Self {
        Self::from_points(CurveKind::QuadBezier, &[q])
    }

    pub fn cubic(q1: Vertex2, q2: Vertex2) -> Self {
        Self::from_points(CurveKind::CubicBezier, &[q1, q2])
    }

    pub fn bspline(q1: Vertex2, q2: Vertex2, junction: Vertex2, q3: Vertex2, q4: Vertex2) -> Self {
        Self::from_points(CurveKind::BSpline, &[q1, q2, junction, q3, q4])
    }

    fn from_points(kind: CurveKind, pts: &[Vertex2]) -> Self {
        let mut params = [0.0; CURVATURE_SLOTS];
        for (i, p) in pts.iter().enumerate() {
            params[2 * i] = p.x;
            params[2 * i + 1] = p.y;
        }
        Self { kind, params }
    }

    /// Local control points for the Bézier-family kinds (empty otherwise).
    pub fn control_points(&self) -> Vec<Vertex2> {
        match self.kind {
            CurveKind::QuadBezier | CurveKind::CubicBezier | CurveKind::BSpline => (0..self
                .kind
                .used_slots()
                / 2)
                .map(|i| Vertex2::new(self.params[2 * i], self.params[2 * i + 1]))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Arc bulge side: `+1` left of travel, `-1` right of travel.
    pub fn arc_direction(&self) -> f64 {
        if self.params[1] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// The same curve traversed from end to start.
    pub fn reversed(&self) -> Self {
        match self.kind {
            CurveKind::Straight => *self,
            CurveKind::CircularArc => {
                let mut c = *self;
                c.params[1] = -self.arc_direction();
                c
            }
            _ => {
                let pts: Vec<Vertex2> = self
                    .control_points()
                    .into_iter()
                    .rev()
                    .map(|p| Vertex2::new(1.0 - p.x, -p.y))
                    .collect();
                Self::from_points(self.kind, &pts)
            }
        }
    }

    /// The curve after mirroring the plane; travel direction is unchanged.
    pub fn reflected(&self) -> Self {
        match self.kind {
            CurveKind::Straight => *self,
            CurveKind::CircularArc => {
                let mut c = *self;
                c.params[1] = -self.arc_direction();
                c
            }
            _ => {
                let pts: Vec<Vertex2> = self
                    .control_points()
                    .into_iter()
                    .map(|p| Vertex2::new(p.x, -p.y))
                    .collect();
                Self::from_points(self.kind, &pts)
            }
        }
    }

    /// Whether every slot past the kind's used slots is exactly zero.
    pub fn unused_slots_zero(&self) -> bool {
        self.params[self.kind.used_slots()..].iter().all(|&v| v == 0.0)
    }
}

/// An edge placed in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    pub start: Vertex2,
    pub end: Vertex2,
    pub curvature: CurvatureSpec,
}

impl EdgeGeometry {
    pub fn new(start: Vertex2, end: Vertex2, curvature: CurvatureSpec) -> Self {
        Self { start, end, curvature }
    }

    pub fn chord(&self) -> Vertex2 {
        self.end - self.start
    }

    /// Euclidean distance between the endpoints.
    pub fn chord_length(&self) -> f64 {
        self.chord().norm()
    }

    pub fn local_to_world(&self, p: Vertex2) -> Vertex2 {
        self.start + self.local_vector(p)
    }

    pub fn local_vector(&self, v: Vertex2) -> Vertex2 {
        let d = self.chord();
        d * v.x + d.perp() * v.y
    }

    pub fn world_to_local(&self, p: Vertex2) -> Vertex2 {
        let d = self.chord();
        let q = p - self.start;
        let dd = d.dot(d);
        Vertex2::new(q.dot(d) / dd, q.dot(d.perp()) / dd)
    }

    /// Cubic control polygon(s) in world coordinates for the Bézier family.
    /// Quadratic curves are degree-elevated (exactly) to cubics.
    pub fn cubic_pieces(&self) -> Vec<[Vertex2; 4]> {
        let pts: Vec<Vertex2> = self
            .curvature
            .control_points()
            .into_iter()
            .map(|p| self.local_to_world(p))
            .collect();
        let (s, e) = (self.start, self.end);
        match self.curvature.kind {
            CurveKind::QuadBezier => {
                let q = pts[0];
                alloc::vec![[s, s + (q - s) * (2.0 / 3.0), e + (q - e) * (2.0 / 3.0), e]]
            }
            CurveKind::CubicBezier => alloc::vec![[s, pts[0], pts[1], e]],
            CurveKind::BSpline => {
                alloc::vec![[s, pts[0], pts[1], pts[2]], [pts[2], pts[3], pts[4], e]]
            }
            _ => Vec::new(),
        }
    }

    fn arc_frame(&self) -> ArcFrame {
        let theta = self.curvature.params[2];
        let dir = self.curvature.arc_direction();
        let chord = self.chord();
        let half = math::sin(theta / 2.0);
        let radius = if math::abs(half) > 1e-15 {
            chord.norm() / (2.0 * half)
        } else {
            f64::INFINITY
        };
        let heading0 = chord.angle() + dir * theta / 2.0;
        ArcFrame { theta, dir, radius, heading0 }
    }

    /// Point at curve parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> Vertex2 {
        match self.curvature.kind {
            CurveKind::Straight => self.start + self.chord() * t,
            CurveKind::CircularArc => {
                let f = self.arc_frame();
                if !f.radius.is_finite() {
                    return self.start + self.chord() * t;
                }
                let normal = Vertex2::new(math::sin(f.heading0), -math::cos(f.heading0)) * f.dir;
                let center = self.start + normal * f.radius;
                let beta0 = (self.start - center).angle();
                center + Vertex2::from_angle(beta0 - f.dir * f.theta * t) * f.radius
            }
            _ => {
                let pieces = self.cubic_pieces();
                let n = pieces.len() as f64;
                let scaled = (t * n).clamp(0.0, n);
                let idx = (scaled as usize).min(pieces.len() - 1);
                eval_cubic(&pieces[idx], scaled - idx as f64)
            }
        }
    }

    /// Unit tangent (direction of travel) at the start vertex.
    pub fn start_tangent(&self) -> Vertex2 {
        let fallback = self.chord().normalized().unwrap_or(Vertex2::new(1.0, 0.0));
        match self.curvature.kind {
            CurveKind::Straight => fallback,
            CurveKind::CircularArc => Vertex2::from_angle(self.arc_frame().heading0),
            _ => {
                let p = &self.cubic_pieces()[0];
                (p[1] - p[0])
                    .normalized()
                    .or_else(|| (p[2] - p[0]).normalized())
                    .unwrap_or(fallback)
            }
        }
    }

    /// Unit tangent (direction of travel) at the end vertex.
    pub fn end_tangent(&self) -> Vertex2 {
        let fallback = self.chord().normalized().unwrap_or(Vertex2::new(1.0, 0.0));
        match self.curvature.kind {
            CurveKind::Straight => fallback,
            CurveKind::CircularArc => {
                let f = self.arc_frame();
                Vertex2::from_angle(f.heading0 - f.dir * f.theta)
            }
            _ => {
                let pieces = self.cubic_pieces();
                let p = &pieces[pieces.len() - 1];
                (p[3] - p[2])
                    .normalized()
                    .or_else(|| (p[3] - p[1]).normalized())
                    .unwrap_or(fallback)
            }
        }
    }

    /// Polyline samples from the start (inclusive) to the end (exclusive).
    pub fn samples(&self, out: &mut Vec<Vertex2>) {
        let n = match self.curvature.kind {
            CurveKind::Straight => 1,
            _ => 16,
        };
        for k in 0..n {
            out.push(self.point_at(k as f64 / n as f64));
        }
    }
}

struct ArcFrame {
    theta: f64,
    dir: f64,
    radius: f64,
    heading0: f64,
}

fn eval_cubic(p: &[Vertex2; 4], t: f64) -> Vertex2 {
    let s = 1.0 - t;
    p[0] * (s * s * s) + p[1] * (3.0 * s * s * t) + p[2] * (3.0 * s * t * t) + p[3] * (t * t * t)
}

/// Shoelace area of a closed polyline; positive when anticlockwise.
pub fn signed_area(points: &[Vertex2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| points[i].cross(points[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

/// Interior angle at a vertex of an anticlockwise contour, given the travel
/// direction arriving at and leaving the vertex. The result lies in `[0, 2pi)`.
pub fn interior_angle(incoming: Vertex2, outgoing: Vertex2) -> f64 {
    let turn = math::atan2(incoming.cross(outgoing), incoming.dot(outgoing));
    PI - turn
}

/// Whether the closed polyline has two non-adjacent segments that touch.
pub fn self_intersects(points: &[Vertex2]) -> bool {
    let n = points.len();
    if n < 4 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn segments_intersect(a: Vertex2, b: Vertex2, c: Vertex2, d: Vertex2) -> bool {
    const EPS: f64 = 1e-9;
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    let on = |p: Vertex2, q: Vertex2, r: Vertex2, cr: f64| {
        math::abs(cr) <= EPS
            && r.x >= p.x.min(q.x) - EPS
            && r.x <= p.x.max(q.x) + EPS
            && r.y >= p.y.min(q.y) - EPS
            && r.y <= p.y.max(q.y) + EPS
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vertex2, b: Vertex2, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn semicircle_passes_through_apex() {
        let e = EdgeGeometry::new(
            Vertex2::new(0.0, 0.0),
            Vertex2::new(2.0, 0.0),
            CurvatureSpec::arc(1.0, 1.0, PI),
        );
        // d = +1 bulges left of travel, i.e. towards +y for a left-to-right chord.
        assert!(close(e.point_at(0.5), Vertex2::new(1.0, 1.0), 1e-12));
        assert!(close(e.point_at(1.0), e.end, 1e-12));
        assert!(close(e.start_tangent(), Vertex2::new(0.0, 1.0), 1e-12));
        assert!(close(e.end_tangent(), Vertex2::new(0.0, -1.0), 1e-12));
    }

    #[test]
    fn quad_reversal_traces_same_curve() {
        let e = EdgeGeometry::new(
            Vertex2::new(1.0, 2.0),
            Vertex2::new(4.0, 3.0),
            CurvatureSpec::quad(Vertex2::new(0.3, 0.4)),
        );
        let r = EdgeGeometry::new(e.end, e.start, e.curvature.reversed());
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!(close(e.point_at(t), r.point_at(1.0 - t), 1e-12));
        }
    }

    #[test]
    fn bspline_reversal_traces_same_curve() {
        let c = CurvatureSpec::bspline(
            Vertex2::new(0.1, 0.2),
            Vertex2::new(0.3, 0.4),
            Vertex2::new(0.5, 0.4),
            Vertex2::new(0.7, 0.3),
            Vertex2::new(0.9, 0.1),
        );
        let e = EdgeGeometry::new(Vertex2::new(0.0, 0.0), Vertex2::new(3.0, 1.0), c);
        let r = EdgeGeometry::new(e.end, e.start, c.reversed());
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!(close(e.point_at(t), r.point_at(1.0 - t), 1e-12));
        }
    }

    #[test]
    fn arc_reversal_traces_same_curve() {
        let e = EdgeGeometry::new(
            Vertex2::new(0.0, 0.0),
            Vertex2::new(2.0, 1.0),
            CurvatureSpec::arc(3.0, -1.0, 1.2),
        );
        let r = EdgeGeometry::new(e.end, e.start, e.curvature.reversed());
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!(close(e.point_at(t), r.point_at(1.0 - t), 1e-12));
        }
    }

    #[test]
    fn reflected_curve_matches_reflected_points() {
        let mirror = |p: Vertex2| Vertex2::new(p.x, 5.0 - p.y);
        for curvature in [
            CurvatureSpec::quad(Vertex2::new(0.5, 0.3)),
            CurvatureSpec::cubic(Vertex2::new(0.2, 0.3), Vertex2::new(0.7, -0.2)),
            CurvatureSpec::arc(2.0, 1.0, 1.0),
        ] {
            let e = EdgeGeometry::new(Vertex2::new(0.0, 1.0), Vertex2::new(2.0, 1.5), curvature);
            let m = EdgeGeometry::new(mirror(e.start), mirror(e.end), curvature.reflected());
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                assert!(close(mirror(e.point_at(t)), m.point_at(t), 1e-12));
            }
        }
    }

    #[test]
    fn local_world_round_trip() {
        let e = EdgeGeometry::new(Vertex2::new(1.0, -1.0), Vertex2::new(3.0, 2.0), CurvatureSpec::straight());
        let p = Vertex2::new(0.25, -0.75);
        assert!(close(e.world_to_local(e.local_to_world(p)), p, 1e-14));
    }

    #[test]
    fn interior_angle_of_square_corner() {
        let a = interior_angle(Vertex2::new(1.0, 0.0), Vertex2::new(0.0, 1.0));
        assert!(math::abs(a - PI / 2.0) < 1e-15);
        let reflex = interior_angle(Vertex2::new(1.0, 0.0), Vertex2::new(0.0, -1.0));
        assert!(math::abs(reflex - 3.0 * PI / 2.0) < 1e-15);
    }

    #[test]
    fn bowtie_self_intersects() {
        let square = [
            Vertex2::new(0.0, 0.0),
            Vertex2::new(1.0, 0.0),
            Vertex2::new(1.0, 1.0),
            Vertex2::new(0.0, 1.0),
        ];
        assert!(!self_intersects(&square));
        let bowtie = [square[0], square[2], square[1], square[3]];
        assert!(self_intersects(&bowtie));
    }
}
