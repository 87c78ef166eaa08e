//! Seeded generator of small garments with exact ground-truth stitches.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{CurvatureSpec, EdgeGeometry, Vertex2};
use crate::merge::{mirror_panel_indexed, orient_anticlockwise, reflect_panel, MirrorAxis};
use crate::pattern::{EdgeRef, Panel, Pattern, StitchPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Tube,
    FourPanelSkirt,
    BodiceWithSleeve,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Tube, Family::FourPanelSkirt, Family::BodiceWithSleeve];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tube => "tube",
            Family::FourPanelSkirt => "skirt",
            Family::BodiceWithSleeve => "bodice",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    fn stream(self) -> u64 {
        match self {
            Family::Tube => 1,
            Family::FourPanelSkirt => 2,
            Family::BodiceWithSleeve => 3,
        }
    }
}

struct Jitter {
    rng: ChaCha8Rng,
    amount: f64,
}

impl Jitter {
    /// `base * (1 + U(-j, j))`.
    fn scale(&mut self, base: f64) -> f64 {
        let r: f64 = self.rng.gen_range(-1.0..=1.0);
        if self.amount == 0.0 {
            base
        } else {
            base * (1.0 + self.amount * r)
        }
    }
}

fn pair(a: (usize, usize), b: (usize, usize)) -> StitchPair {
    StitchPair::new(EdgeRef::new(a.0, a.1), EdgeRef::new(b.0, b.1))
}

fn rectangle(id: &str, w: f64, h: f64) -> Panel {
    Panel::polygon(id, vec![Vertex2::new(0.0, 0.0), Vertex2::new(w, 0.0), Vertex2::new(w, h), Vertex2::new(0.0, h)])
}

fn tube(j: &mut Jitter) -> (Vec<Panel>, Vec<StitchPair>) {
    let h = j.scale(60.0);
    let wa = j.scale(40.0);
    let wb = j.scale(44.0);
    // edges: bottom, right, top, left
    let panels = vec![rectangle("front", wa, h), rectangle("back", wb, h)];
    (panels, vec![pair((0, 3), (1, 3)), pair((0, 1), (1, 1))])
}

fn skirt(j: &mut Jitter) -> (Vec<Panel>, Vec<StitchPair>) {
    // seam k joins panel k's right side with panel k+1's left side
    let seams: Vec<(f64, f64, f64)> = (0..4).map(|_| (j.scale(60.0), j.scale(8.0), j.scale(0.04))).collect();
    let mut panels = Vec::with_capacity(4);
    for k in 0..4 {
        let width = j.scale(30.0);
        let (h_r, dx_r, b_r) = seams[k];
        let (h_l, dx_l, b_l) = seams[(k + 3) % 4];
        let points = vec![
            Vertex2::new(0.0, 0.0),
            Vertex2::new(width, 0.0),
            Vertex2::new(width + dx_r, h_r),
            Vertex2::new(-dx_l, h_l),
        ];
        let curvatures = vec![
            CurvatureSpec::straight(),
            CurvatureSpec::quad(Vertex2::new(0.5, -b_r)),
            CurvatureSpec::straight(),
            CurvatureSpec::quad(Vertex2::new(0.5, -b_l)),
        ];
        panels.push(Panel::from_loop(format!("panel{k}"), points, curvatures));
    }
    let stitches = (0..4).map(|k| pair((k, 1), ((k + 1) % 4, 3))).collect();
    (panels, stitches)
}

struct Torso {
    width: f64,
    side: f64,
    armhole_dx: f64,
    armhole_dy: f64,
    armhole_bulge: f64,
    neck_x: f64,
    shoulder_rise: f64,
    neck_depth: f64,
    neck_bulge: f64,
}

impl Torso {
    /// Edges: hem, side, armhole, shoulder, neckline, centre.
    fn panel(&self, id: &str) -> Panel {
        let top = self.side + self.armhole_dy + self.shoulder_rise;
        let points = vec![
            Vertex2::new(0.0, 0.0),
            Vertex2::new(self.width, 0.0),
            Vertex2::new(self.width, self.side),
            Vertex2::new(self.width - self.armhole_dx, self.side + self.armhole_dy),
            Vertex2::new(self.neck_x, top),
            Vertex2::new(0.0, top - self.neck_depth),
        ];
        let curvatures = vec![
            CurvatureSpec::straight(),
            CurvatureSpec::straight(),
            CurvatureSpec::quad(Vertex2::new(0.5, self.armhole_bulge)),
            CurvatureSpec::straight(),
            CurvatureSpec::quad(Vertex2::new(0.5, self.neck_bulge)),
            CurvatureSpec::straight(),
        ];
        Panel::from_loop(id, points, curvatures)
    }

    fn armhole_chord(&self) -> f64 {
        libm::hypot(self.armhole_dx, self.armhole_dy)
    }
}

const HEM: usize = 0;
const SIDE: usize = 1;
const ARMHOLE: usize = 2;
const SHOULDER: usize = 3;

struct Sleeve {
    cuff: f64,
    height: f64,
    cap_chord: f64,
    cap_height: f64,
}

impl Sleeve {
    fn corners(&self) -> [Vertex2; 4] {
        let flare = (self.cap_chord - self.cuff) / 2.0;
        [
            Vertex2::new(0.0, 0.0),
            Vertex2::new(self.cuff, 0.0),
            Vertex2::new(self.cuff + flare, self.height),
            Vertex2::new(-flare, self.height),
        ]
    }

    /// Cap control points `[q1, q2, junction, q3, q4]` in the cap's local
    /// frame; the cap runs right to left so outward is negative `v`.
    fn cap_points(&self) -> [Vertex2; 5] {
        let c = self.cap_height;
        [
            Vertex2::new(0.1, -0.6 * c),
            Vertex2::new(0.35, -c),
            Vertex2::new(0.5, -c),
            Vertex2::new(0.65, -c),
            Vertex2::new(0.9, -0.6 * c),
        ]
    }

    /// Edges: cuff, right underarm, cap, left underarm.
    fn panel(&self, id: &str) -> Panel {
        let [q1, q2, jn, q3, q4] = self.cap_points();
        Panel::from_loop(
            id,
            self.corners().to_vec(),
            vec![
                CurvatureSpec::straight(),
                CurvatureSpec::straight(),
                CurvatureSpec::bspline(q1, q2, jn, q3, q4),
                CurvatureSpec::straight(),
            ],
        )
    }

    /// The sleeve cut along its vertical centre line. The right half has
    /// edges cuff, underarm, cap half, centre; the left half has cap half,
    /// underarm, cuff, centre.
    fn halves(&self) -> (Panel, Panel) {
        let [_, br, tr, tl] = self.corners();
        let whole = self.panel("sleeve");
        let cap = whole.edge_geometry(2);
        let pieces = cap.cubic_pieces();
        let junction = pieces[0][3];
        let mid = Vertex2::new(self.cuff / 2.0, 0.0);
        let local = |e: EdgeGeometry, p: Vertex2| e.world_to_local(p);
        let first = EdgeGeometry::new(tr, junction, CurvatureSpec::straight());
        let second = EdgeGeometry::new(junction, tl, CurvatureSpec::straight());
        let right = Panel::from_loop(
            "right",
            vec![mid, br, tr, junction],
            vec![
                CurvatureSpec::straight(),
                CurvatureSpec::straight(),
                CurvatureSpec::cubic(local(first, pieces[0][1]), local(first, pieces[0][2])),
                CurvatureSpec::straight(),
            ],
        );
        let left = Panel::from_loop(
            "left",
            vec![junction, tl, Vertex2::new(0.0, 0.0), mid],
            vec![
                CurvatureSpec::cubic(local(second, pieces[1][1]), local(second, pieces[1][2])),
                CurvatureSpec::straight(),
                CurvatureSpec::straight(),
                CurvatureSpec::straight(),
            ],
        );
        (right, left)
    }
}

struct Bodice {
    front: Torso,
    back: Torso,
    sleeve: Sleeve,
}

impl Bodice {
    fn draw(j: &mut Jitter) -> Self {
        let width = j.scale(25.0);
        let side = j.scale(22.0);
        let armhole_dx = j.scale(5.0);
        let neck_x = j.scale(8.0);
        let shoulder_rise = j.scale(4.0);
        let front = Torso {
            width,
            side,
            armhole_dx,
            armhole_dy: j.scale(18.0),
            armhole_bulge: j.scale(0.15),
            neck_x,
            shoulder_rise,
            neck_depth: j.scale(8.0),
            neck_bulge: j.scale(0.25),
        };
        // shares the side length and the shoulder vector with the front
        let back = Torso {
            armhole_dy: j.scale(16.0),
            armhole_bulge: j.scale(0.08),
            neck_depth: j.scale(3.0),
            neck_bulge: j.scale(0.15),
            ..front
        };
        let sleeve = Sleeve {
            cuff: j.scale(26.0),
            height: j.scale(45.0),
            cap_chord: front.armhole_chord() + back.armhole_chord(),
            cap_height: j.scale(0.25),
        };
        Self { front, back, sleeve }
    }
}

fn bodice(j: &mut Jitter) -> (Vec<Panel>, Vec<StitchPair>) {
    let b = Bodice::draw(j);
    let front = b.front.panel("ftorso");
    let (back, map) = mirror_panel_indexed(&b.back.panel("btorso"), MirrorAxis::Vertical);
    let sleeve = b.sleeve.panel("sleeve");
    let stitches = vec![
        pair((0, SIDE), (1, map[SIDE])),
        pair((0, SHOULDER), (1, map[SHOULDER])),
        pair((0, ARMHOLE), (2, 2)),
        pair((1, map[ARMHOLE]), (2, 2)),
        pair((2, 1), (2, 3)),
    ];
    (vec![front, back, sleeve], stitches)
}

/// One pattern of `family`, fully determined by `(seed, family, jitter)`.
pub fn generate(seed: u64, family: Family, jitter: f64) -> Pattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family.stream());
    let mut j = Jitter { rng, amount: jitter };
    let (panels, stitches) = match family {
        Family::Tube => tube(&mut j),
        Family::FourPanelSkirt => skirt(&mut j),
        Family::BodiceWithSleeve => bodice(&mut j),
    };
    Pattern { name: format!("{}-{seed}", family.name()), panels, stitches }
}

/// Bodice whose sleeve is still split into front/back halves, each stitched
/// to its torso, with the back half stored mirrored top-to-bottom. Merging
/// the halves yields a multi-edge sleeve cap.
pub fn split_sleeve_bodice(seed: u64, jitter: f64) -> Pattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(Family::BodiceWithSleeve.stream());
    let b = Bodice::draw(&mut Jitter { rng, amount: jitter });
    let front = b.front.panel("ftorso");
    let (back, map) = mirror_panel_indexed(&b.back.panel("btorso"), MirrorAxis::Vertical);
    let (right, left) = b.sleeve.halves();
    let mut sleeve_f = right;
    sleeve_f.id = String::from("sleeve_f");
    let (mut sleeve_b, smap) = orient_anticlockwise(&reflect_panel(&left, MirrorAxis::Horizontal));
    sleeve_b.id = String::from("sleeve_b");
    let stitches = vec![
        pair((0, SIDE), (1, map[SIDE])),
        pair((0, SHOULDER), (1, map[SHOULDER])),
        pair((0, ARMHOLE), (2, 2)),
        pair((1, map[ARMHOLE]), (3, smap[0])),
        pair((2, 1), (3, smap[1])),
        pair((2, 3), (3, smap[3])),
    ];
    Pattern { name: format!("split-bodice-{seed}"), panels: vec![front, back, sleeve_f, sleeve_b], stitches }
}

/// Front torso cut along its centre line into `left_ftorso` (stored
/// mirrored) and `right_ftorso`, stitched along the centre seam and to a
/// whole back torso.
pub fn split_torso(seed: u64, jitter: f64) -> Pattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(Family::BodiceWithSleeve.stream());
    let b = Bodice::draw(&mut Jitter { rng, amount: jitter });
    let right = b.front.panel("right_ftorso");
    let (mut left, lmap) = mirror_panel_indexed(&right, MirrorAxis::Vertical);
    left.id = String::from("left_ftorso");
    let (back, map) = mirror_panel_indexed(&b.back.panel("btorso"), MirrorAxis::Vertical);
    let centre = 5;
    let stitches = vec![
        pair((0, lmap[centre]), (1, centre)),
        pair((1, SIDE), (2, map[SIDE])),
        pair((1, SHOULDER), (2, map[SHOULDER])),
        pair((0, lmap[HEM]), (2, map[HEM])),
    ];
    Pattern { name: format!("split-torso-{seed}"), panels: vec![left, right, back], stitches }
}

/// Index lists of a train/validation/test split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// 80/10/10 split of `n` items after a seeded shuffle; validation and test
/// sizes round to nearest and training takes the remainder.
pub fn split_indices(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5117);
    idx.shuffle(&mut rng);
    let held = (n + 5) / 10;
    let test = idx.split_off(n - held);
    let val = idx.split_off(n - 2 * held);
    Split { train: idx, val, test }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub patterns: Vec<Pattern>,
    pub split: Split,
}

/// `counts` per family in [`Family::ALL`] order.
pub fn generate_corpus(seed: u64, counts: [usize; 3], jitter: f64) -> Result<Corpus> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patterns = Vec::with_capacity(n);
    for (family, &count) in Family::ALL.iter().zip(&counts) {
        for k in 0..count {
            let mut p = generate(rng.next_u64(), *family, jitter);
            p.name = format!("{}-{k:05}", family.name());
            patterns.push(p);
        }
    }
    Ok(Corpus { patterns, split: split_indices(n, seed) })
}
