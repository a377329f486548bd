//! Shared plumbing: canonical drawing frames, walk helpers and the
//! enclosed-region fill that turns a bad cycle into an improper edge.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::geometry::{diamond, Dihedral, Direction, FragmentId, GridCoord, Walk};
use crate::harness::{Arena, Certificate, Halt, Step};
use crate::potential::{edge_potential, walk_potential, Color};

use super::choices::Choices;
use super::params::AdversaryParams;

/// A fragment seen through a dihedral transform. Strategies draw in
/// canonical coordinates (`x` forward, slope in `[0, 1]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    pub frag: FragmentId,
    pub tf: Dihedral,
}

impl Canvas {
    pub fn real(&self, p: GridCoord) -> GridCoord {
        self.tf.apply(p)
    }
}

/// A straight walk of `len` edges from `start` in direction `dir`, in real
/// coordinates of `frag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineWalk {
    pub frag: FragmentId,
    pub start: GridCoord,
    pub dir: Direction,
    pub len: i64,
}

impl LineWalk {
    pub fn node(&self, i: i64) -> GridCoord {
        let d = self.dir.delta();
        self.start + GridCoord::new(d.x * i, d.y * i)
    }

    pub fn end(&self) -> GridCoord {
        self.node(self.len)
    }

    pub fn nodes(&self) -> Vec<GridCoord> {
        (0..=self.len).map(|i| self.node(i)).collect()
    }
}

pub struct Ctx<'r, 'a> {
    pub arena: &'r mut Arena<'a>,
    pub ch: Choices,
    pub p: AdversaryParams,
    /// Use the exact mean value witness instead of the nearest window.
    pub strict: bool,
}

impl<'r, 'a> Ctx<'r, 'a> {
    pub fn new(arena: &'r mut Arena<'a>, ch: Choices, p: AdversaryParams) -> Self {
        Ctx { arena, ch, p, strict: false }
    }

    pub fn t(&self) -> i64 {
        self.p.t as i64
    }

    pub fn canvas(&mut self, tf: Dihedral) -> Canvas {
        Canvas { frag: self.arena.new_fragment(), tf }
    }

    pub fn reveal(&mut self, cv: Canvas, p: GridCoord) -> Step<Color> {
        self.arena.reveal(cv.frag, cv.real(p))
    }

    pub fn color(&self, cv: Canvas, p: GridCoord) -> Option<Color> {
        self.arena.color(cv.frag, cv.real(p))
    }

    pub fn colors(&self, cv: Canvas, ps: &[GridCoord]) -> Result<Vec<Color>> {
        ps.iter()
            .map(|&p| self.color(cv, p).ok_or_else(|| Error::Construction(format!("{p} unlabeled in {}", cv.frag))))
            .collect()
    }

    /// Potential of an open walk given in canonical coordinates.
    pub fn potential(&self, cv: Canvas, ps: &[GridCoord]) -> Result<i64> {
        Ok(walk_potential(&self.colors(cv, ps)?, false))
    }

    /// Offset of `b`'s canonical origin inside `a`'s canonical frame.
    pub fn can_commit(&self, a: Canvas, b: Canvas, off: GridCoord) -> bool {
        a.tf == b.tf && self.arena.can_commit(a.frag, b.frag, a.real(off))
    }

    pub fn commit(&mut self, a: Canvas, b: Canvas, off: GridCoord) -> Step<()> {
        if a.tf != b.tf {
            return Err(Halt::Fail(Error::Construction("committing canvases with different transforms".into())));
        }
        self.arena.commit(a.frag, b.frag, a.real(off))
    }

    pub fn line_potential(&self, w: &LineWalk) -> Result<i64> {
        let cs = self.arena.colors(w.frag, &w.nodes())?;
        Ok(walk_potential(&cs, false))
    }

    /// Cells that revealing `nodes` would newly charge.
    pub fn reveal_cost(&self, cv: Canvas, nodes: &[GridCoord]) -> u64 {
        let offsets = diamond(self.p.t);
        let mut fresh = HashSet::new();
        for &n in nodes {
            let r = cv.real(n);
            if self.arena.state.is_revealed(cv.frag, r) {
                continue;
            }
            for &o in &offsets {
                let c = r + o;
                if !self.arena.state.is_materialized(cv.frag, c) {
                    fresh.insert(c);
                }
            }
        }
        fresh.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.arena.state.budget().saturating_sub(self.arena.state.spent())
    }

    /// Certificate for a properly colored closed walk with nonzero potential.
    pub fn violation(&self, cv: Canvas, walk: &[GridCoord], p: i64) -> Result<Certificate> {
        let group = self.arena.state.group_of(cv.frag)?;
        let off = self.arena.state.offset_of(cv.frag)?;
        Ok(Certificate::PotentialViolation {
            frag: group,
            walk: walk.iter().map(|&n| cv.real(n) + off).collect(),
            colors: self.colors(cv, walk)?,
            p,
            spent: self.arena.state.spent(),
        })
    }

    /// Forces an improper edge out of a closed walk with nonzero
    /// potential: reveal a chord across the enclosed region, keep the half
    /// whose boundary still carries potential, repeat. A unit face cannot
    /// carry potential under a proper coloring. Without budget for the next
    /// chord, the walk itself is returned as the certificate.
    pub fn fill_enclosed(&mut self, cv: Canvas, walk: &[GridCoord]) -> Step<()> {
        let cs = self.colors(cv, walk)?;
        let p = walk_potential(&cs, true);
        if crate::potential::first_improper(&cs, true).is_some() {
            self.arena.sweep()?;
        }
        if p == 0 {
            return Ok(());
        }
        let Some(wind) = Winding::of(walk) else {
            return Err(Halt::Win(self.violation(cv, walk, p)?));
        };
        let mut b = wind.bounds();
        let mut pb = self.chain_potential(cv, &wind, b)?;
        if pb != p {
            return Err(Halt::Fail(Error::Construction(format!("face sum {pb} disagrees with walk potential {p}"))));
        }
        while b.1 - b.0 > 1 || b.3 - b.2 > 1 {
            let vertical = b.1 - b.0 >= b.3 - b.2;
            let (first, chord) = if vertical {
                let mid = (b.0 + b.1) / 2;
                let nodes: Vec<GridCoord> = (b.2..=b.3)
                    .map(|y| GridCoord::new(mid, y))
                    .filter(|n| wind.touches(*n, b))
                    .collect();
                ((b.0, mid, b.2, b.3), nodes)
            } else {
                let mid = (b.2 + b.3) / 2;
                let nodes: Vec<GridCoord> = (b.0..=b.1)
                    .map(|x| GridCoord::new(x, mid))
                    .filter(|n| wind.touches(*n, b))
                    .collect();
                ((b.0, b.1, b.2, mid), nodes)
            };
            if self.reveal_cost(cv, &chord) > self.remaining() {
                return Err(Halt::Win(self.violation(cv, walk, p)?));
            }
            for n in chord {
                self.reveal(cv, n)?;
            }
            let pf = self.chain_potential(cv, &wind, first)?;
            if pf != 0 {
                b = first;
                pb = pf;
            } else {
                b = if vertical { (first.1, b.1, b.2, b.3) } else { (b.0, b.1, first.3, b.3) };
            }
        }
        self.arena.sweep()?;
        Err(Halt::Fail(Error::Construction(format!("unit face carries potential {pb} under a proper coloring"))))
    }

    /// Potential of the boundary of the faces inside box `b`, weighted by
    /// winding number. Every edge with a nonzero coefficient must be labeled.
    fn chain_potential(&self, cv: Canvas, wind: &Winding, b: (i64, i64, i64, i64)) -> Result<i64> {
        let (x0, x1, y0, y1) = b;
        let w = |x: i64, y: i64| if x >= x0 && x < x1 && y >= y0 && y < y1 { wind.at(x, y) } else { 0 };
        let col = |n: GridCoord| self.color(cv, n).ok_or_else(|| Error::Construction(format!("chord node {n} unlabeled")));
        let mut total = 0;
        for x in x0..=x1 {
            for y in y0..=y1 {
                let n = GridCoord::new(x, y);
                if y < y1 {
                    let k = w(x - 1, y) - w(x, y);
                    if k != 0 {
                        total += k as i64 * edge_potential(col(n)?, col(GridCoord::new(x, y + 1))?);
                    }
                }
                if x < x1 {
                    let k = w(x, y) - w(x, y - 1);
                    if k != 0 {
                        total += k as i64 * edge_potential(col(n)?, col(GridCoord::new(x + 1, y))?);
                    }
                }
            }
        }
        Ok(total)
    }
}

/// Winding numbers of the unit faces inside a closed walk's bounding box.
/// Face `(x, y)` is the square with lower left corner `(x, y)`.
struct Winding {
    x0: i64,
    y0: i64,
    w: i64,
    h: i64,
    data: Vec<i32>,
}

/// Largest bounding box (in faces) handled densely.
const MAX_FACES: i64 = 64_000_000;

impl Winding {
    fn of(walk: &[GridCoord]) -> Option<Winding> {
        let x0 = walk.iter().map(|p| p.x).min()?;
        let x1 = walk.iter().map(|p| p.x).max()?;
        let y0 = walk.iter().map(|p| p.y).min()?;
        let y1 = walk.iter().map(|p| p.y).max()?;
        let (w, h) = (x1 - x0, y1 - y0);
        if w * h > MAX_FACES {
            return None;
        }
        let mut data = vec![0i32; (w * h) as usize];
        let n = walk.len();
        for i in 0..n {
            let (a, b) = (walk[i], walk[(i + 1) % n]);
            if a.x == b.x && (a.y - b.y).abs() == 1 && a.x > x0 {
                let y = a.y.min(b.y) - y0;
                let d = if b.y > a.y { 1 } else { -1 };
                // the edge adds to every face left of it in its band
                data[(y * w + a.x - 1 - x0) as usize] += d;
            }
        }
        for y in 0..h {
            for x in (0..w - 1).rev() {
                data[(y * w + x) as usize] += data[(y * w + x + 1) as usize];
            }
        }
        Some(Winding { x0, y0, w, h, data })
    }

    fn at(&self, x: i64, y: i64) -> i32 {
        let (i, j) = (x - self.x0, y - self.y0);
        if i < 0 || j < 0 || i >= self.w || j >= self.h {
            0
        } else {
            self.data[(j * self.w + i) as usize]
        }
    }

    fn bounds(&self) -> (i64, i64, i64, i64) {
        (self.x0, self.x0 + self.w, self.y0, self.y0 + self.h)
    }

    /// Whether `n` is a corner of a face inside `b` with nonzero winding.
    fn touches(&self, n: GridCoord, b: (i64, i64, i64, i64)) -> bool {
        [(n.x - 1, n.y - 1), (n.x - 1, n.y), (n.x, n.y - 1), (n.x, n.y)]
            .iter()
            .any(|&(x, y)| x >= b.0 && x < b.1 && y >= b.2 && y < b.3 && self.at(x, y) != 0)
    }
}

/// Corners of the unit faces with nonzero winding number around a closed
/// lattice walk.
pub fn enclosed_nodes(walk: &[GridCoord]) -> BTreeSet<GridCoord> {
    let n = walk.len();
    // vertical unit edges per row band: y -> (x, +1 up / -1 down)
    let mut bands: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for i in 0..n {
        let (a, b) = (walk[i], walk[(i + 1) % n]);
        if a.x == b.x && (a.y - b.y).abs() == 1 {
            bands.entry(a.y.min(b.y)).or_default().push((a.x, if b.y > a.y { 1 } else { -1 }));
        }
    }
    let mut out = BTreeSet::new();
    for (y, mut edges) in bands {
        edges.sort();
        let lo = edges[0].0 - 1;
        let hi = edges[edges.len() - 1].0;
        // winding of face [x, x+1] x [y, y+1] counts edges strictly right of its center
        let mut w = 0i64;
        let mut k = edges.len();
        for x in (lo..hi).rev() {
            while k > 0 && edges[k - 1].0 > x {
                w += edges[k - 1].1;
                k -= 1;
            }
            if w != 0 {
                for c in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                    out.insert(GridCoord::new(c.0, c.1));
                }
            }
        }
    }
    out
}

/// Straight segment from `a` to `b` inclusive; they must share a row or column.
pub fn segment(a: GridCoord, b: GridCoord) -> Result<Vec<GridCoord>> {
    Ok(Walk::straight(a, b)?.nodes)
}

/// Appends `more` to `walk`, skipping `more`'s first node when it repeats
/// the current end.
pub fn join(walk: &mut Vec<GridCoord>, more: &[GridCoord]) {
    let skip = usize::from(walk.last().is_some() && walk.last() == more.first());
    walk.extend_from_slice(&more[skip..]);
}

/// Prefix potentials of a color sequence.
pub fn prefix(colors: &[Color]) -> Vec<i64> {
    let mut f = Vec::with_capacity(colors.len());
    let mut acc = 0;
    f.push(0);
    for w in colors.windows(2) {
        acc += edge_potential(w[0], w[1]);
        f.push(acc);
    }
    if colors.is_empty() {
        f.clear();
    }
    f
}
