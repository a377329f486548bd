//! Integer-lattice geometry for oriented grids.
//!
//! Everything here is exact integer arithmetic: slopes are rationals, line
//! ordinates are compared after clearing denominators, and no floating point
//! value ever decides membership or rounding.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice cell. The derived ordering is lexicographic on `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct GridCoord {
    pub x: i64,
    pub y: i64,
}

impl GridCoord {
    pub const ORIGIN: GridCoord = GridCoord { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        GridCoord { x, y }
    }

    pub fn l1(self, other: GridCoord) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn step(self, dir: Direction) -> GridCoord {
        self + dir.delta()
    }

    pub fn neighbors(self) -> [GridCoord; 4] {
        Direction::ALL.map(|d| self.step(d))
    }

    pub fn is_adjacent(self, other: GridCoord) -> bool {
        self.l1(other) == 1
    }

    /// Parity of `x + y`; the grid is bipartite along this class.
    pub fn parity(self) -> u8 {
        (self.x + self.y).rem_euclid(2) as u8
    }
}

impl From<[i64; 2]> for GridCoord {
    fn from(v: [i64; 2]) -> Self {
        GridCoord::new(v[0], v[1])
    }
}

impl From<GridCoord> for [i64; 2] {
    fn from(c: GridCoord) -> Self {
        [c.x, c.y]
    }
}

impl Add for GridCoord {
    type Output = GridCoord;
    fn add(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for GridCoord {
    type Output = GridCoord;
    fn sub(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for GridCoord {
    type Output = GridCoord;
    fn neg(self) -> GridCoord {
        GridCoord::new(-self.x, -self.y)
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Cardinal direction of an edge end. East edges go `(i,j) -> (i+1,j)`,
/// north edges go `(i,j) -> (i,j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn delta(self) -> GridCoord {
        match self {
            Direction::North => GridCoord::new(0, 1),
            Direction::East => GridCoord::new(1, 0),
            Direction::South => GridCoord::new(0, -1),
            Direction::West => GridCoord::new(-1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn from_delta(d: GridCoord) -> Option<Direction> {
        Direction::ALL.into_iter().find(|dir| dir.delta() == d)
    }
}

/// Inclusive axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub min: GridCoord,
    pub max: GridCoord,
}

impl Rect {
    pub fn new(min: GridCoord, max: GridCoord) -> Self {
        Rect { min, max }
    }

    /// Box around `core` grown by `margin` on every side.
    pub fn with_margin(core: Rect, margin: i64) -> Self {
        Rect {
            min: core.min - GridCoord::new(margin, margin),
            max: core.max + GridCoord::new(margin, margin),
        }
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        (self.min.x..=self.max.x).contains(&c.x) && (self.min.y..=self.max.y).contains(&c.y)
    }

    pub fn translate(&self, by: GridCoord) -> Rect {
        Rect::new(self.min + by, self.max + by)
    }
}

/// Bounds of the host grid: cells `[1, side]^2`, or unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBounds {
    pub side: Option<i64>,
}

impl GridBounds {
    pub const UNBOUNDED: GridBounds = GridBounds { side: None };

    /// The `floor(sqrt(n)) x floor(sqrt(n))` host grid for an `n`-node graph.
    pub fn for_nodes(n: u64) -> Self {
        let mut s = (n as f64).sqrt() as i64;
        while (s + 1) * (s + 1) <= n as i64 {
            s += 1;
        }
        while s * s > n as i64 {
            s -= 1;
        }
        GridBounds { side: Some(s) }
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        match self.side {
            None => true,
            Some(s) => (1..=s).contains(&c.x) && (1..=s).contains(&c.y),
        }
    }
}

/// Opaque fragment handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FragmentId(pub u32);

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

/// A floating piece of the grid with a private frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub id: FragmentId,
    /// Reserved region in the private frame; `None` means unrestricted.
    pub reservation: Option<Rect>,
    /// Translation from the private frame to absolute grid coordinates,
    /// known only once the placement is committed.
    pub committed_offset: Option<GridCoord>,
}

impl Fragment {
    pub fn new(id: FragmentId) -> Self {
        Fragment { id, reservation: None, committed_offset: None }
    }

    pub fn within(&self, c: GridCoord) -> bool {
        self.reservation.is_none_or(|r| r.contains(c))
    }
}

/// All cells at L1 distance at most `radius` from `center`, clipped to the
/// fragment reservation and, when the fragment has an absolute placement, to
/// the host grid.
pub fn ball(
    fragment: &Fragment,
    center: GridCoord,
    radius: u32,
    grid: GridBounds,
) -> Result<BTreeSet<GridCoord>> {
    if !fragment.within(center) {
        return Err(Error::Domain(format!(
            "ball center {center} outside reservation of {}",
            fragment.id
        )));
    }
    let t = radius as i64;
    let mut out = BTreeSet::new();
    for dx in -t..=t {
        let rem = t - dx.abs();
        for dy in -rem..=rem {
            let c = center + GridCoord::new(dx, dy);
            if !fragment.within(c) {
                continue;
            }
            if let Some(off) = fragment.committed_offset {
                if !grid.contains(c + off) {
                    continue;
                }
            }
            out.insert(c);
        }
    }
    Ok(out)
}

/// Diamond offsets of radius `t`, in a fixed order (x-major).
pub fn diamond(t: u32) -> Vec<GridCoord> {
    let t = t as i64;
    let mut v = Vec::with_capacity((2 * t * t + 2 * t + 1) as usize);
    for dx in -t..=t {
        let rem = t - dx.abs();
        for dy in -rem..=rem {
            v.push(GridCoord::new(dx, dy));
        }
    }
    v
}

/// Sequence of lattice cells; consecutive cells are grid-adjacent. A closed
/// walk implicitly returns from its last cell to its first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub nodes: Vec<GridCoord>,
    pub closed: bool,
}

impl Walk {
    pub fn open(nodes: Vec<GridCoord>) -> Self {
        Walk { nodes, closed: false }
    }

    pub fn closed(nodes: Vec<GridCoord>) -> Self {
        Walk { nodes, closed: true }
    }

    /// Number of edges traversed.
    pub fn len(&self) -> usize {
        match (self.nodes.len(), self.closed) {
            (0, _) => 0,
            (n, false) => n - 1,
            (1, true) => 0,
            (n, true) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Consecutive node pairs in walk order, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (GridCoord, GridCoord)> + '_ {
        let n = self.nodes.len();
        let wrap = self.closed && n > 1;
        (0..n.saturating_sub(1))
            .map(move |i| (self.nodes[i], self.nodes[i + 1]))
            .chain(wrap.then(|| (self.nodes[n - 1], self.nodes[0])))
    }

    pub fn validate(&self) -> Result<()> {
        for (a, b) in self.edges() {
            if !a.is_adjacent(b) {
                return Err(Error::Domain(format!("walk step {a} -> {b} is not a grid edge")));
            }
        }
        Ok(())
    }

    /// Straight segment from `from` to `to` along a row or column.
    pub fn straight(from: GridCoord, to: GridCoord) -> Result<Walk> {
        if from.x != to.x && from.y != to.y {
            return Err(Error::Domain(format!("{from} and {to} share no row or column")));
        }
        let n = from.l1(to);
        let step = if n == 0 {
            GridCoord::ORIGIN
        } else {
            GridCoord::new((to.x - from.x).signum(), (to.y - from.y).signum())
        };
        Ok(Walk::open(
            (0..=n).map(|i| from + GridCoord::new(step.x * i, step.y * i)).collect(),
        ))
    }

    pub fn reversed(&self) -> Walk {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Walk { nodes, closed: self.closed }
    }

    /// Appends `other`, dropping its first node when it repeats our last.
    pub fn extend_with(&mut self, other: &Walk) {
        let skip = match (self.nodes.last(), other.nodes.first()) {
            (Some(a), Some(b)) if a == b => 1,
            _ => 0,
        };
        self.nodes.extend(other.nodes.iter().skip(skip).copied());
    }
}

/// A row part followed by a column part, joined at `corner`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPath {
    pub row_part: Walk,
    pub col_part: Walk,
    pub corner: GridCoord,
}

impl LPath {
    pub fn new(row_part: Walk, col_part: Walk) -> Result<LPath> {
        let corner = *row_part
            .nodes
            .last()
            .ok_or_else(|| Error::Domain("empty row part".into()))?;
        if col_part.nodes.first() != Some(&corner) {
            return Err(Error::Domain("column part must start at the corner".into()));
        }
        if row_part.nodes.iter().any(|c| c.y != corner.y) {
            return Err(Error::Domain("row part leaves its row".into()));
        }
        if col_part.nodes.iter().any(|c| c.x != corner.x) {
            return Err(Error::Domain("column part leaves its column".into()));
        }
        row_part.validate()?;
        col_part.validate()?;
        Ok(LPath { row_part, col_part, corner })
    }

    pub fn start(&self) -> GridCoord {
        self.row_part.nodes[0]
    }

    pub fn end(&self) -> GridCoord {
        *self.col_part.nodes.last().unwrap_or(&self.corner)
    }

    pub fn walk(&self) -> Walk {
        let mut w = self.row_part.clone();
        w.extend_with(&self.col_part);
        w
    }
}

/// Exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = den.signum();
        Ratio { num: s * num / g, den: s * den / g }
    }

    pub fn floor(self) -> i64 {
        self.num.div_euclid(self.den)
    }

    pub fn ceil(self) -> i64 {
        -(-self.num).div_euclid(self.den)
    }

    pub fn is_integer(self) -> bool {
        self.num.rem_euclid(self.den) == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Slope `dy/dx` stored reduced with `dx > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    pub dy: i64,
    pub dx: i64,
}

impl Slope {
    pub fn new(dy: i64, dx: i64) -> Result<Slope> {
        if dx == 0 {
            return Err(Error::Domain("vertical slope has no dy/dx form".into()));
        }
        let r = Ratio::new(dy, dx);
        Ok(Slope { dy: r.num, dx: r.den })
    }

    pub fn between(u: GridCoord, v: GridCoord) -> Result<Slope> {
        Slope::new(v.y - u.y, v.x - u.x)
    }

    pub const fn flat() -> Slope {
        Slope { dy: 0, dx: 1 }
    }

    /// True iff the angle lies in `[0, pi/4]`.
    pub fn is_canonical(&self) -> bool {
        self.dy >= 0 && self.dy <= self.dx
    }

    pub fn ordinate(&self, i: i64) -> Ratio {
        Ratio::new(self.dy * i, self.dx)
    }

    pub fn angle(&self) -> f64 {
        (self.dy as f64).atan2(self.dx as f64).rem_euclid(std::f64::consts::TAU)
    }

    /// Parses `"dy/dx"` (or a bare integer).
    pub fn parse(s: &str) -> Result<Slope> {
        let bad = || Error::Domain(format!("slope must be dy/dx, got {s:?}"));
        let (a, b) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let dy: i64 = a.parse().map_err(|_| bad())?;
        let dx: i64 = b.parse().map_err(|_| bad())?;
        Slope::new(dy, dx)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.dy, self.dx)
    }
}

/// A line through a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeLine {
    pub anchor: GridCoord,
    pub slope: Slope,
}

impl SlopeLine {
    pub fn theta(&self) -> f64 {
        self.slope.angle()
    }
}

/// Result of rounding a line's ordinate at horizontal offset `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRounding {
    /// Ordinate offset `d = i * tan(theta)` relative to the anchor.
    pub d: Ratio,
    pub d_minus: GridCoord,
    pub d_plus: GridCoord,
}

/// `D-` is the node at `floor(d)`, `D+` the node strictly above the line
/// (`ceil(d)`, or `d + 1` when `d` is integral). Both in absolute coordinates.
pub fn line_rounding(line: SlopeLine, i: i64) -> Result<LineRounding> {
    if !line.slope.is_canonical() {
        return Err(Error::Domain(format!("slope {} outside [0, pi/4]", line.slope)));
    }
    if i < 0 {
        return Err(Error::Domain(format!("negative horizontal offset {i}")));
    }
    let d = line.slope.ordinate(i);
    let lo = d.floor();
    let d_minus = line.anchor + GridCoord::new(i, lo);
    let d_plus = line.anchor + GridCoord::new(i, lo + 1);
    Ok(LineRounding { d, d_minus, d_plus })
}

/// Lattice points `(x, y0 + floor(m (x - x0)))` between two nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalPath {
    pub points: Vec<GridCoord>,
    pub slope: Slope,
}

pub fn diagonal_path(u: GridCoord, v: GridCoord) -> Result<DiagonalPath> {
    if u.x >= v.x {
        return Err(Error::Domain(format!("diagonal needs x0 < x1, got {u} -> {v}")));
    }
    let (dx, dy) = (v.x - u.x, v.y - u.y);
    if dy.abs() > dx {
        return Err(Error::Domain(format!("|slope| {dy}/{dx} exceeds 1")));
    }
    let points = (0..=dx)
        .map(|i| GridCoord::new(u.x + i, u.y + (dy * i).div_euclid(dx)))
        .collect();
    Ok(DiagonalPath { points, slope: Slope::new(dy, dx)? })
}

impl DiagonalPath {
    pub fn start(&self) -> GridCoord {
        self.points[0]
    }

    pub fn end(&self) -> GridCoord {
        *self.points.last().expect("diagonal has at least two points")
    }

    /// Horizontal extent in columns.
    pub fn span(&self) -> usize {
        self.points.len() - 1
    }

    /// Grid walk through every point: a diagonal step `(1, +-1)` goes
    /// horizontally first through the corner `(x + 1, y)`. Returns the walk
    /// and, for every point, its index in the walk.
    pub fn staircase(&self) -> (Walk, Vec<usize>) {
        let mut nodes = Vec::with_capacity(self.points.len() * 2);
        let mut index = Vec::with_capacity(self.points.len());
        for (k, &p) in self.points.iter().enumerate() {
            if k > 0 {
                let prev = self.points[k - 1];
                if p.y != prev.y {
                    nodes.push(GridCoord::new(p.x, prev.y));
                }
            }
            index.push(nodes.len());
            nodes.push(p);
        }
        (Walk::open(nodes), index)
    }
}

/// Enclosure with two vertical sides of length `height` and two sides of
/// slope `slope`. The bottom side passes `drop_num / slope.dx` below the
/// anchor at the anchor's column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parallelogram {
    pub level: u32,
    pub slope: Slope,
    pub anchor: GridCoord,
    pub width: i64,
    pub height: i64,
    pub drop_num: i64,
}

impl Parallelogram {
    /// Parallelogram whose bottom side passes through the anchor.
    pub fn new(level: u32, slope: Slope, anchor: GridCoord, width: i64) -> Self {
        Parallelogram { level, slope, anchor, width, height: level as i64 + 1, drop_num: 0 }
    }

    /// Bottom ordinate at column `x`, scaled by `slope.dx`.
    fn bottom_scaled(&self, x: i64) -> i128 {
        let q = self.slope.dx as i128;
        self.anchor.y as i128 * q - self.drop_num as i128
            + self.slope.dy as i128 * (x - self.anchor.x) as i128
    }

    pub fn contains(&self, p: GridCoord) -> bool {
        if p.x < self.anchor.x || p.x > self.anchor.x + self.width {
            return false;
        }
        let q = self.slope.dx as i128;
        let lo = self.bottom_scaled(p.x);
        let y = p.y as i128 * q;
        y >= lo && y <= lo + self.height as i128 * q
    }

    /// Lattice rows covered at column `x`, inclusive.
    pub fn column_range(&self, x: i64) -> Option<(i64, i64)> {
        if x < self.anchor.x || x > self.anchor.x + self.width {
            return None;
        }
        let q = self.slope.dx as i128;
        let lo = self.bottom_scaled(x);
        let hi = lo + self.height as i128 * q;
        let ylo = -((-lo).div_euclid(q));
        let yhi = hi.div_euclid(q);
        (ylo <= yhi).then_some((ylo as i64, yhi as i64))
    }

    /// All lattice nodes inside, x-major then y ascending.
    pub fn nodes(&self) -> Vec<GridCoord> {
        let mut v = Vec::new();
        for x in self.anchor.x..=self.anchor.x + self.width {
            if let Some((lo, hi)) = self.column_range(x) {
                v.extend((lo..=hi).map(|y| GridCoord::new(x, y)));
            }
        }
        v
    }

    pub fn translate(&self, by: GridCoord) -> Parallelogram {
        Parallelogram { anchor: self.anchor + by, ..*self }
    }
}

/// Width of a level-`k` slope construction: `w_{j+1} = 2(w_j + T + 1)`, `w_0 = 0`.
pub fn construction_width(level: u32, t: u32) -> i64 {
    (0..level).fold(0i64, |w, _| 2 * (w + t as i64 + 1))
}

/// Element of the dihedral group of the square acting on lattice coordinates:
/// an optional axis swap followed by optional reflections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Dihedral {
    pub swap: bool,
    pub flip_x: bool,
    pub flip_y: bool,
}

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral { swap: false, flip_x: false, flip_y: false };

    pub fn all() -> impl Iterator<Item = Dihedral> {
        (0..8u8).map(|b| Dihedral { swap: b & 1 != 0, flip_x: b & 2 != 0, flip_y: b & 4 != 0 })
    }

    pub fn apply(&self, c: GridCoord) -> GridCoord {
        let (x, y) = if self.swap { (c.y, c.x) } else { (c.x, c.y) };
        GridCoord::new(if self.flip_x { -x } else { x }, if self.flip_y { -y } else { y })
    }

    pub fn invert(&self, c: GridCoord) -> GridCoord {
        let x = if self.flip_x { -c.x } else { c.x };
        let y = if self.flip_y { -c.y } else { c.y };
        if self.swap {
            GridCoord::new(y, x)
        } else {
            GridCoord::new(x, y)
        }
    }

    /// `self` applied after `inner`.
    pub fn compose(&self, inner: Dihedral) -> Dihedral {
        let img = |d: Dihedral| (d.apply(GridCoord::new(1, 0)), d.apply(GridCoord::new(0, 1)));
        let target = (self.apply(inner.apply(GridCoord::new(1, 0))), self.apply(inner.apply(GridCoord::new(0, 1))));
        Dihedral::all().find(|d| img(*d) == target).expect("group is closed")
    }

    /// The transform mapping canonical coordinates (`x` forward, slope in
    /// `[0, 1]`) onto the displacement `d`.
    pub fn canonicalizing(d: GridCoord) -> Dihedral {
        let swap = d.y.abs() > d.x.abs();
        Dihedral { swap, flip_x: d.x < 0, flip_y: d.y < 0 }
    }
}
