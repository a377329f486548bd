//! The potential of colored walks: signed count of 1/2 transitions.
//!
//! `p(u, v) = c(u) - c(v)` when neither endpoint has color 3, else 0. On a
//! properly 3-colored grid every closed walk has potential 0, and the parity
//! of a path's potential is fixed by its endpoints and length.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiagonalPath, GridCoord, Walk};

/// One of the three colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Color(u8);

impl Color {
    pub const ONE: Color = Color(1);
    pub const TWO: Color = Color(2);
    pub const THREE: Color = Color(3);
    pub const ALL: [Color; 3] = [Color::ONE, Color::TWO, Color::THREE];

    pub fn new(v: u8) -> Result<Color> {
        match v {
            1..=3 => Ok(Color(v)),
            _ => Err(Error::Domain(format!("color {v} outside {{1,2,3}}"))),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// 1 iff the color is 3.
    pub fn parity_indicator(self) -> u8 {
        (self.0 == 3) as u8
    }
}

impl TryFrom<u8> for Color {
    type Error = Error;
    fn try_from(v: u8) -> Result<Color> {
        Color::new(v)
    }
}

impl From<Color> for u8 {
    fn from(c: Color) -> u8 {
        c.0
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn edge_potential(cu: Color, cv: Color) -> i64 {
    if cu.0 == 3 || cv.0 == 3 {
        0
    } else {
        cu.0 as i64 - cv.0 as i64
    }
}

/// Sum of edge potentials over consecutive colors, plus the closing edge for
/// closed walks.
pub fn walk_potential(colors: &[Color], closed: bool) -> i64 {
    let open: i64 = colors.windows(2).map(|w| edge_potential(w[0], w[1])).sum();
    match (closed, colors.first(), colors.last()) {
        (true, Some(&a), Some(&z)) if colors.len() > 1 => open + edge_potential(z, a),
        _ => open,
    }
}

/// First edge index whose endpoints share a color.
pub fn first_improper(colors: &[Color], closed: bool) -> Option<usize> {
    let n = colors.len();
    let edges = if closed && n > 1 { n } else { n.saturating_sub(1) };
    (0..edges).find(|&i| colors[i] == colors[(i + 1) % n])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredWalk {
    pub walk: Walk,
    pub colors: Vec<Color>,
}

impl ColoredWalk {
    pub fn new(walk: Walk, colors: Vec<Color>) -> Result<ColoredWalk> {
        if walk.nodes.len() != colors.len() {
            return Err(Error::Domain(format!(
                "{} colors for {} walk nodes",
                colors.len(),
                walk.nodes.len()
            )));
        }
        Ok(ColoredWalk { walk, colors })
    }

    pub fn potential(&self) -> i64 {
        walk_potential(&self.colors, self.walk.closed)
    }

    pub fn is_proper(&self) -> bool {
        first_improper(&self.colors, self.walk.closed).is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ClosedWalkVerdict {
    Holds,
    /// The walk carries an improper edge, so the law does not bind.
    HoldsVacuously { edge: usize },
    /// Properly colored closed walk with nonzero potential.
    Violated { potential: i64 },
}

pub fn check_closed_walk(w: &ColoredWalk) -> Result<ClosedWalkVerdict> {
    if !w.walk.closed {
        return Err(Error::Domain("closed-walk law needs a closed walk".into()));
    }
    if let Some(edge) = first_improper(&w.colors, true) {
        return Ok(ClosedWalkVerdict::HoldsVacuously { edge });
    }
    Ok(match w.potential() {
        0 => ClosedWalkVerdict::Holds,
        p => ClosedWalkVerdict::Violated { potential: p },
    })
}

/// Forced parity of `p(P)` for a properly colored path of `len` edges.
pub fn parity_predict(cu: Color, cv: Color, len: u64) -> u8 {
    ((cu.parity_indicator() as u64 + cv.parity_indicator() as u64 + len) % 2) as u8
}

/// Smallest `c` such that `|p| <= floor(len/3) + c` over proper colorings of
/// walks with up to 30 edges (pinned by [`pinned_upper_constant`]).
pub const UPPER_BOUND_CONSTANT: i64 = 1;

pub fn max_potential_bound(len: u64, c_const: i64) -> i64 {
    (len / 3) as i64 + c_const
}

/// Maximum `|p|` over proper color sequences of `len + 1` nodes, by dynamic
/// programming over (last color, running potential).
pub fn max_proper_potential(len: usize) -> i64 {
    // best[c] = max potential of a proper sequence ending in color c
    let mut best = [0i64; 3];
    for _ in 0..len {
        let mut next = [i64::MIN; 3];
        for (prev, &b) in best.iter().enumerate() {
            for (cur, slot) in next.iter_mut().enumerate() {
                if prev != cur {
                    let p = edge_potential(Color::ALL[prev], Color::ALL[cur]);
                    *slot = (*slot).max(b + p);
                }
            }
        }
        best = next;
    }
    // the minimum is the mirror image under swapping colors 1 and 2
    best.into_iter().max().unwrap_or(0)
}

/// Smallest integer `c` with `max |p| <= floor(len/3) + c` for all `len <= max_len`.
pub fn pinned_upper_constant(max_len: usize) -> i64 {
    (0..=max_len)
        .map(|len| max_proper_potential(len) - (len / 3) as i64)
        .max()
        .unwrap_or(0)
}

fn check_steps(f: &[i64], k: i64) -> Result<()> {
    if let Some(x) = f.windows(2).position(|w| (w[1] - w[0]).abs() > k) {
        return Err(Error::Domain(format!(
            "step {x}->{} changes by {} > {k}",
            x + 1,
            (f[x + 1] - f[x]).abs()
        )));
    }
    Ok(())
}

/// Smallest `x` with `|f(x)| <= k`, given unit-`k` steps, `f(0) >= 0` and
/// `f(last) <= 0`.
pub fn ivt_witness(f: &[i64], k: i64) -> Result<usize> {
    if k <= 0 {
        return Err(Error::Domain(format!("step bound {k} must be positive")));
    }
    let (first, last) = match (f.first(), f.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Domain("empty sequence".into())),
    };
    if first < 0 || last > 0 {
        return Err(Error::Domain(format!("boundary f(0)={first}, f(b)={last}")));
    }
    check_steps(f, k)?;
    f.iter()
        .position(|v| v.abs() <= k)
        .ok_or_else(|| Error::Construction("intermediate value witness missing".into()))
}

/// Smallest `x` in `[0, b - ell]` with `|f(x + ell) - f(x)| <= 2k`, given
/// `f(0) = f(b) = 0`, steps bounded by `k`, and `0 < ell < sqrt(b)`.
pub fn mvt_witness(f: &[i64], ell: usize, k: i64) -> Result<usize> {
    if k <= 0 {
        return Err(Error::Domain(format!("step bound {k} must be positive")));
    }
    let b = f.len().checked_sub(1).ok_or_else(|| Error::Domain("empty sequence".into()))?;
    if f[0] != 0 || f[b] != 0 {
        return Err(Error::Domain(format!("boundary f(0)={}, f(b)={}", f[0], f[b])));
    }
    if ell == 0 || ell * ell >= b {
        return Err(Error::Domain(format!("window {ell} not in (0, sqrt({b}))")));
    }
    check_steps(f, k)?;
    first_flat_window(f, ell, 2 * k)
        .ok_or_else(|| Error::Construction("mean value witness missing".into()))
}

/// Smallest `x` with `|f(x + ell) - f(x)| <= bound`, without preconditions.
pub fn first_flat_window(f: &[i64], ell: usize, bound: i64) -> Option<usize> {
    (0..f.len().saturating_sub(ell)).find(|&x| (f[x + ell] - f[x]).abs() <= bound)
}

/// Prefix potential along a diagonal path, indexed by horizontal offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPotentialProfile {
    pub f: Vec<i64>,
    pub step_bound: i64,
}

/// `f(x)` is the potential of the staircase walk from the first point to
/// the point at horizontal offset `x`.
pub fn potential_profile<F>(diag: &DiagonalPath, colors: F) -> Result<WalkPotentialProfile>
where
    F: Fn(GridCoord) -> Option<Color>,
{
    let (walk, index) = diag.staircase();
    let cs: Vec<Color> = walk
        .nodes
        .iter()
        .map(|&c| colors(c).ok_or_else(|| Error::Domain(format!("no color at {c}"))))
        .collect::<Result<_>>()?;
    let mut prefix = Vec::with_capacity(cs.len());
    let mut acc = 0;
    prefix.push(0);
    for w in cs.windows(2) {
        acc += edge_potential(w[0], w[1]);
        prefix.push(acc);
    }
    Ok(WalkPotentialProfile { f: index.iter().map(|&i| prefix[i]).collect(), step_bound: 2 })
}
