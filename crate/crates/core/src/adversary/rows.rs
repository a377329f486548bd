//! Potential boosting along rows: the doubling construction, band-checked
//! long lines, and the alignment attack.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{Dihedral, Direction, FragmentId, GridCoord};
use crate::harness::{Halt, Step};
use crate::potential::{first_improper, parity_predict, walk_potential, Color};

use super::ctx::{prefix, Canvas, Ctx, LineWalk};

/// A fully revealed row `(0..=len, 0)` in canonical coordinates with a
/// marked pair: the row walk from `s` to `t` has potential `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPiece {
    #[serde(skip)]
    pub cv: Option<Canvas>,
    pub level: u32,
    pub len: i64,
    pub s: i64,
    pub t: i64,
    pub p: i64,
}

impl RowPiece {
    pub fn canvas(&self) -> Canvas {
        self.cv.expect("row piece carries its canvas")
    }

    pub fn nodes(&self) -> Vec<GridCoord> {
        (0..=self.len).map(|x| GridCoord::new(x, 0)).collect()
    }

    /// The pair's segment walked in the canvas' forward direction.
    pub fn walk(&self) -> LineWalk {
        let cv = self.canvas();
        let dir = Direction::from_delta(cv.real(GridCoord::new(1, 0))).expect("dihedral maps units to units");
        LineWalk { frag: cv.frag, start: cv.real(GridCoord::new(self.s.min(self.t), 0)), dir, len: (self.t - self.s).abs() }
    }

    /// Potential of [`walk`](Self::walk).
    pub fn forward_potential(&self) -> i64 {
        if self.s <= self.t {
            self.p
        } else {
            -self.p
        }
    }
}

/// Marks the pair on a labeled row: the first minimum of the prefix
/// potential and the first node toward the maximum that is `k` above it.
/// With a smaller range the full range is used.
pub fn mark_pair(f: &[i64], k: i64) -> (i64, i64, i64) {
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, &v) in f.iter().enumerate() {
        if v < f[lo] {
            lo = i;
        }
        if v > f[hi] {
            hi = i;
        }
    }
    let range = f[hi] - f[lo];
    if range < k {
        return (lo as i64, hi as i64, range);
    }
    let step: isize = if hi > lo { 1 } else { -1 };
    let mut i = lo as isize;
    while f[i as usize] - f[lo] != k {
        i += step;
    }
    (lo as i64, i as i64, k)
}

/// Builds a level-`k` boosting row. Two level-`(k - 1)` rows are placed
/// on one line with a gap of `2T + 2` or `2T + 3`, whichever makes the
/// parity of the potential between the inner pair ends differ from the
/// pairs' potential.
pub fn log_boost_row(ctx: &mut Ctx<'_, '_>, k: u32, tf: Dihedral) -> Step<RowPiece> {
    if k == 0 {
        let cv = ctx.canvas(tf);
        ctx.reveal(cv, GridCoord::ORIGIN)?;
        return Ok(RowPiece { cv: Some(cv), level: 0, len: 0, s: 0, t: 0, p: 0 });
    }
    let a = log_boost_row(ctx, k - 1, tf)?;
    let b = log_boost_row(ctx, k - 1, tf)?;
    let (ca, cb) = (a.canvas(), b.canvas());
    let t1 = a.t;
    let s2 = b.s;
    let base = 2 * ctx.t() + 2;
    let want = a.p.rem_euclid(2) as u8;
    let i1 = ctx.color(ca, GridCoord::new(t1, 0)).ok_or_else(|| Error::Construction("pair end unlabeled".into()))?;
    let i2 = ctx.color(cb, GridCoord::new(s2, 0)).ok_or_else(|| Error::Construction("pair end unlabeled".into()))?;
    let v = ctx.ch.choose(
        "gap",
        |r| r.gen_range(0..2),
        || {
            let dist = |g: i64| (a.len + g + s2 - t1) as u64;
            Ok(u32::from(parity_predict(i1, i2, dist(base)) == want))
        },
    )?;
    let mut g = base + v as i64;
    if !ctx.can_commit(ca, cb, GridCoord::new(a.len + g, 0)) {
        g = 2 * base + 1 - g;
    }
    ctx.commit(ca, cb, GridCoord::new(a.len + g, 0))?;
    for x in a.len + 1..a.len + g {
        ctx.reveal(ca, GridCoord::new(x, 0))?;
    }
    let len = a.len + g + b.len;
    let nodes: Vec<GridCoord> = (0..=len).map(|x| GridCoord::new(x, 0)).collect();
    let f = prefix(&ctx.colors(ca, &nodes)?);
    let (s, t, p) = mark_pair(&f, k as i64);
    ctx.arena.observe_potential(p);
    Ok(RowPiece { cv: Some(ca), level: k, len, s, t, p })
}

/// A walk known to carry potential `p`, oriented the same way as the line
/// it guards.
#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub w: LineWalk,
    pub p: i64,
}

impl Band {
    pub fn from_piece(piece: &RowPiece, dir: Direction) -> Band {
        let w = piece.walk();
        if w.dir == dir {
            Band { w, p: piece.forward_potential() }
        } else {
            Band { w: LineWalk { start: w.end(), dir, ..w }, p: -piece.forward_potential() }
        }
    }
}

/// Grows a straight line node by node from `start` (revealed first) in
/// direction `dir`, up to `max_len` edges or until `stop` accepts the
/// prefix potentials. Every window as long as the band walk is compared
/// with it; a gap of `4T + 5` or more triggers the alignment attack.
/// Returns the prefix potentials of the grown line.
#[allow(clippy::too_many_arguments)]
pub fn grow_line<S>(
    ctx: &mut Ctx<'_, '_>,
    frag: FragmentId,
    start: GridCoord,
    dir: Direction,
    band: Option<Band>,
    site: &str,
    max_len: i64,
    mut stop: S,
) -> Step<Vec<i64>>
where
    S: FnMut(&[i64]) -> bool,
{
    let fire_at = ctx.ch.pre(site, |_| 0)?.map(|v| v as i64 - 1);
    let threshold = 4 * ctx.t() + 5;
    let mut f: Vec<i64> = Vec::new();
    let mut prev: Option<Color> = None;
    let mut attempted = false;
    for i in 0..=max_len {
        let at = start + GridCoord::new(dir.delta().x * i, dir.delta().y * i);
        let c = ctx.arena.reveal(frag, at)?;
        let step = prev.map_or(0, |q| crate::potential::edge_potential(q, c));
        f.push(f.last().copied().unwrap_or(0) + step);
        prev = Some(c);
        ctx.arena.observe_potential(*f.last().expect("nonempty"));
        if let Some(b) = band.filter(|b| b.w.len > 0 && i >= b.w.len && !attempted) {
            let ps = f[i as usize] - f[(i - b.w.len) as usize];
            let fire = match fire_at {
                Some(x) => x == i,
                None => (ps - b.p).abs() >= threshold,
            };
            if fire {
                attempted = true;
                if fire_at.is_none() {
                    ctx.ch.record(site, (i + 1) as u32);
                }
                let back = i - b.w.len;
                let w1 = LineWalk { frag, start: start + GridCoord::new(dir.delta().x * back, dir.delta().y * back), dir, len: b.w.len };
                alignment_attack(ctx, &w1, &b.w)?;
            }
        }
        if stop(&f) {
            break;
        }
    }
    if fire_at.is_none() && !attempted {
        ctx.ch.record(site, 0);
    }
    Ok(f)
}

/// Builds the boosted row piece and then a row of `len` edges from the
/// canvas origin, checking it against the piece. Returns the row's
/// prefix potentials.
pub fn quasilinear_row(ctx: &mut Ctx<'_, '_>, host: Canvas, w: &RowPiece, len: i64) -> Step<Vec<i64>> {
    let dir = Direction::from_delta(host.real(GridCoord::new(1, 0))).expect("unit");
    let band = Band::from_piece(w, dir);
    grow_line(ctx, host.frag, host.real(GridCoord::ORIGIN), dir, Some(band), "row_attack", len, |_| false)
}

fn perpendicular(d: Direction) -> GridCoord {
    match d {
        Direction::East | Direction::West => GridCoord::new(0, 1),
        Direction::North | Direction::South => GridCoord::new(1, 0),
    }
}

/// Reveals that `w2` runs parallel to `w1` at distance exactly `2T + 2`
/// and closes the rectangle. Requires equal lengths and directions,
/// separate groups and a potential gap of at least `4T + 5`; the
/// rectangle then cannot be colored properly. Returns normally only when
/// no placement is possible.
pub fn alignment_attack(ctx: &mut Ctx<'_, '_>, w1: &LineWalk, w2: &LineWalk) -> Step<()> {
    if w1.len != w2.len || w1.dir != w2.dir {
        return Err(Halt::Fail(Error::Domain(format!(
            "walks differ: {} {:?} vs {} {:?}",
            w1.len, w1.dir, w2.len, w2.dir
        ))));
    }
    let st = &ctx.arena.state;
    if st.group_of(w1.frag)? == st.group_of(w2.frag)? {
        return Err(Halt::Fail(Error::Domain("walks already share a frame".into())));
    }
    let gap = (ctx.line_potential(w1)? - ctx.line_potential(w2)?).abs();
    let t = ctx.t();
    if gap < 4 * t + 5 {
        return Err(Halt::Fail(Error::Domain(format!("potential gap {gap} below {}", 4 * t + 5))));
    }
    let d = 2 * t + 2;
    let n = perpendicular(w1.dir);
    let Some(side) = [1i64, -1].into_iter().find(|&sgn| {
        let off = w1.start + GridCoord::new(n.x * d * sgn, n.y * d * sgn) - w2.start;
        ctx.arena.can_commit(w1.frag, w2.frag, off)
    }) else {
        ctx.arena.note("attack_skipped", serde_json::json!({ "gap": gap }));
        return Ok(());
    };
    let nn = GridCoord::new(n.x * side, n.y * side);
    let off = w1.start + GridCoord::new(nn.x * d, nn.y * d) - w2.start;
    ctx.arena.commit(w1.frag, w2.frag, off)?;
    ctx.arena.note("attack", serde_json::json!({ "gap": gap, "side": side }));
    let up = |p: GridCoord, k: i64| p + GridCoord::new(nn.x * k, nn.y * k);
    for end in [w1.start, w1.end()] {
        for k in 1..d {
            ctx.arena.reveal(w1.frag, up(end, k))?;
        }
    }
    let mut walk = w1.nodes();
    walk.extend((1..=d).map(|k| up(w1.end(), k)));
    walk.extend(w1.nodes().iter().rev().skip(1).map(|&p| up(p, d)));
    walk.extend((1..d).rev().map(|k| up(w1.start, k)));
    let colors = ctx.arena.colors(w1.frag, &walk)?;
    let p = walk_potential(&colors, true);
    ctx.arena.note("attack_cycle", p);
    let cv = Canvas { frag: w1.frag, tf: Dihedral::IDENTITY };
    if first_improper(&colors, true).is_some() {
        ctx.arena.sweep()?;
    } else if p == 0 {
        return Err(Halt::Fail(Error::Construction("aligned rectangle balanced despite the gap".into())));
    } else {
        ctx.fill_enclosed(cv, &walk)?;
    }
    Err(Halt::Fail(Error::Construction("attack ended without a certificate".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mark_pair_examples() {
        assert_eq!(mark_pair(&[0, 1, 2, 1, 0], 2), (0, 2, 2));
        assert_eq!(mark_pair(&[0, -1, 0, 1, 2], 2), (1, 3, 2));
        assert_eq!(mark_pair(&[3, 2, 1, 0], 2), (3, 1, 2));
        assert_eq!(mark_pair(&[0, 1, 0], 2), (0, 1, 1));
        assert_eq!(mark_pair(&[0], 0), (0, 0, 0));
    }

    #[test]
    fn perpendiculars() {
        for d in Direction::ALL {
            let (a, b) = (d.delta(), perpendicular(d));
            assert_eq!(a.x * b.x + a.y * b.y, 0);
        }
    }
}
