//! Potential boosting along an arbitrary slope inside parallelograms.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{Dihedral, GridCoord, Parallelogram, Slope};
use crate::harness::{Halt, Step};
use crate::potential::{edge_potential, parity_predict, walk_potential, Color};

use super::ctx::{Canvas, Ctx};

/// A filled parallelogram with a path from `s` to `t` of potential `p`,
/// all in canonical coordinates of the canvas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopePiece {
    #[serde(skip)]
    pub cv: Option<Canvas>,
    pub par: Parallelogram,
    pub s: GridCoord,
    pub t: GridCoord,
    pub path: Vec<GridCoord>,
    pub p: i64,
    pub exact: bool,
}

impl SlopePiece {
    pub fn canvas(&self) -> Canvas {
        self.cv.expect("slope piece carries its canvas")
    }

    fn oriented(mut self) -> SlopePiece {
        if self.p < 0 {
            std::mem::swap(&mut self.s, &mut self.t);
            self.path.reverse();
            self.p = -self.p;
        }
        self
    }
}

/// Shortest path between two nodes of `nodes`, moving only inside it.
pub fn region_path(nodes: &[GridCoord], from: GridCoord, to: GridCoord) -> Option<Vec<GridCoord>> {
    let inside: std::collections::HashSet<GridCoord> = nodes.iter().copied().collect();
    let mut parent: HashMap<GridCoord, GridCoord> = HashMap::new();
    let mut q = VecDeque::from([from]);
    parent.insert(from, from);
    while let Some(c) = q.pop_front() {
        if c == to {
            let mut path = vec![c];
            let mut cur = c;
            while cur != from {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for n in c.neighbors() {
            if inside.contains(&n) && !parent.contains_key(&n) {
                parent.insert(n, c);
                q.push_back(n);
            }
        }
    }
    None
}

/// Labels of every node of a fully revealed region.
pub fn region_colors(ctx: &Ctx<'_, '_>, cv: Canvas, nodes: &[GridCoord]) -> crate::Result<HashMap<GridCoord, Color>> {
    nodes
        .iter()
        .map(|&n| ctx.color(cv, n).map(|c| (n, c)).ok_or_else(|| Error::Construction(format!("{n} unlabeled"))))
        .collect()
}

/// Potential from `root` to every node reachable inside the region. Well
/// defined on properly colored simply connected regions.
pub fn potential_field(colors: &HashMap<GridCoord, Color>, root: GridCoord) -> HashMap<GridCoord, i64> {
    let mut phi = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if let (Some(&cn), false) = (colors.get(&n), phi.contains_key(&n)) {
                phi.insert(n, phi[&c] + edge_potential(colors[&c], cn));
                queue.push_back(n);
            }
        }
    }
    phi
}

/// Unrevealed nodes of the region, nearest to the revealed part first.
fn fill_order(ctx: &Ctx<'_, '_>, cv: Canvas, nodes: &[GridCoord]) -> Vec<GridCoord> {
    let inside: std::collections::HashSet<GridCoord> = nodes.iter().copied().collect();
    let mut seen: std::collections::HashSet<GridCoord> = nodes.iter().copied().filter(|&n| ctx.color(cv, n).is_some()).collect();
    let mut queue: VecDeque<GridCoord> = nodes.iter().copied().filter(|n| seen.contains(n)).collect();
    let mut out = Vec::new();
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if inside.contains(&n) && seen.insert(n) {
                out.push(n);
                queue.push_back(n);
            }
        }
    }
    out.extend(nodes.iter().copied().filter(|n| !seen.contains(n)));
    out
}

fn level(ctx: &mut Ctx<'_, '_>, j: u32, slope: Slope, tf: Dihedral) -> Step<SlopePiece> {
    if j == 0 {
        let cv = ctx.canvas(tf);
        ctx.reveal(cv, GridCoord::ORIGIN)?;
        let par = Parallelogram { level: 0, slope, anchor: GridCoord::ORIGIN, width: 0, height: 1, drop_num: 0 };
        let o = GridCoord::ORIGIN;
        return Ok(SlopePiece { cv: Some(cv), par, s: o, t: o, path: vec![o], p: 0, exact: true });
    }
    let a = level(ctx, j - 1, slope, tf)?.oriented();
    let b = level(ctx, j - 1, slope, tf)?.oriented();
    let (ca, cb) = (a.canvas(), b.canvas());
    let t = ctx.t();
    let i = a.par.width + 2 * t + 2;
    let q = slope.dy * i;
    let d_minus = a.par.anchor + GridCoord::new(i, q.div_euclid(slope.dx));
    let d_plus = d_minus + GridCoord::new(0, 1);
    let off_for = |d: GridCoord| d - b.par.anchor;
    let want = a.p.rem_euclid(2) as u8;
    let c1 = ctx.color(ca, a.t).ok_or_else(|| Error::Construction("pair end unlabeled".into()))?;
    let c2 = ctx.color(cb, b.s).ok_or_else(|| Error::Construction("pair end unlabeled".into()))?;
    let v = ctx.ch.choose(
        "place",
        |r| r.gen_range(0..2),
        || {
            let dist = a.t.l1(b.s + off_for(d_minus)) as u64;
            Ok(u32::from(parity_predict(c1, c2, dist) == want))
        },
    )?;
    let mut off = off_for(if v == 0 { d_minus } else { d_plus });
    if !ctx.can_commit(ca, cb, off) {
        off = off_for(if v == 0 { d_plus } else { d_minus });
    }
    ctx.commit(ca, cb, off)?;

    let mut drop = a.par.drop_num + q.rem_euclid(slope.dx);
    let mut anchor = a.par.anchor;
    if drop >= slope.dx {
        anchor.y -= 1;
        drop -= slope.dx;
    }
    let par = Parallelogram {
        level: j,
        slope,
        anchor,
        width: 2 * (a.par.width + t + 1),
        height: j as i64 + 1,
        drop_num: drop,
    };
    let nodes = par.nodes();
    for n in fill_order(ctx, ca, &nodes) {
        ctx.reveal(ca, n)?;
    }

    let colors = region_colors(ctx, ca, &nodes)?;
    let phi = potential_field(&colors, nodes[0]);
    let lo = *nodes.iter().min_by_key(|n| phi[n]).expect("nonempty");
    let hi = *nodes.iter().max_by_key(|n| (phi[n], std::cmp::Reverse(**n))).expect("nonempty");
    let full = region_path(&nodes, lo, hi).ok_or_else(|| Error::Construction("parallelogram disconnected".into()))?;
    let target = j as i64;
    let cut = full.iter().position(|n| phi[n] - phi[&lo] == target).unwrap_or(full.len() - 1);
    let path = full[..=cut].to_vec();
    let cs: Vec<_> = path.iter().map(|n| colors[n]).collect();
    let p = walk_potential(&cs, false);
    if p != phi[&path[cut]] - phi[&lo] {
        return Err(Halt::Fail(Error::Construction("potential field inconsistent on a proper region".into())));
    }
    ctx.arena.observe_potential(p);
    Ok(SlopePiece { cv: Some(ca), par, s: lo, t: path[cut], path, p, exact: p == target })
}

/// Builds a level-`kappa` construction along `slope` (canonical, in
/// `[0, 1]`) drawn through `tf`.
pub fn slope_boost(ctx: &mut Ctx<'_, '_>, kappa: u32, slope: Slope, tf: Dihedral) -> Step<SlopePiece> {
    if !slope.is_canonical() {
        return Err(Halt::Fail(Error::Domain(format!("slope {slope} outside [0, 1]"))));
    }
    level(ctx, kappa, slope, tf).map(SlopePiece::oriented)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::construction_width;

    /// Next-level shape computed the same way the builder does.
    fn grow(par: &Parallelogram, t: i64) -> (Parallelogram, GridCoord, GridCoord) {
        let i = par.width + 2 * t + 2;
        let q = par.slope.dy * i;
        let dm = par.anchor + GridCoord::new(i, q.div_euclid(par.slope.dx));
        let mut drop = par.drop_num + q.rem_euclid(par.slope.dx);
        let mut anchor = par.anchor;
        if drop >= par.slope.dx {
            anchor.y -= 1;
            drop -= par.slope.dx;
        }
        let next = Parallelogram {
            level: par.level + 1,
            slope: par.slope,
            anchor,
            width: 2 * (par.width + t + 1),
            height: par.height + 1,
            drop_num: drop,
        };
        (next, dm, dm + GridCoord::new(0, 1))
    }

    #[test]
    fn both_placements_fit_next_level() {
        for (dy, dx) in [(0, 1), (1, 4), (1, 2), (1, 1), (2, 7), (3, 5)] {
            for t in 1..=3 {
                let slope = Slope::new(dy, dx).unwrap();
                let mut par = Parallelogram { level: 0, slope, anchor: GridCoord::ORIGIN, width: 0, height: 1, drop_num: 0 };
                for _ in 0..6 {
                    let (next, dm, dp) = grow(&par, t);
                    for d in [dm, dp] {
                        let shift = d - par.anchor;
                        assert!(par.nodes().iter().all(|&n| next.contains(n)));
                        assert!(par.translate(shift).nodes().iter().all(|&n| next.contains(n)), "{dy}/{dx} T={t}");
                    }
                    assert_eq!(next.width, construction_width(next.level, t as u32));
                    assert_eq!(next.height, next.level as i64 + 1);
                    par = next;
                }
            }
        }
    }

    #[test]
    fn region_paths() {
        let nodes: Vec<_> = (0..3).flat_map(|x| (0..2).map(move |y| GridCoord::new(x, y))).collect();
        let p = region_path(&nodes, GridCoord::new(0, 0), GridCoord::new(2, 1)).unwrap();
        assert_eq!(p.len(), 4);
        assert!(region_path(&nodes, GridCoord::new(0, 0), GridCoord::new(5, 5)).is_none());
    }
}
