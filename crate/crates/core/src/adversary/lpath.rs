//! The contradiction stage: a zero-potential L-path, the diagonal closing
//! it, a slope-boosted path laid above a flat stretch of that diagonal,
//! and the strike joining them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{diagonal_path, Dihedral, Direction, GridCoord, Slope};
use crate::harness::{Halt, Step};
use crate::potential::{first_improper, mvt_witness, potential_profile, walk_potential};

use super::ctx::{join, segment, Canvas, Ctx};
use super::params::kappa0;
use super::rows::{grow_line, log_boost_row, quasilinear_row, Band, RowPiece};
use super::slope::{potential_field, region_colors, region_path, slope_boost, SlopePiece};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LPathBuild {
    #[serde(skip)]
    pub host: Option<Canvas>,
    pub w_h: RowPiece,
    pub w_v: RowPiece,
    pub row_len: i64,
    pub p_row: i64,
    pub north: bool,
    pub col_len: i64,
    pub p_col: i64,
}

impl LPathBuild {
    /// Host canvas turned so the column runs north.
    pub fn canvas(&self) -> Canvas {
        let host = self.host.expect("lpath carries its canvas");
        let tf = if self.north { Dihedral::IDENTITY } else { Dihedral { swap: false, flip_x: false, flip_y: true } };
        Canvas { frag: host.frag, tf }
    }

    pub fn end(&self) -> GridCoord {
        GridCoord::new(self.row_len, self.col_len)
    }
}

/// Row then column from a fresh canvas, with the column stopped where the
/// L-path's potential returns to zero.
pub fn build_lpath(ctx: &mut Ctx<'_, '_>) -> Step<LPathBuild> {
    let host = ctx.canvas(Dihedral::IDENTITY);
    let k0 = kappa0(ctx.p.t, ctx.p.l0);
    let w_h = log_boost_row(ctx, k0, Dihedral::IDENTITY)?;
    let w_v = log_boost_row(ctx, k0, Dihedral { swap: true, flip_x: false, flip_y: false })?;
    let l1 = ctx.p.l1 as i64;
    let f_row = quasilinear_row(ctx, host, &w_h, l1)?;
    let p_row = f_row[l1 as usize];
    let corner = GridCoord::new(l1, 0);
    let probe = w_v.walk().len.max(1).min(l1 - 1);
    let mut probes = [0i64; 2];
    for (k, (dir, site)) in [(Direction::North, "col_attack_n"), (Direction::South, "col_attack_s")].into_iter().enumerate() {
        let band = Band::from_piece(&w_v, dir);
        let f = grow_line(ctx, host.frag, corner, dir, Some(band), site, probe, |_| false)?;
        probes[k] = f[probe as usize];
    }
    let sign = p_row.signum();
    let dir_v = ctx.ch.choose("col_dir", |r| r.gen_range(0..2), || Ok(u32::from(sign * probes[1] < sign * probes[0])))?;
    let dir = if dir_v == 0 { Direction::North } else { Direction::South };
    let cap = l1 - 1;
    let target = ctx.ch.pre("col_len", |r| r.gen_range(1..=cap as u32))?.map(|v| v as i64);
    let band = Band::from_piece(&w_v, dir);
    let f_col = grow_line(ctx, host.frag, corner, dir, Some(band), "col_attack", target.unwrap_or(cap), |f| {
        let len = f.len() as i64 - 1;
        target.is_none() && len >= 1 && p_row + f[len as usize] == 0
    })?;
    let col_len = match target {
        Some(t) => t,
        None => {
            let best = (1..f_col.len()).min_by_key(|&i| (p_row + f_col[i]).abs()).unwrap_or(1) as i64;
            ctx.ch.record("col_len", best as u32);
            best
        }
    };
    let lp = LPathBuild {
        host: Some(host),
        w_h,
        w_v,
        row_len: l1,
        p_row,
        north: dir == Direction::North,
        col_len,
        p_col: f_col[col_len as usize],
    };
    ctx.arena.note("lpath", &lp);
    Ok(lp)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalStage {
    pub points: Vec<GridCoord>,
    pub f: Vec<i64>,
    pub cycle: i64,
    /// Height of the thinnest slope-aligned band holding the diagonal.
    pub enclosure: f64,
}

/// Reveals the staircase from the L-path's start to its end and checks the
/// closed walk they form. Coordinates are in the L-path canvas.
pub fn diagonal_stage(ctx: &mut Ctx<'_, '_>, lp: &LPathBuild) -> Step<DiagonalStage> {
    let cv = lp.canvas();
    let diag = diagonal_path(GridCoord::ORIGIN, lp.end())?;
    let (stair, _) = diag.staircase();
    for &n in &stair.nodes {
        ctx.reveal(cv, n)?;
    }
    let mut walk = segment(GridCoord::ORIGIN, GridCoord::new(lp.row_len, 0))?;
    join(&mut walk, &segment(GridCoord::new(lp.row_len, 0), lp.end())?);
    join(&mut walk, &stair.nodes.iter().rev().copied().collect::<Vec<_>>());
    walk.pop();
    let colors = ctx.colors(cv, &walk)?;
    let cycle = walk_potential(&colors, true);
    let bad = first_improper(&colors, true).is_none() && cycle != 0;
    let (dy, dx) = (lp.col_len, lp.row_len);
    let enclosure = (0..=dx).map(|x| (dy * x).rem_euclid(dx)).max().unwrap_or(0) as f64 / dx as f64;
    ctx.arena.note("diagonal", serde_json::json!({ "cycle": cycle, "enclosure": enclosure, "span": dx, "rise": dy }));
    if ctx.ch.choose("diag_fill", |_| 0, || Ok(u32::from(bad)))? == 1 {
        ctx.fill_enclosed(cv, &walk)?;
    }
    let prof = potential_profile(&diag, |c| ctx.color(cv, c))?;
    Ok(DiagonalStage { points: diag.points, f: prof.f, cycle, enclosure })
}

/// Window start on the diagonal profile for a pair `ell` columns apart.
/// Strict mode takes the mean value witness; otherwise the flat windows
/// (`|g| <= 2`) are ranked by how far they sit from `p_r`, falling back to
/// the flattest one.
pub fn find_window(f: &[i64], ell: usize, p_r: i64, strict: bool) -> crate::Result<usize> {
    if strict {
        return mvt_witness(f, ell, 2);
    }
    let b = f.len().checked_sub(1).ok_or_else(|| Error::Domain("empty profile".into()))?;
    if ell == 0 || ell > b {
        return Err(Error::Domain(format!("window {ell} does not fit span {b}")));
    }
    let g = |x: usize| f[x + ell] - f[x];
    let flat = (0..=b - ell).filter(|&x| g(x).abs() <= 2).max_by_key(|&x| ((g(x) - p_r).abs(), std::cmp::Reverse(x)));
    Ok(flat.unwrap_or_else(|| (0..=b - ell).min_by_key(|&x| g(x).abs()).expect("nonempty")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrikeReport {
    pub window: usize,
    pub ell: i64,
    pub p_r: i64,
    pub g: i64,
    pub lift: i64,
    pub connectors: [i64; 2],
    pub cycle: i64,
    /// `|p_r| - 2 - sum(len/3 + c)` over the realized connectors.
    pub margin: i64,
}

/// Ranks pairs of the filled construction by potential gap, then span.
fn widest_pair(ctx: &Ctx<'_, '_>, r: &SlopePiece, nodes: &[GridCoord]) -> crate::Result<(GridCoord, GridCoord)> {
    let colors = region_colors(ctx, r.canvas(), nodes)?;
    let phi = potential_field(&colors, r.s);
    let mut best = (r.s, r.t);
    let mut key = (r.p.abs(), (r.t.x - r.s.x).abs());
    for &a in nodes {
        for &b in nodes {
            let k = (phi[&b] - phi[&a], (b.x - a.x).abs());
            if k > key {
                key = k;
                best = (a, b);
            }
        }
    }
    Ok(best)
}

/// Lays the construction above the window, joins both ends with vertical
/// connectors and fills the loop when it carries potential.
pub fn final_strike(ctx: &mut Ctx<'_, '_>, lp: &LPathBuild, diag: &DiagonalStage, r: &SlopePiece) -> Step<StrikeReport> {
    let host = lp.canvas();
    let rcv = r.canvas();
    let nodes = r.par.nodes();
    let n = nodes.len() as u64;
    if n * n > u32::MAX as u64 {
        return Err(Halt::Fail(Error::Domain("construction too large to encode its pair".into())));
    }
    let left_col: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].x == r.par.anchor.x).collect();
    let right_col: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].x == r.par.anchor.x + r.par.width).collect();
    let guess = |g: &mut rand_chacha::ChaCha8Rng| {
        let a = left_col[g.gen_range(0..left_col.len())];
        let b = right_col[g.gen_range(0..right_col.len())];
        (a as u64 * n + b as u64) as u32
    };
    let pair = match ctx.ch.pre("r_pair", guess)? {
        Some(v) => v as u64,
        None => {
            let (a, b) = widest_pair(ctx, r, &nodes)?;
            let ia = nodes.iter().position(|&x| x == a).expect("pair inside") as u64;
            let ib = nodes.iter().position(|&x| x == b).expect("pair inside") as u64;
            ctx.ch.record("r_pair", (ia * n + ib) as u32);
            ia * n + ib
        }
    };
    let (a, b) = (nodes[(pair / n) as usize], nodes[(pair % n) as usize]);
    let (left, right) = if a.x <= b.x { (a, b) } else { (b, a) };
    let r_path = if (left, right) == (r.s, r.t) {
        r.path.clone()
    } else if (left, right) == (r.t, r.s) {
        r.path.iter().rev().copied().collect()
    } else {
        region_path(&nodes, left, right).ok_or_else(|| Error::Construction("construction disconnected".into()))?
    };
    let p_r = ctx.potential(rcv, &r_path)?;
    let ell = right.x - left.x;
    let b_span = diag.f.len() as i64 - 1;
    if ell == 0 || ell > b_span {
        ctx.arena.note("strike_skipped", serde_json::json!({ "ell": ell, "span": b_span }));
        return Err(Halt::Fail(Error::Construction(format!("pair span {ell} unusable on span {b_span}"))));
    }
    let strict = ctx.strict;
    let window = ctx.ch.choose(
        "window",
        |g| g.gen_range(0..=(b_span - ell) as u32),
        || Ok(find_window(&diag.f, ell as usize, p_r, strict)? as u32),
    )? as usize;
    let u1 = diag.points[window];
    let v1 = diag.points[window + ell as usize];
    let limit = 2 * ctx.t() + 2 + 4 * (r.par.height + 8) + 64;
    let lift = (2..=limit)
        .find(|&dy| ctx.can_commit(host, rcv, u1 + GridCoord::new(0, dy) - left))
        .ok_or_else(|| Halt::Fail(Error::Construction("no room above the window".into())))?;
    let off = u1 + GridCoord::new(0, lift) - left;
    ctx.commit(host, rcv, off)?;
    let (l2, r2) = (left + off, right + off);
    let up_l = segment(u1, l2)?;
    let up_r = segment(v1, r2)?;
    for &p in up_l.iter().chain(up_r.iter()) {
        ctx.reveal(host, p)?;
    }
    let (stair, index) = diagonal_path(diag.points[0], *diag.points.last().expect("nonempty"))?.staircase();
    let mut walk = stair.nodes[index[window]..=index[window + ell as usize]].to_vec();
    join(&mut walk, &up_r);
    join(&mut walk, &r_path.iter().rev().map(|&p| p + off).collect::<Vec<_>>());
    join(&mut walk, &up_l.iter().rev().copied().collect::<Vec<_>>());
    walk.pop();
    let colors = ctx.colors(host, &walk)?;
    let cycle = walk_potential(&colors, true);
    let proper = first_improper(&colors, true).is_none();
    let g = diag.f[window + ell as usize] - diag.f[window];
    let conn = [up_l.len() as i64 - 1, up_r.len() as i64 - 1];
    let c = ctx.p.c_ledger;
    let margin = p_r.abs() - 2 - conn.iter().map(|l| l / 3 + c).sum::<i64>();
    let report = StrikeReport { window, ell, p_r, g, lift, connectors: conn, cycle, margin };
    ctx.arena.note("strike", &report);
    if !proper {
        ctx.arena.sweep()?;
    }
    if ctx.ch.choose("strike_fill", |_| 1, || Ok(u32::from(proper && cycle != 0)))? == 1 {
        ctx.fill_enclosed(host, &walk)?;
    }
    if strict && margin > 0 {
        return Err(Halt::Fail(Error::Construction(format!("strike balanced despite margin {margin}"))));
    }
    Ok(report)
}

/// L-path, diagonal, slope construction along the diagonal, strike.
pub fn full_pipeline(ctx: &mut Ctx<'_, '_>) -> Step<StrikeReport> {
    let lp = build_lpath(ctx)?;
    let diag = diagonal_stage(ctx, &lp)?;
    let slope = Slope::new(lp.col_len, lp.row_len)?;
    let r = slope_boost(ctx, ctx.p.kappa, slope, lp.canvas().tf)?;
    ctx.arena.note("slope_artifact", &r);
    final_strike(ctx, &lp, &diag, &r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_prefers_flat_far_from_target() {
        let f = [0, 1, 2, 1, 0, -1, 0];
        assert_eq!(find_window(&f, 2, 3, false).unwrap(), 2);
        assert_eq!(find_window(&f, 2, -3, false).unwrap(), 0);
        assert!(find_window(&f, 7, 0, false).is_err());
        let steep = [0, 2, 4, 6, 8];
        assert_eq!(find_window(&steep, 2, 0, false).unwrap(), 0);
    }

    #[test]
    fn strict_window_needs_short_span() {
        let f = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0];
        assert_eq!(find_window(&f, 3, 5, true).unwrap(), 0);
        assert!(find_window(&f, 4, 5, true).is_err());
    }
}
