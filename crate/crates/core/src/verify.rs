//! Transcript checker. Rebuilds placements, materialized cells and labels
//! from the event log alone and re-checks budget accounting, commit
//! separation and the final certificate. Shares nothing with the referee
//! beyond the event types and the edge potential.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::algos::Algorithm;
use crate::geometry::{GridCoord, Rect};
use crate::harness::{replay, Certificate, Event, Transcript, TRANSCRIPT_VERSION};
use crate::potential::{edge_potential, Color};

/// A failed re-check, located at an event index (line number minus one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyError {
    pub event: usize,
    pub reason: String,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: {}", self.event, self.reason)
    }
}

impl std::error::Error for VerifyError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub events: usize,
    pub reveals: u64,
    pub commits: u64,
    pub spent: u64,
    pub certificate: String,
}

struct Frag {
    group: u32,
    offset: GridCoord,
    reservation: Option<Rect>,
}

#[derive(Default)]
struct Group {
    cells: HashMap<GridCoord, Option<Color>>,
    revealed: HashSet<GridCoord>,
}

struct Model {
    t: i64,
    side: Option<i64>,
    frags: Vec<Frag>,
    groups: HashMap<u32, Group>,
    spent: u64,
}

impl Model {
    fn on_grid(&self, c: GridCoord) -> bool {
        self.side.is_none_or(|s| (1..=s).contains(&c.x) && (1..=s).contains(&c.y))
    }

    fn frag(&self, id: u32) -> Result<&Frag, String> {
        self.frags.get(id as usize).ok_or_else(|| format!("unknown fragment {id}"))
    }

    fn label(&self, group: u32, at: GridCoord) -> Option<Color> {
        self.groups.get(&group).and_then(|g| g.cells.get(&at).copied().flatten())
    }

    /// Ball cells of a reveal in group coordinates.
    fn ball(&self, f: &Frag, at: GridCoord) -> Vec<GridCoord> {
        let mut out = Vec::new();
        for dx in -self.t..=self.t {
            let r = self.t - dx.abs();
            for dy in -r..=r {
                let c = at + GridCoord::new(dx, dy);
                if f.reservation.is_some_and(|rect| !rect.contains(c)) {
                    continue;
                }
                if f.group == 0 && !self.on_grid(c + f.offset) {
                    continue;
                }
                out.push(c + f.offset);
            }
        }
        out
    }
}

fn fail<T>(event: usize, reason: impl Into<String>) -> Result<T, VerifyError> {
    Err(VerifyError { event, reason: reason.into() })
}

/// Re-checks a transcript. Does not re-derive labels; see [`verify_labels`].
pub fn verify(tr: &Transcript) -> Result<VerifyReport, VerifyError> {
    let Some(Event::Header(h)) = tr.events.first() else {
        return fail(0, "first event is not a header");
    };
    if h.version != TRANSCRIPT_VERSION {
        return fail(0, format!("unsupported version {}", h.version));
    }
    let mut m = Model { t: h.t as i64, side: h.grid, frags: Vec::new(), groups: HashMap::new(), spent: 0 };
    let mut pending: Option<(u32, GridCoord, GridCoord)> = None;
    let mut improper: Option<usize> = None;
    let (mut reveals, mut commits) = (0u64, 0u64);
    let mut cert: Option<(usize, &Certificate)> = None;

    for (i, e) in tr.events.iter().enumerate().skip(1) {
        if cert.is_some() {
            return fail(i, "event after the certificate");
        }
        if let (Some(j), true) = (improper, matches!(e, Event::Reveal { .. } | Event::Commit { .. } | Event::Fragment { .. })) {
            return fail(j, format!("label makes an improper edge, yet play continues at event {i}"));
        }
        match e {
            Event::Header(_) => return fail(i, "second header"),
            Event::Fragment { id, reservation } => {
                if id.0 as usize != m.frags.len() {
                    return fail(i, format!("fragment {id} out of order"));
                }
                m.frags.push(Frag { group: id.0, offset: GridCoord::ORIGIN, reservation: *reservation });
                m.groups.insert(id.0, Group::default());
            }
            Event::Reveal { frag, xy, new, .. } => {
                if pending.is_some() {
                    return fail(i, "reveal while a label is pending");
                }
                let f = m.frag(frag.0).or_else(|r| fail(i, r))?;
                if f.reservation.is_some_and(|r| !r.contains(*xy)) {
                    return fail(i, format!("{xy} outside the reservation of {frag}"));
                }
                let (g, pos) = (f.group, *xy + f.offset);
                let ball = m.ball(f, *xy);
                let grp = m.groups.get_mut(&g).expect("group exists");
                if !grp.revealed.insert(pos) {
                    return fail(i, format!("{xy} in {frag} revealed twice"));
                }
                let fresh: Vec<GridCoord> = ball.into_iter().filter(|c| !grp.cells.contains_key(c)).collect();
                if fresh.len() as u64 != *new {
                    return fail(i, format!("reveal charged {new} cells, ball adds {}", fresh.len()));
                }
                for c in fresh {
                    grp.cells.insert(c, None);
                }
                m.spent += new;
                if m.spent > h.budget {
                    return fail(i, format!("spent {} exceeds budget {}", m.spent, h.budget));
                }
                reveals += 1;
                pending = Some((g, pos, *xy));
            }
            Event::Label { xy, c } => {
                let Some((g, pos, at)) = pending.take() else {
                    return fail(i, "label without a pending reveal");
                };
                if *xy != at {
                    return fail(i, format!("label for {xy}, pending node is {at}"));
                }
                if pos.neighbors().iter().any(|n| m.label(g, *n) == Some(*c)) {
                    improper = Some(i);
                }
                m.groups.get_mut(&g).expect("group exists").cells.insert(pos, Some(*c));
            }
            Event::Commit { a, b, off } => {
                if pending.is_some() {
                    return fail(i, "commit while a label is pending");
                }
                let fa = m.frag(a.0).or_else(|r| fail(i, r))?;
                let fb = m.frag(b.0).or_else(|r| fail(i, r))?;
                let (ga, gb) = (fa.group, fb.group);
                let shift = *off + fa.offset - fb.offset;
                commits += 1;
                if ga == gb {
                    if shift != GridCoord::ORIGIN {
                        return fail(i, format!("{b} already placed elsewhere relative to {a}"));
                    }
                    continue;
                }
                if h.backdoor && (shift.x + shift.y).rem_euclid(2) == 1 {
                    return fail(i, "odd shift contradicts the fixed layout");
                }
                let here = &m.groups[&ga].cells;
                for &c in m.groups[&gb].cells.keys() {
                    let p = c + shift;
                    if here.contains_key(&p) || p.neighbors().iter().any(|n| here.contains_key(n)) {
                        return fail(i, format!("placing {b} touches the view of {a} at {p}"));
                    }
                    if ga == 0 && !m.on_grid(p) {
                        return fail(i, format!("placement puts {p} off the grid"));
                    }
                }
                if gb == 0 && m.groups[&ga].cells.keys().any(|&c| !m.on_grid(c - shift)) {
                    return fail(i, "placement puts the other group off the grid");
                }
                let (keep, gone, shift) = if gb == 0 { (gb, ga, -shift) } else { (ga, gb, shift) };
                let moved = m.groups.remove(&gone).expect("group exists");
                let dst = m.groups.get_mut(&keep).expect("group exists");
                dst.cells.extend(moved.cells.into_iter().map(|(c, l)| (c + shift, l)));
                dst.revealed.extend(moved.revealed.into_iter().map(|c| c + shift));
                for f in m.frags.iter_mut().filter(|f| f.group == gone) {
                    f.group = keep;
                    f.offset = f.offset + shift;
                }
            }
            Event::Note { .. } => {}
            Event::Cert(c) => cert = Some((i, c)),
        }
    }

    let end = tr.events.len();
    let Some((ci, c)) = cert else {
        return fail(end, "no certificate");
    };
    if pending.is_some() {
        return fail(ci, "certificate while a label is pending");
    }
    let spent = match c {
        Certificate::ImproperEdge { spent, .. }
        | Certificate::PotentialViolation { spent, .. }
        | Certificate::Survived { spent } => *spent,
    };
    if spent != m.spent {
        return fail(ci, format!("certificate claims {spent} cells, log charges {}", m.spent));
    }
    match c {
        Certificate::ImproperEdge { frag, u, v, colors, .. } => {
            let f = m.frag(frag.0).or_else(|r| fail(ci, r))?;
            let (g, pu, pv) = (f.group, *u + f.offset, *v + f.offset);
            if pu.l1(pv) != 1 {
                return fail(ci, format!("{u} and {v} are not adjacent"));
            }
            let got = [m.label(g, pu), m.label(g, pv)];
            if got != [Some(colors[0]), Some(colors[1])] || colors[0] != colors[1] {
                return fail(ci, format!("edge {u}-{v} is not monochromatic ({got:?})"));
            }
        }
        Certificate::PotentialViolation { frag, walk, colors, p, .. } => {
            let f = m.frag(frag.0).or_else(|r| fail(ci, r))?;
            if walk.len() < 2 || walk.len() != colors.len() {
                return fail(ci, "walk and colors disagree in length");
            }
            let mut sum = 0;
            for k in 0..walk.len() {
                let (a, b) = (walk[k], walk[(k + 1) % walk.len()]);
                let closing = k + 1 == walk.len();
                if a.l1(b) != 1 && !(closing && a == b) {
                    return fail(ci, format!("walk step {a} -> {b} is not a grid edge"));
                }
                if m.label(f.group, a + f.offset) != Some(colors[k]) {
                    return fail(ci, format!("walk node {a} is not labeled {}", colors[k]));
                }
                sum += edge_potential(colors[k], colors[(k + 1) % walk.len()]);
            }
            if sum != *p {
                return fail(ci, format!("walk potential is {sum}, certificate says {p}"));
            }
            if sum == 0 {
                return fail(ci, "closed walk with zero potential proves nothing");
            }
        }
        Certificate::Survived { .. } => {
            if let Some(j) = improper {
                return fail(j, "improper edge in a match reported as survived");
            }
        }
    }
    Ok(VerifyReport { events: end, reveals, commits, spent: m.spent, certificate: c.kind().into() })
}

/// Re-runs the algorithm on the logged reveals and names the first label
/// event that differs.
pub fn verify_labels(tr: &Transcript, algo: &dyn Algorithm) -> Result<(), VerifyError> {
    let again = replay(tr, algo).map_err(|e| VerifyError { event: 0, reason: format!("replay failed: {e}") })?;
    let mut theirs = again.events.iter().filter(|e| matches!(e, Event::Label { .. }));
    for (i, e) in tr.events.iter().enumerate() {
        if let Event::Label { c, .. } = e {
            match theirs.next() {
                Some(Event::Label { c: want, .. }) if want == c => {}
                Some(Event::Label { c: want, .. }) => return fail(i, format!("label {c}, algorithm gives {want}")),
                _ => return fail(i, "label the algorithm never produced"),
            }
        }
    }
    Ok(())
}
