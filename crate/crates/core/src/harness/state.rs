//! The referee's hidden state: fragments, materialized cells, labels and
//! the view components the algorithm sees.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball, Direction, Fragment, FragmentId, GridBounds, GridCoord, Rect};
use crate::potential::Color;

use super::transcript::Event;

/// Fragment 0 is the host: its frame is the absolute grid frame.
pub const HOST: FragmentId = FragmentId(0);

#[derive(Debug, Clone)]
struct FragState {
    frag: Fragment,
    /// Root fragment of the placement group.
    group: u32,
    /// Private frame to group frame.
    offset: GridCoord,
}

#[derive(Debug, Clone)]
struct Cell {
    group: u32,
    pos: GridCoord,
    label: Option<Color>,
    reveal: Option<u32>,
}

/// Two adjacent labeled cells with the same color, in the frame of the
/// group's root fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImproperEdge {
    pub frag: FragmentId,
    pub u: GridCoord,
    pub v: GridCoord,
    pub color: Color,
}

#[derive(Debug, Clone)]
pub struct GameState {
    t: u32,
    budget: u64,
    bounds: GridBounds,
    backdoor: bool,
    frags: Vec<FragState>,
    /// Per group root: member fragments and cells.
    members: Vec<Vec<u32>>,
    group_cells: Vec<Vec<u32>>,
    cells: Vec<Cell>,
    index: HashMap<(u32, GridCoord), u32>,
    /// Union-find over cells; `comp_id` is meaningful at roots and holds the
    /// reveal index of the component's origin.
    parent: Vec<u32>,
    comp_id: Vec<u32>,
    reveals: Vec<u32>,
    /// Pending cell with the fragment and position it was revealed at.
    pending: Option<(u32, FragmentId, GridCoord)>,
    events: Vec<Event>,
}

impl GameState {
    pub fn new(t: u32, budget: u64, bounds: GridBounds, backdoor: bool) -> GameState {
        GameState {
            t,
            budget,
            bounds,
            backdoor,
            frags: Vec::new(),
            members: Vec::new(),
            group_cells: Vec::new(),
            cells: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            comp_id: Vec::new(),
            reveals: Vec::new(),
            pending: None,
            events: Vec::new(),
        }
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Number of materialized cells.
    pub fn spent(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn backdoor(&self) -> bool {
        self.backdoor
    }

    pub fn reveal_count(&self) -> usize {
        self.reveals.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn push_event(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    pub fn fragment_count(&self) -> usize {
        self.frags.len()
    }

    pub fn new_fragment(&mut self, reservation: Option<Rect>) -> FragmentId {
        let id = FragmentId(self.frags.len() as u32);
        let mut frag = Fragment::new(id);
        frag.reservation = reservation;
        if id == HOST {
            frag.committed_offset = Some(GridCoord::ORIGIN);
        }
        self.frags.push(FragState { frag, group: id.0, offset: GridCoord::ORIGIN });
        self.members.push(vec![id.0]);
        self.group_cells.push(Vec::new());
        self.events.push(Event::Fragment { id, reservation });
        id
    }

    fn frag(&self, f: FragmentId) -> Result<&FragState> {
        self.frags.get(f.0 as usize).ok_or_else(|| Error::Domain(format!("unknown fragment {f}")))
    }

    /// Root fragment of `f`'s placement group.
    pub fn group_of(&self, f: FragmentId) -> Result<FragmentId> {
        Ok(FragmentId(self.frag(f)?.group))
    }

    /// Translation from `f`'s frame to its group root's frame.
    pub fn offset_of(&self, f: FragmentId) -> Result<GridCoord> {
        Ok(self.frag(f)?.offset)
    }

    fn cell_at(&self, f: FragmentId, at: GridCoord) -> Option<&Cell> {
        let fs = self.frags.get(f.0 as usize)?;
        self.index.get(&(fs.group, at + fs.offset)).map(|&i| &self.cells[i as usize])
    }

    pub fn is_materialized(&self, f: FragmentId, at: GridCoord) -> bool {
        self.cell_at(f, at).is_some()
    }

    pub fn is_revealed(&self, f: FragmentId, at: GridCoord) -> bool {
        self.cell_at(f, at).is_some_and(|c| c.reveal.is_some())
    }

    pub fn label_at(&self, f: FragmentId, at: GridCoord) -> Option<Color> {
        self.cell_at(f, at).and_then(|c| c.label)
    }

    /// Cells not yet materialized in the radius-`T` ball around `at`.
    pub fn new_cells(&self, f: FragmentId, at: GridCoord) -> Result<u64> {
        let fs = self.frag(f)?;
        let b = ball(&fs.frag, at, self.t, self.bounds)?;
        Ok(b.iter().filter(|&&c| !self.index.contains_key(&(fs.group, c + fs.offset))).count() as u64)
    }

    fn find(&self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            c = self.parent[c as usize];
        }
        c
    }

    fn find_mut(&mut self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            let gp = self.parent[self.parent[c as usize] as usize];
            self.parent[c as usize] = gp;
            c = gp;
        }
        c
    }

    /// Merge, keeping the frame of the component revealed first.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find_mut(a), self.find_mut(b));
        if ra == rb {
            return;
        }
        let (keep, drop) = if self.comp_id[ra as usize] <= self.comp_id[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
    }

    /// Reveal `at` in fragment `f`: materialize its ball and make it the
    /// pending node. Returns the reveal index.
    pub fn reveal(&mut self, f: FragmentId, at: GridCoord) -> Result<u32> {
        if self.pending.is_some() {
            return Err(Error::Protocol("reveal while a label is pending".into()));
        }
        let fs = self.frag(f)?.clone();
        if self.is_revealed(f, at) {
            return Err(Error::Protocol(format!("{at} in {f} already revealed")));
        }
        let b = ball(&fs.frag, at, self.t, self.bounds)?;
        let fresh: Vec<GridCoord> =
            b.iter().map(|&c| c + fs.offset).filter(|&c| !self.index.contains_key(&(fs.group, c))).collect();
        let needed = fresh.len() as u64;
        if self.spent() + needed > self.budget {
            return Err(Error::BudgetExhausted { spent: self.spent(), needed, budget: self.budget });
        }
        let r = self.reveals.len() as u32;
        for &pos in &fresh {
            let id = self.cells.len() as u32;
            self.cells.push(Cell { group: fs.group, pos, label: None, reveal: None });
            self.index.insert((fs.group, pos), id);
            self.group_cells[fs.group as usize].push(id);
            self.parent.push(id);
            self.comp_id.push(u32::MAX);
        }
        let center = self.index[&(fs.group, at + fs.offset)];
        self.cells[center as usize].reveal = Some(r);
        self.reveals.push(center);
        let root = self.find_mut(center);
        if self.comp_id[root as usize] == u32::MAX {
            self.comp_id[root as usize] = r;
        }
        for &pos in &fresh {
            let id = self.index[&(fs.group, pos)];
            let root = self.find_mut(id);
            if self.comp_id[root as usize] == u32::MAX {
                // fresh singletons join the center's component first
                self.union(center, id);
            }
            for n in pos.neighbors() {
                if let Some(&j) = self.index.get(&(fs.group, n)) {
                    self.union(id, j);
                }
            }
        }
        self.pending = Some((center, f, at));
        let (comp, fxy) = self.frame_of(center);
        self.events.push(Event::Reveal { frag: f, xy: at, comp, fxy, new: needed });
        Ok(r)
    }

    /// Component id and frame position of a cell.
    fn frame_of(&self, cell: u32) -> (u32, GridCoord) {
        let comp = self.comp_id[self.find(cell) as usize];
        let origin = self.reveals[comp as usize];
        (comp, self.cells[cell as usize].pos - self.cells[origin as usize].pos)
    }

    /// Fragment and position of the pending node.
    pub fn pending(&self) -> Option<(FragmentId, GridCoord)> {
        self.pending.map(|(_, f, at)| (f, at))
    }

    /// Record the label of the pending node. Returns the improper edges it
    /// closes against already labeled neighbors.
    pub fn submit_label(&mut self, color: Color) -> Result<Vec<ImproperEdge>> {
        let (c, _, at) = self.pending.take().ok_or_else(|| Error::Protocol("no pending node to label".into()))?;
        let (group, pos) = (self.cells[c as usize].group, self.cells[c as usize].pos);
        self.cells[c as usize].label = Some(color);
        self.events.push(Event::Label { xy: at, c: color });
        let mut bad = Vec::new();
        for n in pos.neighbors() {
            if let Some(&j) = self.index.get(&(group, n)) {
                if self.cells[j as usize].label == Some(color) {
                    let (u, v) = if pos < n { (pos, n) } else { (n, pos) };
                    bad.push(ImproperEdge { frag: FragmentId(group), u, v, color });
                }
            }
        }
        Ok(bad)
    }

    /// Shift that moves `b`'s group into `a`'s group frame when `b`'s origin
    /// sits at `off` in `a`'s frame.
    fn commit_shift(&self, a: FragmentId, b: FragmentId, off: GridCoord) -> Result<(u32, u32, GridCoord)> {
        let (fa, fb) = (self.frag(a)?, self.frag(b)?);
        Ok((fa.group, fb.group, off + fa.offset - fb.offset))
    }

    /// Checks a placement without applying it.
    pub fn can_commit(&self, a: FragmentId, b: FragmentId, off: GridCoord) -> Result<()> {
        let (ga, gb, shift) = self.commit_shift(a, b, off)?;
        if ga == gb {
            return if shift == GridCoord::ORIGIN {
                Ok(())
            } else {
                Err(Error::Construction(format!("{b} already placed relative to {a}")))
            };
        }
        if self.backdoor && shift.parity() == 1 {
            return Err(Error::Construction("placement contradicts the fixed hidden layout".into()));
        }
        for &id in &self.group_cells[gb as usize] {
            let p = self.cells[id as usize].pos + shift;
            if self.index.contains_key(&(ga, p)) || p.neighbors().iter().any(|n| self.index.contains_key(&(ga, *n))) {
                return Err(Error::Construction(format!(
                    "placing {b} at {off} against {a} touches an existing view at {p}"
                )));
            }
            if ga == HOST.0 && !self.bounds.contains(p) {
                return Err(Error::Construction(format!("placement puts {p} outside the grid")));
            }
        }
        if gb == HOST.0 {
            for &id in &self.group_cells[ga as usize] {
                let p = self.cells[id as usize].pos - shift;
                if !self.bounds.contains(p) {
                    return Err(Error::Construction(format!("placement puts {p} outside the grid")));
                }
            }
        }
        Ok(())
    }

    /// Fix `b`'s frame relative to `a`: `b`'s origin sits at `off` in `a`'s
    /// frame. Both groups merge into one frame.
    pub fn commit(&mut self, a: FragmentId, b: FragmentId, off: GridCoord) -> Result<()> {
        self.can_commit(a, b, off)?;
        let (ga, gb, shift) = self.commit_shift(a, b, off)?;
        self.events.push(Event::Commit { a, b, off });
        if ga == gb {
            return Ok(());
        }
        // the host frame is absolute, so it always survives the merge
        let (keep, gone, shift) = if gb == HOST.0 { (gb, ga, -shift) } else { (ga, gb, shift) };
        for f in std::mem::take(&mut self.members[gone as usize]) {
            let fs = &mut self.frags[f as usize];
            fs.group = keep;
            fs.offset = fs.offset + shift;
            if keep == HOST.0 {
                fs.frag.committed_offset = Some(fs.offset);
            }
            self.members[keep as usize].push(f);
        }
        for id in std::mem::take(&mut self.group_cells[gone as usize]) {
            let cell = &mut self.cells[id as usize];
            self.index.remove(&(gone, cell.pos));
            cell.group = keep;
            cell.pos = cell.pos + shift;
            self.index.insert((keep, cell.pos), id);
            self.group_cells[keep as usize].push(id);
        }
        Ok(())
    }

    /// Every improper edge among labeled cells.
    pub fn scan_improper(&self) -> Vec<ImproperEdge> {
        let mut out = Vec::new();
        for cell in &self.cells {
            let Some(color) = cell.label else { continue };
            for d in [Direction::East, Direction::North] {
                let n = cell.pos.step(d);
                if let Some(&j) = self.index.get(&(cell.group, n)) {
                    if self.cells[j as usize].label == Some(color) {
                        out.push(ImproperEdge { frag: FragmentId(cell.group), u: cell.pos, v: n, color });
                    }
                }
            }
        }
        out.sort_by_key(|e| (e.frag, e.u, e.v));
        out
    }

    pub fn view(&self) -> View<'_> {
        View { st: self }
    }
}

/// What the algorithm sees. Components carry private frames; nothing here
/// exposes group frames or offsets between components.
#[derive(Clone, Copy)]
pub struct View<'a> {
    st: &'a GameState,
}

/// A node as the algorithm names it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRef {
    /// Reveal index of the node.
    pub name: u32,
    pub component: u32,
    pub xy: GridCoord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub xy: GridCoord,
    pub label: Option<Color>,
    pub name: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSnapshot {
    pub id: u32,
    pub nodes: Vec<NodeSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSnapshot {
    pub pending: Option<NodeRef>,
    pub components: Vec<ComponentSnapshot>,
}

impl<'a> View<'a> {
    pub fn pending(&self) -> Option<NodeRef> {
        self.st.pending.map(|(c, _, _)| {
            let (component, xy) = self.st.frame_of(c);
            NodeRef { name: self.st.cells[c as usize].reveal.unwrap_or(u32::MAX), component, xy }
        })
    }

    pub fn reveal_count(&self) -> usize {
        self.st.reveals.len()
    }

    /// Label at a frame position of a component, if that node is visible.
    pub fn label(&self, component: u32, xy: GridCoord) -> Option<Color> {
        let origin = *self.st.reveals.get(component as usize)?;
        let oc = &self.st.cells[origin as usize];
        let &id = self.st.index.get(&(oc.group, oc.pos + xy))?;
        let root = self.st.find(id);
        (self.st.comp_id[root as usize] == component).then(|| self.st.cells[id as usize].label).flatten()
    }

    /// Labels of the pending node's four neighbors in `Direction::ALL` order.
    pub fn neighbor_labels(&self) -> [Option<Color>; 4] {
        let Some(p) = self.pending() else { return [None; 4] };
        Direction::ALL.map(|d| self.label(p.component, p.xy.step(d)))
    }

    /// Position of the pending node in the hidden layout. Available only
    /// when the backdoor is enabled.
    pub fn hidden_position(&self) -> Option<GridCoord> {
        if !self.st.backdoor {
            return None;
        }
        self.st.pending.map(|(c, _, _)| self.st.cells[c as usize].pos)
    }

    /// Full serialization of everything visible, in a canonical order.
    pub fn snapshot(&self) -> ViewSnapshot {
        let mut comps: HashMap<u32, Vec<NodeSnapshot>> = HashMap::new();
        for (i, cell) in self.st.cells.iter().enumerate() {
            let (comp, xy) = self.st.frame_of(i as u32);
            comps.entry(comp).or_default().push(NodeSnapshot { xy, label: cell.label, name: cell.reveal });
        }
        let mut components: Vec<ComponentSnapshot> = comps
            .into_iter()
            .map(|(id, mut nodes)| {
                nodes.sort_by_key(|n| n.xy);
                ComponentSnapshot { id, nodes }
            })
            .collect();
        components.sort_by_key(|c| c.id);
        ViewSnapshot { pending: self.pending(), components }
    }
}
