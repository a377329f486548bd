use std::collections::BTreeSet;

use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};

use super::*;
use crate::algos::{GreedyFirstFit, SeededHash};
use crate::error::Error;
use crate::geometry::{FragmentId, GridBounds, GridCoord};
use crate::potential::Color;

fn g(x: i64, y: i64) -> GridCoord {
    GridCoord::new(x, y)
}

fn fresh(t: u32, budget: u64) -> GameState {
    GameState::new(t, budget, GridBounds::UNBOUNDED, false)
}

fn reveal_label(s: &mut GameState, f: FragmentId, at: GridCoord, c: Color) -> Vec<ImproperEdge> {
    s.reveal(f, at).unwrap();
    s.submit_label(c).unwrap()
}

#[test]
fn reveal_examples() {
    let mut s = fresh(1, 100);
    let a = s.new_fragment(None);
    s.reveal(a, g(0, 0)).unwrap();
    let snap = s.view().snapshot();
    assert_eq!(snap.components.len(), 1);
    assert_eq!(snap.components[0].nodes.len(), 5);
    assert!(snap.components[0].nodes.iter().all(|n| n.label.is_none()));
    s.submit_label(Color::ONE).unwrap();

    s.reveal(a, g(2, 0)).unwrap();
    let snap = s.view().snapshot();
    assert_eq!(snap.components.len(), 1);
    assert_eq!(snap.components[0].nodes.len(), 9);
    assert_eq!(snap.components[0].nodes.iter().filter(|n| n.label.is_some()).count(), 1);
    s.submit_label(Color::TWO).unwrap();

    let b = s.new_fragment(None);
    s.reveal(b, g(0, 0)).unwrap();
    let snap = s.view().snapshot();
    assert_eq!(snap.components.len(), 2);
    assert_eq!(snap.pending.unwrap().component, 2);
    assert_eq!(snap.pending.unwrap().xy, GridCoord::ORIGIN);
    assert_eq!(s.spent(), 14);
}

#[test]
fn reservation_clips_ball() {
    let mut s = fresh(1, 100);
    let f = s.new_fragment(Some(crate::geometry::Rect::new(g(1, 1), g(5, 5))));
    s.reveal(f, g(1, 1)).unwrap();
    assert_eq!(s.spent(), 3);
    s.submit_label(Color::ONE).unwrap();
    assert!(matches!(s.reveal(f, g(0, 0)), Err(Error::Domain(_))));
}

#[test]
fn host_grid_clips_ball() {
    let mut s = GameState::new(1, 100, GridBounds { side: Some(4) }, false);
    let h = s.new_fragment(None);
    assert_eq!(h, HOST);
    s.reveal(h, g(1, 1)).unwrap();
    assert_eq!(s.spent(), 3);
}

#[test]
fn budget_precheck() {
    let mut s = fresh(1, 7);
    let f = s.new_fragment(None);
    reveal_label(&mut s, f, g(0, 0), Color::ONE);
    let err = s.reveal(f, g(5, 0)).unwrap_err();
    assert!(matches!(err, Error::BudgetExhausted { spent: 5, needed: 5, budget: 7 }));
    assert_eq!(s.spent(), 5);
    // a neighbor adds only 3 cells and still fits
    assert_eq!(s.new_cells(f, g(1, 0)).unwrap(), 3);
    assert!(matches!(s.reveal(f, g(1, 0)), Err(Error::BudgetExhausted { .. })));
}

#[test]
fn label_protocol() {
    let mut s = fresh(1, 100);
    let f = s.new_fragment(None);
    assert!(matches!(s.submit_label(Color::ONE), Err(Error::Protocol(_))));
    s.reveal(f, g(0, 0)).unwrap();
    assert!(matches!(s.reveal(f, g(4, 0)), Err(Error::Protocol(_))));
    s.submit_label(Color::TWO).unwrap();
    assert_eq!(s.label_at(f, g(0, 0)), Some(Color::TWO));
    assert!(matches!(s.submit_label(Color::ONE), Err(Error::Protocol(_))));
    assert!(matches!(s.reveal(f, g(0, 0)), Err(Error::Protocol(_))));
    assert!(Color::new(4).is_err());
}

#[test]
fn commit_examples() {
    let t = 1;
    let mut s = fresh(t, 1000);
    let a = s.new_fragment(None);
    let b = s.new_fragment(None);
    reveal_label(&mut s, a, g(0, 0), Color::ONE);
    reveal_label(&mut s, b, g(0, 0), Color::TWO);
    // gap 2T+1 between revealed endpoints: the balls would touch
    assert!(matches!(s.can_commit(a, b, g(2 * t as i64 + 1, 0)), Err(Error::Construction(_))));
    s.commit(a, b, g(2 * t as i64 + 2, 0)).unwrap();
    assert_eq!(s.label_at(a, g(4, 0)), Some(Color::TWO));
    // identical re-commit is a no-op, a different offset is an error
    s.commit(a, b, g(4, 0)).unwrap();
    assert!(matches!(s.commit(a, b, g(5, 0)), Err(Error::Construction(_))));
    assert!(matches!(s.commit(b, a, g(0, 0)), Err(Error::Construction(_))));
}

#[test]
fn commit_chains_through_groups() {
    let mut s = fresh(1, 1000);
    let fs: Vec<FragmentId> = (0..4).map(|_| s.new_fragment(None)).collect();
    for (i, &f) in fs.iter().enumerate() {
        reveal_label(&mut s, f, g(0, 0), Color::ALL[i % 3]);
    }
    s.commit(fs[2], fs[3], g(10, 0)).unwrap();
    s.commit(fs[0], fs[1], g(0, 10)).unwrap();
    s.commit(fs[1], fs[2], g(0, 10)).unwrap();
    assert_eq!(s.group_of(fs[3]).unwrap(), fs[0]);
    assert_eq!(s.offset_of(fs[3]).unwrap(), g(10, 20));
    assert_eq!(s.label_at(fs[0], g(10, 20)), Some(Color::ALL[0]));
}

#[test]
fn merge_into_host_keeps_host_frame() {
    let mut s = fresh(1, 1000);
    let h = s.new_fragment(None);
    let b = s.new_fragment(None);
    reveal_label(&mut s, h, g(0, 0), Color::ONE);
    reveal_label(&mut s, b, g(0, 0), Color::TWO);
    s.commit(b, h, g(-6, 0)).unwrap();
    assert_eq!(s.group_of(b).unwrap(), HOST);
    assert_eq!(s.offset_of(b).unwrap(), g(6, 0));
}

#[test]
fn scan_examples() {
    let s = fresh(1, 100);
    assert!(s.scan_improper().is_empty());

    let mut s = fresh(1, 100);
    let f = s.new_fragment(None);
    reveal_label(&mut s, f, g(0, 0), Color::ONE);
    let bad = reveal_label(&mut s, f, g(1, 0), Color::ONE);
    assert_eq!(bad.len(), 1);
    assert_eq!(s.scan_improper(), bad);

    let mut s = fresh(1, 100);
    let f = s.new_fragment(None);
    for x in 0..3 {
        for y in 0..3 {
            let c = if (x + y) % 2 == 0 { Color::ONE } else { Color::TWO };
            assert!(reveal_label(&mut s, f, g(x, y), c).is_empty());
        }
    }
    assert!(s.scan_improper().is_empty());
}

#[test]
fn improper_edge_across_commit() {
    let mut s = fresh(1, 1000);
    let a = s.new_fragment(None);
    let b = s.new_fragment(None);
    reveal_label(&mut s, a, g(0, 0), Color::ONE);
    reveal_label(&mut s, b, g(0, 0), Color::ONE);
    s.commit(a, b, g(4, 0)).unwrap();
    reveal_label(&mut s, a, g(1, 0), Color::TWO);
    reveal_label(&mut s, a, g(3, 0), Color::TWO);
    let bad = reveal_label(&mut s, a, g(2, 0), Color::TWO);
    assert_eq!(bad.len(), 2);
}

#[test]
fn information_hiding() {
    // same reveals, two different uncommitted relative placements
    let build = |off: GridCoord| {
        let mut s = fresh(1, 1000);
        let a = s.new_fragment(None);
        let b = s.new_fragment(None);
        reveal_label(&mut s, a, g(0, 0), Color::ONE);
        reveal_label(&mut s, b, off, Color::TWO);
        reveal_label(&mut s, a, g(1, 0), Color::TWO);
        reveal_label(&mut s, b, off + g(0, 1), Color::THREE);
        s.reveal(a, g(2, 0)).unwrap();
        serde_json::to_string(&s.view().snapshot()).unwrap()
    };
    assert_eq!(build(g(0, 0)), build(g(100, -37)));
}

#[test]
fn backdoor_blocks_parity_flip() {
    let mut s = GameState::new(1, 1000, GridBounds::UNBOUNDED, true);
    let a = s.new_fragment(None);
    let b = s.new_fragment(None);
    reveal_label(&mut s, a, g(0, 0), Color::ONE);
    reveal_label(&mut s, b, g(0, 0), Color::ONE);
    assert!(s.can_commit(a, b, g(5, 0)).is_err());
    assert!(s.can_commit(a, b, g(4, 0)).is_ok());
    s.reveal(a, g(1, 0)).unwrap();
    assert_eq!(s.view().hidden_position(), Some(g(1, 0)));
    let plain = {
        let mut s = fresh(1, 100);
        let a = s.new_fragment(None);
        s.reveal(a, g(1, 0)).unwrap();
        s.view().hidden_position()
    };
    assert_eq!(plain, None);
}

struct Empty;

impl Strategy for Empty {
    fn name(&self) -> &str {
        "empty"
    }
    fn play(&self, _arena: &mut Arena<'_>) -> Step<()> {
        Ok(())
    }
}

/// Reveals a short row in two fragments and glues them improperly if it can.
struct Toy;

impl Strategy for Toy {
    fn name(&self) -> &str {
        "toy"
    }
    fn play(&self, arena: &mut Arena<'_>) -> Step<()> {
        let a = arena.new_fragment();
        let b = arena.new_fragment();
        let ca = arena.reveal(a, g(0, 0))?;
        let cb = arena.reveal(b, g(0, 0))?;
        let off = if (ca == cb) == (arena.t().is_multiple_of(2)) { g(4, 0) } else { g(5, 0) };
        arena.commit(a, b, off)?;
        for x in 1..off.x {
            arena.reveal(a, g(x, 0))?;
        }
        arena.sweep()
    }
}

fn cfg(seed: u64) -> MatchConfig {
    MatchConfig { t: 1, budget: 1000, seed, grid: None, backdoor: false }
}

#[test]
fn run_match_empty_strategy() {
    let r = run_match(&GreedyFirstFit, &Empty, &cfg(0)).unwrap();
    assert_eq!(r.status, MatchStatus::Survived);
    assert_eq!(r.certificate, Certificate::Survived { spent: 0 });
    assert_eq!(r.transcript.events.len(), 2);
}

#[test]
fn run_match_deterministic_and_replayable() {
    for seed in 0..20 {
        let r1 = run_match(&SeededHash, &Toy, &cfg(seed)).unwrap();
        let r2 = run_match(&SeededHash, &Toy, &cfg(seed)).unwrap();
        assert_eq!(r1.transcript.to_jsonl(), r2.transcript.to_jsonl());
        let back = replay(&Transcript::from_jsonl(&r1.transcript.to_jsonl()).unwrap(), &SeededHash).unwrap();
        assert_eq!(back.to_jsonl(), r1.transcript.to_jsonl());
    }
}

#[test]
fn budget_exhaustion_is_an_outcome() {
    let c = MatchConfig { budget: 7, ..cfg(0) };
    let r = run_match(&GreedyFirstFit, &Toy, &c).unwrap();
    assert_eq!(r.status, MatchStatus::BudgetExhausted);
}

fn diamond_union(centers: &[GridCoord], t: i64) -> BTreeSet<GridCoord> {
    let mut out = BTreeSet::new();
    for c in centers {
        for dx in -t..=t {
            for dy in -(t - dx.abs())..=(t - dx.abs()) {
                out.insert(*c + g(dx, dy));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The view is exactly the union of balls, budget equals its size, and
    /// frames stay fixed while no merge happens.
    #[test]
    fn view_soundness_and_budget(
        t in 1u32..3,
        pts in prop::collection::vec((-6i64..6, -6i64..6), 1..12),
    ) {
        let mut s = fresh(t, 10_000);
        let f = s.new_fragment(None);
        let mut centers = Vec::new();
        let mut prev: Option<ViewSnapshot> = None;
        for (x, y) in pts {
            let at = g(x, y);
            if s.is_revealed(f, at) {
                continue;
            }
            s.reveal(f, at).unwrap();
            s.submit_label(Color::ONE).unwrap();
            centers.push(at);
            let snap = s.view().snapshot();
            let expect = diamond_union(&centers, t as i64);
            prop_assert_eq!(s.spent() as usize, expect.len());
            let total: usize = snap.components.iter().map(|c| c.nodes.len()).sum();
            prop_assert_eq!(total, expect.len());
            if let Some(p) = &prev {
                if p.components.len() <= snap.components.len() {
                    // no merge: old nodes keep their frame coordinates
                    for pc in &p.components {
                        let now = snap.components.iter().find(|c| c.id == pc.id).unwrap();
                        for n in &pc.nodes {
                            prop_assert!(now.nodes.iter().any(|m| m.xy == n.xy));
                        }
                    }
                }
            }
            prev = Some(snap);
        }
    }
}
