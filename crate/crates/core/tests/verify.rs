use gridlocal::adversary::{AdversaryParams, AdversaryStrategy, StrategyKind};
use gridlocal::algos::algorithm_by_name;
use gridlocal::geometry::{FragmentId, GridCoord};
use gridlocal::harness::{run_match, Arena, Certificate, Event, Header, MatchConfig, Step, Strategy, Transcript, TRANSCRIPT_VERSION};
use gridlocal::potential::Color;
use gridlocal::verify::{verify, verify_labels};
use proptest::prelude::*;

/// One node in each of two fragments, committed `gap` columns apart.
struct TwoDots {
    gap: i64,
}

impl Strategy for TwoDots {
    fn name(&self) -> &str {
        "two-dots"
    }

    fn play(&self, arena: &mut Arena<'_>) -> Step<()> {
        let (a, b) = (arena.new_fragment(), arena.new_fragment());
        arena.reveal(a, GridCoord::ORIGIN)?;
        arena.reveal(b, GridCoord::ORIGIN)?;
        arena.commit(a, b, GridCoord::new(self.gap, 0))?;
        Ok(())
    }
}

fn cfg(t: u32) -> MatchConfig {
    MatchConfig { t, budget: 1_000_000, seed: 3, grid: None, backdoor: false }
}

fn greedy_win() -> Transcript {
    let algo = algorithm_by_name("greedy", false).unwrap();
    let s = AdversaryStrategy::new(StrategyKind::FullDet, AdversaryParams::default(), 0);
    run_match(algo.as_ref(), &s, &cfg(1)).unwrap().transcript
}

#[test]
fn separation_is_rechecked() {
    let algo = algorithm_by_name("greedy", false).unwrap();
    // balls of radius T around each dot: 2T + 2 apart leaves one free column
    let ok = run_match(algo.as_ref(), &TwoDots { gap: 4 }, &cfg(1)).unwrap().transcript;
    verify(&ok).unwrap();
    let mut bad = ok.clone();
    let i = bad.events.iter().position(|e| matches!(e, Event::Commit { .. })).unwrap();
    if let Event::Commit { off, .. } = &mut bad.events[i] {
        off.x = 3;
    }
    let e = verify(&bad).unwrap_err();
    assert_eq!(e.event, i);
    assert!(e.reason.contains("touches"), "{e}");
}

#[test]
fn tampered_color_is_caught_at_its_label() {
    let tr = greedy_win();
    verify(&tr).unwrap();
    let algo = algorithm_by_name("greedy", false).unwrap();
    verify_labels(&tr, algo.as_ref()).unwrap();
    let labels: Vec<usize> = tr.events.iter().enumerate().filter(|(_, e)| matches!(e, Event::Label { .. })).map(|(i, _)| i).collect();
    let i = labels[labels.len() / 2];
    let mut bad = tr.clone();
    if let Event::Label { c, .. } = &mut bad.events[i] {
        *c = Color::new(c.value() % 3 + 1).unwrap();
    }
    assert_eq!(verify_labels(&bad, algo.as_ref()).unwrap_err().event, i);
}

#[test]
fn budget_and_charges_are_rechecked() {
    let tr = greedy_win();
    let mut bad = tr.clone();
    if let Event::Header(h) = &mut bad.events[0] {
        h.budget = 50;
    }
    let e = verify(&bad).unwrap_err();
    assert!(e.reason.contains("exceeds budget"), "{e}");
    let mut bad = tr.clone();
    let i = bad.events.iter().position(|e| matches!(e, Event::Reveal { .. })).unwrap();
    if let Event::Reveal { new, .. } = &mut bad.events[i] {
        *new += 1;
    }
    assert_eq!(verify(&bad).unwrap_err().event, i);
}

#[test]
fn forged_certificates_fail() {
    let tr = greedy_win();
    let last = tr.events.len() - 1;
    let Some(Event::Cert(Certificate::ImproperEdge { frag, u, v, colors, spent })) = tr.events.last().cloned() else {
        panic!("expected an improper edge");
    };
    let mut bad = tr.clone();
    bad.events[last] = Event::Cert(Certificate::ImproperEdge { frag, u, v: v + GridCoord::new(7, 7), colors, spent });
    assert_eq!(verify(&bad).unwrap_err().event, last);
    let mut bad = tr.clone();
    bad.events[last] = Event::Cert(Certificate::Survived { spent });
    assert!(verify(&bad).is_err());
    let mut bad = tr.clone();
    bad.events.pop();
    assert_eq!(verify(&bad).unwrap_err().event, last);
}

/// Eight nodes around an unrevealed center, colored properly with
/// potential -2 around the ring.
fn ring(p: i64) -> Transcript {
    let header = Header {
        version: TRANSCRIPT_VERSION,
        algo: "hand".into(),
        strategy: "hand".into(),
        seed: 0,
        t: 0,
        budget: 100,
        grid: None,
        backdoor: false,
        regime: None,
        config: serde_json::Value::Null,
    };
    let walk: Vec<GridCoord> = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
        .into_iter()
        .map(|(x, y)| GridCoord::new(x, y))
        .collect();
    let colors: Vec<Color> = [1, 2, 3, 1, 2, 3, 1, 2].into_iter().map(|c| Color::new(c).unwrap()).collect();
    let mut events = vec![Event::Header(header), Event::Fragment { id: FragmentId(0), reservation: None }];
    for (&xy, &c) in walk.iter().zip(&colors) {
        events.push(Event::Reveal { frag: FragmentId(0), xy, comp: 0, fxy: xy, new: 1 });
        events.push(Event::Label { xy, c });
    }
    events.push(Event::Cert(Certificate::PotentialViolation { frag: FragmentId(0), walk, colors, p, spent: 8 }));
    Transcript { events }
}

#[test]
fn potential_violation_certificates() {
    verify(&ring(-2)).unwrap();
    let e = verify(&ring(2)).unwrap_err();
    assert!(e.reason.contains("potential is -2"), "{e}");
}

#[test]
fn jsonl_round_trip_then_verify() {
    let tr = greedy_win();
    let back = Transcript::from_jsonl(&tr.to_jsonl()).unwrap();
    assert_eq!(back, tr);
    verify(&back).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_run_verifies(kind in 0usize..4, algo in 0usize..3, seed in 0u64..1000, kappa in 2u32..5) {
        let kind = [StrategyKind::LogBoost, StrategyKind::Quasilinear, StrategyKind::SlopeBoost, StrategyKind::Lpath][kind];
        let algo = algorithm_by_name(["greedy", "parity", "hash"][algo], false).unwrap();
        let p = AdversaryParams { kappa, l1: 512, ..AdversaryParams::default() };
        let s = AdversaryStrategy::new(kind, p, seed);
        let m = run_match(algo.as_ref(), &s, &MatchConfig { seed, ..cfg(1) }).unwrap();
        let r = verify(&m.transcript).unwrap();
        prop_assert_eq!(r.spent, m.spent);
        prop_assert!(verify_labels(&m.transcript, algo.as_ref()).is_ok());
    }
}
