//! Turn-by-turn match driver between a strategy and an algorithm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algos::Algorithm;
use crate::error::{Error, Result};
use crate::geometry::{FragmentId, GridBounds, GridCoord, Walk};
use crate::potential::{check_closed_walk, ClosedWalkVerdict, Color, ColoredWalk};

use super::state::{GameState, ImproperEdge};
use super::transcript::{Certificate, Event, Header, Transcript, TRANSCRIPT_VERSION};

/// Why a strategy stopped early.
#[derive(Debug)]
pub enum Halt {
    Win(Certificate),
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Halt {
        Halt::Fail(e)
    }
}

pub type Step<T> = std::result::Result<T, Halt>;

pub trait Strategy: Sync {
    fn name(&self) -> &str;
    /// Strategy parameters echoed into the transcript header.
    fn config(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
    fn regime(&self) -> Option<String> {
        None
    }
    /// `Ok(())` concedes: the algorithm survived.
    fn play(&self, arena: &mut Arena<'_>) -> Step<()>;
}

/// The bit stream handed to the algorithm for reveal `r`.
pub fn reveal_rng(seed: u64, r: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

pub struct Arena<'a> {
    pub state: GameState,
    algo: &'a dyn Algorithm,
    seed: u64,
    peak: i64,
}

impl<'a> Arena<'a> {
    pub fn new(state: GameState, algo: &'a dyn Algorithm, seed: u64) -> Arena<'a> {
        Arena { state, algo, seed, peak: 0 }
    }

    pub fn t(&self) -> u32 {
        self.state.t()
    }

    pub fn new_fragment(&mut self) -> FragmentId {
        self.state.new_fragment(None)
    }

    /// Reveal a node and have the algorithm label it. Already labeled nodes
    /// return their label without a new turn.
    pub fn reveal(&mut self, f: FragmentId, at: GridCoord) -> Step<Color> {
        if let Some(c) = self.state.label_at(f, at) {
            return Ok(c);
        }
        let r = self.state.reveal(f, at)?;
        let mut rng = reveal_rng(self.seed, r);
        let color = self.algo.label(&self.state.view(), &mut rng);
        let bad = self.state.submit_label(color)?;
        match bad.first() {
            Some(e) => Err(Halt::Win(self.improper(e))),
            None => Ok(color),
        }
    }

    pub fn reveal_all<I: IntoIterator<Item = GridCoord>>(&mut self, f: FragmentId, nodes: I) -> Step<()> {
        for n in nodes {
            self.reveal(f, n)?;
        }
        Ok(())
    }

    fn improper(&self, e: &ImproperEdge) -> Certificate {
        Certificate::ImproperEdge { frag: e.frag, u: e.u, v: e.v, colors: [e.color; 2], spent: self.state.spent() }
    }

    pub fn color(&self, f: FragmentId, at: GridCoord) -> Option<Color> {
        self.state.label_at(f, at)
    }

    /// Labels along a walk, all of which must be revealed.
    pub fn colors(&self, f: FragmentId, nodes: &[GridCoord]) -> Result<Vec<Color>> {
        nodes
            .iter()
            .map(|&n| {
                self.color(f, n).ok_or_else(|| Error::Construction(format!("walk node {n} in {f} unlabeled")))
            })
            .collect()
    }

    pub fn can_commit(&self, a: FragmentId, b: FragmentId, off: GridCoord) -> bool {
        self.state.can_commit(a, b, off).is_ok()
    }

    pub fn commit(&mut self, a: FragmentId, b: FragmentId, off: GridCoord) -> Step<()> {
        Ok(self.state.commit(a, b, off)?)
    }

    pub fn note<S: Serialize>(&mut self, name: &str, data: S) {
        let data = serde_json::to_value(data).expect("note serializes");
        self.state.push_event(Event::Note { name: name.into(), data });
    }

    pub fn observe_potential(&mut self, p: i64) {
        self.peak = self.peak.max(p.abs());
    }

    pub fn peak_potential(&self) -> i64 {
        self.peak
    }

    /// Applies the closed-walk law to a fully labeled closed walk in `f`'s
    /// frame. A properly colored walk with nonzero potential is a win.
    pub fn check_closed(&mut self, f: FragmentId, walk: &Walk) -> Step<ClosedWalkVerdict> {
        let colors = self.colors(f, &walk.nodes)?;
        let cw = ColoredWalk::new(walk.clone(), colors)?;
        let verdict = check_closed_walk(&cw)?;
        if let ClosedWalkVerdict::Violated { potential } = verdict {
            let group = self.state.group_of(f)?;
            let off = self.state.offset_of(f)?;
            return Err(Halt::Win(Certificate::PotentialViolation {
                frag: group,
                walk: walk.nodes.iter().map(|&n| n + off).collect(),
                colors: cw.colors,
                p: potential,
                spent: self.state.spent(),
            }));
        }
        Ok(verdict)
    }

    /// Any improper edge present, as a win.
    pub fn sweep(&self) -> Step<()> {
        match self.state.scan_improper().first() {
            Some(e) => Err(Halt::Win(self.improper(e))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Won,
    Survived,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub t: u32,
    pub budget: u64,
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<i64>,
    #[serde(default)]
    pub backdoor: bool,
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    pub status: MatchStatus,
    pub certificate: Certificate,
    pub transcript: Transcript,
    pub spent: u64,
    pub peak_potential: i64,
}

fn new_state(cfg: &MatchConfig) -> GameState {
    GameState::new(cfg.t, cfg.budget, GridBounds { side: cfg.grid }, cfg.backdoor)
}

pub fn run_match(algo: &dyn Algorithm, strategy: &dyn Strategy, cfg: &MatchConfig) -> Result<MatchResult> {
    let header = Header {
        version: TRANSCRIPT_VERSION,
        algo: algo.name().into(),
        strategy: strategy.name().into(),
        seed: cfg.seed,
        t: cfg.t,
        budget: cfg.budget,
        grid: cfg.grid,
        backdoor: cfg.backdoor,
        regime: strategy.regime(),
        config: strategy.config(),
    };
    let mut state = new_state(cfg);
    state.push_event(Event::Header(header));
    let mut arena = Arena::new(state, algo, cfg.seed);
    let outcome = strategy.play(&mut arena);
    let spent = arena.state.spent();
    let (status, certificate) = match outcome {
        Ok(()) => (MatchStatus::Survived, Certificate::Survived { spent }),
        Err(Halt::Win(c)) => (MatchStatus::Won, c),
        Err(Halt::Fail(Error::BudgetExhausted { .. })) => (MatchStatus::BudgetExhausted, Certificate::Survived { spent }),
        Err(Halt::Fail(e)) => return Err(e),
    };
    let peak_potential = arena.peak_potential();
    arena.state.push_event(Event::Cert(certificate.clone()));
    let transcript = Transcript { events: arena.state.take_events() };
    Ok(MatchResult { status, certificate, transcript, spent, peak_potential })
}

/// Re-drives a transcript's reveals and commits against `algo`. The result
/// carries the replayed labels; notes and the certificate are copied.
pub fn replay(original: &Transcript, algo: &dyn Algorithm) -> Result<Transcript> {
    let h = original.header()?;
    let cfg = MatchConfig { t: h.t, budget: h.budget, seed: h.seed, grid: h.grid, backdoor: h.backdoor };
    let mut state = new_state(&cfg);
    state.push_event(Event::Header(h.clone()));
    for (i, e) in original.events.iter().enumerate().skip(1) {
        match e {
            Event::Header(_) => return Err(Error::Transcript(format!("event {i}: second header"))),
            Event::Fragment { id, reservation } => {
                let got = state.new_fragment(*reservation);
                if got != *id {
                    return Err(Error::Transcript(format!("event {i}: fragment {id} out of order")));
                }
            }
            Event::Reveal { frag, xy, .. } => {
                let r = state.reveal(*frag, *xy)?;
                let mut rng = reveal_rng(cfg.seed, r);
                let color = algo.label(&state.view(), &mut rng);
                state.submit_label(color)?;
            }
            Event::Label { .. } => {}
            Event::Commit { a, b, off } => state.commit(*a, *b, *off)?,
            Event::Note { .. } | Event::Cert(_) => state.push_event(e.clone()),
        }
    }
    Ok(Transcript { events: state.take_events() })
}
