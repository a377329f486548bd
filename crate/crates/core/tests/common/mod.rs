#![allow(dead_code)]

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridlocal::adversary::{alignment_attack, AdversaryParams, ChoiceMode, Choices, Ctx, LineWalk};
use gridlocal::algos::Algorithm;
use gridlocal::geometry::{Dihedral, Direction, GridCoord};
use gridlocal::harness::{run_match, Arena, MatchConfig, MatchResult, Step, Strategy, View};
use gridlocal::potential::Color;

/// Colors `(s * (x + y) + phase) mod 3`, a proper coloring whose potential
/// drifts by one every three steps. The first component drifts one way,
/// every later one the other way, so parallel lines in different
/// components end up far apart in potential.
pub struct StripeStub {
    pub flip: bool,
    pub phase: [i64; 2],
}

impl StripeStub {
    pub fn seeded(seed: u64) -> StripeStub {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        StripeStub { flip: r.gen(), phase: [r.gen_range(0..3), r.gen_range(0..3)] }
    }
}

impl Algorithm for StripeStub {
    fn name(&self) -> &str {
        "stripe-stub"
    }

    fn label(&self, view: &View<'_>, _rng: &mut dyn RngCore) -> Color {
        let p = view.pending().expect("pending node");
        let first = p.component == 0;
        let s = if first != self.flip { 1 } else { -1 };
        let v = (s * (p.xy.x + p.xy.y) + self.phase[usize::from(!first)]).rem_euclid(3);
        Color::new(v as u8 + 1).expect("in range")
    }
}

/// Two parallel rows in separate fragments, then the alignment attack.
pub struct AttackRows {
    pub len: [i64; 2],
    pub dir: [Direction; 2],
    pub same_group: bool,
}

impl Strategy for AttackRows {
    fn name(&self) -> &str {
        "attack-rows"
    }

    fn play(&self, arena: &mut Arena<'_>) -> Step<()> {
        let p = AdversaryParams::default();
        let mut ctx = Ctx::new(arena, Choices::new(&ChoiceMode::Adaptive), p);
        let cvs = [ctx.canvas(Dihedral::IDENTITY), ctx.canvas(Dihedral::IDENTITY)];
        let mut walks = Vec::new();
        for ((cv, dir), len) in cvs.into_iter().zip(self.dir).zip(self.len) {
            let w = LineWalk { frag: cv.frag, start: GridCoord::ORIGIN, dir, len };
            for n in w.nodes() {
                ctx.reveal(cv, n)?;
            }
            walks.push(w);
        }
        if self.same_group {
            ctx.arena.commit(cvs[0].frag, cvs[1].frag, GridCoord::new(0, 40))?;
        }
        alignment_attack(&mut ctx, &walks[0], &walks[1])
    }
}

pub fn attack(stub: &StripeStub, len: i64) -> gridlocal::Result<MatchResult> {
    let s = AttackRows { len: [len, len], dir: [Direction::East; 2], same_group: false };
    run_match(stub, &s, &MatchConfig { t: 1, budget: 100_000, seed: 0, grid: None, backdoor: false })
}
