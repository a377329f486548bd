//! Shipped online-LOCAL coloring algorithms.

use rand::{Rng, RngCore};

use crate::harness::View;
use crate::potential::Color;

/// An online-LOCAL algorithm: labels the pending node from the view and a
/// per-reveal bit stream.
pub trait Algorithm: Sync {
    fn name(&self) -> &str;
    fn label(&self, view: &View<'_>, rng: &mut dyn RngCore) -> Color;
}

fn blocked(view: &View<'_>) -> [bool; 3] {
    let mut b = [false; 3];
    for c in view.neighbor_labels().into_iter().flatten() {
        b[(c.value() - 1) as usize] = true;
    }
    b
}

/// Smallest color unused by a visible labeled neighbor; 1 if all are used.
pub struct GreedyFirstFit;

impl Algorithm for GreedyFirstFit {
    fn name(&self) -> &str {
        "greedy"
    }

    fn label(&self, view: &View<'_>, _rng: &mut dyn RngCore) -> Color {
        let b = blocked(view);
        Color::ALL.into_iter().find(|c| !b[(c.value() - 1) as usize]).unwrap_or(Color::ONE)
    }
}

/// 1 on even frame positions, 2 on odd ones, 3 on conflict.
pub struct ComponentParity;

impl Algorithm for ComponentParity {
    fn name(&self) -> &str {
        "parity"
    }

    fn label(&self, view: &View<'_>, _rng: &mut dyn RngCore) -> Color {
        let Some(p) = view.pending() else { return Color::ONE };
        let want = if p.xy.parity() == 0 { Color::ONE } else { Color::TWO };
        if blocked(view)[(want.value() - 1) as usize] {
            Color::THREE
        } else {
            want
        }
    }
}

/// Uniform over colors free of visible conflicts, uniform over all three
/// when every color conflicts.
pub struct SeededHash;

impl Algorithm for SeededHash {
    fn name(&self) -> &str {
        "hash"
    }

    fn label(&self, view: &View<'_>, rng: &mut dyn RngCore) -> Color {
        let b = blocked(view);
        let free: Vec<Color> = Color::ALL.into_iter().filter(|c| !b[(c.value() - 1) as usize]).collect();
        let pool: &[Color] = if free.is_empty() { &Color::ALL } else { &free };
        pool[rng.gen_range(0..pool.len())]
    }
}

/// Negative control: 2-colors by the parity of the hidden layout. Without
/// the backdoor it degrades to [`ComponentParity`].
pub struct OracleCheater;

impl Algorithm for OracleCheater {
    fn name(&self) -> &str {
        "cheater"
    }

    fn label(&self, view: &View<'_>, rng: &mut dyn RngCore) -> Color {
        match view.hidden_position() {
            Some(p) if p.parity() == 0 => Color::ONE,
            Some(_) => Color::TWO,
            None => ComponentParity.label(view, rng),
        }
    }
}

pub const ALGORITHM_NAMES: [&str; 3] = ["greedy", "parity", "hash"];

/// Looks up a shipped algorithm. The cheater is only available when the
/// backdoor is enabled.
pub fn algorithm_by_name(name: &str, backdoor: bool) -> Option<Box<dyn Algorithm>> {
    match name {
        "greedy" => Some(Box::new(GreedyFirstFit)),
        "parity" => Some(Box::new(ComponentParity)),
        "hash" => Some(Box::new(SeededHash)),
        "cheater" if backdoor => Some(Box::new(OracleCheater)),
        _ => None,
    }
}

/// Whether `GRIDLOCAL_BACKDOOR=1` is set.
pub fn backdoor_from_env() -> bool {
    std::env::var("GRIDLOCAL_BACKDOOR").is_ok_and(|v| v == "1")
}
