//! Where the adversary's decisions come from: computed from labels
//! (adaptive), drawn blindly in advance (oblivious), or replayed.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub site: String,
    pub v: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ChoiceMode {
    Adaptive,
    /// Guesses come from the adversary's own stream, independent of the
    /// algorithm's bits.
    Oblivious { seed: u64 },
    Scripted { script: Vec<ChoiceRecord> },
}

impl ChoiceMode {
    pub fn label(&self) -> &'static str {
        match self {
            ChoiceMode::Adaptive => "adaptive",
            ChoiceMode::Oblivious { .. } => "oblivious",
            ChoiceMode::Scripted { .. } => "scripted",
        }
    }
}

enum Source {
    Adaptive,
    Oblivious(Box<ChaCha8Rng>),
    Scripted(VecDeque<ChoiceRecord>),
}

pub struct Choices {
    source: Source,
    log: Vec<ChoiceRecord>,
}

impl Choices {
    pub fn new(mode: &ChoiceMode) -> Choices {
        let source = match mode {
            ChoiceMode::Adaptive => Source::Adaptive,
            ChoiceMode::Oblivious { seed } => Source::Oblivious(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
            ChoiceMode::Scripted { script } => Source::Scripted(script.iter().cloned().collect()),
        };
        Choices { source, log: Vec::new() }
    }

    /// Whether decisions may read labels.
    pub fn adaptive(&self) -> bool {
        matches!(self.source, Source::Adaptive)
    }

    pub fn log(&self) -> &[ChoiceRecord] {
        &self.log
    }

    /// The decision at `site` if it is fixed in advance; `None` asks the
    /// caller to decide from labels and [`record`](Self::record) it.
    pub fn pre<G>(&mut self, site: &str, guess: G) -> Result<Option<u32>>
    where
        G: FnOnce(&mut ChaCha8Rng) -> u32,
    {
        let v = match &mut self.source {
            Source::Adaptive => return Ok(None),
            Source::Oblivious(rng) => guess(rng),
            // sites are matched by name so decisions may be logged late
            Source::Scripted(q) => {
                let i = q
                    .iter()
                    .position(|r| r.site == site)
                    .ok_or_else(|| Error::Domain(format!("script has no choice left for {site}")))?;
                q.remove(i).expect("index in range").v
            }
        };
        self.record(site, v);
        Ok(Some(v))
    }

    pub fn record(&mut self, site: &str, v: u32) {
        self.log.push(ChoiceRecord { site: site.into(), v });
    }

    pub fn choose<G, A>(&mut self, site: &str, guess: G, adaptive: A) -> Result<u32>
    where
        G: FnOnce(&mut ChaCha8Rng) -> u32,
        A: FnOnce() -> Result<u32>,
    {
        match self.pre(site, guess)? {
            Some(v) => Ok(v),
            None => {
                let v = adaptive()?;
                self.record(site, v);
                Ok(v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn modes() {
        let mut a = Choices::new(&ChoiceMode::Adaptive);
        assert_eq!(a.choose("x", |_| 9, || Ok(1)).unwrap(), 1);
        assert_eq!(a.pre("y", |_| 9).unwrap(), None);
        a.record("y", 3);
        let script = a.log().to_vec();

        let mut s = Choices::new(&ChoiceMode::Scripted { script: script.clone() });
        assert_eq!(s.choose("x", |_| 9, || panic!("scripted never adapts")).unwrap(), 1);
        assert_eq!(s.pre("y", |_| 9).unwrap(), Some(3));
        assert_eq!(s.log(), &script[..]);
        assert!(s.pre("z", |_| 0).is_err());

        let mut s = Choices::new(&ChoiceMode::Scripted { script });
        assert_eq!(s.pre("y", |_| 0).unwrap(), Some(3));
        assert!(s.pre("y", |_| 0).is_err());
        assert_eq!(s.pre("x", |_| 0).unwrap(), Some(1));

        let draw = |seed| {
            let mut o = Choices::new(&ChoiceMode::Oblivious { seed });
            (0..8).map(|_| o.choose("g", |r| r.gen_range(0..2), || panic!()).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert!(!Choices::new(&ChoiceMode::Oblivious { seed: 0 }).adaptive());
    }
}
