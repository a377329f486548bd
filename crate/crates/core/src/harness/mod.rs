//! The referee: hidden placement, views, turn order, budget and transcripts.

mod arena;
mod state;
mod transcript;

pub use arena::{replay, reveal_rng, run_match, Arena, Halt, MatchConfig, MatchResult, MatchStatus, Step, Strategy};
pub use state::{
    ComponentSnapshot, GameState, ImproperEdge, NodeRef, NodeSnapshot, View, ViewSnapshot, HOST,
};
pub use transcript::{Certificate, Event, Header, Transcript, TRANSCRIPT_VERSION};

#[cfg(test)]
mod tests;
