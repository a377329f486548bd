//! Adversary strategies against online-LOCAL 3-coloring of the oriented grid.

pub mod choices;
pub mod ctx;
pub mod lpath;
pub mod params;
pub mod pipeline;
pub mod rows;
pub mod slope;

pub use choices::{ChoiceMode, ChoiceRecord, Choices};
pub use ctx::{enclosed_nodes, Canvas, Ctx, LineWalk};
pub use params::{kappa0, log_row_max_len, validate_params, AdversaryParams, Inequality, ParamReport, Regime};
pub use rows::{alignment_attack, grow_line, log_boost_row, mark_pair, quasilinear_row, Band, RowPiece};
pub use slope::{region_path, slope_boost, SlopePiece};
pub use lpath::{build_lpath, diagonal_stage, final_strike, find_window, full_pipeline, DiagonalStage, LPathBuild, StrikeReport};
pub use pipeline::{
    choice_log, run_deterministic_lb, run_oblivious_lb, run_scripted, AdversaryStrategy, ObliviousStats, StrategyKind, TrialResult,
};
