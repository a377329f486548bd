//! Strategy wiring and the match-level entry points.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algos::Algorithm;
use crate::error::{Error, Result};
use crate::geometry::{construction_width, Dihedral};
use crate::harness::{run_match, Arena, Certificate, Halt, MatchConfig, MatchResult, MatchStatus, Step, Strategy};

use super::choices::{ChoiceMode, ChoiceRecord, Choices};
use super::ctx::Ctx;
use super::lpath::{build_lpath, diagonal_stage, full_pipeline};
use super::params::{estimate_reveals, validate_params, AdversaryParams, Regime};
use super::rows::{log_boost_row, quasilinear_row};
use super::slope::slope_boost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    LogBoost,
    Quasilinear,
    SlopeBoost,
    Lpath,
    FullDet,
    FullOblivious,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::LogBoost,
        StrategyKind::Quasilinear,
        StrategyKind::SlopeBoost,
        StrategyKind::Lpath,
        StrategyKind::FullDet,
        StrategyKind::FullOblivious,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::LogBoost => "log-boost",
            StrategyKind::Quasilinear => "quasilinear",
            StrategyKind::SlopeBoost => "slope-boost",
            StrategyKind::Lpath => "lpath",
            StrategyKind::FullDet => "full-det",
            StrategyKind::FullOblivious => "full-oblivious",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown strategy {s:?}")))
    }
}

pub struct AdversaryStrategy {
    pub kind: StrategyKind,
    pub params: AdversaryParams,
    pub mode: ChoiceMode,
}

impl AdversaryStrategy {
    /// The kind's natural choice mode: oblivious for the randomized
    /// pipeline, adaptive otherwise.
    pub fn new(kind: StrategyKind, params: AdversaryParams, seed: u64) -> AdversaryStrategy {
        let mode = match kind {
            StrategyKind::FullOblivious => ChoiceMode::Oblivious { seed },
            _ => ChoiceMode::Adaptive,
        };
        AdversaryStrategy { kind, params, mode }
    }
}

fn oblivious_attempts(ctx: &mut Ctx<'_, '_>) -> Step<()> {
    let cost = estimate_reveals(&ctx.p, ctx.p.l1 as f64) as u64;
    let mut attempt = 0u32;
    while attempt == 0 || ctx.remaining() >= cost {
        ctx.arena.note("attempt", attempt);
        match full_pipeline(ctx) {
            Ok(_) | Err(Halt::Fail(Error::Construction(_))) => {}
            Err(h) => return Err(h),
        }
        attempt += 1;
    }
    Ok(())
}

fn play_kind(ctx: &mut Ctx<'_, '_>, kind: StrategyKind) -> Step<()> {
    match kind {
        StrategyKind::LogBoost => {
            let row = log_boost_row(ctx, ctx.p.kappa, Dihedral::IDENTITY)?;
            ctx.arena.note("row_artifact", row);
        }
        StrategyKind::Quasilinear => {
            let host = ctx.canvas(Dihedral::IDENTITY);
            let k0 = super::params::kappa0(ctx.p.t, ctx.p.l0);
            let w = log_boost_row(ctx, k0, Dihedral::IDENTITY)?;
            let f = quasilinear_row(ctx, host, &w, ctx.p.l1 as i64)?;
            ctx.arena.note("row", serde_json::json!({ "w": w, "p_row": f.last() }));
        }
        StrategyKind::SlopeBoost => {
            let (k, t) = (ctx.p.kappa, ctx.p.t);
            let plan = serde_json::json!({ "level": k, "width": construction_width(k, t), "height": k + 1 });
            ctx.arena.note("slope_plan", plan);
            let r = slope_boost(ctx, ctx.p.kappa, ctx.p.theta, Dihedral::IDENTITY)?;
            ctx.arena.note("slope_artifact", r);
        }
        StrategyKind::Lpath => {
            let lp = build_lpath(ctx)?;
            diagonal_stage(ctx, &lp)?;
        }
        StrategyKind::FullDet => {
            full_pipeline(ctx)?;
        }
        StrategyKind::FullOblivious => oblivious_attempts(ctx)?,
    }
    Ok(())
}

impl Strategy for AdversaryStrategy {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn config(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "params": self.params, "mode": self.mode.label() });
        if let ChoiceMode::Oblivious { seed } = self.mode {
            v["adversary_seed"] = seed.into();
        }
        v
    }

    fn regime(&self) -> Option<String> {
        Some(validate_params(&self.params).regime.label().into())
    }

    fn play(&self, arena: &mut Arena<'_>) -> Step<()> {
        self.params.check_positive()?;
        let mut ctx = Ctx::new(arena, Choices::new(&self.mode), self.params);
        ctx.strict = validate_params(&self.params).regime == Regime::Guaranteed;
        let out = play_kind(&mut ctx, self.kind);
        let log = ctx.ch.log().to_vec();
        ctx.arena.note("choices", log);
        out
    }
}

fn config_for(params: &AdversaryParams, seed: u64, backdoor: bool) -> MatchConfig {
    MatchConfig { t: params.t, budget: params.budget, seed, grid: None, backdoor }
}

/// The adaptive full pipeline against a deterministic (or fixed-seed) algorithm.
pub fn run_deterministic_lb(algo: &dyn Algorithm, params: &AdversaryParams, seed: u64, backdoor: bool) -> Result<MatchResult> {
    let s = AdversaryStrategy { kind: StrategyKind::FullDet, params: *params, mode: ChoiceMode::Adaptive };
    run_match(algo, &s, &config_for(params, seed, backdoor))
}

/// Replays a recorded decision log without reading any label.
pub fn run_scripted(
    algo: &dyn Algorithm,
    kind: StrategyKind,
    params: &AdversaryParams,
    seed: u64,
    script: Vec<ChoiceRecord>,
) -> Result<MatchResult> {
    let s = AdversaryStrategy { kind, params: *params, mode: ChoiceMode::Scripted { script } };
    run_match(algo, &s, &config_for(params, seed, false))
}

/// The decision log a finished match recorded.
pub fn choice_log(m: &MatchResult) -> Result<Vec<ChoiceRecord>> {
    let data = m
        .transcript
        .notes("choices")
        .last()
        .ok_or_else(|| Error::Transcript("no choices note".into()))?;
    Ok(serde_json::from_value(data.clone())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub adversary_seed: u64,
    pub algo_seed: u64,
    pub status: MatchStatus,
    pub certificate: String,
    pub spent: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObliviousStats {
    pub trials: u32,
    pub wins: u32,
    pub win_rate: f64,
    pub master_seed: u64,
    pub results: Vec<TrialResult>,
    /// Cheapest winning certificate.
    pub best: Option<Certificate>,
}

/// Independent oblivious matches. Each trial draws the adversary's and the
/// algorithm's seeds from one master stream before anything runs.
pub fn run_oblivious_lb(algo: &dyn Algorithm, params: &AdversaryParams, trials: u32, master_seed: u64) -> Result<ObliviousStats> {
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    let seeds: Vec<(u64, u64)> = (0..trials).map(|_| (master.next_u64(), master.next_u64())).collect();
    let runs: Vec<MatchResult> = seeds
        .par_iter()
        .map(|&(adv, alg)| {
            let s = AdversaryStrategy { kind: StrategyKind::FullOblivious, params: *params, mode: ChoiceMode::Oblivious { seed: adv } };
            run_match(algo, &s, &config_for(params, alg, false))
        })
        .collect::<Result<_>>()?;
    let results: Vec<TrialResult> = seeds
        .iter()
        .zip(&runs)
        .map(|(&(adv, alg), m)| TrialResult {
            adversary_seed: adv,
            algo_seed: alg,
            status: m.status,
            certificate: m.certificate.kind().into(),
            spent: m.spent,
        })
        .collect();
    let wins = results.iter().filter(|r| r.status == MatchStatus::Won).count() as u32;
    let best = runs
        .iter()
        .filter(|m| m.status == MatchStatus::Won)
        .min_by_key(|m| m.spent)
        .map(|m| m.certificate.clone());
    Ok(ObliviousStats {
        trials,
        wins,
        win_rate: if trials == 0 { 0.0 } else { wins as f64 / trials as f64 },
        master_seed,
        results,
        best,
    })
}
