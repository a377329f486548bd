use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gridlocal::adversary::{run_oblivious_lb, validate_params, AdversaryParams, AdversaryStrategy, StrategyKind};
use gridlocal::algos::{algorithm_by_name, backdoor_from_env, Algorithm};
use gridlocal::geometry::Slope;
use gridlocal::harness::{replay, run_match, MatchConfig, MatchResult, MatchStatus, Transcript};
use gridlocal::verify::{verify, verify_labels};
use gridlocal::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_INTERNAL: u8 = 5;
const EXIT_IO: u8 = 6;

#[derive(Parser)]
#[command(name = "gridlocal", version, about = "Online-LOCAL oriented-grid 3-coloring lower-bound lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one match (or an oblivious batch with --trials > 1).
    Run(RunArgs),
    /// Re-check a transcript's commits, budget and certificate.
    Verify {
        transcript: PathBuf,
        /// Skip re-deriving labels from the named algorithm.
        #[arg(long)]
        no_labels: bool,
    },
    /// Re-drive a transcript's reveals against its algorithm.
    Replay {
        transcript: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cartesian sweep over T, kappa, algorithm and seed, written as CSV.
    Sweep(SweepArgs),
    /// Print the parameter report.
    Validate(ParamArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long = "T", default_value_t = 1)]
    t: u32,
    #[arg(long, default_value_t = 6)]
    kappa: u32,
    #[arg(long = "L0", default_value_t = 64)]
    l0: u64,
    #[arg(long = "L1", default_value_t = 4096)]
    l1: u64,
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
    /// Slope as an exact ratio dy/dx.
    #[arg(long, default_value = "1/2", value_parser = parse_slope)]
    theta: Slope,
    #[arg(long, default_value_t = 1)]
    trials: u32,
}

impl ParamArgs {
    fn params(&self) -> AdversaryParams {
        AdversaryParams {
            t: self.t,
            budget: self.budget,
            kappa: self.kappa,
            l0: self.l0,
            l1: self.l1,
            theta: self.theta,
            trials: self.trials,
            ..AdversaryParams::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_strategy)]
    strategy: StrategyKind,
    #[arg(long)]
    algo: String,
    #[command(flatten)]
    p: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transcript (single match) or statistics JSON (batch).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the transcript before exiting.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "full-det", value_parser = parse_strategy)]
    strategy: StrategyKind,
    /// Comma list of algorithms.
    #[arg(long, default_value = "greedy,parity,hash")]
    algo: String,
    /// Values as a comma list or an inclusive range a..b.
    #[arg(long = "T", default_value = "1")]
    t: String,
    #[arg(long, default_value = "6")]
    kappa: String,
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long = "L0", default_value_t = 64)]
    l0: u64,
    #[arg(long = "L1", default_value_t = 4096)]
    l1: u64,
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
    #[arg(long, default_value = "1/2", value_parser = parse_slope)]
    theta: Slope,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_slope(s: &str) -> Result<Slope, String> {
    Slope::parse(s).map_err(|e| e.to_string())
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad range {s:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad range {s:?}"))?;
        return Ok((a..=b).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| format!("bad value {v:?}"))).collect()
}

struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Domain(_) => EXIT_CONFIG,
            Error::BudgetExhausted { .. } => EXIT_BUDGET,
            Error::Io(_) | Error::Json(_) | Error::Transcript(_) => EXIT_IO,
            Error::Protocol(_) | Error::Construction(_) => EXIT_INTERNAL,
        };
        Failure(code, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn algorithm(name: &str) -> Result<Box<dyn Algorithm>, Failure> {
    algorithm_by_name(name, backdoor_from_env()).ok_or_else(|| Failure(EXIT_CONFIG, format!("unknown algorithm {name:?}")))
}

fn checked(p: &AdversaryParams) -> Outcome {
    let r = validate_params(p);
    if r.valid {
        Ok(())
    } else {
        Err(Failure(EXIT_CONFIG, r.problems.join("; ")))
    }
}

fn play(algo: &dyn Algorithm, kind: StrategyKind, p: &AdversaryParams, seed: u64) -> Result<MatchResult, Failure> {
    let s = AdversaryStrategy::new(kind, *p, seed);
    let cfg = MatchConfig { t: p.t, budget: p.budget, seed, grid: None, backdoor: backdoor_from_env() };
    Ok(run_match(algo, &s, &cfg)?)
}

fn summary(m: &MatchResult) -> String {
    let mut s = format!(
        "{} certificate={} spent={} peak_p={}",
        m.transcript.header().map(|h| h.regime.clone().unwrap_or_default()).unwrap_or_default(),
        m.certificate.kind(),
        m.spent,
        m.peak_potential
    );
    if let Some(a) = m.transcript.notes("slope_plan").last() {
        s += &format!(" width={} height={}", a["width"], a["height"]);
    }
    if let Some(a) = m.transcript.notes("slope_artifact").last() {
        s += &format!(" built_p={} exact={}", a["p"], a["exact"]);
    }
    s
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))
}

fn cmd_run(a: RunArgs) -> Outcome {
    let p = a.p.params();
    checked(&p)?;
    let algo = algorithm(&a.algo)?;
    if a.strategy == StrategyKind::FullOblivious && p.trials > 1 {
        let st = run_oblivious_lb(algo.as_ref(), &p, p.trials, a.seed)?;
        println!("oblivious wins={}/{} win_rate={:.3} master_seed={}", st.wins, st.trials, st.win_rate, st.master_seed);
        if let Some(out) = &a.out {
            write(out, &serde_json::to_string_pretty(&st).map_err(Error::from)?)?;
        }
        return Ok(());
    }
    let m = play(algo.as_ref(), a.strategy, &p, a.seed)?;
    if let Some(out) = &a.out {
        m.transcript.write(out)?;
    }
    if a.verify {
        let r = verify(&m.transcript).map_err(|e| Failure(EXIT_VERIFY, e.to_string()))?;
        verify_labels(&m.transcript, algo.as_ref()).map_err(|e| Failure(EXIT_VERIFY, e.to_string()))?;
        eprintln!("verified {} events", r.events);
    }
    println!("{}", summary(&m));
    if m.status == MatchStatus::BudgetExhausted {
        return Err(Failure(EXIT_BUDGET, format!("budget {} exhausted", p.budget)));
    }
    Ok(())
}

fn cmd_verify(path: &Path, labels: bool) -> Outcome {
    let tr = Transcript::read(path)?;
    if labels {
        let algo = algorithm(&tr.header()?.algo)?;
        verify_labels(&tr, algo.as_ref()).map_err(|e| Failure(EXIT_VERIFY, e.to_string()))?;
    }
    let r = verify(&tr).map_err(|e| Failure(EXIT_VERIFY, e.to_string()))?;
    println!("ok certificate={} events={} reveals={} commits={} spent={}", r.certificate, r.events, r.reveals, r.commits, r.spent);
    Ok(())
}

fn cmd_replay(path: &Path, out: Option<&Path>) -> Outcome {
    let tr = Transcript::read(path)?;
    let algo = algorithm(&tr.header()?.algo)?;
    let again = replay(&tr, algo.as_ref())?;
    if let Some(out) = out {
        again.write(out)?;
    }
    if again.labels() == tr.labels() {
        println!("identical labels={}", tr.labels().len());
        Ok(())
    } else {
        Err(Failure(EXIT_VERIFY, "replayed labels differ".into()))
    }
}

#[derive(Clone)]
struct Row {
    t: u32,
    kappa: u32,
    algo: String,
    seed: u64,
}

fn sweep_row(a: &SweepArgs, row: &Row) -> Vec<String> {
    let p = AdversaryParams {
        t: row.t,
        kappa: row.kappa,
        l0: a.l0,
        l1: a.l1,
        budget: a.budget,
        theta: a.theta,
        trials: a.trials,
        ..AdversaryParams::default()
    };
    let mut out = vec![
        a.strategy.to_string(),
        row.algo.clone(),
        row.t.to_string(),
        row.kappa.to_string(),
        row.seed.to_string(),
        validate_params(&p).regime.label().into(),
    ];
    let clock = Instant::now();
    let res = algorithm(&row.algo).and_then(|algo| {
        checked(&p)?;
        if a.strategy == StrategyKind::FullOblivious {
            let st = run_oblivious_lb(algo.as_ref(), &p, p.trials, row.seed)?;
            let kind = st.best.as_ref().map_or("survived", |c| c.kind());
            let spent = st.results.iter().map(|r| r.spent).min().unwrap_or(0);
            Ok((kind.to_string(), spent, String::new(), format!("{:.4}", st.win_rate)))
        } else {
            let m = play(algo.as_ref(), a.strategy, &p, row.seed)?;
            Ok((m.certificate.kind().to_string(), m.spent, m.peak_potential.to_string(), String::new()))
        }
    });
    let ms = format!("{:.3}", clock.elapsed().as_secs_f64() * 1e3);
    match res {
        Ok((kind, spent, pot, rate)) => out.extend([kind, spent.to_string(), pot, rate, ms, String::new()]),
        Err(Failure(_, msg)) => out.extend(["error".into(), String::new(), String::new(), String::new(), ms, msg]),
    }
    out
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let bad = |e: String| Failure(EXIT_CONFIG, e);
    let ts = parse_range(&a.t).map_err(bad)?;
    let ks = parse_range(&a.kappa).map_err(bad)?;
    let seeds = parse_range(&a.seed).map_err(bad)?;
    let algos: Vec<String> = a.algo.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let mut grid = Vec::new();
    for &t in &ts {
        for &kappa in &ks {
            for algo in &algos {
                for &seed in &seeds {
                    grid.push(Row { t: t as u32, kappa: kappa as u32, algo: algo.clone(), seed });
                }
            }
        }
    }
    let rows: Vec<Vec<String>> = grid.par_iter().map(|r| sweep_row(&a, r)).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "strategy",
        "algo",
        "T",
        "kappa",
        "seed",
        "regime",
        "certificate",
        "nodes_spent",
        "achieved_potential",
        "win_rate",
        "wallclock_ms",
        "error",
    ];
    let csv_err = |e: csv::Error| Failure(EXIT_IO, e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in &rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    match &a.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{} rows", rows.len());
    Ok(())
}

fn cmd_validate(a: ParamArgs) -> Outcome {
    let r = validate_params(&a.params());
    println!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
    if r.valid {
        Ok(())
    } else {
        Err(Failure(EXIT_CONFIG, r.problems.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Verify { transcript, no_labels } => cmd_verify(&transcript, !no_labels),
        Cmd::Replay { transcript, out } => cmd_replay(&transcript, out.as_deref()),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
