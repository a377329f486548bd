//! Strategy parameters and the ledger inequalities that classify a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{construction_width, Slope};
use crate::potential::UPPER_BOUND_CONSTANT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryParams {
    #[serde(rename = "T")]
    pub t: u32,
    pub budget: u64,
    pub kappa: u32,
    #[serde(rename = "L0")]
    pub l0: u64,
    #[serde(rename = "L1")]
    pub l1: u64,
    pub theta: Slope,
    pub c_ledger: i64,
    pub trials: u32,
}

impl Default for AdversaryParams {
    fn default() -> Self {
        AdversaryParams {
            t: 1,
            budget: 500_000,
            kappa: 6,
            l0: 64,
            l1: 4096,
            theta: Slope { dy: 1, dx: 2 },
            c_ledger: UPPER_BOUND_CONSTANT,
            trials: 100,
        }
    }
}

impl AdversaryParams {
    /// Separation between independently built pieces.
    pub fn delta(&self) -> i64 {
        2 * self.t as i64 + 2
    }

    /// Width of the level-`kappa` slope construction.
    pub fn width(&self) -> i64 {
        construction_width(self.kappa, self.t)
    }

    pub fn check_positive(&self) -> Result<()> {
        for (name, v) in [("T", self.t as u64), ("kappa", self.kappa as u64), ("L0", self.l0), ("L1", self.l1), ("trials", self.trials as u64)] {
            if v == 0 {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if !self.theta.is_canonical() {
            return Err(Error::Domain(format!("theta {} outside [0, 1]", self.theta)));
        }
        Ok(())
    }
}

/// Worst-case length (edges) of a level-`k` logarithmic boosting row.
pub fn log_row_max_len(k: u32, t: u32) -> i64 {
    (1i64 << k) * (2 * t as i64 + 3) - (2 * t as i64 + 2) - 1
}

/// Largest level whose boosting row fits in `l0` edges.
pub fn kappa0(t: u32, l0: u64) -> u32 {
    let mut k = 0;
    while k < 40 && log_row_max_len(k + 1, t) <= l0 as i64 {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Guaranteed,
    EmpiricalOnly,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Guaranteed => "guaranteed",
            Regime::EmpiricalOnly => "empirical-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn gt(name: &str, lhs: f64, rhs: f64) -> Inequality {
        Inequality { name: name.into(), lhs, rhs, holds: lhs > rhs }
    }

    fn le(name: &str, lhs: f64, rhs: f64) -> Inequality {
        Inequality { name: name.into(), lhs, rhs, holds: lhs <= rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub params: AdversaryParams,
    pub valid: bool,
    pub problems: Vec<String>,
    pub kappa0: u32,
    /// `kappa - 2((kappa + 1 + delta)/3 + c)`.
    pub strike_margin: f64,
    pub checks: Vec<Inequality>,
    pub estimated_reveals: u64,
    /// Reveals at the smallest `L1` that satisfies the window condition.
    pub guaranteed_reveals: f64,
    pub guaranteed_feasible: bool,
    pub regime: Regime,
}

/// Upper estimate of materialized cells for the full pipeline at row length `l1`.
pub fn estimate_reveals(p: &AdversaryParams, l1: f64) -> f64 {
    let t = p.t as f64;
    let ball = 2.0 * t * t + 2.0 * t + 1.0;
    let per_node_line = 2.0 * t + 1.0;
    let row = (l1 + 1.0) * per_node_line;
    let column = l1 * per_node_line;
    let diagonal = 2.0 * l1 * per_node_line;
    let base = 2.0 * (p.l0 as f64 + 1.0) * ball;
    let w = p.width() as f64;
    let k = p.kappa as f64;
    // every level fills its parallelogram once per copy; copies halve as width doubles
    let slope = (0..=p.kappa)
        .map(|j| {
            let wj = construction_width(j, p.t) as f64;
            2f64.powi((p.kappa - j) as i32) * (wj + 1.0 + 2.0 * t) * (j as f64 + 2.0 + 2.0 * t)
        })
        .sum::<f64>();
    let strike = (w + 1.0) * (k + 2.0 * p.delta() as f64 + 4.0);
    row + column + diagonal + base + slope + strike
}

pub fn validate_params(p: &AdversaryParams) -> ParamReport {
    let mut problems = Vec::new();
    if let Err(e) = p.check_positive() {
        problems.push(e.to_string());
    }
    let k0 = kappa0(p.t, p.l0);
    if k0 == 0 && p.t > 0 {
        problems.push(format!("L0 = {} too short for a level-1 boosting row", p.l0));
    }
    let kappa = p.kappa as f64;
    let delta = p.delta() as f64;
    let c = p.c_ledger as f64;
    let margin = kappa - 2.0 * ((kappa + 1.0 + delta) / 3.0 + c);
    let w = p.width() as f64;
    let est = estimate_reveals(p, p.l1 as f64);
    let l1_needed = w * w + 1.0;
    let guaranteed_reveals = estimate_reveals(p, (p.l1 as f64).max(l1_needed));
    let checks = vec![
        Inequality::gt("strike margin > 0", margin, 0.0),
        Inequality::gt("L1 > width^2", p.l1 as f64, w * w),
        Inequality::le("estimated reveals <= budget", est, p.budget as f64),
    ];
    let guaranteed_feasible = margin > 0.0 && guaranteed_reveals <= p.budget as f64;
    let regime = if checks.iter().all(|c| c.holds) { Regime::Guaranteed } else { Regime::EmpiricalOnly };
    ParamReport {
        params: *p,
        valid: problems.is_empty(),
        problems,
        kappa0: k0,
        strike_margin: margin,
        checks,
        estimated_reveals: est.ceil() as u64,
        guaranteed_reveals,
        guaranteed_feasible,
        regime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> AdversaryParams {
        AdversaryParams::default()
    }

    #[test]
    fn kappa17_guaranteed_margin_but_infeasible() {
        let p = AdversaryParams { kappa: 17, ..desk() };
        let r = validate_params(&p);
        assert!((r.strike_margin - 1.0 / 3.0).abs() < 1e-9);
        assert!(r.checks[0].holds);
        assert!(!r.checks[1].holds);
        assert!((r.checks[1].rhs - 524_284f64.powi(2)).abs() < 1.0);
        assert!(!r.guaranteed_feasible);
        assert_eq!(r.regime, Regime::EmpiricalOnly);
    }

    #[test]
    fn kappa6_is_empirical() {
        let r = validate_params(&desk());
        assert!(r.valid);
        assert!(r.strike_margin < 0.0);
        assert!((r.strike_margin - (6.0 - 2.0 * (11.0 / 3.0 + 1.0))).abs() < 1e-9);
        assert_eq!(r.regime, Regime::EmpiricalOnly);
        assert!(r.checks[2].holds, "desk pipeline fits its budget: {}", r.estimated_reveals);
    }

    #[test]
    fn kappa0_rejected() {
        let r = validate_params(&AdversaryParams { kappa: 0, ..desk() });
        assert!(!r.valid);
    }

    #[test]
    fn kappa0_levels() {
        assert_eq!(log_row_max_len(1, 1), 5);
        assert_eq!(kappa0(1, 64), 3);
        assert_eq!(kappa0(1, 4), 0);
        assert_eq!(kappa0(2, 64), 3);
    }

    #[test]
    fn small_guaranteed_instance() {
        // large kappa relative to T with a generous row and budget
        let p = AdversaryParams { t: 1, kappa: 17, l1: 1 << 39, budget: u64::MAX / 4, ..desk() };
        let r = validate_params(&p);
        assert_eq!(r.regime, Regime::Guaranteed);
    }
}
