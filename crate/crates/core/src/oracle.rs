//! Independent maximizers used to cross-check the greedy solver.
//!
//! Three routes to the same optimum, none of which share code with the
//! greedy pass: exhaustive enumeration of supports, a brute-force lattice
//! scan of the feasibility simplex, and projected gradient ascent. All are
//! correctness baselines, not performance tools. The module also carries
//! the seeded instance and strategy generators the verification suites run
//! on, and a structural checker for solved instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::market::{MarketEvent, Strategy, WealthVector};
use crate::solver::{fixed_support_optimize, greedy_solve, CompensatedSum, KellySolution};

/// Support enumeration is exponential; refuse anything past this.
pub const MAX_ENUMERATION_OUTCOMES: usize = 20;

/// The lattice scan is only meant for desk-size checks.
pub const MAX_GRID_OUTCOMES: usize = 3;

/// Coarsest accepted lattice step.
pub const MAX_GRID_STEP: f64 = 0.01;

/// Seed the verification suites use by default, so their instance batches
/// are reproducible run to run.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{method} handles at most {max} outcomes, got {got}")]
    TooManyOutcomes {
        method: OracleMethod,
        got: usize,
        max: usize,
    },
    #[error("grid step must lie in (0, 0.01], got {value}")]
    BadStep { value: f64 },
}

/// Which independent route produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Enumeration,
    Grid,
    Ascent,
}

impl std::fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleMethod::Enumeration => write!(f, "enumeration"),
            OracleMethod::Grid => write!(f, "grid"),
            OracleMethod::Ascent => write!(f, "ascent"),
        }
    }
}

/// Best point found by an oracle, next to what the greedy solver returned
/// for the same market.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub method: OracleMethod,
    /// Best objective value the oracle found.
    pub best_growth: f64,
    /// Wealth vector at the oracle's best point.
    pub best_wealth: WealthVector,
    /// Objective value of the greedy solution.
    pub solver_growth: f64,
    /// Infinity-norm distance between the two wealth vectors.
    pub max_wealth_deviation: f64,
}

/// Tries every support: all-cash, the all-in full support, and each proper
/// support that can hold strictly positive stakes. Supports with overround
/// price mass or an unbackable outcome are infeasible and skipped, since
/// any optimum confined to them lives on a smaller support that is also
/// enumerated.
pub fn enumerate_supports_solve(event: &MarketEvent) -> Result<OracleReport, OracleError> {
    let n = event.len();
    if n > MAX_ENUMERATION_OUTCOMES {
        return Err(OracleError::TooManyOutcomes {
            method: OracleMethod::Enumeration,
            got: n,
            max: MAX_ENUMERATION_OUTCOMES,
        });
    }

    let p = event.probabilities();
    let q = event.state_prices();

    // All-cash baseline.
    let mut best_growth = 0.0;
    let mut best_wealth = WealthVector::new(vec![1.0; n]);

    // Full support: everything staked, wealth r_i in every state.
    let full_growth: f64 = (0..n).map(|i| p[i] * (p[i] / q[i]).ln()).sum();
    if full_growth > best_growth {
        best_growth = full_growth;
        best_wealth = WealthVector::new((0..n).map(|i| p[i] / q[i]).collect());
    }

    let mut support = Vec::with_capacity(n);
    for mask in 1u32..((1u32 << n) - 1) {
        support.clear();
        support.extend((0..n).filter(|i| mask & (1 << i) != 0));
        if let Ok(solution) = fixed_support_optimize(event, &support) {
            if solution.growth > best_growth {
                best_growth = solution.growth;
                best_wealth = solution.wealth;
            }
        }
    }

    Ok(report(
        OracleMethod::Enumeration,
        best_growth,
        best_wealth,
        event,
    ))
}

/// Scans the feasibility simplex `{(c, x) >= 0, c + sum(x) = 1}` on an
/// integer lattice with roughly the requested step and returns the best
/// lattice point. Lattice points with a zero-wealth state score minus
/// infinity and are skipped.
pub fn grid_search_solve(event: &MarketEvent, step: f64) -> Result<OracleReport, OracleError> {
    let n = event.len();
    if n > MAX_GRID_OUTCOMES {
        return Err(OracleError::TooManyOutcomes {
            method: OracleMethod::Grid,
            got: n,
            max: MAX_GRID_OUTCOMES,
        });
    }
    if !(step > 0.0 && step <= MAX_GRID_STEP) {
        return Err(OracleError::BadStep { value: step });
    }

    let p = event.probabilities();
    let q = event.state_prices();
    let units = (1.0 / step).round() as u64;
    let scale = 1.0 / units as f64;

    let mut best_growth = f64::NEG_INFINITY;
    let mut best_units: Vec<u64> = vec![0; n];
    let mut stake_units = vec![0u64; n];

    // Walk every composition of `units` into n stakes plus a cash remainder.
    scan_compositions(units, 0, &mut stake_units, &mut |stake_units| {
        let cash_units = units - stake_units.iter().sum::<u64>();
        let cash = cash_units as f64 * scale;
        let mut growth = 0.0;
        for i in 0..n {
            let wealth = cash + stake_units[i] as f64 * scale / q[i];
            if wealth <= 0.0 {
                return;
            }
            growth += p[i] * wealth.ln();
        }
        if growth > best_growth {
            best_growth = growth;
            best_units.copy_from_slice(stake_units);
        }
    });

    let cash = (units - best_units.iter().sum::<u64>()) as f64 * scale;
    let best_wealth = WealthVector::new(
        (0..n)
            .map(|i| cash + best_units[i] as f64 * scale / q[i])
            .collect(),
    );
    Ok(report(OracleMethod::Grid, best_growth, best_wealth, event))
}

fn scan_compositions(left: u64, slot: usize, units: &mut Vec<u64>, visit: &mut impl FnMut(&[u64])) {
    if slot + 1 == units.len() {
        for value in 0..=left {
            units[slot] = value;
            visit(units);
        }
        return;
    }
    for value in 0..=left {
        units[slot] = value;
        scan_compositions(left - value, slot + 1, units, visit);
    }
    units[slot] = 0;
}

/// Maximizes the objective directly by projected gradient ascent over the
/// simplex in `(c, x)`, restarted from the all-cash point and a handful of
/// seeded random interior points. Steps that fail to improve shrink the
/// step size, so each start's step sizes only ever decrease; the best point
/// visited across all starts is reported.
pub fn projected_ascent_solve(event: &MarketEvent, iterations: usize, seed: u64) -> OracleReport {
    const RANDOM_STARTS: usize = 4;

    let n = event.len();
    let p = event.probabilities();
    let q = event.state_prices();

    let objective = |v: &[f64]| -> Option<f64> {
        let mut growth = 0.0;
        for i in 0..n {
            let wealth = v[0] + v[i + 1] / q[i];
            if wealth <= 0.0 {
                return None;
            }
            growth += p[i] * wealth.ln();
        }
        Some(growth)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = Vec::with_capacity(RANDOM_STARTS + 1);
    let mut all_cash = vec![0.0; n + 1];
    all_cash[0] = 1.0;
    starts.push(all_cash);
    for _ in 0..RANDOM_STARTS {
        let mut v = simplex_sample(n + 1, &mut rng);
        // Pull toward the barycenter so every state starts with positive wealth.
        let center = 1.0 / (n + 1) as f64;
        for value in &mut v {
            *value = 0.9 * *value + 0.1 * center;
        }
        starts.push(v);
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_point = starts[0].clone();
    let mut gradient = vec![0.0; n + 1];
    let mut candidate = vec![0.0; n + 1];

    for start in starts {
        let mut point = start;
        let mut value = match objective(&point) {
            Some(value) => value,
            None => continue,
        };
        let mut step = 1.0;
        for _ in 0..iterations {
            gradient[0] = 0.0;
            for i in 0..n {
                let wealth = point[0] + point[i + 1] / q[i];
                gradient[0] += p[i] / wealth;
                gradient[i + 1] = p[i] / (q[i] * wealth);
            }
            for i in 0..=n {
                candidate[i] = point[i] + step * gradient[i];
            }
            project_onto_simplex(&mut candidate);
            match objective(&candidate) {
                Some(next) if next > value => {
                    point.copy_from_slice(&candidate);
                    value = next;
                }
                _ => {
                    step *= 0.5;
                    if step < 1e-18 {
                        break;
                    }
                }
            }
        }
        if value > best_value {
            best_value = value;
            best_point = point;
        }
    }

    let best_wealth = WealthVector::new(
        (0..n)
            .map(|i| best_point[0] + best_point[i + 1] / q[i])
            .collect(),
    );
    report(OracleMethod::Ascent, best_value, best_wealth, event)
}

fn report(
    method: OracleMethod,
    best_growth: f64,
    best_wealth: WealthVector,
    event: &MarketEvent,
) -> OracleReport {
    let solution = greedy_solve(event);
    let max_wealth_deviation = best_wealth.max_abs_diff(&solution.wealth);
    OracleReport {
        method,
        best_growth,
        best_wealth,
        solver_growth: solution.growth,
        max_wealth_deviation,
    }
}

/// Euclidean projection onto `{v >= 0, sum(v) = 1}`.
fn project_onto_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if value - candidate > 0.0 {
            threshold = candidate;
        }
    }
    for value in v.iter_mut() {
        *value = (*value - threshold).max(0.0);
    }
}

/// Uniform draw from the simplex via normalized exponentials.
fn simplex_sample<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..len)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && draws.iter().all(|e| e.is_finite()) {
            return draws.iter().map(|e| e / total).collect();
        }
    }
}

/// Draws a random market: probabilities from a symmetric simplex draw and
/// state prices from an independent simplex draw scaled per-outcome by a
/// uniform factor in `[0.8, 1.4]`, so books land on both sides of fair.
/// Invalid draws are rejected and retried.
pub fn random_event<R: Rng>(outcomes: usize, rng: &mut R) -> MarketEvent {
    let labels: Vec<String> = (0..outcomes).map(|i| format!("o{}", i + 1)).collect();
    loop {
        let probabilities = simplex_sample(outcomes, rng);
        let base = simplex_sample(outcomes, rng);
        let state_prices: Vec<f64> = base
            .iter()
            .map(|b| b * (0.8 + 0.6 * rng.random::<f64>()))
            .collect();
        if let Ok(event) =
            MarketEvent::from_state_prices(labels.clone(), probabilities, state_prices)
        {
            return event;
        }
    }
}

/// Draws a random feasible strategy for an event: a uniform point on the
/// `(cash, stakes)` simplex.
pub fn random_strategy<R: Rng>(event: &MarketEvent, rng: &mut R) -> Strategy {
    loop {
        let mut point = simplex_sample(event.len() + 1, rng);
        let cash = point.remove(0);
        if let Ok(strategy) = Strategy::new(cash, point) {
            return strategy;
        }
    }
}

/// Structural checks tying a solution back to its market: budget, the
/// plus-part stake formula, clipped wealth, the sorted-prefix shape of the
/// trace, strictly decreasing cash, accepted price mass below 1, effective
/// stakes equal to probabilities on the active set, and nonnegative growth.
///
/// Returns the first violated condition.
pub fn check_solution_invariants(
    event: &MarketEvent,
    solution: &KellySolution,
) -> Result<(), String> {
    let n = event.len();
    let p = event.probabilities();
    let q = event.state_prices();
    let cash = solution.cash;

    let mut budget = CompensatedSum::default();
    budget.add(cash);
    for &x in &solution.stakes {
        budget.add(x);
    }
    let total = budget.value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("budget sums to {total}, not 1"));
    }

    for i in 0..n {
        let plus_part = (p[i] - cash * q[i]).max(0.0);
        if (solution.stakes[i] - plus_part).abs() > 1e-12 {
            return Err(format!(
                "stake {i} is {}, plus-part formula gives {plus_part}",
                solution.stakes[i]
            ));
        }
        let clipped = (p[i] / q[i]).max(cash);
        if (solution.wealth[i] - clipped).abs() > 1e-9 {
            return Err(format!(
                "wealth {i} is {}, clipped form gives {clipped}",
                solution.wealth[i]
            ));
        }
    }

    // The trace must be a run of acceptances, optionally ending in one stop.
    let mut stopped = false;
    let mut previous_cash = 1.0;
    let mut accepted_p = CompensatedSum::default();
    let mut accepted_q = CompensatedSum::default();
    let mut accepted = 0usize;
    for (k, step) in solution.trace.iter().enumerate() {
        if stopped {
            return Err(format!("trace continues past the stop at step {k}"));
        }
        if step.cash_before != previous_cash {
            return Err(format!(
                "step {k} starts from cash {}, expected {previous_cash}",
                step.cash_before
            ));
        }
        if step.accepted != (step.ratio > step.cash_before) {
            return Err(format!("step {k} decision contradicts its comparison"));
        }
        if step.accepted {
            let next = step
                .cash_after
                .ok_or_else(|| format!("accepted step {k} lacks an updated cash level"))?;
            if !(next < step.cash_before) {
                return Err(format!(
                    "accepted step {k} fails to lower cash: {} -> {next}",
                    step.cash_before
                ));
            }
            accepted_p.add(p[step.index]);
            accepted_q.add(q[step.index]);
            accepted += 1;
            if accepted < n && accepted_q.value() >= 1.0 {
                return Err(format!(
                    "accepted proper support carries price mass {} >= 1",
                    accepted_q.value()
                ));
            }
            previous_cash = next;
        } else {
            if step.cash_after.is_some() {
                return Err(format!("stopping step {k} carries an updated cash level"));
            }
            stopped = true;
        }
    }
    if !stopped && accepted != n {
        return Err("trace ended without a stop or full acceptance".to_string());
    }
    if previous_cash != cash {
        return Err(format!(
            "trace ends at cash {previous_cash}, solution says {cash}"
        ));
    }

    for &i in &solution.active_set {
        let effective = solution.stakes[i] + cash * q[i];
        if (effective - p[i]).abs() > 1e-12 {
            return Err(format!(
                "effective stake on active outcome {i} is {effective}, expected {}",
                p[i]
            ));
        }
    }
    if accepted < n {
        let identity = 1.0 - cash * accepted_q.complement();
        if (identity - accepted_p.value()).abs() > 1e-12 {
            return Err(format!(
                "budget identity off: 1 - c(1 - Q) = {identity}, P = {}",
                accepted_p.value()
            ));
        }
    }

    if !(solution.growth >= 0.0) {
        return Err(format!(
            "growth {} is below the all-cash baseline",
            solution.growth
        ));
    }
    Ok(())
}
