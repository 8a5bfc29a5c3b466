//! Seeded Monte Carlo estimation of the growth rate.
//!
//! Repeating the event i.i.d. and averaging log wealth converges to the
//! analytic objective value, which makes sampling a cheap end-to-end check
//! of both the objective evaluation and the solver. Trial `t`'s outcome is a
//! pure function of `(seed, t)`, so runs are bit-reproducible and trials
//! could be evaluated in any order or in parallel without changing the
//! result.

use serde::Serialize;
use thiserror::Error;

use crate::market::{MarketError, MarketEvent, Strategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("strategy {index}: {source}")]
    Strategy { index: usize, source: MarketError },
}

/// Sampled and analytic growth for one strategy on one event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub trials: u64,
    /// Sample mean of log wealth, nats per event.
    pub mean_log_wealth: f64,
    /// Sample standard deviation over the square root of the trial count;
    /// exactly 0 when terminal wealth is the same in every state.
    pub std_error: f64,
    /// The objective value the sample mean estimates.
    pub analytic_growth: f64,
    pub seed: u64,
}

/// Analytic growth of one strategy and its rank among the batch it was
/// compared in (1 = best, ties share a rank).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyComparison {
    pub growth: f64,
    pub rank: usize,
}

/// Draws `trials` outcomes i.i.d. from the event's probabilities and
/// averages the strategy's log wealth.
///
/// Outcomes come from inverse-CDF lookups against a counter-based generator,
/// and identical `(event, strategy, trials, seed)` give bit-identical
/// results. Since a trial only selects which of the `n` wealth levels
/// occurred, the accumulation tallies outcome counts and reduces them
/// against the precomputed log wealth table, which is exact regardless of
/// trial order.
pub fn simulate_growth(
    event: &MarketEvent,
    strategy: &Strategy,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult, SimError> {
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let analytic_growth = event.expected_log_growth(strategy)?;
    let wealth = event.terminal_wealth(strategy)?;
    let log_wealth: Vec<f64> = wealth.as_slice().iter().map(|w| w.ln()).collect();

    // Thresholds for inverse-CDF sampling; the last outcome absorbs the
    // remainder so accumulated rounding cannot push a draw out of range.
    let n = event.len();
    let mut thresholds = Vec::with_capacity(n.saturating_sub(1));
    let mut cumulative = 0.0;
    for &p in &event.probabilities()[..n - 1] {
        cumulative += p;
        thresholds.push(cumulative);
    }

    let mut counts = vec![0u64; n];
    for trial in 0..trials {
        let u = trial_uniform(seed, trial);
        let outcome = thresholds.partition_point(|&t| t <= u);
        counts[outcome] += 1;
    }

    let constant = log_wealth
        .iter()
        .all(|&w| w.to_bits() == log_wealth[0].to_bits());
    let (mean_log_wealth, std_error) = if constant {
        (log_wealth[0], 0.0)
    } else {
        let total: f64 = counts
            .iter()
            .zip(&log_wealth)
            .map(|(&c, &w)| c as f64 * w)
            .sum();
        let mean = total / trials as f64;
        let squared: f64 = counts
            .iter()
            .zip(&log_wealth)
            .map(|(&c, &w)| c as f64 * (w - mean) * (w - mean))
            .sum();
        let variance = if trials > 1 {
            squared / (trials - 1) as f64
        } else {
            0.0
        };
        (mean, (variance / trials as f64).sqrt())
    };

    Ok(SimulationResult {
        trials,
        mean_log_wealth,
        std_error,
        analytic_growth,
        seed,
    })
}

/// Analytic growth for each strategy with a descending competition rank.
/// A strategy with an impossible log (some reachable state wiped out) is
/// reported as an error naming the strategy.
pub fn compare_strategies(
    event: &MarketEvent,
    strategies: &[Strategy],
) -> Result<Vec<StrategyComparison>, SimError> {
    let mut growths = Vec::with_capacity(strategies.len());
    for (index, strategy) in strategies.iter().enumerate() {
        let growth = event
            .expected_log_growth(strategy)
            .map_err(|source| SimError::Strategy { index, source })?;
        growths.push(growth);
    }
    let comparisons = growths
        .iter()
        .map(|&growth| StrategyComparison {
            growth,
            rank: 1 + growths.iter().filter(|&&other| other > growth).count(),
        })
        .collect();
    Ok(comparisons)
}

/// SplitMix64 finalizer over a counter stream: uniform in `[0, 1)` as a pure
/// function of `(seed, trial)`.
fn trial_uniform(seed: u64, trial: u64) -> f64 {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::greedy_solve;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn binary_event() -> MarketEvent {
        MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, 0.4], vec![2.0, 2.0]).unwrap()
    }

    #[test]
    fn all_cash_samples_to_exactly_zero() {
        let event = binary_event();
        let result = simulate_growth(&event, &Strategy::all_cash(2), 1_000, 1).unwrap();
        assert_eq!(result.mean_log_wealth, 0.0);
        assert_eq!(result.std_error, 0.0);
        assert_eq!(result.analytic_growth, 0.0);
    }

    #[test]
    fn kelly_solution_sample_mean_tracks_analytic_growth() {
        let event = binary_event();
        let solution = greedy_solve(&event);
        let strategy = Strategy::new(solution.cash, solution.stakes.clone()).unwrap();
        let result = simulate_growth(&event, &strategy, 1_000_000, 42).unwrap();
        assert!(result.std_error > 0.0);
        assert!(
            (result.mean_log_wealth - result.analytic_growth).abs() <= 3.0 * result.std_error,
            "sample mean {} strayed from analytic {} (se {})",
            result.mean_log_wealth,
            result.analytic_growth,
            result.std_error
        );
        assert!((result.analytic_growth - 0.0201355).abs() < 1e-7);
    }

    #[test]
    fn deterministic_single_outcome_has_no_error() {
        let event =
            MarketEvent::from_decimal_odds(labels(&["only"]), vec![1.0], vec![2.0]).unwrap();
        let strategy = Strategy::new(0.0, vec![1.0]).unwrap();
        let result = simulate_growth(&event, &strategy, 10_000, 9).unwrap();
        assert_eq!(result.mean_log_wealth, 2.0f64.ln());
        assert_eq!(result.std_error, 0.0);
    }

    #[test]
    fn zero_trials_is_rejected() {
        let event = binary_event();
        let err = simulate_growth(&event, &Strategy::all_cash(2), 0, 1).unwrap_err();
        assert_eq!(err, SimError::ZeroTrials);
    }

    #[test]
    fn wiped_out_state_is_rejected() {
        let event = binary_event();
        let strategy = Strategy::new(0.0, vec![1.0, 0.0]).unwrap();
        let err = simulate_growth(&event, &strategy, 10, 1).unwrap_err();
        assert_eq!(
            err,
            SimError::Market(MarketError::NonpositiveWealthState { state: 1 })
        );
    }

    #[test]
    fn equal_seeds_are_bit_identical() {
        let event = binary_event();
        let solution = greedy_solve(&event);
        let strategy = Strategy::new(solution.cash, solution.stakes.clone()).unwrap();
        let a = simulate_growth(&event, &strategy, 100_000, 7).unwrap();
        let b = simulate_growth(&event, &strategy, 100_000, 7).unwrap();
        assert_eq!(a.mean_log_wealth.to_bits(), b.mean_log_wealth.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());

        let c = simulate_growth(&event, &strategy, 100_000, 8).unwrap();
        assert_ne!(a.mean_log_wealth.to_bits(), c.mean_log_wealth.to_bits());
    }

    #[test]
    fn comparison_ranks_greedy_first() {
        let event = binary_event();
        let solution = greedy_solve(&event);
        let greedy = Strategy::new(solution.cash, solution.stakes.clone()).unwrap();
        let ranks = compare_strategies(&event, &[greedy, Strategy::all_cash(2)]).unwrap();
        assert_eq!(ranks[0].rank, 1);
        assert_eq!(ranks[1].rank, 2);
        assert!((ranks[0].growth - 0.0201355).abs() < 1e-7);
        assert_eq!(ranks[1].growth, 0.0);
    }

    #[test]
    fn identical_strategies_tie() {
        let event = binary_event();
        let ranks =
            compare_strategies(&event, &[Strategy::all_cash(2), Strategy::all_cash(2)]).unwrap();
        assert_eq!(ranks[0].rank, 1);
        assert_eq!(ranks[1].rank, 1);
        assert_eq!(ranks[0].growth, ranks[1].growth);
    }

    #[test]
    fn comparison_reports_offending_strategy() {
        let event = binary_event();
        let bad = Strategy::new(0.0, vec![1.0, 0.0]).unwrap();
        let err = compare_strategies(&event, &[Strategy::all_cash(2), bad]).unwrap_err();
        assert!(matches!(err, SimError::Strategy { index: 1, .. }));
    }

    #[test]
    fn outcome_frequencies_match_probabilities() {
        let event = MarketEvent::from_state_prices(
            labels(&["x", "y", "z"]),
            vec![0.5, 0.3, 0.2],
            vec![0.3, 0.3, 0.4],
        )
        .unwrap();
        // A strategy with distinct wealth levels so every outcome is visible
        // in the mean: stakes proportional to q keep wealth positive.
        let strategy = Strategy::new(0.5, vec![0.15, 0.15, 0.2]).unwrap();
        let trials = 200_000;
        let result = simulate_growth(&event, &strategy, trials, 5).unwrap();
        assert!((result.mean_log_wealth - result.analytic_growth).abs() <= 4.0 * result.std_error);
    }
}
