//! Market instances, betting strategies, and the expected-log-growth objective.
//!
//! A [`MarketEvent`] holds the bettor's probabilities `p_i` and the market's
//! state prices `q_i` (reciprocal decimal odds) for one event with mutually
//! exclusive outcomes. A [`Strategy`] splits the bankroll into a cash fraction
//! and per-outcome stakes. Terminal wealth in state `i` is `c + x_i / q_i`,
//! and the objective is its expected natural logarithm.

use serde::Serialize;
use thiserror::Error;

/// Probability vectors whose sum is within this distance of 1 are accepted
/// and renormalized; larger deviations are rejected as user error.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

/// Budget slack allowed when validating a strategy.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Errors raised while constructing market types or evaluating the objective.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("a market needs at least one outcome")]
    EmptyMarket,
    #[error("probability for outcome {index} must be positive, got {value}")]
    NonpositiveProbability { index: usize, value: f64 },
    #[error("decimal odds for outcome {index} must be positive, got {value}")]
    NonpositiveOdds { index: usize, value: f64 },
    #[error("state price for outcome {index} must be positive, got {value}")]
    NonpositiveStatePrice { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, which is more than 1e-6 away from 1")]
    ProbabilitySumViolation { sum: f64 },
    #[error("cash fraction must be nonnegative, got {value}")]
    NegativeCash { value: f64 },
    #[error("stake on outcome {index} must be nonnegative, got {value}")]
    NegativeStake { index: usize, value: f64 },
    #[error("cash plus stakes must sum to 1, got {total}")]
    BudgetViolation { total: f64 },
    #[error("terminal wealth in state {state} is not positive; log growth is undefined")]
    NonpositiveWealthState { state: usize },
}

/// Non-fatal observations recorded while constructing a market.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationWarning {
    /// State price at or above 1 (decimal odds at or below 1). Such an
    /// outcome never attracts a stake, but the market is still solvable.
    StatePriceAtLeastOne { index: usize, state_price: f64 },
}

impl std::fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationWarning::StatePriceAtLeastOne { index, state_price } => write!(
                f,
                "outcome {index} has state price {state_price} >= 1 (odds <= 1); it can never attract a stake"
            ),
        }
    }
}

/// A single event with mutually exclusive outcomes: the bettor's
/// probabilities and the market's state prices, validated at construction.
///
/// Immutable once built; all operations are pure reads.
#[derive(Debug, Clone)]
pub struct MarketEvent {
    labels: Vec<String>,
    probabilities: Vec<f64>,
    state_prices: Vec<f64>,
    warnings: Vec<ValidationWarning>,
}

impl MarketEvent {
    /// Builds a market from decimal odds, converting each `O_i` to the state
    /// price `q_i = 1 / O_i`.
    ///
    /// Probabilities must be strictly positive and sum to 1 within
    /// [`PROBABILITY_SUM_TOLERANCE`]; they are renormalized to sum to 1.
    /// Odds at or below 1 are accepted with a [`ValidationWarning`] since the
    /// math only needs `q_i > 0`.
    pub fn from_decimal_odds(
        labels: Vec<String>,
        probabilities: Vec<f64>,
        decimal_odds: Vec<f64>,
    ) -> Result<Self, MarketError> {
        check_lengths(labels.len(), probabilities.len(), decimal_odds.len())?;
        let mut state_prices = Vec::with_capacity(decimal_odds.len());
        for (index, &odds) in decimal_odds.iter().enumerate() {
            if !(odds > 0.0) {
                return Err(MarketError::NonpositiveOdds { index, value: odds });
            }
            state_prices.push(1.0 / odds);
        }
        Self::from_state_prices(labels, probabilities, state_prices)
    }

    /// Builds a market directly from state prices `q_i > 0`.
    pub fn from_state_prices(
        labels: Vec<String>,
        probabilities: Vec<f64>,
        state_prices: Vec<f64>,
    ) -> Result<Self, MarketError> {
        check_lengths(labels.len(), probabilities.len(), state_prices.len())?;
        for (index, &q) in state_prices.iter().enumerate() {
            if !(q > 0.0) || !q.is_finite() {
                return Err(MarketError::NonpositiveStatePrice { index, value: q });
            }
        }
        for (index, &p) in probabilities.iter().enumerate() {
            if !(p > 0.0) {
                return Err(MarketError::NonpositiveProbability { index, value: p });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if !((sum - 1.0).abs() <= PROBABILITY_SUM_TOLERANCE) {
            return Err(MarketError::ProbabilitySumViolation { sum });
        }
        let probabilities: Vec<f64> = probabilities.iter().map(|p| p / sum).collect();
        let warnings = state_prices
            .iter()
            .enumerate()
            .filter(|&(_, &q)| q >= 1.0)
            .map(|(index, &q)| ValidationWarning::StatePriceAtLeastOne {
                index,
                state_price: q,
            })
            .collect();
        Ok(Self {
            labels,
            probabilities,
            state_prices,
            warnings,
        })
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: construction rejects empty markets.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn state_prices(&self) -> &[f64] {
        &self.state_prices
    }

    /// Warnings recorded at construction (currently only short-priced outcomes).
    pub fn warnings(&self) -> &[ValidationWarning] {
        &self.warnings
    }

    /// Sum of state prices; above 1 the book embeds a margin.
    pub fn overround(&self) -> f64 {
        self.state_prices.iter().sum()
    }

    /// Edge ratios `r_i = p_i / q_i`, the bettor's probability over the
    /// market-implied one. These are also the optimal wealth levels on
    /// outcomes that end up active.
    pub fn edge_ratios(&self) -> Vec<f64> {
        self.probabilities
            .iter()
            .zip(&self.state_prices)
            .map(|(p, q)| p / q)
            .collect()
    }

    /// Terminal wealth per state: `W_i = c + x_i / q_i`.
    pub fn terminal_wealth(&self, strategy: &Strategy) -> Result<WealthVector, MarketError> {
        if strategy.stakes.len() != self.len() {
            return Err(MarketError::LengthMismatch {
                expected: self.len(),
                got: strategy.stakes.len(),
            });
        }
        let wealth = strategy
            .stakes
            .iter()
            .zip(&self.state_prices)
            .map(|(x, q)| strategy.cash + x / q)
            .collect();
        Ok(WealthVector(wealth))
    }

    /// Expected log growth `sum_i p_i ln(W_i)` in nats.
    ///
    /// Errors with [`MarketError::NonpositiveWealthState`] when some state has
    /// `W_i <= 0`: the objective there is minus infinity and is signaled
    /// rather than returned as a number.
    pub fn expected_log_growth(&self, strategy: &Strategy) -> Result<f64, MarketError> {
        let wealth = self.terminal_wealth(strategy)?;
        let mut growth = 0.0;
        for (state, (&p, &w)) in self.probabilities.iter().zip(wealth.as_slice()).enumerate() {
            if !(w > 0.0) {
                return Err(MarketError::NonpositiveWealthState { state });
            }
            growth += p * w.ln();
        }
        Ok(growth)
    }
}

fn check_lengths(labels: usize, probabilities: usize, prices: usize) -> Result<(), MarketError> {
    if labels == 0 {
        return Err(MarketError::EmptyMarket);
    }
    if probabilities != labels {
        return Err(MarketError::LengthMismatch {
            expected: labels,
            got: probabilities,
        });
    }
    if prices != labels {
        return Err(MarketError::LengthMismatch {
            expected: labels,
            got: prices,
        });
    }
    Ok(())
}

/// A feasible allocation: cash fraction plus nonnegative stakes summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Strategy {
    cash: f64,
    stakes: Vec<f64>,
}

impl Strategy {
    /// Validates `cash >= 0`, every stake `>= 0`, and the budget
    /// `cash + sum(stakes) = 1` within [`BUDGET_TOLERANCE`].
    pub fn new(cash: f64, stakes: Vec<f64>) -> Result<Self, MarketError> {
        if !(cash >= 0.0) {
            return Err(MarketError::NegativeCash { value: cash });
        }
        for (index, &x) in stakes.iter().enumerate() {
            if !(x >= 0.0) {
                return Err(MarketError::NegativeStake { index, value: x });
            }
        }
        let total = cash + stakes.iter().sum::<f64>();
        if !((total - 1.0).abs() <= BUDGET_TOLERANCE) {
            return Err(MarketError::BudgetViolation { total });
        }
        Ok(Self { cash, stakes })
    }

    /// The do-nothing strategy: everything in cash.
    pub fn all_cash(outcomes: usize) -> Self {
        Self {
            cash: 1.0,
            stakes: vec![0.0; outcomes],
        }
    }

    pub fn cash(&self) -> f64 {
        self.cash
    }

    pub fn stakes(&self) -> &[f64] {
        &self.stakes
    }
}

/// Terminal wealth multipliers per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WealthVector(Vec<f64>);

impl WealthVector {
    pub(crate) fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Infinity-norm distance to another wealth vector of the same length.
    pub fn max_abs_diff(&self, other: &WealthVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for WealthVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn binary_event() -> MarketEvent {
        MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, 0.4], vec![2.0, 2.0]).unwrap()
    }

    #[test]
    fn decimal_odds_become_reciprocal_state_prices() {
        let event = binary_event();
        assert_eq!(event.state_prices(), &[0.5, 0.5]);

        let event = MarketEvent::from_decimal_odds(
            labels(&["x", "y", "z"]),
            vec![0.5, 0.3, 0.2],
            vec![5.0, 5.0, 5.0],
        )
        .unwrap();
        assert_eq!(event.state_prices(), &[0.2, 0.2, 0.2]);
    }

    #[test]
    fn probability_sum_violation_is_rejected() {
        let err =
            MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, 0.5], vec![2.0, 2.0])
                .unwrap_err();
        assert!(matches!(
            err,
            MarketError::ProbabilitySumViolation { sum } if (sum - 1.1).abs() < 1e-12
        ));
    }

    #[test]
    fn small_probability_drift_is_renormalized() {
        let event = MarketEvent::from_decimal_odds(
            labels(&["a", "b"]),
            vec![0.6 + 4e-7, 0.4 + 4e-7],
            vec![2.0, 2.0],
        )
        .unwrap();
        let sum: f64 = event.probabilities().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn construction_error_paths() {
        let err = MarketEvent::from_decimal_odds(labels(&[]), vec![], vec![]).unwrap_err();
        assert_eq!(err, MarketError::EmptyMarket);

        let err = MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![1.0], vec![2.0, 2.0])
            .unwrap_err();
        assert!(matches!(err, MarketError::LengthMismatch { .. }));

        let err =
            MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, 0.4], vec![2.0, 0.0])
                .unwrap_err();
        assert!(matches!(err, MarketError::NonpositiveOdds { index: 1, .. }));

        let err =
            MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, -0.4], vec![2.0, 2.0])
                .unwrap_err();
        assert!(matches!(
            err,
            MarketError::NonpositiveProbability { index: 1, .. }
        ));

        let err =
            MarketEvent::from_state_prices(labels(&["a", "b"]), vec![0.6, 0.4], vec![0.5, -0.1])
                .unwrap_err();
        assert!(matches!(
            err,
            MarketError::NonpositiveStatePrice { index: 1, .. }
        ));
    }

    #[test]
    fn short_odds_are_accepted_with_a_warning() {
        let event =
            MarketEvent::from_decimal_odds(labels(&["a", "b"]), vec![0.6, 0.4], vec![2.0, 0.9])
                .unwrap();
        assert_eq!(event.warnings().len(), 1);
        assert!(matches!(
            event.warnings()[0],
            ValidationWarning::StatePriceAtLeastOne { index: 1, .. }
        ));
    }

    #[test]
    fn edge_ratios_divide_componentwise() {
        let event = binary_event();
        let r = event.edge_ratios();
        assert!((r[0] - 1.2).abs() < 1e-12);
        assert!((r[1] - 0.8).abs() < 1e-12);

        let fair =
            MarketEvent::from_state_prices(labels(&["a", "b"]), vec![0.6, 0.4], vec![0.6, 0.4])
                .unwrap();
        for r in fair.edge_ratios() {
            assert!((r - 1.0).abs() < 1e-12);
        }

        let event = MarketEvent::from_state_prices(
            labels(&["x", "y", "z"]),
            vec![0.5, 0.3, 0.2],
            vec![0.3, 0.3, 0.4],
        )
        .unwrap();
        let r = event.edge_ratios();
        assert!((r[0] - 5.0 / 3.0).abs() < 1e-12);
        assert!((r[1] - 1.0).abs() < 1e-12);
        assert!((r[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn terminal_wealth_matches_definition() {
        let event = binary_event();

        let all_cash = Strategy::all_cash(2);
        let wealth = event.terminal_wealth(&all_cash).unwrap();
        assert_eq!(wealth.as_slice(), &[1.0, 1.0]);

        let strategy = Strategy::new(0.8, vec![0.2, 0.0]).unwrap();
        let wealth = event.terminal_wealth(&strategy).unwrap();
        assert!((wealth[0] - 1.2).abs() < 1e-12);
        assert!((wealth[1] - 0.8).abs() < 1e-12);

        let event = MarketEvent::from_state_prices(
            labels(&["x", "y", "z"]),
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.2, 0.2],
        )
        .unwrap();
        let strategy = Strategy::new(0.0, vec![0.5, 0.3, 0.2]).unwrap();
        let wealth = event.terminal_wealth(&strategy).unwrap();
        assert!((wealth[0] - 2.5).abs() < 1e-12);
        assert!((wealth[1] - 1.5).abs() < 1e-12);
        assert!((wealth[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_cash_growth_is_exactly_zero() {
        let event = binary_event();
        let growth = event.expected_log_growth(&Strategy::all_cash(2)).unwrap();
        assert_eq!(growth, 0.0);
    }

    #[test]
    fn growth_matches_direct_evaluation() {
        let event = binary_event();
        let strategy = Strategy::new(0.8, vec![0.2, 0.0]).unwrap();
        let growth = event.expected_log_growth(&strategy).unwrap();
        let direct = 0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln();
        assert!((growth - direct).abs() < 1e-15);
        assert!((growth - 0.0201355).abs() < 1e-7);
    }

    #[test]
    fn zero_wealth_state_is_signaled() {
        let event = binary_event();
        let strategy = Strategy::new(0.0, vec![1.0, 0.0]).unwrap();
        let err = event.expected_log_growth(&strategy).unwrap_err();
        assert_eq!(err, MarketError::NonpositiveWealthState { state: 1 });
    }

    #[test]
    fn strategy_validation() {
        assert!(matches!(
            Strategy::new(-0.1, vec![1.1]).unwrap_err(),
            MarketError::NegativeCash { .. }
        ));
        assert!(matches!(
            Strategy::new(1.2, vec![-0.2]).unwrap_err(),
            MarketError::NegativeStake { index: 0, .. }
        ));
        assert!(matches!(
            Strategy::new(0.5, vec![0.4]).unwrap_err(),
            MarketError::BudgetViolation { .. }
        ));

        let strategy = Strategy::new(0.5, vec![0.25, 0.25]).unwrap();
        assert_eq!(strategy.cash(), 0.5);
        assert_eq!(strategy.stakes(), &[0.25, 0.25]);
    }

    #[test]
    fn wealth_mismatch_is_reported() {
        let event = binary_event();
        let strategy = Strategy::new(0.5, vec![0.5]).unwrap();
        assert!(matches!(
            event.terminal_wealth(&strategy).unwrap_err(),
            MarketError::LengthMismatch {
                expected: 2,
                got: 1
            }
        ));
    }

    #[test]
    fn permuting_outcomes_permutes_derived_quantities() {
        let event = MarketEvent::from_state_prices(
            labels(&["x", "y", "z"]),
            vec![0.5, 0.3, 0.2],
            vec![0.3, 0.3, 0.4],
        )
        .unwrap();
        let permuted = MarketEvent::from_state_prices(
            labels(&["z", "x", "y"]),
            vec![0.2, 0.5, 0.3],
            vec![0.4, 0.3, 0.3],
        )
        .unwrap();

        let r = event.edge_ratios();
        let rp = permuted.edge_ratios();
        assert_eq!([rp[1], rp[2], rp[0]], [r[0], r[1], r[2]]);

        let strategy = Strategy::new(0.5, vec![0.35, 0.15, 0.0]).unwrap();
        let permuted_strategy = Strategy::new(0.5, vec![0.0, 0.35, 0.15]).unwrap();
        let w = event.terminal_wealth(&strategy).unwrap();
        let wp = permuted.terminal_wealth(&permuted_strategy).unwrap();
        assert_eq!([wp[1], wp[2], wp[0]], [w[0], w[1], w[2]]);
    }
}
