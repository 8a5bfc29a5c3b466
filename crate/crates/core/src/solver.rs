//! The closed-form solver for the single-event Kelly problem.
//!
//! Cash is an implicit position: holding cash `c` pays `c` in every state,
//! which is the same as staking `c q_i` on each outcome. On an active
//! support the optimal effective stake is simply `p_i`, so the explicit
//! stake is the top-up `p_i - c q_i`. Support selection reduces to a greedy
//! pass over outcomes sorted by edge ratio: keep adding outcomes while
//! `r_{k+1} > c_k`, where the cash level attached to the first `k` outcomes
//! is `c_k = (1 - P_k) / (1 - Q_k)`.

use serde::Serialize;
use thiserror::Error;

use crate::market::{MarketEvent, Strategy, WealthVector};

/// Absolute tolerance used to flag edge ratios sitting exactly on the final
/// cash level, where the wealth vector is unique but the stake split is not.
pub const BOUNDARY_TIE_TOLERANCE: f64 = 1e-12;

/// Errors from the solver building blocks. The greedy pass itself always
/// succeeds on a valid market.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("weight {index} must be positive, got {value}")]
    NonpositiveWeight { index: usize, value: f64 },
    #[error("budget must be positive, got {value}")]
    NonpositiveBudget { value: f64 },
    #[error("support must not be empty")]
    EmptySupport,
    #[error("support index {index} out of range for {outcomes} outcomes")]
    SupportIndexOutOfRange { index: usize, outcomes: usize },
    #[error("support state prices sum to {q_sum} >= 1; an optimum confined to it collapses to a smaller support")]
    OverroundSupport { q_sum: f64 },
    #[error("outcome {index} cannot carry a positive stake at support cash {cash}")]
    PositivityViolation { index: usize, cash: f64 },
    #[error("cash must lie strictly between 0 and 1, got {value}")]
    CashOutOfRange { value: f64 },
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    ParameterOutOfRange { name: &'static str, value: f64 },
}

/// The optimizer restricted to a given support: stakes on the support, zero
/// elsewhere, cash `c_A = (1 - P_A) / (1 - Q_A)`.
#[derive(Debug, Clone)]
pub struct FixedSupportSolution {
    /// Supported outcome indices, ascending.
    pub support: Vec<usize>,
    /// Cash fraction `c_A`; exactly 0 for the full support.
    pub cash: f64,
    /// Explicit stakes in original outcome order, zero off the support.
    pub stakes: Vec<f64>,
    /// Effective stakes `x_i + c_A q_i` aligned with `support`; each equals
    /// `p_i` at the optimum.
    pub effective_stakes: Vec<f64>,
    /// Terminal wealth: `p_i / q_i` on the support, `c_A` elsewhere.
    pub wealth: WealthVector,
    /// Objective value of the solution.
    pub growth: f64,
}

/// One comparison of the greedy pass: the candidate's edge ratio against the
/// current cash level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyStep {
    /// Original index of the outcome considered at this position.
    pub index: usize,
    /// Edge ratio `r` of the candidate.
    pub ratio: f64,
    /// Cash level before the comparison.
    pub cash_before: f64,
    /// Whether `ratio > cash_before` held.
    pub accepted: bool,
    /// Updated cash level; absent on the stopping step.
    pub cash_after: Option<f64>,
}

/// The growth-optimal strategy for a market, with the greedy trace that
/// produced it.
#[derive(Debug, Clone, Serialize)]
pub struct KellySolution {
    /// Optimal cash fraction `c*`.
    pub cash: f64,
    /// Optimal stakes `x_i = max(p_i - c* q_i, 0)` in original order.
    pub stakes: Vec<f64>,
    /// Optimal terminal wealth `W_i = max(c*, p_i / q_i)`.
    pub wealth: WealthVector,
    /// Indices with strictly positive stakes, ascending.
    pub active_set: Vec<usize>,
    /// Expected log growth of the solution in nats.
    pub growth: f64,
    /// Accept/stop record of the greedy pass, in sorted order, ending at the
    /// first rejection.
    pub trace: Vec<GreedyStep>,
    /// Outcomes whose edge ratio equals `c*` within [`BOUNDARY_TIE_TOLERANCE`].
    /// The wealth vector is still unique; the stake split is not.
    pub boundary_ties: Vec<usize>,
}

/// Splits `budget` across positive weights in proportion to the weights:
/// `z_i = budget * a_i / sum(a)`, the unique maximizer of
/// `sum_i a_i ln(z_i)` subject to `sum_i z_i = budget`.
pub fn weighted_log_allocate(weights: &[f64], budget: f64) -> Result<Vec<f64>, SolverError> {
    if weights.is_empty() {
        return Err(SolverError::EmptySupport);
    }
    for (index, &a) in weights.iter().enumerate() {
        if !(a > 0.0) {
            return Err(SolverError::NonpositiveWeight { index, value: a });
        }
    }
    if !(budget > 0.0) {
        return Err(SolverError::NonpositiveBudget { value: budget });
    }
    let total: f64 = weights.iter().sum();
    let scale = budget / total;
    Ok(weights.iter().map(|a| scale * a).collect())
}

/// Optimizes with stakes confined to `support` (duplicates ignored).
///
/// A proper support needs `Q_A < 1` and every supported outcome able to hold
/// a strictly positive stake at `c_A`; otherwise the optimum confined to the
/// support lives on a smaller one and an error says so. The full support is
/// the all-in solution `c = 0`, `x_i = p_i`, reachable only when `Q < 1`.
pub fn fixed_support_optimize(
    event: &MarketEvent,
    support: &[usize],
) -> Result<FixedSupportSolution, SolverError> {
    let support = normalize_support(support, event.len())?;
    let p = event.probabilities();
    let q = event.state_prices();

    let mut q_sum = CompensatedSum::default();
    for &i in &support {
        q_sum.add(q[i]);
    }
    if q_sum.value() >= 1.0 {
        return Err(SolverError::OverroundSupport {
            q_sum: q_sum.value(),
        });
    }

    let cash = if support.len() == event.len() {
        // Full acceptance: P_A = 1 makes c_A = 0; pin it exactly.
        0.0
    } else {
        let mut p_sum = CompensatedSum::default();
        for &i in &support {
            p_sum.add(p[i]);
        }
        p_sum.complement() / q_sum.complement()
    };

    for &i in &support {
        if !(p[i] > cash * q[i]) {
            return Err(SolverError::PositivityViolation { index: i, cash });
        }
    }

    let mut stakes = vec![0.0; event.len()];
    let mut wealth = vec![cash; event.len()];
    for &i in &support {
        stakes[i] = p[i] - cash * q[i];
        wealth[i] = p[i] / q[i];
    }
    let effective_stakes: Vec<f64> = support.iter().map(|&i| stakes[i] + cash * q[i]).collect();
    let wealth = WealthVector::new(wealth);
    let strategy = Strategy::new(cash, stakes.clone()).expect("support solution is feasible");
    let growth = event
        .expected_log_growth(&strategy)
        .expect("support solution has positive wealth in every state");

    Ok(FixedSupportSolution {
        support,
        cash,
        stakes,
        effective_stakes,
        wealth,
        growth,
    })
}

/// The objective value at cash level `cash` with stakes confined to
/// `support` and allocated optimally inside it.
///
/// For a fixed cash level the inner problem is a proportional log
/// allocation of the effective budget `1 - cash (1 - Q_A)`; this evaluates
/// the resulting objective in full, off-support states included.
pub fn support_value_function(
    event: &MarketEvent,
    support: &[usize],
    cash: f64,
) -> Result<f64, SolverError> {
    let support = normalize_support(support, event.len())?;
    if !(cash > 0.0 && cash < 1.0) {
        return Err(SolverError::CashOutOfRange { value: cash });
    }
    let p = event.probabilities();
    let q = event.state_prices();

    let q_sum: f64 = support.iter().map(|&i| q[i]).sum();
    let inner_budget = 1.0 - cash * (1.0 - q_sum);
    let weights: Vec<f64> = support.iter().map(|&i| p[i]).collect();
    let effective = weighted_log_allocate(&weights, inner_budget)
        .expect("positive probabilities and a positive inner budget");

    let mut in_support = vec![false; event.len()];
    for &i in &support {
        in_support[i] = true;
    }
    let mut growth = 0.0;
    let mut next = 0;
    for i in 0..event.len() {
        if in_support[i] {
            growth += p[i] * (effective[next] / q[i]).ln();
            next += 1;
        } else {
            growth += p[i] * cash.ln();
        }
    }
    Ok(growth)
}

/// Solves the full problem with one greedy pass.
///
/// Outcomes are sorted by edge ratio descending (ties by ascending original
/// index) and accepted while `r_{k+1} > c_k`, starting from `c_0 = 1`. The
/// first `r_{k+1} <= c_k` stops the pass; accepting everything pins the cash
/// level to exactly 0. Stakes come from the plus-part formula at the final
/// cash level, in original outcome order.
pub fn greedy_solve(event: &MarketEvent) -> KellySolution {
    let n = event.len();
    let p = event.probabilities();
    let q = event.state_prices();

    let mut order: Vec<(usize, f64)> = (0..n).map(|i| (i, p[i] / q[i])).collect();
    order.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut trace = Vec::new();
    let mut cash = 1.0;
    let mut p_sum = CompensatedSum::default();
    let mut q_sum = CompensatedSum::default();
    for (k, &(index, ratio)) in order.iter().enumerate() {
        if ratio > cash {
            p_sum.add(p[index]);
            q_sum.add(q[index]);
            let next = if k + 1 == n {
                0.0
            } else {
                // Accepting k+1 keeps Q_{k+1} < 1, so the division is safe
                // and the cash level strictly drops.
                p_sum.complement() / q_sum.complement()
            };
            debug_assert!(next.is_finite() && (0.0..cash).contains(&next));
            trace.push(GreedyStep {
                index,
                ratio,
                cash_before: cash,
                accepted: true,
                cash_after: Some(next),
            });
            cash = next;
        } else {
            trace.push(GreedyStep {
                index,
                ratio,
                cash_before: cash,
                accepted: false,
                cash_after: None,
            });
            break;
        }
    }

    let stakes: Vec<f64> = (0..n).map(|i| (p[i] - cash * q[i]).max(0.0)).collect();
    let wealth = WealthVector::new((0..n).map(|i| (p[i] / q[i]).max(cash)).collect());
    let active_set: Vec<usize> = (0..n).filter(|&i| stakes[i] > 0.0).collect();
    let boundary_ties: Vec<usize> = (0..n)
        .filter(|&i| (p[i] / q[i] - cash).abs() <= BOUNDARY_TIE_TOLERANCE * cash.max(1.0))
        .collect();

    let strategy = Strategy::new(cash, stakes.clone()).expect("greedy solution is feasible");
    let growth = event
        .expected_log_growth(&strategy)
        .expect("greedy solution has positive wealth in every state");

    KellySolution {
        cash,
        stakes,
        wealth,
        active_set,
        growth,
        trace,
        boundary_ties,
    }
}

/// The one-bet shortcut for a binary event in state-price form.
///
/// Returns `(cash, stake_1)`. With an edge on outcome 1 (`p1 > q1`) this is
/// `((1 - p1) / (1 - q1), (p1 - q1) / (1 - q1))`; without one it is `(1, 0)`.
pub fn binary_closed_form(p1: f64, q1: f64) -> Result<(f64, f64), SolverError> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(SolverError::ParameterOutOfRange {
            name: "p1",
            value: p1,
        });
    }
    if !(q1 > 0.0 && q1 < 1.0) {
        return Err(SolverError::ParameterOutOfRange {
            name: "q1",
            value: q1,
        });
    }
    if p1 > q1 {
        Ok(((1.0 - p1) / (1.0 - q1), (p1 - q1) / (1.0 - q1)))
    } else {
        Ok((1.0, 0.0))
    }
}

/// Neumaier-compensated running sum. Cash levels divide complements of
/// prefix sums, and a one-ulp error there can flip an exact boundary tie
/// into a spurious acceptance; the compensation keeps prefix sums correctly
/// rounded regardless of how many outcomes have been accepted.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let total = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - total) + value;
        } else {
            self.compensation += (value - total) + self.sum;
        }
        self.sum = total;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// `1 - sum`, applying the compensation after the exact-prone subtraction.
    pub(crate) fn complement(&self) -> f64 {
        (1.0 - self.sum) - self.compensation
    }
}

/// Sorts, dedupes, and bounds-checks a support request.
fn normalize_support(support: &[usize], outcomes: usize) -> Result<Vec<usize>, SolverError> {
    if support.is_empty() {
        return Err(SolverError::EmptySupport);
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    for &i in &support {
        if i >= outcomes {
            return Err(SolverError::SupportIndexOutOfRange { index: i, outcomes });
        }
    }
    Ok(support)
}
