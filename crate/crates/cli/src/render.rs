//! Output shapes: machine-readable JSON structs and human tables.

use serde::Serialize;

use kelly_core::market::MarketEvent;
use kelly_core::oracle::{OracleMethod, OracleReport};
use kelly_core::sim::SimulationResult;
use kelly_core::solver::{GreedyStep, KellySolution};

/// Formats a number with at least ten significant digits, switching to
/// scientific notation outside ordinary magnitudes.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..13).contains(&magnitude) {
        return format!("{x:.9e}");
    }
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Serialize)]
pub struct SolveOutput<'a> {
    pub labels: &'a [String],
    pub cash: f64,
    pub stakes: &'a [f64],
    pub wealth: &'a [f64],
    pub edge_ratios: Vec<f64>,
    pub active_set: &'a [usize],
    pub growth: f64,
    pub trace: &'a [GreedyStep],
    pub boundary_ties: &'a [usize],
}

impl<'a> SolveOutput<'a> {
    pub fn new(event: &'a MarketEvent, solution: &'a KellySolution) -> Self {
        Self {
            labels: event.labels(),
            cash: solution.cash,
            stakes: &solution.stakes,
            wealth: solution.wealth.as_slice(),
            edge_ratios: event.edge_ratios(),
            active_set: &solution.active_set,
            growth: solution.growth,
            trace: &solution.trace,
            boundary_ties: &solution.boundary_ties,
        }
    }
}

#[derive(Serialize)]
pub struct TraceRow<'a> {
    pub index: usize,
    pub label: &'a str,
    pub ratio: f64,
    pub cash_before: f64,
    pub accepted: bool,
    pub cash_after: Option<f64>,
}

#[derive(Serialize)]
pub struct TraceOutput<'a> {
    pub steps: Vec<TraceRow<'a>>,
}

impl<'a> TraceOutput<'a> {
    pub fn new(event: &'a MarketEvent, solution: &'a KellySolution) -> Self {
        let steps = solution
            .trace
            .iter()
            .map(|step| TraceRow {
                index: step.index,
                label: &event.labels()[step.index],
                ratio: step.ratio,
                cash_before: step.cash_before,
                accepted: step.accepted,
                cash_after: step.cash_after,
            })
            .collect();
        Self { steps }
    }
}

#[derive(Serialize)]
pub struct CheckOutput {
    pub method: OracleMethod,
    pub solver_growth: f64,
    pub oracle_growth: f64,
    pub max_wealth_deviation: f64,
    pub growth_tolerance: f64,
    pub pass: bool,
}

impl CheckOutput {
    pub fn new(report: &OracleReport, growth_tolerance: f64, pass: bool) -> Self {
        Self {
            method: report.method,
            solver_growth: report.solver_growth,
            oracle_growth: report.best_growth,
            max_wealth_deviation: report.max_wealth_deviation,
            growth_tolerance,
            pass,
        }
    }
}

pub fn print_solve_table(event: &MarketEvent, solution: &KellySolution) {
    let ratios = event.edge_ratios();
    println!(
        "market: {} outcomes, overround {}",
        event.len(),
        sig(event.overround())
    );
    println!(
        "{:<16} {:>16} {:>16} {:>16}  active",
        "outcome", "stake", "wealth", "edge ratio"
    );
    for (i, label) in event.labels().iter().enumerate() {
        println!(
            "{:<16} {:>16} {:>16} {:>16}  {}",
            label,
            sig(solution.stakes[i]),
            sig(solution.wealth[i]),
            sig(ratios[i]),
            if solution.active_set.contains(&i) {
                "yes"
            } else {
                "no"
            }
        );
    }
    println!("cash: {}", sig(solution.cash));
    println!("growth: {} nats", sig(solution.growth));
    for &i in &solution.boundary_ties {
        println!(
            "note: outcome {} sits exactly on the cash cutoff; the stake split is not unique",
            event.labels()[i]
        );
    }
}

pub fn print_trace_table(event: &MarketEvent, solution: &KellySolution) {
    println!(
        "{:>4} {:<16} {:>16} {:>16}  {:<8} cash after",
        "#", "outcome", "edge ratio", "cash before", "decision"
    );
    for step in &solution.trace {
        let decision = if step.accepted { "ACCEPT" } else { "STOP" };
        let after = step.cash_after.map(sig).unwrap_or_default();
        println!(
            "{:>4} {:<16} {:>16} {:>16}  {:<8} {}",
            step.index + 1,
            event.labels()[step.index],
            sig(step.ratio),
            sig(step.cash_before),
            decision,
            after
        );
    }
}

pub fn print_simulation(result: &SimulationResult) {
    println!("trials: {}", result.trials);
    println!("seed: {}", result.seed);
    println!("analytic growth: {} nats", sig(result.analytic_growth));
    println!("sample mean: {} nats", sig(result.mean_log_wealth));
    println!("std error: {}", sig(result.std_error));
}

pub fn print_check(output: &CheckOutput) {
    println!("method: {}", output.method);
    println!("solver growth: {}", sig(output.solver_growth));
    println!("oracle growth: {}", sig(output.oracle_growth));
    println!("max wealth deviation: {}", sig(output.max_wealth_deviation));
    println!("growth tolerance: {}", sig(output.growth_tolerance));
    println!("result: {}", if output.pass { "PASS" } else { "FAIL" });
}
