//! Market file loading: CSV and JSON record formats, stdin support, and
//! friendly line-numbered validation messages.

use std::collections::HashSet;
use std::io::Read;

use serde::Deserialize;

use kelly_core::market::{MarketError, MarketEvent};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    Csv,
    Json,
}

/// One parsed row: label, probability, and the quoted price. The price
/// column is decimal odds by default and state prices under
/// `--state-prices`.
#[derive(Debug, Deserialize)]
struct OutcomeRecord {
    label: String,
    probability: f64,
    decimal_odds: f64,
}

#[derive(Debug, Deserialize)]
struct JsonMarket {
    outcomes: Vec<OutcomeRecord>,
}

/// Reads, parses, and validates a market description. `path` may be `-`
/// for stdin, in which case the format cannot be inferred and `--format`
/// is required.
pub fn load_market(
    path: &str,
    format: Option<InputFormat>,
    state_prices: bool,
) -> Result<MarketEvent, CliError> {
    let text = read_source(path)?;
    let format = format.or_else(|| infer_format(path)).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot infer the input format of '{path}'; pass --format csv or --format json"
        ))
    })?;
    let records = match format {
        InputFormat::Csv => parse_csv(&text)?,
        InputFormat::Json => parse_json(&text)?,
    };
    build_event(records, state_prices)
}

fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|err| CliError::Usage(format!("failed to read stdin: {err}")))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
            .map_err(|err| CliError::Usage(format!("failed to read '{path}': {err}")))
    }
}

fn infer_format(path: &str) -> Option<InputFormat> {
    match std::path::Path::new(path)
        .extension()?
        .to_str()?
        .to_ascii_lowercase()
        .as_str()
    {
        "csv" => Some(InputFormat::Csv),
        "json" => Some(InputFormat::Json),
        _ => None,
    }
}

/// Parses `label,probability,decimal_odds` rows, keeping the source line of
/// each record for error reporting.
fn parse_csv(text: &str) -> Result<Vec<(String, OutcomeRecord)>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|err| CliError::Usage(format!("bad CSV header: {err}")))?
        .clone();
    let expected = ["label", "probability", "decimal_odds"];
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != expected {
        return Err(CliError::Usage(format!(
            "line 1: expected CSV header 'label,probability,decimal_odds', got '{}'",
            found.join(",")
        )));
    }

    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(csv_error)?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(records.len() as u64 + 2);
        let parsed: OutcomeRecord = record
            .deserialize(Some(&headers))
            .map_err(|err| CliError::Usage(format!("line {line}: {}", plain_csv_message(err))))?;
        records.push((format!("line {line}"), parsed));
    }
    Ok(records)
}

fn csv_error(err: csv::Error) -> CliError {
    match err.position() {
        Some(position) => CliError::Usage(format!("line {}: {err}", position.line())),
        None => CliError::Usage(format!("bad CSV input: {err}")),
    }
}

/// The csv crate prefixes deserialize errors with their own position
/// rendering; keep just the field-level message.
fn plain_csv_message(err: csv::Error) -> String {
    match err.into_kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        other => format!("{other:?}"),
    }
}

fn parse_json(text: &str) -> Result<Vec<(String, OutcomeRecord)>, CliError> {
    let market: JsonMarket = serde_json::from_str(text)
        .map_err(|err| CliError::Usage(format!("line {}: {err}", err.line())))?;
    Ok(market
        .outcomes
        .into_iter()
        .enumerate()
        .map(|(i, record)| (format!("outcome {}", i + 1), record))
        .collect())
}

fn build_event(
    records: Vec<(String, OutcomeRecord)>,
    state_prices: bool,
) -> Result<MarketEvent, CliError> {
    let mut seen = HashSet::new();
    for (location, record) in &records {
        if !seen.insert(record.label.as_str()) {
            return Err(CliError::Usage(format!(
                "{location}: duplicate label '{}'",
                record.label
            )));
        }
    }

    let labels: Vec<String> = records.iter().map(|(_, r)| r.label.clone()).collect();
    let probabilities: Vec<f64> = records.iter().map(|(_, r)| r.probability).collect();
    let prices: Vec<f64> = records.iter().map(|(_, r)| r.decimal_odds).collect();
    let result = if state_prices {
        MarketEvent::from_state_prices(labels, probabilities, prices)
    } else {
        MarketEvent::from_decimal_odds(labels, probabilities, prices)
    };
    result.map_err(|err| locate_market_error(err, &records))
}

/// Points the message at the offending input line when the error names an
/// outcome.
fn locate_market_error(err: MarketError, records: &[(String, OutcomeRecord)]) -> CliError {
    let index = match &err {
        MarketError::NonpositiveProbability { index, .. }
        | MarketError::NonpositiveOdds { index, .. }
        | MarketError::NonpositiveStatePrice { index, .. } => Some(*index),
        _ => None,
    };
    match index.and_then(|i| records.get(i)) {
        Some((location, _)) => CliError::Usage(format!("{location}: {err}")),
        None => CliError::Usage(err.to_string()),
    }
}
