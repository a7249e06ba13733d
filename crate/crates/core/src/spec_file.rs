//! Chain spec files.
//!
//! A chain is described in TOML with rows per source state (transposed to
//! the internal column-stochastic convention at ingestion):
//!
//! ```toml
//! states = 2
//! # optional; defaults to the stationary distribution of `transition`
//! initial = [0.6666666666666666, 0.3333333333333333]
//! # row x = distribution of the next state given state x
//! transition = [[0.9, 0.1], [0.2, 0.8]]
//! # optional hidden-observation layer; `symbols` is required with it
//! symbols = 2
//! emission = [[0.7, 0.3], [0.1, 0.9]]
//! ```

use crate::chain::{stationary_distribution, ChainSpec, StochasticMatrix, StochasticVector};
use crate::chain::SUM_TOLERANCE;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    states: usize,
    initial: Option<Vec<f64>>,
    transition: Vec<Vec<f64>>,
    emission: Option<Vec<Vec<f64>>>,
    symbols: Option<usize>,
}

fn validate_rows(name: &str, rows: &[Vec<f64>], count: usize, width: usize) -> Result<()> {
    if rows.len() != count {
        return Err(Error::SpecFile(format!(
            "{name} has {} rows, expected {count}",
            rows.len()
        )));
    }
    for (x, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::SpecFile(format!(
                "{name} row {x} has {} entries, expected {width}",
                row.len()
            )));
        }
        for (y, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::SpecFile(format!(
                    "{name} row {x} entry {y} is {v}, must be a finite nonnegative value"
                )));
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SpecFile(format!(
                "{name} row {x} sums to {sum}, deviation {:.3e} exceeds tolerance {SUM_TOLERANCE:.0e}",
                (sum - 1.0).abs()
            )));
        }
    }
    Ok(())
}

/// Parse and validate a chain spec from TOML text.
pub fn parse_chain_spec(text: &str) -> Result<ChainSpec> {
    let raw: RawSpec =
        toml::from_str(text).map_err(|e| Error::SpecFile(format!("parse error: {e}")))?;
    if raw.states == 0 {
        return Err(Error::SpecFile("states must be positive".into()));
    }
    validate_rows("transition", &raw.transition, raw.states, raw.states)?;
    let transition = StochasticMatrix::from_rows(&raw.transition)?;

    let emission = match (&raw.emission, raw.symbols) {
        (Some(rows), Some(symbols)) => {
            if symbols == 0 {
                return Err(Error::SpecFile("symbols must be positive".into()));
            }
            validate_rows("emission", rows, raw.states, symbols)?;
            Some(StochasticMatrix::from_rows(rows)?)
        }
        (Some(_), None) => {
            return Err(Error::SpecFile(
                "emission given but symbols missing; symbols is required with emission".into(),
            ))
        }
        (None, Some(_)) => {
            return Err(Error::SpecFile(
                "symbols given without emission".into(),
            ))
        }
        (None, None) => None,
    };

    let initial = match raw.initial {
        Some(values) => {
            if values.len() != raw.states {
                return Err(Error::SpecFile(format!(
                    "initial has {} entries, expected {}",
                    values.len(),
                    raw.states
                )));
            }
            StochasticVector::new(values)
                .map_err(|e| Error::SpecFile(format!("initial: {e}")))?
        }
        None => stationary_distribution(&transition)?,
    };

    ChainSpec::new(initial, transition, emission)
}

/// Load a chain spec from a TOML file.
pub fn load_chain_spec(path: impl AsRef<Path>) -> Result<ChainSpec> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_chain_spec(&text)
}
