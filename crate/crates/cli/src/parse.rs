//! Source-spec grammar and data-file readers.
//!
//! Source specs are `name` or `name:key=values` with `,` separating numbers
//! and `;` separating matrix rows:
//!
//! ```text
//! fair-coin
//! uniform
//! iid:p=0.3,0.7
//! markov:rows=0.9,0.1;0.2,0.8
//! ar1:rho=0.5
//! periodic:01
//! ```
//!
//! Data files hold one record per line; blank lines and lines starting with
//! `#` are skipped, so a command's own output can be fed back in. Symbol
//! files may pack several whitespace-separated integers on one line.

use std::fs;
use std::path::Path;

use entroscope_core::measure::{Alphabet, Symbol, SymbolSequence};
use entroscope_core::sources::SourceModel;

use crate::CliError;

const GRAMMAR: &str =
    "expected fair-coin | uniform | iid:p=P1,P2,.. | markov:rows=R11,R12;R21,R22 | \
     ar1:rho=R | periodic:DIGITS";

pub fn parse_source(spec: &str) -> Result<SourceModel, CliError> {
    let bad = |msg: String| CliError::Config(format!("source `{spec}`: {msg}"));
    let (name, body) = match spec.split_once(':') {
        Some((n, b)) => (n, Some(b)),
        None => (spec, None),
    };
    match (name, body) {
        ("fair-coin", None) => Ok(SourceModel::fair_coin()),
        ("uniform", None) => Ok(SourceModel::IidUniformReal),
        ("iid", Some(body)) => {
            let probs = number_list(field(body, "p").map_err(&bad)?).map_err(&bad)?;
            SourceModel::iid_categorical(probs).map_err(|e| bad(e.to_string()))
        }
        ("markov", Some(body)) => {
            let rows: Vec<Vec<f64>> = field(body, "rows")
                .map_err(&bad)?
                .split(';')
                .map(number_list)
                .collect::<Result<_, _>>()
                .map_err(&bad)?;
            let m = rows.first().map_or(0, Vec::len) as u32;
            SourceModel::markov(m, rows).map_err(|e| bad(e.to_string()))
        }
        ("ar1", Some(body)) => {
            let rho: f64 = field(body, "rho")
                .map_err(&bad)?
                .parse()
                .map_err(|_| bad("rho is not a number".into()))?;
            SourceModel::gaussian_ar1(rho).map_err(|e| bad(e.to_string()))
        }
        ("periodic", Some(body)) => {
            let pattern: Vec<Symbol> = body
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| bad("pattern must be digits".into()))
                })
                .collect::<Result<_, _>>()?;
            SourceModel::periodic(pattern).map_err(|e| bad(e.to_string()))
        }
        _ => Err(bad(GRAMMAR.into())),
    }
}

/// Extracts the value of a single `key=value` body, insisting on the key name.
fn field<'a>(body: &'a str, key: &str) -> Result<&'a str, String> {
    match body.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(format!("expected `{key}=..`")),
    }
}

fn number_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect()
}

fn read_lines(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Reads whitespace-separated symbols, validating each against the alphabet.
pub fn read_symbols(path: &Path, alphabet: Alphabet) -> Result<SymbolSequence, CliError> {
    let text = read_lines(path)?;
    let mut seq = SymbolSequence::empty(alphabet);
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            let sym: Symbol = tok.parse().map_err(|_| CliError::Data {
                line: idx + 1,
                msg: format!("`{tok}` is not a symbol"),
            })?;
            if !alphabet.contains(sym) {
                return Err(CliError::Data {
                    line: idx + 1,
                    msg: format!("symbol {sym} outside alphabet of size {}", alphabet.size()),
                });
            }
            seq.push(sym);
        }
    }
    Ok(seq)
}

/// Reads one real number per line.
pub fn read_reals(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_lines(path)?;
    let mut xs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| CliError::Data {
            line: idx + 1,
            msg: format!("`{line}` is not a number"),
        })?;
        xs.push(x);
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_round_trips() {
        assert!(parse_source("fair-coin").is_ok());
        assert!(parse_source("uniform").is_ok());
        assert!(parse_source("iid:p=0.3,0.7").is_ok());
        assert!(parse_source("markov:rows=0.9,0.1;0.2,0.8").is_ok());
        assert!(parse_source("ar1:rho=0.5").is_ok());
        assert!(parse_source("periodic:0110").is_ok());
    }

    #[test]
    fn bad_specs_are_config_errors() {
        for spec in [
            "coin",
            "iid",
            "iid:q=0.5,0.5",
            "ar1:rho=x",
            "periodic:ab",
            "markov:rows=2",
        ] {
            assert!(
                matches!(parse_source(spec), Err(CliError::Config(_))),
                "{spec}"
            );
        }
    }
}
