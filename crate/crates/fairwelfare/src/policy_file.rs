//! Policy files: `{"rows": {"<x>": {"<d>": p, ...}, ...}}`.
//!
//! Every covariate needs a row. Decisions left out of a row get probability
//! 0, and each row must sum to 1 within the scenario mass tolerance.

use std::collections::BTreeMap;

use fairwelfare_core::model::{AlphabetSet, Alphabets, Policy};
use serde::{Deserialize, Serialize};

use crate::scenario::{Issue, ScenarioError, MASS_TOLERANCE};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn parse_policy(text: &str, alphabets: &Alphabets) -> Result<Policy, ScenarioError> {
    let raw: RawPolicy = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let nd = alphabets.nd();
    let mut rows = vec![0.0; alphabets.nx() * nd];
    let mut issues = Vec::new();
    let mut issue = |path: String, message: String| issues.push(Issue { path, message });
    for (x_label, row) in &raw.rows {
        let Ok(x) = alphabets.index_of(AlphabetSet::Covariates, x_label) else {
            issue(
                format!("rows.{x_label}"),
                format!("covariate label {x_label:?} is not declared"),
            );
            continue;
        };
        for (d_label, &p) in row {
            let path = format!("rows.{x_label}.{d_label}");
            let Ok(d) = alphabets.index_of(AlphabetSet::Decisions, d_label) else {
                issue(path, format!("decision label {d_label:?} is not declared"));
                continue;
            };
            if !(p.is_finite() && p >= 0.0) {
                issue(path, format!("probability must be finite and nonnegative, got {p}"));
                continue;
            }
            rows[x * nd + d] = p;
        }
        let total: f64 = rows[x * nd..(x + 1) * nd].iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            issue(
                format!("rows.{x_label}"),
                format!("probabilities sum to {total}, not 1"),
            );
        }
    }
    for x_label in alphabets.covariates() {
        if !raw.rows.contains_key(x_label) {
            issue("rows".into(), format!("no row for covariate {x_label:?}"));
        }
    }
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid(issues));
    }
    Policy::with_tolerance(alphabets.clone(), rows, MASS_TOLERANCE).map_err(|e| {
        ScenarioError::Invalid(vec![Issue {
            path: "rows".into(),
            message: e.to_string(),
        }])
    })
}

/// Writes `policy` in the format read by [`parse_policy`].
pub fn policy_text(policy: &Policy) -> String {
    let a = policy.alphabets();
    let rows = a
        .covariates()
        .iter()
        .enumerate()
        .map(|(x, xl)| {
            let row = a
                .decisions()
                .iter()
                .enumerate()
                .map(|(d, dl)| (dl.clone(), policy.prob(x, d)))
                .collect();
            (xl.clone(), row)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&RawPolicy { rows }).expect("policy serializes");
    text.push('\n');
    text
}
