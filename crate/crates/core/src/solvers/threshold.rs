use alloc::format;

use crate::error::{Error, Result};
use crate::objectives::PayoffTable;

/// Smallest δ* such that every δ ∈ (δ*, 1) makes the two-group construction
/// (X = G, μ(Y = y_j | G = j) = δ) push group 1 toward decision 1 and group 0
/// toward decision 0.
///
/// With `A = u(1, y1) − u(0, y1)` and `B = u(0, y0) − u(1, y0)`, group 1's
/// utility has slope `δA − (1 − δ)B` in q1 and group 0's has slope
/// `(1 − δ)A − δB` in q0. Both signs are right iff `δ / (1 − δ) > max(B/A, A/B)`,
/// so `δ* = r / (1 + r)` with that maximum `r ≥ 1`.
///
/// Decisions are binary; index 0 is "do not treat", index 1 is "treat".
pub fn divergence_threshold(u: &PayoffTable, y0: &str, y1: &str) -> Result<f64> {
    if u.decisions().len() != 2 {
        return Err(Error::Precondition(format!(
            "the construction needs exactly two decisions, got {}",
            u.decisions().len()
        )));
    }
    let find = |label: &str| {
        u.types()
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| Error::Precondition(format!("unknown type label {label:?}")))
    };
    let (i0, i1) = (find(y0)?, find(y1)?);
    let gain = u.value(1, i1) - u.value(0, i1);
    let loss = u.value(0, i0) - u.value(1, i0);
    if !(gain > 0.0 && loss > 0.0) {
        return Err(Error::Precondition(format!(
            "utility is not nontrivial at ({y0}, {y1}): need u(1,{y1}) > u(0,{y1}) and u(1,{y0}) < u(0,{y0})"
        )));
    }
    let r = (loss / gain).max(gain / loss);
    Ok(r / (1.0 + r))
}
