//! Exhaustive enumeration of quantized policies, used as an independent
//! check on the LP and gradient solvers.
//!
//! Every row is restricted to `{k / r : k ∈ ℕ^|D|, Σ k = r}`. Any policy row
//! lies within total variation `⌊|D|/2⌋ / r` of some grid row (round down,
//! then hand the remaining units to the largest remainders), which is what
//! the bounds below are built on.

use alloc::vec;
use alloc::vec::Vec;

use super::{group_coefficients, population_coefficients};
use super::{Diagnostics, SolveResult, SolveStatus, SolverConfig};
use crate::constraints::{ClauseWeights, FairnessConstraint, SATISFACTION_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{Policy, PopulationDistribution};
use crate::objectives::{PayoffTable, PhiFunction};

/// Hard cap on the number of policies the oracle will evaluate.
pub const GRID_EVALUATION_CAP: u64 = 100_000_000;

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of grid policies: `C(r + |D| − 1, |D| − 1)^|X|` (saturating).
pub fn grid_size(nx: usize, nd: usize, resolution: usize) -> u128 {
    let per_row = binomial((resolution + nd - 1) as u128, (nd - 1) as u128).unwrap_or(u128::MAX);
    let mut total: u128 = 1;
    for _ in 0..nx {
        total = total.saturating_mul(per_row);
    }
    total
}

/// Largest TV distance from a policy row to the nearest grid row.
pub fn grid_quantization(nd: usize, resolution: usize) -> f64 {
    (nd / 2) as f64 / resolution as f64
}

/// Bound on `optimum − grid optimum` for expected accuracy.
pub fn accuracy_grid_bound(v: &PayoffTable, nd: usize, resolution: usize) -> f64 {
    (v.max_value() - v.min_value()) * grid_quantization(nd, resolution)
}

/// Bound on `optimum − grid optimum` for welfare: each group utility moves by
/// at most `Δ = range(u) · quantization`, and a concave increasing φ changes
/// by at most `φ(u_min + Δ) − φ(u_min)` over a move of size Δ.
pub fn welfare_grid_bound(u: &PayoffTable, phi: &PhiFunction, nd: usize, resolution: usize) -> f64 {
    let lo = u.min_value();
    let hi = u.max_value();
    let delta = (hi - lo) * grid_quantization(nd, resolution);
    if phi.is_rawls() || phi.is_linear() {
        return delta;
    }
    match (phi.evaluate(lo), phi.evaluate((lo + delta).min(hi))) {
        (Ok(a), Ok(b)) => b - a,
        _ => f64::INFINITY,
    }
}

/// Grid rows of one simplex, ordered lexicographically by their free
/// coordinates (every entry but the first).
fn grid_rows(nd: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn fill(prefix: &mut Vec<usize>, remaining: usize, slots: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            fill(prefix, remaining - k, slots - 1, out);
            prefix.pop();
        }
    }
    let mut free = Vec::new();
    fill(&mut Vec::new(), resolution, nd - 1, &mut free);
    let r = resolution as f64;
    free.into_iter()
        .map(|ks| {
            let first = resolution - ks.iter().sum::<usize>();
            core::iter::once(first).chain(ks).map(|k| k as f64 / r).collect()
        })
        .collect()
}

/// Enumerates every grid policy and returns the best under `objective`
/// (`None` marks an infeasible policy). Ties keep the first policy in
/// lexicographic order of free coordinates.
pub fn grid_oracle<F>(mu: &PopulationDistribution, objective: F, cfg: &SolverConfig) -> Result<SolveResult>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    cfg.validate()?;
    let a = mu.alphabets();
    let (nx, nd) = (a.nx(), a.nd());
    let requested = grid_size(nx, nd, cfg.grid_resolution);
    if requested > GRID_EVALUATION_CAP as u128 {
        return Err(Error::Capacity {
            requested,
            cap: GRID_EVALUATION_CAP,
        });
    }
    let rows = grid_rows(nd, cfg.grid_resolution);
    let mut index = vec![0usize; nx];
    let mut policy = vec![0.0; nx * nd];
    for x in 0..nx {
        policy[x * nd..(x + 1) * nd].copy_from_slice(&rows[0]);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations: u64 = 0;
    loop {
        evaluations += 1;
        if let Some(value) = objective(&policy) {
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, policy.clone()));
            }
        }
        // Odometer with the last covariate fastest.
        let mut x = nx;
        loop {
            if x == 0 {
                let Some((value, raw)) = best else {
                    return Err(Error::Solver {
                        message: "no grid policy is feasible".into(),
                        iterations: evaluations as usize,
                        pivots: 0,
                    });
                };
                return Ok(SolveResult {
                    policy: Policy::with_tolerance(a.clone(), raw, 1e-12)?,
                    objective_value: value,
                    status: SolveStatus::GridApproximate,
                    diagnostics: Diagnostics {
                        evaluations: Some(evaluations),
                        ..Diagnostics::default()
                    },
                });
            }
            x -= 1;
            index[x] += 1;
            if index[x] < rows.len() {
                policy[x * nd..(x + 1) * nd].copy_from_slice(&rows[index[x]]);
                break;
            }
            index[x] = 0;
            policy[x * nd..(x + 1) * nd].copy_from_slice(&rows[0]);
        }
    }
}

/// Σ_g p_g φ(U_g) (or the minimum for the Rawls limit) straight from policy
/// rows; `None` outside φ's domain.
pub fn welfare_objective(
    mu: &PopulationDistribution,
    u: &PayoffTable,
    phi: &PhiFunction,
) -> Result<impl Fn(&[f64]) -> Option<f64>> {
    u.ensure_matches(mu.alphabets())?;
    let groups = group_coefficients(mu, u);
    let phi = *phi;
    Ok(move |rows: &[f64]| {
        let utilities = groups
            .iter()
            .map(|(_, p, c)| (*p, c.iter().zip(rows).map(|(ci, ai)| ci * ai).sum::<f64>()));
        if phi.is_rawls() {
            return Some(utilities.map(|(_, u)| u).fold(f64::INFINITY, f64::min));
        }
        let mut total = 0.0;
        for (p, u) in utilities {
            total += p * phi.evaluate(u).ok()?;
        }
        Some(total)
    })
}

/// Expected accuracy when `c` holds, `None` otherwise (the indicator penalty).
pub fn constrained_objective(
    mu: &PopulationDistribution,
    v: &PayoffTable,
    c: &FairnessConstraint,
) -> Result<impl Fn(&[f64]) -> Option<f64>> {
    v.ensure_matches(mu.alphabets())?;
    let coefficients = population_coefficients(mu, v);
    let weights = ClauseWeights::new(mu, c)?;
    let epsilon = c.epsilon;
    Ok(move |rows: &[f64]| {
        if weights.violation(rows) > epsilon + SATISFACTION_TOLERANCE {
            return None;
        }
        Some(coefficients.iter().zip(rows).map(|(ci, ai)| ci * ai).sum())
    })
}
