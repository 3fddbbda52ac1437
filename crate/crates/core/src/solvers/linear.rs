//! Linear-programming designers: constrained accuracy and Rawls max-min.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::lp::{LinearProgram, LpError, Relation};
use super::{free_coordinate_order, group_coefficients, population_coefficients};
use super::{Diagnostics, SolveResult, SolveStatus, SolverConfig};
use crate::constraints::{constraint_rows, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{induce_joint, Policy, PopulationDistribution};
use crate::objectives::{expected_payoff, social_welfare, PayoffTable, PhiFunction};

fn simplex_rows(lp: &mut LinearProgram, nx: usize, nd: usize) {
    let n = lp.num_vars();
    for x in 0..nx {
        let mut c = vec![0.0; n];
        c[x * nd..(x + 1) * nd].fill(1.0);
        lp.add_row(c, Relation::Eq, 1.0);
    }
}

fn lp_failure(e: LpError) -> Error {
    match e {
        LpError::PivotLimit { pivots } => Error::Solver {
            message: "pivot limit reached".into(),
            iterations: 0,
            pivots,
        },
        other => Error::Solver {
            message: format!("linear program is {other:?}"),
            iterations: 0,
            pivots: 0,
        },
    }
}

/// Maximizes E_P[v(D, Y)] over policies whose induced joint satisfies `c`.
pub fn solve_constrained(
    mu: &PopulationDistribution,
    v: &PayoffTable,
    c: &FairnessConstraint,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let a = mu.alphabets();
    v.ensure_matches(a)?;
    let (nx, nd) = (a.nx(), a.nd());
    let mut lp = LinearProgram::new(nx * nd);
    lp.set_objective(population_coefficients(mu, v));
    simplex_rows(&mut lp, nx, nd);
    for row in constraint_rows(mu, c)?.rows {
        lp.add_row(row.coefficients, row.relation, row.rhs);
    }
    let order = free_coordinate_order(nx, nd);
    let (policy, status, pivots) = match lp.solve_lexicographic(&order, cfg.max_iterations) {
        Ok(sol) => (Policy::from_solver(a, &sol.x)?, SolveStatus::Optimal, sol.pivots),
        Err(LpError::Infeasible) => (
            Policy::deterministic(a.clone(), |_| 0)?,
            SolveStatus::FallbackFeasible,
            0,
        ),
        Err(e) => return Err(lp_failure(e)),
    };
    let objective_value = expected_payoff(&induce_joint(mu, &policy)?, v)?;
    Ok(SolveResult {
        policy,
        objective_value,
        status,
        diagnostics: Diagnostics {
            pivots: Some(pivots),
            ..Diagnostics::default()
        },
    })
}

/// Maximizes min_g U(P_g) over positive-probability groups as an LP with an
/// epigraph variable `t ≥ min u`.
pub fn solve_rawls(mu: &PopulationDistribution, u: &PayoffTable, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let a = mu.alphabets();
    u.ensure_matches(a)?;
    let (nx, nd) = (a.nx(), a.nd());
    let n = nx * nd;
    let floor = u.min_value();
    let mut lp = LinearProgram::new(n + 1);
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    lp.set_objective(objective);
    simplex_rows(&mut lp, nx, nd);
    for (_, _, cg) in group_coefficients(mu, u) {
        let mut row: Vec<f64> = cg;
        row.push(-1.0);
        lp.add_row(row, Relation::Ge, floor);
    }
    let order = free_coordinate_order(nx, nd);
    let sol = lp.solve_lexicographic(&order, cfg.max_iterations).map_err(lp_failure)?;
    let policy = Policy::from_solver(a, &sol.x[..n])?;
    let objective_value = social_welfare(&induce_joint(mu, &policy)?, u, &PhiFunction::RawlsLimit)?;
    Ok(SolveResult {
        policy,
        objective_value,
        status: SolveStatus::Optimal,
        diagnostics: Diagnostics {
            pivots: Some(sol.pivots),
            ..Diagnostics::default()
        },
    })
}

/// Utilitarian welfare is linear: the same LP as an unconstrained designer.
pub(crate) fn solve_linear_welfare(
    mu: &PopulationDistribution,
    u: &PayoffTable,
    phi: &PhiFunction,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let a = mu.alphabets();
    u.ensure_matches(a)?;
    let (nx, nd) = (a.nx(), a.nd());
    let mut lp = LinearProgram::new(nx * nd);
    lp.set_objective(population_coefficients(mu, u));
    simplex_rows(&mut lp, nx, nd);
    let sol = lp
        .solve_lexicographic(&free_coordinate_order(nx, nd), cfg.max_iterations)
        .map_err(lp_failure)?;
    let policy = Policy::from_solver(a, &sol.x)?;
    let objective_value = social_welfare(&induce_joint(mu, &policy)?, u, phi)?;
    Ok(SolveResult {
        policy,
        objective_value,
        status: SolveStatus::Optimal,
        diagnostics: Diagnostics {
            pivots: Some(sol.pivots),
            ..Diagnostics::default()
        },
    })
}

/// Lexicographically smallest policy with `U_g(a) ≥ floors[g]` for every
/// positive group. Any such policy is at least as good as the one that
/// produced the floors, because φ is increasing.
pub(crate) fn lexicographic_dominating(
    mu: &PopulationDistribution,
    groups: &[(usize, f64, Vec<f64>)],
    floors: &[f64],
    cfg: &SolverConfig,
) -> core::result::Result<(Vec<f64>, usize), LpError> {
    let a = mu.alphabets();
    let (nx, nd) = (a.nx(), a.nd());
    let mut lp = LinearProgram::new(nx * nd);
    simplex_rows(&mut lp, nx, nd);
    for ((_, _, cg), &floor) in groups.iter().zip(floors) {
        lp.add_row(cg.clone(), Relation::Ge, floor);
    }
    let sol = lp.solve_lexicographic(&free_coordinate_order(nx, nd), cfg.max_iterations)?;
    Ok((sol.x, sol.pivots))
}
