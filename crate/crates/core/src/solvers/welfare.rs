//! Projected-gradient ascent for concave group welfare.
//!
//! Group utilities are linear in the policy, `U_g(a) = c_g · a`, so the
//! objective `Σ_g p_g φ(c_g · a)` is concave over the product of simplices.
//! For `negpow:γ` the ascent runs on the certainty equivalent
//! `(Σ_g p_g U_g^{-γ})^{-1/γ}` instead: a monotone transform of the welfare
//! with the same maximizers that stays finite for large γ.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::linear::{lexicographic_dominating, solve_linear_welfare, solve_rawls};
use super::projection::project_onto_simplex;
use super::{group_coefficients, Diagnostics, SolveResult, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{induce_joint, Policy, PopulationDistribution};
use crate::objectives::{negpow_mean, social_welfare, PayoffTable, PhiFunction};

const ARMIJO_SIGMA: f64 = 1e-4;
const MAX_SHRINKS: usize = 40;
const SHRINK: f64 = 0.5;
/// Each line search after the first starts at `GROW` times the last
/// accepted step, capped at `MAX_STEP`.
const GROW: f64 = 2.0;
const MAX_STEP: f64 = 1e8;
/// Utilities closer than this to the power family's boundary use the
/// derivative at the guard instead of an infinite one.
const DERIVATIVE_GUARD: f64 = 1e-12;
/// Ascent stops once this many iterations together gain less than
/// `STALL_GAIN` (relative): the objective is flat to working precision.
const STALL_WINDOW: usize = 100;
const STALL_GAIN: f64 = 1e-13;

struct WelfareProblem {
    nx: usize,
    nd: usize,
    groups: Vec<(usize, f64, Vec<f64>)>,
    phi: PhiFunction,
}

struct Ascent {
    policy: Vec<f64>,
    value: f64,
    iterations: usize,
    gradient_norm: f64,
    converged: bool,
}

impl WelfareProblem {
    fn utilities(&self, a: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|(_, _, c)| c.iter().zip(a).map(|(ci, ai)| ci * ai).sum())
            .collect()
    }

    /// Objective being ascended; `None` outside φ's domain.
    fn value(&self, utilities: &[f64]) -> Option<f64> {
        if utilities.iter().any(|&u| !self.phi.admits(u)) {
            return None;
        }
        match self.phi {
            PhiFunction::NegativePower { gamma } => {
                let pairs: Vec<(f64, f64)> = self
                    .groups
                    .iter()
                    .zip(utilities)
                    .map(|((_, p, _), &u)| (*p, u))
                    .collect();
                Some(negpow_mean(&pairs, gamma))
            }
            _ => {
                let mut total = 0.0;
                for ((_, p, _), &u) in self.groups.iter().zip(utilities) {
                    total += p * self.phi.evaluate(u).ok()?;
                }
                Some(total)
            }
        }
    }

    fn gradient(&self, utilities: &[f64], value: f64) -> Vec<f64> {
        let mut grad = vec![0.0; self.nx * self.nd];
        for ((_, p, c), &u) in self.groups.iter().zip(utilities) {
            let weight = match self.phi {
                PhiFunction::NegativePower { gamma } => {
                    p * libm::exp((gamma + 1.0) * (libm::log(value) - libm::log(u)))
                }
                PhiFunction::Power { .. } => p * self.phi.derivative(u.max(DERIVATIVE_GUARD)).unwrap_or(0.0),
                _ => p * self.phi.derivative(u).unwrap_or(0.0),
            };
            for (g, ci) in grad.iter_mut().zip(c) {
                *g += weight * ci;
            }
        }
        grad
    }

    fn project(&self, a: &mut [f64]) {
        for row in a.chunks_mut(self.nd) {
            project_onto_simplex(row);
        }
    }

    fn ascend(&self, start: Vec<f64>, cfg: &SolverConfig) -> Option<Ascent> {
        let mut a = start;
        let mut utilities = self.utilities(&a);
        let mut value = self.value(&utilities)?;
        let mut candidate = vec![0.0; a.len()];
        let mut gradient_norm = f64::INFINITY;
        let mut checkpoint = value;
        let mut initial_step = 1.0;
        for iteration in 0..cfg.max_iterations {
            if iteration > 0 && iteration % STALL_WINDOW == 0 {
                if value - checkpoint <= STALL_GAIN * value.abs().max(1.0) {
                    return Some(Ascent {
                        policy: a,
                        value,
                        iterations: iteration,
                        gradient_norm,
                        converged: true,
                    });
                }
                checkpoint = value;
            }
            let grad = self.gradient(&utilities, value);

            candidate
                .iter_mut()
                .zip(a.iter().zip(&grad))
                .for_each(|(c, (ai, gi))| *c = ai + gi);
            self.project(&mut candidate);
            gradient_norm = libm::sqrt(a.iter().zip(&candidate).map(|(x, y)| (x - y) * (x - y)).sum::<f64>());
            if gradient_norm < cfg.gradient_tolerance {
                return Some(Ascent {
                    policy: a,
                    value,
                    iterations: iteration,
                    gradient_norm,
                    converged: true,
                });
            }

            let mut step = initial_step;
            let mut accepted = false;
            for _ in 0..=MAX_SHRINKS {
                candidate
                    .iter_mut()
                    .zip(a.iter().zip(&grad))
                    .for_each(|(c, (ai, gi))| *c = ai + step * gi);
                self.project(&mut candidate);
                let cand_u = self.utilities(&candidate);
                if let Some(cand_value) = self.value(&cand_u) {
                    let predicted: f64 = grad
                        .iter()
                        .zip(candidate.iter().zip(&a))
                        .map(|(g, (c, ai))| g * (c - ai))
                        .sum();
                    if cand_value >= value + ARMIJO_SIGMA * predicted {
                        a.copy_from_slice(&candidate);
                        utilities = cand_u;
                        value = cand_value;
                        accepted = true;
                        initial_step = (step * GROW).min(MAX_STEP);
                        break;
                    }
                }
                step *= SHRINK;
            }
            if !accepted {
                // No step of any admissible length improves the objective:
                // the iterate is stationary to working precision.
                return Some(Ascent {
                    policy: a,
                    value,
                    iterations: iteration,
                    gradient_norm,
                    converged: true,
                });
            }
        }
        Some(Ascent {
            policy: a,
            value,
            iterations: cfg.max_iterations,
            gradient_norm,
            converged: false,
        })
    }
}

/// Barycenter first, then `multi_starts − 1` points drawn uniformly from the
/// product of simplices.
fn starting_points(nx: usize, nd: usize, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![vec![1.0 / nd as f64; nx * nd]];
    for _ in 1..cfg.multi_starts {
        let mut point = Vec::with_capacity(nx * nd);
        for _ in 0..nx {
            let row: Vec<f64> = (0..nd).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = row.iter().sum();
            point.extend(row.iter().map(|v| v / total));
        }
        starts.push(point);
    }
    starts
}

/// Maximizes Σ_g p_g φ(U(P_g)) over policies.
///
/// Linear φ and the Rawls limit are solved exactly as linear programs.
/// Otherwise projected-gradient ascent (Armijo backtracking, halving up to
/// 40 times, from step 1 and then from twice the last accepted step) runs
/// from every start; the best end point is then
/// replaced by the lexicographically smallest policy whose group utilities
/// all weakly exceed it.
pub fn solve_social_welfare(
    mu: &PopulationDistribution,
    u: &PayoffTable,
    phi: &PhiFunction,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let alphabets = mu.alphabets();
    u.ensure_matches(alphabets)?;
    if phi.is_rawls() {
        return solve_rawls(mu, u, cfg);
    }
    if phi.is_linear() {
        return solve_linear_welfare(mu, u, phi, cfg);
    }
    let problem = WelfareProblem {
        nx: alphabets.nx(),
        nd: alphabets.nd(),
        groups: group_coefficients(mu, u),
        phi: *phi,
    };

    let starts = starting_points(problem.nx, problem.nd, cfg);
    let mut best: Option<(usize, Ascent)> = None;
    let mut any_converged = false;
    let mut first_out_of_domain = None;
    for (index, start) in starts.into_iter().enumerate() {
        let utilities = problem.utilities(&start);
        let Some(run) = problem.ascend(start, cfg) else {
            if first_out_of_domain.is_none() {
                first_out_of_domain = utilities
                    .iter()
                    .zip(&problem.groups)
                    .find(|(&v, _)| !phi.admits(v))
                    .map(|(&v, (g, _, _))| (v, *g));
            }
            continue;
        };
        any_converged |= run.converged;
        let better = match &best {
            None => true,
            Some((_, b)) => run.value > b.value,
        };
        if better {
            best = Some((index, run));
        }
    }
    let Some((winning_start, run)) = best else {
        let (value, g) = first_out_of_domain.unwrap_or((f64::NAN, 0));
        return Err(Error::Domain {
            phi: alloc::string::ToString::to_string(phi),
            value,
            group: Some(alphabets.groups()[g].clone()),
        });
    };
    if !any_converged {
        return Err(Error::Solver {
            message: alloc::format!(
                "projected gradient did not converge (gradient norm {:e})",
                run.gradient_norm
            ),
            iterations: run.iterations,
            pivots: 0,
        });
    }

    let floors: Vec<f64> = problem
        .utilities(&run.policy)
        .iter()
        .map(|v| v - 1e-12 * v.abs().max(1.0))
        .collect();
    let mut raw = run.policy.clone();
    let mut pivots = 0;
    if let Ok((polished, p)) = lexicographic_dominating(mu, &problem.groups, &floors, cfg) {
        pivots = p;
        let polished_value = problem.value(&problem.utilities(&polished));
        if polished_value.is_some_and(|v| v >= run.value - 1e-12 * run.value.abs().max(1.0)) {
            raw = polished;
        }
    }
    let policy = Policy::from_solver(alphabets, &raw)?;
    let objective_value = social_welfare(&induce_joint(mu, &policy)?, u, phi)?;
    Ok(SolveResult {
        policy,
        objective_value,
        status: SolveStatus::Optimal,
        diagnostics: Diagnostics {
            iterations: run.iterations,
            gradient_norm: Some(run.gradient_norm),
            pivots: Some(pivots),
            winning_start: Some(winning_start),
            evaluations: None,
        },
    })
}
