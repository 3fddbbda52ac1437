//! Optimization engines for the two designers.
//!
//! Policies are optimized over dense variables `a(d | x)`, `x`-major. The
//! constrained designer and the Rawls max-min designer are linear programs;
//! concave social welfare is maximized by projected-gradient ascent. A grid
//! oracle enumerates quantized policies to check both independently.
//!
//! Ties are broken toward the lexicographically smallest vector of free
//! coordinates (every decision but the first, row by row), i.e. toward
//! earlier decisions in alphabet order.

mod grid;
mod linear;
pub mod lp;
mod projection;
mod threshold;
mod welfare;

pub use grid::{
    accuracy_grid_bound, constrained_objective, grid_oracle, grid_quantization, grid_size, welfare_grid_bound,
    welfare_objective, GRID_EVALUATION_CAP,
};
pub use linear::{solve_constrained, solve_rawls};
pub use projection::project_onto_simplex;
pub use threshold::divergence_threshold;
pub use welfare::solve_social_welfare;

use alloc::format;
use alloc::vec::Vec;

use crate::constraints::{satisfies, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{induce_joint, PopulationDistribution};
use crate::objectives::{expected_payoff, social_welfare, PayoffTable, PhiFunction};

pub use crate::model::Policy;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    /// Grid subdivisions per simplex coordinate for the oracle.
    pub grid_resolution: usize,
    /// Projected-gradient norm below which ascent stops.
    pub gradient_tolerance: f64,
    /// Ascent iterations per start; also the LP pivot budget.
    pub max_iterations: usize,
    /// Number of ascent starts (the barycenter plus random points).
    pub multi_starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 50,
            gradient_tolerance: 1e-8,
            max_iterations: 100_000,
            multi_starts: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution == 0
            || self.max_iterations == 0
            || self.multi_starts == 0
            || self.gradient_tolerance.is_nan()
            || self.gradient_tolerance <= 0.0
        {
            return Err(Error::Config(format!("solver settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Optimal,
    /// The constraint system was infeasible; an arbitrary policy was returned.
    FallbackFeasible,
    GridApproximate,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub iterations: usize,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub gradient_norm: Option<f64>,
    pub pivots: Option<usize>,
    pub winning_start: Option<usize>,
    pub evaluations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveResult {
    pub policy: Policy,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub objective_value: f64,
    pub status: SolveStatus,
    pub diagnostics: Diagnostics,
}

/// One of the two designers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DesignerSpec {
    /// Maximize E[v(D, Y)] subject to a fairness constraint.
    ConstrainedOptimization {
        accuracy: PayoffTable,
        constraint: FairnessConstraint,
    },
    /// Maximize Σ_g p_g φ(U(P_g)).
    SocialWelfare { utility: PayoffTable, phi: PhiFunction },
}

/// Solver objective against the grid oracle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCheck {
    pub resolution: usize,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub solver_objective: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub oracle_objective: f64,
    /// `solver_objective − oracle_objective`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub discrepancy: f64,
    /// Largest discrepancy the quantization argument allows.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub bound: f64,
    /// Constrained designer only: oracle value with ε widened by twice the
    /// grid quantization, which must reach the solver value within `bound`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub widened_oracle_objective: Option<f64>,
    pub within_bound: bool,
}

impl DesignerSpec {
    pub fn solve(&self, mu: &PopulationDistribution, cfg: &SolverConfig) -> Result<SolveResult> {
        match self {
            DesignerSpec::ConstrainedOptimization { accuracy, constraint } => {
                solve_constrained(mu, accuracy, constraint, cfg)
            }
            DesignerSpec::SocialWelfare { utility, phi } => solve_social_welfare(mu, utility, phi, cfg),
        }
    }

    /// The designer's own objective at `policy`; `None` when a constrained
    /// designer's constraint is violated.
    pub fn evaluate(&self, mu: &PopulationDistribution, policy: &Policy) -> Result<Option<f64>> {
        let p = induce_joint(mu, policy)?;
        match self {
            DesignerSpec::ConstrainedOptimization { accuracy, constraint } => Ok(if satisfies(&p, constraint)? {
                Some(expected_payoff(&p, accuracy)?)
            } else {
                None
            }),
            DesignerSpec::SocialWelfare { utility, phi } => Ok(Some(social_welfare(&p, utility, phi)?)),
        }
    }

    /// Compares `result` with exhaustive enumeration at `cfg.grid_resolution`.
    ///
    /// Welfare: `0 ≤ solver − oracle ≤ bound`. Constrained: exact ε-feasible
    /// grid points cannot beat the LP, and widening ε by the quantization
    /// recovers the LP value within `bound`.
    pub fn grid_check(
        &self,
        mu: &PopulationDistribution,
        result: &SolveResult,
        cfg: &SolverConfig,
    ) -> Result<GridCheck> {
        let r = cfg.grid_resolution;
        let nd = mu.alphabets().nd();
        let slack = 1e-9;
        match self {
            DesignerSpec::SocialWelfare { utility, phi } => {
                let oracle = grid_oracle(mu, welfare_objective(mu, utility, phi)?, cfg)?;
                let bound = welfare_grid_bound(utility, phi, nd, r);
                let discrepancy = result.objective_value - oracle.objective_value;
                Ok(GridCheck {
                    resolution: r,
                    solver_objective: result.objective_value,
                    oracle_objective: oracle.objective_value,
                    discrepancy,
                    bound,
                    widened_oracle_objective: None,
                    within_bound: discrepancy >= -slack && discrepancy <= bound + slack,
                })
            }
            DesignerSpec::ConstrainedOptimization { accuracy, constraint } => {
                let tight = grid_oracle(mu, constrained_objective(mu, accuracy, constraint)?, cfg)?;
                let mut widened = constraint.clone();
                widened.epsilon = (constraint.epsilon + 2.0 * grid_quantization(nd, r)).min(1.0);
                let loose = grid_oracle(mu, constrained_objective(mu, accuracy, &widened)?, cfg)?;
                let bound = accuracy_grid_bound(accuracy, nd, r);
                let discrepancy = result.objective_value - tight.objective_value;
                let within_bound =
                    discrepancy >= -slack && loose.objective_value >= result.objective_value - bound - slack;
                Ok(GridCheck {
                    resolution: r,
                    solver_objective: result.objective_value,
                    oracle_objective: tight.objective_value,
                    discrepancy,
                    bound,
                    widened_oracle_objective: Some(loose.objective_value),
                    within_bound,
                })
            }
        }
    }
}

/// `Σ_{y,g} μ(x, y, g) · table(d, y)` at index `x * |D| + d`.
pub(crate) fn population_coefficients(mu: &PopulationDistribution, table: &PayoffTable) -> Vec<f64> {
    let a = mu.alphabets();
    let (nx, ny, ng, nd) = (a.nx(), a.ny(), a.ng(), a.nd());
    let mut c = alloc::vec![0.0; nx * nd];
    for x in 0..nx {
        for y in 0..ny {
            for g in 0..ng {
                let m = mu.mass(x, y, g);
                if m != 0.0 {
                    for d in 0..nd {
                        c[x * nd + d] += m * table.value(d, y);
                    }
                }
            }
        }
    }
    c
}

/// Per positive-probability group: `(g, p_g, c_g)` with
/// `U_g(a) = c_g · a`, `c_g[x * |D| + d] = Σ_y μ(x, y | g) u(d, y)`.
pub(crate) fn group_coefficients(mu: &PopulationDistribution, u: &PayoffTable) -> Vec<(usize, f64, Vec<f64>)> {
    let a = mu.alphabets();
    let (nx, ny, nd) = (a.nx(), a.ny(), a.nd());
    let priors = mu.group_priors();
    mu.positive_groups()
        .into_iter()
        .map(|g| {
            let pg = priors[g];
            let mut c = alloc::vec![0.0; nx * nd];
            for x in 0..nx {
                for y in 0..ny {
                    let m = mu.mass(x, y, g) / pg;
                    if m != 0.0 {
                        for d in 0..nd {
                            c[x * nd + d] += m * u.value(d, y);
                        }
                    }
                }
            }
            (g, pg, c)
        })
        .collect()
}

/// Indices of the free policy coordinates in tie-breaking order.
pub(crate) fn free_coordinate_order(nx: usize, nd: usize) -> Vec<usize> {
    (0..nx).flat_map(|x| (1..nd).map(move |d| x * nd + d)).collect()
}
