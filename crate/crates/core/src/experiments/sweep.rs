//! Random populations, both designers on each, and how often they disagree.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::compare::compare_designers;
use crate::constraints::{ConstraintKind, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{Alphabets, PopulationDistribution};
use crate::objectives::{PayoffRole, PayoffTable, PhiFunction};
use crate::solvers::{DesignerSpec, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepConfig {
    /// `(|X|, |Y|, |G|, |D|)`; labels are `"0"`, `"1"`, ...
    pub sizes: [usize; 4],
    pub count: usize,
    pub seed: u64,
    pub constraint: FairnessConstraint,
    pub phi: PhiFunction,
    /// Defaults to the match indicator `1(d = y)`.
    pub accuracy: Option<PayoffTable>,
    /// Defaults to the match indicator `1(d = y)`.
    pub utility: Option<PayoffTable>,
    /// Verify every solve against the grid oracle.
    pub grid_check: bool,
}

impl SweepConfig {
    /// Exact equalized odds against square-root welfare, match-indicator tables.
    pub fn new(sizes: [usize; 4], count: usize, seed: u64) -> Self {
        Self {
            sizes,
            count,
            seed,
            constraint: FairnessConstraint::new(ConstraintKind::EqualizedOdds, 0.0).expect("epsilon 0 is valid"),
            phi: PhiFunction::Power { exponent: 0.5 },
            accuracy: None,
            utility: None,
            grid_check: false,
        }
    }

    pub fn alphabets(&self) -> Result<Alphabets> {
        if self.sizes.contains(&0) {
            return Err(Error::Config("every alphabet needs at least one label".into()));
        }
        Alphabets::numbered(self.sizes)
    }

    /// Constrained designer first, welfare designer second.
    pub fn designers(&self) -> Result<[DesignerSpec; 2]> {
        let a = self.alphabets()?;
        let table = |t: &Option<PayoffTable>, role| -> Result<PayoffTable> {
            let t = match t {
                Some(t) => t.with_role(role),
                None => PayoffTable::match_indicator(&a, role),
            };
            t.ensure_matches(&a)?;
            Ok(t)
        };
        Ok([
            DesignerSpec::ConstrainedOptimization {
                accuracy: table(&self.accuracy, PayoffRole::Accuracy)?,
                constraint: self.constraint.clone(),
            },
            DesignerSpec::SocialWelfare {
                utility: table(&self.utility, PayoffRole::Utility)?,
                phi: self.phi.validated()?,
            },
        ])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub index: usize,
    pub tv_distance: Option<f64>,
    pub diverged: Option<bool>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub co_accuracy: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub sw_welfare: Option<f64>,
    /// Welfare at the constrained designer's policy.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub sw_welfare_at_co: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub welfare_gap: Option<f64>,
    pub sw_violation: Option<f64>,
    pub co_policy: Vec<f64>,
    pub sw_policy: Vec<f64>,
    pub co_grid_within_bound: Option<bool>,
    pub sw_grid_within_bound: Option<bool>,
    /// Set when solving or checking this population failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepSummary {
    pub count: usize,
    pub solved: usize,
    pub failed: usize,
    pub disagreements: usize,
    /// Disagreements over solved populations; `None` when nothing was solved.
    pub disagreement_rate: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub mean_tv_distance: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub max_welfare_gap: Option<f64>,
    pub grid_check_failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Draws `count` populations from the flat Dirichlet over X × Y × G, in order,
/// from one stream seeded with `seed`.
pub fn sample_populations(sizes: [usize; 4], count: usize, seed: u64) -> Result<Vec<PopulationDistribution>> {
    let alphabets = Alphabets::numbered(sizes)?;
    let n = sizes[0] * sizes[1] * sizes[2];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            PopulationDistribution::new(alphabets.clone(), draws.iter().map(|d| d / total).collect())
        })
        .collect()
}

fn sweep_row(
    index: usize,
    mu: &PopulationDistribution,
    designers: &[DesignerSpec; 2],
    cfg: &SolverConfig,
    grid_check: bool,
) -> Result<SweepRow> {
    let cmp = compare_designers(mu, [&designers[0], &designers[1]], cfg, grid_check)?;
    // Designer 0 is constrained, designer 1 maximizes welfare.
    let at = |designer: usize, policy: usize| &cmp.cross[2 * designer + policy];
    let within = |i: usize| cmp.outcomes[i].grid_check.as_ref().map(|g| g.within_bound);
    Ok(SweepRow {
        index,
        tv_distance: Some(cmp.tv_distance),
        diverged: Some(cmp.diverged),
        co_accuracy: Some(cmp.outcomes[0].result.objective_value),
        sw_welfare: Some(cmp.outcomes[1].result.objective_value),
        sw_welfare_at_co: at(1, 0).welfare,
        welfare_gap: cmp.welfare_gaps[1],
        sw_violation: at(0, 1).violation,
        co_policy: cmp.outcomes[0].result.policy.rows().to_vec(),
        sw_policy: cmp.outcomes[1].result.policy.rows().to_vec(),
        co_grid_within_bound: within(0),
        sw_grid_within_bound: within(1),
        error: None,
    })
}

/// Solves both designers on each sampled population. Failures are recorded
/// on their row and do not stop the sweep.
pub fn disagreement_sweep(sweep: &SweepConfig, cfg: &SolverConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let designers = sweep.designers()?;
    let populations = sample_populations(sweep.sizes, sweep.count, sweep.seed)?;
    let rows: Vec<SweepRow> = populations
        .iter()
        .enumerate()
        .map(|(index, mu)| {
            sweep_row(index, mu, &designers, cfg, sweep.grid_check).unwrap_or_else(|e| SweepRow {
                index,
                error: Some(e.to_string()),
                ..SweepRow::default()
            })
        })
        .collect();
    Ok(SweepReport {
        config: sweep.clone(),
        summary: summarize(&rows),
        rows,
    })
}

fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let solved: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let disagreements = solved.iter().filter(|r| r.diverged == Some(true)).count();
    let n = solved.len();
    let mean = |f: &dyn Fn(&SweepRow) -> Option<f64>| {
        (n > 0).then(|| solved.iter().filter_map(|r| f(r)).sum::<f64>() / n as f64)
    };
    SweepSummary {
        count: rows.len(),
        solved: n,
        failed: rows.len() - n,
        disagreements,
        disagreement_rate: (n > 0).then(|| disagreements as f64 / n as f64),
        mean_tv_distance: mean(&|r| r.tv_distance),
        max_welfare_gap: solved.iter().filter_map(|r| r.welfare_gap).reduce(f64::max),
        grid_check_failures: solved
            .iter()
            .filter(|r| r.co_grid_within_bound == Some(false) || r.sw_grid_within_bound == Some(false))
            .count(),
    }
}
