use alloc::vec::Vec;

use super::divergence::DISAGREEMENT_TOLERANCE;
use crate::constraints::violation;
use crate::error::{Error, Result};
use crate::model::{induce_joint, PopulationDistribution};
use crate::objectives::social_welfare;
use crate::solvers::{DesignerSpec, GridCheck, SolveResult, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignerOutcome {
    pub designer: DesignerSpec,
    pub result: SolveResult,
    pub grid_check: Option<GridCheck>,
}

/// One designer's view of one policy.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossEvaluation {
    pub designer: usize,
    pub policy: usize,
    /// The designer's objective; `None` if its constraint is violated or
    /// the welfare is undefined at this policy.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub objective: Option<f64>,
    /// Social welfare, for welfare designers; `None` outside φ's domain.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::option"))]
    pub welfare: Option<f64>,
    /// Constraint violation, for constrained designers.
    pub violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub outcomes: Vec<DesignerOutcome>,
    /// Every designer evaluated at every designer's optimal policy.
    pub cross: Vec<CrossEvaluation>,
    pub tv_distance: f64,
    pub diverged: bool,
    /// For each welfare designer: its welfare at its own optimum minus its
    /// welfare at the other designer's optimum.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::vec_option"))]
    pub welfare_gaps: Vec<Option<f64>>,
}

/// Domain errors become `None`; anything else propagates.
fn defined<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves two designers on the same population and evaluates each at both
/// optima.
pub fn compare_designers(
    mu: &PopulationDistribution,
    designers: [&DesignerSpec; 2],
    cfg: &SolverConfig,
    grid_check: bool,
) -> Result<Comparison> {
    let mut outcomes = Vec::with_capacity(2);
    for designer in designers {
        let result = designer.solve(mu, cfg)?;
        let check = if grid_check {
            Some(designer.grid_check(mu, &result, cfg)?)
        } else {
            None
        };
        outcomes.push(DesignerOutcome {
            designer: designer.clone(),
            result,
            grid_check: check,
        });
    }
    let joints = [
        induce_joint(mu, &outcomes[0].result.policy)?,
        induce_joint(mu, &outcomes[1].result.policy)?,
    ];
    let mut cross = Vec::with_capacity(4);
    for (i, designer) in designers.iter().enumerate() {
        for (j, outcome) in outcomes.iter().enumerate() {
            let (welfare, viol) = match designer {
                DesignerSpec::SocialWelfare { utility, phi } => {
                    (defined(social_welfare(&joints[j], utility, phi))?, None)
                }
                DesignerSpec::ConstrainedOptimization { constraint, .. } => {
                    (None, Some(violation(&joints[j], constraint)?))
                }
            };
            cross.push(CrossEvaluation {
                designer: i,
                policy: j,
                objective: defined(designer.evaluate(mu, &outcome.result.policy))?.flatten(),
                welfare,
                violation: viol,
            });
        }
    }
    let welfare_gaps = (0..2)
        .map(|i| {
            // `cross` is designer-major: entry `2 * i + j` is designer i at policy j.
            let own = cross[2 * i + i].welfare?;
            let other = cross[2 * i + (1 - i)].welfare?;
            Some(own - other)
        })
        .collect();
    let tv_distance = joints[0].tv_distance(&joints[1])?;
    Ok(Comparison {
        outcomes,
        cross,
        tv_distance,
        diverged: tv_distance > DISAGREEMENT_TOLERANCE,
        welfare_gaps,
    })
}
