//! A population on which a given welfare designer and a given constrained
//! designer must disagree.

use alloc::format;
use alloc::string::String;
use alloc::vec;

use crate::constraints::{violation, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{induce_joint, Alphabets, Policy, PopulationDistribution};
use crate::objectives::{social_welfare, PayoffRole, PayoffTable, PhiFunction};
use crate::solvers::{divergence_threshold, solve_constrained, solve_social_welfare, SolverConfig};

pub const DEFAULT_MARGIN: f64 = 0.05;
/// Induced joints further apart than this (in TV) count as a disagreement.
pub const DISAGREEMENT_TOLERANCE: f64 = 1e-6;
/// How close the welfare optimum must be to "treat exactly group 1".
const POLICY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DivergenceReport {
    pub mu_constructed: PopulationDistribution,
    /// Type labels `(y0, y1)` on which the utility ranks the decisions oppositely.
    pub witness: (String, String),
    pub threshold: f64,
    pub delta_used: f64,
    pub sw_policy: Policy,
    pub co_policy: Policy,
    /// Welfare at the welfare-optimal and at the constrained-optimal policy.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float::pair"))]
    pub sw_welfare_at_each: (f64, f64),
    pub constraint_violation_of_sw_policy: f64,
    pub tv_distance: f64,
    pub diverged: bool,
}

/// δ above the threshold by `margin`, pulled back to the midpoint of
/// `(δ*, 1)` when that would reach 1.
pub fn divergence_delta(threshold: f64, margin: f64) -> f64 {
    if threshold + margin >= 1.0 {
        0.5 * (threshold + 1.0)
    } else {
        threshold + margin
    }
}

/// Builds X = G = {0, 1} with group `j` of type `y_j` with probability δ,
/// where `(y0, y1)` is the first pair on which `u` ranks the two decisions
/// oppositely and δ clears [`divergence_threshold`] by `margin`. Every
/// group's welfare then rises only by treating group 1 and not group 0,
/// while the (non-vacuous) constraint ties the two treatment rates together.
///
/// The constrained designer maximizes expected `u` itself.
pub fn construct_divergent_population(
    u: &PayoffTable,
    c: &FairnessConstraint,
    phi: &PhiFunction,
    margin: f64,
    cfg: &SolverConfig,
) -> Result<DivergenceReport> {
    cfg.validate()?;
    phi.validated()?;
    if phi.is_rawls() {
        return Err(Error::Precondition(
            "the construction needs a strictly increasing φ; the Rawls limit has no unique optimum here".into(),
        ));
    }
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Precondition(format!("margin must be positive, got {margin}")));
    }
    if c.epsilon >= 1.0 {
        return Err(Error::Precondition(
            "a constraint with epsilon 1 is vacuous; the designers cannot be separated".into(),
        ));
    }
    if u.decisions().len() != 2 {
        return Err(Error::Precondition(format!(
            "the construction needs exactly two decisions, got {}",
            u.decisions().len()
        )));
    }
    let Some((y0, y1)) = u.nontrivial_witness() else {
        return Err(Error::Precondition(
            "utility is trivial: every type ranks the two decisions the same way".into(),
        ));
    };
    let types = u.types();
    let threshold = divergence_threshold(u, &types[y0], &types[y1])?;
    let delta = divergence_delta(threshold, margin);

    let alphabets = Alphabets::new(
        ["0", "1"],
        types.iter().cloned(),
        ["0", "1"],
        u.decisions().iter().cloned(),
    )?;
    let majority = [y0, y1];
    let minority = [y1, y0];
    let mu = PopulationDistribution::from_fn(alphabets.clone(), |x, y, g| {
        if x != g {
            0.0
        } else if y == majority[g] {
            0.5 * delta
        } else if y == minority[g] {
            0.5 * (1.0 - delta)
        } else {
            0.0
        }
    })?;

    let utility = u.with_role(PayoffRole::Utility);
    let accuracy = u.with_role(PayoffRole::Accuracy);
    let sw = solve_social_welfare(&mu, &utility, phi, cfg)?;
    let co = solve_constrained(&mu, &accuracy, c, cfg)?;
    let sw_joint = induce_joint(&mu, &sw.policy)?;
    let co_joint = induce_joint(&mu, &co.policy)?;

    let target = Policy::binary(alphabets, &[0.0, 1.0])?;
    if sw.policy.max_abs_diff(&target) > POLICY_TOLERANCE {
        return Err(Error::InternalConsistency(format!(
            "welfare optimum {:?} is not (q0, q1) = (0, 1) at delta {delta}",
            sw.policy.rows()
        )));
    }
    let sw_violation = violation(&sw_joint, c)?;
    let co_violation = violation(&co_joint, c)?;
    let (q0, q1) = (co.policy.prob(0, 1), co.policy.prob(1, 1));
    if co_violation > c.epsilon + 1e-9 || (c.epsilon == 0.0 && (q0 - q1).abs() > 1e-9) {
        return Err(Error::InternalConsistency(format!(
            "constrained optimum (q0, q1) = ({q0}, {q1}) does not equalize treatment"
        )));
    }
    let tv_distance = sw_joint.tv_distance(&co_joint)?;
    let diverged = tv_distance > DISAGREEMENT_TOLERANCE;
    if !diverged {
        return Err(Error::InternalConsistency(format!(
            "designers agree (TV {tv_distance:e}) on the constructed population"
        )));
    }
    Ok(DivergenceReport {
        witness: (types[y0].clone(), types[y1].clone()),
        threshold,
        delta_used: delta,
        sw_welfare_at_each: (sw.objective_value, social_welfare(&co_joint, &utility, phi)?),
        constraint_violation_of_sw_policy: sw_violation,
        tv_distance,
        diverged,
        mu_constructed: mu,
        sw_policy: sw.policy,
        co_policy: co.policy,
    })
}

/// Nontrivial binary utility tables over types `{"0", "1"}`, all strictly
/// positive so that every φ family is defined on them.
pub fn nontrivial_utility_suite() -> vec::Vec<(&'static str, PayoffTable)> {
    let table = |values: [f64; 4]| {
        PayoffTable::new(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            values.to_vec(),
            PayoffRole::Utility,
        )
        .expect("suite tables are well formed")
    };
    // Values are u(0,0), u(0,1), u(1,0), u(1,1).
    vec![
        ("shifted_match", table([2.0, 1.0, 1.0, 2.0])),
        ("costly_false_positive", table([4.0, 1.0, 1.0, 2.0])),
        ("costly_false_negative", table([1.5, 0.2, 1.0, 3.0])),
        ("treatment_cost", table([1.0, 0.5, 0.6, 1.4])),
        ("reversed_types", table([0.3, 1.2, 1.1, 0.4])),
    ]
}
