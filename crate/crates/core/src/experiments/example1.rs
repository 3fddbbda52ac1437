//! The two-group example: X = G, binary Y and D, `μ(Y = j | G = j) = δ`.

use alloc::format;

use crate::constraints::{satisfies, violation, ConstraintKind, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{induce_joint, Alphabets, Policy, PopulationDistribution};
use crate::objectives::{social_welfare, welfare_certainty_equivalent, PayoffRole, PayoffTable, PhiFunction};
use crate::solvers::{solve_constrained, solve_social_welfare, SolverConfig};

/// `{"0", "1"}` for every variable.
pub fn binary_alphabets() -> Alphabets {
    Alphabets::numbered([2, 2, 2, 2]).expect("binary alphabets are valid")
}

/// Two equally likely groups, the covariate reveals the group, and group `j`
/// has type `j` with probability δ.
pub fn build_example1(delta: f64) -> Result<PopulationDistribution> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::Precondition(format!(
            "delta must lie strictly between 1/2 and 1, got {delta}"
        )));
    }
    PopulationDistribution::from_fn(binary_alphabets(), |x, y, g| match (x == g, y == g) {
        (false, _) => 0.0,
        (true, true) => 0.5 * delta,
        (true, false) => 0.5 * (1.0 - delta),
    })
}

/// Same alphabets, but both groups have type 1 with probability δ.
pub fn build_shared_majority(delta: f64) -> Result<PopulationDistribution> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::Precondition(format!(
            "delta must lie strictly between 1/2 and 1, got {delta}"
        )));
    }
    PopulationDistribution::from_fn(binary_alphabets(), |x, y, g| match (x == g, y == 1) {
        (false, _) => 0.0,
        (true, true) => 0.5 * delta,
        (true, false) => 0.5 * (1.0 - delta),
    })
}

/// Welfare of `(q0, q1)` on the example, written out by hand:
/// `½φ((1−q0)δ + q0(1−δ)) + ½φ(q1δ + (1−q1)(1−δ))`.
pub fn example1_welfare_closed_form(delta: f64, q0: f64, q1: f64, phi: &PhiFunction) -> Result<f64> {
    let u0 = (1.0 - q0) * delta + q0 * (1.0 - delta);
    let u1 = q1 * delta + (1.0 - q1) * (1.0 - delta);
    if phi.is_rawls() {
        return Ok(u0.min(u1));
    }
    Ok(0.5 * phi.evaluate(u0)? + 0.5 * phi.evaluate(u1)?)
}

/// φ at a single utility level; for the Rawls limit the level itself.
fn phi_at(phi: &PhiFunction, u: f64) -> Result<f64> {
    if phi.is_rawls() {
        Ok(u)
    } else {
        phi.evaluate(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Example1Scenario {
    pub delta: f64,
    pub phi: PhiFunction,
    /// Accuracy table of the constrained designer.
    pub accuracy: PayoffTable,
    pub epsilon: f64,
}

impl Example1Scenario {
    /// Match-indicator accuracy, as in the example.
    pub fn new(delta: f64, phi: PhiFunction, epsilon: f64) -> Result<Self> {
        let s = Self {
            delta,
            phi,
            accuracy: PayoffTable::match_indicator(&binary_alphabets(), PayoffRole::Accuracy),
            epsilon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        build_example1(self.delta)?;
        self.phi.validated()?;
        FairnessConstraint::new(ConstraintKind::EqualizedOdds, self.epsilon)?;
        self.accuracy.ensure_matches(&binary_alphabets())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Example1Report {
    pub delta: f64,
    pub phi: PhiFunction,
    pub epsilon: f64,
    /// `(q0, q1)`: probability of treating each group.
    pub sw_policy: [f64; 2],
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub sw_welfare: f64,
    /// φ(δ).
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub sw_welfare_expected: f64,
    pub co_policy: [f64; 2],
    pub co_accuracy: f64,
    /// Social welfare of the constrained designer's policy.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub co_welfare: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub co_welfare_closed_form: f64,
    /// φ(½), an upper bound on `co_welfare` when the constraint binds exactly.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub jensen_bound: f64,
    /// `sw_welfare − co_welfare`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub gap: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub sw_certainty_equivalent: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_float"))]
    pub co_certainty_equivalent: f64,
    /// Equalized-odds violation of the welfare-optimal policy.
    pub violation: f64,
    pub sw_satisfies_constraint: bool,
}

/// Solves both designers on the example and reports the quantities of the
/// worked argument.
pub fn run_example1(s: &Example1Scenario, cfg: &SolverConfig) -> Result<Example1Report> {
    s.validate()?;
    let mu = build_example1(s.delta)?;
    let utility = PayoffTable::match_indicator(mu.alphabets(), PayoffRole::Utility);
    let constraint = FairnessConstraint::new(ConstraintKind::EqualizedOdds, s.epsilon)?;

    let sw = solve_social_welfare(&mu, &utility, &s.phi, cfg)?;
    let co = solve_constrained(&mu, &s.accuracy, &constraint, cfg)?;
    let q = |p: &Policy| [p.prob(0, 1), p.prob(1, 1)];
    let (sw_q, co_q) = (q(&sw.policy), q(&co.policy));

    let sw_joint = induce_joint(&mu, &sw.policy)?;
    let co_joint = induce_joint(&mu, &co.policy)?;
    let co_welfare = social_welfare(&co_joint, &utility, &s.phi)?;
    let violation = violation(&sw_joint, &constraint)?;
    Ok(Example1Report {
        delta: s.delta,
        phi: s.phi,
        epsilon: s.epsilon,
        sw_policy: sw_q,
        sw_welfare: sw.objective_value,
        sw_welfare_expected: phi_at(&s.phi, s.delta)?,
        co_policy: co_q,
        co_accuracy: co.objective_value,
        co_welfare,
        co_welfare_closed_form: example1_welfare_closed_form(s.delta, co_q[0], co_q[1], &s.phi)?,
        jensen_bound: phi_at(&s.phi, 0.5)?,
        gap: sw.objective_value - co_welfare,
        sw_certainty_equivalent: welfare_certainty_equivalent(&sw_joint, &utility, &s.phi)?,
        co_certainty_equivalent: welfare_certainty_equivalent(&co_joint, &utility, &s.phi)?,
        violation,
        sw_satisfies_constraint: satisfies(&sw_joint, &constraint)?,
    })
}
