//! Payoff tables, the φ family, group utilities, welfare and unfairness
//! measures.

mod phi;

pub use phi::PhiFunction;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::constraints::{satisfies, FairnessConstraint};
use crate::error::{Error, Result};
use crate::model::{AlphabetSet, Alphabets, JointDistribution};

/// Whether a table plays the accuracy role `v` or the utility role `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PayoffRole {
    Accuracy,
    Utility,
}

/// A real-valued table over `D × Y`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "TableRepr"))]
pub struct PayoffTable {
    decisions: Vec<String>,
    types: Vec<String>,
    /// Indexed `d * |Y| + y`.
    values: Vec<f64>,
    role: PayoffRole,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRepr {
    decisions: Vec<String>,
    types: Vec<String>,
    values: Vec<f64>,
    role: PayoffRole,
}

#[cfg(feature = "serde")]
impl TryFrom<TableRepr> for PayoffTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        Self::new(r.decisions, r.types, r.values, r.role)
    }
}

impl PayoffTable {
    pub fn new(decisions: Vec<String>, types: Vec<String>, values: Vec<f64>, role: PayoffRole) -> Result<Self> {
        if decisions.is_empty() || types.is_empty() {
            return Err(Error::Config("payoff table needs decisions and types".into()));
        }
        if values.len() != decisions.len() * types.len() {
            return Err(Error::Config(format!(
                "payoff table needs {} values, got {}",
                decisions.len() * types.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("payoff table has non-finite value {v}")));
        }
        Ok(Self {
            decisions,
            types,
            values,
            role,
        })
    }

    pub fn from_fn(alphabets: &Alphabets, role: PayoffRole, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(alphabets.nd() * alphabets.ny());
        for d in 0..alphabets.nd() {
            for y in 0..alphabets.ny() {
                values.push(f(d, y));
            }
        }
        Self::new(alphabets.decisions().to_vec(), alphabets.types().to_vec(), values, role)
    }

    /// `1(d = y)`, matching decision and type labels by name.
    pub fn match_indicator(alphabets: &Alphabets, role: PayoffRole) -> Self {
        let (ds, ys) = (alphabets.decisions(), alphabets.types());
        Self::from_fn(alphabets, role, |d, y| if ds[d] == ys[y] { 1.0 } else { 0.0 })
            .expect("indicator table is well formed")
    }

    pub fn decisions(&self) -> &[String] {
        &self.decisions
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn role(&self) -> PayoffRole {
        self.role
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, d: usize, y: usize) -> f64 {
        self.values[d * self.types.len() + y]
    }

    /// Same values in the other role.
    pub fn with_role(&self, role: PayoffRole) -> Self {
        Self { role, ..self.clone() }
    }

    /// Values multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.decisions.clone(),
            self.types.clone(),
            self.values.iter().map(|v| v * k).collect(),
            self.role,
        )
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ensure_matches(&self, alphabets: &Alphabets) -> Result<()> {
        if self.decisions != alphabets.decisions() {
            return Err(Error::AlphabetMismatch {
                set: AlphabetSet::Decisions,
            });
        }
        if self.types != alphabets.types() {
            return Err(Error::AlphabetMismatch {
                set: AlphabetSet::Types,
            });
        }
        Ok(())
    }

    /// True when not all types rank decisions the same way.
    pub fn is_nontrivial(&self) -> bool {
        let (nd, ny) = (self.decisions.len(), self.types.len());
        (0..nd).any(|d| {
            (0..nd).any(|e| {
                (0..ny).any(|y| self.value(d, y) > self.value(e, y))
                    && (0..ny).any(|y| self.value(d, y) < self.value(e, y))
            })
        })
    }

    /// For binary D: the first `(y0, y1)` in alphabet order with
    /// `u(1, y1) > u(0, y1)` and `u(1, y0) < u(0, y0)`.
    pub fn nontrivial_witness(&self) -> Option<(usize, usize)> {
        if self.decisions.len() != 2 {
            return None;
        }
        let ny = self.types.len();
        (0..ny)
            .flat_map(|y0| (0..ny).map(move |y1| (y0, y1)))
            .find(|&(y0, y1)| self.value(1, y1) > self.value(0, y1) && self.value(1, y0) < self.value(0, y0))
    }
}

/// A real number or the distinguished value −∞.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::NegInfinity => None,
        }
    }
}

/// The unfairness penalty h.
#[derive(Debug, Clone, PartialEq)]
pub enum UnfairnessMeasure {
    /// 0 when the constraint holds, +∞ otherwise.
    ConstraintIndicator(FairnessConstraint),
    /// φ(Σ p_g U_g) − Σ p_g φ(U_g).
    JensenGap { utility: PayoffTable, phi: PhiFunction },
}

impl UnfairnessMeasure {
    /// h(P); `f64::INFINITY` for a violated indicator.
    pub fn evaluate(&self, p: &JointDistribution) -> Result<f64> {
        match self {
            UnfairnessMeasure::ConstraintIndicator(c) => Ok(if satisfies(p, c)? { 0.0 } else { f64::INFINITY }),
            UnfairnessMeasure::JensenGap { utility, phi } => jensen_gap(p, utility, phi),
        }
    }
}

/// E_P[table(D, Y)].
pub fn expected_payoff(p: &JointDistribution, table: &PayoffTable) -> Result<f64> {
    let a = p.alphabets();
    table.ensure_matches(a)?;
    let mut total = 0.0;
    for x in 0..a.nx() {
        for y in 0..a.ny() {
            for g in 0..a.ng() {
                for d in 0..a.nd() {
                    total += p.mass(x, y, g, d) * table.value(d, y);
                }
            }
        }
    }
    Ok(total)
}

/// U(P_g) = E_{P_g}[u(D, Y)].
pub fn group_utility(p: &JointDistribution, g: usize, u: &PayoffTable) -> Result<f64> {
    let a = p.alphabets();
    u.ensure_matches(a)?;
    let cond = p.condition_on_group(g)?;
    let mut total = 0.0;
    for x in 0..a.nx() {
        for y in 0..a.ny() {
            for d in 0..a.nd() {
                total += cond.mass(x, y, d) * u.value(d, y);
            }
        }
    }
    Ok(total)
}

/// `(g, p_g, U(P_g))` for every positive-probability group.
pub fn group_utilities(p: &JointDistribution, u: &PayoffTable) -> Result<Vec<(usize, f64, f64)>> {
    p.positive_groups()
        .into_iter()
        .map(|(g, pg)| Ok((g, pg, group_utility(p, g, u)?)))
        .collect()
}

fn phi_at_group(phi: &PhiFunction, u: f64, g: usize, p: &JointDistribution) -> Result<f64> {
    phi.evaluate(u).map_err(|e| match e {
        Error::Domain { phi, value, .. } => Error::Domain {
            phi,
            value,
            group: Some(p.alphabets().groups()[g].clone()),
        },
        other => other,
    })
}

/// Σ_g p_g φ(U(P_g)) over positive-probability groups; for the Rawls limit,
/// min_g U(P_g).
pub fn social_welfare(p: &JointDistribution, u: &PayoffTable, phi: &PhiFunction) -> Result<f64> {
    let groups = group_utilities(p, u)?;
    if phi.is_rawls() {
        return Ok(groups.iter().map(|&(_, _, ug)| ug).fold(f64::INFINITY, f64::min));
    }
    let mut total = 0.0;
    for (g, pg, ug) in groups {
        total += pg * phi_at_group(phi, ug, g, p)?;
    }
    Ok(total)
}

/// φ⁻¹ of a welfare value.
pub fn certainty_equivalent(welfare: f64, phi: &PhiFunction) -> Result<f64> {
    phi.inverse(welfare)
}

/// Certainty equivalent of the welfare of `p`, computed without forming the
/// welfare value itself. For `negpow:γ` with large γ the welfare overflows
/// f64 while its certainty equivalent (a weighted power mean of the group
/// utilities) stays well conditioned.
pub fn welfare_certainty_equivalent(p: &JointDistribution, u: &PayoffTable, phi: &PhiFunction) -> Result<f64> {
    let groups = group_utilities(p, u)?;
    let pairs: Vec<(f64, f64)> = groups.iter().map(|&(_, pg, ug)| (pg, ug)).collect();
    if let Some(&(g, _, ug)) = groups.iter().find(|&&(_, _, ug)| !phi.is_rawls() && !phi.admits(ug)) {
        return phi_at_group(phi, ug, g, p);
    }
    power_mean_or_inverse(&pairs, phi)
}

/// CE of weights/utilities pairs whose weights sum to one.
pub(crate) fn power_mean_or_inverse(pairs: &[(f64, f64)], phi: &PhiFunction) -> Result<f64> {
    match *phi {
        PhiFunction::RawlsLimit => Ok(pairs.iter().map(|&(_, u)| u).fold(f64::INFINITY, f64::min)),
        PhiFunction::NegativePower { gamma } => Ok(negpow_mean(pairs, gamma)),
        _ => {
            let mut w = 0.0;
            for &(p, u) in pairs {
                w += p * phi.evaluate(u)?;
            }
            phi.inverse(w)
        }
    }
}

/// (Σ p_i u_i^{-γ})^{-1/γ}, scaled by the smallest utility so that no term
/// overflows.
pub(crate) fn negpow_mean(pairs: &[(f64, f64)], gamma: f64) -> f64 {
    let m = pairs.iter().map(|&(_, u)| u).fold(f64::INFINITY, f64::min);
    let s: f64 = pairs
        .iter()
        .map(|&(p, u)| p * libm::exp(-gamma * (libm::log(u) - libm::log(m))))
        .sum();
    m * libm::exp(-libm::log(s) / gamma)
}

/// h(P) = φ(Σ_g p_g U(P_g)) − Σ_g p_g φ(U(P_g)).
pub fn jensen_gap(p: &JointDistribution, u: &PayoffTable, phi: &PhiFunction) -> Result<f64> {
    if phi.is_rawls() {
        return Err(Error::Unsupported(
            "the Jensen gap needs a finite concave φ, not the Rawls limit".into(),
        ));
    }
    let groups = group_utilities(p, u)?;
    let mut mean = 0.0;
    let mut welfare = 0.0;
    for &(g, pg, ug) in &groups {
        mean += pg * ug;
        welfare += pg * phi_at_group(phi, ug, g, p)?;
    }
    Ok(phi.evaluate(mean)? - welfare)
}

/// φ(E_P[v(D, Y)]) − h(P), with −∞ when h is infinite.
pub fn generalized_objective(
    p: &JointDistribution,
    v: &PayoffTable,
    phi: &PhiFunction,
    h: &UnfairnessMeasure,
) -> Result<ExtendedReal> {
    let penalty = h.evaluate(p)?;
    if penalty == f64::INFINITY {
        return Ok(ExtendedReal::NegInfinity);
    }
    let accuracy = expected_payoff(p, v)?;
    Ok(ExtendedReal::Finite(phi.evaluate(accuracy)? - penalty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintKind;
    use crate::model::{induce_joint, Policy, PopulationDistribution};

    fn alphabets() -> Alphabets {
        Alphabets::numbered([2, 2, 2, 2]).unwrap()
    }

    fn example1_joint(delta: f64, q: [f64; 2]) -> JointDistribution {
        let mu = PopulationDistribution::from_fn(alphabets(), |x, y, g| {
            if x != g {
                0.0
            } else if y == g {
                0.5 * delta
            } else {
                0.5 * (1.0 - delta)
            }
        })
        .unwrap();
        induce_joint(&mu, &Policy::binary(alphabets(), &q).unwrap()).unwrap()
    }

    fn matching() -> PayoffTable {
        PayoffTable::match_indicator(&alphabets(), PayoffRole::Utility)
    }

    #[test]
    fn expected_payoff_examples() {
        let p = example1_joint(0.75, [0.0, 1.0]);
        assert_eq!(expected_payoff(&p, &matching()).unwrap(), 0.75);
        let constant = PayoffTable::from_fn(&alphabets(), PayoffRole::Accuracy, |_, _| 2.5).unwrap();
        assert!((expected_payoff(&p, &constant).unwrap() - 2.5).abs() < 1e-15);
        let coin = example1_joint(0.9, [0.5, 0.5]);
        assert!((expected_payoff(&coin, &matching()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn group_utilities_in_example1() {
        let p = example1_joint(0.75, [0.0, 1.0]);
        assert!((group_utility(&p, 1, &matching()).unwrap() - 0.75).abs() < 1e-15);
        assert!((group_utility(&p, 0, &matching()).unwrap() - 0.75).abs() < 1e-15);
        for q in [0.0, 0.3, 1.0] {
            let p = example1_joint(0.75, [q, q]);
            let u1 = q * 0.75 + (1.0 - q) * 0.25;
            let u0 = (1.0 - q) * 0.75 + q * 0.25;
            assert!((group_utility(&p, 1, &matching()).unwrap() - u1).abs() < 1e-15);
            assert!((group_utility(&p, 0, &matching()).unwrap() - u0).abs() < 1e-15);
        }
    }

    #[test]
    fn welfare_examples() {
        let sqrt = PhiFunction::power(0.5).unwrap();
        let p = example1_joint(0.75, [0.0, 1.0]);
        let w = social_welfare(&p, &matching(), &sqrt).unwrap();
        assert!((w - 0.75f64.sqrt()).abs() < 1e-15);
        let half = example1_joint(0.75, [0.5, 0.5]);
        assert!((social_welfare(&half, &matching(), &sqrt).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(social_welfare(&p, &matching(), &PhiFunction::RawlsLimit).unwrap(), 0.75);
    }

    #[test]
    fn welfare_domain_error_names_group() {
        let negpow = PhiFunction::negative_power(2.0).unwrap();
        // q = (1, 0): group 0 treats all, group 1 treats none; with δ = 0.75 both
        // utilities are 0.25, positive. Shift the table down to force a violation.
        let shifted = matching().scaled(1.0).unwrap();
        let values = shifted.values().iter().map(|v| v - 0.5).collect();
        let shifted = PayoffTable::new(
            shifted.decisions().to_vec(),
            shifted.types().to_vec(),
            values,
            PayoffRole::Utility,
        )
        .unwrap();
        let p = example1_joint(0.75, [1.0, 0.0]);
        match social_welfare(&p, &shifted, &negpow) {
            Err(Error::Domain {
                group: Some(g), value, ..
            }) => {
                assert_eq!(g, "0");
                assert!((value + 0.25).abs() < 1e-15);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn jensen_gap_examples() {
        let sqrt = PhiFunction::power(0.5).unwrap();
        let balanced = example1_joint(0.75, [0.0, 1.0]);
        assert!(jensen_gap(&balanced, &matching(), &sqrt).unwrap().abs() < 1e-15);
        assert!(
            jensen_gap(&balanced, &matching(), &PhiFunction::Identity)
                .unwrap()
                .abs()
                < 1e-15
        );
        let treat_all = example1_joint(0.75, [1.0, 1.0]);
        let expected = 0.5f64.sqrt() - (0.5 * 0.75f64.sqrt() + 0.5 * 0.25f64.sqrt());
        let gap = jensen_gap(&treat_all, &matching(), &sqrt).unwrap();
        assert!((gap - expected).abs() < 1e-15);
        assert!((gap - 0.0241).abs() < 1e-4);
        assert!(matches!(
            jensen_gap(&treat_all, &matching(), &PhiFunction::RawlsLimit),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn generalized_objective_cases() {
        let eo = FairnessConstraint::new(ConstraintKind::EqualizedOdds, 0.0).unwrap();
        let indicator = UnfairnessMeasure::ConstraintIndicator(eo);
        let accuracy = matching().with_role(PayoffRole::Accuracy);
        let violating = example1_joint(0.75, [0.0, 1.0]);
        assert_eq!(
            generalized_objective(&violating, &accuracy, &PhiFunction::Identity, &indicator).unwrap(),
            ExtendedReal::NegInfinity
        );
        let fair = example1_joint(0.75, [0.3, 0.3]);
        let value = generalized_objective(&fair, &accuracy, &PhiFunction::Identity, &indicator)
            .unwrap()
            .finite()
            .unwrap();
        assert!((value - expected_payoff(&fair, &accuracy).unwrap()).abs() < 1e-15);

        let sqrt = PhiFunction::power(0.5).unwrap();
        let gap = UnfairnessMeasure::JensenGap {
            utility: matching(),
            phi: sqrt,
        };
        let p = example1_joint(0.75, [0.9, 0.2]);
        let value = generalized_objective(&p, &matching(), &sqrt, &gap)
            .unwrap()
            .finite()
            .unwrap();
        assert!((value - social_welfare(&p, &matching(), &sqrt).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn certainty_equivalents() {
        assert_eq!(certainty_equivalent(0.4, &PhiFunction::Identity).unwrap(), 0.4);
        let ce = certainty_equivalent(0.8660, &PhiFunction::power(0.5).unwrap()).unwrap();
        assert!((ce - 0.75).abs() < 1e-4);
        let ce = certainty_equivalent(-4.0, &PhiFunction::negative_power(2.0).unwrap()).unwrap();
        assert!((ce - 0.5).abs() < 1e-15);
        assert!(certainty_equivalent(1.0, &PhiFunction::negative_power(2.0).unwrap()).is_err());
    }

    #[test]
    fn stable_certainty_equivalent_agrees_and_survives_large_gamma() {
        let p = example1_joint(0.75, [0.7, 0.7]);
        for gamma in [0.5, 2.0, 7.0] {
            let phi = PhiFunction::negative_power(gamma).unwrap();
            let direct = certainty_equivalent(social_welfare(&p, &matching(), &phi).unwrap(), &phi).unwrap();
            let stable = welfare_certainty_equivalent(&p, &matching(), &phi).unwrap();
            assert!((direct - stable).abs() < 1e-12);
        }
        let phi = PhiFunction::negative_power(1e4).unwrap();
        let ce = welfare_certainty_equivalent(&p, &matching(), &phi).unwrap();
        // Utilities are 0.6 and 0.4; the CE tends to the minimum.
        assert!(ce >= 0.4 && ce - 0.4 < 1e-3);
    }

    #[test]
    fn nontriviality() {
        assert!(matching().is_nontrivial());
        assert_eq!(matching().nontrivial_witness(), Some((0, 1)));
        let always_treat = PayoffTable::from_fn(&alphabets(), PayoffRole::Utility, |d, _| d as f64).unwrap();
        assert!(!always_treat.is_nontrivial());
        assert_eq!(always_treat.nontrivial_witness(), None);
    }
}
