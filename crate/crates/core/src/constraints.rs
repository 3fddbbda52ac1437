//! Statistical fairness constraints, their ε-relaxations, and their linear
//! encoding over policy variables.
//!
//! Violation is measured as the largest total-variation distance between
//! the conditional decision distributions of two groups, over the
//! conditioning events of the constraint. For binary decisions this is
//! `|E[D | event, G=g] − E[D | event, G=g']|`. Clauses whose event has zero
//! probability within a group carry no content and are skipped.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{total_variation, AlphabetSet, Alphabets, Event, JointDistribution, PopulationDistribution};
use crate::solvers::lp::Relation;

/// Slack on `violation ≤ ε` when deciding satisfaction.
pub const SATISFACTION_TOLERANCE: f64 = 1e-9;

/// Largest decision alphabet for which relaxed constraints are encoded
/// (one row per subset of decisions).
pub const MAX_RELAXED_DECISIONS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConstraintKind {
    /// D ⊥ G | Y
    EqualizedOdds,
    /// D ⊥ G | Y = positive label
    EqualFalseNegatives,
    /// D ⊥ G | Y = negative label
    EqualFalsePositives,
    /// D ⊥ G
    StatisticalParity,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::EqualizedOdds,
        ConstraintKind::EqualFalseNegatives,
        ConstraintKind::EqualFalsePositives,
        ConstraintKind::StatisticalParity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::EqualizedOdds => "equalized_odds",
            ConstraintKind::EqualFalseNegatives => "equal_false_negatives",
            ConstraintKind::EqualFalsePositives => "equal_false_positives",
            ConstraintKind::StatisticalParity => "statistical_parity",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "equalized_odds" | "eo" => Ok(ConstraintKind::EqualizedOdds),
            "equal_false_negatives" | "fn" => Ok(ConstraintKind::EqualFalseNegatives),
            "equal_false_positives" | "fp" => Ok(ConstraintKind::EqualFalsePositives),
            "statistical_parity" | "sp" => Ok(ConstraintKind::StatisticalParity),
            other => Err(Error::Config(format!(
                "unknown constraint {other:?}; expected equalized_odds, equal_false_negatives, equal_false_positives or statistical_parity"
            ))),
        }
    }
}

/// A fairness constraint with relaxation level ε (0 means exact).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FairnessConstraint {
    pub kind: ConstraintKind,
    pub epsilon: f64,
    /// Type label conditioned on by `EqualFalseNegatives`; defaults to `"1"`.
    pub positive_label: Option<String>,
    /// Type label conditioned on by `EqualFalsePositives`; defaults to `"0"`.
    pub negative_label: Option<String>,
}

impl FairnessConstraint {
    pub fn new(kind: ConstraintKind, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon {epsilon} outside [0, 1]")));
        }
        Ok(Self {
            kind,
            epsilon,
            positive_label: None,
            negative_label: None,
        })
    }

    pub fn with_labels(mut self, positive: Option<String>, negative: Option<String>) -> Self {
        self.positive_label = positive;
        self.negative_label = negative;
        self
    }

    /// Conditioning values of Y; `None` is the unconditional event.
    pub fn conditioning_types(&self, alphabets: &Alphabets) -> Result<Vec<Option<usize>>> {
        let designated = |label: &Option<String>, default: &str| -> Result<usize> {
            let label = label.as_deref().unwrap_or(default);
            alphabets.index_of(AlphabetSet::Types, label).map_err(|_| {
                Error::Config(format!(
                    "{} needs type label {label:?}, which is not declared",
                    self.kind
                ))
            })
        };
        Ok(match self.kind {
            ConstraintKind::EqualizedOdds => (0..alphabets.ny()).map(Some).collect(),
            ConstraintKind::EqualFalseNegatives => {
                vec![Some(designated(&self.positive_label, "1")?)]
            }
            ConstraintKind::EqualFalsePositives => {
                vec![Some(designated(&self.negative_label, "0")?)]
            }
            ConstraintKind::StatisticalParity => vec![None],
        })
    }
}

impl fmt::Display for FairnessConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (epsilon {})", self.kind, self.epsilon)
    }
}

/// TV distances below this are rounding noise from conditioning and are
/// reported as exactly 0.
pub const VIOLATION_NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Largest TV distance between group-conditional decision distributions
/// over the constraint's non-vacuous clauses. Always in `[0, 1]`.
pub fn violation(p: &JointDistribution, c: &FairnessConstraint) -> Result<f64> {
    let a = p.alphabets();
    let mut worst: f64 = 0.0;
    for y in c.conditioning_types(a)? {
        let dists: Vec<Vec<f64>> = (0..a.ng())
            .filter_map(|g| p.conditional_decision_distribution(&Event::new(y, Some(g))).ok())
            .collect();
        for (i, di) in dists.iter().enumerate() {
            for dj in &dists[i + 1..] {
                worst = worst.max(total_variation(di, dj));
            }
        }
    }
    Ok(if worst < VIOLATION_NOISE_FLOOR {
        0.0
    } else {
        worst.min(1.0)
    })
}

/// `violation(P, c) ≤ ε` up to [`SATISFACTION_TOLERANCE`].
pub fn satisfies(p: &JointDistribution, c: &FairnessConstraint) -> Result<bool> {
    Ok(violation(p, c)? <= c.epsilon + SATISFACTION_TOLERANCE)
}

/// `(group, mixing weights over x)` for each group where an event has mass.
pub type GroupWeights = Vec<(usize, Vec<f64>)>;

/// Mixing weights μ(x | event, G = g) for every non-vacuous clause group,
/// precomputed so that violations can be evaluated straight from policy rows.
#[derive(Debug, Clone)]
pub struct ClauseWeights {
    nx: usize,
    nd: usize,
    /// One entry per conditioning event: `(type, [(group, weights over x)])`.
    events: Vec<(Option<usize>, GroupWeights)>,
}

impl ClauseWeights {
    pub fn new(mu: &PopulationDistribution, c: &FairnessConstraint) -> Result<Self> {
        let a = mu.alphabets();
        let mut events = Vec::new();
        for y in c.conditioning_types(a)? {
            let mut groups = Vec::new();
            for g in 0..a.ng() {
                let mut w: Vec<f64> = (0..a.nx())
                    .map(|x| {
                        (0..a.ny())
                            .filter(|&yy| y.is_none_or(|t| t == yy))
                            .map(|yy| mu.mass(x, yy, g))
                            .sum()
                    })
                    .collect();
                let total: f64 = w.iter().sum();
                if total > 0.0 {
                    w.iter_mut().for_each(|v| *v /= total);
                    groups.push((g, w));
                }
            }
            events.push((y, groups));
        }
        Ok(Self {
            nx: a.nx(),
            nd: a.nd(),
            events,
        })
    }

    /// Conditioning events with the groups that make them non-vacuous.
    pub fn events(&self) -> &[(Option<usize>, GroupWeights)] {
        &self.events
    }

    /// Same quantity as [`violation`] for the joint induced by `rows`
    /// (dense policy rows indexed `x * |D| + d`).
    pub fn violation(&self, rows: &[f64]) -> f64 {
        let nd = self.nd;
        let mut worst: f64 = 0.0;
        let mut dists: Vec<f64> = Vec::new();
        for (_, groups) in &self.events {
            dists.clear();
            for (_, w) in groups {
                let start = dists.len();
                dists.resize(start + nd, 0.0);
                for x in 0..self.nx {
                    let wx = w[x];
                    if wx != 0.0 {
                        for d in 0..nd {
                            dists[start + d] += wx * rows[x * nd + d];
                        }
                    }
                }
            }
            let k = groups.len();
            for i in 0..k {
                for j in i + 1..k {
                    let tv = total_variation(&dists[i * nd..(i + 1) * nd], &dists[j * nd..(j + 1) * nd]);
                    worst = worst.max(tv);
                }
            }
        }
        worst.min(1.0)
    }
}

/// What a linear constraint row encodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    /// Conditioning type value, `None` for the unconditional event.
    pub event_type: Option<usize>,
    pub groups: (usize, usize),
    /// Decisions whose probabilities are summed on both sides.
    pub decisions: Vec<usize>,
}

/// `coefficients · a  (relation)  rhs` over dense policy variables `a(d | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub clause: Clause,
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearConstraint {
    /// Amount by which `rows` violates this row (0 when satisfied).
    pub fn residual(&self, rows: &[f64]) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(rows).map(|(c, a)| c * a).sum();
        match self.relation {
            Relation::Eq => (lhs - self.rhs).abs(),
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
        }
    }
}

/// Linear encoding of a fairness constraint for a fixed population.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub num_covariates: usize,
    pub num_decisions: usize,
    pub rows: Vec<LinearConstraint>,
}

impl ConstraintSystem {
    pub fn max_residual(&self, rows: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.residual(rows)).fold(0.0, f64::max)
    }

    pub fn is_satisfied_by(&self, rows: &[f64], tolerance: f64) -> bool {
        self.max_residual(rows) <= tolerance
    }
}

/// Linear rows over `a(d | x)` equivalent to `violation ≤ ε`.
///
/// For each non-vacuous clause (event, group pair) and weights
/// `w^g_x = μ(x | event, G=g)`, the conditional decision probability
/// `Σ_x w^g_x a(d | x)` is linear in the policy. With ε = 0 this emits one
/// equality per decision. With ε > 0 it emits, for every nonempty proper
/// subset S of decisions, `Σ_{d∈S} (P_g(d) − P_g'(d)) ≤ ε`; since the
/// maximum of that sum over S is the TV distance, the rows hold exactly
/// when TV ≤ ε. For binary decisions the pair of rows is `|P_g(1) − P_g'(1)| ≤ ε`.
pub fn constraint_rows(mu: &PopulationDistribution, c: &FairnessConstraint) -> Result<ConstraintSystem> {
    let a = mu.alphabets();
    let (nx, nd) = (a.nx(), a.nd());
    if c.epsilon > 0.0 && nd > MAX_RELAXED_DECISIONS {
        return Err(Error::Config(format!(
            "relaxed constraints support at most {MAX_RELAXED_DECISIONS} decisions"
        )));
    }
    let weights = ClauseWeights::new(mu, c)?;
    let mut rows = Vec::new();
    for (event_type, groups) in weights.events() {
        for (i, (g, wg)) in groups.iter().enumerate() {
            for (h, wh) in &groups[i + 1..] {
                let mut emit = |decisions: Vec<usize>, relation: Relation, rhs: f64| {
                    let mut coefficients = vec![0.0; nx * nd];
                    for &d in &decisions {
                        for x in 0..nx {
                            coefficients[x * nd + d] += wg[x] - wh[x];
                        }
                    }
                    rows.push(LinearConstraint {
                        clause: Clause {
                            event_type: *event_type,
                            groups: (*g, *h),
                            decisions,
                        },
                        coefficients,
                        relation,
                        rhs,
                    });
                };
                if c.epsilon == 0.0 {
                    for d in 0..nd {
                        emit(vec![d], Relation::Eq, 0.0);
                    }
                } else {
                    for mask in 1u32..(1u32 << nd) - 1 {
                        let subset = (0..nd).filter(|d| mask & (1 << d) != 0).collect();
                        emit(subset, Relation::Le, c.epsilon);
                    }
                }
            }
        }
    }
    Ok(ConstraintSystem {
        num_covariates: nx,
        num_decisions: nd,
        rows,
    })
}
