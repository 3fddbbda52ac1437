//! Finite probability model: alphabets, population distributions, policies
//! and the joint distributions they induce.
//!
//! Everything is stored densely and indexed by alphabet position. The state
//! space is `X × Y × G × D`; a population distribution lives on `X × Y × G`
//! and a policy assigns each covariate value a distribution over `D`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance for simplex invariants on constructed inputs.
pub const INPUT_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance for simplex invariants on solver output.
pub const SOLVER_TOLERANCE: f64 = 1e-9;

/// One of the four finite sets making up the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphabetSet {
    Covariates,
    Types,
    Groups,
    Decisions,
}

impl fmt::Display for AlphabetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphabetSet::Covariates => "covariate (X)",
            AlphabetSet::Types => "type (Y)",
            AlphabetSet::Groups => "group (G)",
            AlphabetSet::Decisions => "decision (D)",
        })
    }
}

/// Random variables of the state space, used to select marginals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    G,
    D,
}

/// Ordered label sets for covariates, types, groups and decisions.
///
/// The order fixed here is the order used for iteration and tie-breaking
/// everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "AlphabetsRepr"))]
pub struct Alphabets {
    covariates: Vec<String>,
    types: Vec<String>,
    groups: Vec<String>,
    decisions: Vec<String>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphabetsRepr {
    covariates: Vec<String>,
    types: Vec<String>,
    groups: Vec<String>,
    decisions: Vec<String>,
}

#[cfg(feature = "serde")]
impl TryFrom<AlphabetsRepr> for Alphabets {
    type Error = Error;
    fn try_from(r: AlphabetsRepr) -> Result<Self> {
        Alphabets::new(r.covariates, r.types, r.groups, r.decisions)
    }
}

fn collect_labels<I, S>(set: AlphabetSet, labels: I) -> Result<Vec<String>>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
    if labels.is_empty() {
        return Err(Error::Config(format!("{set} alphabet is empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Config(format!("duplicate {set} label {l:?}")));
        }
    }
    Ok(labels)
}

impl Alphabets {
    pub fn new<I1, I2, I3, I4, S1, S2, S3, S4>(covariates: I1, types: I2, groups: I3, decisions: I4) -> Result<Self>
    where
        I1: IntoIterator<Item = S1>,
        I2: IntoIterator<Item = S2>,
        I3: IntoIterator<Item = S3>,
        I4: IntoIterator<Item = S4>,
        S1: Into<String>,
        S2: Into<String>,
        S3: Into<String>,
        S4: Into<String>,
    {
        Ok(Self {
            covariates: collect_labels(AlphabetSet::Covariates, covariates)?,
            types: collect_labels(AlphabetSet::Types, types)?,
            groups: collect_labels(AlphabetSet::Groups, groups)?,
            decisions: collect_labels(AlphabetSet::Decisions, decisions)?,
        })
    }

    /// Alphabets labelled `"0"`, `"1"`, ... with the given sizes `(|X|, |Y|, |G|, |D|)`.
    pub fn numbered(sizes: [usize; 4]) -> Result<Self> {
        let numbered = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Self::new(
            numbered(sizes[0]),
            numbered(sizes[1]),
            numbered(sizes[2]),
            numbered(sizes[3]),
        )
    }

    pub fn labels(&self, set: AlphabetSet) -> &[String] {
        match set {
            AlphabetSet::Covariates => &self.covariates,
            AlphabetSet::Types => &self.types,
            AlphabetSet::Groups => &self.groups,
            AlphabetSet::Decisions => &self.decisions,
        }
    }

    pub fn covariates(&self) -> &[String] {
        &self.covariates
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn decisions(&self) -> &[String] {
        &self.decisions
    }

    pub fn nx(&self) -> usize {
        self.covariates.len()
    }

    pub fn ny(&self) -> usize {
        self.types.len()
    }

    pub fn ng(&self) -> usize {
        self.groups.len()
    }

    pub fn nd(&self) -> usize {
        self.decisions.len()
    }

    /// Position of `label` in `set`.
    pub fn index_of(&self, set: AlphabetSet, label: &str) -> Result<usize> {
        self.labels(set)
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Config(format!("undeclared {set} label {label:?}")))
    }

    /// Errors naming the first set on which `self` and `other` differ.
    pub fn ensure_same(&self, other: &Alphabets) -> Result<()> {
        for set in [
            AlphabetSet::Covariates,
            AlphabetSet::Types,
            AlphabetSet::Groups,
            AlphabetSet::Decisions,
        ] {
            if self.labels(set) != other.labels(set) {
                return Err(Error::AlphabetMismatch { set });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_simplex(values: &[f64], tolerance: f64, what: &str) -> Result<()> {
    let mut total = 0.0;
    for &v in values {
        if !v.is_finite() || v < -tolerance {
            return Err(Error::InvalidDistribution(format!(
                "{what} has entry {v} outside [0, 1]"
            )));
        }
        total += v;
    }
    if (total - 1.0).abs() > tolerance {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total} (deviation {:e} exceeds {tolerance:e})",
            total - 1.0
        )));
    }
    Ok(())
}

/// Population distribution μ over `X × Y × G`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "MassRepr"))]
pub struct PopulationDistribution {
    alphabets: Alphabets,
    mass: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MassRepr {
    alphabets: Alphabets,
    mass: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<MassRepr> for PopulationDistribution {
    type Error = Error;
    fn try_from(r: MassRepr) -> Result<Self> {
        Self::with_tolerance(r.alphabets, r.mass, SOLVER_TOLERANCE)
    }
}

impl PopulationDistribution {
    /// Builds μ from dense masses indexed `(x * |Y| + y) * |G| + g`.
    pub fn new(alphabets: Alphabets, mass: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(alphabets, mass, INPUT_TOLERANCE)
    }

    pub fn with_tolerance(alphabets: Alphabets, mass: Vec<f64>, tolerance: f64) -> Result<Self> {
        let expected = alphabets.nx() * alphabets.ny() * alphabets.ng();
        if mass.len() != expected {
            return Err(Error::Config(format!(
                "population needs {expected} masses, got {}",
                mass.len()
            )));
        }
        check_simplex(&mass, tolerance, "population distribution")?;
        let mass = mass.into_iter().map(|m| m.max(0.0)).collect();
        Ok(Self { alphabets, mass })
    }

    pub fn from_fn(alphabets: Alphabets, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let (nx, ny, ng) = (alphabets.nx(), alphabets.ny(), alphabets.ng());
        let mut mass = Vec::with_capacity(nx * ny * ng);
        for x in 0..nx {
            for y in 0..ny {
                for g in 0..ng {
                    mass.push(f(x, y, g));
                }
            }
        }
        Self::new(alphabets, mass)
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn mass(&self, x: usize, y: usize, g: usize) -> f64 {
        let a = &self.alphabets;
        self.mass[(x * a.ny() + y) * a.ng() + g]
    }

    /// p_g, the G-marginal.
    pub fn group_priors(&self) -> Vec<f64> {
        let a = &self.alphabets;
        let mut p = vec![0.0; a.ng()];
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                for (g, pg) in p.iter_mut().enumerate() {
                    *pg += self.mass(x, y, g);
                }
            }
        }
        p
    }

    /// Groups with positive prior, in alphabet order.
    pub fn positive_groups(&self) -> Vec<usize> {
        self.group_priors()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(g, _)| g)
            .collect()
    }

    /// μ(x, y | g) indexed `x * |Y| + y`.
    pub fn conditional_on_group(&self, g: usize) -> Result<Vec<f64>> {
        let a = &self.alphabets;
        let pg = self.group_priors()[g];
        if pg <= 0.0 {
            return Err(Error::UndefinedConditional {
                event: format!("G={}", a.groups()[g]),
            });
        }
        let mut out = Vec::with_capacity(a.nx() * a.ny());
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                out.push(self.mass(x, y, g) / pg);
            }
        }
        Ok(out)
    }
}

/// Randomized decision rule a(d | x): one probability row per covariate value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "PolicyRepr"))]
pub struct Policy {
    alphabets: Alphabets,
    rows: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyRepr {
    alphabets: Alphabets,
    rows: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<PolicyRepr> for Policy {
    type Error = Error;
    fn try_from(r: PolicyRepr) -> Result<Self> {
        Self::with_tolerance(r.alphabets, r.rows, SOLVER_TOLERANCE)
    }
}

impl Policy {
    /// Builds a policy from dense rows indexed `x * |D| + d`.
    pub fn new(alphabets: Alphabets, rows: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(alphabets, rows, INPUT_TOLERANCE)
    }

    pub fn with_tolerance(alphabets: Alphabets, rows: Vec<f64>, tolerance: f64) -> Result<Self> {
        let (nx, nd) = (alphabets.nx(), alphabets.nd());
        if rows.len() != nx * nd {
            return Err(Error::Config(format!(
                "policy needs {nx} rows of {nd} decisions, got {} entries",
                rows.len()
            )));
        }
        for (x, row) in rows.chunks(nd).enumerate() {
            check_simplex(row, tolerance, &format!("policy row {:?}", alphabets.covariates()[x]))?;
        }
        let rows = rows.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { alphabets, rows })
    }

    /// Solver output: clips negatives, renormalizes each row, then validates
    /// at [`SOLVER_TOLERANCE`] against the raw values.
    pub(crate) fn from_solver(alphabets: &Alphabets, raw: &[f64]) -> Result<Self> {
        let nd = alphabets.nd();
        let mut rows = Vec::with_capacity(raw.len());
        for row in raw.chunks(nd) {
            check_simplex(row, SOLVER_TOLERANCE, "solver policy row")?;
            let clipped: Vec<f64> = row.iter().map(|p| p.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            rows.extend(clipped.iter().map(|p| p / total));
        }
        Ok(Self {
            alphabets: alphabets.clone(),
            rows,
        })
    }

    /// Same distribution over D for every covariate value.
    pub fn constant(alphabets: Alphabets, row: &[f64]) -> Result<Self> {
        let rows = (0..alphabets.nx()).flat_map(|_| row.iter().copied()).collect();
        Self::new(alphabets, rows)
    }

    pub fn uniform(alphabets: Alphabets) -> Self {
        let nd = alphabets.nd();
        let rows = vec![1.0 / nd as f64; alphabets.nx() * nd];
        Self { alphabets, rows }
    }

    /// Deterministic rule assigning decision `choose(x)` to covariate `x`.
    pub fn deterministic(alphabets: Alphabets, choose: impl Fn(usize) -> usize) -> Result<Self> {
        let nd = alphabets.nd();
        let mut rows = vec![0.0; alphabets.nx() * nd];
        for x in 0..alphabets.nx() {
            let d = choose(x);
            if d >= nd {
                return Err(Error::Config(format!("decision index {d} out of range")));
            }
            rows[x * nd + d] = 1.0;
        }
        Ok(Self { alphabets, rows })
    }

    /// Binary-decision shorthand: `q[x]` is the probability of the second decision.
    pub fn binary(alphabets: Alphabets, q: &[f64]) -> Result<Self> {
        if alphabets.nd() != 2 {
            return Err(Error::Config("binary policy needs exactly two decisions".into()));
        }
        if q.len() != alphabets.nx() {
            return Err(Error::Config(format!(
                "binary policy needs {} probabilities, got {}",
                alphabets.nx(),
                q.len()
            )));
        }
        let rows = q.iter().flat_map(|&p| [1.0 - p, p]).collect();
        Self::new(alphabets, rows)
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let nd = self.alphabets.nd();
        &self.rows[x * nd..(x + 1) * nd]
    }

    #[inline]
    pub fn prob(&self, x: usize, d: usize) -> f64 {
        self.rows[x * self.alphabets.nd() + d]
    }

    /// The coordinates that determine the policy: every decision but the
    /// first, row by row. Tie-breaking is lexicographic on this vector.
    pub fn free_coordinates(&self) -> Vec<f64> {
        self.rows
            .chunks(self.alphabets.nd())
            .flat_map(|row| row[1..].iter().copied())
            .collect()
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Policy) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Event on `(Y, G)` used to condition the decision distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Event {
    pub y: Option<usize>,
    pub g: Option<usize>,
}

impl Event {
    pub const ALL: Event = Event { y: None, g: None };

    pub fn new(y: Option<usize>, g: Option<usize>) -> Self {
        Self { y, g }
    }

    #[inline]
    pub(crate) fn contains(&self, y: usize, g: usize) -> bool {
        self.y.is_none_or(|e| e == y) && self.g.is_none_or(|e| e == g)
    }

    pub fn describe(&self, alphabets: &Alphabets) -> String {
        match (self.y, self.g) {
            (None, None) => "Ω".to_string(),
            (Some(y), None) => format!("Y={}", alphabets.types()[y]),
            (None, Some(g)) => format!("G={}", alphabets.groups()[g]),
            (Some(y), Some(g)) => {
                format!("Y={}, G={}", alphabets.types()[y], alphabets.groups()[g])
            }
        }
    }
}

/// Joint distribution P over `X × Y × G × D`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JointDistribution {
    alphabets: Alphabets,
    mass: Vec<f64>,
}

/// P(· | G = g) over `X × Y × D`, indexed `(x * |Y| + y) * |D| + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupConditional {
    pub group: usize,
    nyd: (usize, usize),
    mass: Vec<f64>,
}

impl GroupConditional {
    #[inline]
    pub fn mass(&self, x: usize, y: usize, d: usize) -> f64 {
        let (ny, nd) = self.nyd;
        self.mass[(x * ny + y) * nd + d]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }
}

/// A marginal distribution over a subset of variables, axes in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub vars: Vec<Var>,
    pub shape: Vec<usize>,
    mass: Vec<f64>,
}

impl Marginal {
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Mass at the given coordinates (one index per variable, request order).
    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, (&ix, &n)) in index.iter().zip(&self.shape).enumerate() {
            assert!(ix < n, "index {ix} out of range for axis {i}");
            flat = flat * n + ix;
        }
        self.mass[flat]
    }
}

/// Composes μ with a policy: `P(x, y, g, d) = μ(x, y, g) · a(d | x)`.
pub fn induce_joint(mu: &PopulationDistribution, policy: &Policy) -> Result<JointDistribution> {
    mu.alphabets().ensure_same(policy.alphabets())?;
    let a = mu.alphabets();
    let nd = a.nd();
    let mut mass = Vec::with_capacity(mu.masses().len() * nd);
    for x in 0..a.nx() {
        let row = policy.row(x);
        for y in 0..a.ny() {
            for g in 0..a.ng() {
                let m = mu.mass(x, y, g);
                mass.extend(row.iter().map(|p| m * p));
            }
        }
    }
    Ok(JointDistribution {
        alphabets: a.clone(),
        mass,
    })
}

impl JointDistribution {
    /// Builds a joint directly from dense masses indexed
    /// `((x * |Y| + y) * |G| + g) * |D| + d`.
    pub fn new(alphabets: Alphabets, mass: Vec<f64>) -> Result<Self> {
        let expected = alphabets.nx() * alphabets.ny() * alphabets.ng() * alphabets.nd();
        if mass.len() != expected {
            return Err(Error::Config(format!(
                "joint distribution needs {expected} masses, got {}",
                mass.len()
            )));
        }
        check_simplex(&mass, INPUT_TOLERANCE, "joint distribution")?;
        Ok(Self { alphabets, mass })
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn mass(&self, x: usize, y: usize, g: usize, d: usize) -> f64 {
        let a = &self.alphabets;
        self.mass[((x * a.ny() + y) * a.ng() + g) * a.nd() + d]
    }

    pub fn event_probability(&self, event: &Event) -> f64 {
        let a = &self.alphabets;
        let mut total = 0.0;
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                for g in 0..a.ng() {
                    if event.contains(y, g) {
                        for d in 0..a.nd() {
                            total += self.mass(x, y, g, d);
                        }
                    }
                }
            }
        }
        total
    }

    pub fn group_probability(&self, g: usize) -> f64 {
        self.event_probability(&Event::new(None, Some(g)))
    }

    /// Positive-probability groups paired with their probabilities.
    pub fn positive_groups(&self) -> Vec<(usize, f64)> {
        (0..self.alphabets.ng())
            .map(|g| (g, self.group_probability(g)))
            .filter(|&(_, p)| p > 0.0)
            .collect()
    }

    /// P_g, the conditional distribution given `G = g`.
    pub fn condition_on_group(&self, g: usize) -> Result<GroupConditional> {
        let a = &self.alphabets;
        if g >= a.ng() {
            return Err(Error::Config(format!("group index {g} out of range")));
        }
        let pg = self.group_probability(g);
        if pg <= 0.0 {
            return Err(Error::UndefinedConditional {
                event: format!("G={}", a.groups()[g]),
            });
        }
        let mut mass = Vec::with_capacity(a.nx() * a.ny() * a.nd());
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                for d in 0..a.nd() {
                    mass.push(self.mass(x, y, g, d) / pg);
                }
            }
        }
        Ok(GroupConditional {
            group: g,
            nyd: (a.ny(), a.nd()),
            mass,
        })
    }

    /// Sums out every variable not in `vars`; axes follow the order of `vars`.
    pub fn marginal(&self, vars: &[Var]) -> Result<Marginal> {
        if vars.is_empty() {
            return Err(Error::Usage("marginal needs at least one variable".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Usage(format!("variable {v:?} requested twice")));
            }
        }
        let a = &self.alphabets;
        let size = |v: &Var| match v {
            Var::X => a.nx(),
            Var::Y => a.ny(),
            Var::G => a.ng(),
            Var::D => a.nd(),
        };
        let shape: Vec<usize> = vars.iter().map(size).collect();
        let mut mass = vec![0.0; shape.iter().product()];
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                for g in 0..a.ng() {
                    for d in 0..a.nd() {
                        let mut flat = 0;
                        for (v, n) in vars.iter().zip(&shape) {
                            let ix = match v {
                                Var::X => x,
                                Var::Y => y,
                                Var::G => g,
                                Var::D => d,
                            };
                            flat = flat * n + ix;
                        }
                        mass[flat] += self.mass(x, y, g, d);
                    }
                }
            }
        }
        Ok(Marginal {
            vars: vars.to_vec(),
            shape,
            mass,
        })
    }

    /// P(D | event) for an event on `(Y, G)`.
    pub fn conditional_decision_distribution(&self, event: &Event) -> Result<Vec<f64>> {
        let a = &self.alphabets;
        let mut dist = vec![0.0; a.nd()];
        for x in 0..a.nx() {
            for y in 0..a.ny() {
                for g in 0..a.ng() {
                    if event.contains(y, g) {
                        for (d, slot) in dist.iter_mut().enumerate() {
                            *slot += self.mass(x, y, g, d);
                        }
                    }
                }
            }
        }
        let total: f64 = dist.iter().sum();
        if total <= 0.0 {
            return Err(Error::UndefinedConditional {
                event: event.describe(a),
            });
        }
        dist.iter_mut().for_each(|p| *p /= total);
        Ok(dist)
    }

    /// Total-variation distance to another joint over the same alphabets.
    pub fn tv_distance(&self, other: &JointDistribution) -> Result<f64> {
        self.alphabets.ensure_same(&other.alphabets)?;
        Ok(total_variation(&self.mass, &other.mass))
    }
}

/// Half the L1 distance between two equally sized vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
