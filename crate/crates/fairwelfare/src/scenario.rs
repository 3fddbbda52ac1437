//! Scenario files: alphabets, a sparse population, payoff tables, designers
//! and solver settings in one strict JSON document.

use std::collections::BTreeMap;
use std::fmt;

use fairwelfare_core::constraints::{ConstraintKind, FairnessConstraint};
use fairwelfare_core::model::{AlphabetSet, Alphabets, PopulationDistribution};
use fairwelfare_core::objectives::{PayoffRole, PayoffTable, PhiFunction};
use fairwelfare_core::solvers::{DesignerSpec, SolverConfig};
use serde::{Deserialize, Serialize};

/// Masses must sum to 1 within this; nothing is renormalized.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub alphabets: Alphabets,
    /// Absent for commands that only need the tables (`diverge`).
    pub population: Option<PopulationDistribution>,
    pub utility: Option<PayoffTable>,
    pub accuracy: Option<PayoffTable>,
    pub designers: Vec<DesignerSpec>,
    pub solver: SolverConfig,
}

/// One semantic problem, located by a path such as `population[3].mass`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    /// Malformed JSON, an unknown key or a value of the wrong type.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed but inconsistent; every problem found is listed.
    Invalid(Vec<Issue>),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Syntax { line, column, message } => {
                write!(f, "scenario syntax error at line {line}, column {column}: {message}")
            }
            ScenarioError::Invalid(issues) => {
                write!(f, "invalid scenario:")?;
                for i in issues {
                    write!(f, "\n  {}: {}", i.path, i.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

// On-disk shapes. They mirror the document one to one and are checked
// afterwards, so that every semantic problem can be reported at once.

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    alphabets: RawAlphabets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    population: Option<Vec<RawMass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility: Option<RawTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accuracy: Option<RawTable>,
    #[serde(default)]
    designers: Vec<RawDesigner>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverConfig>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAlphabets {
    covariates: Vec<String>,
    types: Vec<String>,
    groups: Vec<String>,
    decisions: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMass {
    x: String,
    y: String,
    g: String,
    mass: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<f64>,
    #[serde(default)]
    entries: Vec<RawEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    d: String,
    y: String,
    value: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawDesigner {
    Constrained {
        constraint: String,
        #[serde(default)]
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        positive_label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        negative_label: Option<String>,
    },
    Welfare {
        phi: String,
    },
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_location(&e.to_string()),
    })?;
    Checker::default().check(raw)
}

fn strip_location(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

#[derive(Default)]
struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn check(mut self, raw: RawScenario) -> Result<ScenarioFile, ScenarioError> {
        let a = &raw.alphabets;
        let alphabets = match Alphabets::new(
            a.covariates.clone(),
            a.types.clone(),
            a.groups.clone(),
            a.decisions.clone(),
        ) {
            Ok(alphabets) => alphabets,
            Err(e) => {
                self.issue("alphabets", e.to_string());
                return Err(ScenarioError::Invalid(self.issues));
            }
        };

        let population = raw
            .population
            .as_ref()
            .and_then(|entries| self.population(&alphabets, entries));
        let utility = raw
            .utility
            .as_ref()
            .and_then(|t| self.table("utility", &alphabets, t, PayoffRole::Utility));
        let accuracy = raw
            .accuracy
            .as_ref()
            .and_then(|t| self.table("accuracy", &alphabets, t, PayoffRole::Accuracy));
        let tables_ok = (raw.utility.is_none() || utility.is_some()) && (raw.accuracy.is_none() || accuracy.is_some());

        let mut designers = Vec::new();
        for (i, d) in raw.designers.iter().enumerate() {
            let path = format!("designers[{i}]");
            if let Some(spec) = self.designer(&path, &alphabets, d, utility.as_ref(), accuracy.as_ref(), tables_ok) {
                designers.push(spec);
            }
        }

        let solver = raw.solver.unwrap_or_default();
        if let Err(e) = solver.validate() {
            self.issue("solver", e.to_string());
        }

        if !self.issues.is_empty() {
            return Err(ScenarioError::Invalid(self.issues));
        }
        Ok(ScenarioFile {
            alphabets,
            population,
            utility,
            accuracy,
            designers,
            solver,
        })
    }

    fn label(&mut self, path: &str, alphabets: &Alphabets, set: AlphabetSet, label: &str) -> Option<usize> {
        match alphabets.index_of(set, label) {
            Ok(i) => Some(i),
            Err(_) => {
                self.issue(path, format!("{set} label {label:?} is not declared"));
                None
            }
        }
    }

    fn population(&mut self, alphabets: &Alphabets, entries: &[RawMass]) -> Option<PopulationDistribution> {
        let before = self.issues.len();
        let (ny, ng) = (alphabets.ny(), alphabets.ng());
        let mut mass = vec![0.0; alphabets.nx() * ny * ng];
        let mut seen = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            let path = format!("population[{i}]");
            let x = self.label(&format!("{path}.x"), alphabets, AlphabetSet::Covariates, &e.x);
            let y = self.label(&format!("{path}.y"), alphabets, AlphabetSet::Types, &e.y);
            let g = self.label(&format!("{path}.g"), alphabets, AlphabetSet::Groups, &e.g);
            if !(e.mass.is_finite() && e.mass >= 0.0) {
                self.issue(
                    format!("{path}.mass"),
                    format!("mass must be finite and nonnegative, got {}", e.mass),
                );
                continue;
            }
            let (Some(x), Some(y), Some(g)) = (x, y, g) else {
                continue;
            };
            let k = (x * ny + y) * ng + g;
            if let Some(first) = seen.insert(k, i) {
                self.issue(
                    path,
                    format!(
                        "cell (x={}, y={}, g={}) already given at population[{first}]",
                        e.x, e.y, e.g
                    ),
                );
                continue;
            }
            mass[k] = e.mass;
        }
        if self.issues.len() > before {
            return None;
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            let (word, gap) = if total < 1.0 {
                ("short of", 1.0 - total)
            } else {
                ("over", total - 1.0)
            };
            self.issue(
                "population",
                format!("masses sum to {total}, {gap:.3e} {word} 1; they are not renormalized"),
            );
            return None;
        }
        match PopulationDistribution::with_tolerance(alphabets.clone(), mass, MASS_TOLERANCE) {
            Ok(mu) => Some(mu),
            Err(e) => {
                self.issue("population", e.to_string());
                None
            }
        }
    }

    fn table(&mut self, name: &str, alphabets: &Alphabets, t: &RawTable, role: PayoffRole) -> Option<PayoffTable> {
        let before = self.issues.len();
        let ny = alphabets.ny();
        let mut values: Vec<Option<f64>> = vec![None; alphabets.nd() * ny];
        if let Some(v) = t.default {
            if !v.is_finite() {
                self.issue(format!("{name}.default"), "default must be finite");
            }
        }
        for (i, e) in t.entries.iter().enumerate() {
            let path = format!("{name}.entries[{i}]");
            let d = self.label(&format!("{path}.d"), alphabets, AlphabetSet::Decisions, &e.d);
            let y = self.label(&format!("{path}.y"), alphabets, AlphabetSet::Types, &e.y);
            if !e.value.is_finite() {
                self.issue(format!("{path}.value"), "value must be finite");
                continue;
            }
            let (Some(d), Some(y)) = (d, y) else { continue };
            let slot = &mut values[d * ny + y];
            if slot.is_some() {
                self.issue(path, format!("entry (d={}, y={}) given twice", e.d, e.y));
                continue;
            }
            *slot = Some(e.value);
        }
        let missing: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| format!("(d={}, y={})", alphabets.decisions()[k / ny], alphabets.types()[k % ny]))
            .collect();
        if t.default.is_none() && !missing.is_empty() {
            self.issue(name, format!("no default and no entry for {}", missing.join(", ")));
        }
        if self.issues.len() > before {
            return None;
        }
        let dense = values.into_iter().map(|v| v.or(t.default).unwrap_or(0.0)).collect();
        match PayoffTable::new(alphabets.decisions().to_vec(), alphabets.types().to_vec(), dense, role) {
            Ok(t) => Some(t),
            Err(e) => {
                self.issue(name, e.to_string());
                None
            }
        }
    }

    fn designer(
        &mut self,
        path: &str,
        alphabets: &Alphabets,
        d: &RawDesigner,
        utility: Option<&PayoffTable>,
        accuracy: Option<&PayoffTable>,
        tables_ok: bool,
    ) -> Option<DesignerSpec> {
        match d {
            RawDesigner::Constrained {
                constraint,
                epsilon,
                positive_label,
                negative_label,
            } => {
                let kind = match constraint.parse::<ConstraintKind>() {
                    Ok(k) => Some(k),
                    Err(e) => {
                        self.issue(format!("{path}.constraint"), e.to_string());
                        None
                    }
                };
                let table = accuracy.or(utility).map(|t| t.with_role(PayoffRole::Accuracy));
                if table.is_none() && tables_ok {
                    self.issue(path, "a constrained designer needs an accuracy (or utility) table");
                }
                let c = match FairnessConstraint::new(kind?, *epsilon) {
                    Ok(c) => c.with_labels(positive_label.clone(), negative_label.clone()),
                    Err(e) => {
                        self.issue(format!("{path}.epsilon"), e.to_string());
                        return None;
                    }
                };
                if let Err(e) = c.conditioning_types(alphabets) {
                    self.issue(path, e.to_string());
                    return None;
                }
                Some(DesignerSpec::ConstrainedOptimization {
                    accuracy: table?,
                    constraint: c,
                })
            }
            RawDesigner::Welfare { phi } => {
                let phi = match phi.parse::<PhiFunction>().and_then(PhiFunction::validated) {
                    Ok(p) => p,
                    Err(e) => {
                        self.issue(format!("{path}.phi"), e.to_string());
                        return None;
                    }
                };
                let Some(u) = utility else {
                    if tables_ok {
                        self.issue(path, "a welfare designer needs a utility table");
                    }
                    return None;
                };
                // Group utilities are averages of table values; if even the
                // largest is outside φ's domain no policy is admissible.
                if !phi.is_rawls() && !phi.admits(u.max_value()) {
                    self.issue(
                        format!("{path}.phi"),
                        format!(
                            "{phi} is undefined at every utility in the table (largest value {})",
                            u.max_value()
                        ),
                    );
                    return None;
                }
                Some(DesignerSpec::SocialWelfare {
                    utility: u.clone(),
                    phi,
                })
            }
        }
    }
}

impl ScenarioFile {
    pub fn require_population(&self) -> Result<&PopulationDistribution, ScenarioError> {
        self.population.as_ref().ok_or_else(|| {
            ScenarioError::Invalid(vec![Issue {
                path: "population".into(),
                message: "this command needs a population".into(),
            }])
        })
    }

    pub fn require_designers(&self, n: usize) -> Result<&[DesignerSpec], ScenarioError> {
        if self.designers.len() != n {
            return Err(ScenarioError::Invalid(vec![Issue {
                path: "designers".into(),
                message: format!(
                    "this command needs exactly {n} designer(s), found {}",
                    self.designers.len()
                ),
            }]));
        }
        Ok(&self.designers)
    }

    /// Canonical text: every nonzero mass and every table entry written out,
    /// designers in order, and the full solver settings.
    pub fn to_scenario_text(&self) -> String {
        let a = &self.alphabets;
        let population = self.population.as_ref().map(|mu| {
            let mut out = Vec::new();
            for (x, xl) in a.covariates().iter().enumerate() {
                for (y, yl) in a.types().iter().enumerate() {
                    for (g, gl) in a.groups().iter().enumerate() {
                        let mass = mu.mass(x, y, g);
                        if mass != 0.0 {
                            out.push(RawMass {
                                x: xl.clone(),
                                y: yl.clone(),
                                g: gl.clone(),
                                mass,
                            });
                        }
                    }
                }
            }
            out
        });
        let table = |t: &PayoffTable| RawTable {
            default: None,
            entries: t
                .decisions()
                .iter()
                .enumerate()
                .flat_map(|(d, dl)| {
                    t.types().iter().enumerate().map(move |(y, yl)| RawEntry {
                        d: dl.clone(),
                        y: yl.clone(),
                        value: t.value(d, y),
                    })
                })
                .collect(),
        };
        // A constrained designer's table is the accuracy table when present,
        // otherwise the utility table, so it needs no separate record.
        let designers = self
            .designers
            .iter()
            .map(|d| match d {
                DesignerSpec::ConstrainedOptimization { constraint, .. } => RawDesigner::Constrained {
                    constraint: constraint.kind.name().into(),
                    epsilon: constraint.epsilon,
                    positive_label: constraint.positive_label.clone(),
                    negative_label: constraint.negative_label.clone(),
                },
                DesignerSpec::SocialWelfare { phi, .. } => RawDesigner::Welfare { phi: phi.to_string() },
            })
            .collect();
        let raw = RawScenario {
            alphabets: RawAlphabets {
                covariates: a.covariates().to_vec(),
                types: a.types().to_vec(),
                groups: a.groups().to_vec(),
                decisions: a.decisions().to_vec(),
            },
            population,
            utility: self.utility.as_ref().map(table),
            accuracy: self.accuracy.as_ref().map(table),
            designers,
            solver: Some(self.solver.clone()),
        };
        let mut text = serde_json::to_string_pretty(&raw).expect("scenario serializes");
        text.push('\n');
        text
    }
}
