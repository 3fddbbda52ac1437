//! The `fairwelfare` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fairwelfare_core::constraints::{violation, ConstraintKind, FairnessConstraint};
use fairwelfare_core::experiments::{
    build_example1, compare_designers, construct_divergent_population, disagreement_sweep, run_example1,
    DesignerOutcome, Example1Scenario, SweepConfig, DEFAULT_MARGIN,
};
use fairwelfare_core::model::{induce_joint, Policy};
use fairwelfare_core::objectives::{expected_payoff, jensen_gap, social_welfare, PayoffRole, PayoffTable, PhiFunction};
use fairwelfare_core::solvers::{DesignerSpec, GridCheck, SolverConfig};
use fairwelfare_core::Error;
use serde::{Deserialize, Serialize};

use crate::policy_file::parse_policy;
use crate::report::{Format, Generic, Render};
use crate::scenario::{parse_scenario, ScenarioError, ScenarioFile};

#[derive(Debug, Parser)]
#[command(
    name = "fairwelfare",
    version,
    about = "Fairness-constrained and welfare-maximizing decision policies"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Check every solve against exhaustive grid enumeration.
    #[arg(long, global = true)]
    pub grid_check: bool,
    /// Seed for every random choice; overrides the scenario's solver seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scenario's single designer.
    Solve { scenario: PathBuf },
    /// Fairness violations and Jensen gap of a given policy.
    Audit {
        scenario: PathBuf,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Solve the scenario's two designers and evaluate each at both optima.
    Compare { scenario: PathBuf },
    /// The two-group example with group-revealing covariates.
    Example1 {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        phi: PhiFunction,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Build a population on which the scenario's designers must disagree.
    Diverge {
        scenario: PathBuf,
        /// How far δ is pushed past the threshold.
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Random populations, both designers on each.
    Sweep {
        #[arg(long)]
        count: usize,
        /// Alphabet sizes as `x,y,g,d`.
        #[arg(long, value_parser = parse_sizes, default_value = "2,2,2,2")]
        sizes: [usize; 4],
        #[arg(long, default_value = "power:0.5")]
        phi: PhiFunction,
        #[arg(long, default_value = "equalized_odds")]
        constraint: ConstraintKind,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
}

fn parse_sizes(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("{p:?} is not a size")))
        .collect::<Result<_, _>>()?;
    let sizes: [usize; 4] = parts
        .try_into()
        .map_err(|_| format!("expected four sizes x,y,g,d, got {s:?}"))?;
    if sizes.contains(&0) {
        return Err("sizes must be positive".into());
    }
    Ok(sizes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Core(Error),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

/// A report plus, under `--grid-check`, the oracle comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checked<T> {
    #[serde(flatten)]
    pub report: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_checks: Option<Vec<GridCheck>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub policy: Policy,
    /// Violation of each constraint kind; `None` when its conditioning type
    /// label is not declared.
    pub violations: BTreeMap<String, Option<f64>>,
    pub expected_accuracy: Option<f64>,
    /// φ taken from the scenario's welfare designer, if any.
    pub phi: Option<PhiFunction>,
    #[serde(with = "fairwelfare_core::serde_float::option")]
    pub social_welfare: Option<f64>,
    /// `None` without a welfare designer, for the Rawls limit, or outside
    /// φ's domain.
    #[serde(with = "fairwelfare_core::serde_float::option")]
    pub jensen_gap: Option<f64>,
}

fn defined(r: Result<f64, Error>) -> Result<Option<f64>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain { .. } | Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    parse_scenario(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl Cli {
    fn solver_config(&self, scenario: Option<&ScenarioFile>) -> SolverConfig {
        let mut cfg = scenario.map(|s| s.solver.clone()).unwrap_or_default();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }
}

/// Runs the grid oracle for each designer and solve result.
fn grid_checks(
    mu: &fairwelfare_core::model::PopulationDistribution,
    designers: &[&DesignerSpec],
    cfg: &SolverConfig,
) -> Result<Vec<GridCheck>, Error> {
    designers
        .iter()
        .map(|d| {
            let result = d.solve(mu, cfg)?;
            d.grid_check(mu, &result, cfg)
        })
        .collect()
}

/// Report text, plus whether every grid check that ran stayed within bound.
fn execute(cli: &Cli) -> Result<(String, bool), Failure> {
    let format = cli.format;
    let all_within = |checks: &[GridCheck]| checks.iter().all(|g| g.within_bound);
    match &cli.command {
        Command::Solve { scenario } => {
            let s = load(scenario)?;
            let mu = s.require_population()?;
            let designer = &s.require_designers(1)?[0];
            let cfg = cli.solver_config(Some(&s));
            let result = designer.solve(mu, &cfg)?;
            let grid_check = cli
                .grid_check
                .then(|| designer.grid_check(mu, &result, &cfg))
                .transpose()?;
            let ok = grid_check.as_ref().is_none_or(|g| g.within_bound);
            let outcome = DesignerOutcome {
                designer: designer.clone(),
                result,
                grid_check,
            };
            Ok((Generic(&outcome).render(format), ok))
        }
        Command::Audit { scenario, policy } => {
            let s = load(scenario)?;
            let mu = s.require_population()?;
            let text = read(policy)?;
            let policy =
                parse_policy(&text, &s.alphabets).map_err(|e| Failure::Input(format!("{}: {e}", policy.display())))?;
            let report = audit(&s, mu, policy)?;
            Ok((Generic(&report).render(format), true))
        }
        Command::Compare { scenario } => {
            let s = load(scenario)?;
            let mu = s.require_population()?;
            let d = s.require_designers(2)?;
            let cfg = cli.solver_config(Some(&s));
            let cmp = compare_designers(mu, [&d[0], &d[1]], &cfg, cli.grid_check)?;
            let ok = cmp
                .outcomes
                .iter()
                .all(|o| o.grid_check.as_ref().is_none_or(|g| g.within_bound));
            Ok((Generic(&cmp).render(format), ok))
        }
        Command::Example1 { delta, phi, epsilon } => {
            let cfg = cli.solver_config(None);
            let scenario = Example1Scenario::new(*delta, *phi, *epsilon)?;
            let report = run_example1(&scenario, &cfg)?;
            let grid_checks = if cli.grid_check {
                let mu = build_example1(*delta)?;
                let designers = [
                    DesignerSpec::ConstrainedOptimization {
                        accuracy: scenario.accuracy.clone(),
                        constraint: FairnessConstraint::new(ConstraintKind::EqualizedOdds, *epsilon)?,
                    },
                    DesignerSpec::SocialWelfare {
                        utility: PayoffTable::match_indicator(mu.alphabets(), PayoffRole::Utility),
                        phi: *phi,
                    },
                ];
                Some(grid_checks(&mu, &[&designers[0], &designers[1]], &cfg)?)
            } else {
                None
            };
            let ok = grid_checks.as_deref().is_none_or(all_within);
            Ok((Generic(&Checked { report, grid_checks }).render(format), ok))
        }
        Command::Diverge { scenario, margin } => {
            let s = load(scenario)?;
            let cfg = cli.solver_config(Some(&s));
            let utility = s
                .utility
                .as_ref()
                .ok_or_else(|| Failure::Input("diverge needs a utility table".into()))?;
            let constraint = s
                .designers
                .iter()
                .find_map(|d| match d {
                    DesignerSpec::ConstrainedOptimization { constraint, .. } => Some(constraint.clone()),
                    _ => None,
                })
                .ok_or_else(|| Failure::Input("diverge needs a constrained designer".into()))?;
            let phi = s
                .designers
                .iter()
                .find_map(|d| match d {
                    DesignerSpec::SocialWelfare { phi, .. } => Some(*phi),
                    _ => None,
                })
                .ok_or_else(|| Failure::Input("diverge needs a welfare designer".into()))?;
            let report = construct_divergent_population(utility, &constraint, &phi, *margin, &cfg)?;
            let grid_checks = if cli.grid_check {
                let designers = [
                    DesignerSpec::ConstrainedOptimization {
                        accuracy: utility.with_role(PayoffRole::Accuracy),
                        constraint,
                    },
                    DesignerSpec::SocialWelfare {
                        utility: utility.clone(),
                        phi,
                    },
                ];
                Some(grid_checks(
                    &report.mu_constructed,
                    &[&designers[0], &designers[1]],
                    &cfg,
                )?)
            } else {
                None
            };
            let ok = grid_checks.as_deref().is_none_or(all_within);
            Ok((Generic(&Checked { report, grid_checks }).render(format), ok))
        }
        Command::Sweep {
            count,
            sizes,
            phi,
            constraint,
            epsilon,
        } => {
            let seed = cli.seed.unwrap_or(0);
            let mut sweep = SweepConfig::new(*sizes, *count, seed);
            sweep.phi = phi.validated()?;
            sweep.constraint = FairnessConstraint::new(*constraint, *epsilon)?;
            sweep.grid_check = cli.grid_check;
            let cfg = cli.solver_config(None);
            let report = disagreement_sweep(&sweep, &cfg)?;
            let ok = report.summary.grid_check_failures == 0;
            Ok((report.render(format), ok))
        }
    }
}

fn audit(
    s: &ScenarioFile,
    mu: &fairwelfare_core::model::PopulationDistribution,
    policy: Policy,
) -> Result<AuditReport, Failure> {
    let joint = induce_joint(mu, &policy)?;
    let (positive, negative) = s
        .designers
        .iter()
        .find_map(|d| match d {
            DesignerSpec::ConstrainedOptimization { constraint, .. } => {
                Some((constraint.positive_label.clone(), constraint.negative_label.clone()))
            }
            _ => None,
        })
        .unwrap_or_default();
    let mut violations = BTreeMap::new();
    for kind in ConstraintKind::ALL {
        let c = FairnessConstraint::new(kind, 0.0)?.with_labels(positive.clone(), negative.clone());
        let v = match violation(&joint, &c) {
            Ok(v) => Some(v),
            // The kind conditions on a type label this scenario lacks.
            Err(Error::Config(_)) => None,
            Err(e) => return Err(e.into()),
        };
        violations.insert(kind.name().to_string(), v);
    }
    let accuracy_table = s.accuracy.as_ref().or(s.utility.as_ref());
    let expected_accuracy = accuracy_table.map(|t| expected_payoff(&joint, t)).transpose()?;
    let welfare = s.designers.iter().find_map(|d| match d {
        DesignerSpec::SocialWelfare { utility, phi } => Some((utility, *phi)),
        _ => None,
    });
    let (social, gap) = match welfare {
        Some((u, phi)) => (
            defined(social_welfare(&joint, u, &phi))?,
            defined(jensen_gap(&joint, u, &phi))?,
        ),
        None => (None, None),
    };
    Ok(AuditReport {
        policy,
        violations,
        expected_accuracy,
        phi: welfare.map(|(_, phi)| phi),
        social_welfare: social,
        jensen_gap: gap,
    })
}

/// Parses `args` (program name first) and runs the command. Never exits the
/// process; `main` forwards the outcome.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                // --help and --version
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli) {
        Ok((text, within_bound)) => {
            let mut out = Outcome {
                code: 0,
                stdout: text,
                stderr: String::new(),
            };
            if !within_bound {
                out.code = 2;
                out.stderr = "grid check: solver objective outside the oracle bound\n".into();
            }
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &out.stdout) {
                    return Outcome {
                        code: 1,
                        stdout: String::new(),
                        stderr: format!("cannot write {}: {e}\n", path.display()),
                    };
                }
                out.stdout.clear();
            }
            out
        }
        Err(f) => Outcome {
            code: f.code(),
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("2,3,2,2"), Ok([2, 3, 2, 2]));
        assert!(parse_sizes("2,3,2").is_err());
        assert!(parse_sizes("2,0,2,2").is_err());
        assert!(parse_sizes("a,1,1,1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["fairwelfare", "frobnicate"]).code, 1);
        assert_eq!(run(["fairwelfare", "example1", "--delta", "0.75"]).code, 1);
        assert_eq!(
            run(["fairwelfare", "example1", "--delta", "0.75", "--phi", "cubic"]).code,
            1
        );
        assert_eq!(run(["fairwelfare", "--help"]).code, 0);
    }
}
