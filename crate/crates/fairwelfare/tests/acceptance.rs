//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.
//!
//! Every expected value is computed here by hand (closed forms, brute-force
//! grids) rather than taken from the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fairwelfare::core::constraints::{satisfies, violation, ConstraintKind, FairnessConstraint};
use fairwelfare::core::experiments::{
    build_example1, build_shared_majority, construct_divergent_population, nontrivial_utility_suite,
    sample_populations, DEFAULT_MARGIN,
};
use fairwelfare::core::model::{induce_joint, Alphabets, Policy, PopulationDistribution};
use fairwelfare::core::objectives::{
    generalized_objective, jensen_gap, social_welfare, welfare_certainty_equivalent, ExtendedReal, PayoffRole,
    PayoffTable, PhiFunction, UnfairnessMeasure,
};
use fairwelfare::core::solvers::{
    grid_oracle, solve_constrained, solve_rawls, solve_social_welfare, welfare_objective, DesignerSpec, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTAS: [f64; 3] = [0.6, 0.75, 0.9];

fn example_families() -> [PhiFunction; 3] {
    [
        PhiFunction::Identity,
        PhiFunction::Power { exponent: 0.5 },
        PhiFunction::NegativePower { gamma: 2.0 },
    ]
}

/// φ written out independently of the library.
fn phi_by_hand(phi: &PhiFunction, u: f64) -> f64 {
    match *phi {
        PhiFunction::Identity => u,
        PhiFunction::Power { exponent } => u.powf(exponent),
        PhiFunction::Log { shift } => (u + shift).ln(),
        PhiFunction::NegativePower { gamma } => -u.powf(-gamma),
        PhiFunction::RawlsLimit => unreachable!("pointwise φ only"),
    }
}

fn binary() -> Alphabets {
    Alphabets::numbered([2, 2, 2, 2]).unwrap()
}

fn match_utility() -> PayoffTable {
    PayoffTable::match_indicator(&binary(), PayoffRole::Utility)
}

fn eo(epsilon: f64) -> FairnessConstraint {
    FairnessConstraint::new(ConstraintKind::EqualizedOdds, epsilon).unwrap()
}

fn treat(delta: f64, q0: f64, q1: f64) -> (PopulationDistribution, Policy) {
    let mu = build_example1(delta).unwrap();
    let a = Policy::binary(mu.alphabets().clone(), &[q0, q1]).unwrap();
    (mu, a)
}

fn random_table(rng: &mut ChaCha8Rng, sizes: [usize; 4], lo: f64, hi: f64, role: PayoffRole) -> PayoffTable {
    let a = Alphabets::numbered(sizes).unwrap();
    let values: Vec<f64> = (0..sizes[1] * sizes[3]).map(|_| rng.random_range(lo..hi)).collect();
    PayoffTable::from_fn(&a, role, |d, y| values[d * sizes[1] + y]).unwrap()
}

fn random_policy(rng: &mut ChaCha8Rng, a: &Alphabets) -> Policy {
    let nd = a.nd();
    let rows = (0..a.nx())
        .flat_map(|_| {
            let w: Vec<f64> = (0..nd).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(move |v| v / total)
        })
        .collect();
    Policy::new(a.clone(), rows).unwrap()
}

/// Alphabet sizes up to 3 whose policy grid at resolution 50 stays under
/// the enumeration cap (three covariates with three decisions does not).
fn small_sizes(rng: &mut ChaCha8Rng) -> [usize; 4] {
    let mut s = [0; 4];
    for v in &mut s {
        *v = rng.random_range(1..=3);
    }
    if s[0] == 3 && s[3] == 3 {
        s[3] = 2;
    }
    s
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn example1_optimum() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut worst = (0.0f64, 0.0f64);
    for delta in DELTAS {
        let mu = build_example1(delta).unwrap();
        for phi in example_families() {
            let r = solve_social_welfare(&mu, &match_utility(), &phi, &cfg).map_err(|e| e.to_string())?;
            let (q0, q1) = (r.policy.prob(0, 1), r.policy.prob(1, 1));
            let policy_err = q0.abs().max((q1 - 1.0).abs());
            let welfare_err = (r.objective_value - phi_by_hand(&phi, delta)).abs();
            check(policy_err <= 1e-6, || {
                format!("δ={delta} {phi}: (q0, q1) = ({q0}, {q1})")
            })?;
            check(welfare_err <= 1e-9, || {
                format!("δ={delta} {phi}: welfare off by {welfare_err:e}")
            })?;
            worst = (worst.0.max(policy_err), worst.1.max(welfare_err));
        }
    }
    within_time(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "9 cases, max policy error {:.1e}, max welfare error {:.1e}, {:?}",
        worst.0,
        worst.1,
        start.elapsed()
    ))
}

fn equalized_odds_characterization() -> Outcome {
    let start = Instant::now();
    let c = eo(0.0);
    let mu = build_example1(0.75).unwrap();
    let mut points = 0;
    for i in 0..=100 {
        for j in 0..=100 {
            let (q0, q1) = (i as f64 / 100.0, j as f64 / 100.0);
            let a = Policy::binary(mu.alphabets().clone(), &[q0, q1]).unwrap();
            let v = violation(&induce_joint(&mu, &a).unwrap(), &c).unwrap();
            let zero = v <= 1e-9;
            let equal = (q0 - q1).abs() <= 1e-9;
            check(zero == equal, || format!("(q0, q1) = ({q0}, {q1}): violation {v}"))?;
            points += 1;
        }
    }
    within_time(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{points} grid policies, {:?}", start.elapsed()))
}

fn equal_treatment_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for delta in DELTAS {
        for phi in example_families() {
            for i in 0..=100 {
                let q = i as f64 / 100.0;
                let (mu, a) = treat(delta, q, q);
                let w = social_welfare(&induce_joint(&mu, &a).unwrap(), &match_utility(), &phi).unwrap();
                // Equal treatment rate q in both groups.
                let expected = 0.5 * phi_by_hand(&phi, q * delta + (1.0 - q) * (1.0 - delta))
                    + 0.5 * phi_by_hand(&phi, (1.0 - q) * delta + q * (1.0 - delta));
                let err = (w - expected).abs();
                check(err <= 1e-9, || format!("δ={delta} {phi} q={q}: {w} vs {expected}"))?;
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("9 × 101 equal-treatment policies, max error {worst:.1e}"))
}

fn jensen_chain() -> Outcome {
    let mut tightest = f64::INFINITY;
    for delta in DELTAS {
        for phi in example_families() {
            let best = (0..=100)
                .map(|i| {
                    let q = i as f64 / 100.0;
                    let (mu, a) = treat(delta, q, q);
                    social_welfare(&induce_joint(&mu, &a).unwrap(), &match_utility(), &phi).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let half = phi_by_hand(&phi, 0.5);
            let top = phi_by_hand(&phi, delta);
            check(best <= half + 1e-9, || {
                format!("δ={delta} {phi}: best equal treatment {best} > φ(½) = {half}")
            })?;
            check(half < top - 1e-9, || {
                format!("δ={delta} {phi}: φ(½) = {half} not below φ(δ) = {top}")
            })?;
            tightest = tightest.min(top - half);
        }
    }
    Ok(format!("9 cases, smallest φ(δ) − φ(½) = {tightest:.4}"))
}

fn relaxation_robustness() -> Outcome {
    let cfg = SolverConfig::default();
    for delta in DELTAS {
        let mu = build_example1(delta).unwrap();
        for phi in example_families() {
            let r = solve_social_welfare(&mu, &match_utility(), &phi, &cfg).map_err(|e| e.to_string())?;
            let p = induce_joint(&mu, &r.policy).unwrap();
            let v = violation(&p, &eo(0.0)).unwrap();
            check((v - 1.0).abs() <= 1e-9, || format!("δ={delta} {phi}: violation {v}"))?;
            for epsilon in [0.0, 0.25, 0.5, 0.9] {
                check(!satisfies(&p, &eo(epsilon)).unwrap(), || {
                    format!("δ={delta} {phi}: satisfies ε={epsilon}")
                })?;
            }
            check(satisfies(&p, &eo(1.0)).unwrap(), || {
                format!("δ={delta} {phi}: fails ε=1")
            })?;
        }
    }
    Ok("violation 1 on 9 cases; unsatisfied for ε < 1, satisfied at ε = 1".into())
}

fn divergence_construction() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let oracle_cfg = SolverConfig {
        grid_resolution: 100,
        ..SolverConfig::default()
    };
    let families = [
        PhiFunction::Power { exponent: 0.5 },
        PhiFunction::Log { shift: 0.5 },
        PhiFunction::NegativePower { gamma: 2.0 },
    ];
    let mut cases = 0;
    for (name, u) in nontrivial_utility_suite() {
        for kind in ConstraintKind::ALL {
            let c = FairnessConstraint::new(kind, 0.0).unwrap();
            for phi in families {
                let tag = || format!("{name} {kind} {phi}");
                let r = construct_divergent_population(&u, &c, &phi, DEFAULT_MARGIN, &cfg)
                    .map_err(|e| format!("{}: {e}", tag()))?;
                check(r.diverged, || format!("{}: designers agree", tag()))?;

                // Exhaustive search over the 101 × 101 policy grid must find
                // the same welfare optimum, which treats exactly one group.
                let mu = &r.mu_constructed;
                let grid = grid_oracle(mu, welfare_objective(mu, &u, &phi).unwrap(), &oracle_cfg).unwrap();
                check(grid.policy.max_abs_diff(&r.sw_policy) <= 1e-6, || {
                    format!(
                        "{}: grid optimum {:?} vs {:?}",
                        tag(),
                        grid.policy.rows(),
                        r.sw_policy.rows()
                    )
                })?;
                let designers = [
                    DesignerSpec::SocialWelfare {
                        utility: u.clone(),
                        phi,
                    },
                    DesignerSpec::ConstrainedOptimization {
                        accuracy: u.with_role(PayoffRole::Accuracy),
                        constraint: c.clone(),
                    },
                ];
                for d in &designers {
                    let result = d.solve(mu, &cfg).unwrap();
                    let g = d.grid_check(mu, &result, &oracle_cfg).unwrap();
                    check(g.within_bound, || format!("{}: grid check {g:?}", tag()))?;
                }
                cases += 1;
            }
        }
    }
    within_time(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{cases} cases diverged and matched the resolution-100 grid, {:?}",
        start.elapsed()
    ))
}

fn shared_majority_agreement() -> Outcome {
    let cfg = SolverConfig::default();
    let mu = build_shared_majority(0.75).unwrap();
    let accuracy = match_utility().with_role(PayoffRole::Accuracy);
    let co = solve_constrained(&mu, &accuracy, &eo(0.0), &cfg).map_err(|e| e.to_string())?;
    let co_joint = induce_joint(&mu, &co.policy).unwrap();
    let mut worst_tv = 0.0f64;
    for phi in example_families() {
        let sw = solve_social_welfare(&mu, &match_utility(), &phi, &cfg).map_err(|e| e.to_string())?;
        let sw_joint = induce_joint(&mu, &sw.policy).unwrap();
        let tv = sw_joint.tv_distance(&co_joint).unwrap();
        let v = violation(&sw_joint, &eo(0.0)).unwrap();
        check(tv <= 1e-6, || format!("{phi}: TV {tv}"))?;
        check(v <= 1e-9, || {
            format!("{phi}: welfare optimum violates equalized odds by {v}")
        })?;
        worst_tv = worst_tv.max(tv);
    }
    Ok(format!(
        "3 welfare families agree with the constrained optimum, max TV {worst_tv:.1e}"
    ))
}

fn utilitarian_reduction() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let populations = sample_populations([2, 2, 2, 2], 50, 8).unwrap();
    let mut worst = 0.0f64;
    for (i, mu) in populations.iter().enumerate() {
        let u = random_table(&mut rng, [2, 2, 2, 2], -1.0, 1.0, PayoffRole::Utility);
        let sw = solve_social_welfare(mu, &u, &PhiFunction::Identity, &cfg).map_err(|e| e.to_string())?;
        let co =
            solve_constrained(mu, &u.with_role(PayoffRole::Accuracy), &eo(1.0), &cfg).map_err(|e| e.to_string())?;
        let err = (sw.objective_value - co.objective_value).abs();
        check(err <= 1e-6, || {
            format!("instance {i}: {} vs {}", sw.objective_value, co.objective_value)
        })?;
        worst = worst.max(err);
    }
    Ok(format!("50 instances, max objective difference {worst:.1e}"))
}

fn rawls_limit() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let populations = sample_populations([2, 2, 2, 2], 20, 9).unwrap();
    let mut worst = 0.0f64;
    for (i, mu) in populations.iter().enumerate() {
        let u = random_table(&mut rng, [2, 2, 2, 2], 0.1, 1.0, PayoffRole::Utility);
        let rawls = solve_rawls(mu, &u, &cfg).map_err(|e| e.to_string())?.objective_value;
        let mut last = f64::INFINITY;
        for gamma in [1.0, 10.0, 100.0, 1e4] {
            let phi = PhiFunction::NegativePower { gamma };
            let r = solve_social_welfare(mu, &u, &phi, &cfg).map_err(|e| format!("instance {i} γ={gamma}: {e}"))?;
            let ce = welfare_certainty_equivalent(&induce_joint(mu, &r.policy).unwrap(), &u, &phi).unwrap();
            check(ce <= last + 1e-9, || {
                format!("instance {i}: CE rises to {ce} at γ={gamma} from {last}")
            })?;
            last = ce;
        }
        let err = (last - rawls).abs();
        check(err <= 1e-3, || {
            format!("instance {i}: CE at γ=1e4 is {last}, max-min value {rawls}")
        })?;
        worst = worst.max(err);
    }
    Ok(format!(
        "20 instances, CE nonincreasing in γ, max |CE(1e4) − max-min| {worst:.1e}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let families = [
        PhiFunction::Identity,
        PhiFunction::Power { exponent: 0.5 },
        PhiFunction::Log { shift: 0.5 },
        PhiFunction::NegativePower { gamma: 2.0 },
        PhiFunction::RawlsLimit,
    ];
    let mut worst_ratio = 0.0f64;
    for i in 0..50 {
        let mut sizes = small_sizes(&mut rng);
        sizes[1] = sizes[1].max(2);
        let mu = sample_populations(sizes, 1, rng.random()).unwrap().remove(0);
        let u = random_table(&mut rng, sizes, 0.1, 1.5, PayoffRole::Utility);
        let v = random_table(&mut rng, sizes, 0.0, 1.0, PayoffRole::Accuracy);
        let kind = ConstraintKind::ALL[i % 4];
        let epsilon = [0.0, 0.05, 0.2][i % 3];
        let designers = [
            DesignerSpec::SocialWelfare {
                utility: u,
                phi: families[i % families.len()],
            },
            DesignerSpec::ConstrainedOptimization {
                accuracy: v,
                constraint: FairnessConstraint::new(kind, epsilon).unwrap(),
            },
        ];
        for d in &designers {
            let result = d.solve(&mu, &cfg).map_err(|e| format!("instance {i} {sizes:?}: {e}"))?;
            let g = d.grid_check(&mu, &result, &cfg).map_err(|e| e.to_string())?;
            check(g.within_bound, || format!("instance {i} {sizes:?}: {g:?}"))?;
            if g.bound > 0.0 {
                worst_ratio = worst_ratio.max(g.discrepancy.abs() / g.bound);
            }
        }
    }
    within_time(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "100 solves within the resolution-50 bound, worst |discrepancy|/bound {worst_ratio:.3}, {:?}",
        start.elapsed()
    ))
}

fn generalized_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let families = [
        PhiFunction::Identity,
        PhiFunction::Power { exponent: 0.5 },
        PhiFunction::Log { shift: 0.5 },
        PhiFunction::NegativePower { gamma: 2.0 },
    ];
    let mut worst = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for i in 0..50 {
        let sizes = [
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=3),
        ];
        let mu = sample_populations(sizes, 1, rng.random()).unwrap().remove(0);
        let a = random_policy(&mut rng, mu.alphabets());
        let p = induce_joint(&mu, &a).unwrap();
        let u = random_table(&mut rng, sizes, 0.1, 1.5, PayoffRole::Utility);
        for phi in families {
            let h = UnfairnessMeasure::JensenGap {
                utility: u.clone(),
                phi,
            };
            let ExtendedReal::Finite(g) = generalized_objective(&p, &u, &phi, &h).unwrap() else {
                return Err(format!("joint {i} {phi}: objective is −∞"));
            };
            let w = social_welfare(&p, &u, &phi).unwrap();
            check((g - w).abs() <= 1e-12, || {
                format!("joint {i} {phi}: {g} vs welfare {w}")
            })?;
            let gap = jensen_gap(&p, &u, &phi).unwrap();
            check(gap >= -1e-12, || format!("joint {i} {phi}: gap {gap}"))?;
            if phi.is_linear() {
                check(gap.abs() <= 1e-9, || format!("joint {i}: identity gap {gap}"))?;
            }
            worst = worst.max((g - w).abs());
            min_gap = min_gap.min(gap);
        }
    }
    Ok(format!(
        "50 joints × 4 families, max |objective − welfare| {worst:.1e}, min gap {min_gap:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("example optimum treats exactly one group", example1_optimum),
        (
            "equalized odds holds iff treatment rates match",
            equalized_odds_characterization,
        ),
        ("equal-treatment welfare closed form", equal_treatment_closed_form),
        ("equal treatment capped at φ(½) < φ(δ)", jensen_chain),
        ("welfare optimum fails every relaxation below 1", relaxation_robustness),
        ("divergent population construction", divergence_construction),
        ("shared-majority population agreement", shared_majority_agreement),
        (
            "identity welfare equals the unconstrained optimum",
            utilitarian_reduction,
        ),
        ("negative-power welfare approaches max-min", rawls_limit),
        ("solvers agree with the grid oracle", oracle_equivalence),
        ("generalized objective with Jensen-gap penalty", generalized_consistency),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    let total = start.elapsed();
    println!(
        "{} of {} criteria passed in {total:?}",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
