mod common;

use common::*;
use fairwelfare_core::model::{induce_joint, Alphabets, Event, Policy, PopulationDistribution, Var};
use proptest::prelude::*;

proptest! {
    #[test]
    fn induced_joint_is_a_distribution((sizes, mu_w, pol_w, _) in instance()) {
        let mu = population(sizes, &mu_w);
        let a = policy(sizes, &pol_w);
        let p = induce_joint(&mu, &a).unwrap();
        let total: f64 = p.masses().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.masses().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn population_marginal_is_mu((sizes, mu_w, pol_w, _) in instance()) {
        let mu = population(sizes, &mu_w);
        let p = induce_joint(&mu, &policy(sizes, &pol_w)).unwrap();
        let m = p.marginal(&[Var::X, Var::Y, Var::G]).unwrap();
        for x in 0..sizes[0] {
            for y in 0..sizes[1] {
                for g in 0..sizes[2] {
                    prop_assert!((m.get(&[x, y, g]) - mu.mass(x, y, g)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn decisions_follow_the_policy_given_x((sizes, mu_w, pol_w, _) in instance()) {
        let mu = population(sizes, &mu_w);
        let a = policy(sizes, &pol_w);
        let p = induce_joint(&mu, &a).unwrap();
        let xd = p.marginal(&[Var::X, Var::D]).unwrap();
        let x = p.marginal(&[Var::X]).unwrap();
        for xi in 0..sizes[0] {
            for d in 0..sizes[3] {
                prop_assert!((xd.get(&[xi, d]) / x.get(&[xi]) - a.prob(xi, d)).abs() < 1e-9);
            }
        }
    }

    /// With X = G, the decision distribution of group g is policy row g.
    #[test]
    fn group_conditional_is_the_policy_row_when_covariate_is_group(
        ng in 1usize..=3, ny in 1usize..=3, nd in 1usize..=3,
        w in prop::collection::vec(0.0f64..1.0, 27),
        pw in prop::collection::vec(0.0f64..1.0, 9),
    ) {
        let a = Alphabets::numbered([ng, ny, ng, nd]).unwrap();
        let weights = normalize(&w[..ng * ny], 1e-3);
        let mu = PopulationDistribution::from_fn(a, |x, y, g| if x == g { weights[g * ny + y] } else { 0.0 }).unwrap();
        let pol = policy([ng, ny, ng, nd], &pw[..ng * nd]);
        let p = induce_joint(&mu, &pol).unwrap();
        for g in 0..ng {
            let dist = p.conditional_decision_distribution(&Event::new(None, Some(g))).unwrap();
            for (d, q) in dist.iter().enumerate() {
                prop_assert!((q - pol.prob(g, d)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn alphabets_must_agree() {
    let mu = population([2, 2, 2, 2], &[1.0; 8]);
    let other = Policy::uniform(Alphabets::numbered([2, 2, 2, 3]).unwrap());
    assert!(induce_joint(&mu, &other).is_err());
}
