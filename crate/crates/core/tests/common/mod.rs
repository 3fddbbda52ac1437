#![allow(dead_code)]

use fairwelfare_core::model::{Alphabets, Policy, PopulationDistribution};
use fairwelfare_core::objectives::{PayoffRole, PayoffTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Normalizes nonnegative weights; a small floor keeps every cell positive.
pub fn normalize(weights: &[f64], floor: f64) -> Vec<f64> {
    let w: Vec<f64> = weights.iter().map(|v| v + floor).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

pub fn population(sizes: [usize; 4], weights: &[f64]) -> PopulationDistribution {
    let a = Alphabets::numbered(sizes).unwrap();
    PopulationDistribution::new(a, normalize(weights, 1e-3)).unwrap()
}

pub fn policy(sizes: [usize; 4], weights: &[f64]) -> Policy {
    let a = Alphabets::numbered(sizes).unwrap();
    let rows = weights.chunks(sizes[3]).flat_map(|row| normalize(row, 1e-3)).collect();
    Policy::new(a, rows).unwrap()
}

pub fn table(sizes: [usize; 4], values: &[f64], role: PayoffRole) -> PayoffTable {
    let a = Alphabets::numbered(sizes).unwrap();
    PayoffTable::from_fn(&a, role, |d, y| values[d * sizes[1] + y]).unwrap()
}

/// `(sizes, population weights, policy weights, table values)` with every
/// alphabet of size 1 to 3.
pub fn instance() -> impl Strategy<Value = ([usize; 4], Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(nx, ny, ng, nd)| {
        (
            Just([nx, ny, ng, nd]),
            prop::collection::vec(0.0f64..1.0, nx * ny * ng),
            prop::collection::vec(0.0f64..1.0, nx * nd),
            prop::collection::vec(0.05f64..2.0, nd * ny),
        )
    })
}

/// Seeded random population, strictly positive.
pub fn seeded_population(rng: &mut ChaCha8Rng, sizes: [usize; 4]) -> PopulationDistribution {
    let n = sizes[0] * sizes[1] * sizes[2];
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    population(sizes, &w)
}

pub fn seeded_table(rng: &mut ChaCha8Rng, sizes: [usize; 4], lo: f64, hi: f64, role: PayoffRole) -> PayoffTable {
    let v: Vec<f64> = (0..sizes[1] * sizes[3]).map(|_| rng.random_range(lo..hi)).collect();
    table(sizes, &v, role)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
