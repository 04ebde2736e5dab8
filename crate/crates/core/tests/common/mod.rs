#![allow(dead_code)]

use mechdelin::valuations::{CostFunction, Valuation, ValuationProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}

pub fn additive_values(r: &mut ChaCha8Rng, m: usize, hi: f64) -> Vec<f64> {
    (0..m).map(|_| uniform(r, 0.0, hi)).collect()
}

/// Monotone table over `0..=kappa` units with `v(0) = 0`.
pub fn unit_table(r: &mut ChaCha8Rng, kappa: u32, step: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut t = vec![0.0];
    for _ in 0..kappa {
        acc += uniform(r, 0.0, step);
        t.push(acc);
    }
    t
}

/// Monotone general valuation over the lattice of `caps` (item 0 fastest).
pub fn general_valuation(r: &mut ChaCha8Rng, caps: &[u32], step: f64) -> Valuation {
    let size: usize = caps.iter().map(|&k| k as usize + 1).product();
    let mut table = vec![0.0; size];
    for idx in 1..size {
        // Largest value among the bundles one unit smaller, plus a fresh increment.
        let mut rest = idx;
        let mut stride = 1;
        let mut below = 0.0f64;
        for &k in caps {
            let digit = rest % (k as usize + 1);
            rest /= k as usize + 1;
            if digit > 0 {
                below = below.max(table[idx - stride]);
            }
            stride *= k as usize + 1;
        }
        table[idx] = below + uniform(r, 0.0, step);
    }
    Valuation::general(caps, table).unwrap()
}

pub fn additive_profile(r: &mut ChaCha8Rng, n: usize, m: usize, hi: f64) -> ValuationProfile {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| additive_values(r, m, hi)).collect();
    ValuationProfile::additive(&rows).unwrap()
}

pub fn unit_demand_profile(r: &mut ChaCha8Rng, n: usize, m: usize, hi: f64) -> ValuationProfile {
    let buyers = (0..n).map(|_| Valuation::unit_demand(additive_values(r, m, hi)).unwrap()).collect();
    ValuationProfile::new(&vec![1; m], buyers).unwrap()
}

pub fn general_profile(r: &mut ChaCha8Rng, n: usize, caps: &[u32], step: f64) -> ValuationProfile {
    let buyers = (0..n).map(|_| general_valuation(r, caps, step)).collect();
    ValuationProfile::new(caps, buyers).unwrap()
}

pub fn tariff_profile(r: &mut ChaCha8Rng, n: usize, kappa: u32, step: f64) -> ValuationProfile {
    let buyers = (0..n).map(|_| Valuation::general(&[kappa], unit_table(r, kappa, step)).unwrap()).collect();
    ValuationProfile::new(&[kappa], buyers).unwrap()
}

pub fn additive_cost(r: &mut ChaCha8Rng, m: usize, hi: f64) -> CostFunction {
    CostFunction::additive(additive_values(r, m, hi)).unwrap()
}

/// General set cost over `m` unit-supply items, `c(∅) = 0`.
pub fn general_cost(r: &mut ChaCha8Rng, m: usize, hi: f64) -> CostFunction {
    let mut table: Vec<f64> = (0..1usize << m).map(|_| uniform(r, 0.0, hi)).collect();
    table[0] = 0.0;
    CostFunction::general(&vec![1; m], table).unwrap()
}
