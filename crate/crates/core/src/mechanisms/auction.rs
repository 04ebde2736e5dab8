//! Affine maximizer auctions and their special cases, by exhaustive allocation enumeration.
//!
//! Items have one copy each. An allocation is an owner vector `o ∈ {0..n}^m` (0 leaves the
//! item unallocated, `j + 1` gives it to buyer j) with index `Σ_i o_i·(n+1)^i`.
//!
//! Parameter layouts:
//! - λ-auction: one boost per boosted allocation (or per allocation when none are listed).
//! - AMA: `[w_1..w_n, λ...]`.
//! - VVCA: `[w_1..w_n, c_{j,s}]` with `s` ranging over item bitmasks, buyer-major;
//!   `λ(Q) = Σ_j c_{j, q_j}`.
//! - MBARP: `[r_1..r_m, γ]`; unallocated items are worth their reserve to the seller and
//!   `λ(Q) = γ` iff some buyer receives every item.

use super::{Kind, Outcome, ProfitModel};
use crate::error::{domain, Error, Result};
use crate::valuations::ValuationProfile;

/// `(n+1)^m`, or a resource error above `limit`.
pub fn allocation_count(n: usize, m: usize, limit: usize) -> Result<usize> {
    let mut k: usize = 1;
    for _ in 0..m {
        k = k
            .checked_mul(n + 1)
            .filter(|&k| k <= limit.min(1 << 26))
            .ok_or_else(|| Error::Resource(format!("(n+1)^m = {}^{m} allocations exceed the enumeration limit {limit}", n + 1)))?;
    }
    Ok(k)
}

/// Item bitmask of every buyer under allocation `a`.
pub fn allocation_bundles(n: usize, m: usize, mut a: usize) -> Vec<usize> {
    let mut masks = vec![0usize; n];
    for i in 0..m {
        let o = a % (n + 1);
        a /= n + 1;
        if o > 0 {
            masks[o - 1] |= 1 << i;
        }
    }
    masks
}

pub(crate) fn owners_index(n: usize, owners: &[usize]) -> usize {
    owners.iter().rev().fold(0, |acc, &o| acc * (n + 1) + o)
}

/// Welfare terms of one auction instance: `sw[a] = Σ_j wv[a][j] + extra[a]`.
pub(crate) struct Welfare {
    pub n: usize,
    pub weights: Vec<f64>,
    pub wv: Vec<f64>,
    pub sw: Vec<f64>,
    pub cost: Vec<f64>,
    /// Bitmask of buyers receiving a non-empty bundle.
    pub served: Vec<u64>,
}

impl Welfare {
    fn k(&self) -> usize {
        self.sw.len()
    }

    /// True when allocation `a` is available without buyer `skip` (who then receives nothing).
    pub fn admits(&self, a: usize, skip: Option<usize>) -> bool {
        skip.is_none_or(|j| self.served[a] >> j & 1 == 0)
    }

    /// Lowest-index allocation within `tau` of the best welfare, over the allocations
    /// available without buyer `skip`.
    pub fn argmax(&self, skip: Option<usize>, tau: f64) -> usize {
        let cands = (0..self.k()).filter(|&a| self.admits(a, skip));
        let best = cands.clone().map(|a| self.sw[a]).fold(f64::NEG_INFINITY, f64::max);
        cands.clone().find(|&a| self.sw[a] >= best - tau).unwrap_or(0)
    }

    pub fn without(&self, a: usize, j: usize) -> f64 {
        self.sw[a] - self.wv[a * self.n + j]
    }
}

/// Boost of every allocation index, decoded from the parameter vector.
fn boosts(model: &ProfitModel, params: &[f64], n: usize, k: usize) -> Result<Vec<f64>> {
    let lam = match model.class.kind {
        Kind::LambdaAuction => params,
        Kind::Ama => &params[n..],
        _ => unreachable!(),
    };
    if let Some(i) = lam.iter().position(|&x| x < 0.0) {
        return domain(format!("params: boost λ #{i} is negative"));
    }
    match &model.class.structure.boosted {
        None => Ok(lam.to_vec()),
        Some(list) => {
            let mut out = vec![0.0; k];
            let mut seen = vec![false; k];
            for (q, owners) in list.iter().enumerate() {
                let a = owners_index(n, owners);
                if seen[a] {
                    return domain(format!("structure.boosted[{q}]: duplicate allocation"));
                }
                seen[a] = true;
                out[a] = lam[q];
            }
            Ok(out)
        }
    }
}

pub(crate) fn welfare(model: &ProfitModel, params: &[f64], profile: &ValuationProfile) -> Result<Welfare> {
    let n = profile.n();
    let m = profile.m();
    let k = allocation_count(n, m, model.cfg.enum_limit)?;
    let sets = 1usize << m;
    let full = sets - 1;
    let weights: Vec<f64> = match model.class.kind {
        Kind::Ama | Kind::Vvca => params[..n].to_vec(),
        _ => vec![1.0; n],
    };
    if let Some(j) = weights.iter().position(|&w| w <= 0.0) {
        return domain(format!("params[{j}]: bidder weight must be positive"));
    }
    let values: Vec<f64> = (0..n).flat_map(|j| (0..sets).map(move |s| (j, s))).map(|(j, s)| profile.buyer(j).set_value(s)).collect();
    let boost_table = match model.class.kind {
        Kind::LambdaAuction | Kind::Ama => Some(boosts(model, params, n, k)?),
        _ => None,
    };
    if model.class.kind == Kind::Vvca {
        if let Some(i) = params[n..].iter().position(|&x| x < 0.0) {
            return domain(format!("params[{}]: VVCA boost is negative", n + i));
        }
    }
    if model.class.kind == Kind::Mbarp && params[m] < 0.0 {
        return domain(format!("params[{m}]: grand-bundle boost γ must be non-negative"));
    }
    let mut wv = vec![0.0; k * n];
    let mut sw = vec![0.0; k];
    let mut cost = vec![0.0; k];
    let mut served = vec![0u64; k];
    for a in 0..k {
        let masks = allocation_bundles(n, m, a);
        served[a] = masks.iter().enumerate().filter(|(_, &s)| s != 0).fold(0, |acc, (j, _)| acc | 1 << j);
        let mut extra = 0.0;
        for (j, &s) in masks.iter().enumerate() {
            wv[a * n + j] = weights[j] * values[j * sets + s];
            cost[a] += model.cost.set_cost(s);
        }
        extra += match model.class.kind {
            Kind::LambdaAuction | Kind::Ama => boost_table.as_ref().unwrap()[a],
            Kind::Vvca => masks.iter().enumerate().map(|(j, &s)| params[n + j * sets + s]).sum(),
            Kind::Mbarp => {
                let allocated = masks.iter().fold(0, |acc, &s| acc | s);
                let reserves: f64 = (0..m).filter(|i| allocated >> i & 1 == 0).map(|i| params[i]).sum();
                let grand = masks.contains(&full);
                reserves + if grand { params[m] } else { 0.0 }
            }
            _ => unreachable!(),
        };
        sw[a] = wv[a * n..(a + 1) * n].iter().sum::<f64>() + extra - cost[a];
    }
    Ok(Welfare { n, weights, wv, sw, cost, served })
}

pub(super) fn run(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let m = profile.m();
    let tau = model.cfg.tau_tie;
    let w = welfare(model, params, profile)?;
    let star = w.argmax(None, tau);
    let mut revenue = 0.0;
    for j in 0..n {
        let alt = w.argmax(Some(j), tau);
        let pay = (w.without(alt, j) - w.without(star, j)) / w.weights[j];
        revenue += pay;
        if let Some(o) = out.as_deref_mut() {
            o.payments[j] = pay;
        }
    }
    if let Some(o) = out {
        for (j, s) in allocation_bundles(n, m, star).into_iter().enumerate() {
            for i in 0..m {
                o.allocation[j][i] = (s >> i & 1) as u32;
            }
            o.choices[j] = star;
        }
        o.cost = w.cost[star];
    }
    Ok(revenue - w.cost[star])
}
