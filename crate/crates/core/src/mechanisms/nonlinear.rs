//! Nonlinear pricing: a price for every quantity vector, or (decomposable variant) a
//! price schedule per item with `p(q) = Σ_{i: q_i ≥ 1} p_i(q_i)`.
//!
//! Full tables index bundles by their lattice index, so the empty bundle has a price slot.
//! Decomposable blocks hold `κ_i + 1` slots per item; slot `q_i = 0` is never charged.
//! Buyers may always walk away at utility 0.

use super::{better, Kind, Outcome, ProfitModel};
use crate::error::{Error, Result};
use crate::valuations::{Lattice, ValuationProfile};

const MAX_BUNDLES: usize = 1 << 16;

/// Price of bundle `idx` under one group's block.
pub(crate) fn bundle_price(kind: Kind, lattice: &Lattice, block: &[f64], idx: usize) -> f64 {
    if kind == Kind::NonlinearPricing {
        return block[idx];
    }
    let q = lattice.bundle(idx);
    let mut off = 0;
    let mut p = 0.0;
    for (i, &k) in lattice.caps().iter().enumerate() {
        if q[i] >= 1 {
            p += block[off + q[i] as usize];
        }
        off += k as usize + 1;
    }
    p
}

pub(super) fn run(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let lattice = profile.lattice();
    if lattice.size() > MAX_BUNDLES {
        return Err(Error::Resource(format!("nonlinear pricing over {} bundles", lattice.size())));
    }
    let kind = model.class.kind;
    let groups = model.class.anonymity.assignment(n)?;
    let block = params.len() / model.class.anonymity.group_count(n);
    let tau = model.cfg.tau_tie;
    let bundles: Vec<_> = lattice.bundles().collect();
    let mut profit = 0.0;
    for j in 0..n {
        let g = groups[j];
        let prices: Vec<f64> =
            (0..lattice.size()).map(|k| bundle_price(kind, lattice, &params[g * block..(g + 1) * block], k)).collect();
        let v = profile.buyer(j);
        let utils: Vec<f64> = bundles.iter().zip(&prices).map(|(q, p)| v.value(q) - p).collect();
        let best_u = utils.iter().cloned().fold(0.0, f64::max);
        // Option 0 is walking away; option k + 1 is bundle k.
        let mut pick: Option<(usize, f64, (i64, usize))> = (best_u <= tau).then_some((0, 0.0, (0, 0)));
        for k in 0..lattice.size() {
            if utils[k] < best_u - tau {
                continue;
            }
            let key = (-(bundles[k].iter().sum::<u32>() as i64), k + 1);
            if pick.is_none_or(|(_, p, pk)| better(prices[k], key, p, pk, tau)) {
                pick = Some((k + 1, prices[k], key));
            }
        }
        let (choice, pay, _) = pick.expect("walking away is always available");
        let c = if choice == 0 { 0.0 } else { model.cost.bundle_cost(&bundles[choice - 1]) };
        profit += pay - c;
        if let Some(o) = out.as_deref_mut() {
            if choice > 0 {
                o.allocation[j] = bundles[choice - 1].clone();
            }
            o.payments[j] = pay;
            o.cost += c;
            o.choices[j] = choice;
        }
    }
    Ok(profit)
}
