//! Posted item prices with sequential arrivals and one copy of each item.
//!
//! Each arriving buyer takes the utility-maximizing subset of the remaining items under
//! their group's prices. Among near-ties the seller-favorable choice pays most; remaining
//! ties go to the smaller bundle, then the lower bitmask.

use super::{better, Outcome, ProfitModel};
use crate::error::Result;
use crate::valuations::{bits, Valuation, ValuationProfile};

/// Bitmask of the bundle bought from `remaining` and its payment.
pub(crate) fn choose(v: &Valuation, prices: &[f64], remaining: usize, tau: f64) -> (usize, f64) {
    let m = prices.len();
    let price_of = |s: usize| bits(s, m).map(|i| prices[i]).sum::<f64>();
    let mut best_u = 0.0f64;
    let mut s = remaining;
    loop {
        best_u = best_u.max(v.set_value(s) - price_of(s));
        if s == 0 {
            break;
        }
        s = (s - 1) & remaining;
    }
    let mut pick: Option<(usize, f64, (i64, usize))> = None;
    let mut s = remaining;
    loop {
        let pay = price_of(s);
        if v.set_value(s) - pay >= best_u - tau {
            let k = (s.count_ones() as i64, s);
            if pick.is_none_or(|(_, p, pk)| better(pay, k, p, pk, tau)) {
                pick = Some((s, pay, k));
            }
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & remaining;
    }
    let (s, pay, _) = pick.expect("the empty bundle is always available");
    (s, pay)
}

pub(super) fn run(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let m = profile.m();
    let groups = model.class.anonymity.assignment(n)?;
    let tau = model.cfg.tau_tie;
    let mut remaining = (1usize << m) - 1;
    let mut profit = 0.0;
    for j in model.class.order(n) {
        let g = groups[j];
        let (s, pay) = choose(profile.buyer(j), &params[g * m..(g + 1) * m], remaining, tau);
        remaining &= !s;
        let c = model.cost.set_cost(s);
        profit += pay - c;
        if let Some(o) = out.as_deref_mut() {
            for i in bits(s, m) {
                o.allocation[j][i] = 1;
            }
            o.payments[j] = pay;
            o.cost += c;
            o.choices[j] = s;
        }
    }
    Ok(profit)
}
