//! Menus of two-part tariffs over a single item with `κ` units.
//!
//! Entry `a` of a buyer's menu is `(fee_a, unit_a)` at params `[2a, 2a+1]` of the buyer's
//! group block. Buying `t ≥ 1` units under entry `a` costs `fee_a + unit_a·t`.

use super::{better, Outcome, ProfitModel};
use crate::error::Result;
use crate::valuations::{Valuation, ValuationProfile};

/// Chosen `(option, units, payment)`; option 0 is no purchase, option `1 + a·κ + (t−1)` is
/// entry `a` with `t` units.
pub(crate) fn choose(v: &Valuation, menu: &[f64], kappa: u32, tau: f64) -> (usize, u32, f64) {
    let entries = menu.len() / 2;
    let mut best_u = 0.0f64;
    for a in 0..entries {
        for t in 1..=kappa {
            let u = v.units_value(t) - menu[2 * a] - menu[2 * a + 1] * t as f64;
            best_u = best_u.max(u);
        }
    }
    // The null option competes only when no purchase beats it by more than tau.
    let mut pick: Option<(usize, u32, f64, (i64, usize))> = (best_u <= tau).then_some((0, 0, 0.0, (0, 0)));
    for a in 0..entries {
        for t in 1..=kappa {
            let pay = menu[2 * a] + menu[2 * a + 1] * t as f64;
            let u = v.units_value(t) - pay;
            if u < best_u - tau {
                continue;
            }
            let k = (-(t as i64), a);
            if pick.is_none_or(|(_, _, p, pk)| better(pay, k, p, pk, tau)) {
                pick = Some((1 + a * kappa as usize + (t as usize - 1), t, pay, k));
            }
        }
    }
    let (choice, t, pay, _) = pick.expect("some option attains the best utility");
    (choice, t, pay)
}

pub(super) fn run(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let kappa = profile.caps()[0];
    let block = 2 * model.class.structure.menu_length;
    let groups = model.class.anonymity.assignment(n)?;
    let tau = model.cfg.tau_tie;
    let mut profit = 0.0;
    for j in 0..n {
        let g = groups[j];
        let (choice, t, pay) = choose(profile.buyer(j), &params[g * block..(g + 1) * block], kappa, tau);
        let c = model.cost.units_cost(t);
        profit += pay - c;
        if let Some(o) = out.as_deref_mut() {
            o.allocation[j][0] = t;
            o.payments[j] = pay;
            o.cost += c;
            o.choices[j] = choice;
        }
    }
    Ok(profit)
}
