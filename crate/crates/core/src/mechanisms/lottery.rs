//! Lottery menus and per-item lottery menus.
//!
//! A lottery menu block holds `ℓ` entries `[φ_1..φ_m, price]`. Additive buyers receive each
//! item independently with probability `φ_i`; unit-demand buyers receive at most one item,
//! item `i` with probability `φ_i` (so `Σ φ_i ≤ 1`). Each buyer chooses independently from
//! their own copy of the menu; buying at exact indifference with the null lottery.
//!
//! An item lottery block holds, for every item, `ℓ` pairs `[φ, price]`; additive buyers pick
//! one pair per item.

use super::{better, Outcome, ProfitModel};
use crate::error::{domain, Result};
use crate::valuations::{CostFunction, Valuation, ValuationProfile};

/// `E[c(q)]` when item `i` is included independently with probability `phi[i]`
/// (`exclusive = false`) or exactly one item `i` is drawn with probability `phi[i]`
/// (`exclusive = true`).
pub fn expected_lottery_cost(cost: &CostFunction, phi: &[f64], exclusive: bool) -> f64 {
    let m = phi.len();
    if exclusive || cost.is_linear() {
        return (0..m).map(|i| phi[i] * cost.item_cost(i)).sum();
    }
    let mut total = 0.0;
    for s in 0..1usize << m {
        let mut w = 1.0;
        for (i, &p) in phi.iter().enumerate() {
            w *= if s >> i & 1 == 1 { p } else { 1.0 - p };
        }
        if w != 0.0 {
            total += w * cost.set_cost(s);
        }
    }
    total
}

fn check_phi(phi: &[f64], unit_demand: bool, at: usize) -> Result<()> {
    if let Some(k) = phi.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return domain(format!("params[{}]: lottery probability {} outside [0, 1]", at + k, phi[k]));
    }
    if unit_demand && phi.iter().sum::<f64>() > 1.0 + 1e-12 {
        return domain(format!("params[{at}..]: unit-demand lottery probabilities sum above 1"));
    }
    Ok(())
}

pub(super) fn run_menu(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let m = profile.m();
    let l = model.class.structure.menu_length;
    let block = l * (m + 1);
    let groups = model.class.anonymity.assignment(n)?;
    let tau = model.cfg.tau_tie;
    let z = model.class.structure.relaxation_z.as_deref();
    let mut profit = 0.0;
    for j in 0..n {
        let v = profile.buyer(j);
        let exclusive = match v {
            Valuation::Additive(_) => false,
            Valuation::UnitDemand(_) if z.is_none() => true,
            Valuation::UnitDemand(_) => return domain("structure.relaxation_z: requires additive buyers"),
            Valuation::General { .. } => return domain(format!("lottery_menu: buyer {j} must be additive or unit-demand")),
        };
        let menu = &params[groups[j] * block..(groups[j] + 1) * block];
        let mut best_u = 0.0f64;
        for a in 0..l {
            let e = &menu[a * (m + 1)..(a + 1) * (m + 1)];
            check_phi(&e[..m], exclusive, groups[j] * block + a * (m + 1))?;
            let u: f64 = (0..m).map(|i| e[i] * v.item_value(i)).sum::<f64>() - e[m];
            best_u = best_u.max(u);
        }
        let mut pick: Option<(usize, f64, (i64, usize))> = (best_u <= tau).then_some((0, 0.0, (0, 0)));
        for a in 0..l {
            let e = &menu[a * (m + 1)..(a + 1) * (m + 1)];
            let u: f64 = (0..m).map(|i| e[i] * v.item_value(i)).sum::<f64>() - e[m];
            if u >= best_u - tau && pick.is_none_or(|(_, p, pk)| better(e[m], (0, a + 1), p, pk, tau)) {
                pick = Some((a + 1, e[m], (0, a + 1)));
            }
        }
        let (choice, pay, _) = pick.expect("the null lottery is always available");
        let phi: Vec<f64> = if choice == 0 { vec![0.0; m] } else { menu[(choice - 1) * (m + 1)..][..m].to_vec() };
        let c = match z {
            Some(z) => model.cost.set_cost(relaxed_mask(&phi, z)),
            None => expected_lottery_cost(&model.cost, &phi, exclusive),
        };
        profit += pay - c;
        if let Some(o) = out.as_deref_mut() {
            o.payments[j] = pay;
            o.cost += c;
            o.choices[j] = choice;
            o.lottery.get_or_insert_with(|| vec![vec![0.0; m]; n])[j] = phi;
        }
    }
    Ok(profit)
}

pub(super) fn run_item_menu(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    let n = profile.n();
    let m = profile.m();
    if !model.cost.is_linear() {
        return domain("item_lottery_menu: requires zero or additive cost");
    }
    if let Some(j) = profile.buyers().iter().position(|b| !matches!(b, Valuation::Additive(_))) {
        return domain(format!("item_lottery_menu: buyer {j} is not additive"));
    }
    let l = model.class.structure.menu_length;
    let block = 2 * l * m;
    let groups = model.class.anonymity.assignment(n)?;
    let tau = model.cfg.tau_tie;
    for (k, pair) in params.chunks(2).enumerate() {
        check_phi(&pair[..1], false, 2 * k)?;
    }
    let mut profit = 0.0;
    for j in 0..n {
        let v = profile.buyer(j);
        let menu = &params[groups[j] * block..(groups[j] + 1) * block];
        for i in 0..m {
            let entries = &menu[i * 2 * l..(i + 1) * 2 * l];
            let vi = v.item_value(i);
            let best_u = (0..l).map(|a| entries[2 * a] * vi - entries[2 * a + 1]).fold(0.0, f64::max);
            let mut pick: Option<(usize, f64, (i64, usize))> = (best_u <= tau).then_some((0, 0.0, (0, 0)));
            for a in 0..l {
                let (phi, price) = (entries[2 * a], entries[2 * a + 1]);
                if phi * vi - price >= best_u - tau && pick.is_none_or(|(_, p, pk)| better(price, (0, a + 1), p, pk, tau)) {
                    pick = Some((a + 1, price, (0, a + 1)));
                }
            }
            let (choice, pay, _) = pick.expect("the null lottery is always available");
            let phi = if choice == 0 { 0.0 } else { entries[2 * (choice - 1)] };
            let c = phi * model.cost.item_cost(i);
            profit += pay - c;
            if let Some(o) = out.as_deref_mut() {
                o.payments[j] += pay;
                o.cost += c;
                o.lottery.get_or_insert_with(|| vec![vec![0.0; m]; n])[j][i] = phi;
            }
        }
    }
    Ok(profit)
}

/// Relaxed profit′(v, z): the lottery choice is unchanged, but the buyer receives exactly the
/// items with `z[i] < φ[i]` and the seller pays their cost.
pub fn profit_lottery_relaxed(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, z: &[f64]) -> Result<f64> {
    let mut relaxed = model.clone();
    relaxed.class.structure.relaxation_z = Some(z.to_vec());
    relaxed.profit(params, profile)
}

/// Items drawn by a realized `z` for a lottery `phi`.
pub(crate) fn relaxed_mask(phi: &[f64], z: &[f64]) -> usize {
    (0..phi.len()).filter(|&i| z[i] < phi[i]).fold(0, |s, i| s | 1 << i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{Kind, MechanismClass};

    fn model(cost: CostFunction) -> ProfitModel {
        ProfitModel::new(MechanismClass::new(Kind::LotteryMenu), cost)
    }

    #[test]
    fn purchase_is_weak() {
        let m = model(CostFunction::Zero);
        let v = ValuationProfile::additive(&[vec![4.0, 2.0]]).unwrap();
        assert_eq!(m.profit(&[0.5, 0.5, 2.9], &v).unwrap(), 2.9);
        assert_eq!(m.profit(&[0.5, 0.5, 3.1], &v).unwrap(), 0.0);
        assert_eq!(m.profit(&[0.5, 0.5, 3.0], &v).unwrap(), 3.0);
    }

    #[test]
    fn probabilities_checked() {
        let m = model(CostFunction::Zero);
        let v = ValuationProfile::additive(&[vec![4.0, 2.0]]).unwrap();
        assert!(m.profit(&[1.5, 0.5, 1.0], &v).is_err());
        let u = ValuationProfile::new(&[1, 1], vec![Valuation::unit_demand(vec![4.0, 2.0]).unwrap()]).unwrap();
        assert!(m.profit(&[0.7, 0.7, 1.0], &u).is_err());
        assert!(m.profit(&[0.5, 0.5, 1.0], &u).is_ok());
    }

    #[test]
    fn relaxed_profit_examples() {
        let cost = CostFunction::additive(vec![1.0, 1.0]).unwrap();
        let m = model(cost);
        let v = ValuationProfile::additive(&[vec![4.0, 2.0]]).unwrap();
        let params = [0.5, 0.5, 2.0];
        assert_eq!(profit_lottery_relaxed(&m, &params, &v, &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(profit_lottery_relaxed(&m, &params, &v, &[0.2, 0.9]).unwrap(), 1.0);
        assert_eq!(relaxed_mask(&[0.5, 0.5], &[0.2, 0.9]), 1);
    }

    #[test]
    fn expected_cost_expansion() {
        let cost = CostFunction::general(&[1, 1], vec![0.0, 1.0, 2.0, 5.0]).unwrap();
        let e = expected_lottery_cost(&cost, &[0.5, 0.25], false);
        let direct = 0.5 * 0.75 * 1.0 + 0.5 * 0.25 * 2.0 + 0.5 * 0.25 * 5.0;
        assert!((e - direct).abs() < 1e-15);
    }

    #[test]
    fn item_lottery_per_item_choice() {
        let cls = MechanismClass::new(Kind::ItemLotteryMenu);
        let m = ProfitModel::new(cls, CostFunction::additive(vec![1.0, 0.0]).unwrap());
        let v = ValuationProfile::additive(&[vec![4.0, 2.0]]).unwrap();
        // Item 0: (φ 1, price 3) → utility 1; item 1: (φ 0.5, price 1.5) → utility −0.5.
        let o = m.outcome(&[1.0, 3.0, 0.5, 1.5], &v).unwrap();
        assert_eq!(o.payments, vec![3.0]);
        assert_eq!(o.profit, 2.0);
    }
}
