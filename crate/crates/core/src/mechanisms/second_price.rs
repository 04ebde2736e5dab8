//! Second-price item auctions with (anonymous, grouped, or personal) reserve prices.
//!
//! Per item, the highest bidder (lowest index among equal bids) wins iff the bid reaches
//! the reserve that applies to them, and pays `max(second-highest bid, reserve)`.
//! Only sold items incur production cost.

use super::{Outcome, ProfitModel};
use crate::error::{domain, Result};
use crate::valuations::{Valuation, ValuationProfile};

/// `(winner, top bid, second bid)` for item `i`.
pub(crate) fn ranking(profile: &ValuationProfile, i: usize) -> (usize, f64, f64) {
    let mut top = (0usize, f64::NEG_INFINITY);
    let mut second = 0.0f64;
    for (j, b) in profile.buyers().iter().enumerate() {
        let v = b.item_value(i);
        if v > top.1 {
            if top.1.is_finite() {
                second = second.max(top.1);
            }
            top = (j, v);
        } else {
            second = second.max(v);
        }
    }
    (top.0, top.1, second)
}

pub(super) fn run(model: &ProfitModel, params: &[f64], profile: &ValuationProfile, mut out: Option<&mut Outcome>) -> Result<f64> {
    if let Some(j) = profile.buyers().iter().position(|b| !matches!(b, Valuation::Additive(_))) {
        return domain(format!("second_price_reserves: buyer {j} is not additive"));
    }
    let n = profile.n();
    let m = profile.m();
    let groups = model.class.anonymity.assignment(n)?;
    let tau = model.cfg.tau_tie;
    let mut masks = vec![0usize; n];
    let mut revenue = 0.0;
    for i in 0..m {
        let (j, top, second) = ranking(profile, i);
        let reserve = params[groups[j] * m + i];
        if top >= reserve - tau {
            let pay = second.max(reserve);
            masks[j] |= 1 << i;
            revenue += pay;
            if let Some(o) = out.as_deref_mut() {
                o.allocation[j][i] = 1;
                o.payments[j] += pay;
            }
        }
    }
    let cost: f64 = masks.iter().map(|&s| model.cost.set_cost(s)).sum();
    if let Some(o) = out {
        o.cost = cost;
        for j in 0..n {
            o.choices[j] = masks[j];
        }
    }
    Ok(revenue - cost)
}

#[cfg(test)]
mod tests {
    use crate::mechanisms::{Anonymity, Kind, MechanismClass, ProfitModel};
    use crate::valuations::{CostFunction, Valuation, ValuationProfile};

    #[test]
    fn reserve_cases() {
        let m = ProfitModel::new(MechanismClass::new(Kind::SecondPriceReserves), CostFunction::Zero);
        let v = ValuationProfile::additive(&[vec![5.0], vec![3.0]]).unwrap();
        assert_eq!(m.profit(&[4.0], &v).unwrap(), 4.0);
        assert_eq!(m.profit(&[6.0], &v).unwrap(), 0.0);
        assert_eq!(m.profit(&[2.0], &v).unwrap(), 3.0);
        let o = m.outcome(&[4.0], &v).unwrap();
        assert_eq!(o.allocation, vec![vec![1], vec![0]]);
    }

    #[test]
    fn personal_reserves_use_the_winners_entry() {
        let cls = MechanismClass::new(Kind::SecondPriceReserves).with_anonymity(Anonymity::NonAnonymous);
        let m = ProfitModel::new(cls, CostFunction::additive(vec![1.0]).unwrap());
        let v = ValuationProfile::additive(&[vec![5.0], vec![3.0]]).unwrap();
        assert_eq!(m.profit(&[4.5, 100.0], &v).unwrap(), 3.5);
        assert_eq!(m.profit(&[5.5, 0.0], &v).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_additive() {
        let m = ProfitModel::new(MechanismClass::new(Kind::SecondPriceReserves), CostFunction::Zero);
        let v = ValuationProfile::new(&[1], vec![Valuation::unit_demand(vec![1.0]).unwrap()]).unwrap();
        assert!(m.profit(&[0.0], &v).is_err());
    }
}
