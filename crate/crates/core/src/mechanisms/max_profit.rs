//! Closed-form maximum achievable profit `MP(v)` for classes that have one.

use serde::{Deserialize, Serialize};

use super::{Kind, ProfitModel};
use crate::error::{domain, Result};
use crate::valuations::{CostFunction, Valuation, ValuationProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpKind {
    /// `Σ_j max_t { v_j(t) − c(t) }` over a single multi-unit item.
    TwoPartTariff,
    /// `Σ_j Σ_i v_j(e_i)·1{v_j(e_i) ≥ c(e_i)}` for additive buyers.
    LotteryMenuAdditiveCost,
    /// `Σ_i max_j v_j(e_i)·1{max_j v_j(e_i) ≥ c(e_i)}` for additive buyers.
    ItemPricingNonAnonymousAdditive,
    /// Same expression as item pricing: the top bid, when it covers the item's cost.
    SecondPriceNonAnonymousAdditive,
}

pub fn max_profit_mp(kind: MpKind, profile: &ValuationProfile, cost: &CostFunction) -> Result<f64> {
    cost.check_caps(profile.caps())?;
    let m = profile.m();
    match kind {
        MpKind::TwoPartTariff => {
            if m != 1 {
                return domain("two_part_tariff: MP requires a single item");
            }
            let kappa = profile.caps()[0];
            Ok(profile
                .buyers()
                .iter()
                .map(|v| (0..=kappa).map(|t| v.units_value(t) - cost.units_cost(t)).fold(f64::NEG_INFINITY, f64::max))
                .sum())
        }
        MpKind::LotteryMenuAdditiveCost => {
            check_additive(profile, cost)?;
            Ok(profile
                .buyers()
                .iter()
                .map(|v| {
                    (0..m).map(|i| v.item_value(i)).enumerate().filter(|&(i, x)| x >= cost.item_cost(i)).map(|(_, x)| x).sum::<f64>()
                })
                .sum())
        }
        MpKind::ItemPricingNonAnonymousAdditive | MpKind::SecondPriceNonAnonymousAdditive => {
            check_additive(profile, cost)?;
            Ok((0..m)
                .map(|i| {
                    let top = profile.buyers().iter().map(|v| v.item_value(i)).fold(0.0, f64::max);
                    if top >= cost.item_cost(i) {
                        top
                    } else {
                        0.0
                    }
                })
                .sum())
        }
    }
}

fn check_additive(profile: &ValuationProfile, cost: &CostFunction) -> Result<()> {
    if let Some(j) = profile.buyers().iter().position(|b| !matches!(b, Valuation::Additive(_))) {
        return domain(format!("MP closed form: buyer {j} is not additive"));
    }
    if !cost.is_linear() {
        return domain("MP closed form: requires zero or additive cost");
    }
    Ok(())
}

/// The closed form matching a model's class, when one applies to this profile.
pub(super) fn for_class(model: &ProfitModel, profile: &ValuationProfile) -> Option<f64> {
    let kind = match model.class.kind {
        Kind::TwoPartTariffMenu => MpKind::TwoPartTariff,
        Kind::LotteryMenu if model.class.structure.relaxation_z.is_none() => MpKind::LotteryMenuAdditiveCost,
        Kind::ItemPricing => MpKind::ItemPricingNonAnonymousAdditive,
        Kind::SecondPriceReserves => MpKind::SecondPriceNonAnonymousAdditive,
        _ => return None,
    };
    max_profit_mp(kind, profile, &model.cost).ok()
}
