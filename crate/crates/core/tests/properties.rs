mod common;

use common::*;
use mechdelin::complexity::{generalization_epsilon, quantile_a, BoundInputs};
use mechdelin::erm::{erm_exact_lowdim, erm_random, Objective, ParamBox};
use mechdelin::mechanisms::{Anonymity, Kind, MechanismClass, ProfitModel};
use mechdelin::partition::{buck_cell_bound, generic_cell_count};
use mechdelin::valuations::{CostFunction, DistributionSpec, SampleSet, ValuationProfile};
use proptest::prelude::*;
use rand::Rng;

fn classes() -> Vec<(MechanismClass, &'static str)> {
    vec![
        (MechanismClass::new(Kind::TwoPartTariffMenu).with_menu_length(2), "tariff"),
        (MechanismClass::new(Kind::ItemPricing), "item"),
        (MechanismClass::new(Kind::ItemPricing).with_anonymity(Anonymity::NonAnonymous), "item"),
        (MechanismClass::new(Kind::NonlinearPricing), "nonlinear"),
        (MechanismClass::new(Kind::SecondPriceReserves), "additive"),
        (MechanismClass::new(Kind::LotteryMenu).with_menu_length(2), "additive"),
        (MechanismClass::new(Kind::ItemLotteryMenu), "additive"),
        (MechanismClass::new(Kind::LambdaAuction), "additive"),
        (MechanismClass::new(Kind::Ama), "additive"),
        (MechanismClass::new(Kind::Vvca), "additive"),
        (MechanismClass::new(Kind::Mbarp), "item"),
    ]
}

fn instance(class: &MechanismClass, shape: &str, seed: u64) -> (ProfitModel, ValuationProfile, Vec<f64>) {
    let mut r = rng(seed);
    let (profile, cost) = match shape {
        "tariff" => (tariff_profile(&mut r, 2, 3, 3.0), CostFunction::additive(vec![uniform(&mut r, 0.0, 1.0)]).unwrap()),
        "nonlinear" => (general_profile(&mut r, 2, &[2], 3.0), CostFunction::Zero),
        "item" => (general_profile(&mut r, 2, &[1, 1], 3.0), general_cost(&mut r, 2, 2.0)),
        _ => (additive_profile(&mut r, 2, 2, 5.0), additive_cost(&mut r, 2, 2.0)),
    };
    let (lo, hi) = class.default_box(profile.n(), profile.caps(), profile.max_value()).unwrap();
    let params = lo.iter().zip(&hi).map(|(a, b)| uniform(&mut r, *a, *b)).collect();
    (ProfitModel::new(class.clone(), cost), profile, params)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profit_is_payments_minus_cost(seed in any::<u64>(), k in 0usize..11) {
        let (class, shape) = &classes()[k];
        let (m, p, params) = instance(class, shape, seed);
        let o = m.outcome(&params, &p).unwrap();
        let paid: f64 = o.payments.iter().sum();
        prop_assert!((o.profit - (paid - o.cost)).abs() <= 1e-9 * (1.0 + paid.abs()));
        prop_assert_eq!(m.profit(&params, &p).unwrap(), o.profit);
        // Boosted auctions may pay bidders to take a boosted allocation.
        if !m.kind().is_auction() {
            for j in 0..p.n() {
                prop_assert!(o.payments[j] >= -1e-12, "negative payment {}", o.payments[j]);
            }
        }
    }

    #[test]
    fn item_pricing_buyers_pick_a_best_bundle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = general_profile(&mut r, 3, &[1, 1, 1], 3.0);
        let m = ProfitModel::new(MechanismClass::new(Kind::ItemPricing), CostFunction::Zero);
        let prices: Vec<f64> = (0..3).map(|_| uniform(&mut r, 0.0, 4.0)).collect();
        let o = m.outcome(&prices, &p).unwrap();
        let mut left = 0b111usize;
        for j in 0..3 {
            let got: usize = (0..3).filter(|&i| o.allocation[j][i] == 1).map(|i| 1 << i).sum();
            let u = |s: usize| p.buyer(j).set_value(s) - (0..3).filter(|i| s >> i & 1 == 1).map(|i| prices[i]).sum::<f64>();
            prop_assert!(u(got) >= -1e-9);
            for s in 0..8usize {
                if s & !left == 0 {
                    prop_assert!(u(got) >= u(s) - 1e-9, "buyer {} prefers {:#b} to {:#b}", j, s, got);
                }
            }
            left &= !got;
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let atoms: Vec<ValuationProfile> = (0..5).map(|_| additive_profile(&mut r, 2, 2, 3.0)).collect();
        let d = DistributionSpec::uniform(atoms).unwrap();
        let a = d.sample(50, seed).unwrap();
        let b = d.sample(50, seed).unwrap();
        prop_assert_eq!(&a.atom_indices, &b.atom_indices);
        prop_assert!(a.profiles == b.profiles);
    }

    #[test]
    fn erm_value_reevaluates(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let profiles: Vec<ValuationProfile> = (0..n).map(|_| tariff_profile(&mut r, 1, 3, 2.0)).collect();
        let m = ProfitModel::new(MechanismClass::new(Kind::TwoPartTariffMenu), CostFunction::Zero);
        let obj = Objective::average(&SampleSet::from_profiles(profiles)).unwrap();
        let bx = ParamBox::default_for(&m, &obj).unwrap();
        let exact = erm_exact_lowdim(&m, &obj, &bx).unwrap();
        prop_assert!((obj.value(&m, &exact.best_params).unwrap() - exact.best_value).abs() <= 1e-12);
        let rand = erm_random(&m, &obj, &bx, 200, seed).unwrap();
        prop_assert!(exact.best_value >= rand.best_value - 1e-9);
    }

    #[test]
    fn epsilon_monotone(u in 0.1f64..100.0, d in 1u64..20, t in 1u64..50, n in 1u64..100_000, delta in 0.001f64..0.5) {
        let base = BoundInputs { u, d, t, n, delta, constant: 1.0 };
        let e = generalization_epsilon(&base);
        let more_n = generalization_epsilon(&BoundInputs { n: n + 1, ..base.clone() });
        let more_u = generalization_epsilon(&BoundInputs { u: 2.0 * u, ..base.clone() });
        let less_delta = generalization_epsilon(&BoundInputs { delta: delta / 2.0, ..base.clone() });
        let more_d = generalization_epsilon(&BoundInputs { d: d + 1, ..base });
        prop_assert!(more_n < e && more_u > e && less_delta > e && more_d > e);
    }

    #[test]
    fn buck_dominates_generic_count(d in 2u64..6, k in 0u64..200) {
        prop_assert!(buck_cell_bound(d, k) as u128 >= generic_cell_count(d, k));
    }

    #[test]
    fn quantile_leaves_fewer_than_bn_above(vals in prop::collection::vec(0.0f64..100.0, 1..200), b in 0.01f64..0.99) {
        let k = (b * vals.len() as f64).floor() as usize;
        match quantile_a(&vals, b) {
            Ok(a) => {
                let above = vals.iter().filter(|&&v| v > a).count();
                let at_least = vals.iter().filter(|&&v| v >= a).count();
                prop_assert!(above < k && at_least >= k);
            }
            Err(_) => prop_assert_eq!(k, 0),
        }
    }
}

#[test]
fn profit_at_tie_matches_limit_from_below() {
    // At a tie the buyer takes the seller's preferred option; lowering prices slightly
    // keeps the same choice, so profit is continuous from below.
    let mut r = rng(17);
    let m = ProfitModel::new(MechanismClass::new(Kind::ItemPricing), CostFunction::Zero);
    for _ in 0..200 {
        let p = additive_profile(&mut r, 2, 2, 5.0);
        let i = r.random_range(0..2usize);
        let mut prices: Vec<f64> = (0..2).map(|_| uniform(&mut r, 0.0, 5.0)).collect();
        prices[i] = p.buyer(0).item_value(i);
        let at = m.profit(&prices, &p).unwrap();
        let below: Vec<f64> = prices.iter().map(|x| x - 1e-7).collect();
        let lim = m.profit(&below, &p).unwrap();
        assert!((at - lim).abs() <= 1e-6, "profit {at} at tie, {lim} just below");
    }
}
