//! Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//! Values are checked against oracles written here, not against the library's own helpers.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use mechdelin::complexity::{
    compute_u, gap_experiment, item_pricing_shattering_instance, quantile_a, shattering_check, verify_sup_decomposition, ShatterStrategy,
};
use mechdelin::erm::{erm_exact_lowdim, erm_grid, erm_random, Objective, ParamBox, SupMethod, GRID_LIMIT};
use mechdelin::mechanisms::{max_profit_mp, profit_lottery_relaxed, Anonymity, Kind, MechanismClass, MpKind, ProfitModel};
use mechdelin::partition::{
    buck_cell_bound, enumerate_cells, hyperplanes_for, sample_cells, verify_affine_in_cell, Arrangement, Hyperplane,
};
use mechdelin::rng::split;
use mechdelin::spm::{spm_select, union_bound_check, Hierarchy, Levels, SpmConfig, Weights};
use mechdelin::valuations::{Atom, CostFunction, DistributionSpec, SampleSet, Valuation, ValuationProfile};
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn model(class: MechanismClass, cost: CostFunction) -> ProfitModel {
    ProfitModel::new(class, cost)
}

// 1. Tariff partition for v=(6,9,11,12), κ=4: ten hyperplanes and demand regions {0,1,2,3,4}.
fn fig1() -> Check {
    let table = vec![0.0, 6.0, 9.0, 11.0, 12.0];
    let p = ValuationProfile::new(&[4], vec![ok(Valuation::general(&[4], table.clone()))?]).unwrap();
    let m = model(MechanismClass::new(Kind::TwoPartTariffMenu), CostFunction::Zero);
    let hs = ok(hyperplanes_for(&m, &p))?;
    ensure!(hs.len() == 10, "expected 10 hyperplanes, got {}", hs.len());
    let arr = ok(Arrangement::new(hs, vec![0.0, 0.0], vec![13.0, 13.0]))?;
    let cells = ok(enumerate_cells(&arr))?.cells;
    let mut demands = BTreeSet::new();
    for c in &cells {
        let (fee, unit) = (c.witness[0], c.witness[1]);
        // Oracle: the utility-maximizing quantity, unique at an interior witness.
        let util = |t: usize| if t == 0 { 0.0 } else { table[t] - fee - unit * t as f64 };
        let best = (0..5).max_by(|&a, &b| util(a).partial_cmp(&util(b)).unwrap()).unwrap();
        let got = ok(m.outcome(&c.witness, &p))?.demand()[0] as usize;
        ensure!(got == best, "witness {:?}: engine demand {got}, oracle {best}", c.witness);
        demands.insert(got);
    }
    ensure!(demands == (0..5).collect(), "demand signatures {demands:?}");
    Ok(format!("10 hyperplanes, {} cells, demands {demands:?}", cells.len()))
}

struct Case {
    name: &'static str,
    model: ProfitModel,
    profile: ValuationProfile,
    bx: (Vec<f64>, Vec<f64>),
}

fn default_case(name: &'static str, model: ProfitModel, profile: ValuationProfile) -> Case {
    let bx = model.class.default_box(profile.n(), profile.caps(), profile.max_value()).unwrap();
    Case { name, model, profile, bx }
}

fn delineability_cases(seed: u64) -> Vec<Case> {
    let mut r = rng(seed);
    let r = &mut r;
    let c = MechanismClass::new;
    let mut out = vec![
        default_case("tariff l=1", model(c(Kind::TwoPartTariffMenu), CostFunction::Zero), tariff_profile(r, 1, 3, 3.0)),
        default_case(
            "tariff l=2",
            model(c(Kind::TwoPartTariffMenu).with_menu_length(2), CostFunction::additive(vec![uniform(r, 0.0, 1.0)]).unwrap()),
            tariff_profile(r, 2, 3, 3.0),
        ),
        default_case(
            "tariff personal",
            model(c(Kind::TwoPartTariffMenu).with_anonymity(Anonymity::NonAnonymous), CostFunction::Zero),
            tariff_profile(r, 2, 2, 3.0),
        ),
        default_case("item pricing additive", model(c(Kind::ItemPricing), additive_cost(r, 2, 2.0)), additive_profile(r, 2, 2, 5.0)),
        default_case(
            "item pricing personal",
            model(c(Kind::ItemPricing).with_anonymity(Anonymity::NonAnonymous), CostFunction::Zero),
            additive_profile(r, 2, 2, 5.0),
        ),
        default_case("item pricing unit-demand", model(c(Kind::ItemPricing), CostFunction::Zero), unit_demand_profile(r, 2, 2, 5.0)),
        default_case("item pricing general", model(c(Kind::ItemPricing), general_cost(r, 2, 1.0)), general_profile(r, 2, &[1, 1], 3.0)),
        default_case("nonlinear", model(c(Kind::NonlinearPricing), CostFunction::Zero), general_profile(r, 2, &[2], 3.0)),
        default_case(
            "nonlinear decomposable",
            model(c(Kind::NonlinearPricingDecomposable), CostFunction::Zero),
            general_profile(r, 1, &[1, 2], 3.0),
        ),
        default_case("second price", model(c(Kind::SecondPriceReserves), additive_cost(r, 2, 1.0)), additive_profile(r, 3, 2, 5.0)),
        default_case(
            "second price personal",
            model(c(Kind::SecondPriceReserves).with_anonymity(Anonymity::NonAnonymous), CostFunction::Zero),
            additive_profile(r, 2, 2, 5.0),
        ),
        default_case("lottery m=1", model(c(Kind::LotteryMenu), additive_cost(r, 1, 2.0)), additive_profile(r, 2, 1, 5.0)),
        default_case(
            "lottery l=2",
            model(c(Kind::LotteryMenu).with_menu_length(2), additive_cost(r, 2, 2.0)),
            additive_profile(r, 2, 2, 5.0),
        ),
        default_case(
            "lottery relaxed",
            model(c(Kind::LotteryMenu).with_relaxation(vec![uniform(r, 0.0, 1.0), uniform(r, 0.0, 1.0)]), general_cost(r, 2, 2.0)),
            additive_profile(r, 2, 2, 5.0),
        ),
        default_case("item lottery m=1", model(c(Kind::ItemLotteryMenu), additive_cost(r, 1, 2.0)), additive_profile(r, 2, 1, 5.0)),
        default_case("item lottery m=2", model(c(Kind::ItemLotteryMenu), CostFunction::Zero), additive_profile(r, 2, 2, 5.0)),
        default_case("lambda auction", model(c(Kind::LambdaAuction), CostFunction::Zero), additive_profile(r, 2, 1, 5.0)),
        default_case(
            "lambda auction boosted",
            model(c(Kind::LambdaAuction).with_boosted(vec![vec![1, 2], vec![0, 1]]), additive_cost(r, 2, 1.0)),
            additive_profile(r, 2, 2, 5.0),
        ),
        default_case("mbarp m=1", model(c(Kind::Mbarp), CostFunction::Zero), additive_profile(r, 2, 1, 5.0)),
        default_case("mbarp m=2", model(c(Kind::Mbarp), CostFunction::Zero), general_profile(r, 2, &[1, 1], 3.0)),
    ];
    // Unit-demand lotteries need Σφ ≤ 1; the box keeps each φ at most 1/2.
    let p = unit_demand_profile(r, 2, 2, 5.0);
    let m = model(c(Kind::LotteryMenu), CostFunction::Zero);
    let (lo, mut hi) = m.class.default_box(2, &[1, 1], p.max_value()).unwrap();
    hi[0] = 0.5;
    hi[1] = 0.5;
    out.push(Case { name: "lottery unit-demand", model: m, profile: p, bx: (lo, hi) });
    out
}

// 2. Profit is affine on every cell of every class's arrangement.
fn delineability() -> Check {
    let mut per_class: std::collections::BTreeMap<&str, (usize, usize)> = Default::default();
    let mut worst = 0.0f64;
    for inst in 0..20u64 {
        for (k, case) in delineability_cases(1000 + inst).into_iter().enumerate() {
            let hs = ok(hyperplanes_for(&case.model, &case.profile)).map_err(|e| format!("{}: {e}", case.name))?;
            let arr = ok(Arrangement::new(hs, case.bx.0.clone(), case.bx.1.clone()))?;
            let cells = if arr.dim() <= 2 {
                let e = ok(enumerate_cells(&arr))?;
                e.cells
            } else {
                sample_cells(&arr, 2000, split(inst, k as u64))
            };
            for (ci, cell) in cells.iter().enumerate() {
                let chk = ok(verify_affine_in_cell(&case.model, &case.profile, &arr, cell, 32, split(inst * 100 + k as u64, ci as u64)))
                    .map_err(|e| format!("{} #{inst}: {e}", case.name))?;
                worst = worst.max(chk.max_residual);
                ensure!(
                    chk.max_residual <= 1e-7,
                    "{} instance {inst}: residual {:.3e} in cell {:?}",
                    case.name,
                    chk.max_residual,
                    cell.witness
                );
            }
            let e = per_class.entry(case.name).or_default();
            e.0 += 1;
            e.1 += cells.len();
        }
    }
    let classes = per_class.len();
    let cells: usize = per_class.values().map(|v| v.1).sum();
    ensure!(per_class.values().all(|v| v.0 >= 20), "fewer than 20 instances for some class");
    Ok(format!("{classes} class configurations × 20 instances, {cells} cells, max residual {worst:.2e}"))
}

/// `E_z[profit′]` by integrating over the boxes cut by every buyer's `φ` breakpoints.
fn relaxed_expectation(m: &ProfitModel, params: &[f64], p: &ValuationProfile, phis: &[Vec<f64>]) -> f64 {
    let items = p.m();
    let cuts: Vec<Vec<f64>> = (0..items)
        .map(|i| {
            let mut c: Vec<f64> = phis.iter().map(|phi| phi[i]).filter(|&x| x > 0.0 && x < 1.0).collect();
            c.push(0.0);
            c.push(1.0);
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup();
            c
        })
        .collect();
    let sizes: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let total: usize = sizes.iter().product();
    let mut sum = 0.0;
    for mut k in 0..total {
        let mut z = vec![0.0; items];
        let mut w = 1.0;
        for i in 0..items {
            let s = k % sizes[i];
            k /= sizes[i];
            z[i] = 0.5 * (cuts[i][s] + cuts[i][s + 1]);
            w *= cuts[i][s + 1] - cuts[i][s];
        }
        sum += w * profit_lottery_relaxed(m, params, p, &z).unwrap();
    }
    sum
}

// 3. Lottery expected profit equals the expectation of the relaxed profit′.
fn lottery_expectation() -> Check {
    let mut r = rng(3);
    let mut worst_exact = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut count = 0;
    for m_items in 1..=4usize {
        for inst in 0..3 {
            let n = 1 + inst % 2;
            let cost = general_cost(&mut r, m_items, 3.0);
            let p = additive_profile(&mut r, n, m_items, 4.0);
            let model = model(MechanismClass::new(Kind::LotteryMenu).with_menu_length(2), cost.clone());
            let params: Vec<f64> = (0..2)
                .flat_map(|_| {
                    let mut e: Vec<f64> = (0..m_items).map(|_| r.random::<f64>()).collect();
                    e.push(uniform(&mut r, 0.0, 1.5 * m_items as f64));
                    e
                })
                .collect();
            let out = ok(model.outcome(&params, &p))?;
            let phis = out.lottery.clone().unwrap();
            // Oracle 1: the 2^m-term expansion of each buyer's expected cost.
            let mut oracle = 0.0;
            for (j, phi) in phis.iter().enumerate() {
                let mut ec = 0.0;
                for s in 0..1usize << m_items {
                    let w: f64 = (0..m_items).map(|i| if s >> i & 1 == 1 { phi[i] } else { 1.0 - phi[i] }).product();
                    ec += w * cost.set_cost(s);
                }
                oracle += out.payments[j] - ec;
            }
            let exact_relaxed = relaxed_expectation(&model, &params, &p, &phis);
            let err = (out.profit - oracle).abs().max((out.profit - exact_relaxed).abs());
            worst_exact = worst_exact.max(err);
            ensure!(err <= 1e-9, "m={m_items}: profit {} vs expansion {oracle} vs E_z profit′ {exact_relaxed}", out.profit);
            // Monte Carlo over z.
            let draws = 100_000;
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..draws {
                let z: Vec<f64> = (0..m_items).map(|_| r.random::<f64>()).collect();
                let x = ok(profit_lottery_relaxed(&model, &params, &p, &z))?;
                s1 += x;
                s2 += x * x;
            }
            let mean = s1 / draws as f64;
            let sd = ((s2 / draws as f64 - mean * mean).max(0.0) * draws as f64 / (draws as f64 - 1.0)).sqrt();
            let se = sd / (draws as f64).sqrt();
            let z = if se > 0.0 { (mean - out.profit).abs() / se } else { (mean - out.profit).abs() / 1e-12 };
            worst_sigma = worst_sigma.max(z);
            ensure!(z <= 4.0, "m={m_items}: Monte Carlo mean {mean} is {z:.2}σ from {}", out.profit);
            count += 1;
        }
    }
    Ok(format!("{count} instances, max exact error {worst_exact:.2e}, max MC deviation {worst_sigma:.2}σ"))
}

// 4. The item-pricing lower-bound constructions are shattered.
fn shattering() -> Check {
    let mut lines = Vec::new();
    let cases: Vec<(usize, usize, bool)> = (2..=5).map(|m| (1, m, true)).chain([(2, 2, false), (2, 3, false)]).collect();
    for (n, m, anon) in cases {
        let inst = ok(item_pricing_shattering_instance(n, m, anon))?;
        // Oracle: the proof's labeling for each price vector, computed directly.
        for (t, params) in inst.params.iter().enumerate() {
            for (k, s) in inst.samples.iter().enumerate() {
                let expect = if t >> k & 1 == 1 { 2.0 } else { 0.0 };
                let got = ok(inst.model.profit(params, s))?;
                ensure!(got == expect, "n={n} m={m}: labeling {t}, sample {k}: profit {got}, expected {expect}");
            }
        }
        let rep = ok(shattering_check(&inst.model, &inst.samples, &inst.witnesses, &ShatterStrategy::Explicit(inst.params.clone())))?;
        let total = 1usize << inst.samples.len();
        ensure!(rep.shattered && rep.realized_labelings == total, "n={n} m={m}: {}/{total}", rep.realized_labelings);
        lines.push(format!("{}{}:{}/{}", if anon { "anon m=" } else { "personal n,m=" }, if anon { m.to_string() } else { format!("{n},{m}") }, rep.realized_labelings, total));
    }
    Ok(lines.join(" "))
}

// 5. Exact ERM dominates a 0.01 grid and 10^4 random draws on two-part tariffs.
fn erm_exactness() -> Check {
    let mut r = rng(5);
    let mut min_margin_grid = f64::INFINITY;
    let mut min_margin_rand = f64::INFINITY;
    for inst in 0..50u64 {
        let n_samples = 1 + (r.random::<u32>() % 20) as usize;
        let kappa = 3;
        let profiles: Vec<ValuationProfile> = (0..n_samples).map(|_| tariff_profile(&mut r, 1, kappa, 1.0)).collect();
        let cost = if inst % 3 == 0 { CostFunction::additive(vec![uniform(&mut r, 0.0, 0.3)]).unwrap() } else { CostFunction::Zero };
        let m = model(MechanismClass::new(Kind::TwoPartTariffMenu), cost.clone());
        let s = SampleSet::from_profiles(profiles.clone());
        let obj = ok(Objective::average(&s))?;
        let maxv = profiles.iter().map(|p| p.max_value()).fold(0.0, f64::max);
        let bx = ok(ParamBox::new(vec![0.0, 0.0], vec![maxv + 0.5, maxv + 0.5]))?;
        let exact = ok(erm_exact_lowdim(&m, &obj, &bx))?;
        let grid = ok(erm_grid(&m, &obj, &bx, 0.01, GRID_LIMIT))?;
        let rand = ok(erm_random(&m, &obj, &bx, 10_000, inst))?;
        let recheck = ok(obj.value(&m, &exact.best_params))?;
        ensure!((recheck - exact.best_value).abs() <= 1e-9, "instance {inst}: reported {} but re-evaluates to {recheck}", exact.best_value);
        ensure!(exact.best_value >= grid.best_value - 1e-9, "instance {inst}: exact {} < grid {}", exact.best_value, grid.best_value);
        ensure!(exact.best_value >= rand.best_value - 1e-9, "instance {inst}: exact {} < random {}", exact.best_value, rand.best_value);
        let mp: f64 = profiles.iter().map(|p| max_profit_mp(MpKind::TwoPartTariff, p, &cost).unwrap()).sum::<f64>() / n_samples as f64;
        ensure!(exact.best_value <= mp + 1e-9, "instance {inst}: exact {} above mean MP {mp}", exact.best_value);
        min_margin_grid = min_margin_grid.min(exact.best_value - grid.best_value);
        min_margin_rand = min_margin_rand.min(exact.best_value - rand.best_value);
    }
    Ok(format!("50 instances; min(exact − grid) = {min_margin_grid:.3e}, min(exact − random) = {min_margin_rand:.3e}"))
}

/// `k` lines tangent to the unit circle at angles in `[0, 0.8π)`: pairwise crossings stay
/// within radius `1/cos(0.4π) < 3.3` of the origin.
fn tangent_lines(r: &mut rand_chacha::ChaCha8Rng, k: usize) -> Vec<Hyperplane> {
    (0..k)
        .map(|_| {
            let a = uniform(r, 0.0, 0.8 * std::f64::consts::PI);
            Hyperplane::new(vec![a.cos(), a.sin()], 1.0, "tangent").unwrap()
        })
        .collect()
}

// 6. Overlay cell counts respect d·(N·t)^d; generic lines give 1 + k + C(k,2) cells.
fn counting() -> Check {
    let mut r = rng(6);
    let mut max_ratio = 0.0f64;
    for inst in 0..20 {
        let n_samples = 1 + inst % 10;
        let kappa = 3u32;
        let profiles: Vec<ValuationProfile> = (0..n_samples).map(|_| tariff_profile(&mut r, 1, kappa, 2.0)).collect();
        let m = model(MechanismClass::new(Kind::TwoPartTariffMenu), CostFunction::Zero);
        let mut hs = Vec::new();
        for p in &profiles {
            hs.extend(ok(hyperplanes_for(&m, p))?);
        }
        let t = (kappa as u64 + 1) * kappa as u64 / 2;
        let arr = ok(Arrangement::new(hs, vec![0.0, 0.0], vec![10.0, 10.0]))?;
        let e = ok(enumerate_cells(&arr))?;
        let observed = e.cells.len() + e.thin.len();
        let bound = buck_cell_bound(2, n_samples as u64 * t);
        ensure!((observed as u64) <= bound, "instance {inst}: {observed} cells > bound {bound}");
        max_ratio = max_ratio.max(observed as f64 / bound as f64);
    }
    for k in 1..=12usize {
        for rep in 0..3 {
            let arr = ok(Arrangement::new(tangent_lines(&mut r, k), vec![-5.0, -5.0], vec![5.0, 5.0]))?;
            let e = ok(enumerate_cells(&arr))?;
            let expect = 1 + k + k * (k - 1) / 2;
            ensure!(e.thin.is_empty(), "k={k} rep {rep}: {} thin cells", e.thin.len());
            ensure!(e.cells.len() == expect, "k={k} rep {rep}: {} cells, expected {expect}", e.cells.len());
        }
    }
    Ok(format!("20 overlays within bound (max count/bound {max_ratio:.3}); generic lines k=1..12 exact"))
}

fn tariff_distribution(r: &mut rand_chacha::ChaCha8Rng, atoms: usize) -> DistributionSpec {
    let profiles: Vec<ValuationProfile> = (0..atoms).map(|_| tariff_profile(r, 1, 3, 2.0)).collect();
    let weights: Vec<f64> = (0..atoms).map(|_| uniform(r, 0.5, 1.5)).collect();
    let total: f64 = weights.iter().sum();
    let mut atoms: Vec<Atom> = profiles.into_iter().zip(&weights).map(|(profile, w)| Atom { profile, prob: w / total }).collect();
    let rest: f64 = atoms[1..].iter().map(|a| a.prob).sum();
    atoms[0].prob = 1.0 - rest;
    DistributionSpec::from_atoms(atoms).unwrap()
}

// 7. Sample/expected profit gap of the empirical maximizer stays under ε.
fn gap_envelope() -> Check {
    let mut r = rng(7);
    let dist = tariff_distribution(&mut r, 6);
    let m = model(MechanismClass::new(Kind::TwoPartTariffMenu), CostFunction::Zero);
    let mut means = Vec::new();
    let mut parts = Vec::new();
    for (k, n) in [25usize, 100, 400].into_iter().enumerate() {
        let rep = ok(gap_experiment(&m, &dist, n, 100, 70 + k as u64, &SupMethod::Exact, 0.05))?;
        let within = rep.envelope.iter().find(|e| e.constant == 1.0).unwrap();
        ensure!(within.within >= 0.95, "N={n}: only {:.2} of trials within ε = {}", within.within, within.epsilon);
        ensure!(rep.max_gap <= rep.u + 1e-9, "N={n}: gap {} above U {}", rep.max_gap, rep.u);
        means.push(rep.mean_gap);
        parts.push(format!("N={n}: mean gap {:.4}, ε={:.3}, within {:.2}", rep.mean_gap, within.epsilon, within.within));
    }
    let ratios: Vec<f64> = means.windows(2).map(|w| w[0] / w[1]).collect();
    let flag = if ratios.iter().all(|x| (1.5..=2.7).contains(x)) { "ratios in [1.5, 2.7]" } else { "FLAG: ratio outside [1.5, 2.7]" };
    Ok(format!("{}; quadrupling ratios {:?} ({flag})", parts.join("; "), ratios.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>()))
}

// 8. Sup-profit over an item-independent support splits into per-item sups.
fn decomposition() -> Check {
    let mut r = rng(8);
    let kinds: [(&str, MechanismClass); 5] = [
        ("item pricing", MechanismClass::new(Kind::ItemPricing)),
        ("item pricing personal", MechanismClass::new(Kind::ItemPricing).with_anonymity(Anonymity::NonAnonymous)),
        ("second price", MechanismClass::new(Kind::SecondPriceReserves)),
        ("second price personal", MechanismClass::new(Kind::SecondPriceReserves).with_anonymity(Anonymity::NonAnonymous)),
        ("item lottery", MechanismClass::new(Kind::ItemLotteryMenu)),
    ];
    let mut count = 0;
    let mut worst = 0.0f64;
    for inst in 0..5 {
        for (name, class) in &kinds {
            let m_items = 2 + inst % 2;
            let n = 2;
            let marginals: Vec<Vec<(Vec<f64>, f64)>> = (0..m_items)
                .map(|_| {
                    let outcomes = 2 + r.random::<u32>() as usize % 2;
                    let mut probs: Vec<f64> = (0..outcomes).map(|_| uniform(&mut r, 0.2, 1.0)).collect();
                    let s: f64 = probs.iter().sum();
                    probs.iter_mut().for_each(|p| *p /= s);
                    let rest: f64 = probs[1..].iter().sum();
                    probs[0] = 1.0 - rest;
                    probs.into_iter().map(|p| ((0..n).map(|_| uniform(&mut r, 0.0, 5.0)).collect(), p)).collect()
                })
                .collect();
            let dist = ok(DistributionSpec::item_independent(marginals))?;
            let cost = if inst % 2 == 0 { additive_cost(&mut r, m_items, 2.0) } else { CostFunction::Zero };
            let m = model(class.clone(), cost);
            let chk = ok(verify_sup_decomposition(&m, &dist)).map_err(|e| format!("{name}: {e}"))?;
            let diff = (chk.u - chk.sum_ui).abs();
            worst = worst.max(diff);
            ensure!(chk.equal && diff <= 1e-9, "{name} #{inst}: U = {} but ΣU_i = {}", chk.u, chk.sum_ui);
            count += 1;
        }
    }
    // The guard refuses correlated supports.
    let p = additive_profile(&mut r, 2, 2, 3.0);
    let q = additive_profile(&mut r, 2, 2, 3.0);
    let corr = ok(DistributionSpec::uniform(vec![p, q]))?;
    ensure!(verify_sup_decomposition(&model(kinds[0].1.clone(), CostFunction::Zero), &corr).is_err(), "correlated support accepted");
    Ok(format!("{count} instances equal, max |U − ΣU_i| = {worst:.2e}"))
}

// 9. The quantile threshold is exceeded with probability about b.
fn outlier_quantile() -> Check {
    let mut r = rng(9);
    // Mostly modest buyers plus rare high-value outliers.
    let atoms_n = 40;
    let mut atoms = Vec::new();
    for k in 0..atoms_n {
        let step = if k < 4 { 40.0 } else { 2.0 };
        atoms.push(Atom { profile: tariff_profile(&mut r, 1, 2, step), prob: if k < 4 { 0.01 } else { 0.96 / 36.0 } });
    }
    let rest: f64 = atoms[1..].iter().map(|a| a.prob).sum();
    atoms[0].prob = 1.0 - rest;
    let dist = ok(DistributionSpec::from_atoms(atoms))?;
    let mp: Vec<f64> = dist.atoms().iter().map(|a| max_profit_mp(MpKind::TwoPartTariff, &a.profile, &CostFunction::Zero).unwrap()).collect();
    let n = 500;
    let delta: f64 = 0.05;
    let slack = 5.0 * ((1.0 / delta).log2() / n as f64).sqrt();
    let mut parts = Vec::new();
    for b in [0.05, 0.2] {
        let mut good = 0;
        let mut worst = 0.0f64;
        for rep in 0..200u64 {
            let s = ok(dist.sample(n, split(900, rep)))?;
            let vals: Vec<f64> = s.atom_indices.as_ref().unwrap().iter().map(|&k| mp[k]).collect();
            let a = ok(quantile_a(&vals, b))?;
            let exceed: f64 = dist.atoms().iter().zip(&mp).filter(|(_, &v)| v > a).map(|(at, _)| at.prob).sum();
            worst = worst.max(exceed);
            if exceed < b + slack {
                good += 1;
            }
        }
        ensure!(good as f64 >= (1.0 - delta) * 200.0, "b={b}: only {good}/200 resamples under b + slack");
        parts.push(format!("b={b}: {good}/200 under {:.3}, worst exceedance {worst:.3}", b + slack));
    }
    Ok(parts.join("; "))
}

/// Independent sequential item-pricing simulation for one item.
fn sell_one_item(values: &[f64], groups: &[usize], prices: &[f64]) -> f64 {
    for (j, &v) in values.iter().enumerate() {
        let p = prices[groups[j]];
        if v > p + 1e-9 || ((v - p).abs() <= 1e-9 && p > 1e-9) {
            return p;
        }
    }
    0.0
}

fn two_group_distribution() -> DistributionSpec {
    let mut atoms = Vec::new();
    for mask in 0..16usize {
        let mut prob = 1.0;
        let mut rows = Vec::new();
        for j in 0..4 {
            let high = mask >> j & 1 == 1;
            let (v, p) = if j < 2 { (10.0, 0.3) } else { (4.0, 0.9) };
            prob *= if high { p } else { 1.0 - p };
            rows.push(vec![if high { v } else { 0.0 }]);
        }
        atoms.push(Atom { profile: ValuationProfile::additive(&rows).unwrap(), prob });
    }
    let rest: f64 = atoms[1..].iter().map(|a| a.prob).sum();
    atoms[0].prob = 1.0 - rest;
    DistributionSpec::from_atoms(atoms).unwrap()
}

fn group_levels() -> Vec<Vec<Vec<usize>>> {
    vec![vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![2, 3]], vec![vec![0, 1], vec![2], vec![3]], vec![vec![0], vec![1], vec![2], vec![3]]]
}

/// Oracle per level: best average profit over prices drawn from the values seen, and ε.
fn spm_oracle(samples: &SampleSet, u: f64, delta: f64) -> Vec<(f64, f64)> {
    let levels = group_levels();
    let t_levels = levels.len() as i32;
    let n = samples.len() as f64;
    let cands = [0.0, 4.0, 10.0];
    levels
        .iter()
        .enumerate()
        .map(|(k, part)| {
            let mut groups = vec![0; 4];
            for (g, members) in part.iter().enumerate() {
                for &j in members {
                    groups[j] = g;
                }
            }
            let g = part.len();
            let mut best = f64::NEG_INFINITY;
            for mut idx in 0..cands.len().pow(g as u32) {
                let prices: Vec<f64> = (0..g)
                    .map(|_| {
                        let c = cands[idx % cands.len()];
                        idx /= cands.len();
                        c
                    })
                    .collect();
                let total: f64 = samples
                    .profiles
                    .iter()
                    .map(|p| sell_one_item(&(0..4).map(|j| p.buyer(j).item_value(0)).collect::<Vec<_>>(), &groups, &prices))
                    .sum();
                best = best.max(total / n);
            }
            let w = 0.5f64.powi(k as i32 + 1) / (1.0 - 0.5f64.powi(t_levels));
            let (d, t) = (g as f64, 4.0);
            let pdim = 9.0 * d * (4.0 * d * t).log2();
            let eps = u * (pdim / n).sqrt() + u * ((1.0 / (delta * w)).ln() / n).sqrt();
            (best, eps)
        })
        .collect()
}

// 10. SPM picks the argmax of the penalized bound; maxima are monotone; union bound holds.
fn spm() -> Check {
    let dist = two_group_distribution();
    let h = Hierarchy {
        base: MechanismClass::new(Kind::ItemPricing),
        levels: Levels::GroupPricing { partitions: group_levels() },
        weights: Weights::Geometric,
    };
    let finest = model(h.level_class(3), CostFunction::Zero);
    let u = ok(compute_u(&finest, &dist, &SupMethod::Exact, 0))?;
    ensure!((u - 10.0).abs() < 1e-12, "U = {u}, expected 10");
    let cfg = SpmConfig { delta: 0.05, constant: 1.0, sup: SupMethod::Exact, seed: 10 };
    let mut parts = Vec::new();
    for (n, seed) in [(2000usize, 11u64), (20, 12)] {
        let samples = ok(dist.sample(n, seed))?;
        let res = ok(spm_select(&h, &CostFunction::Zero, &samples, u, dist.max_value(), &cfg))?;
        let oracle = spm_oracle(&samples, u, cfg.delta);
        for (row, (emp, eps)) in res.levels.iter().zip(&oracle) {
            ensure!((row.empirical_max - emp).abs() <= 1e-9, "N={n} level {}: empirical max {} vs oracle {emp}", row.level, row.empirical_max);
            ensure!((row.epsilon - eps).abs() <= 1e-9 * eps.max(1.0), "N={n} level {}: ε {} vs oracle {eps}", row.level, row.epsilon);
        }
        for w in res.levels.windows(2) {
            ensure!(w[0].empirical_max <= w[1].empirical_max, "N={n}: empirical max drops from level {} to {}", w[0].level, w[1].level);
        }
        let mut best = 0;
        for (k, (emp, eps)) in oracle.iter().enumerate() {
            if emp - eps > oracle[best].0 - oracle[best].1 {
                best = k;
            }
        }
        ensure!(res.selected_level == best + 1, "N={n}: selected level {} but oracle argmax is {}", res.selected_level, best + 1);
        parts.push(format!(
            "N={n}: level {} (lower bounds {:?})",
            res.selected_level,
            res.levels.iter().map(|r| format!("{:.2}", r.lower_bound)).collect::<Vec<_>>()
        ));
    }
    let rep = ok(union_bound_check(&h, &CostFunction::Zero, &dist, 2000, 100, u, &cfg))?;
    ensure!(rep.violation_rate <= cfg.delta, "union-bound violation rate {} > δ", rep.violation_rate);
    ensure!(rep.lower_bound_rate >= 1.0 - cfg.delta, "lower bounds held in only {} of trials", rep.lower_bound_rate);
    parts.push(format!("union bound: violation rate {} over 100 trials, smallest clean constant {:.3}", rep.violation_rate, rep.smallest_clean_constant));
    Ok(parts.join("; "))
}

// 11. AMA with unit weights and no boosts is VCG is the second-price auction; VVCA with
// zero boosts is the unboosted AMA.
fn reductions() -> Check {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let n = 2 + trial % 4;
        let bids: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.0, 10.0)).collect();
        let p = ValuationProfile::additive(&bids.iter().map(|&b| vec![b]).collect::<Vec<_>>()).unwrap();
        // Oracle VCG: the highest bidder (lowest index on ties) pays the second-highest bid.
        let winner = (0..n).fold(0, |w, j| if bids[j] > bids[w] { j } else { w });
        let second = (0..n).filter(|&j| j != winner).map(|j| bids[j]).fold(0.0, f64::max);
        let vcg: Vec<f64> = (0..n).map(|j| if j == winner { second } else { 0.0 }).collect();
        let ama = model(MechanismClass::new(Kind::Ama), CostFunction::Zero);
        let mut ama_params = vec![1.0; n];
        ama_params.extend(vec![0.0; n + 1]);
        let sp = model(MechanismClass::new(Kind::SecondPriceReserves), CostFunction::Zero);
        let a = ok(ama.outcome(&ama_params, &p))?.payments;
        let s = ok(sp.outcome(&[0.0], &p))?.payments;
        for j in 0..n {
            let e = (a[j] - vcg[j]).abs().max((s[j] - vcg[j]).abs());
            worst = worst.max(e);
            ensure!(e <= 1e-12, "trial {trial}: bidder {j} pays AMA {} / second price {} / VCG {}", a[j], s[j], vcg[j]);
        }
        // Random weights: VVCA with zero boosts against AMA with λ ≡ 0.
        let w: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.2, 2.0)).collect();
        let vvca = model(MechanismClass::new(Kind::Vvca), CostFunction::Zero);
        let mut vp = w.clone();
        vp.extend(vec![0.0; n * 2]);
        let mut ap = w.clone();
        ap.extend(vec![0.0; n + 1]);
        let x = ok(vvca.outcome(&vp, &p))?.payments;
        let y = ok(ama.outcome(&ap, &p))?.payments;
        for j in 0..n {
            let e = (x[j] - y[j]).abs();
            worst = worst.max(e);
            ensure!(e <= 1e-12, "trial {trial}: VVCA pays {} but AMA pays {} (bidder {j})", x[j], y[j]);
        }
    }
    Ok(format!("1000 bid vectors, max payment difference {worst:.1e}"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check, f64); 11] = [
        (1, "tariff partition", fig1, 1.0),
        (2, "delineability", delineability, 120.0),
        (3, "lottery expectation", lottery_expectation, 30.0),
        (4, "shattering constructions", shattering, 10.0),
        (5, "exact ERM (2D)", erm_exactness, 120.0),
        (6, "cell counting", counting, 30.0),
        (7, "generalization gap", gap_envelope, 600.0),
        (8, "sup decomposition", decomposition, 60.0),
        (9, "outlier quantile", outlier_quantile, 60.0),
        (10, "structural profit maximization", spm, 300.0),
        (11, "auction reductions", reductions, 10.0),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (id, name, f, budget) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let res = match res {
            Ok(d) if secs > budget => Err(format!("{d}; over the {budget}s budget")),
            other => other,
        };
        match res {
            Ok(detail) => println!("criterion {id:>2} PASS [{name}] {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{name}] {detail} ({secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
