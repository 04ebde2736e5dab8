//! Per-class generating hyperplanes and (d, t) constants.
//!
//! Each class's profit on a fixed profile is affine wherever every buyer's choice (or the
//! auction's allocations) is fixed. The choice between two options flips exactly where their
//! utilities, both affine in the parameters, are equal; those equalities are emitted here.

use super::hyperplane::Hyperplane;
use crate::error::{domain, Result};
use crate::mechanisms::{allocation_bundles, allocation_count, owners_index, ranking, Kind, MechanismClass, ProfitModel};
use crate::valuations::{Valuation, ValuationProfile};

/// An option's utility (or welfare) as an affine function `c0 + Σ coef·p`.
struct Lin {
    coef: Vec<(usize, f64)>,
    c0: f64,
    label: String,
}

fn lin(coef: Vec<(usize, f64)>, c0: f64, label: impl Into<String>) -> Lin {
    Lin { coef, c0, label: label.into() }
}

fn pairwise(opts: &[Lin], d: usize, who: &str, out: &mut Vec<Hyperplane>) {
    let dense: Vec<Vec<f64>> = opts
        .iter()
        .map(|o| {
            let mut v = vec![0.0; d];
            for &(i, c) in &o.coef {
                v[i] += c;
            }
            v
        })
        .collect();
    for a in 0..opts.len() {
        for b in a + 1..opts.len() {
            let normal: Vec<f64> = dense[a].iter().zip(&dense[b]).map(|(x, y)| x - y).collect();
            let label = format!("{who}: {} vs {}", opts[a].label, opts[b].label);
            if let Some(h) = Hyperplane::new(normal, opts[b].c0 - opts[a].c0, label) {
                out.push(h);
            }
        }
    }
}

fn coordinate(d: usize, i: usize, value: f64, label: String) -> Option<Hyperplane> {
    let mut normal = vec![0.0; d];
    normal[i] = 1.0;
    Hyperplane::new(normal, value, label)
}

/// Generating hyperplanes of `model`'s class on `profile`, one per distinct comparison.
pub fn hyperplanes_for(model: &ProfitModel, profile: &ValuationProfile) -> Result<Vec<Hyperplane>> {
    let class = &model.class;
    let n = profile.n();
    let m = profile.m();
    let caps = profile.caps();
    class.validate(n, caps)?;
    model.cost.check_caps(caps)?;
    let d = class.dim(n, caps)?;
    let groups = class.anonymity.assignment(n)?;
    let ngroups = class.anonymity.group_count(n);
    let block = if class.kind.is_auction() { d } else { d / ngroups };
    let l = class.structure.menu_length;
    let mut out = Vec::new();
    match class.kind {
        Kind::TwoPartTariffMenu => {
            let kappa = caps[0];
            for j in 0..n {
                let base = groups[j] * block;
                let v = profile.buyer(j);
                let mut opts = vec![lin(vec![], 0.0, "no purchase")];
                for a in 0..l {
                    for t in 1..=kappa {
                        opts.push(lin(
                            vec![(base + 2 * a, -1.0), (base + 2 * a + 1, -(t as f64))],
                            v.units_value(t),
                            format!("entry {a} × {t}"),
                        ));
                    }
                }
                pairwise(&opts, d, &format!("buyer {j}"), &mut out);
            }
        }
        Kind::ItemPricing => {
            if profile.all_additive() {
                if ngroups == 1 && model.cost.is_linear() {
                    for i in 0..m {
                        let top = profile.buyers().iter().map(|v| v.item_value(i)).fold(0.0, f64::max);
                        out.extend(coordinate(d, i, top, format!("item {i}: price = top value")));
                    }
                } else {
                    for j in 0..n {
                        for i in 0..m {
                            let v = profile.buyer(j).item_value(i);
                            out.extend(coordinate(d, groups[j] * m + i, v, format!("buyer {j}, item {i}: price = value")));
                        }
                    }
                }
            } else {
                for j in 0..n {
                    let base = groups[j] * m;
                    let v = profile.buyer(j);
                    let opts: Vec<Lin> = (0..1usize << m)
                        .map(|s| {
                            let coef = (0..m).filter(|i| s >> i & 1 == 1).map(|i| (base + i, -1.0)).collect();
                            lin(coef, v.set_value(s), format!("set {s:#b}"))
                        })
                        .collect();
                    pairwise(&opts, d, &format!("buyer {j}"), &mut out);
                }
            }
        }
        Kind::NonlinearPricing | Kind::NonlinearPricingDecomposable => {
            let lattice = profile.lattice();
            for j in 0..n {
                let base = groups[j] * block;
                let v = profile.buyer(j);
                let mut opts = vec![lin(vec![], 0.0, "no purchase")];
                for k in 0..lattice.size() {
                    let q = lattice.bundle(k);
                    let coef = if class.kind == Kind::NonlinearPricing {
                        vec![(base + k, -1.0)]
                    } else {
                        let mut off = 0;
                        let mut c = Vec::new();
                        for i in 0..m {
                            if q[i] >= 1 {
                                c.push((base + off + q[i] as usize, -1.0));
                            }
                            off += caps[i] as usize + 1;
                        }
                        c
                    };
                    opts.push(lin(coef, v.value(&q), format!("bundle {q:?}")));
                }
                pairwise(&opts, d, &format!("buyer {j}"), &mut out);
            }
        }
        Kind::SecondPriceReserves => {
            if !profile.all_additive() {
                return domain("second_price_reserves: buyers must be additive");
            }
            for i in 0..m {
                let (winner, top, second) = ranking(profile, i);
                let coord = groups[winner] * m + i;
                out.extend(coordinate(d, coord, top, format!("item {i}: reserve = top bid")));
                out.extend(coordinate(d, coord, second, format!("item {i}: reserve = second bid")));
            }
        }
        Kind::LotteryMenu => {
            let z = class.structure.relaxation_z.as_ref();
            if z.is_none() && !model.cost.is_linear() {
                return domain("lottery_menu: expected cost is not piecewise linear under a general cost; set structure.relaxation_z");
            }
            for j in 0..n {
                let base = groups[j] * block;
                let v = profile.buyer(j);
                if matches!(v, Valuation::General { .. }) {
                    return domain(format!("lottery_menu: buyer {j} must be additive or unit-demand"));
                }
                let mut opts = vec![lin(vec![], 0.0, "null lottery")];
                for a in 0..l {
                    let e = base + a * (m + 1);
                    let mut coef: Vec<(usize, f64)> = (0..m).map(|i| (e + i, v.item_value(i))).collect();
                    coef.push((e + m, -1.0));
                    opts.push(lin(coef, 0.0, format!("lottery {a}")));
                }
                pairwise(&opts, d, &format!("buyer {j}"), &mut out);
            }
            if let Some(z) = z {
                for g in 0..ngroups {
                    for a in 0..l {
                        for i in 0..m {
                            let idx = g * block + a * (m + 1) + i;
                            out.extend(coordinate(d, idx, z[i], format!("group {g}, lottery {a}, item {i}: φ = z")));
                        }
                    }
                }
            }
        }
        Kind::ItemLotteryMenu => {
            if !profile.all_additive() || !model.cost.is_linear() {
                return domain("item_lottery_menu: requires additive buyers and zero or additive cost");
            }
            for j in 0..n {
                let base = groups[j] * block;
                let v = profile.buyer(j);
                for i in 0..m {
                    let mut opts = vec![lin(vec![], 0.0, "null")];
                    for a in 0..l {
                        let e = base + i * 2 * l + 2 * a;
                        opts.push(lin(vec![(e, v.item_value(i)), (e + 1, -1.0)], 0.0, format!("entry {a}")));
                    }
                    pairwise(&opts, d, &format!("buyer {j}, item {i}"), &mut out);
                }
            }
        }
        Kind::LambdaAuction => auction_hyperplanes(model, profile, d, &mut out, false)?,
        Kind::Mbarp => auction_hyperplanes(model, profile, d, &mut out, true)?,
        Kind::Ama | Kind::Vvca => {
            return domain(format!("{}: hyperplanes in the reparameterized space are not emitted", class.kind));
        }
    }
    Ok(drop_repeats(out))
}

/// Drops comparisons that repeat an earlier one verbatim. Distinct comparisons that happen to
/// define the same geometric hyperplane are kept; [`Arrangement::new`](super::Arrangement::new) merges those.
fn drop_repeats(hs: Vec<Hyperplane>) -> Vec<Hyperplane> {
    let mut out: Vec<Hyperplane> = Vec::with_capacity(hs.len());
    for h in hs {
        if !out.iter().any(|o| o.normal == h.normal && o.offset == h.offset) {
            out.push(h);
        }
    }
    out
}

/// Allocation hyperplanes for λ-auctions and MBARPs: for the full problem and each
/// problem without one bidder, pairwise comparisons between the allocations that can win.
fn auction_hyperplanes(model: &ProfitModel, profile: &ValuationProfile, d: usize, out: &mut Vec<Hyperplane>, mbarp: bool) -> Result<()> {
    let n = profile.n();
    let m = profile.m();
    let k = allocation_count(n, m, model.cfg.enum_limit)?;
    let full = (1usize << m) - 1;
    let boost_index: Vec<Option<usize>> = match &model.class.structure.boosted {
        Some(list) if !mbarp => {
            let mut idx = vec![None; k];
            for (q, owners) in list.iter().enumerate() {
                idx[owners_index(n, owners)] = Some(q);
            }
            idx
        }
        _ => (0..k).map(Some).collect(),
    };
    let info: Vec<(Vec<usize>, f64)> = (0..k)
        .map(|a| {
            let masks = allocation_bundles(n, m, a);
            let base = masks.iter().enumerate().map(|(j, &s)| profile.buyer(j).set_value(s) - model.cost.set_cost(s)).sum();
            (masks, base)
        })
        .collect();
    for skip in std::iter::once(None).chain((0..n).map(Some)) {
        let who = skip.map_or("all bidders".to_string(), |j| format!("without bidder {j}"));
        let admitted = (0..k).filter(|&a| skip.is_none_or(|j| info[a].0[j] == 0));
        let mut opts = Vec::new();
        if mbarp {
            // Allocations sharing (unallocated set, grand flag) share the parameter part.
            let mut best: std::collections::BTreeMap<(usize, bool), usize> = Default::default();
            for a in admitted {
                let allocated = info[a].0.iter().fold(0, |acc, &s| acc | s);
                let key = (full & !allocated, info[a].0.contains(&full));
                let e = best.entry(key).or_insert(a);
                if info[a].1 > info[*e].1 {
                    *e = a;
                }
            }
            for ((unalloc, grand), a) in best {
                let mut coef: Vec<(usize, f64)> = (0..m).filter(|i| unalloc >> i & 1 == 1).map(|i| (i, 1.0)).collect();
                if grand {
                    coef.push((m, 1.0));
                }
                opts.push(lin(coef, info[a].1, format!("allocation {a}")));
            }
        } else {
            let mut best_plain: Option<usize> = None;
            for a in admitted {
                match boost_index[a] {
                    Some(q) => opts.push(lin(vec![(q, 1.0)], info[a].1, format!("allocation {a}"))),
                    None => {
                        if best_plain.is_none_or(|b| info[a].1 > info[b].1) {
                            best_plain = Some(a);
                        }
                    }
                }
            }
            if let Some(a) = best_plain {
                opts.push(lin(vec![], info[a].1, format!("allocation {a} (unboosted)")));
            }
        }
        pairwise(&opts, d, &who, out);
    }
    Ok(())
}

fn choose2(x: u128) -> u128 {
    x * x.saturating_sub(1) / 2
}

fn sat(x: u128) -> u64 {
    x.min(u64::MAX as u128) as u64
}

/// The `(d, t)` constants of the class's delineability statement on profiles shaped like
/// `profile` (buyer kinds matter for item pricing).
pub fn theorem_dt(class: &MechanismClass, profile: &ValuationProfile) -> Result<(u64, u64)> {
    let n = profile.n();
    let caps = profile.caps();
    class.validate(n, caps)?;
    let d = class.dim(n, caps).unwrap_or(usize::MAX) as u128;
    let (n128, m) = (n as u128, caps.len() as u32);
    let l = class.structure.menu_length as u128;
    let g = class.anonymity.group_count(n) as u128;
    let k_bundles: u128 = caps.iter().map(|&k| k as u128 + 1).product();
    let alloc = (n128 + 1).saturating_pow(m);
    let t: u128 = match class.kind {
        Kind::TwoPartTariffMenu => n128 * choose2(l * caps[0] as u128 + 1),
        Kind::ItemPricing => {
            if profile.all_additive() {
                if g == 1 { m as u128 } else { n128 * m as u128 }
            } else {
                n128 * choose2(1u128 << m)
            }
        }
        Kind::NonlinearPricing | Kind::NonlinearPricingDecomposable => n128 * k_bundles * k_bundles,
        Kind::SecondPriceReserves => 2 * m as u128,
        Kind::LotteryMenu => n128 * ((l + 1) * (l + 1) + m as u128 * l),
        Kind::ItemLotteryMenu => n128 * m as u128 * (l + 1) * (l + 1),
        Kind::LambdaAuction => {
            let q = class.structure.boosted.as_ref().map_or(alloc, |b| b.len() as u128);
            (n128 + 1) * (q + 1) * (q + 1)
        }
        Kind::Mbarp => (n128 + 1) * (1u128 << (2 * m)),
        Kind::Ama | Kind::Vvca => (n128 + 1).saturating_pow(2 * m + 1),
    };
    // AMA and VVCA bounds live in the reparameterized space of all weighted welfare terms.
    let d = match class.kind {
        Kind::Ama => {
            let q = class.structure.boosted.as_ref().map_or(alloc, |b| b.len() as u128);
            2 * n128 + 2 * n128 * n128 + q + n128 * q
        }
        Kind::Vvca => {
            let q = n128 * (1u128 << m);
            2 * n128 + 2 * n128 * n128 + q + n128 * q
        }
        _ => d,
    };
    Ok((sat(d), sat(t.max(1))))
}

