//! Subcommand bodies: each returns a JSON summary and a row table.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use mechdelin::complexity::{
    compute_u, empirical_rademacher, gap_experiment, generalization_epsilon, item_pricing_shattering_instance, outlier_bound,
    pdim2erad_bound, profile_sup, quantile_a, shattering_check, sup_with_null, verify_sup_decomposition, BoundInputs, OutlierInputs,
    ShatterStrategy,
};
use mechdelin::erm::{Objective, ParamBox, SupMethod};
use mechdelin::io::{samples_file, ProblemFile};
use mechdelin::mechanisms::{max_profit_mp, profit_lottery_relaxed, Anonymity, Kind, MechanismClass, MpKind, ProfitModel};
use mechdelin::partition::{
    buck_cell_bound, enumerate_cells, hyperplanes_for, pdim_upper_bound, sample_cells, theorem_dt, verify_affine, Arrangement,
};
use mechdelin::rng::{rng, split};
use mechdelin::spm::{spm_select, union_bound_check, Hierarchy, SpmConfig, Weights};
use mechdelin::valuations::{CostFunction, DistributionSpec, ValuationProfile};
use mechdelin::Error;

use crate::report::{object, Table};
use crate::{BoxArgs, ClassArgs, Command, MethodArgs};

type Output = (Value, Table);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    Error::Domain(msg.into()).into()
}

pub fn dispatch(cmd: &Command, seed: u64) -> Result<Output> {
    match cmd {
        Command::Partition(a) => partition(a, seed),
        Command::Profit(a) => profit(a, seed),
        Command::Erm(a) => erm(a, seed),
        Command::Rademacher(a) => rademacher(a, seed),
        Command::Bound(a) => bound(a),
        Command::Shatter(a) => shatter(a, seed),
        Command::Gap(a) => gap(a, seed),
        Command::Decompose(a) => decompose(a),
        Command::Outlier(a) => outlier(a, seed),
        Command::Spm(a) => spm(a, seed),
        Command::Sample(a) => sample(a, seed),
        Command::Run(_) => Err(bad("run: configs cannot nest other configs")),
    }
}

fn load(path: &Path) -> Result<ProblemFile> {
    Ok(ProblemFile::load(path)?)
}

fn class(a: &ClassArgs) -> Result<MechanismClass> {
    let mut c = match (&a.class_file, &a.kind) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<MechanismClass>(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
        }
        (None, Some(kind)) => MechanismClass::new(Kind::from_str(kind)?),
        (None, None) => return Err(bad("class: pass --class KIND or --class-file FILE")),
    };
    match a.anonymity.as_deref() {
        None => {}
        Some("anonymous") => c.anonymity = Anonymity::Anonymous,
        Some("non_anonymous") => c.anonymity = Anonymity::NonAnonymous,
        Some(other) => return Err(bad(format!("anonymity: expected anonymous or non_anonymous, got '{other}'"))),
    }
    if let Some(l) = a.menu_length {
        c.structure.menu_length = l;
    }
    Ok(c)
}

fn param_box(model: &ProfitModel, profile: &ValuationProfile, max_value: f64, a: &BoxArgs) -> Result<ParamBox> {
    let (lo, hi) = model.class.default_box(profile.n(), profile.caps(), max_value)?;
    Ok(ParamBox::new(a.lo.clone().unwrap_or(lo), a.hi.clone().unwrap_or(hi))?)
}

fn sup_method(a: &MethodArgs) -> Result<SupMethod> {
    Ok(match a.method.as_str() {
        "exact" | "exact_2d" => SupMethod::Exact,
        "grid" => SupMethod::Grid { resolution: a.resolution },
        "random" => SupMethod::Random { draws: a.draws },
        "cell_sampled" => SupMethod::CellSampled { probes: a.probes },
        other => return Err(bad(format!("method: expected exact, grid, random or cell_sampled, got '{other}'"))),
    })
}

/// One profile (`buyers`) or every profile of a sample file.
fn profiles_of(pf: &ProblemFile) -> Result<Vec<ValuationProfile>> {
    Ok(if pf.buyers.is_some() { vec![pf.profile()?] } else { pf.samples()?.profiles })
}

fn max_value(ps: &[ValuationProfile]) -> f64 {
    ps.iter().map(|p| p.max_value()).fold(0.0, f64::max)
}

fn allocation_text(alloc: &[Vec<u32>]) -> String {
    alloc.iter().map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join("|")
}

fn partition(a: &crate::PartitionArgs, seed: u64) -> Result<Output> {
    let pf = load(&a.profile)?;
    let profiles = profiles_of(&pf)?;
    let model = ProfitModel::new(class(&a.class)?, pf.cost()?);
    let mut hs = Vec::new();
    for p in &profiles {
        hs.extend(hyperplanes_for(&model, p)?);
    }
    let emitted = hs.len();
    let bx = param_box(&model, &profiles[0], max_value(&profiles), &a.bx)?;
    let arr = Arrangement::new(hs, bx.lo.clone(), bx.hi.clone())?;
    let d = arr.dim();
    let (cells, thin, exact) = if d <= 2 {
        let e = enumerate_cells(&arr)?;
        (e.cells, e.thin.len(), true)
    } else {
        (sample_cells(&arr, a.probes, seed), 0, false)
    };
    let objective = |p: &[f64]| -> mechdelin::Result<f64> {
        let mut s = 0.0;
        for prof in &profiles {
            s += model.profit(p, prof)?;
        }
        Ok(s / profiles.len() as f64)
    };
    let mut columns = vec!["cell", "witness", "margin", "demand", "profit"];
    if a.verify_trials > 0 {
        columns.extend(["affine", "residual", "coeffs", "intercept"]);
    }
    let mut table = Table::new(&columns);
    let mut signatures = BTreeSet::new();
    let mut all_affine = true;
    for (k, cell) in cells.iter().enumerate() {
        let demand = profiles
            .iter()
            .map(|p| Ok(allocation_text(&model.outcome(&cell.witness, p)?.allocation)))
            .collect::<mechdelin::Result<Vec<_>>>()?
            .join(" / ");
        signatures.insert(demand.clone());
        let mut row = vec![json!(k), json!(cell.witness), json!(cell.margin), json!(demand), json!(objective(&cell.witness)?)];
        if a.verify_trials > 0 {
            let chk = verify_affine(objective, &arr, cell, a.verify_trials, split(seed, k as u64))?;
            all_affine &= chk.affine;
            row.extend([json!(chk.affine), json!(chk.max_residual), json!(chk.coeffs), json!(chk.intercept)]);
        }
        table.push(row);
    }
    let dt = theorem_dt(&model.class, &profiles[0]).ok();
    let summary = object(vec![
        ("class", serde_json::to_value(&model.class)?),
        ("profiles", json!(profiles.len())),
        ("d", json!(d)),
        ("theorem_dt", json!(dt)),
        ("hyperplanes_emitted", json!(emitted)),
        ("hyperplanes_distinct", json!(arr.len())),
        ("cells", json!(cells.len())),
        ("thin_cells", json!(thin)),
        ("exact_enumeration", json!(exact)),
        ("buck_bound", json!(buck_cell_bound(d as u64, emitted as u64))),
        ("demand_signatures", json!(signatures)),
        ("all_affine", if a.verify_trials > 0 { json!(all_affine) } else { Value::Null }),
        ("hyperplanes", serde_json::to_value(&arr.hyperplanes)?),
    ]);
    Ok((summary, table))
}

fn profit(a: &crate::ProfitArgs, seed: u64) -> Result<Output> {
    let pf = load(&a.profile)?;
    let p = pf.profile()?;
    let model = ProfitModel::new(class(&a.class)?, pf.cost()?);
    let o = model.outcome(&a.params, &p)?;
    let mut table = Table::new(&["buyer", "allocation", "payment", "choice"]);
    for j in 0..p.n() {
        table.push(vec![json!(j), json!(o.allocation[j]), json!(o.payments[j]), json!(o.choices[j])]);
    }
    let mut summary = serde_json::to_value(&o)?;
    if a.z_draws > 0 {
        if model.kind() != Kind::LotteryMenu {
            return Err(bad("z_draws: only lottery_menu has a relaxed profit"));
        }
        let mut r = rng(seed);
        let mut xs = Vec::with_capacity(a.z_draws);
        for _ in 0..a.z_draws {
            let z: Vec<f64> = (0..p.m()).map(|_| r.random::<f64>()).collect();
            xs.push(profit_lottery_relaxed(&model, &a.params, &p, &z)?);
        }
        let (mean, stderr) = mechdelin::complexity::mean_stderr(&xs);
        summary["relaxed_mean"] = json!(mean);
        summary["relaxed_stderr"] = json!(stderr);
        summary["relaxed_z_score"] = json!(if stderr > 0.0 { (mean - o.profit) / stderr } else { 0.0 });
    }
    Ok((summary, table))
}

fn erm(a: &crate::ErmArgs, seed: u64) -> Result<Output> {
    let pf = load(&a.samples)?;
    let samples = pf.samples()?;
    let model = ProfitModel::new(class(&a.class)?, pf.cost()?);
    let obj = Objective::average(&samples)?;
    let bx = param_box(&model, &samples.profiles[0], max_value(&samples.profiles), &a.bx)?;
    let r = sup_with_null(&model, &obj, &bx, &sup_method(&a.method)?, seed)?;
    let mut table = Table::new(&["method", "best_value", "best_params", "cells_examined"]);
    table.push(vec![json!(a.method.method), json!(r.best_value), json!(r.best_params), json!(r.cells_examined)]);
    let mut summary = serde_json::to_value(&r)?;
    summary["N"] = json!(samples.len());
    Ok((summary, table))
}

fn rademacher(a: &crate::RademacherArgs, seed: u64) -> Result<Output> {
    let pf = load(&a.samples)?;
    let samples = pf.samples()?;
    let model = ProfitModel::new(class(&a.class)?, pf.cost()?);
    let bx = param_box(&model, &samples.profiles[0], max_value(&samples.profiles), &a.bx)?;
    let sup = sup_method(&a.method)?;
    let est = empirical_rademacher(&model, &samples, &bx, a.sigma_draws, seed, &sup)?;
    let u = samples
        .profiles
        .par_iter()
        .enumerate()
        .map(|(k, p)| profile_sup(&model, p, &bx, &sup, split(seed, k as u64)))
        .collect::<mechdelin::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut table = Table::new(&["draw", "sup"]);
    for (k, s) in est.sups.iter().enumerate() {
        table.push(vec![json!(k), json!(s)]);
    }
    let dt = theorem_dt(&model.class, &samples.profiles[0]).ok();
    let summary = object(vec![
        ("mean", json!(est.mean)),
        ("stderr", json!(est.stderr)),
        ("draws", json!(est.draws)),
        ("sup_method", json!(est.sup_method)),
        ("N", json!(samples.len())),
        ("U_sample", json!(u)),
        ("theorem_dt", json!(dt)),
        ("pdim2erad_bound", json!(dt.map(|(d, t)| pdim2erad_bound(u, d, t, samples.len() as u64)))),
    ]);
    Ok((summary, table))
}

fn bound(a: &crate::BoundArgs) -> Result<Output> {
    let base = BoundInputs { u: a.u, d: a.d, t: a.t, n: a.n, delta: a.delta, constant: a.constant };
    base.validate()?;
    let eps = generalization_epsilon(&base);
    let pdim = pdim_upper_bound(a.d, a.t);
    let erad = pdim2erad_bound(a.u, a.d, a.t, a.n);
    let outlier = match (a.a, a.b) {
        (Some(x), Some(b)) => {
            let inp = OutlierInputs { a: x, b, base: base.clone(), log_base: a.log_base };
            inp.validate()?;
            Some(outlier_bound(&inp))
        }
        (None, None) => None,
        _ => return Err(bad("a, b: pass both for the outlier bound")),
    };
    let mut table = Table::new(&["U", "d", "t", "N", "delta", "constant", "pdim", "pdim2erad", "epsilon", "outlier_bound"]);
    table.push(vec![
        json!(a.u),
        json!(a.d),
        json!(a.t),
        json!(a.n),
        json!(a.delta),
        json!(a.constant),
        json!(pdim),
        json!(erad),
        json!(eps),
        json!(outlier),
    ]);
    let mut summary = serde_json::to_value(&base)?;
    summary["pdim"] = json!(pdim);
    summary["pdim2erad"] = json!(erad);
    summary["epsilon"] = json!(eps);
    summary["outlier_bound"] = json!(outlier);
    Ok((summary, table))
}

fn shatter(a: &crate::ShatterArgs, seed: u64) -> Result<Output> {
    let (model, samples, z, strategy) = match a.construction.as_deref() {
        Some("item_pricing") => {
            let inst = item_pricing_shattering_instance(a.n, a.m, !a.non_anonymous)?;
            (inst.model, inst.samples, inst.witnesses, ShatterStrategy::Explicit(inst.params))
        }
        Some(other) => return Err(bad(format!("construction: unknown '{other}' (known: item_pricing)"))),
        None => {
            let path = a.samples.as_ref().ok_or_else(|| bad("samples: pass --samples FILE or --construction"))?;
            let pf = load(path)?;
            let samples = pf.samples()?.profiles;
            let model = ProfitModel::new(class(&a.class)?, pf.cost()?);
            let z = a.z.clone().ok_or_else(|| bad("z: one witness per sample is required"))?;
            let bx = param_box(&model, &samples[0], max_value(&samples), &a.bx)?;
            (model, samples, z, ShatterStrategy::ErmSearch { sup: sup_method(&a.method)?, bx, seed })
        }
    };
    let rep = shattering_check(&model, &samples, &z, &strategy)?;
    let mut table = Table::new(&["labeling", "in_T", "realized", "witness_params"]);
    for (t, w) in rep.witnesses.iter().enumerate() {
        let members: Vec<usize> = (0..samples.len()).filter(|i| t >> i & 1 == 1).collect();
        table.push(vec![json!(t), json!(members), json!(w.is_some()), json!(w)]);
    }
    let summary = object(vec![
        ("class", serde_json::to_value(&model.class)?),
        ("N", json!(samples.len())),
        ("z", json!(z)),
        ("shattered", json!(rep.shattered)),
        ("realized_labelings", json!(rep.realized_labelings)),
        ("total_labelings", json!(rep.total_labelings)),
    ]);
    Ok((summary, table))
}

fn distribution(path: &Path) -> Result<(DistributionSpec, CostFunction, ProblemFile)> {
    let pf = load(path)?;
    Ok((pf.distribution()?, pf.cost()?, pf))
}

fn gap(a: &crate::GapArgs, seed: u64) -> Result<Output> {
    let (dist, cost, _) = distribution(&a.dist)?;
    let model = ProfitModel::new(class(&a.class)?, cost);
    let rep = gap_experiment(&model, &dist, a.n, a.trials, seed, &sup_method(&a.method)?, a.delta)?;
    let mut table = Table::new(&["trial", "seed", "empirical", "expected", "gap"]);
    for r in &rep.rows {
        table.push(vec![json!(r.trial), json!(r.seed.to_string()), json!(r.empirical), json!(r.expected), json!(r.gap)]);
    }
    let mut summary = serde_json::to_value(&rep)?;
    summary.as_object_mut().expect("object").remove("rows");
    Ok((summary, table))
}

fn decompose(a: &crate::DecomposeArgs) -> Result<Output> {
    let (dist, cost, _) = distribution(&a.dist)?;
    let model = ProfitModel::new(class(&a.class)?, cost);
    let chk = verify_sup_decomposition(&model, &dist)?;
    let mut table = Table::new(&["item", "U_i"]);
    for (i, u) in chk.per_item.iter().enumerate() {
        table.push(vec![json!(i), json!(u)]);
    }
    Ok((serde_json::to_value(&chk)?, table))
}

fn outlier(a: &crate::OutlierArgs, seed: u64) -> Result<Output> {
    let (dist, cost, _) = distribution(&a.dist)?;
    if a.b.is_empty() {
        return Err(bad("b: at least one value is required"));
    }
    if a.trials == 0 || a.n == 0 {
        return Err(bad("N, trials: must be at least 1"));
    }
    let mp = dist
        .atoms()
        .iter()
        .map(|at| max_profit_mp(MpKind::TwoPartTariff, &at.profile, &cost))
        .collect::<mechdelin::Result<Vec<f64>>>()?;
    let slack = 5.0 * ((1.0 / a.delta).log2() / a.n as f64).sqrt();
    let mut table = Table::new(&["b", "trial", "a", "exceedance", "within"]);
    let mut per_b = Vec::new();
    for (bi, &b) in a.b.iter().enumerate() {
        let rows = (0..a.trials)
            .into_par_iter()
            .map(|k| {
                let s = dist.sample(a.n, split(split(seed, bi as u64), k as u64))?;
                let idx = s.atom_indices.as_ref().expect("sampled sets record atoms");
                let vals: Vec<f64> = idx.iter().map(|&i| mp[i]).collect();
                let thr = quantile_a(&vals, b)?;
                let exceed: f64 = dist.atoms().iter().zip(&mp).filter(|(_, &v)| v > thr).map(|(at, _)| at.prob).sum();
                Ok((thr, exceed))
            })
            .collect::<mechdelin::Result<Vec<_>>>()?;
        let within = rows.iter().filter(|r| r.1 < b + slack).count();
        for (k, (thr, exceed)) in rows.iter().enumerate() {
            table.push(vec![json!(b), json!(k), json!(thr), json!(exceed), json!(*exceed < b + slack)]);
        }
        per_b.push(json!({ "b": b, "threshold": b + slack, "within": within as f64 / a.trials as f64 }));
    }
    let summary = object(vec![("N", json!(a.n)), ("delta", json!(a.delta)), ("trials", json!(a.trials)), ("per_b", json!(per_b))]);
    Ok((summary, table))
}

fn spm(a: &crate::SpmArgs, seed: u64) -> Result<Output> {
    let text = std::fs::read_to_string(&a.hierarchy).map_err(|e| bad(format!("{}: {e}", a.hierarchy.display())))?;
    let mut h: Hierarchy = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", a.hierarchy.display())))?;
    match a.weights.as_deref() {
        None => {}
        Some("geometric") => h.weights = Weights::Geometric,
        Some("uniform") => h.weights = Weights::Uniform,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| bad(format!("weights: {path}: {e}")))?;
            h.weights = Weights::Explicit(serde_json::from_str(&text).map_err(|e| bad(format!("weights: {path}: {e}")))?);
        }
    }
    let pf = load(&a.samples)?;
    let samples = pf.samples()?;
    let cost = pf.cost()?;
    let dist = a.dist.as_ref().map(|p| distribution(p)).transpose()?.map(|d| d.0);
    let sup = sup_method(&a.method)?;
    let finest = ProfitModel::new(h.level_class(h.len().saturating_sub(1)), cost.clone());
    let max_value = dist.as_ref().map_or_else(|| max_value(&samples.profiles), |d| d.max_value());
    let u = match (a.u, &dist) {
        (Some(u), _) => u,
        (None, Some(d)) => compute_u(&finest, d, &sup, seed)?,
        (None, None) => {
            let bx = param_box(&finest, &samples.profiles[0], max_value, &BoxArgs { lo: None, hi: None })?;
            let mut u = 0.0f64;
            for (k, p) in samples.profiles.iter().enumerate() {
                u = u.max(profile_sup(&finest, p, &bx, &sup, split(seed, k as u64))?);
            }
            u
        }
    };
    let cfg = SpmConfig { delta: a.delta, constant: a.constant, sup, seed };
    let res = spm_select(&h, &cost, &samples, u, max_value, &cfg)?;
    let mut table = Table::new(&["level", "d", "t", "weight", "empirical_max", "epsilon", "epsilon_alt", "lower_bound", "selected"]);
    for r in &res.levels {
        table.push(vec![
            json!(r.level),
            json!(r.d),
            json!(r.t),
            json!(r.weight),
            json!(r.empirical_max),
            json!(r.epsilon),
            json!(r.epsilon_alt),
            json!(r.lower_bound),
            json!(r.level == res.selected_level),
        ]);
    }
    let mut summary = serde_json::to_value(&res)?;
    summary["U"] = json!(u);
    summary["N"] = json!(samples.len());
    if a.union_trials > 0 {
        let d = dist.as_ref().ok_or_else(|| bad("union_trials: needs --dist"))?;
        let rep = union_bound_check(&h, &cost, d, samples.len(), a.union_trials, u, &cfg)?;
        summary["union_bound"] = json!({
            "trials": rep.trials,
            "epsilons": rep.epsilons,
            "violation_rate": rep.violation_rate,
            "lower_bound_rate": rep.lower_bound_rate,
            "smallest_clean_constant": rep.smallest_clean_constant,
        });
    }
    Ok((summary, table))
}

fn sample(a: &crate::SampleArgs, seed: u64) -> Result<Output> {
    let (dist, _, pf) = distribution(&a.dist)?;
    let s = dist.sample(a.n, seed)?;
    if let Some(path) = &a.write {
        let file = samples_file(&s, pf.cost.clone());
        std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n").map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    }
    let mut table = Table::new(&["sample", "atom"]);
    for (k, i) in s.atom_indices.iter().flatten().enumerate() {
        table.push(vec![json!(k), json!(i)]);
    }
    let summary = object(vec![("N", json!(s.len())), ("atoms", json!(dist.atoms().len())), ("written", json!(a.write))]);
    Ok((summary, table))
}
