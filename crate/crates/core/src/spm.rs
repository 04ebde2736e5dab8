//! Structural profit maximization over nested mechanism classes.
//!
//! Each level is a class; a level's bound is the generalization ε at confidence
//! `δ·w(level)`, so a union bound covers every level at once. The selected level maximizes
//! `empirical_max − ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{generalization_epsilon, sup_with_null, BoundInputs};
use crate::erm::{with_incumbents, Objective, ParamBox, SupMethod};
use crate::error::{domain, Result};
use crate::mechanisms::{expected_profit, Anonymity, Kind, MechanismClass, ProfitModel};
use crate::partition::{pdim_upper_bound, theorem_dt};
use crate::rng::split;
use crate::valuations::{CostFunction, DistributionSpec, SampleSet, ValuationProfile};

/// How one level differs from the next.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Levels {
    /// Level k prices by the k-th buyer partition (each refining the previous).
    GroupPricing { partitions: Vec<Vec<Vec<usize>>> },
    /// Level k offers a menu of the k-th length (non-decreasing).
    MenuLength { lengths: Vec<usize> },
    /// Level k boosts the k-th allocation set (each containing the previous).
    QBoosted { sets: Vec<Vec<Vec<usize>>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Weights {
    /// `w(i) = 2^{-i} / (1 − 2^{-T})` for levels `i = 1..T`.
    #[default]
    Geometric,
    Uniform,
    Explicit(Vec<f64>),
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub base: MechanismClass,
    pub levels: Levels,
    #[serde(default)]
    pub weights: Weights,
}

impl Hierarchy {
    pub fn len(&self) -> usize {
        match &self.levels {
            Levels::GroupPricing { partitions } => partitions.len(),
            Levels::MenuLength { lengths } => lengths.len(),
            Levels::QBoosted { sets } => sets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class of level `k` (0-based).
    pub fn level_class(&self, k: usize) -> MechanismClass {
        let mut c = self.base.clone();
        match &self.levels {
            Levels::GroupPricing { partitions } => c.anonymity = Anonymity::Grouped(partitions[k].clone()),
            Levels::MenuLength { lengths } => c.structure.menu_length = lengths[k],
            Levels::QBoosted { sets } => c.structure.boosted = Some(sets[k].clone()),
        }
        c
    }

    pub fn weight(&self, k: usize) -> f64 {
        let t = self.len();
        match &self.weights {
            Weights::Geometric => 0.5f64.powi(k as i32 + 1) / (1.0 - 0.5f64.powi(t as i32)),
            Weights::Uniform => 1.0 / t as f64,
            Weights::Explicit(w) => w[k],
        }
    }

    /// Checks the weights and that the levels are nested.
    pub fn validate(&self, n: usize, caps: &[u32]) -> Result<()> {
        let t = self.len();
        if t == 0 {
            return domain("hierarchy: at least one level is required");
        }
        if let Weights::Explicit(w) = &self.weights {
            if w.len() != t {
                return domain(format!("weights: {} values for {t} levels", w.len()));
            }
            if w.iter().any(|&x| !(x >= 0.0)) {
                return domain("weights: must be non-negative");
            }
        }
        let total: f64 = (0..t).map(|k| self.weight(k)).sum();
        if total > 1.0 + 1e-12 {
            return domain(format!("weights: sum to {total} > 1"));
        }
        for k in 0..t {
            self.level_class(k).validate(n, caps)?;
        }
        for k in 1..t {
            let nested = match &self.levels {
                Levels::GroupPricing { partitions } => {
                    let coarse = Anonymity::Grouped(partitions[k - 1].clone()).assignment(n)?;
                    partitions[k].iter().all(|g| g.iter().all(|&j| coarse[j] == coarse[g[0]]))
                }
                Levels::MenuLength { lengths } => lengths[k] >= lengths[k - 1],
                Levels::QBoosted { sets } => sets[k - 1].iter().all(|q| sets[k].contains(q)),
            };
            if !nested {
                return domain(format!("hierarchy: level {} does not contain level {k}", k + 1));
            }
        }
        Ok(())
    }

    /// `(d, t)` of level `k`. Group-pricing levels over `g` groups use `(g·m, n·m)`.
    pub fn level_dt(&self, k: usize, profile: &ValuationProfile) -> Result<(u64, u64)> {
        match &self.levels {
            Levels::GroupPricing { partitions } if self.base.kind == Kind::ItemPricing => {
                let (n, m) = (profile.n() as u64, profile.m() as u64);
                Ok((partitions[k].len() as u64 * m, n * m))
            }
            _ => theorem_dt(&self.level_class(k), profile),
        }
    }

    /// Parameters of level `from` rewritten for level `to ≥ from`, describing the same mechanism.
    pub fn embed_params(&self, from: usize, to: usize, params: &[f64], n: usize, caps: &[u32]) -> Result<Vec<f64>> {
        let (src, dst) = (self.level_class(from), self.level_class(to));
        let m = caps.len();
        match &self.levels {
            Levels::GroupPricing { .. } => {
                let block = src.dim(n, caps)? / src.anonymity.group_count(n);
                let (a_src, a_dst) = (src.anonymity.assignment(n)?, dst.anonymity.assignment(n)?);
                let mut out = vec![0.0; dst.dim(n, caps)?];
                for j in 0..n {
                    let (gs, gd) = (a_src[j], a_dst[j]);
                    out[gd * block..(gd + 1) * block].copy_from_slice(&params[gs * block..(gs + 1) * block]);
                }
                Ok(out)
            }
            Levels::MenuLength { .. } => {
                let (ls, ld) = (src.structure.menu_length, dst.structure.menu_length);
                let groups = src.anonymity.group_count(n);
                let (bs, bd) = (src.dim(n, caps)? / groups, dst.dim(n, caps)? / groups);
                let mut out = Vec::with_capacity(bd * groups);
                for g in 0..groups {
                    let block = &params[g * bs..(g + 1) * bs];
                    // Extra entries copy entry 0; ties then resolve to the original entry.
                    match src.kind {
                        Kind::ItemLotteryMenu => {
                            for i in 0..m {
                                let item = &block[i * 2 * ls..(i + 1) * 2 * ls];
                                out.extend_from_slice(item);
                                for _ in ls..ld {
                                    out.extend_from_slice(&item[..2]);
                                }
                            }
                        }
                        _ => {
                            let e = bs / ls;
                            out.extend_from_slice(block);
                            for _ in ls..ld {
                                out.extend_from_slice(&block[..e]);
                            }
                        }
                    }
                }
                Ok(out)
            }
            Levels::QBoosted { sets } => {
                let offset = if src.kind == Kind::Ama { n } else { 0 };
                let mut out = vec![0.0; dst.dim(n, caps)?];
                out[..offset].copy_from_slice(&params[..offset]);
                for (q, owners) in sets[from].iter().enumerate() {
                    let at = sets[to].iter().position(|o| o == owners).expect("levels are nested");
                    out[offset + at] = params[offset + q];
                }
                Ok(out)
            }
        }
    }
}

/// ε of level `k`: the generalization bound at confidence `δ·w(k)`.
pub fn level_epsilon(h: &Hierarchy, k: usize, u: f64, n: u64, delta: f64, constant: f64, profile: &ValuationProfile) -> Result<f64> {
    let w = h.weight(k);
    if !(w > 0.0) {
        return domain(format!("weights: level {} has weight 0", k + 1));
    }
    let (d, t) = h.level_dt(k, profile)?;
    Ok(generalization_epsilon(&BoundInputs { u, d, t, n, delta: delta * w, constant }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    /// 1-based level number.
    pub level: usize,
    pub d: u64,
    pub t: u64,
    pub weight: f64,
    pub empirical_max: f64,
    pub epsilon: f64,
    /// `U·√(d·log2(t)/N)` plus the same confidence term, the closed form quoted for
    /// group pricing; reported next to `epsilon`, never used for selection.
    pub epsilon_alt: f64,
    pub lower_bound: f64,
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpmResult {
    pub levels: Vec<LevelRow>,
    /// 1-based.
    pub selected_level: usize,
    pub selected_params: Vec<f64>,
}

/// Settings shared by selection and the union-bound experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpmConfig {
    pub delta: f64,
    #[serde(default = "default_constant")]
    pub constant: f64,
    pub sup: SupMethod,
    #[serde(default)]
    pub seed: u64,
}

fn default_constant() -> f64 {
    1.0
}

/// Per-level empirical maxima, made monotone by re-evaluating every lower level's
/// maximizer inside the higher level.
fn level_maxima(h: &Hierarchy, cost: &CostFunction, samples: &SampleSet, bx_hi: f64, cfg: &SpmConfig) -> Result<Vec<(f64, Vec<f64>)>> {
    let first = &samples.profiles[0];
    let (n, caps) = (first.n(), first.caps().to_vec());
    let obj = Objective::average(samples)?;
    let raw = (0..h.len())
        .into_par_iter()
        .map(|k| {
            let model = ProfitModel::new(h.level_class(k), cost.clone());
            let bx = level_box(&model, n, &caps, bx_hi)?;
            let r = sup_with_null(&model, &obj, &bx, &cfg.sup, split(cfg.seed, k as u64))?;
            Ok((r, model))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(h.len());
    for (k, (r, model)) in raw.into_iter().enumerate() {
        let incumbents = out
            .iter()
            .enumerate()
            .map(|(j, (_, p))| h.embed_params(j, k, p, n, &caps))
            .collect::<Result<Vec<_>>>()?;
        let r = with_incumbents(&model, &obj, r, &incumbents)?;
        out.push((r.best_value, r.best_params));
    }
    Ok(out)
}

fn level_box(model: &ProfitModel, n: usize, caps: &[u32], max_value: f64) -> Result<ParamBox> {
    let (lo, hi) = model.class.default_box(n, caps, max_value)?;
    ParamBox::new(lo, hi)
}

/// Selects the level maximizing `empirical_max − ε`; ties go to the lowest level.
/// `u` bounds the profit of every level; `max_value` sets the price search range.
pub fn spm_select(h: &Hierarchy, cost: &CostFunction, samples: &SampleSet, u: f64, max_value: f64, cfg: &SpmConfig) -> Result<SpmResult> {
    if samples.is_empty() {
        return domain("samples: the sample set is empty");
    }
    let first = &samples.profiles[0];
    h.validate(first.n(), first.caps())?;
    let maxima = level_maxima(h, cost, samples, max_value, cfg)?;
    let n = samples.len() as u64;
    let levels = maxima
        .into_iter()
        .enumerate()
        .map(|(k, (empirical_max, params))| {
            let (d, t) = h.level_dt(k, first)?;
            let epsilon = level_epsilon(h, k, u, n, cfg.delta, cfg.constant, first)?;
            let conf = u * ((1.0 / (cfg.delta * h.weight(k))).ln() / n as f64).sqrt();
            let epsilon_alt = cfg.constant * (u * (d as f64 * (t as f64).log2().max(0.0) / n as f64).sqrt() + conf);
            Ok(LevelRow {
                level: k + 1,
                d,
                t,
                weight: h.weight(k),
                empirical_max,
                epsilon,
                epsilon_alt,
                lower_bound: empirical_max - epsilon,
                params,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, row) in levels.iter().enumerate() {
        if row.lower_bound > levels[best].lower_bound {
            best = k;
        }
    }
    Ok(SpmResult { selected_level: best + 1, selected_params: levels[best].params.clone(), levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionTrial {
    pub trial: usize,
    pub seed: u64,
    /// Per level: `|profit_S − profit_D|` of that level's empirical maximizer.
    pub deviations: Vec<f64>,
    /// Per level: expected profit of that level's empirical maximizer.
    pub expected: Vec<f64>,
    pub violated: bool,
    pub lower_bounds_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub trials: usize,
    pub delta: f64,
    pub epsilons: Vec<f64>,
    /// Fraction of trials where some level's deviation exceeds its ε (at the configured constant).
    pub violation_rate: f64,
    /// Fraction of trials where every level's lower bound is below its expected profit.
    pub lower_bound_rate: f64,
    /// Smallest constant at which no trial violates any level's bound.
    pub smallest_clean_constant: f64,
    pub rows: Vec<UnionTrial>,
}

/// Repeats selection on fresh samples and checks every level's deviation against its ε.
pub fn union_bound_check(
    h: &Hierarchy,
    cost: &CostFunction,
    dist: &DistributionSpec,
    n: usize,
    trials: usize,
    u: f64,
    cfg: &SpmConfig,
) -> Result<UnionReport> {
    if n == 0 || trials == 0 {
        return domain("N and trials must be at least 1");
    }
    let shape = &dist.atoms()[0].profile;
    h.validate(shape.n(), shape.caps())?;
    let epsilons = (0..h.len())
        .map(|k| level_epsilon(h, k, u, n as u64, cfg.delta, cfg.constant, shape))
        .collect::<Result<Vec<f64>>>()?;
    let unit_eps = (0..h.len())
        .map(|k| level_epsilon(h, k, u, n as u64, cfg.delta, 1.0, shape))
        .collect::<Result<Vec<f64>>>()?;
    let max_value = dist.max_value();
    let rows = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = split(cfg.seed, k as u64 + 1);
            let samples = dist.sample(n, s)?;
            let trial_cfg = SpmConfig { seed: split(s, 1), ..cfg.clone() };
            let maxima = level_maxima(h, cost, &samples, max_value, &trial_cfg)?;
            let mut deviations = Vec::with_capacity(h.len());
            let mut expected = Vec::with_capacity(h.len());
            for (level, (emp, params)) in maxima.iter().enumerate() {
                let model = ProfitModel::new(h.level_class(level), cost.clone());
                let e = expected_profit(dist, &model, params)?;
                deviations.push((emp - e).abs());
                expected.push(e);
            }
            let violated = deviations.iter().zip(&epsilons).any(|(d, e)| d > e);
            let lower_bounds_hold = maxima.iter().zip(&epsilons).zip(&expected).all(|(((emp, _), eps), e)| emp - eps <= *e);
            Ok(UnionTrial { trial: k, seed: s, deviations, expected, violated, lower_bounds_hold })
        })
        .collect::<Result<Vec<UnionTrial>>>()?;
    let smallest_clean_constant = rows
        .iter()
        .flat_map(|r| r.deviations.iter().zip(&unit_eps).map(|(d, e)| if *e > 0.0 { d / e } else if *d > 0.0 { f64::INFINITY } else { 0.0 }))
        .fold(0.0, f64::max);
    let frac = |f: &dyn Fn(&UnionTrial) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / trials as f64;
    Ok(UnionReport {
        trials,
        delta: cfg.delta,
        violation_rate: frac(&|r| r.violated),
        lower_bound_rate: frac(&|r| r.lower_bounds_hold),
        smallest_clean_constant,
        epsilons,
        rows,
    })
}

/// Pdim plugged into a level's ε, for reports.
pub fn level_pdim(h: &Hierarchy, k: usize, profile: &ValuationProfile) -> Result<f64> {
    let (d, t) = h.level_dt(k, profile)?;
    Ok(pdim_upper_bound(d, t))
}
