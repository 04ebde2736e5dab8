//! Generalization bounds, empirical Rademacher complexity, shattering checks, the
//! decomposition of sup-profit over independent items, and sample-gap experiments.
//!
//! Every bound plugs in the pseudo-dimension upper bound `9·d·log2(4·d·t)`. The constants
//! hidden in the asymptotic statements are exposed as `constant` (default 1).

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::erm::{with_incumbents, ErmResult, Objective, ParamBox, SupMethod};
use crate::error::{domain, Error, Result};
use crate::mechanisms::{expected_profit, Anonymity, Kind, MechanismClass, ProfitModel};
use crate::partition::{pdim_upper_bound, theorem_dt};
use crate::rng::{rng, split};
use crate::valuations::{CostFunction, DistributionSpec, SampleSet, ValuationProfile};

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Largest profit achievable over the support.
    #[serde(rename = "U")]
    pub u: f64,
    pub d: u64,
    pub t: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub delta: f64,
    #[serde(default = "one")]
    pub constant: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.u >= 0.0) || !self.u.is_finite() {
            return domain("U: must be a finite non-negative number");
        }
        if self.d == 0 || self.t == 0 {
            return domain("d, t: must be at least 1");
        }
        if self.n == 0 {
            return domain("N: must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return domain("delta: must lie in (0, 1)");
        }
        if !(self.constant >= 0.0) {
            return domain("constant: must be non-negative");
        }
        Ok(())
    }
}

/// `constant·(U·√(Pdim/N) + U·√(ln(1/δ)/N))`.
pub fn generalization_epsilon(inp: &BoundInputs) -> f64 {
    let n = inp.n as f64;
    inp.constant * (pdim2erad_bound(inp.u, inp.d, inp.t, inp.n) + inp.u * ((1.0 / inp.delta).ln() / n).sqrt())
}

/// `U·√(Pdim/N)`.
pub fn pdim2erad_bound(u: f64, d: u64, t: u64, n: u64) -> f64 {
    u * (pdim_upper_bound(d, t) / n as f64).sqrt()
}

/// `Σ U_i·√(Pdim(d_i, t_i)/N)` for a profit that splits into independent parts.
pub fn decomposable_bound(parts: &[(f64, u64, u64)], n: u64) -> Result<f64> {
    if parts.is_empty() {
        return domain("parts: at least one (U, d, t) part is required");
    }
    Ok(parts.iter().map(|&(u, d, t)| pdim2erad_bound(u, d, t, n)).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierInputs {
    /// Profit threshold above which a profile counts as an outlier.
    pub a: f64,
    /// Allowed outlier probability.
    pub b: f64,
    #[serde(flatten)]
    pub base: BoundInputs,
    /// Base of the logarithm in the `log(1/δ)/N³` term.
    #[serde(default = "two")]
    pub log_base: f64,
}

impl OutlierInputs {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(0.0..=1.0).contains(&self.b) {
            return domain("b: must lie in [0, 1]");
        }
        if !(self.a >= 0.0) || self.a > self.base.u {
            return domain("a: must satisfy 0 ≤ a ≤ U");
        }
        if !(self.log_base > 1.0) {
            return domain("log_base: must exceed 1");
        }
        Ok(())
    }
}

/// `constant·√((Pdim/N)·(a² + U²·(b + √(log(1/δ)/N³))))`.
pub fn outlier_bound(inp: &OutlierInputs) -> f64 {
    let b = &inp.base;
    let n = b.n as f64;
    let tail = ((1.0 / b.delta).ln() / inp.log_base.ln() / n.powi(3)).sqrt();
    b.constant * ((pdim_upper_bound(b.d, b.t) / n) * (inp.a * inp.a + b.u * b.u * (inp.b + tail))).sqrt()
}

/// Threshold `a` such that roughly a `b` fraction of the sampled `MP` values exceed it:
/// the `⌊bN⌋`-th largest value.
pub fn quantile_a(mp_values: &[f64], b: f64) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return domain("b: must lie in (0, 1)");
    }
    let n = mp_values.len();
    let k = (b * n as f64).floor() as usize;
    if k == 0 {
        return domain(format!("b: ⌊b·N⌋ = 0 for b = {b}, N = {n}; b is too small for this sample"));
    }
    let mut v = mp_values.to_vec();
    v.sort_by(|x, y| x.total_cmp(y));
    Ok(v[n - k])
}

/// Search box with prices up to twice the distribution's largest value.
pub fn distribution_box(model: &ProfitModel, dist: &DistributionSpec) -> Result<ParamBox> {
    let (lo, hi) = model.class.default_box(dist.n(), dist.caps(), dist.max_value())?;
    ParamBox::new(lo, hi)
}

/// Empirical maximizer with the zero-revenue mechanism as a fallback candidate.
pub fn sup_with_null(model: &ProfitModel, obj: &Objective, bx: &ParamBox, sup: &SupMethod, seed: u64) -> Result<ErmResult> {
    let first = &obj.items[0].0;
    let null = model.class.null_params(first.n(), first.caps())?;
    let r = sup.run(model, obj, bx, seed)?;
    with_incumbents(model, obj, r, &[null])
}

/// Largest profit any mechanism of the class earns on a single profile.
pub fn profile_sup(model: &ProfitModel, profile: &ValuationProfile, bx: &ParamBox, sup: &SupMethod, seed: u64) -> Result<f64> {
    let obj = Objective::average(&SampleSet::from_profiles(vec![profile.clone()]))?;
    Ok(sup_with_null(model, &obj, bx, sup, seed)?.best_value)
}

/// `U`: the closed-form `MP` where one exists, otherwise the searched sup, maximized over the support.
pub fn compute_u(model: &ProfitModel, dist: &DistributionSpec, sup: &SupMethod, seed: u64) -> Result<f64> {
    let bx = distribution_box(model, dist)?;
    let vals = dist
        .atoms()
        .par_iter()
        .enumerate()
        .map(|(k, a)| match model.mp_closed_form(&a.profile) {
            Some(v) => Ok(v),
            None => profile_sup(model, &a.profile, &bx, sup, split(seed, k as u64)),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
    pub sup_method: String,
    /// Supremum found for each sign draw.
    pub sups: Vec<f64>,
}

fn method_name(sup: &SupMethod) -> String {
    match sup {
        SupMethod::Exact => "exact_2d".into(),
        SupMethod::Grid { resolution } => format!("grid({resolution})"),
        SupMethod::Random { draws } => format!("random({draws})"),
        SupMethod::CellSampled { probes } => format!("cell_sampled({probes})"),
    }
}

/// Mean and standard error (sample deviation over `√draws`).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `E_σ sup (1/N) Σ σ_i·profit(v_i)`, estimated over `sigma_draws` sign vectors.
pub fn empirical_rademacher(
    model: &ProfitModel,
    samples: &SampleSet,
    bx: &ParamBox,
    sigma_draws: usize,
    seed: u64,
    sup: &SupMethod,
) -> Result<RademacherEstimate> {
    if sigma_draws == 0 {
        return domain("sigma_draws: must be at least 1");
    }
    let n = samples.len();
    let sups = (0..sigma_draws)
        .into_par_iter()
        .map(|k| {
            let s = split(seed, k as u64);
            let mut r = rng(s);
            let w: Vec<f64> = (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 } / n as f64).collect();
            let obj = Objective::weighted(samples, w)?;
            Ok(sup_with_null(model, &obj, bx, sup, split(s, 1))?.best_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&sups);
    Ok(RademacherEstimate { mean, stderr, draws: sigma_draws, sup_method: method_name(sup), sups })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    #[serde(rename = "U")]
    pub u: f64,
    /// `U_i` for each item, from its marginal alone.
    pub per_item: Vec<f64>,
    pub sum_ui: f64,
    pub equal: bool,
}

/// Compares `U` over the product support with `Σ_i U_i` over the item marginals, both
/// by exact search of every support point.
pub fn verify_sup_decomposition(model: &ProfitModel, dist: &DistributionSpec) -> Result<DecompositionCheck> {
    let kind = model.class.kind;
    if !matches!(kind, Kind::ItemPricing | Kind::SecondPriceReserves | Kind::ItemLotteryMenu) {
        return domain(format!("{kind}: profit does not split over items"));
    }
    if !model.cost.is_linear() {
        return domain("cost: must be zero or additive for profit to split over items");
    }
    let marginals = match dist.marginals() {
        Some(m) if dist.is_item_independent() => m,
        _ => return domain("distribution: must be item-independent (built from per-item marginals)"),
    };
    let sup = SupMethod::Exact;
    let maxv = dist.max_value();
    let (lo, hi) = model.class.default_box(dist.n(), dist.caps(), maxv)?;
    let bx = ParamBox::new(lo, hi)?;
    let u = dist
        .atoms()
        .par_iter()
        .map(|a| profile_sup(model, &a.profile, &bx, &sup, 0))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let per_item = marginals
        .iter()
        .enumerate()
        .map(|(i, marginal)| {
            let cost = if model.cost.is_zero() { CostFunction::Zero } else { CostFunction::additive(vec![model.cost.item_cost(i)])? };
            let item_model = ProfitModel { class: model.class.clone(), cost, cfg: model.cfg };
            let (lo, hi) = model.class.default_box(dist.n(), &[1], maxv)?;
            let bx = ParamBox::new(lo, hi)?;
            let mut best = f64::NEG_INFINITY;
            for (values, _) in marginal {
                let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
                let p = ValuationProfile::additive(&rows)?;
                best = best.max(profile_sup(&item_model, &p, &bx, &sup, 0)?);
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let sum_ui: f64 = per_item.iter().sum();
    Ok(DecompositionCheck { u, per_item, sum_ui, equal: (u - sum_ui).abs() <= 1e-9 })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ShatterStrategy {
    /// Candidate parameter vectors to try against every labeling.
    Explicit(Vec<Vec<f64>>),
    /// Per labeling, maximize `Σ_{i∈T} profit_i − Σ_{i∉T} profit_i` and test the maximizer.
    ErmSearch { sup: SupMethod, bx: ParamBox, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub shattered: bool,
    pub realized_labelings: usize,
    pub total_labelings: usize,
    /// A realizing parameter vector per labeling (bit `i` set ⇔ sample `i` in `T`).
    pub witnesses: Vec<Option<Vec<f64>>>,
}

/// Labeling realized by `params`: bit `i` set iff `profit(v_i) ≥ z_i`.
fn labeling(model: &ProfitModel, samples: &[ValuationProfile], z: &[f64], params: &[f64]) -> Result<usize> {
    let mut mask = 0;
    for (i, (p, &zi)) in samples.iter().zip(z).enumerate() {
        if model.profit(params, p)? >= zi {
            mask |= 1 << i;
        }
    }
    Ok(mask)
}

/// Whether the class shatters `samples` with witnesses `z` (in `T` ⇔ profit ≥ z).
pub fn shattering_check(model: &ProfitModel, samples: &[ValuationProfile], z: &[f64], strategy: &ShatterStrategy) -> Result<ShatterReport> {
    let n = samples.len();
    if n > 20 {
        return Err(Error::Resource(format!("shattering: 2^{n} labelings exceed the 2^20 limit")));
    }
    if z.len() != n {
        return domain(format!("witnesses: {} values for {n} samples", z.len()));
    }
    let total = 1usize << n;
    if n == 0 {
        // The empty labeling holds for every mechanism.
        return Ok(ShatterReport { shattered: true, realized_labelings: 1, total_labelings: 1, witnesses: vec![None] });
    }
    let mut witnesses: Vec<Option<Vec<f64>>> = vec![None; total];
    let found: Vec<(usize, Vec<f64>)> = match strategy {
        ShatterStrategy::Explicit(list) => list
            .par_iter()
            .map(|p| labeling(model, samples, z, p).map(|m| (m, p.clone())))
            .collect::<Result<Vec<_>>>()?,
        ShatterStrategy::ErmSearch { sup, bx, seed } => {
            let set = SampleSet::from_profiles(samples.to_vec());
            (0..total)
                .into_par_iter()
                .map(|t| {
                    let w = (0..n).map(|i| if t >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                    let obj = Objective::weighted(&set, w)?;
                    let r = sup.run(model, &obj, bx, split(*seed, t as u64))?;
                    labeling(model, samples, z, &r.best_params).map(|m| (m, r.best_params))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    for (m, p) in found {
        witnesses[m].get_or_insert(p);
    }
    let realized = witnesses.iter().filter(|w| w.is_some()).count();
    Ok(ShatterReport { shattered: realized == total, realized_labelings: realized, total_labelings: total, witnesses })
}

/// The item-pricing lower-bound construction: each sample has one buyer valuing one item
/// at 3 (everything else 0), witnesses are 1, and labeling `T` is realized by price 2 on
/// the `(buyer, item)` pairs of `T` and 0 elsewhere.
#[derive(Clone, Debug)]
pub struct ShatterInstance {
    pub model: ProfitModel,
    pub samples: Vec<ValuationProfile>,
    pub witnesses: Vec<f64>,
    pub params: Vec<Vec<f64>>,
}

/// Anonymous (`n = 1`, `m` samples) or non-anonymous (`n·m` samples) instance.
pub fn item_pricing_shattering_instance(n: usize, m: usize, anonymous: bool) -> Result<ShatterInstance> {
    let n = if anonymous { 1 } else { n };
    if n == 0 || m == 0 || n * m > 20 {
        return domain("shattering instance: need n, m ≥ 1 and n·m ≤ 20");
    }
    let anonymity = if anonymous { Anonymity::Anonymous } else { Anonymity::NonAnonymous };
    let model = ProfitModel::new(MechanismClass::new(Kind::ItemPricing).with_anonymity(anonymity), CostFunction::Zero);
    // Sample k = j·m + i: buyer j values item i at 3; parameter k is buyer j's price for item i.
    let samples = (0..n * m)
        .map(|k| {
            let rows: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| if j * m + i == k { 3.0 } else { 0.0 }).collect()).collect();
            ValuationProfile::additive(&rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let params = (0..1usize << (n * m)).map(|t| (0..n * m).map(|k| if t >> k & 1 == 1 { 2.0 } else { 0.0 }).collect()).collect();
    Ok(ShatterInstance { model, samples, witnesses: vec![1.0; n * m], params })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub trial: usize,
    pub seed: u64,
    pub empirical: f64,
    pub expected: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub constant: f64,
    pub epsilon: f64,
    /// Fraction of trials with `gap ≤ epsilon`.
    pub within: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "U")]
    pub u: f64,
    pub d: u64,
    pub t: u64,
    pub delta: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    pub envelope: Vec<EnvelopeRow>,
    pub rows: Vec<GapRow>,
}

pub const GAP_CONSTANTS: [f64; 3] = [0.25, 0.5, 1.0];

/// Per trial: draw `n` samples, take the empirical maximizer, and compare its sample
/// profit with its exact expected profit.
pub fn gap_experiment(
    model: &ProfitModel,
    dist: &DistributionSpec,
    n: usize,
    trials: usize,
    seed: u64,
    sup: &SupMethod,
    delta: f64,
) -> Result<GapReport> {
    if n == 0 || trials == 0 {
        return domain("N and trials must be at least 1");
    }
    let u = compute_u(model, dist, sup, seed)?;
    let (d, t) = theorem_dt(&model.class, &dist.atoms()[0].profile)?;
    let bx = distribution_box(model, dist)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = split(seed, k as u64 + 1);
            let samples = dist.sample(n, s)?;
            let obj = Objective::average(&samples)?;
            let r = sup_with_null(model, &obj, &bx, sup, split(s, 1))?;
            let expected = expected_profit(dist, model, &r.best_params)?;
            Ok(GapRow { trial: k, seed: s, empirical: r.best_value, expected, gap: (r.best_value - expected).abs() })
        })
        .collect::<Result<Vec<GapRow>>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let envelope = GAP_CONSTANTS
        .iter()
        .map(|&c| {
            let epsilon = generalization_epsilon(&BoundInputs { u, d, t, n: n as u64, delta, constant: c });
            EnvelopeRow { constant: c, epsilon, within: gaps.iter().filter(|&&g| g <= epsilon).count() as f64 / trials as f64 }
        })
        .collect();
    Ok(GapReport {
        n,
        u,
        d,
        t,
        delta,
        max_gap: gaps.iter().cloned().fold(0.0, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / trials as f64,
        envelope,
        rows,
    })
}
