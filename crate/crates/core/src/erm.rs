//! Empirical profit maximization over a sample set.
//!
//! `erm_exact_lowdim` overlays every sample's hyperplanes, enumerates the overlay's cells
//! (as products of planar cells), fits the affine objective in each cell and maximizes it
//! over the cell's vertices. Grid and random search cover any dimension without guarantees.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mechanisms::ProfitModel;
use crate::partition::{enumerate_cells, fit_affine, hyperplanes_for, sample_cells, Arrangement, Cell, Hyperplane, TAU_AFFINE};
use crate::rng::rng;
use crate::valuations::{SampleSet, ValuationProfile};

/// Distance a maximizing vertex is moved into its cell before re-evaluation.
pub const TAU_PULL: f64 = 1e-7;
/// Default cap on grid points.
pub const GRID_LIMIT: usize = 4_000_000;
/// Cells thinner than this are searched point by point instead of through an affine fit.
const FIT_MARGIN: f64 = 1e-6;
/// Cap on the number of overlay cells searched exactly.
pub const PRODUCT_LIMIT: usize = 2_000_000;

/// Weighted empirical objective `Σ_i w_i · profit(v_i)`; identical draws are merged.
#[derive(Clone, Debug)]
pub struct Objective {
    pub items: Vec<(ValuationProfile, f64)>,
    /// Number of draws before merging.
    pub n_samples: usize,
}

impl Objective {
    /// Average profit over the samples (weights `1/N`).
    pub fn average(samples: &SampleSet) -> Result<Self> {
        let n = samples.len();
        Self::weighted(samples, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn weighted(samples: &SampleSet, weights: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("objective: the sample set is empty");
        }
        if weights.len() != samples.len() {
            return domain(format!("objective: {} weights for {} samples", weights.len(), samples.len()));
        }
        let mut items: Vec<(ValuationProfile, f64)> = Vec::new();
        match &samples.atom_indices {
            Some(idx) => {
                let mut slot = std::collections::BTreeMap::new();
                for ((p, &w), &a) in samples.profiles.iter().zip(&weights).zip(idx) {
                    let k = *slot.entry(a).or_insert_with(|| {
                        items.push((p.clone(), 0.0));
                        items.len() - 1
                    });
                    items[k].1 += w;
                }
            }
            None => {
                for (p, &w) in samples.profiles.iter().zip(&weights) {
                    match items.iter_mut().find(|(q, _)| q == p) {
                        Some(e) => e.1 += w,
                        None => items.push((p.clone(), w)),
                    }
                }
            }
        }
        Ok(Self { items, n_samples: samples.len() })
    }

    pub fn value(&self, model: &ProfitModel, params: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (p, w) in &self.items {
            if *w != 0.0 {
                total += w * model.profit(params, p)?;
            }
        }
        Ok(total)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &ValuationProfile> {
        self.items.iter().map(|(p, _)| p)
    }
}

/// Axis-aligned search region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return domain("box: lo and hi differ in length");
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return domain(format!("box: coordinate {i} has lo > hi or a non-finite bound"));
        }
        Ok(Self { lo, hi })
    }

    /// The class's default box, with prices up to twice the largest sampled value.
    pub fn default_for(model: &ProfitModel, objective: &Objective) -> Result<Self> {
        let first = &objective.items[0].0;
        let maxv = objective.profiles().map(|p| p.max_value()).fold(0.0, f64::max);
        let (lo, hi) = model.class.default_box(first.n(), first.caps(), maxv)?;
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamp(&self, p: &mut [f64]) {
        for (i, x) in p.iter_mut().enumerate() {
            *x = x.clamp(self.lo[i], self.hi[i]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErmMethod {
    /// Exact overlay-cell optimization.
    #[serde(rename = "exact_2d")]
    Exact,
    CellSampled,
    Grid,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub cells_examined: usize,
    pub method: ErmMethod,
}

fn check_dims(model: &ProfitModel, objective: &Objective, bx: &ParamBox) -> Result<usize> {
    let d = model.dim(&objective.items[0].0)?;
    if bx.dim() != d {
        return domain(format!("box: {} coordinates for a class with d = {d}", bx.dim()));
    }
    Ok(d)
}

/// First strictly-greater candidate wins, so equal values keep the earliest index.
fn pick_best(cands: impl IntoIterator<Item = (f64, Vec<f64>)>) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for c in cands {
        if best.as_ref().is_none_or(|b| c.0 > b.0) {
            best = Some(c);
        }
    }
    best
}

fn pulled(v: &[f64], toward: &[f64], dist: f64) -> Vec<f64> {
    let len = v.iter().zip(toward).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let t = if len > 2.0 * dist { dist / len } else { 0.5 };
    v.iter().zip(toward).map(|(a, b)| a + t * (b - a)).collect()
}

/// Coordinates linked by some hyperplane, as sorted blocks.
fn coordinate_blocks(arr: &Arrangement) -> Vec<Vec<usize>> {
    let d = arr.dim();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for h in &arr.hyperplanes {
        let support: Vec<usize> = (0..d).filter(|&i| h.normal[i] != 0.0).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

/// The arrangement restricted to the coordinates of one block.
fn block_arrangement(arr: &Arrangement, block: &[usize]) -> Result<Arrangement> {
    let hs = arr
        .hyperplanes
        .iter()
        .filter(|h| block.iter().any(|&i| h.normal[i] != 0.0))
        .filter_map(|h| Hyperplane::new(block.iter().map(|&i| h.normal[i]).collect(), h.offset, h.label.clone()))
        .collect();
    Arrangement::new(hs, block.iter().map(|&i| arr.lo[i]).collect(), block.iter().map(|&i| arr.hi[i]).collect())
}

fn with_block(base: &[f64], block: &[usize], x: &[f64]) -> Vec<f64> {
    let mut p = base.to_vec();
    for (&i, &v) in block.iter().zip(x) {
        p[i] = v;
    }
    p
}

/// Index tuples of the product of `sizes`, first factor fastest, at most `cap` of them.
fn product_indices(sizes: &[usize], cap: usize) -> Vec<Vec<usize>> {
    let total = sizes.iter().try_fold(1usize, |a, &s| a.checked_mul(s)).unwrap_or(usize::MAX).min(cap);
    (0..total)
        .map(|mut k| {
            sizes
                .iter()
                .map(|&s| {
                    let i = k % s;
                    k /= s;
                    i
                })
                .collect()
        })
        .collect()
}

/// Best true objective value over the closure of one overlay cell, given as a product of
/// per-block cells.
fn best_in_cell(model: &ProfitModel, obj: &Objective, blocks: &[Vec<usize>], parts: &[&Cell]) -> Result<(f64, Vec<f64>)> {
    let d: usize = blocks.iter().map(|b| b.len()).sum();
    let mut c = vec![0.0; d];
    for (b, part) in blocks.iter().zip(parts) {
        c = with_block(&c, b, &part.witness);
    }
    let margin = parts.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let verts: Vec<&[Vec<f64>]> = parts.iter().map(|p| p.polygon.as_deref().unwrap_or_default()).collect();
    let assemble = |choice: &[usize]| -> Vec<f64> {
        let mut x = c.clone();
        for (k, b) in blocks.iter().enumerate() {
            x = with_block(&x, b, &verts[k][choice[k]]);
        }
        x
    };
    let eval = |p: Vec<f64>| obj.value(model, &p).map(|v| (v, p));
    let mut combos: Option<Vec<Vec<usize>>> = None;
    if margin >= FIT_MARGIN && verts.iter().zip(blocks).all(|(v, b)| v.len() > b.len()) {
        let mut pts = vec![c.clone()];
        for (k, b) in blocks.iter().enumerate() {
            let cb = &parts[k].witness;
            for v in verts[k] {
                pts.push(with_block(&c, b, &pulled(v, cb, 0.25 * dist(v, cb))));
            }
        }
        let vals = pts.iter().map(|p| obj.value(model, p)).collect::<Result<Vec<f64>>>()?;
        match fit_affine(&pts, &vals) {
            Ok((coef, b0)) => {
                for (p, &f) in pts.iter().zip(&vals) {
                    let fit: f64 = coef.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + b0;
                    let r = (f - fit).abs() / (1.0 + f.abs());
                    if r > TAU_AFFINE {
                        return Err(Error::Consistency(format!(
                            "objective is not affine inside overlay cell around {c:?} (residual {r:.3e}); the class's hyperplanes miss a breakpoint"
                        )));
                    }
                }
                // An affine function on a product of polytopes peaks at a product of per-block peaks.
                let ties: Vec<Vec<usize>> = blocks
                    .iter()
                    .enumerate()
                    .map(|(k, b)| {
                        let score: Vec<f64> = verts[k].iter().map(|v| b.iter().zip(v).map(|(&i, x)| coef[i] * x).sum()).collect();
                        let top = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        (0..score.len()).filter(|&i| score[i] >= top - 1e-9 * (1.0 + top.abs())).collect()
                    })
                    .collect();
                let sizes: Vec<usize> = ties.iter().map(|t| t.len()).collect();
                combos = Some(
                    product_indices(&sizes, 64)
                        .into_iter()
                        .map(|ix| ix.iter().enumerate().map(|(k, &i)| ties[k][i]).collect())
                        .collect(),
                );
            }
            Err(Error::Geometry(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let combos = combos.unwrap_or_else(|| product_indices(&verts.iter().map(|v| v.len()).collect::<Vec<_>>(), 4096));
    let mut cands = Vec::with_capacity(2 * combos.len() + 1);
    for choice in &combos {
        let x = assemble(choice);
        cands.push(pulled(&x, &c, TAU_PULL));
        cands.push(x);
    }
    cands.push(c.clone());
    let evals = cands.into_iter().map(eval).collect::<Result<Vec<_>>>()?;
    Ok(pick_best(evals).expect("at least the witness is evaluated"))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Overlay arrangement of every sample's generating hyperplanes over the box.
pub fn overlay(model: &ProfitModel, objective: &Objective, bx: &ParamBox) -> Result<Arrangement> {
    let mut hs = Vec::new();
    for p in objective.profiles() {
        hs.extend(hyperplanes_for(model, p)?);
    }
    Arrangement::new(hs, bx.lo.clone(), bx.hi.clone())
}

/// Exact empirical maximizer when every group of coordinates linked by the overlay's
/// hyperplanes has at most two members (always so for `d ≤ 2`). The overlay's cells are
/// then products of planar cells, enumerated block by block.
pub fn erm_exact_lowdim(model: &ProfitModel, objective: &Objective, bx: &ParamBox) -> Result<ErmResult> {
    let d = check_dims(model, objective, bx)?;
    let arr = overlay(model, objective, bx)?;
    let blocks = coordinate_blocks(&arr);
    if let Some(b) = blocks.iter().find(|b| b.len() > 2) {
        return domain(format!(
            "exact ERM needs the overlay to split into blocks of at most 2 coordinates; coordinates {b:?} of d = {d} are linked; use grid or random search"
        ));
    }
    let block_cells = blocks
        .iter()
        .map(|b| {
            let e = enumerate_cells(&block_arrangement(&arr, b)?)?;
            Ok(e.cells.into_iter().chain(e.thin).collect::<Vec<Cell>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = block_cells.iter().map(|c| c.len()).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |a, &s| a.checked_mul(s).filter(|&t| t <= PRODUCT_LIMIT))
        .ok_or_else(|| Error::Resource(format!("exact ERM: more than {PRODUCT_LIMIT} overlay cells")))?;
    let per_cell = (0..total)
        .into_par_iter()
        .map(|mut k| {
            let parts: Vec<&Cell> = block_cells
                .iter()
                .map(|cells| {
                    let c = &cells[k % cells.len()];
                    k /= cells.len();
                    c
                })
                .collect();
            best_in_cell(model, objective, &blocks, &parts)
        })
        .collect::<Result<Vec<_>>>()?;
    let (best_value, best_params) = pick_best(per_cell).expect("the box is one cell at least");
    Ok(ErmResult { best_params, best_value, cells_examined: total, method: ErmMethod::Exact })
}

/// Grid axis `lo, lo + res, …` with `hi` appended when the step does not land on it.
fn axis(lo: f64, hi: f64, res: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let steps = ((hi - lo) / res + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * res).collect();
    if hi - v[steps] > 1e-12 * (1.0 + hi.abs()) {
        v.push(hi);
    }
    v
}

/// Exhaustive search over an axis-aligned grid of spacing `resolution`.
pub fn erm_grid(model: &ProfitModel, objective: &Objective, bx: &ParamBox, resolution: f64, limit: usize) -> Result<ErmResult> {
    check_dims(model, objective, bx)?;
    if !(resolution > 0.0) {
        return domain("grid: resolution must be positive");
    }
    let axes: Vec<Vec<f64>> = (0..bx.dim()).map(|i| axis(bx.lo[i], bx.hi[i], resolution)).collect();
    let total = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()).filter(|&t| t <= limit))
        .ok_or_else(|| Error::Resource(format!("grid: more than {limit} points at resolution {resolution}")))?;
    let point = |mut k: usize| -> Vec<f64> {
        axes.iter()
            .map(|a| {
                let x = a[k % a.len()];
                k /= a.len();
                x
            })
            .collect()
    };
    let best = (0..total)
        .into_par_iter()
        .map(|k| objective.value(model, &point(k)).map(|v| (v, k)))
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
        )?;
    Ok(ErmResult { best_params: point(best.1), best_value: best.0, cells_examined: total, method: ErmMethod::Grid })
}

/// Coordinate pattern search from `start`; returns the polished point and its value.
fn polish(model: &ProfitModel, objective: &Objective, bx: &ParamBox, start: (f64, Vec<f64>)) -> Result<(f64, Vec<f64>)> {
    let (mut val, mut p) = start;
    let mut step: Vec<f64> = (0..bx.dim()).map(|i| 0.1 * (bx.hi[i] - bx.lo[i])).collect();
    for _ in 0..60 {
        let mut improved = false;
        for i in 0..p.len() {
            for dir in [1.0, -1.0] {
                let mut q = p.clone();
                q[i] += dir * step[i];
                bx.clamp(&mut q);
                if q[i] == p[i] {
                    continue;
                }
                let v = objective.value(model, &q)?;
                if v > val + 1e-12 {
                    (val, p) = (v, q);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step.iter().zip(&bx.lo).zip(&bx.hi).all(|((s, l), h)| *s <= 1e-9 * (h - l).max(1e-300)) {
                break;
            }
        }
    }
    Ok((val, p))
}

/// Uniform draws in the box, then a coordinate pattern search from the best draw.
pub fn erm_random(model: &ProfitModel, objective: &Objective, bx: &ParamBox, draws: usize, seed: u64) -> Result<ErmResult> {
    check_dims(model, objective, bx)?;
    if draws == 0 {
        return domain("random search: draws must be at least 1");
    }
    let mut r = rng(seed);
    let pts: Vec<Vec<f64>> =
        (0..draws).map(|_| (0..bx.dim()).map(|i| bx.lo[i] + r.random::<f64>() * (bx.hi[i] - bx.lo[i])).collect()).collect();
    let vals = pts.par_iter().map(|p| objective.value(model, p)).collect::<Result<Vec<f64>>>()?;
    let start = pick_best(vals.into_iter().zip(pts)).expect("draws ≥ 1");
    let (best_value, best_params) = polish(model, objective, bx, start)?;
    Ok(ErmResult { best_params, best_value, cells_examined: draws, method: ErmMethod::Random })
}

/// Any-dimension heuristic: one witness per overlay cell found by sampling, then polish.
pub fn erm_cell_sampled(model: &ProfitModel, objective: &Objective, bx: &ParamBox, probes: usize, seed: u64) -> Result<ErmResult> {
    check_dims(model, objective, bx)?;
    let arr = overlay(model, objective, bx)?;
    let cells = sample_cells(&arr, probes.max(1), seed);
    if cells.is_empty() {
        return erm_random(model, objective, bx, probes.max(1), seed);
    }
    let vals = cells.par_iter().map(|c| objective.value(model, &c.witness)).collect::<Result<Vec<f64>>>()?;
    let start = pick_best(vals.into_iter().zip(cells.iter().map(|c| c.witness.clone()))).expect("non-empty");
    let (best_value, best_params) = polish(model, objective, bx, start)?;
    Ok(ErmResult { best_params, best_value, cells_examined: cells.len(), method: ErmMethod::CellSampled })
}

/// Named strategy for callers that pick the search at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SupMethod {
    #[serde(rename = "exact_2d", alias = "exact")]
    Exact,
    Grid { resolution: f64 },
    Random { draws: usize },
    CellSampled { probes: usize },
}

impl SupMethod {
    /// Runs the strategy; `seed` is ignored by the deterministic ones.
    pub fn run(&self, model: &ProfitModel, objective: &Objective, bx: &ParamBox, seed: u64) -> Result<ErmResult> {
        match self {
            Self::Exact => erm_exact_lowdim(model, objective, bx),
            Self::Grid { resolution } => erm_grid(model, objective, bx, *resolution, GRID_LIMIT),
            Self::Random { draws } => erm_random(model, objective, bx, *draws, seed),
            Self::CellSampled { probes } => erm_cell_sampled(model, objective, bx, *probes, seed),
        }
    }
}

/// Re-evaluates `incumbents` and keeps the first that beats `result`.
pub fn with_incumbents(model: &ProfitModel, objective: &Objective, mut result: ErmResult, incumbents: &[Vec<f64>]) -> Result<ErmResult> {
    for p in incumbents {
        let v = objective.value(model, p)?;
        if v > result.best_value {
            result.best_value = v;
            result.best_params = p.clone();
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{Kind, MechanismClass};
    use crate::valuations::{CostFunction, Valuation};

    fn tariff_model() -> ProfitModel {
        ProfitModel::new(MechanismClass::new(Kind::TwoPartTariffMenu), CostFunction::Zero)
    }

    fn single(table: &[f64]) -> ValuationProfile {
        let k = table.len() as u32 - 1;
        ValuationProfile::new(&[k], vec![Valuation::general(&[k], table.to_vec()).unwrap()]).unwrap()
    }

    #[test]
    fn exact_extracts_full_surplus() {
        let s = SampleSet::from_profiles(vec![single(&[0.0, 6.0, 9.0, 11.0, 12.0])]);
        let obj = Objective::average(&s).unwrap();
        let bx = ParamBox::new(vec![0.0, 0.0], vec![13.0, 13.0]).unwrap();
        let r = erm_exact_lowdim(&tariff_model(), &obj, &bx).unwrap();
        assert!((r.best_value - 12.0).abs() < 1e-9, "{r:?}");
        assert!((obj.value(&tariff_model(), &r.best_params).unwrap() - r.best_value).abs() < 1e-12);
    }

    #[test]
    fn zero_valuations_give_zero() {
        let s = SampleSet::from_profiles(vec![single(&[0.0, 0.0, 0.0])]);
        let obj = Objective::average(&s).unwrap();
        let bx = ParamBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(erm_exact_lowdim(&tariff_model(), &obj, &bx).unwrap().best_value, 0.0);
    }

    #[test]
    fn grid_single_point_and_refinement() {
        let s = SampleSet::from_profiles(vec![single(&[0.0, 6.0, 9.0, 11.0, 12.0]), single(&[0.0, 1.0, 1.0, 1.0, 1.0])]);
        let obj = Objective::average(&s).unwrap();
        let m = tariff_model();
        let point = ParamBox::new(vec![3.0, 1.0], vec![3.0, 1.0]).unwrap();
        let r = erm_grid(&m, &obj, &point, 0.5, GRID_LIMIT).unwrap();
        assert_eq!(r.best_params, vec![3.0, 1.0]);
        let bx = ParamBox::new(vec![0.0, 0.0], vec![13.0, 13.0]).unwrap();
        let coarse = erm_grid(&m, &obj, &bx, 0.5, GRID_LIMIT).unwrap();
        let fine = erm_grid(&m, &obj, &bx, 0.25, GRID_LIMIT).unwrap();
        assert!(fine.best_value >= coarse.best_value - 1e-12);
        let exact = erm_exact_lowdim(&m, &obj, &bx).unwrap();
        assert!(exact.best_value >= fine.best_value - 1e-9);
        assert!(erm_grid(&m, &obj, &bx, 1e-4, 1000).is_err());
    }

    #[test]
    fn random_is_deterministic_and_dominated() {
        let s = SampleSet::from_profiles(vec![single(&[0.0, 6.0, 9.0, 11.0, 12.0]), single(&[0.0, 2.0, 3.5, 4.0, 4.0])]);
        let obj = Objective::average(&s).unwrap();
        let m = tariff_model();
        let bx = ParamBox::default_for(&m, &obj).unwrap();
        let a = erm_random(&m, &obj, &bx, 200, 9).unwrap();
        let b = erm_random(&m, &obj, &bx, 200, 9).unwrap();
        assert_eq!(a, b);
        let exact = erm_exact_lowdim(&m, &obj, &bx).unwrap();
        assert!(a.best_value <= exact.best_value + 1e-9);
    }

    #[test]
    fn merging_keeps_total_weight() {
        let p = single(&[0.0, 1.0]);
        let s = SampleSet::from_profiles(vec![p.clone(), p.clone(), single(&[0.0, 2.0])]);
        let obj = Objective::weighted(&s, vec![0.5, -0.25, 1.0]).unwrap();
        assert_eq!(obj.items.len(), 2);
        assert_eq!(obj.items[0].1, 0.25);
    }
}
