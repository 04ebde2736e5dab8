//! Buyer valuations, bundles, production cost, and finite-support distributions.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng;

/// Units of each item, `q[i] ∈ 0..=κ_i`.
pub type Bundle = Vec<u32>;

/// Mixed-radix indexing of the bundle lattice `∏ {0..κ_i}`; item 0 is the fastest digit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    caps: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
}

impl Lattice {
    pub fn new(caps: &[u32]) -> Result<Self> {
        if caps.is_empty() {
            return domain("caps: at least one item is required");
        }
        let mut strides = Vec::with_capacity(caps.len());
        let mut size: usize = 1;
        for (i, &k) in caps.iter().enumerate() {
            if k == 0 {
                return domain(format!("caps[{i}]: supply cap must be at least 1"));
            }
            strides.push(size);
            size = size
                .checked_mul(k as usize + 1)
                .filter(|&s| s <= 1 << 24)
                .ok_or_else(|| Error::Resource("bundle lattice larger than 2^24".into()))?;
        }
        Ok(Self { caps: caps.to_vec(), strides, size })
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn m(&self) -> usize {
        self.caps.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, q: &[u32]) -> bool {
        q.len() == self.caps.len() && q.iter().zip(&self.caps).all(|(a, b)| a <= b)
    }

    pub fn index(&self, q: &[u32]) -> usize {
        q.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum()
    }

    pub fn bundle(&self, mut index: usize) -> Bundle {
        self.caps
            .iter()
            .map(|&k| {
                let r = k as usize + 1;
                let digit = index % r;
                index /= r;
                digit as u32
            })
            .collect()
    }

    pub fn bundles(&self) -> impl Iterator<Item = Bundle> + '_ {
        (0..self.size).map(|i| self.bundle(i))
    }

    /// True when every cap is 1, so a bundle is an item set and its index is the bitmask.
    pub fn is_unit_supply(&self) -> bool {
        self.caps.iter().all(|&k| k == 1)
    }

    pub(crate) fn check(&self, q: &[u32], what: &str) -> Result<()> {
        if q.len() != self.caps.len() {
            return domain(format!("{what}: bundle has {} entries, expected {}", q.len(), self.caps.len()));
        }
        for (i, (&a, &k)) in q.iter().zip(&self.caps).enumerate() {
            if a > k {
                return domain(format!("{what}: quantity {a} of item {i} exceeds cap {k}"));
            }
        }
        Ok(())
    }
}

fn check_values(values: &[f64], what: &str) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 {
            return domain(format!("{what}[{i}]: value must be finite and non-negative, got {v}"));
        }
    }
    Ok(())
}

/// A single buyer's valuation over bundles.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    /// `v(q) = Σ q[i]·values[i]`.
    Additive(Vec<f64>),
    /// `v(q) = max { values[i] : q[i] ≥ 1 }`.
    UnitDemand(Vec<f64>),
    /// Dense table over the bundle lattice.
    General { lattice: Lattice, table: Vec<f64> },
}

impl Valuation {
    pub fn additive(values: Vec<f64>) -> Result<Self> {
        check_values(&values, "values")?;
        Ok(Self::Additive(values))
    }

    pub fn unit_demand(values: Vec<f64>) -> Result<Self> {
        check_values(&values, "values")?;
        Ok(Self::UnitDemand(values))
    }

    /// Builds a general valuation, rejecting tables with `v(0) ≠ 0`, negative entries,
    /// or a monotonicity violation.
    pub fn general(caps: &[u32], table: Vec<f64>) -> Result<Self> {
        let lattice = Lattice::new(caps)?;
        if table.len() != lattice.size() {
            return domain(format!(
                "table: expected {} entries for caps {caps:?}, got {}",
                lattice.size(),
                table.len()
            ));
        }
        check_values(&table, "table")?;
        if table[0] != 0.0 {
            return domain("table: value of the empty bundle must be 0");
        }
        for idx in 0..lattice.size() {
            let q = lattice.bundle(idx);
            for i in 0..q.len() {
                if q[i] > 0 {
                    let below = idx - lattice.strides[i];
                    if table[below] > table[idx] {
                        return domain(format!(
                            "table: not monotone, v({:?}) = {} exceeds v({q:?}) = {}",
                            lattice.bundle(below),
                            table[below],
                            table[idx]
                        ));
                    }
                }
            }
        }
        Ok(Self::General { lattice, table })
    }

    /// Builds a general valuation from sparse `(bundle, value)` entries; every bundle must be listed
    /// except the empty one.
    pub fn general_from_entries(caps: &[u32], entries: &[(Bundle, f64)]) -> Result<Self> {
        let lattice = Lattice::new(caps)?;
        let mut table = vec![f64::NAN; lattice.size()];
        table[0] = 0.0;
        for (q, v) in entries {
            lattice.check(q, "table")?;
            table[lattice.index(q)] = *v;
        }
        if let Some(idx) = table.iter().position(|v| v.is_nan()) {
            return domain(format!("table: missing entry for bundle {:?}", lattice.bundle(idx)));
        }
        Self::general(caps, table)
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Additive(v) | Self::UnitDemand(v) => v.len(),
            Self::General { lattice, .. } => lattice.m(),
        }
    }

    /// `v(q)`. The bundle must lie within the profile's caps.
    pub fn value(&self, q: &[u32]) -> f64 {
        match self {
            Self::Additive(v) => q.iter().zip(v).map(|(&a, &x)| a as f64 * x).sum(),
            Self::UnitDemand(v) => q
                .iter()
                .zip(v)
                .filter(|(&a, _)| a >= 1)
                .map(|(_, &x)| x)
                .fold(0.0, f64::max),
            Self::General { lattice, table } => table[lattice.index(q)],
        }
    }

    /// `v(q)` with the bundle checked against the caps.
    pub fn checked_value(&self, q: &[u32], caps: &[u32]) -> Result<f64> {
        Lattice::new(caps)?.check(q, "bundle")?;
        Ok(self.value(q))
    }

    /// Value of an item set given as a bitmask (unit supply).
    pub fn set_value(&self, mask: usize) -> f64 {
        match self {
            Self::Additive(v) => bits(mask, v.len()).map(|i| v[i]).sum(),
            Self::UnitDemand(v) => bits(mask, v.len()).map(|i| v[i]).fold(0.0, f64::max),
            Self::General { table, .. } => table[mask],
        }
    }

    /// `v(e_i)`.
    pub fn item_value(&self, i: usize) -> f64 {
        match self {
            Self::Additive(v) | Self::UnitDemand(v) => v[i],
            Self::General { lattice, table } => table[lattice.strides[i]],
        }
    }

    /// `v(t·e_0)` for single-item multi-unit settings.
    pub fn units_value(&self, t: u32) -> f64 {
        match self {
            Self::Additive(v) => t as f64 * v[0],
            Self::UnitDemand(v) => {
                if t >= 1 {
                    v[0]
                } else {
                    0.0
                }
            }
            Self::General { table, .. } => table[t as usize],
        }
    }

    pub fn max_value(&self, caps: &[u32]) -> f64 {
        match self {
            Self::Additive(v) => v.iter().zip(caps).map(|(x, &k)| x * k as f64).sum(),
            Self::UnitDemand(v) => v.iter().cloned().fold(0.0, f64::max),
            Self::General { table, .. } => table.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Additive(_) => "additive",
            Self::UnitDemand(_) => "unit_demand",
            Self::General { .. } => "general",
        }
    }
}

pub(crate) fn bits(mask: usize, m: usize) -> impl Iterator<Item = usize> {
    (0..m).filter(move |i| mask >> i & 1 == 1)
}

/// All buyers' valuations over a shared bundle lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationProfile {
    lattice: Lattice,
    buyers: Vec<Valuation>,
}

impl ValuationProfile {
    pub fn new(caps: &[u32], buyers: Vec<Valuation>) -> Result<Self> {
        let lattice = Lattice::new(caps)?;
        if buyers.is_empty() {
            return domain("buyers: at least one buyer is required");
        }
        for (j, b) in buyers.iter().enumerate() {
            if b.m() != lattice.m() {
                return domain(format!("buyers[{j}]: has {} items, expected {}", b.m(), lattice.m()));
            }
            if let Valuation::General { lattice: l, .. } = b {
                if l != &lattice {
                    return domain(format!("buyers[{j}]: table caps differ from the profile caps"));
                }
            }
        }
        Ok(Self { lattice, buyers })
    }

    /// Profile of additive buyers with unit supply; `values[j][i] = v_j(e_i)`.
    pub fn additive(values: &[Vec<f64>]) -> Result<Self> {
        let m = values.first().map_or(0, |v| v.len());
        let buyers = values.iter().cloned().map(Valuation::additive).collect::<Result<_>>()?;
        Self::new(&vec![1; m], buyers)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn caps(&self) -> &[u32] {
        self.lattice.caps()
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn m(&self) -> usize {
        self.lattice.m()
    }

    pub fn buyers(&self) -> &[Valuation] {
        &self.buyers
    }

    pub fn buyer(&self, j: usize) -> &Valuation {
        &self.buyers[j]
    }

    pub fn max_value(&self) -> f64 {
        self.buyers.iter().map(|b| b.max_value(self.caps())).fold(0.0, f64::max)
    }

    pub fn all_additive(&self) -> bool {
        self.buyers.iter().all(|b| matches!(b, Valuation::Additive(_)))
    }
}

/// Production cost of a single bundle; an allocation costs the sum over buyers.
#[derive(Clone, Debug, PartialEq)]
pub enum CostFunction {
    Zero,
    /// `c(q) = Σ q[i]·costs[i]`.
    Additive(Vec<f64>),
    General { lattice: Lattice, table: Vec<f64> },
}

impl CostFunction {
    pub fn additive(costs: Vec<f64>) -> Result<Self> {
        check_values(&costs, "cost")?;
        Ok(Self::Additive(costs))
    }

    pub fn general(caps: &[u32], table: Vec<f64>) -> Result<Self> {
        let lattice = Lattice::new(caps)?;
        if table.len() != lattice.size() {
            return domain(format!(
                "cost.table: expected {} entries for caps {caps:?}, got {}",
                lattice.size(),
                table.len()
            ));
        }
        check_values(&table, "cost.table")?;
        if table[0] != 0.0 {
            return domain("cost.table: cost of the empty bundle must be 0");
        }
        Ok(Self::General { lattice, table })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Additive(c) => c.iter().all(|&x| x == 0.0),
            Self::General { table, .. } => table.iter().all(|&x| x == 0.0),
        }
    }

    /// Zero or additive cost (linear in quantities).
    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::General { .. }) || self.is_zero()
    }

    /// Checks that the cost is defined on the given caps.
    pub fn check_caps(&self, caps: &[u32]) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Additive(c) if c.len() == caps.len() => Ok(()),
            Self::Additive(c) => domain(format!("cost: has {} items, profile has {}", c.len(), caps.len())),
            Self::General { lattice, .. } if lattice.caps() == caps => Ok(()),
            Self::General { .. } => domain("cost: table caps differ from the profile caps"),
        }
    }

    /// `c(q)`; the bundle must lie within the caps.
    pub fn bundle_cost(&self, q: &[u32]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Additive(c) => q.iter().zip(c).map(|(&a, &x)| a as f64 * x).sum(),
            Self::General { lattice, table } => table[lattice.index(q)],
        }
    }

    /// Cost of an item set given as a bitmask (unit supply).
    pub fn set_cost(&self, mask: usize) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Additive(c) => bits(mask, c.len()).map(|i| c[i]).sum(),
            Self::General { table, .. } => table[mask],
        }
    }

    /// `c(t·e_0)`.
    pub fn units_cost(&self, t: u32) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Additive(c) => t as f64 * c[0],
            Self::General { table, .. } => table[t as usize],
        }
    }

    /// `c(e_i)`.
    pub fn item_cost(&self, i: usize) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Additive(c) => c[i],
            Self::General { lattice, table } => table[lattice.strides[i]],
        }
    }

    /// `c(Q) = Σ_j c(q_j)`, rejecting bundles outside the caps.
    pub fn cost(&self, caps: &[u32], allocation: &[Bundle]) -> Result<f64> {
        let lattice = Lattice::new(caps)?;
        self.check_caps(caps)?;
        let mut total = 0.0;
        for (j, q) in allocation.iter().enumerate() {
            lattice.check(q, &format!("allocation[{j}]"))?;
            total += self.bundle_cost(q);
        }
        Ok(total)
    }
}

/// One support point of a distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub profile: ValuationProfile,
    pub prob: f64,
}

/// Per-item marginal: outcomes `(value of this item for each buyer, probability)`.
pub type ItemMarginal = Vec<(Vec<f64>, f64)>;

/// Finite-support distribution over valuation profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec {
    atoms: Vec<Atom>,
    cumulative: Vec<f64>,
    marginals: Option<Vec<ItemMarginal>>,
}

fn check_probs(probs: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, p) in probs.enumerate() {
        if !p.is_finite() || p < 0.0 {
            return domain(format!("{what}[{i}].prob: must be a non-negative number, got {p}"));
        }
        total += p;
        count += 1;
    }
    if count == 0 {
        return domain(format!("{what}: empty support"));
    }
    if (total - 1.0).abs() > 1e-12 {
        return domain(format!("{what}: probabilities sum to {total}, expected 1"));
    }
    Ok(())
}

impl DistributionSpec {
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        check_probs(atoms.iter().map(|a| a.prob), "atoms")?;
        let first = &atoms[0].profile;
        for (k, a) in atoms.iter().enumerate() {
            if a.profile.n() != first.n() || a.profile.caps() != first.caps() {
                return domain(format!("atoms[{k}].profile: shape differs from atoms[0]"));
            }
        }
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.prob;
                acc
            })
            .collect();
        Ok(Self { atoms, cumulative, marginals: None })
    }

    /// Uniform distribution over the given profiles (repeated profiles count repeatedly).
    pub fn uniform(profiles: Vec<ValuationProfile>) -> Result<Self> {
        if profiles.is_empty() {
            return domain("profiles: empty support");
        }
        let p = 1.0 / profiles.len() as f64;
        let atoms: Vec<Atom> = profiles.into_iter().map(|profile| Atom { profile, prob: p }).collect();
        let mut d = Self::from_atoms_unchecked_sum(atoms)?;
        d.normalize_tail();
        Ok(d)
    }

    fn from_atoms_unchecked_sum(atoms: Vec<Atom>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return domain(format!("atoms: probabilities sum to {total}, expected 1"));
        }
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.prob;
                acc
            })
            .collect();
        Ok(Self { atoms, cumulative, marginals: None })
    }

    fn normalize_tail(&mut self) {
        if let Some(last) = self.cumulative.last_mut() {
            *last = 1.0;
        }
    }

    /// Product distribution of additive, unit-supply buyers: item `i`'s value vector across
    /// buyers is drawn from `marginals[i]`, independently of the other items.
    pub fn item_independent(marginals: Vec<ItemMarginal>) -> Result<Self> {
        if marginals.is_empty() {
            return domain("marginals: at least one item is required");
        }
        let n = marginals[0].first().map_or(0, |o| o.0.len());
        if n == 0 {
            return domain("marginals[0]: empty outcome list");
        }
        for (i, marg) in marginals.iter().enumerate() {
            check_probs(marg.iter().map(|o| o.1), &format!("marginals[{i}]"))?;
            for (k, (vals, _)) in marg.iter().enumerate() {
                if vals.len() != n {
                    return domain(format!("marginals[{i}][{k}]: expected {n} buyer values"));
                }
                check_values(vals, &format!("marginals[{i}][{k}]"))?;
            }
        }
        let total: usize = marginals.iter().map(|m| m.len()).product();
        if total > 1 << 20 {
            return Err(Error::Resource(format!("product support has {total} atoms")));
        }
        let m = marginals.len();
        let mut atoms = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut prob = 1.0;
            let mut values = vec![vec![0.0; m]; n];
            for (i, marg) in marginals.iter().enumerate() {
                let (vals, p) = &marg[idx % marg.len()];
                idx /= marg.len();
                prob *= p;
                for j in 0..n {
                    values[j][i] = vals[j];
                }
            }
            atoms.push(Atom { profile: ValuationProfile::additive(&values)?, prob });
        }
        let mut d = Self::from_atoms_unchecked_sum(atoms)?;
        d.normalize_tail();
        d.marginals = Some(marginals);
        Ok(d)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn marginals(&self) -> Option<&[ItemMarginal]> {
        self.marginals.as_deref()
    }

    pub fn is_item_independent(&self) -> bool {
        self.marginals.is_some()
    }

    pub fn n(&self) -> usize {
        self.atoms[0].profile.n()
    }

    pub fn caps(&self) -> &[u32] {
        self.atoms[0].profile.caps()
    }

    pub fn max_value(&self) -> f64 {
        self.atoms.iter().map(|a| a.profile.max_value()).fold(0.0, f64::max)
    }

    /// Exact expectation of `f` over the support.
    pub fn expectation(&self, mut f: impl FnMut(&ValuationProfile) -> Result<f64>) -> Result<f64> {
        let mut total = 0.0;
        for a in &self.atoms {
            if a.prob > 0.0 {
                total += a.prob * f(&a.profile)?;
            }
        }
        Ok(total)
    }

    fn draw_index(&self, u: f64) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = u * total;
        let k = self.cumulative.partition_point(|&c| c <= x);
        // Skip trailing zero-probability atoms that share the final cumulative value.
        let mut k = k.min(self.atoms.len() - 1);
        while self.atoms[k].prob == 0.0 && k > 0 {
            k -= 1;
        }
        k
    }

    /// `N` i.i.d. draws, deterministic for a fixed seed.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return domain("N: must be at least 1");
        }
        let mut r = rng::rng(seed);
        let atom_indices: Vec<usize> = (0..count).map(|_| self.draw_index(r.random::<f64>())).collect();
        let profiles = atom_indices.iter().map(|&k| self.atoms[k].profile.clone()).collect();
        Ok(SampleSet { profiles, seed, atom_indices: Some(atom_indices) })
    }
}

/// `N` valuation profiles, usually drawn from a [`DistributionSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub profiles: Vec<ValuationProfile>,
    pub seed: u64,
    /// Support index of each draw, when drawn from a distribution.
    pub atom_indices: Option<Vec<usize>>,
}

impl SampleSet {
    pub fn from_profiles(profiles: Vec<ValuationProfile>) -> Self {
        Self { profiles, seed: 0, atom_indices: None }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Convenience wrapper over [`DistributionSpec::sample`].
pub fn sample_profiles(dist: &DistributionSpec, count: usize, seed: u64) -> Result<SampleSet> {
    dist.sample(count, seed)
}
