//! Allocation, payment, and profit semantics for every mechanism class.
//!
//! A [`MechanismClass`] fixes the kind, anonymity, and structural constants; a parameter
//! vector picks one mechanism from the class. [`ProfitModel`] adds the production cost and
//! tolerances and evaluates outcomes on valuation profiles.
//!
//! Buyer indifference is resolved toward the seller: among choices whose utility is within
//! `tau_tie` of the best, the one with the highest payment wins, then a per-kind secondary key.

mod auction;
mod item_pricing;
mod lottery;
mod max_profit;
mod nonlinear;
mod second_price;
mod tariff;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::valuations::{Bundle, CostFunction, DistributionSpec, ValuationProfile};

pub use auction::{allocation_bundles, allocation_count};
pub(crate) use auction::owners_index;
pub(crate) use second_price::ranking;
pub use lottery::{expected_lottery_cost, profit_lottery_relaxed};
pub use max_profit::{max_profit_mp, MpKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[serde(alias = "two_part_tariff")]
    TwoPartTariffMenu,
    ItemPricing,
    NonlinearPricing,
    NonlinearPricingDecomposable,
    #[serde(alias = "second_price")]
    SecondPriceReserves,
    LotteryMenu,
    ItemLotteryMenu,
    LambdaAuction,
    Ama,
    Vvca,
    Mbarp,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::TwoPartTariffMenu,
        Kind::ItemPricing,
        Kind::NonlinearPricing,
        Kind::NonlinearPricingDecomposable,
        Kind::SecondPriceReserves,
        Kind::LotteryMenu,
        Kind::ItemLotteryMenu,
        Kind::LambdaAuction,
        Kind::Ama,
        Kind::Vvca,
        Kind::Mbarp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::TwoPartTariffMenu => "two_part_tariff_menu",
            Kind::ItemPricing => "item_pricing",
            Kind::NonlinearPricing => "nonlinear_pricing",
            Kind::NonlinearPricingDecomposable => "nonlinear_pricing_decomposable",
            Kind::SecondPriceReserves => "second_price_reserves",
            Kind::LotteryMenu => "lottery_menu",
            Kind::ItemLotteryMenu => "item_lottery_menu",
            Kind::LambdaAuction => "lambda_auction",
            Kind::Ama => "ama",
            Kind::Vvca => "vvca",
            Kind::Mbarp => "mbarp",
        }
    }

    pub fn is_auction(self) -> bool {
        matches!(self, Kind::LambdaAuction | Kind::Ama | Kind::Vvca | Kind::Mbarp)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Domain(format!("class: unknown mechanism kind '{s}'")))
    }
}

/// How prices are shared across buyers. Buyer indices are 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anonymity {
    #[default]
    Anonymous,
    NonAnonymous,
    Grouped(Vec<Vec<usize>>),
}

impl Anonymity {
    pub fn group_count(&self, n: usize) -> usize {
        match self {
            Anonymity::Anonymous => 1,
            Anonymity::NonAnonymous => n,
            Anonymity::Grouped(g) => g.len(),
        }
    }

    /// Group index of every buyer.
    pub fn assignment(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Anonymity::Anonymous => Ok(vec![0; n]),
            Anonymity::NonAnonymous => Ok((0..n).collect()),
            Anonymity::Grouped(groups) => {
                let mut of = vec![usize::MAX; n];
                for (g, members) in groups.iter().enumerate() {
                    if members.is_empty() {
                        return domain(format!("anonymity.grouped[{g}]: empty group"));
                    }
                    for &j in members {
                        if j >= n {
                            return domain(format!("anonymity.grouped[{g}]: buyer {j} out of range (n = {n})"));
                        }
                        if of[j] != usize::MAX {
                            return domain(format!("anonymity.grouped: buyer {j} appears twice"));
                        }
                        of[j] = g;
                    }
                }
                if let Some(j) = of.iter().position(|&g| g == usize::MAX) {
                    return domain(format!("anonymity.grouped: buyer {j} is in no group"));
                }
                Ok(of)
            }
        }
    }
}

/// Kind-specific structural constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Structure {
    /// Menu length ℓ for tariff and lottery menus.
    pub menu_length: usize,
    /// Arrival order for item pricing; defaults to 0..n.
    pub buyer_order: Option<Vec<usize>>,
    /// Boosted allocations for λ-auctions and AMAs, as owner vectors
    /// (`owner[i] = 0` leaves item i unallocated, `j + 1` gives it to buyer j).
    /// `None` boosts every allocation.
    pub boosted: Option<Vec<Vec<usize>>>,
    /// When set, lottery menus report the relaxed profit′(v, z) at this z.
    pub relaxation_z: Option<Vec<f64>>,
}

impl Default for Structure {
    fn default() -> Self {
        Self { menu_length: 1, buyer_order: None, boosted: None, relaxation_z: None }
    }
}

/// A parameterized family of mechanisms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismClass {
    pub kind: Kind,
    #[serde(default)]
    pub anonymity: Anonymity,
    #[serde(default)]
    pub structure: Structure,
}

/// A class plus a parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    #[serde(flatten)]
    pub class: MechanismClass,
    pub params: Vec<f64>,
}

/// Role of a parameter coordinate; decides default search boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Price,
    Probability,
    Weight,
}

impl MechanismClass {
    pub fn new(kind: Kind) -> Self {
        Self { kind, anonymity: Anonymity::Anonymous, structure: Structure::default() }
    }

    pub fn with_anonymity(mut self, a: Anonymity) -> Self {
        self.anonymity = a;
        self
    }

    pub fn with_menu_length(mut self, l: usize) -> Self {
        self.structure.menu_length = l;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.structure.buyer_order = Some(order);
        self
    }

    pub fn with_boosted(mut self, boosted: Vec<Vec<usize>>) -> Self {
        self.structure.boosted = Some(boosted);
        self
    }

    pub fn with_relaxation(mut self, z: Vec<f64>) -> Self {
        self.structure.relaxation_z = Some(z);
        self
    }

    /// Checks that the class is well formed for `n` buyers over the given caps.
    pub fn validate(&self, n: usize, caps: &[u32]) -> Result<()> {
        let m = caps.len();
        let unit = caps.iter().all(|&k| k == 1);
        self.anonymity.assignment(n)?;
        let l = self.structure.menu_length;
        match self.kind {
            Kind::TwoPartTariffMenu => {
                if m != 1 {
                    return domain(format!("two_part_tariff_menu: requires a single item, got m = {m}"));
                }
                if l == 0 {
                    return domain("structure.menu_length: must be at least 1");
                }
            }
            Kind::LotteryMenu | Kind::ItemLotteryMenu => {
                if l == 0 {
                    return domain("structure.menu_length: must be at least 1");
                }
                if !unit {
                    return domain(format!("{}: requires unit supply (all caps 1)", self.kind));
                }
                if let Some(z) = &self.structure.relaxation_z {
                    if z.len() != m {
                        return domain(format!("structure.relaxation_z: expected {m} entries, got {}", z.len()));
                    }
                    if z.iter().any(|x| !(0.0..=1.0).contains(x)) {
                        return domain("structure.relaxation_z: entries must lie in [0, 1]");
                    }
                }
            }
            Kind::ItemPricing | Kind::SecondPriceReserves => {
                if !unit {
                    return domain(format!("{}: requires unit supply (all caps 1)", self.kind));
                }
                if m > 16 {
                    return Err(Error::Resource(format!("{}: m = {m} exceeds 16 items", self.kind)));
                }
            }
            Kind::NonlinearPricing | Kind::NonlinearPricingDecomposable => {}
            Kind::LambdaAuction | Kind::Ama | Kind::Vvca | Kind::Mbarp => {
                if !unit {
                    return domain(format!("{}: requires unit supply (all caps 1)", self.kind));
                }
                if n > 64 {
                    return Err(Error::Resource(format!("{}: at most 64 bidders", self.kind)));
                }
                if self.anonymity != Anonymity::Anonymous {
                    return domain(format!("{}: anonymity must be 'anonymous'", self.kind));
                }
                if let Some(b) = &self.structure.boosted {
                    if !matches!(self.kind, Kind::LambdaAuction | Kind::Ama) {
                        return domain("structure.boosted: only λ-auctions and AMAs take a boosted set");
                    }
                    for (k, owners) in b.iter().enumerate() {
                        if owners.len() != m || owners.iter().any(|&o| o > n) {
                            return domain(format!(
                                "structure.boosted[{k}]: expected {m} owners in 0..={n} (0 = unallocated)"
                            ));
                        }
                    }
                }
            }
        }
        if let Some(order) = &self.structure.buyer_order {
            let mut seen = vec![false; n];
            if order.len() != n {
                return domain(format!("structure.buyer_order: expected {n} buyers, got {}", order.len()));
            }
            for &j in order {
                if j >= n || seen[j] {
                    return domain(format!("structure.buyer_order: not a permutation of 0..{n}"));
                }
                seen[j] = true;
            }
        }
        Ok(())
    }

    /// Parameters per price group (pricing kinds) or in total (auction kinds).
    fn block_dim(&self, n: usize, caps: &[u32]) -> Result<usize> {
        let m = caps.len();
        let l = self.structure.menu_length;
        Ok(match self.kind {
            Kind::TwoPartTariffMenu => 2 * l,
            Kind::ItemPricing | Kind::SecondPriceReserves => m,
            Kind::NonlinearPricing => caps.iter().map(|&k| k as usize + 1).product(),
            Kind::NonlinearPricingDecomposable => caps.iter().map(|&k| k as usize + 1).sum(),
            Kind::LotteryMenu => l * (m + 1),
            Kind::ItemLotteryMenu => 2 * l * m,
            Kind::LambdaAuction => self.boost_count(n, m)?,
            Kind::Ama => n + self.boost_count(n, m)?,
            Kind::Vvca => n + n * (1usize << m),
            Kind::Mbarp => m + 1,
        })
    }

    fn boost_count(&self, n: usize, m: usize) -> Result<usize> {
        match &self.structure.boosted {
            Some(b) => Ok(b.len()),
            None => allocation_count(n, m, usize::MAX),
        }
    }

    /// Parameter dimension `d` for `n` buyers over `caps`.
    pub fn dim(&self, n: usize, caps: &[u32]) -> Result<usize> {
        let block = self.block_dim(n, caps)?;
        Ok(if self.kind.is_auction() { block } else { block * self.anonymity.group_count(n) })
    }

    /// Role of each parameter coordinate.
    pub fn coords(&self, n: usize, caps: &[u32]) -> Result<Vec<Coord>> {
        let d = self.dim(n, caps)?;
        let block = self.block_dim(n, caps)?;
        let m = caps.len();
        Ok((0..d)
            .map(|idx| {
                let r = idx % block;
                match self.kind {
                    Kind::LotteryMenu if r % (m + 1) < m => Coord::Probability,
                    Kind::ItemLotteryMenu if r % 2 == 0 => Coord::Probability,
                    Kind::Ama | Kind::Vvca if idx < n => Coord::Weight,
                    _ => Coord::Price,
                }
            })
            .collect())
    }

    /// Default search box `[0, 2·max value]^d`; probabilities in `[0, 1]`, weights in `[0.1, 2]`.
    pub fn default_box(&self, n: usize, caps: &[u32], max_value: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let hi_price = if max_value > 0.0 { 2.0 * max_value } else { 1.0 };
        let coords = self.coords(n, caps)?;
        let lo = coords.iter().map(|c| if *c == Coord::Weight { 0.1 } else { 0.0 }).collect();
        let hi = coords
            .iter()
            .map(|c| match c {
                Coord::Price => hi_price,
                Coord::Probability => 1.0,
                Coord::Weight => 2.0,
            })
            .collect();
        Ok((lo, hi))
    }

    /// Parameters of the zero-revenue mechanism: all prices and boosts 0, unit weights.
    pub fn null_params(&self, n: usize, caps: &[u32]) -> Result<Vec<f64>> {
        Ok(self
            .coords(n, caps)?
            .into_iter()
            .map(|c| if c == Coord::Weight { 1.0 } else { 0.0 })
            .collect())
    }

    pub fn order(&self, n: usize) -> Vec<usize> {
        self.structure.buyer_order.clone().unwrap_or_else(|| (0..n).collect())
    }
}

/// Numeric knobs shared by all evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub tau_tie: f64,
    /// Largest allowed number of allocations `(n+1)^m` for auction kinds.
    pub enum_limit: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { tau_tie: 1e-9, enum_limit: 4096 }
    }
}

/// Result of running one mechanism on one profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Vec<Bundle>,
    pub payments: Vec<f64>,
    pub cost: f64,
    pub profit: f64,
    /// Per-buyer option index (0 = no purchase) for menu and pricing kinds;
    /// the allocation index for auction kinds.
    pub choices: Vec<usize>,
    /// Allocation probabilities of the chosen lottery, per buyer (lottery kinds only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lottery: Option<Vec<Vec<f64>>>,
}

impl Outcome {
    fn empty(n: usize, m: usize) -> Self {
        Self {
            allocation: vec![vec![0; m]; n],
            payments: vec![0.0; n],
            cost: 0.0,
            profit: 0.0,
            choices: vec![0; n],
            lottery: None,
        }
    }

    /// Units received per buyer, summed over items.
    pub fn demand(&self) -> Vec<u32> {
        self.allocation.iter().map(|q| q.iter().sum()).collect()
    }
}

/// Seller-favorable comparison of two candidates already within `tau` of the best utility:
/// true when `(pay_a, key_a)` beats `(pay_b, key_b)`.
#[inline]
pub(crate) fn better(pay_a: f64, key_a: (i64, usize), pay_b: f64, key_b: (i64, usize), tau: f64) -> bool {
    if (pay_a - pay_b).abs() > tau {
        return pay_a > pay_b;
    }
    key_a < key_b
}

/// Mechanism class + production cost + tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfitModel {
    pub class: MechanismClass,
    pub cost: CostFunction,
    pub cfg: EvalConfig,
}

impl ProfitModel {
    pub fn new(class: MechanismClass, cost: CostFunction) -> Self {
        Self { class, cost, cfg: EvalConfig::default() }
    }

    pub fn kind(&self) -> Kind {
        self.class.kind
    }

    pub fn dim(&self, profile: &ValuationProfile) -> Result<usize> {
        self.class.dim(profile.n(), profile.caps())
    }

    fn check(&self, params: &[f64], profile: &ValuationProfile) -> Result<()> {
        self.class.validate(profile.n(), profile.caps())?;
        self.cost.check_caps(profile.caps())?;
        let d = self.dim(profile)?;
        if params.len() != d {
            return domain(format!("params: {} expects d = {d}, got {}", self.class.kind, params.len()));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return domain(format!("params[{i}]: not a finite number"));
        }
        Ok(())
    }

    fn run(&self, params: &[f64], profile: &ValuationProfile, out: Option<&mut Outcome>) -> Result<f64> {
        self.check(params, profile)?;
        match self.class.kind {
            Kind::TwoPartTariffMenu => tariff::run(self, params, profile, out),
            Kind::ItemPricing => item_pricing::run(self, params, profile, out),
            Kind::NonlinearPricing | Kind::NonlinearPricingDecomposable => nonlinear::run(self, params, profile, out),
            Kind::SecondPriceReserves => second_price::run(self, params, profile, out),
            Kind::LotteryMenu => lottery::run_menu(self, params, profile, out),
            Kind::ItemLotteryMenu => lottery::run_item_menu(self, params, profile, out),
            Kind::LambdaAuction | Kind::Ama | Kind::Vvca | Kind::Mbarp => auction::run(self, params, profile, out),
        }
    }

    /// Seller profit of the mechanism `params` on `profile`.
    pub fn profit(&self, params: &[f64], profile: &ValuationProfile) -> Result<f64> {
        self.run(params, profile, None)
    }

    /// Full outcome: allocation, payments, cost, profit.
    pub fn outcome(&self, params: &[f64], profile: &ValuationProfile) -> Result<Outcome> {
        let mut out = Outcome::empty(profile.n(), profile.m());
        let profit = self.run(params, profile, Some(&mut out))?;
        out.profit = profit;
        Ok(out)
    }

    /// Closed-form maximum achievable profit, when the class has one.
    pub fn mp_closed_form(&self, profile: &ValuationProfile) -> Option<f64> {
        max_profit::for_class(self, profile)
    }
}

/// Convenience constructor for a full mechanism evaluation.
pub fn profit(spec: &MechanismSpec, cost: &CostFunction, profile: &ValuationProfile) -> Result<Outcome> {
    ProfitModel::new(spec.class.clone(), cost.clone()).outcome(&spec.params, profile)
}

/// `Σ_atoms prob · profit`, computed exactly over the support.
pub fn expected_profit(dist: &DistributionSpec, model: &ProfitModel, params: &[f64]) -> Result<f64> {
    dist.expectation(|p| model.profit(params, p))
}
