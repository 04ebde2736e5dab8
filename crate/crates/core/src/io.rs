//! JSON problem files: profiles, sample sets, distributions, and cost functions.
//!
//! ```json
//! {
//!   "caps": [4],
//!   "cost": {"kind": "additive", "values": [1.0]},
//!   "buyers": [{"kind": "general", "table": [0, 6, 9, 11, 12]}]
//! }
//! ```
//!
//! Exactly one of `buyers` (one profile), `profiles` (a sample set), `atoms` (a finite
//! distribution with `prob` as a number or decimal string) or `marginals` (an
//! item-independent distribution) must be present. `caps` defaults to one unit per item.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::valuations::{Atom, Bundle, CostFunction, DistributionSpec, SampleSet, Valuation, ValuationProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Number(f64),
    Decimal(String),
}

impl Prob {
    fn value(&self, field: &str) -> Result<f64> {
        match self {
            Prob::Number(x) => Ok(*x),
            Prob::Decimal(s) => s.trim().parse().map_err(|_| Error::Domain(format!("{field}: '{s}' is not a decimal number"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub bundle: Bundle,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Table {
    Dense(Vec<f64>),
    Sparse(Vec<TableEntry>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuyerFile {
    Additive { values: Vec<f64> },
    UnitDemand { values: Vec<f64> },
    General { table: Table },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFile {
    Zero,
    Additive { values: Vec<f64> },
    General { table: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub profile: Vec<BuyerFile>,
    pub prob: Prob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeFile {
    /// This item's value for each buyer.
    pub values: Vec<f64>,
    pub prob: Prob,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buyers: Option<Vec<BuyerFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<Vec<BuyerFile>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<Vec<OutcomeFile>>>,
}

fn buyer_m(b: &BuyerFile) -> Option<usize> {
    match b {
        BuyerFile::Additive { values } | BuyerFile::UnitDemand { values } => Some(values.len()),
        BuyerFile::General { .. } => None,
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        let present = [p.buyers.is_some(), p.profiles.is_some(), p.atoms.is_some(), p.marginals.is_some()].iter().filter(|x| **x).count();
        if present != 1 {
            return domain("problem: exactly one of 'buyers', 'profiles', 'atoms', 'marginals' is required");
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Json(j) => Error::Domain(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    /// Item capacities: `caps`, else one unit of each of `m` items, with `m` inferred from
    /// additive or unit-demand buyers when absent.
    pub fn caps(&self) -> Result<Vec<u32>> {
        if let Some(c) = &self.caps {
            if let Some(m) = self.m {
                if m != c.len() {
                    return domain(format!("caps: {} entries but m = {m}", c.len()));
                }
            }
            return Ok(c.clone());
        }
        let inferred = self
            .m
            .or_else(|| self.marginals.as_ref().map(|m| m.len()))
            .or_else(|| self.first_buyers().and_then(|b| b.iter().find_map(buyer_m)));
        match inferred {
            Some(m) => Ok(vec![1; m]),
            None => domain("caps: cannot infer the item count; give 'caps' or 'm'"),
        }
    }

    fn first_buyers(&self) -> Option<&[BuyerFile]> {
        self.buyers
            .as_deref()
            .or_else(|| self.profiles.as_ref().and_then(|p| p.first().map(|v| v.as_slice())))
            .or_else(|| self.atoms.as_ref().and_then(|a| a.first().map(|a| a.profile.as_slice())))
    }

    pub fn cost(&self) -> Result<CostFunction> {
        let caps = self.caps()?;
        let c = match &self.cost {
            None | Some(CostFile::Zero) => CostFunction::Zero,
            Some(CostFile::Additive { values }) => CostFunction::additive(values.clone()).map_err(|e| prefix("cost", e))?,
            Some(CostFile::General { table }) => CostFunction::general(&caps, table.clone()).map_err(|e| prefix("cost", e))?,
        };
        c.check_caps(&caps).map_err(|e| prefix("cost", e))?;
        Ok(c)
    }

    fn check_n(&self, got: usize, field: &str) -> Result<()> {
        match self.n {
            Some(n) if n != got => domain(format!("{field}: {got} buyers but n = {n}")),
            _ => Ok(()),
        }
    }

    fn build(&self, buyers: &[BuyerFile], field: &str) -> Result<ValuationProfile> {
        let caps = self.caps()?;
        self.check_n(buyers.len(), field)?;
        let vals = buyers
            .iter()
            .enumerate()
            .map(|(j, b)| buyer(b, &caps).map_err(|e| prefix(&format!("{field}[{j}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        ValuationProfile::new(&caps, vals).map_err(|e| prefix(field, e))
    }

    /// The single profile of a `buyers` file.
    pub fn profile(&self) -> Result<ValuationProfile> {
        match &self.buyers {
            Some(b) => self.build(b, "buyers"),
            None => domain("buyers: this file does not describe a single profile"),
        }
    }

    pub fn samples(&self) -> Result<SampleSet> {
        match (&self.profiles, &self.buyers) {
            (Some(ps), _) => {
                let profiles =
                    ps.iter().enumerate().map(|(k, b)| self.build(b, &format!("profiles[{k}]"))).collect::<Result<Vec<_>>>()?;
                if profiles.is_empty() {
                    return domain("profiles: empty sample set");
                }
                Ok(SampleSet::from_profiles(profiles))
            }
            (None, Some(_)) => Ok(SampleSet::from_profiles(vec![self.profile()?])),
            _ => domain("profiles: this file does not describe a sample set"),
        }
    }

    /// Distribution of an `atoms` or `marginals` file; a `profiles` file is read as the
    /// uniform distribution over its profiles.
    pub fn distribution(&self) -> Result<DistributionSpec> {
        if let Some(atoms) = &self.atoms {
            let atoms = atoms
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let field = format!("atoms[{k}]");
                    Ok(Atom { profile: self.build(&a.profile, &format!("{field}.profile"))?, prob: a.prob.value(&format!("{field}.prob"))? })
                })
                .collect::<Result<Vec<_>>>()?;
            if atoms.is_empty() {
                return domain("atoms: empty support");
            }
            return DistributionSpec::from_atoms(atoms);
        }
        if let Some(marg) = &self.marginals {
            if let Some(c) = &self.caps {
                if c.iter().any(|&k| k != 1) {
                    return domain("caps: item-independent distributions have unit supply");
                }
            }
            let marginals = marg
                .iter()
                .enumerate()
                .map(|(i, outcomes)| {
                    outcomes
                        .iter()
                        .enumerate()
                        .map(|(k, o)| Ok((o.values.clone(), o.prob.value(&format!("marginals[{i}][{k}].prob"))?)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(o) = marginals.first().and_then(|m| m.first()) {
                self.check_n(o.0.len(), "marginals[0][0].values")?;
            }
            return DistributionSpec::item_independent(marginals);
        }
        if self.profiles.is_some() {
            return DistributionSpec::uniform(self.samples()?.profiles);
        }
        domain("atoms: this file does not describe a distribution")
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Domain(format!("{field}: {msg}")),
        other => other,
    }
}

fn buyer(b: &BuyerFile, caps: &[u32]) -> Result<Valuation> {
    match b {
        BuyerFile::Additive { values } => Valuation::additive(values.clone()),
        BuyerFile::UnitDemand { values } => Valuation::unit_demand(values.clone()),
        BuyerFile::General { table: Table::Dense(t) } => Valuation::general(caps, t.clone()),
        BuyerFile::General { table: Table::Sparse(entries) } => {
            let e: Vec<(Bundle, f64)> = entries.iter().map(|x| (x.bundle.clone(), x.value)).collect();
            Valuation::general_from_entries(caps, &e)
        }
    }
}

/// File form of a valuation.
pub fn buyer_file(v: &Valuation) -> BuyerFile {
    match v {
        Valuation::Additive(values) => BuyerFile::Additive { values: values.clone() },
        Valuation::UnitDemand(values) => BuyerFile::UnitDemand { values: values.clone() },
        Valuation::General { table, .. } => BuyerFile::General { table: Table::Dense(table.clone()) },
    }
}

/// A `profiles` file holding `samples`.
pub fn samples_file(samples: &SampleSet, cost: Option<CostFile>) -> ProblemFile {
    let caps = samples.profiles.first().map(|p| p.caps().to_vec());
    ProblemFile {
        caps,
        cost,
        profiles: Some(samples.profiles.iter().map(|p| p.buyers().iter().map(buyer_file).collect()).collect()),
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_profile() {
        let p = ProblemFile::parse(r#"{"caps":[4],"buyers":[{"kind":"general","table":[0,6,9,11,12]}]}"#).unwrap();
        let prof = p.profile().unwrap();
        assert_eq!(prof.buyer(0).units_value(3), 11.0);
        assert_eq!(p.cost().unwrap(), CostFunction::Zero);
    }

    #[test]
    fn parses_atoms_with_decimal_probabilities() {
        let text = r#"{"atoms":[
            {"profile":[{"kind":"additive","values":[1,2]}],"prob":"0.25"},
            {"profile":[{"kind":"additive","values":[3,0]}],"prob":0.75}]}"#;
        let d = ProblemFile::parse(text).unwrap().distribution().unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert_eq!(d.caps(), &[1, 1]);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = r#"{"atoms":[{"profile":[{"kind":"additive","values":[1]}],"prob":"x"}]}"#;
        let e = ProblemFile::parse(bad).unwrap().distribution().unwrap_err().to_string();
        assert!(e.contains("atoms[0].prob"), "{e}");
        let neg = r#"{"buyers":[{"kind":"additive","values":[-1]}]}"#;
        let e = ProblemFile::parse(neg).unwrap().profile().unwrap_err().to_string();
        assert!(e.contains("buyers[0]"), "{e}");
        assert!(ProblemFile::parse(r#"{"caps":[1]}"#).is_err());
    }

    #[test]
    fn samples_round_trip() {
        let p = ProblemFile::parse(r#"{"profiles":[[{"kind":"unit_demand","values":[1,2]}],[{"kind":"unit_demand","values":[0,5]}]]}"#).unwrap();
        let s = p.samples().unwrap();
        let back = samples_file(&s, None);
        let again = ProblemFile::parse(&serde_json::to_string(&back).unwrap()).unwrap().samples().unwrap();
        assert_eq!(s.profiles, again.profiles);
    }
}
