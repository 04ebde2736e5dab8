//! Sample-based mechanism design toolkit.
//!
//! Exact profit semantics for pricing mechanisms, lotteries, and affine-maximizer auctions;
//! the hyperplane arrangements on which their profit is piecewise linear in the parameters;
//! exact and heuristic empirical profit maximization; and pseudo-dimension / Rademacher
//! generalization bounds with structural model selection over nested classes.

pub mod complexity;
pub mod erm;
pub mod error;
pub mod io;
pub mod mechanisms;
pub mod partition;
pub mod rng;
pub mod spm;
pub mod valuations;

pub use error::{Error, Result};
pub use mechanisms::{Anonymity, Kind, MechanismClass, MechanismSpec, Outcome, ProfitModel, Structure};
pub use valuations::{Bundle, CostFunction, DistributionSpec, SampleSet, Valuation, ValuationProfile};
