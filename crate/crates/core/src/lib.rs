//! Multi-expert financial sentiment stacking and sentiment/market linkage
//! econometrics.
//!
//! The classification side turns per-expert posteriors and headline text into
//! a fixed feature layout ([`signals`], [`flags`]) and trains a meta-classifier
//! over it ([`meta`]). The linkage side builds a daily sentiment index
//! ([`index`]) and tests it against price series ([`econ`]).

pub mod econ;
pub mod error;
pub mod flags;
pub mod index;
pub mod kvconfig;
pub mod meta;
pub mod records;
pub mod signals;
pub mod synth;

pub use error::{Error, Result};
pub use flags::{Flag, FlagSet, RuleSet};
pub use records::{ExpertRecord, PriceSeries, ProbTriple, SentimentLabel};
