//! Copula-based fractional inaccuracy measures.
//!
//! The crate evaluates cumulative, survival, co-copula and dual-copula
//! fractional inaccuracy measures between two joint models, their entropy
//! specializations, the Fréchet–Hoeffding envelope bounds, and numerical
//! checks of the stochastic-ordering results that relate them.

pub mod bounds;
pub mod copula;
pub mod error;
pub mod integrate;
pub mod margins;
pub mod measures;
pub mod model;
pub mod orderings;
pub mod special;

pub use bounds::{ccfi_frechet_bounds, FrechetBounds};
pub use copula::{Copula, CopulaSpec, Family, Transform};
pub use error::{Error, Result};
pub use integrate::{IntegralResult, IntegrationConfig, Method};
pub use margins::{Margin, PowerMode};
pub use measures::{Job, MeasureJob, MeasureKind, UnivariateJob};
pub use model::JointModel;
pub use orderings::{check_lower_orthant, check_upper_orthant, OrderReport, Proposition, Record};
pub use special::FractionalOrder;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/copulas.md")]
    mod copulas {}
    #[doc = include_str!("../../../book/src/margins.md")]
    mod margins {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/orderings.md")]
    mod orderings {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
