//! Modeling and stability analysis for multistage stochastic programs whose
//! states are driven by both exogenous and decision-dependent (endogenous)
//! randomness.
//!
//! The crate covers the full loop: describe an instance ([`model`]),
//! discretize its laws into scenario trees ([`stochastic`]), solve it by
//! nested stage minimization ([`solver`]), measure how far two inputs are
//! apart ([`metrics`]), turn regularity data into Lipschitz constants
//! ([`lipschitz`]) and finally into stability bounds ([`bounds`]).
//!
//! ```
//! use mspmdp::examples::{build_example, ExampleId};
//! use mspmdp::model::derive_regularity;
//!
//! let (inst, _) = build_example(&ExampleId::Linear42a { kappa: 11.0 }, false).unwrap();
//! let reg = derive_regularity(&inst).unwrap();
//! assert_eq!(reg.rho, Some(40.0));
//! ```

pub mod bounds;
pub mod error;
pub mod examples;
pub mod io;
pub mod linalg;
pub mod lipschitz;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod reproduce;
pub mod solver;
pub mod stochastic;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/modeling.md")]
    pub mod modeling {}
    #[doc = include_str!("../../../book/src/trees.md")]
    pub mod trees {}
    #[doc = include_str!("../../../book/src/solving.md")]
    pub mod solving {}
    #[doc = include_str!("../../../book/src/distances.md")]
    pub mod distances {}
    #[doc = include_str!("../../../book/src/constants.md")]
    pub mod constants {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub mod bounds {}
    #[doc = include_str!("../../../book/src/examples.md")]
    pub mod examples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
