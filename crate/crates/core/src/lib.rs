pub mod audit;
pub mod bell;
pub mod constraints;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod lp;
pub mod quantum;
pub mod scalar;

pub use bell::{AnyBox, DeterministicStrategy, ProbabilityBox, Scenario};
pub use constraints::{check, ConstraintRegime};
pub use error::{Error, Result};
pub use inequalities::{evaluate, BellFunctional};
pub use scalar::{Rational, Scalar};

pub type RationalBox = ProbabilityBox<Rational>;
pub type FloatBox = ProbabilityBox<f64>;
pub type Float32Box = ProbabilityBox<f32>;
