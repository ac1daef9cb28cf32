//! Exact combinatorics of distance value sets and their ordered metric
//! Fraïssé classes.
//!
//! The crate is generic over a [`Scalar`] type. The concrete aliases below
//! fix it to [`ExactReal`] (rationals and quadratic surds), which is what
//! the command-line front end uses.

pub mod amalgam;
pub mod coding;
pub mod dvs;
pub mod equiv;
pub mod error;
pub mod exact;
pub mod limitbuilder;
pub mod ramsey;
pub mod scalar;
pub mod space;
pub mod wire;

pub use error::{Error, Result};
pub use exact::ExactReal;
pub use scalar::{Field, Scalar};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub type DistanceSet = dvs::DistanceSet<ExactReal>;
pub type Space = space::MetricSpace<ExactReal>;
pub type DvsCode = coding::DvsCode<ExactReal>;

pub type RationalDistanceSet = dvs::DistanceSet<BigRational>;
pub type RationalSpace = space::MetricSpace<BigRational>;

pub type FloatSpace = space::MetricSpace<f64>;
