//! Exact decisions about the convex order between finitely supported
//! probability measures on Q^d.
//!
//! * [`measure`]: discrete measures, projections and the triangle construction.
//! * [`order1d`]: convex order on the line, majorization, three-point inequality.
//! * [`lp`]: exact phase-1 simplex with Farkas certificates.
//! * [`ordernd`]: martingale-coupling decision and max-affine witnesses in R^d.
//! * [`projcert`]: certification of projection-wise order over all planar directions.
//! * [`spread`]: mean-preserving spreads and random exact instances.

pub mod error;
pub mod lp;
pub mod measure;
pub mod order1d;
pub mod ordernd;
pub mod projcert;
pub mod rational;
pub mod spread;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, PointQ};
pub use rational::Rational;
