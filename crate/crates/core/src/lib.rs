//! Percolation analysis for two interdependent random geometric graphs.
//!
//! Two RGGs share a square window; a node is supplied by every node of the
//! other graph within the interdependence distance, and a *mutual
//! component* is a pair of node sets, each connected within its own graph,
//! in which every node keeps at least one supply node on the paired side.
//! Percolation of the pair is the emergence of a giant mutual component,
//! and its threshold is a curve of density pairs rather than a single
//! scalar.
//!
//! The crate provides:
//!
//! - sampling and spatial indexing for Poisson point processes
//!   ([`spatial`]), geometric predicates ([`geom`]), and the RGG layer with
//!   occupied/vacant rectangle crossings ([`rgg`]);
//! - the interdependent model with the mutual-component algorithms
//!   ([`interdep`]);
//! - closed-form threshold bounds and a curve solver ([`bounds`]);
//! - simulated bond trials over 1-dependent lattice mappings with exact
//!   binomial confidence verdicts and grid search ([`mc`]);
//! - random-failure and disk-attack robustness experiments ([`attack`]).
//!
//! Everything numeric is generic over the [`Scalar`] type (`f32` or `f64`);
//! the `*64` aliases below pin the default double-precision instantiation.

// Validation deliberately writes `!(x > 0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod bounds;
pub mod error;
pub mod geom;
pub mod interdep;
pub mod mc;
mod numeric;
pub mod rgg;
pub mod scalar;
pub mod spatial;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Library version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Point64 = geom::Point<f64>;
pub type Segment64 = geom::Segment<f64>;
pub type Window64 = geom::Window<f64>;
pub type PointSet64 = spatial::PointSet<f64>;
pub type Rgg64 = rgg::Rgg<f64>;
pub type CrossingSpec64 = rgg::CrossingSpec<f64>;
pub type InterdepModel64 = interdep::InterdepModel<f64>;
pub type MutualComponent = interdep::MutualComponent;
pub type BoundQuery64 = bounds::BoundQuery<f64>;
pub type BoundGeometry64 = bounds::BoundGeometry<f64>;
pub type SupplyPmf64 = bounds::SupplyPmf<f64>;
pub type ThresholdBound64 = bounds::ThresholdBound<f64>;
pub type CurvePoint64 = bounds::CurvePoint<f64>;
pub type BondTrialConfig64 = mc::BondTrialConfig<f64>;
pub type SearchConfig64 = mc::SearchConfig<f64>;
pub type AttackSpec64 = attack::AttackSpec<f64>;
pub type FrontierPoint64 = attack::FrontierPoint<f64>;
