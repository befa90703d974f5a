//! Correlated posted-price mechanisms (cPPM) for online k-selection.
//!
//! A seller with `k` identical units faces buyers arriving one at a time with
//! valuations in `[L, U]`. The mechanism draws a single seed `R ~ U(0,1)` and
//! posts prices `φ_j(R)` from a ladder of `Δ + 1` nondecreasing pricing
//! functions, moving to the next level whenever the units reserved for the
//! current level are sold out. The price therefore changes at most `Δ` times.
//!
//! The crate is organised as:
//!
//! * [`model`]: problem constants, instances, pricing profiles, outcomes and
//!   the profile file format.
//! * [`grid`]: piecewise-linear functions sampled on a uniform grid over
//!   `[0, 1]`, with quadrature and generalized inverses.
//! * [`pricing`]: the pricing-function designs (risk-neutral, static
//!   risk-sensitive, fully dynamic and Δ-dynamic) and their calibration.
//! * [`mechanism`]: the seeded mechanism executor, the fractional water-filling
//!   allocator and three baseline mechanisms.
//! * [`evaluation`]: offline optimum, welfare distributions over the seed,
//!   CVaR, competitive-ratio reports, hard instances, lemma verifiers and
//!   figure sweeps.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the CLI and the
//! acceptance suite use.

pub mod error;
pub mod evaluation;
pub mod grid;
pub mod mechanism;
pub mod model;
pub mod pricing;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the generic types.
pub type MarketParams = model::MarketParams<f64>;
pub type Instance = model::Instance<f64>;
pub type PricingProfile = model::PricingProfile<f64>;
pub type SeedOutcome = model::SeedOutcome<f64>;
pub type WelfareDistribution = model::WelfareDistribution<f64>;
pub type GridFn = grid::GridFn<f64>;
pub type DesignRequest = pricing::DesignRequest<f64>;
pub type FractionalTrace = mechanism::FractionalTrace<f64>;
pub type RatioReport = evaluation::RatioReport<f64>;
pub type Baselines = mechanism::Baselines<f64>;

/// `f32` instantiations, for memory-bound sweeps where single precision is enough.
pub type MarketParams32 = model::MarketParams<f32>;
pub type PricingProfile32 = model::PricingProfile<f32>;
pub type Instance32 = model::Instance<f32>;
