//! Pricing-function designs and their calibration.
//!
//! Each designer searches for the smallest ratio α at which its recursion
//! still reaches `U` at the top of the highest level, then samples the
//! resulting levels on the requested grid.

mod calibrate;
mod dynamic;
mod forward;
mod neutral;
pub mod reservation;
mod static_risk;

pub use dynamic::{delta_dynamic_levels, design_delta_dynamic, design_fully_dynamic, fully_dynamic_levels};
pub use forward::{solve_forward_delay_integral, LevelRecursion};
pub use neutral::{design_risk_neutral, neutral_levels};
pub use static_risk::{
    check_static_lb_constraints, delay_exponential, design_static_risk, solve_static_alpha, static_levels,
    StaticLbReport,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{MarketParams, PricingProfile};
use crate::scalar::Scalar;

pub const DEFAULT_GRID_SIZE: usize = 10_000;

/// How units are split across price levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ReservationPolicy {
    #[default]
    EvenSplit,
    /// `q_1 = ⌈k/α⌉`, remaining units split near-evenly.
    CeilFirst,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequest<T> {
    pub params: MarketParams<T>,
    pub reservation_policy: ReservationPolicy,
    pub grid_size: usize,
    /// Bracket width on α at which calibration stops.
    pub alpha_tolerance: T,
}

impl<T: Scalar> DesignRequest<T> {
    pub fn new(params: MarketParams<T>) -> Self {
        Self {
            params,
            reservation_policy: ReservationPolicy::EvenSplit,
            grid_size: DEFAULT_GRID_SIZE,
            alpha_tolerance: T::lit(1e-12).max(T::lit(16.0) * T::epsilon()),
        }
    }

    pub fn with_grid_size(mut self, m: usize) -> Self {
        self.grid_size = m;
        self
    }

    pub fn with_reservation(mut self, policy: ReservationPolicy) -> Self {
        self.reservation_policy = policy;
        self
    }

    pub fn with_alpha_tolerance(mut self, tol: T) -> Self {
        self.alpha_tolerance = tol;
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if let Some(v) = self.params.check() {
            return Err(Error::InvalidParams(v.to_string()));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidArgument("grid size must be at least 2".into()));
        }
        if !(self.alpha_tolerance > T::zero()) {
            return Err(Error::InvalidArgument("alpha tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// The four design families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    Neutral,
    Static,
    FullyDynamic,
    DeltaDynamic,
}

impl DesignMode {
    pub const ALL: [DesignMode; 4] = [Self::Neutral, Self::Static, Self::FullyDynamic, Self::DeltaDynamic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Neutral => "neutral",
            Self::Static => "static",
            Self::FullyDynamic => "fully-dynamic",
            Self::DeltaDynamic => "delta-dynamic",
        }
    }
}

impl fmt::Display for DesignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown design mode {s:?}")))
    }
}

/// Caps every level at `U` and assembles the profile.
///
/// Calibration stops within a relative `1e-8` of the boundary and the closed
/// forms round either way, so the last samples may sit a hair above `U`; a
/// price above `U` would turn away buyers valued exactly `U`.
pub(crate) fn finish<T: Scalar>(
    params: MarketParams<T>,
    alpha: T,
    reservation: Vec<usize>,
    levels: Vec<crate::grid::GridFn<T>>,
) -> Result<PricingProfile<T>> {
    let u = params.upper;
    let levels = levels
        .into_iter()
        .map(|f| {
            if f.last() <= u {
                Ok(f)
            } else {
                crate::grid::GridFn::from_samples(f.into_samples().into_iter().map(|v| v.min(u)).collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PricingProfile::new(params, alpha, reservation, levels)
}

pub fn design<T: Scalar>(mode: DesignMode, req: &DesignRequest<T>) -> Result<PricingProfile<T>> {
    match mode {
        DesignMode::Neutral => design_risk_neutral(req),
        DesignMode::Static => design_static_risk(req),
        DesignMode::FullyDynamic => design_fully_dynamic(req),
        DesignMode::DeltaDynamic => design_delta_dynamic(req),
    }
}
