//! Numerical laboratory for locally constant SU(2) extensions of the full shift.
//!
//! The skew map `(x, w) -> (sigma x, tau(x_0)^{-1} w)` on `Sigma+ x SU(2)` is
//! studied through three lenses:
//!
//! * [`hecke`]: block norms of the averaging operator `T_S` on each
//!   Peter-Weyl component, i.e. the spectral gap estimate;
//! * [`mixing`]: the twisted transfer operator and exact / Monte Carlo
//!   correlation functions with fitted decay rates;
//! * [`clt`]: Birkhoff sums, Green-Kubo variances and Kolmogorov-Smirnov checks.

pub mod clt;
pub mod error;
pub mod hecke;
pub mod mixing;
pub mod rng;
pub mod shift;
pub mod su2;
pub mod wigner;

pub use error::{Error, Result};
pub use su2::{preset, GeneratorSet, GroupElement};
pub use mixing::{CorrelationSeries, DecayFit, SkewSystem};
pub use shift::{LocallyConstantObservable, ShiftConfig, Word};
pub use wigner::{BandLimitedFunction, IrrepLabel, RepTable, WignerBlock};
