//! Fourier coefficients of modular functions on SL2(Z) by the circle method.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactq`] exact integer q-series (eta powers, `j`, partition numbers),
//!   used as the oracle for everything computed analytically.
//! * [`fordfarey`] exact Farey/Ford-circle geometry of the integration path.
//! * [`specfun`] the entire function `L_nu(t) = sum t^n / (n! Gamma(n + nu + 1))`
//!   with certified truncation and rounding error, plus zeta/gamma values.
//! * [`multiplier`] modular data (`ModularSpec`), Dedekind sums, the eta
//!   multiplier and the Kloosterman-type sums `A_c(lambda, mu)`.
//! * [`circle`] the coefficient engine: convergent series for negative weight,
//!   truncated series with explicit error terms for non-negative weight, and
//!   effective non-vanishing thresholds.
//! * [`lacuna`] coefficient density profiles and lacunarity verdicts.
//!
//! Parallel reductions go through [`Parallelism`]; with the `parallel`
//! feature disabled every reduction runs sequentially. Results are
//! bit-identical either way because partial results are merged in a fixed
//! order.

pub mod circle;
pub mod error;
pub mod exactq;
pub mod fordfarey;
pub mod lacuna;
pub mod multiplier;
pub mod numeric;
pub mod par;
pub mod specfun;

pub use circle::{
    coefficient_negative_weight, coefficient_nonneg_weight, constant_m1, constant_m2,
    dominance_data, effective_lambda0, main_term, CircleOptions, DominanceData, ErrorBudget,
    Lambda0Certificate,
};
pub use error::{Error, Result};
pub use exactq::{eta_quotient, j_expansion, partition_oracle, series_mul, QSeries};
pub use fordfarey::{chord_bounds, farey_sequence, ford_arc_data, FareyFraction, FordArcData};
pub use lacuna::{arithmetic_progression_scan, density_profile, DensityReport, Verdict};
pub use multiplier::{
    alpha_x, dedekind_sum, epsilon_gamma, kloosterman_a, ModularSpec, Sl2z, UnitComplex,
};
pub use numeric::{BigComplex, Bound};
pub use par::Parallelism;
pub use specfun::{eval_l, eval_l_tilde, LEvalResult};

/// Arbitrary-size exact rational used for exponents and Farey geometry.
pub type ExactRational = rug::Rational;
