//! Special functions and quadrature rules used by the analytic evaluators.
//!
//! Everything here is pure and deterministic. Functions that can fail on
//! their domain return [`SpecfunError`] instead of a NaN.

mod erf;
mod gamma;
mod hyp2f1;
mod quadrature;

pub use erf::{erf, erfc, erfcx};
pub use gamma::{alzer_eta, gamma, gamma_cdf_alzer_approx, gamma_p, ln_gamma, ln_gamma_signed};
pub use hyp2f1::{gauss_2f1, hyp2f1, Hyp2f1, Hyp2f1Method, MAX_SERIES_TERMS};
pub use quadrature::{chebyshev_gauss, gauss_legendre, QuadratureRule};
pub(crate) use quadrature::{integrate, integrate_to_infinity, integrate_two_scale, Integral};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("series did not converge after {terms} terms (partial sum {partial})")]
    NonConvergence { partial: f64, terms: usize },
}
