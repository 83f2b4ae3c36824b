//! Performance engine for RIS-aided multi-cell NOMA downlinks.
//!
//! Two back-ends evaluate the same metrics: [`analytics`] gives closed forms and
//! low-dimensional integrals, [`simulator`] draws network realizations. The
//! [`harness`] sweeps parameters through both and cross-validates them.

pub mod analytics;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod params;
pub mod simulator;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{SystemParams, Thresholds};
