//! Simulation toolkit for two tunnel-coupled, coherently driven, lossy Kerr cavities.
//!
//! One [`model::SystemParams`] feeds four independent treatments:
//!
//! * [`semiclassical`]: mean-field flow, fixed-point enumeration, stability and phase diagrams;
//! * [`master`]: Lindblad steady states in a truncated two-mode Fock basis ([`fockspace`]);
//! * [`trajectory`]: Monte-Carlo wavefunction unraveling and jump statistics;
//! * [`analytic`]: complex-P series for on-site correlators at weak tunneling.

pub mod error;
pub mod model;
pub mod fockspace;
pub mod master;
pub mod semiclassical;
pub mod analytic;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{DerivedConstants, SystemParams};
