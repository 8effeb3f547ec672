//! Traveling fronts of a diffusive SIS epidemic model with saturating incidence.
//!
//! The model couples a susceptible density `S` and an infected density `I`
//! on the line,
//!
//! ```text
//! S_t = d1 S_xx - beta S I / (1 + sigma S) + gamma I
//! I_t = d2 I_xx + beta S I / (1 + sigma S) - gamma I
//! ```
//!
//! and this crate studies fronts joining the endemic state to the
//! disease-free state under three diffusion regimes: comparable small
//! diffusivities, slowly diffusing infected, and fast-diffusing infected.
//!
//! * [`model`] validates parameters and gives the equilibria.
//! * [`phasespace`] and [`reductions`] define the traveling-wave vector
//!   fields and their slow/fast reductions.
//! * [`integrate`] is an adaptive ODE integrator with events.
//! * [`connect`] shoots heteroclinic connections and returns front profiles.
//! * [`geometry`] checks the trapping triangles and the wedge rotation.
//! * [`pdesim`] simulates the reaction-diffusion system directly.
//!
//! ```
//! use sisfront::model::{ModelParams, Regime};
//!
//! let p = ModelParams::new(2.0, 1.0, 0.0, 1.0, 0.01, Regime::Case2SlowInfected)?;
//! assert_eq!(p.s_endemic(), 0.5);
//! # Ok::<(), sisfront::Error>(())
//! ```

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connect;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod output;
pub mod pdesim;
pub mod phasespace;
pub mod reductions;

pub use error::{Error, Result};
pub use model::{ModelParams, RawParams, Regime};
