//! Stochastic Morris-Lecar neuron dynamics and the radial Ornstein-Uhlenbeck
//! leaky integrate-and-fire model derived from them.
//!
//! The crate is organized around the pipeline
//!
//! 1. [`ml`] — closed-form right-hand sides of the two-variable Morris-Lecar
//!    system with channel noise on the conductance variable, and its
//!    equilibrium point;
//! 2. [`sde`] — Euler-Maruyama time stepping, spike detection, interspike
//!    intervals, quiescent-segment extraction;
//! 3. [`linear`] — the linearization around the stable focus: drift matrix,
//!    eigenstructure, conjugation to a rotation-plus-decay normal form, and
//!    the rescaled coordinates used by the firing analysis;
//! 4. [`ou`] — the rotation-modulated Ornstein-Uhlenbeck approximation of the
//!    subthreshold dynamics and its closed-form spectral densities;
//! 5. [`radial`] — the radial OU process, hazard-based firing mechanisms,
//!    interspike-interval density and survival estimators, and the hard
//!    threshold with its hypergeometric mean first-passage time;
//! 6. [`stats`] — periodogram averaging, the conditional firing-probability
//!    protocol, sigmoid regression, Nelson-Aalen estimation and hazard
//!    calibration, and sample comparison metrics.
//!
//! All simulators draw from counter-based ChaCha streams so that a `(seed,
//! replicate)` pair fully determines the output, independently of thread
//! count or iteration order.

pub mod error;
pub mod linear;
pub mod mat2;
pub mod ml;
pub mod ou;
pub mod params;
pub mod quad;
pub mod radial;
pub mod sde;
pub mod seeds;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use linear::LinearizedSystem;
pub use ml::State2;
pub use params::MLParameters;
pub use sde::{ISISample, Path, SimConfig};
