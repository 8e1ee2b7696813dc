//! Statistical procedures: spectral estimation from quiescent segments, the
//! conditional firing-probability protocol, sigmoid regression, Nelson-Aalen
//! estimation with hazard calibration, and sample comparison metrics.

mod compare;
mod cycles;
mod firing;
mod fit;
mod spectrum;
mod survival;

pub use compare::{compare_isi_samples, compare_isi_to_density, percentile, two_sample_ks, IsiComparison};
pub use cycles::{stable_cycle_distance, unstable_cycle_distance};
pub use firing::{
    estimate_firing_probability, firing_probability_protocol, FiringGridPoint, FiringProbabilityFit,
};
pub use fit::fit_sigmoid;
pub use spectrum::{average_periodograms, estimate_spectrum, periodogram};
pub use survival::{fit_exponential_hazard, nelson_aalen, CumulativeHazardCurve, ExpHazardFit};
