//! The rotation-modulated Ornstein-Uhlenbeck approximation of the
//! subthreshold dynamics, and the closed-form spectral densities of the
//! linearized system and of the approximation.
//!
//! The approximating process is
//! `X_t = (tau/sqrt(lambda)) Q R_{-omega t} S_{lambda t}` with `S` a
//! standardized planar OU process (`dS = -S dt + dB`) and `R_s` the
//! counterclockwise rotation; equivalently `dX = M X dt + tau Q dB`.

use crate::error::Result;
use crate::linear::LinearizedSystem;
use crate::mat2::Mat2;
use crate::sde::{self, Path, SimConfig};
use crate::seeds::replicate_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::fmt::Write as _;

/// Which construction of the approximating process to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum XaConstruction {
    /// Rotation of an exactly sampled OU process.
    Product,
    /// Euler-Maruyama on `dX = M X dt + tau Q dB`.
    Sde,
}

/// A sampled spectral density, angular frequency in rad/ms.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralDensity {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub kind: SpectrumKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Linearized,
    Xa,
    Empirical,
}

impl SpectrumKind {
    pub fn label(&self) -> &'static str {
        match self {
            SpectrumKind::Linearized => "linearized",
            SpectrumKind::Xa => "xa",
            SpectrumKind::Empirical => "empirical",
        }
    }
}

impl SpectralDensity {
    /// Index of the maximum power.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        best
    }

    pub fn peak_freq(&self) -> f64 {
        self.freqs[self.peak_index()]
    }

    /// CSV rows `freq,power,kind` with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.freqs.len() + 1));
        out.push_str("freq,power,kind\n");
        for (f, p) in self.freqs.iter().zip(&self.power) {
            let _ = writeln!(out, "{f},{p},{}", self.kind.label());
        }
        out
    }
}

/// Exact one-step transition of the standardized OU coordinate over `dt`:
/// the update is `s' = mean_factor * s + noise_sd * z` with
/// `mean_factor = e^{-dt}` and `noise_sd = sqrt((1 - e^{-2 dt})/2)`.
pub fn ou_transition_coeffs(dt: f64) -> (f64, f64) {
    let mean_factor = (-dt).exp();
    let noise_sd = (0.5 * (1.0 - (-2.0 * dt).exp())).sqrt();
    (mean_factor, noise_sd)
}

/// Advance a standardized planar OU state by `dt` with exact Gaussian
/// transitions (independent coordinates).
pub fn ou_step<R: Rng + ?Sized>(s: &mut [f64; 2], coeffs: (f64, f64), rng: &mut R) {
    let (a, b) = coeffs;
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    s[0] = a * s[0] + b * z1;
    s[1] = a * s[1] + b * z2;
}

/// Exactly sampled path of the standardized planar OU process
/// `dS = -S dt + dB` from `x0`, recorded every `cfg.record_stride` steps.
pub fn simulate_ou2d(x0: [f64; 2], cfg: &SimConfig) -> Result<Path> {
    cfg.validate()?;
    let mut rng = replicate_rng(cfg.seed, 0);
    let n = (cfg.t_max / cfg.dt).round() as usize;
    let coeffs = ou_transition_coeffs(cfg.dt);
    let mut s = x0;
    let mut states = Vec::with_capacity(n / cfg.record_stride + 2);
    states.push(s);
    for k in 1..=n {
        ou_step(&mut s, coeffs, &mut rng);
        if k % cfg.record_stride == 0 {
            states.push(s);
        }
    }
    Ok(Path { dt: cfg.dt * cfg.record_stride as f64, t0: 0.0, states, boundary_events: 0 })
}

/// Simulate the approximating process from the origin.
///
/// `Product` samples the OU factor exactly on the `lambda`-rescaled clock and
/// applies the rotation and `Q`; `Sde` integrates `dX = M X dt + tau Q dB`
/// by Euler-Maruyama. Equal-time laws of the two constructions agree.
pub fn xa_path(sys: &LinearizedSystem, cfg: &SimConfig, construction: XaConstruction) -> Result<Path> {
    cfg.validate()?;
    match construction {
        XaConstruction::Sde => {
            let tau = sys.tau2.sqrt();
            let g = sys.q.scale(tau);
            sde::simulate_linear2d(&sys.m, &g, [0.0, 0.0], cfg)
        }
        XaConstruction::Product => {
            let mut rng = replicate_rng(cfg.seed, 0);
            let n = (cfg.t_max / cfg.dt).round() as usize;
            let coeffs = ou_transition_coeffs(sys.lambda * cfg.dt);
            let amp = sys.tau2.sqrt() / sys.lambda.sqrt();
            let mut s = [0.0, 0.0];
            let mut states = Vec::with_capacity(n / cfg.record_stride + 2);
            states.push([0.0, 0.0]);
            for k in 1..=n {
                ou_step(&mut s, coeffs, &mut rng);
                if k % cfg.record_stride == 0 {
                    let t = cfg.dt * k as f64;
                    let rot = Mat2::rotation(-sys.omega * t);
                    let x = sys.q.mul(&rot).mul_vec(s);
                    states.push([amp * x[0], amp * x[1]]);
                }
            }
            Ok(Path { dt: cfg.dt * cfg.record_stride as f64, t0: 0.0, states, boundary_events: 0 })
        }
    }
}

/// Spectral density of the first (voltage) coordinate of the linearized
/// system at angular frequency `f`:
/// `sigma^2 m12^2 / (2 pi ((f^2 - det M)^2 + (f tr M)^2))`.
pub fn spectrum_linearized(sys: &LinearizedSystem, f: f64) -> f64 {
    let det = sys.m.det();
    let tr = sys.m.trace();
    let num = sys.sigma * sys.sigma * sys.m.b * sys.m.b;
    let den = (f * f - det).powi(2) + (f * tr).powi(2);
    num / (2.0 * std::f64::consts::PI * den)
}

/// Spectral density of the first coordinate of the approximating process:
/// the linearized density times `(f^2 + det M) / (2 omega^2)`.
pub fn spectrum_xa(sys: &LinearizedSystem, f: f64) -> f64 {
    let det = sys.m.det();
    spectrum_linearized(sys, f) * (f * f + det) / (2.0 * sys.omega * sys.omega)
}

/// Evaluate a closed-form spectrum on `freqs`.
pub fn spectrum_on_grid(sys: &LinearizedSystem, freqs: &[f64], kind: SpectrumKind) -> SpectralDensity {
    let power = freqs
        .iter()
        .map(|&f| match kind {
            SpectrumKind::Linearized => spectrum_linearized(sys, f),
            SpectrumKind::Xa => spectrum_xa(sys, f),
            SpectrumKind::Empirical => panic!("empirical spectra come from data"),
        })
        .collect();
    SpectralDensity { freqs: freqs.to_vec(), power, kind }
}
