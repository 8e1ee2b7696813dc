//! Closed-form right-hand sides of the stochastic Morris-Lecar system and the
//! numerical equilibrium.
//!
//! Voltage dynamics
//! `C dV = (-gCa m_inf(V)(V - VCa) - gK W (V - VK) - gL (V - VL) + I) dt`;
//! conductance dynamics `dW = (alpha(V)(1 - W) - beta(V) W) dt + h(V, W) dB`
//! with the bounded channel-noise coefficient
//! `h = sigma_star sqrt(2 alpha beta / (alpha + beta) W (1 - W))`, which keeps
//! W inside (0, 1) like the underlying Jacobi diffusion.

use crate::error::{Error, Result};
use crate::params::MLParameters;
use serde::{Deserialize, Serialize};

/// A point of the (voltage, conductance) phase plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State2 {
    /// Membrane potential, mV.
    pub v: f64,
    /// Normalized K+ conductance, dimensionless in (0, 1).
    pub w: f64,
}

impl State2 {
    pub const fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.v, self.w]
    }
}

impl From<[f64; 2]> for State2 {
    fn from(a: [f64; 2]) -> Self {
        Self { v: a[0], w: a[1] }
    }
}

/// Equilibrium fraction of open Ca channels at voltage `v`:
/// `(1 + tanh((v - V1)/V2)) / 2`.
pub fn m_inf(v: f64, p: &MLParameters) -> f64 {
    0.5 * (1.0 + ((v - p.v1) / p.v2).tanh())
}

/// K+ channel opening rate, 1/ms.
pub fn alpha_rate(v: f64, p: &MLParameters) -> f64 {
    0.5 * p.phi * ((v - p.v3) / (2.0 * p.v4)).cosh() * (1.0 + ((v - p.v3) / p.v4).tanh())
}

/// K+ channel closing rate, 1/ms.
pub fn beta_rate(v: f64, p: &MLParameters) -> f64 {
    0.5 * p.phi * ((v - p.v3) / (2.0 * p.v4)).cosh() * (1.0 - ((v - p.v3) / p.v4).tanh())
}

/// Deterministic drift `(dv/dt, dw/dt)`.
pub fn drift(s: State2, p: &MLParameters) -> (f64, f64) {
    let dv = (-p.g_ca * m_inf(s.v, p) * (s.v - p.v_ca)
        - p.g_k * s.w * (s.v - p.v_k)
        - p.g_l * (s.v - p.v_l)
        + p.i_app)
        / p.c;
    let a = alpha_rate(s.v, p);
    let b = beta_rate(s.v, p);
    let dw = a * (1.0 - s.w) - b * s.w;
    (dv, dw)
}

/// Noise coefficient on the conductance equation,
/// `sigma_star sqrt(2 alpha beta / (alpha + beta) w (1 - w))`.
///
/// Zero at both boundaries w = 0 and w = 1; `w` outside [0, 1] is clamped to
/// the boundary (where the coefficient vanishes anyway).
pub fn diffusion_w(s: State2, p: &MLParameters) -> f64 {
    let w = s.w.clamp(0.0, 1.0);
    let a = alpha_rate(s.v, p);
    let b = beta_rate(s.v, p);
    p.sigma_star * (2.0 * a * b / (a + b) * w * (1.0 - w)).sqrt()
}

/// Conductance nullcline value at voltage `v`:
/// `alpha/(alpha+beta) = (1 + tanh((v - V3)/V4)) / 2`.
pub fn w_nullcline(v: f64, p: &MLParameters) -> f64 {
    0.5 * (1.0 + ((v - p.v3) / p.v4).tanh())
}

/// Noise amplitude implied by `n_channels` K+ channels,
/// `1 / sqrt(W_eq (1 - W_eq) N)` at the equilibrium of `p`.
pub fn sigma_star_of_n(p: &MLParameters, n_channels: f64) -> Result<f64> {
    let eq = equilibrium(p)?;
    Ok(1.0 / (eq.w * (1.0 - eq.w) * n_channels).sqrt())
}

/// Scalar residual whose root in `v` is the equilibrium voltage, with `w`
/// slaved to its nullcline.
fn residual(v: f64, p: &MLParameters) -> f64 {
    drift(State2::new(v, w_nullcline(v, p)), p).0
}

/// Locate the equilibrium of the deterministic system.
///
/// Scans v over [VK, VCa] at 1 mV resolution for sign changes of the residual
/// and polishes each bracket by bisection/secant to |dv/dt| < 1e-10 mV/ms.
/// If several roots exist, the unique one whose Jacobian (from central finite
/// differences of the drift) is a stable focus or node is returned.
pub fn equilibrium(p: &MLParameters) -> Result<State2> {
    let (lo, hi) = (p.v_k.min(p.v_ca), p.v_k.max(p.v_ca));
    // 1 mV scan resolution
    equilibrium_with_scan(p, ((hi - lo).ceil() as usize).max(1))
}

/// Same as [`equilibrium`] but with an explicit number of scan subdivisions;
/// the result must not depend on it as long as every root stays bracketed.
pub fn equilibrium_with_scan(p: &MLParameters, steps: usize) -> Result<State2> {
    let (lo, hi) = (p.v_k.min(p.v_ca), p.v_k.max(p.v_ca));
    let mut roots = Vec::new();
    let steps = steps.max(1);
    let mut prev_v = lo;
    let mut prev_f = residual(prev_v, p);
    for k in 1..=steps {
        let v = lo + (hi - lo) * k as f64 / steps as f64;
        let f = residual(v, p);
        if prev_f == 0.0 {
            roots.push(prev_v);
        } else if prev_f * f < 0.0 {
            roots.push(refine_root(prev_v, v, prev_f, f, p));
        }
        prev_v = v;
        prev_f = f;
    }
    if prev_f == 0.0 {
        roots.push(prev_v);
    }
    if roots.is_empty() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    let stable: Vec<f64> = roots.iter().copied().filter(|&v| is_stable(v, p)).collect();
    match stable.len() {
        1 => {
            let v = stable[0];
            Ok(State2::new(v, w_nullcline(v, p)))
        }
        0 => Err(Error::AmbiguousEquilibrium(format!(
            "{} root(s) on the bracket, none stable",
            roots.len()
        ))),
        n => Err(Error::AmbiguousEquilibrium(format!("{n} stable roots on the bracket"))),
    }
}

/// Bisection with a secant-accelerated midpoint, to |residual| < 1e-10.
fn refine_root(mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, p: &MLParameters) -> f64 {
    for _ in 0..200 {
        // secant proposal, fall back to midpoint when outside the bracket
        let mut m = b - fb * (b - a) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let fm = residual(m, p);
        if fm.abs() < 1e-10 || (b - a) < 1e-13 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Stability of the fixed point at `(v, w_nullcline(v))` from the
/// finite-difference Jacobian: trace < 0 and determinant > 0.
fn is_stable(v: f64, p: &MLParameters) -> bool {
    let j = fd_jacobian(State2::new(v, w_nullcline(v, p)), p);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    tr < 0.0 && det > 0.0
}

/// Central finite-difference Jacobian of the drift field.
pub fn fd_jacobian(s: State2, p: &MLParameters) -> [[f64; 2]; 2] {
    let hv = 1e-6 * s.v.abs().max(1.0);
    let hw = 1e-6;
    let (fv_p, gv_p) = drift(State2::new(s.v + hv, s.w), p);
    let (fv_m, gv_m) = drift(State2::new(s.v - hv, s.w), p);
    let (fw_p, gw_p) = drift(State2::new(s.v, s.w + hw), p);
    let (fw_m, gw_m) = drift(State2::new(s.v, s.w - hw), p);
    [
        [(fv_p - fv_m) / (2.0 * hv), (fw_p - fw_m) / (2.0 * hw)],
        [(gv_p - gv_m) / (2.0 * hv), (gw_p - gw_m) / (2.0 * hw)],
    ]
}
