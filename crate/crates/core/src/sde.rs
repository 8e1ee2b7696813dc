//! Euler-Maruyama time stepping of the stochastic Morris-Lecar system and of
//! generic planar linear SDEs, plus spike detection, interspike-interval
//! collection, and quiescent-segment extraction.

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::ml::{self, State2};
use crate::params::MLParameters;
use crate::seeds::replicate_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// What to do when a step takes the conductance outside (0, 1).
///
/// The exact diffusion never leaves the interval; reflection restores that
/// with O(dt) bias, clamping is kept for comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    Reflect,
    Clamp,
}

/// Time-stepping configuration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Step size, ms.
    pub dt: f64,
    /// Simulated horizon, ms.
    pub t_max: f64,
    pub seed: u64,
    pub boundary_policy: BoundaryPolicy,
    /// Record every `record_stride`-th step (step 0 always recorded).
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 1000.0,
            seed: 0,
            boundary_policy: BoundaryPolicy::Reflect,
            record_stride: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {} must be > 0", self.dt)));
        }
        if self.t_max < self.dt {
            return Err(Error::InvalidConfig(format!(
                "t_max = {} must be >= dt = {}",
                self.t_max, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be >= 1".into()));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// A uniformly spaced recorded trajectory of a planar process.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    /// Spacing of recorded samples, ms (= integrator dt times record stride).
    pub dt: f64,
    /// Time of the first sample, ms.
    pub t0: f64,
    pub states: Vec<[f64; 2]>,
    /// Number of boundary-policy applications during generation.
    pub boundary_events: u64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    /// CSV rows `t,v,w` with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.len() + 1));
        out.push_str("t,v,w\n");
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.time(i), s[0], s[1]);
        }
        out
    }
}

/// A batch of firing times with provenance.
#[derive(Clone, Debug, Serialize)]
pub struct ISISample {
    /// Firing time per replicate, ms; equals the horizon for censored runs.
    pub times: Vec<f64>,
    pub censored: Vec<bool>,
    pub model_tag: String,
    pub seed: u64,
}

impl ISISample {
    pub fn uncensored(&self) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.censored)
            .filter(|(_, &c)| !c)
            .map(|(&t, _)| t)
            .collect()
    }

    pub fn mean_uncensored(&self) -> Option<f64> {
        let u = self.uncensored();
        if u.is_empty() {
            None
        } else {
            Some(u.iter().sum::<f64>() / u.len() as f64)
        }
    }

    /// CSV rows `replicate,firing_time_ms,censored` with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.times.len() + 1));
        out.push_str("replicate,firing_time_ms,censored\n");
        for (i, (t, c)) in self.times.iter().zip(&self.censored).enumerate() {
            let _ = writeln!(out, "{i},{t},{c}");
        }
        out
    }
}

fn apply_boundary(w: &mut f64, policy: BoundaryPolicy, events: &mut u64) {
    const EPS: f64 = 1e-9;
    if *w >= EPS && *w <= 1.0 - EPS {
        return;
    }
    *events += 1;
    match policy {
        BoundaryPolicy::Reflect => {
            if *w < EPS {
                *w = 2.0 * EPS - *w;
            }
            if *w > 1.0 - EPS {
                *w = 2.0 * (1.0 - EPS) - *w;
            }
            // a pathological overshoot after reflection is clamped
            *w = w.clamp(EPS, 1.0 - EPS);
        }
        BoundaryPolicy::Clamp => *w = w.clamp(EPS, 1.0 - EPS),
    }
}

/// One Euler-Maruyama step of the Morris-Lecar system; noise acts on w only.
#[inline]
pub(crate) fn ml_step<R: Rng + ?Sized>(
    s: &mut State2,
    p: &MLParameters,
    dt: f64,
    sqrt_dt: f64,
    policy: BoundaryPolicy,
    events: &mut u64,
    rng: &mut R,
) {
    let (dv, dw) = ml::drift(*s, p);
    let h = ml::diffusion_w(*s, p);
    let z: f64 = rng.sample(StandardNormal);
    s.v += dv * dt;
    s.w += dw * dt + h * sqrt_dt * z;
    apply_boundary(&mut s.w, policy, events);
}

/// Euler-Maruyama path of the stochastic Morris-Lecar system.
///
/// Same `(p, x0, cfg)` always produces the bit-identical path.
pub fn simulate_ml(p: &MLParameters, x0: State2, cfg: &SimConfig) -> Result<Path> {
    cfg.validate()?;
    if !(x0.w > 0.0 && x0.w < 1.0) {
        return Err(Error::InvalidConfig(format!("x0.w = {} must lie in (0,1)", x0.w)));
    }
    let mut rng = replicate_rng(cfg.seed, 0);
    let n = cfg.n_steps();
    let mut states = Vec::with_capacity(n / cfg.record_stride + 2);
    let mut s = x0;
    let mut events = 0;
    states.push(s.to_array());
    let sqrt_dt = cfg.dt.sqrt();
    for k in 1..=n {
        ml_step(&mut s, p, cfg.dt, sqrt_dt, cfg.boundary_policy, &mut events, &mut rng);
        if k % cfg.record_stride == 0 {
            states.push(s.to_array());
        }
    }
    Ok(Path {
        dt: cfg.dt * cfg.record_stride as f64,
        t0: 0.0,
        states,
        boundary_events: events,
    })
}

/// Euler-Maruyama path of the linear SDE `dX = M X dt + G dB` (two
/// independent Brownian components).
pub fn simulate_linear2d(m: &Mat2, g: &Mat2, x0: [f64; 2], cfg: &SimConfig) -> Result<Path> {
    cfg.validate()?;
    let mut rng = replicate_rng(cfg.seed, 0);
    let n = cfg.n_steps();
    let mut states = Vec::with_capacity(n / cfg.record_stride + 2);
    let mut x = x0;
    states.push(x);
    let sqrt_dt = cfg.dt.sqrt();
    for k in 1..=n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let drift = m.mul_vec(x);
        let noise = g.mul_vec([z1, z2]);
        x[0] += drift[0] * cfg.dt + noise[0] * sqrt_dt;
        x[1] += drift[1] * cfg.dt + noise[1] * sqrt_dt;
        if k % cfg.record_stride == 0 {
            states.push(x);
        }
    }
    Ok(Path {
        dt: cfg.dt * cfg.record_stride as f64,
        t0: 0.0,
        states,
        boundary_events: 0,
    })
}

/// First upward crossing of `v_threshold` by the recorded voltage, linearly
/// interpolated inside the step; `None` if the path never crosses.
pub fn detect_spike(path: &Path, v_threshold: f64) -> Option<f64> {
    for i in 1..path.len() {
        let prev = path.states[i - 1][0];
        let cur = path.states[i][0];
        if prev < v_threshold && cur >= v_threshold {
            let frac = (v_threshold - prev) / (cur - prev);
            return Some(path.time(i - 1) + frac * path.dt);
        }
    }
    None
}

/// Run one Morris-Lecar trajectory until the voltage crosses `threshold`
/// upward, without recording; returns the interpolated crossing time.
pub fn run_until_spike<R: Rng + ?Sized>(
    p: &MLParameters,
    x0: State2,
    dt: f64,
    t_max: f64,
    threshold: f64,
    policy: BoundaryPolicy,
    rng: &mut R,
) -> Option<f64> {
    let sqrt_dt = dt.sqrt();
    let mut s = x0;
    let mut events = 0;
    let n = (t_max / dt).round() as usize;
    for k in 1..=n {
        let prev_v = s.v;
        ml_step(&mut s, p, dt, sqrt_dt, policy, &mut events, rng);
        if prev_v < threshold && s.v >= threshold {
            let frac = (threshold - prev_v) / (s.v - prev_v);
            return Some(dt * ((k - 1) as f64 + frac));
        }
    }
    None
}

/// `n` independent firing times of the Morris-Lecar model, each from a fresh
/// trajectory started at the equilibrium point (the post-spike reset state).
///
/// Replicate `i` draws from stream `i` of `cfg.seed`, so the sample is
/// independent of worker count and iteration order. Runs that never fire
/// within `cfg.t_max` are censored at the horizon.
pub fn simulate_isi_ml(p: &MLParameters, n: usize, cfg: &SimConfig) -> Result<ISISample> {
    cfg.validate()?;
    let eq = ml::equilibrium(p)?;
    let results: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(cfg.seed, i as u64);
            run_until_spike(p, eq, cfg.dt, cfg.t_max, 0.0, cfg.boundary_policy, &mut rng)
        })
        .collect();
    let mut times = Vec::with_capacity(n);
    let mut censored = Vec::with_capacity(n);
    for r in results {
        match r {
            Some(t) => {
                times.push(t);
                censored.push(false);
            }
            None => {
                times.push(cfg.t_max);
                censored.push(true);
            }
        }
    }
    Ok(ISISample { times, censored, model_tag: "ml".into(), seed: cfg.seed })
}

/// Maximal sub-paths that stay below `v = threshold` for at least `min_len`
/// ms, re-centered by subtracting the equilibrium.
///
/// After a crossing, the next segment starts at the first return of the
/// voltage to within 1 mV of the equilibrium voltage; the leading segment
/// starts at the first sample.
pub fn extract_quiescent_segments(
    path: &Path,
    eq: State2,
    min_len: f64,
    threshold: f64,
) -> Vec<Path> {
    let mut segments = Vec::new();
    let min_samples = (min_len / path.dt).ceil() as usize + 1;
    let mut start: Option<usize> = Some(0);
    for i in 0..path.len() {
        let v = path.states[i][0];
        match start {
            Some(s0) => {
                if v >= threshold {
                    if i - s0 >= min_samples {
                        segments.push(recenter(path, s0, i, eq));
                    }
                    start = None;
                }
            }
            None => {
                if (v - eq.v).abs() < 1.0 {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s0) = start {
        if path.len() - s0 >= min_samples {
            segments.push(recenter(path, s0, path.len(), eq));
        }
    }
    segments
}

fn recenter(path: &Path, from: usize, to: usize, eq: State2) -> Path {
    Path {
        dt: path.dt,
        t0: path.time(from),
        states: path.states[from..to]
            .iter()
            .map(|s| [s[0] - eq.v, s[1] - eq.w])
            .collect(),
        boundary_events: 0,
    }
}
