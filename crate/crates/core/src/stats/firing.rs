//! Conditional firing probability on the section line below the equilibrium.
//!
//! For distances `l_i = i * delta`, `i = 1..=25`, with `delta` a twentieth of
//! the stable-cycle crossing distance, trajectories start at
//! `(V_eq, W_eq - l_i)` and run for one cycle around the fixed point — until
//! the winding angle in transformed coordinates reaches 2 pi, the voltage
//! crosses zero (a spike), or three rotation periods elapse, whichever comes
//! first. The spike frequency per grid point is then fit with the sigmoid
//! `p(l) = 1/(1 + exp((alpha - l)/beta))` and reported both raw and in
//! transformed units (`alpha* = alpha sqrt(2 lambda)/sigma`).

use crate::error::Result;
use crate::linear::{self, LinearizedSystem};
use crate::ml::State2;
use crate::params::MLParameters;
use crate::sde::BoundaryPolicy;
use crate::seeds::replicate_rng;
use crate::stats::cycles::stable_cycle_distance;
use crate::stats::fit::fit_sigmoid;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// One grid point of the firing-probability protocol.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FiringGridPoint {
    /// Distance below the equilibrium along the section line.
    pub l: f64,
    /// Spike frequency over the trials.
    pub p_hat: f64,
    pub fired: usize,
    pub n_trials: usize,
    /// 95% Wilson interval for the frequency.
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Protocol output: the estimated grid, the sigmoid fit, and its transformed
/// parameters.
#[derive(Clone, Debug, Serialize)]
pub struct FiringProbabilityFit {
    pub sigma_star: f64,
    pub grid: Vec<FiringGridPoint>,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// `alpha_hat * sqrt(2 lambda) / sigma`.
    pub alpha_star: f64,
    pub beta_star: f64,
    pub stable_cycle_l: f64,
    pub n_trials: usize,
    pub seed: u64,
}

fn wilson_interval(fired: usize, n: usize) -> (f64, f64) {
    let z = 1.959963984540054f64;
    let n_f = n as f64;
    let p = fired as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Run one trial: spike (true) or completed cycle / timeout (false).
fn one_trial<R: Rng + ?Sized>(
    p: &MLParameters,
    sys: &LinearizedSystem,
    l: f64,
    dt: f64,
    rng: &mut R,
) -> Result<bool> {
    let eq = sys.eq;
    let mut s = State2::new(eq.v, eq.w - l);
    let z0 = linear::to_transformed(sys, s)?;
    let mut theta = z0[1].atan2(z0[0]);
    let mut winding = 0.0f64;
    let t_cap = 3.0 * 2.0 * std::f64::consts::PI / sys.omega;
    let n_steps = (t_cap / dt).ceil() as usize;
    let sqrt_dt = dt.sqrt();
    let mut boundary_events = 0;
    for _ in 0..n_steps {
        let prev_v = s.v;
        crate::sde::ml_step(
            &mut s,
            p,
            dt,
            sqrt_dt,
            BoundaryPolicy::Reflect,
            &mut boundary_events,
            rng,
        );
        if prev_v < 0.0 && s.v >= 0.0 {
            return Ok(true);
        }
        let zt = linear::to_transformed(sys, s)?;
        let t_new = zt[1].atan2(zt[0]);
        let mut d = t_new - theta;
        if d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        } else if d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        winding += d;
        theta = t_new;
        if winding.abs() >= 2.0 * std::f64::consts::PI {
            return Ok(false);
        }
    }
    Ok(false)
}

/// Estimate the firing probability on the 25-point grid; trial `(i, k)` uses
/// stream `i * n_trials + k`, so the grid is reproducible under any worker
/// count.
pub fn estimate_firing_probability(
    p: &MLParameters,
    sigma_star: f64,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<FiringGridPoint>> {
    let p = p.with_sigma_star(sigma_star);
    let sys = linear::build_linearized(&p)?;
    let l_stable = stable_cycle_distance(&p)?;
    let delta = l_stable / 20.0;
    let dt = 0.01;
    (1..=25usize)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let l = delta * i as f64;
            let fired: usize = (0..n_trials)
                .into_par_iter()
                .map(|k| {
                    let mut rng = replicate_rng(seed, (i * n_trials + k) as u64);
                    match one_trial(&p, &sys, l, dt, &mut rng) {
                        Ok(true) => 1usize,
                        _ => 0usize,
                    }
                })
                .sum();
            let p_hat = fired as f64 / n_trials as f64;
            let (lo, hi) = wilson_interval(fired, n_trials);
            Ok(FiringGridPoint { l, p_hat, fired, n_trials, wilson_low: lo, wilson_high: hi })
        })
        .collect()
}

/// Full protocol: grid estimation, sigmoid fit, transformed parameters.
pub fn firing_probability_protocol(
    p: &MLParameters,
    sigma_star: f64,
    n_trials: usize,
    seed: u64,
) -> Result<FiringProbabilityFit> {
    let grid = estimate_firing_probability(p, sigma_star, n_trials, seed)?;
    let pts: Vec<(f64, f64)> = grid.iter().map(|g| (g.l, g.p_hat)).collect();
    let (alpha_hat, beta_hat) = fit_sigmoid(&pts)?;
    let sys = linear::build_linearized(&p.with_sigma_star(sigma_star))?;
    let factor = sys.radius_factor();
    let l_stable = stable_cycle_distance(p)?;
    Ok(FiringProbabilityFit {
        sigma_star,
        grid,
        alpha_hat,
        beta_hat,
        alpha_star: alpha_hat * factor,
        beta_star: beta_hat * factor,
        stable_cycle_l: l_stable,
        n_trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(10, 20);
        assert!(lo > 0.27 && lo < 0.5);
        assert!(hi > 0.5 && hi < 0.73);
        let (lo, hi) = wilson_interval(0, 20);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.25);
    }

    #[test]
    fn extreme_distances_fire_never_and_always() {
        // tiny protocol: 12 trials at the nearest and farthest grid points
        let p = MLParameters::default();
        let grid = estimate_firing_probability(&p, 0.05, 12, 77).unwrap();
        assert_eq!(grid.len(), 25);
        assert!(grid[0].p_hat < 0.3, "near the fixed point: {}", grid[0].p_hat);
        assert!(grid[24].p_hat > 0.7, "below the stable cycle: {}", grid[24].p_hat);
        // distances are an arithmetic grid
        let delta = grid[0].l;
        for (i, g) in grid.iter().enumerate() {
            assert!((g.l - delta * (i + 1) as f64).abs() < 1e-12);
        }
    }
}
