//! Nelson-Aalen estimation and least-squares calibration of the exponential
//! hazard against the theoretical cumulative hazard of the radial model.

use crate::error::{Error, Result};
use crate::radial::cumulative_hazard_theoretical;
use crate::sde::ISISample;
use serde::Serialize;
use std::fmt::Write as _;

/// Right-continuous nondecreasing step function starting at 0: jump times and
/// post-jump values.
#[derive(Clone, Debug, Serialize)]
pub struct CumulativeHazardCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CumulativeHazardCurve {
    /// Value at `t` (0 before the first jump).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,cumulative_hazard\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }
}

/// Nelson-Aalen estimator: at each event time the hazard jumps by
/// (events at that time) / (number still at risk); censored times only
/// shrink the risk set.
pub fn nelson_aalen(sample: &ISISample) -> Result<CumulativeHazardCurve> {
    if sample.times.is_empty() || sample.censored.iter().all(|&c| c) {
        return Err(Error::DegenerateData("no uncensored event times".into()));
    }
    let mut order: Vec<usize> = (0..sample.times.len()).collect();
    order.sort_by(|&a, &b| sample.times[a].partial_cmp(&sample.times[b]).unwrap());
    let n = order.len();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut cum = 0.0;
    let mut i = 0;
    while i < n {
        let t = sample.times[order[i]];
        let at_risk = n - i;
        let mut deaths = 0usize;
        let mut j = i;
        while j < n && sample.times[order[j]] == t {
            if !sample.censored[order[j]] {
                deaths += 1;
            }
            j += 1;
        }
        if deaths > 0 {
            cum += deaths as f64 / at_risk as f64;
            times.push(t);
            values.push(cum);
        }
        i = j;
    }
    Ok(CumulativeHazardCurve { times, values })
}

/// Result of the exponential-hazard calibration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpHazardFit {
    pub alpha: f64,
    pub beta: f64,
    /// Sum of squared distances on the fit grid.
    pub objective: f64,
    pub converged: bool,
}

fn objective_on_grid(curve: &CumulativeHazardCurve, lambda: f64, grid: &[f64], alpha: f64, beta: f64) -> f64 {
    grid.iter()
        .map(|&t| {
            let a = cumulative_hazard_theoretical(alpha, beta, lambda, t);
            let d = a - curve.value_at(t);
            d * d
        })
        .sum()
}

/// Default fit grid: 40 log-spaced points between the 5th and 95th
/// percentiles of the jump times.
fn default_grid(curve: &CumulativeHazardCurve) -> Vec<f64> {
    let n = curve.times.len();
    let lo = curve.times[(n as f64 * 0.05) as usize].max(1e-6);
    let hi = curve.times[((n as f64 * 0.95) as usize).min(n - 1)];
    let m = 40;
    (0..m)
        .map(|j| (lo.ln() + (hi.ln() - lo.ln()) * j as f64 / (m - 1) as f64).exp())
        .collect()
}

/// Least-squares fit of `(alpha, beta)` so the theoretical cumulative hazard
/// tracks the Nelson-Aalen curve on a log-spaced time grid: coarse search
/// (beta grid with the scale profiled out in closed form) followed by damped
/// Gauss-Newton on both parameters.
pub fn fit_exponential_hazard(curve: &CumulativeHazardCurve, lambda: f64) -> Result<ExpHazardFit> {
    if curve.times.len() < 5 {
        return Err(Error::DegenerateData("too few event times for the hazard fit".into()));
    }
    let grid = default_grid(curve);
    let target: Vec<f64> = grid.iter().map(|&t| curve.value_at(t)).collect();

    // coarse stage: for each beta the scale c = e^{-alpha/beta} is profiled:
    // A(t) = c * I_beta(t), optimal c = <I, target> / <I, I>
    let mut best: Option<(f64, f64, f64)> = None; // (objective, alpha, beta)
    for j in 0..60 {
        let beta = 0.15 * (20.0f64).powf(j as f64 / 59.0); // 0.15 .. 3.0
        let i_vals: Vec<f64> =
            grid.iter().map(|&t| cumulative_hazard_theoretical(0.0, beta, lambda, t)).collect();
        let dot_it: f64 = i_vals.iter().zip(&target).map(|(a, b)| a * b).sum();
        let dot_ii: f64 = i_vals.iter().map(|a| a * a).sum();
        if dot_it <= 0.0 || dot_ii == 0.0 {
            continue;
        }
        let c = dot_it / dot_ii;
        let alpha = -beta * c.ln();
        if !(alpha > 0.0) {
            continue;
        }
        let obj: f64 =
            i_vals.iter().zip(&target).map(|(a, b)| (c * a - b) * (c * a - b)).sum();
        if best.map_or(true, |(o, _, _)| obj < o) {
            best = Some((obj, alpha, beta));
        }
    }
    let (_, _, beta_coarse) =
        best.ok_or_else(|| Error::NonConvergence("coarse hazard-fit grid found no candidate".into()))?;

    // the objective is a narrow valley in (alpha, beta); refine along it by
    // golden-section on the scale-profiled one-dimensional objective
    let profiled = |beta: f64| -> (f64, f64) {
        let i_vals: Vec<f64> =
            grid.iter().map(|&t| cumulative_hazard_theoretical(0.0, beta, lambda, t)).collect();
        let dot_it: f64 = i_vals.iter().zip(&target).map(|(a, b)| a * b).sum();
        let dot_ii: f64 = i_vals.iter().map(|a| a * a).sum();
        let c = (dot_it / dot_ii).max(1e-300);
        let obj: f64 = i_vals.iter().zip(&target).map(|(a, b)| (c * a - b) * (c * a - b)).sum();
        (obj, -beta * c.ln())
    };
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (beta_coarse / 1.4, beta_coarse * 1.4);
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (profiled(x1).0, profiled(x2).0);
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = profiled(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = profiled(x2).0;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let mut beta = 0.5 * (lo + hi);
    let (mut obj, mut alpha) = profiled(beta);

    // damped Gauss-Newton with a numeric Jacobian
    let mut damping = 1e-6;
    let mut converged = false;
    for _ in 0..80 {
        let f0: Vec<f64> = grid
            .iter()
            .map(|&t| cumulative_hazard_theoretical(alpha, beta, lambda, t))
            .collect();
        let ha = (alpha.abs() * 1e-6).max(1e-9);
        let hb = (beta.abs() * 1e-6).max(1e-9);
        let fa: Vec<f64> = grid
            .iter()
            .map(|&t| cumulative_hazard_theoretical(alpha + ha, beta, lambda, t))
            .collect();
        let fb: Vec<f64> = grid
            .iter()
            .map(|&t| cumulative_hazard_theoretical(alpha, beta + hb, lambda, t))
            .collect();
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for k in 0..grid.len() {
            let r = f0[k] - target[k];
            let da = (fa[k] - f0[k]) / ha;
            let db = (fb[k] - f0[k]) / hb;
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        let grad_norm = (jtr[0] * jtr[0] + jtr[1] * jtr[1]).sqrt();
        if grad_norm < 1e-10 {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let a11 = jtj[0][0] + damping;
            let a22 = jtj[1][1] + damping;
            let det = a11 * a22 - jtj[0][1] * jtj[0][1];
            if det.abs() < 1e-300 {
                damping *= 10.0;
                continue;
            }
            let sa = (-jtr[0] * a22 + jtr[1] * jtj[0][1]) / det;
            let sb = (jtr[0] * jtj[0][1] - jtr[1] * a11) / det;
            let cand_a = alpha + sa;
            let cand_b = beta + sb;
            if cand_b <= 1e-3 || cand_a <= 0.0 {
                damping *= 10.0;
                continue;
            }
            let cand_obj = objective_on_grid(curve, lambda, &grid, cand_a, cand_b);
            if cand_obj < obj {
                alpha = cand_a;
                beta = cand_b;
                obj = cand_obj;
                damping = (damping * 0.3).max(1e-10);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            converged = grad_norm < 1e-6;
            break;
        }
    }
    Ok(ExpHazardFit { alpha, beta, objective: obj, converged })
}
