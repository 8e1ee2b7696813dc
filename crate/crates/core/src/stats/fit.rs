//! Nonlinear least squares for the sigmoid firing-probability curve
//! `p(l) = 1 / (1 + exp((alpha - l)/beta))`: coarse grid search followed by
//! damped Gauss-Newton refinement.

use crate::error::{Error, Result};

fn sigmoid(l: f64, alpha: f64, beta: f64) -> f64 {
    1.0 / (1.0 + ((alpha - l) / beta).exp())
}

fn sse(grid: &[(f64, f64)], alpha: f64, beta: f64) -> f64 {
    grid.iter().map(|&(l, p)| (sigmoid(l, alpha, beta) - p).powi(2)).sum()
}

/// Least-squares estimate of `(alpha, beta)` from `(distance, frequency)`
/// pairs. Needs at least three interior frequencies (strictly between 0
/// and 1) to be identifiable.
pub fn fit_sigmoid(grid: &[(f64, f64)]) -> Result<(f64, f64)> {
    let interior = grid.iter().filter(|&&(_, p)| p > 0.0 && p < 1.0).count();
    if interior < 3 {
        return Err(Error::DegenerateData(format!(
            "need >= 3 grid frequencies strictly inside (0,1), got {interior}"
        )));
    }
    let l_min = grid.iter().map(|&(l, _)| l).fold(f64::INFINITY, f64::min);
    let l_max = grid.iter().map(|&(l, _)| l).fold(f64::NEG_INFINITY, f64::max);
    let span = (l_max - l_min).max(1e-12);

    // coarse grid
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..60 {
        let alpha = l_min + span * i as f64 / 59.0;
        for j in 0..60 {
            // beta from span/500 to span, log-spaced
            let beta = span / 500.0 * (500.0f64).powf(j as f64 / 59.0);
            let s = sse(grid, alpha, beta);
            if s < best.0 {
                best = (s, alpha, beta);
            }
        }
    }
    let (mut obj, mut alpha, mut beta) = best;

    // damped Gauss-Newton
    let mut damping = 1e-8;
    for _ in 0..200 {
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for &(l, y) in grid {
            let f = sigmoid(l, alpha, beta);
            let r = f - y;
            let da = -f * (1.0 - f) / beta;
            let db = f * (1.0 - f) * (alpha - l) / (beta * beta);
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        jtj[1][0] = jtj[0][1];
        let grad_norm = (jtr[0] * jtr[0] + jtr[1] * jtr[1]).sqrt();
        if grad_norm < 1e-10 {
            break;
        }
        // solve (JtJ + damping I) step = -Jtr
        let mut improved = false;
        for _ in 0..40 {
            let a11 = jtj[0][0] + damping;
            let a22 = jtj[1][1] + damping;
            let det = a11 * a22 - jtj[0][1] * jtj[0][1];
            if det.abs() < 1e-300 {
                damping *= 10.0;
                continue;
            }
            let sa = (-jtr[0] * a22 + jtr[1] * jtj[0][1]) / det;
            let sb = (jtr[0] * jtj[0][1] - jtr[1] * a11) / det;
            let cand_alpha = alpha + sa;
            let cand_beta = beta + sb;
            if cand_beta <= 0.0 {
                damping *= 10.0;
                continue;
            }
            let cand_obj = sse(grid, cand_alpha, cand_beta);
            if cand_obj <= obj {
                alpha = cand_alpha;
                beta = cand_beta;
                obj = cand_obj;
                damping = (damping * 0.3).max(1e-12);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok((alpha, beta))
}
