//! The radial Ornstein-Uhlenbeck integrate-and-fire model.
//!
//! The modulus `R_u` of the standardized planar OU process solves
//! `dR = (1/(2R) - R) du + dW` on its own dimensionless clock `u`; the
//! physical subthreshold process is `R_{lambda t}` with `t` in ms. `Y = R^2`
//! is a square-root process whose exact transition is a scaled noncentral
//! chi-square with two degrees of freedom, so the radial process is sampled
//! exactly and never stepped through its singular drift.
//!
//! Firing is a state-dependent Poisson event with one of three mechanisms:
//! a bounded logistic hazard, an unbounded exponential hazard, or a hard
//! threshold. Hazard variants run on the millisecond clock (rates are per
//! ms against `R_{lambda t}`); the hard threshold runs on the unit-rate
//! clock of `R_u`, the convention under which its mean first-passage time
//! is calibrated to a target mean interspike interval.

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::sde::{ISISample, SimConfig};
use crate::seeds::replicate_rng;
use crate::specfun::{hyp2f2_1122, log_bessel_i0, norm_cdf, sample_noncentral_chi2_2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Firing mechanism of the LIF model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HazardModel {
    /// Bounded rate `base_rate / (1 + exp((alpha_star - r)/beta_star))`,
    /// 1/ms; `base_rate` is the section-crossing rate `omega / 2 pi`.
    Logistic { alpha_star: f64, beta_star: f64, base_rate: f64 },
    /// Unbounded rate `exp((r - alpha)/beta)`, 1/ms.
    Exponential { alpha: f64, beta: f64 },
    /// Fire at the first passage of `R` through `threshold`.
    Hard { threshold: f64 },
}

impl HazardModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            HazardModel::Logistic { beta_star, base_rate, .. } => {
                *beta_star > 0.0 && *base_rate >= 0.0
            }
            HazardModel::Exponential { alpha, beta } => *alpha > 0.0 && *beta > 0.0,
            HazardModel::Hard { threshold } => *threshold > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid hazard model {self:?}")))
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            HazardModel::Logistic { .. } => "lif-logistic",
            HazardModel::Exponential { .. } => "lif-exp",
            HazardModel::Hard { .. } => "lif-hard",
        }
    }
}

/// Pointwise hazard rate at radius `r`, 1/ms.
///
/// The hard threshold has no pointwise rate; first-passage logic handles it.
pub fn hazard(h: &HazardModel, r: f64) -> Result<f64> {
    match h {
        HazardModel::Logistic { alpha_star, beta_star, base_rate } => {
            Ok(base_rate / (1.0 + ((alpha_star - r) / beta_star).exp()))
        }
        HazardModel::Exponential { alpha, beta } => Ok(((r - alpha) / beta).exp()),
        HazardModel::Hard { .. } => Err(Error::HardThresholdHasNoRate),
    }
}

/// Exact draw of `R_u` given `R_0 = s` (dimensionless time `u > 0`).
///
/// `2 Y_u / (1 - e^{-2u})` is noncentral chi-square with 2 degrees of freedom
/// and noncentrality `2 y_0 e^{-2u} / (1 - e^{-2u})`.
pub fn radial_transition_sample<R: Rng + ?Sized>(s: f64, u: f64, rng: &mut R) -> f64 {
    debug_assert!(s >= 0.0 && u > 0.0);
    let decay = (-2.0 * u).exp();
    let v = 1.0 - decay;
    let delta = 2.0 * s * s * decay / v;
    (0.5 * v * sample_noncentral_chi2_2(delta, rng)).sqrt()
}

/// Transition density of the radial process, `f_u(r, s)`.
///
/// Evaluated in log space (the Bessel factor is `I0(r s / sinh u)`), so large
/// arguments cannot overflow.
pub fn transition_density_r(r: f64, s: f64, u: f64) -> f64 {
    debug_assert!(r > 0.0 && s >= 0.0 && u > 0.0);
    let decay = (-2.0 * u).exp();
    let v = 1.0 - decay;
    let log_bessel = if s == 0.0 { 0.0 } else { log_bessel_i0(r * s / u.sinh()) };
    let log_f = (2.0 * r / v).ln() - (r * r + s * s * decay) / v + log_bessel;
    log_f.exp()
}

/// Stationary density of `R`: Rayleigh, `2 r e^{-r^2}`.
pub fn rayleigh_density(r: f64) -> f64 {
    2.0 * r * (-r * r).exp()
}

/// Skeleton of `R_{lambda s}` on the `n`-point uniform grid over `[0, t]`
/// (ms), started at `R_0 = 0`, with the trapezoid of the hazard accumulated
/// along the way. Returns (final radius, integral of hazard in ms units).
fn hazard_skeleton<R: Rng + ?Sized>(
    h: &HazardModel,
    lambda: f64,
    t: f64,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let dt_ms = t / n as f64;
    let du = lambda * dt_ms;
    let mut r = 0.0;
    let mut prev_rate = hazard(h, r)?;
    let mut acc = 0.0;
    for _ in 0..n {
        r = radial_transition_sample(r, du, rng);
        let rate = hazard(h, r)?;
        acc += 0.5 * (prev_rate + rate) * dt_ms;
        prev_rate = rate;
    }
    Ok((r, acc))
}

/// Monte Carlo estimate of the interspike-interval density `g(t)`:
/// the average over `m_paths` radial skeletons of
/// `hazard(R_{lambda t}) exp(-trapezoid of the hazard over [0, t])`.
pub fn isi_density(
    h: &HazardModel,
    lambda: f64,
    t: f64,
    m_paths: usize,
    n_grid: usize,
    seed: u64,
) -> Result<f64> {
    debug_assert!(t > 0.0 && m_paths >= 1 && n_grid >= 2);
    let mut sum = 0.0;
    for m in 0..m_paths {
        let mut rng = replicate_rng(seed, m as u64);
        let (r, acc) = hazard_skeleton(h, lambda, t, n_grid, &mut rng)?;
        sum += hazard(h, r)? * (-acc).exp();
    }
    Ok(sum / m_paths as f64)
}

/// Monte Carlo estimate of the survival function
/// `P(T > t) = E[exp(-int_0^t hazard(R_{lambda s}) ds)]`.
pub fn survival(
    h: &HazardModel,
    lambda: f64,
    t: f64,
    m_paths: usize,
    n_grid: usize,
    seed: u64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    for m in 0..m_paths {
        let mut rng = replicate_rng(seed, m as u64);
        let (_, acc) = hazard_skeleton(h, lambda, t, n_grid, &mut rng)?;
        sum += (-acc).exp();
    }
    Ok(sum / m_paths as f64)
}

/// Density and survival on a uniform time grid from shared skeleton paths.
///
/// Same estimator as [`isi_density`] / [`survival`] per grid point, but each
/// path is extended across the whole grid, which makes the survival estimate
/// monotone by construction. Returns `(times, density, survival)`.
pub fn isi_curves(
    h: &HazardModel,
    lambda: f64,
    t_max: f64,
    n_points: usize,
    m_paths: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    debug_assert!(n_points >= 2);
    let dt_ms = t_max / (n_points - 1) as f64;
    let du = lambda * dt_ms;
    let times: Vec<f64> = (0..n_points).map(|i| dt_ms * i as f64).collect();
    let acc: Vec<(Vec<f64>, Vec<f64>)> = (0..m_paths)
        .into_par_iter()
        .map(|m| {
            let mut rng = replicate_rng(seed, m as u64);
            let mut dens = vec![0.0; n_points];
            let mut surv = vec![0.0; n_points];
            let mut r = 0.0;
            let mut rate = hazard(h, r)?;
            let mut integral = 0.0;
            dens[0] = rate;
            surv[0] = 1.0;
            for i in 1..n_points {
                r = radial_transition_sample(r, du, &mut rng);
                let new_rate = hazard(h, r)?;
                integral += 0.5 * (rate + new_rate) * dt_ms;
                rate = new_rate;
                let e = (-integral).exp();
                dens[i] = rate * e;
                surv[i] = e;
            }
            Ok((dens, surv))
        })
        .collect::<Result<_>>()?;
    let mut dens = vec![0.0; n_points];
    let mut surv = vec![0.0; n_points];
    for (d, s) in &acc {
        for i in 0..n_points {
            dens[i] += d[i];
            surv[i] += s[i];
        }
    }
    for i in 0..n_points {
        dens[i] /= m_paths as f64;
        surv[i] /= m_paths as f64;
    }
    Ok((times, dens, surv))
}

/// Theoretical cumulative hazard of the exponential firing rate, as used for
/// calibration:
/// `sqrt(pi) e^{-alpha/beta} int_0^t (g e^{g^2/4} Phi(g) + 1) ds`,
/// `g(s) = sqrt(1 - e^{-2 lambda s}) / beta`, by adaptive quadrature.
///
/// See [`cumulative_hazard_direct`] for the variant that matches the defining
/// expectation `e^{-alpha/beta} int E[exp(R_{lambda s}/beta)] ds` exactly;
/// the two differ by a smooth factor between sqrt(pi) at t -> 0 and ~1.27
/// in the tail for the reference parameters.
pub fn cumulative_hazard_theoretical(alpha: f64, beta: f64, lambda: f64, t: f64) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    // substitute s = q^2: g(s) ~ sqrt(s) near 0, so the q-integrand is smooth
    let integrand = |q: f64| {
        let g = (1.0 - (-2.0 * lambda * q * q).exp()).sqrt() / beta;
        2.0 * q * sqrt_pi * (g * (g * g / 4.0).exp() * norm_cdf(g) + 1.0)
    };
    (-alpha / beta).exp() * integrate(&integrand, 0.0, t.sqrt(), 1e-11 * t.max(1.0))
}

/// Cumulative hazard from the closed form of `E[exp(R_{lambda s}/beta)]`
/// (radial process from 0):
/// `e^{-alpha/beta} int_0^t (1 + sqrt(pi) g e^{g^2/4} Phi(g/sqrt(2))) ds`.
pub fn cumulative_hazard_direct(alpha: f64, beta: f64, lambda: f64, t: f64) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let integrand = |q: f64| {
        let g = (1.0 - (-2.0 * lambda * q * q).exp()).sqrt() / beta;
        2.0 * q
            * (1.0 + sqrt_pi * g * (g * g / 4.0).exp() * norm_cdf(g / std::f64::consts::SQRT_2))
    };
    (-alpha / beta).exp() * integrate(&integrand, 0.0, t.sqrt(), 1e-11 * t.max(1.0))
}

/// Mean first-passage time of the unit-rate radial process from 0 through
/// `threshold`, in dimensionless time: `(S^2/2) 2F2(1, 1; 2, 2; S^2)`.
pub fn mean_first_passage(threshold: f64) -> f64 {
    let x = threshold * threshold;
    0.5 * x * hyp2f2_1122(x)
}

/// Solve `mean_first_passage(S) = target_mean` for `S` by bisection on
/// (0, 10]; the map is strictly increasing.
pub fn threshold_for_mean(target_mean: f64) -> Result<f64> {
    if !(target_mean > 0.0) {
        return Err(Error::InvalidConfig("target mean must be > 0".into()));
    }
    let (mut lo, mut hi) = (1e-8, 10.0);
    if mean_first_passage(hi) < target_mean {
        return Err(Error::NonConvergence(format!(
            "target mean {target_mean} exceeds mean first passage at S = 10"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_first_passage(mid) < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Simulate interspike intervals of the jump-diffusion LIF model: radial OU
/// with state-dependent Poisson firing and reset to 0.
///
/// * `Logistic` — exact thinning against the global bound `base_rate`;
///   the radial state is advanced by exact transitions between proposals,
///   so there is no discretization error at all.
/// * `Exponential` — stepped thinning; within each step of `cfg.dt` ms the
///   rate is bounded by its value at `r + 4 sigma_step`. A proposal whose
///   rate exceeds the bound aborts with [`Error::ThinningBoundExceeded`]
///   rather than bias the sample.
/// * `Hard` — exact transitions on the unit-rate clock with step `cfg.dt`,
///   with a Brownian-bridge crossing check inside each step (an endpoint-only
///   check misses excursions and overestimates passage times badly).
///   Reported times are on that clock, the convention under which
///   [`mean_first_passage`] is calibrated against a millisecond target.
///
/// Replicate `i` uses stream `i` of `cfg.seed`; censoring at `cfg.t_max`.
pub fn simulate_lif(
    h: &HazardModel,
    lambda: f64,
    n: usize,
    cfg: &SimConfig,
) -> Result<ISISample> {
    cfg.validate()?;
    h.validate()?;
    let results: Vec<Result<Option<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(cfg.seed, i as u64);
            match h {
                HazardModel::Logistic { .. } => lif_logistic(h, lambda, cfg, &mut rng),
                HazardModel::Exponential { .. } => lif_exponential(h, lambda, cfg, &mut rng),
                HazardModel::Hard { threshold } => Ok(lif_hard(*threshold, cfg, &mut rng)),
            }
        })
        .collect();
    let mut times = Vec::with_capacity(n);
    let mut censored = Vec::with_capacity(n);
    for r in results {
        match r? {
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
    Ok(ISISample { times, censored, model_tag: h.tag().into(), seed: cfg.seed })
}

/// Exact thinning for the bounded logistic hazard.
fn lif_logistic<R: Rng + ?Sized>(
    h: &HazardModel,
    lambda: f64,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Option<f64>> {
    let bound = match h {
        HazardModel::Logistic { base_rate, .. } => *base_rate,
        _ => unreachable!(),
    };
    if bound == 0.0 {
        return Ok(None);
    }
    let mut t = 0.0;
    let mut r = 0.0;
    loop {
        let gap = -rng.gen::<f64>().ln() / bound;
        let t_next = t + gap;
        if t_next > cfg.t_max {
            return Ok(None);
        }
        r = radial_transition_sample(r, lambda * gap, rng);
        t = t_next;
        let rate = hazard(h, r)?;
        if rng.gen::<f64>() * bound < rate {
            return Ok(Some(t));
        }
    }
}

/// Stepped thinning for the unbounded exponential hazard.
fn lif_exponential<R: Rng + ?Sized>(
    h: &HazardModel,
    lambda: f64,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Option<f64>> {
    let dt = cfg.dt;
    let du = lambda * dt;
    let sigma_step = (1.0 - (-2.0 * du).exp()).sqrt();
    let n_steps = (cfg.t_max / dt).round() as usize;
    let mut r = 0.0;
    for k in 0..n_steps {
        let t0 = dt * k as f64;
        let bound = hazard(h, r + 4.0 * sigma_step)?;
        // propose candidate firing times within this step at rate `bound`
        let mut u_off = 0.0; // elapsed ms inside the step
        loop {
            let gap = -rng.gen::<f64>().ln() / bound;
            if u_off + gap >= dt {
                break;
            }
            u_off += gap;
            r = radial_transition_sample(r, lambda * gap, rng);
            let rate = hazard(h, r)?;
            if rate > bound {
                return Err(Error::ThinningBoundExceeded { rate, bound, r });
            }
            if rng.gen::<f64>() * bound < rate {
                return Ok(Some(t0 + u_off));
            }
        }
        // advance the radial state to the end of the step
        let remaining = dt - u_off;
        if remaining > 0.0 {
            r = radial_transition_sample(r, lambda * remaining, rng);
        }
    }
    Ok(None)
}

/// First passage through a hard threshold on the unit-rate clock, with a
/// Brownian-bridge crossing probability inside each exact-transition step.
fn lif_hard<R: Rng + ?Sized>(threshold: f64, cfg: &SimConfig, rng: &mut R) -> Option<f64> {
    let du = cfg.dt;
    let n_steps = (cfg.t_max / du).round() as usize;
    let mut r = 0.0;
    for k in 1..=n_steps {
        let r_next = radial_transition_sample(r, du, rng);
        if r_next >= threshold {
            return Some(du * k as f64);
        }
        // unit diffusion coefficient: bridge max over the step exceeds the
        // threshold with probability exp(-2 (S - r0)(S - r1) / du)
        let p_cross = (-2.0 * (threshold - r) * (threshold - r_next) / du).exp();
        if rng.gen::<f64>() < p_cross {
            return Some(du * k as f64);
        }
        r = r_next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    const LAMBDA: f64 = 0.00940495597935;
    const OMEGA: f64 = 0.0803397526005;

    fn logistic() -> HazardModel {
        HazardModel::Logistic {
            alpha_star: 1.3922,
            beta_star: 0.2718,
            base_rate: OMEGA / (2.0 * std::f64::consts::PI),
        }
    }

    #[test]
    fn transition_from_zero_is_exponential_in_y() {
        // R^2 / (1 - e^{-2u}) ~ Exp(1) when started at 0
        let u = 0.7;
        let v = 1.0 - (-2.0f64 * u).exp();
        let n = 50_000;
        let mut rng = replicate_rng(11, 0);
        let mut sum = 0.0;
        for _ in 0..n {
            let r = radial_transition_sample(0.0, u, &mut rng);
            sum += r * r;
        }
        let mean = sum / n as f64;
        assert!((mean - v).abs() < 4.0 * v / (n as f64).sqrt(), "mean {mean} vs {v}");
    }

    #[test]
    fn stationary_rayleigh_mean() {
        let n = 100_000;
        let mut rng = replicate_rng(12, 0);
        let mut sum = 0.0;
        let mut sum_y = 0.0;
        for _ in 0..n {
            let r = radial_transition_sample(0.0, 20.0, &mut rng);
            sum += r;
            sum_y += r * r;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.88622692545275801).abs() < 0.01 * 0.886, "mean {mean}");
        // Y = R^2 has stationary mean 1
        let mean_y = sum_y / n as f64;
        assert!((mean_y - 1.0).abs() < 3.0 / (n as f64).sqrt() * 1.0 + 0.01, "meanY {mean_y}");
    }

    #[test]
    fn transition_density_normalizes() {
        for u in [0.1, 1.0, 5.0] {
            for s in [0.0, 0.5, 2.0] {
                let mass = integrate(&|r: f64| transition_density_r(r, s, u), 1e-12, 12.0, 1e-11);
                assert!((mass - 1.0).abs() < 1e-8, "u={u} s={s}: mass {mass}");
            }
        }
    }

    #[test]
    fn transition_density_first_moment_matches_sampler() {
        for (u, s) in [(0.5, 0.0), (1.0, 1.5), (0.2, 2.0)] {
            let want = integrate(&|r: f64| r * transition_density_r(r, s, u), 1e-12, 14.0, 1e-11);
            let n = 200_000;
            let mut rng = replicate_rng(13, (u * 100.0 + s) as u64);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let r = radial_transition_sample(s, u, &mut rng);
                sum += r;
                sumsq += r * r;
            }
            let mean = sum / n as f64;
            let sd = (sumsq / n as f64 - mean * mean).sqrt();
            let se = sd / (n as f64).sqrt();
            assert!((mean - want).abs() < 3.0 * se, "u={u} s={s}: {mean} vs {want}");
        }
    }

    #[test]
    fn transition_density_stationary_limit() {
        for r in [0.1, 0.5, 1.0, 1.7, 2.5] {
            let f = transition_density_r(r, 0.8, 20.0);
            assert!((f - rayleigh_density(r)).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn sampler_density_ks() {
        // Kolmogorov-Smirnov at alpha = 0.01 over 1e5 exact draws
        let (u, s) = (0.7, 0.8);
        let n = 100_000usize;
        let mut rng = replicate_rng(14, 0);
        let mut draws: Vec<f64> =
            (0..n).map(|_| radial_transition_sample(s, u, &mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // cumulative quadrature between consecutive order statistics
        let mut ks: f64 = 0.0;
        let mut cdf = integrate(&|r: f64| transition_density_r(r, s, u), 1e-12, draws[0], 1e-10);
        for i in 0..n {
            if i > 0 {
                cdf += integrate(
                    &|r: f64| transition_density_r(r, s, u),
                    draws[i - 1],
                    draws[i],
                    1e-10,
                );
            }
            let hi = (i + 1) as f64 / n as f64 - cdf;
            let lo = cdf - i as f64 / n as f64;
            ks = ks.max(hi).max(lo);
        }
        let crit = 1.63 / (n as f64).sqrt();
        assert!(ks < crit, "KS {ks} vs critical {crit}");
    }

    #[test]
    fn hazard_shapes() {
        let h = logistic();
        let base = OMEGA / (2.0 * std::f64::consts::PI);
        // midpoint: half the bound
        assert!((hazard(&h, 1.3922).unwrap() - base / 2.0).abs() < 1e-15);
        // bounded at the crossing rate
        assert!((hazard(&h, 100.0).unwrap() - base).abs() < 1e-15);
        assert!(hazard(&h, 0.0).unwrap() < base / 2.0);

        let e = HazardModel::Exponential { alpha: 6.31, beta: 0.76 };
        assert!((hazard(&e, 6.31).unwrap() - 1.0).abs() < 1e-15);

        let hard = HazardModel::Hard { threshold: 2.97 };
        assert!(matches!(hazard(&hard, 1.0), Err(Error::HardThresholdHasNoRate)));
    }

    #[test]
    fn constant_hazard_gives_exponential_isi() {
        // a logistic hazard deep in saturation is constant to ~1e-22
        let c = 0.004;
        let h = HazardModel::Logistic { alpha_star: -50.0, beta_star: 1.0, base_rate: c };
        for t in [50.0, 300.0, 1200.0] {
            let g = isi_density(&h, LAMBDA, t, 200, 32, 99).unwrap();
            let want = c * (-c * t).exp();
            assert!((g - want).abs() < 1e-12, "t = {t}: {g} vs {want}");
            let s = survival(&h, LAMBDA, t, 200, 32, 99).unwrap();
            assert!((s - (-c * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn survival_is_one_at_zero_and_decreasing() {
        let h = logistic();
        assert_eq!(survival(&h, LAMBDA, 0.0, 10, 8, 1).unwrap(), 1.0);
        let (_, _, surv) = isi_curves(&h, LAMBDA, 2500.0, 60, 400, 7).unwrap();
        assert!((surv[0] - 1.0).abs() < 1e-15);
        for i in 1..surv.len() {
            assert!(surv[i] <= surv[i - 1] + 1e-15, "increase at {i}");
            assert!((0.0..=1.0).contains(&surv[i]));
        }
    }

    #[test]
    fn density_integrates_to_one_with_tail() {
        let h = logistic();
        let (times, dens, surv) = isi_curves(&h, LAMBDA, 6000.0, 301, 2000, 21).unwrap();
        let dt = times[1] - times[0];
        let mut integral = 0.0;
        for i in 1..times.len() {
            integral += 0.5 * (dens[i] + dens[i - 1]) * dt;
        }
        let total = integral + surv[surv.len() - 1];
        assert!((total - 1.0).abs() < 3.0 / (2000.0f64).sqrt(), "total {total}");
        assert!(dens.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn survival_derivative_matches_density() {
        // -dS/dt ~= g(t) with shared seeds
        let h = logistic();
        let t = 400.0;
        let dt = 4.0;
        let seed = 31;
        let m = 4000;
        let n = 256;
        let s_lo = survival(&h, LAMBDA, t - dt, m, n, seed).unwrap();
        let s_hi = survival(&h, LAMBDA, t + dt, m, n, seed).unwrap();
        let fd = (s_lo - s_hi) / (2.0 * dt);
        let g = isi_density(&h, LAMBDA, t, m, n, seed).unwrap();
        assert!((fd - g).abs() < 3.0 * g / (m as f64).sqrt() + 1e-4, "fd {fd} vs g {g}");
    }

    #[test]
    fn cumulative_hazard_small_time_limit() {
        let (a, b) = (6.31, 0.76);
        let t = 1e-4;
        // the integrand at 0+ is sqrt(pi); the first-order remainder over
        // [0, 1e-4] is below 1e-3 relative
        let want = std::f64::consts::PI.sqrt() * (-a / b as f64).exp() * t;
        let got = cumulative_hazard_theoretical(a, b, LAMBDA, t);
        assert!((got - want).abs() < 2e-3 * want, "{got} vs {want}");
        // the direct form loses the sqrt(pi) prefactor at the origin
        let want_direct = (-a / b as f64).exp() * t;
        let got_direct = cumulative_hazard_direct(a, b, LAMBDA, t);
        assert!((got_direct - want_direct).abs() < 2e-3 * want_direct);
    }

    #[test]
    fn cumulative_hazard_reference_values() {
        // frozen from 30-digit quadrature at the reference calibration
        let a = cumulative_hazard_theoretical(6.31, 0.76, LAMBDA, 447.0);
        assert!((a - 0.51535925426081484).abs() < 1e-8, "A = {a}");
        let d = cumulative_hazard_direct(6.31, 0.76, LAMBDA, 447.0);
        assert!((d - 0.40062640277739622).abs() < 1e-8, "A_direct = {d}");
    }

    #[test]
    fn cumulative_hazard_nondecreasing_and_reported_discrepancy() {
        let mut prev = 0.0;
        for k in 1..=20 {
            let t = 100.0 * k as f64;
            let a = cumulative_hazard_theoretical(6.31, 0.76, LAMBDA, t);
            assert!(a >= prev);
            prev = a;
        }
        // the calibration form exceeds the direct expectation by a smooth,
        // bounded factor; report it so the discrepancy stays visible
        for t in [50.0, 200.0, 447.0, 1500.0] {
            let ratio = cumulative_hazard_theoretical(6.31, 0.76, LAMBDA, t)
                / cumulative_hazard_direct(6.31, 0.76, LAMBDA, t);
            println!("cumulative-hazard ratio (calibration/direct) at t={t}: {ratio:.4}");
            assert!(ratio > 1.2 && ratio < std::f64::consts::PI.sqrt() + 1e-9, "ratio {ratio}");
        }
    }

    #[test]
    fn direct_cumulative_hazard_matches_expectation_quadrature() {
        // E[exp(R_u / beta)] against quadrature of the transition density
        let beta = 0.76;
        for u in [0.05, 0.5, 2.0] {
            let e_quad = integrate(
                &|r: f64| transition_density_r(r, 0.0, u) * (r / beta).exp(),
                1e-12,
                20.0,
                1e-11,
            );
            let g = (1.0 - (-2.0f64 * u).exp()).sqrt() / beta;
            let closed = 1.0
                + std::f64::consts::PI.sqrt()
                    * g
                    * (g * g / 4.0).exp()
                    * norm_cdf(g / std::f64::consts::SQRT_2);
            assert!((e_quad - closed).abs() < 1e-9 * closed, "u={u}: {e_quad} vs {closed}");
        }
    }

    #[test]
    fn mean_first_passage_values() {
        assert!((mean_first_passage(1e-3) - 0.5e-6).abs() < 1e-12);
        assert!((mean_first_passage(0.5) - 0.13326771577822201).abs() < 1e-12);
        assert!((mean_first_passage(1.0) - 0.65895107572720195).abs() < 1e-12);
        let et = mean_first_passage(2.97);
        assert!((et - 443.02188563206513).abs() < 1e-8 * et);
    }

    #[test]
    fn mean_first_passage_strictly_increasing() {
        let mut prev = 0.0;
        for k in 1..=50 {
            let s = 0.1 * k as f64;
            let et = mean_first_passage(s);
            assert!(et > prev, "not increasing at S = {s}");
            prev = et;
        }
    }

    #[test]
    fn threshold_solve_roundtrip() {
        let s = threshold_for_mean(447.0).unwrap();
        assert!((s - 2.971735861352335).abs() < 1e-9, "S = {s}");
        assert!((s - 2.97).abs() < 0.05);
        for target in [1.0, 50.0, 2000.0] {
            let s = threshold_for_mean(target).unwrap();
            assert!((mean_first_passage(s) - target).abs() < 1e-7 * target);
        }
    }

    #[test]
    fn zero_rate_never_fires() {
        let h = HazardModel::Logistic { alpha_star: 10.0, beta_star: 0.1, base_rate: 0.0 };
        let cfg = SimConfig { t_max: 500.0, seed: 3, ..SimConfig::default() };
        let s = simulate_lif(&h, LAMBDA, 20, &cfg).unwrap();
        assert!(s.censored.iter().all(|&c| c));
    }

    #[test]
    fn hard_threshold_mean_matches_formula() {
        let thr = 1.8; // small threshold keeps the test quick
        let want = mean_first_passage(thr);
        let cfg = SimConfig { dt: 0.01, t_max: 400.0, seed: 8, ..SimConfig::default() };
        let s = simulate_lif(&HazardModel::Hard { threshold: thr }, LAMBDA, 4000, &cfg).unwrap();
        let times = s.uncensored();
        assert!(times.len() > 3990, "too many censored");
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let sd = (times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
            / times.len() as f64)
            .sqrt();
        let se = sd / (times.len() as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * se + 0.02 * want, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn logistic_lif_matches_survival_curve() {
        let h = logistic();
        let cfg = SimConfig { t_max: 8000.0, seed: 17, ..SimConfig::default() };
        let sample = simulate_lif(&h, LAMBDA, 1000, &cfg).unwrap();
        let mut times = sample.uncensored();
        assert!(times.len() >= 995, "censored {} of 1000", 1000 - times.len());
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (grid, _, surv) = isi_curves(&h, LAMBDA, 8000.0, 801, 4000, 18).unwrap();
        // KS between the sample and the estimated distribution function
        let n = times.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &t) in times.iter().enumerate() {
            let j = ((t / (grid[1] - grid[0])).floor() as usize).min(surv.len() - 1);
            let f = 1.0 - surv[j];
            ks = ks.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        }
        assert!(ks < 0.05, "KS = {ks}");
    }

    #[test]
    fn exponential_thinning_runs_and_is_unbiased_vs_curves() {
        let h = HazardModel::Exponential { alpha: 6.31, beta: 0.76 };
        let cfg = SimConfig { dt: 1.0, t_max: 20000.0, seed: 5, ..SimConfig::default() };
        let sample = simulate_lif(&h, LAMBDA, 400, &cfg).unwrap();
        let times = sample.uncensored();
        assert!(times.len() > 380);
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        // cross-check against the shared-skeleton survival estimate
        let (grid, _, surv) = isi_curves(&h, LAMBDA, 20000.0, 2001, 3000, 6).unwrap();
        let dt = grid[1] - grid[0];
        let mean_curve: f64 = surv.iter().map(|s| s * dt).sum();
        let sd = (times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
            / times.len() as f64)
            .sqrt();
        let se = sd / (times.len() as f64).sqrt();
        assert!(
            (mean - mean_curve).abs() < 3.0 * se + 0.03 * mean_curve,
            "thinning mean {mean} vs curve mean {mean_curve} (se {se})"
        );
    }
}
