//! Distribution comparison metrics for interspike-interval samples.

use crate::error::{Error, Result};
use crate::sde::ISISample;
use serde::Serialize;

/// Summary distances between two firing-time distributions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsiComparison {
    pub ks_distance: f64,
    /// Mean of the first input minus mean of the second.
    pub mean_diff: f64,
    /// Variance of the first divided by variance of the second.
    pub variance_ratio: f64,
}

fn sorted_uncensored(s: &ISISample) -> Result<Vec<f64>> {
    let mut v = s.uncensored();
    if v.is_empty() {
        return Err(Error::DegenerateData("no uncensored times".into()));
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Two-sample Kolmogorov-Smirnov distance (inputs must be sorted).
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        // step past all observations tied at the next value on both sides
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Empirical quantile of a sorted sample (linear interpolation).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Compare two samples of firing times (uncensored parts).
pub fn compare_isi_samples(a: &ISISample, b: &ISISample) -> Result<IsiComparison> {
    let xa = sorted_uncensored(a)?;
    let xb = sorted_uncensored(b)?;
    let (ma, va) = mean_var(&xa);
    let (mb, vb) = mean_var(&xb);
    Ok(IsiComparison {
        ks_distance: two_sample_ks(&xa, &xb),
        mean_diff: ma - mb,
        variance_ratio: va / vb,
    })
}

/// Compare a sample against a density curve on a uniform grid: the curve is
/// integrated to a distribution function (trapezoid), and its moments are
/// taken after normalizing by its total mass.
pub fn compare_isi_to_density(a: &ISISample, times: &[f64], density: &[f64]) -> Result<IsiComparison> {
    if times.len() != density.len() || times.len() < 2 {
        return Err(Error::DegenerateData("density grid mismatch".into()));
    }
    let xa = sorted_uncensored(a)?;
    let dt = times[1] - times[0];
    let mut cdf = Vec::with_capacity(times.len());
    cdf.push(0.0);
    for i in 1..times.len() {
        cdf.push(cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * dt);
    }
    let mass = *cdf.last().unwrap();
    if !(mass > 0.0) {
        return Err(Error::DegenerateData("density curve has no mass".into()));
    }
    // KS of the sample against the (sub-)distribution function
    let n = xa.len() as f64;
    let eval = |t: f64| -> f64 {
        if t <= times[0] {
            return 0.0;
        }
        if t >= *times.last().unwrap() {
            return mass;
        }
        let j = ((t - times[0]) / dt).floor() as usize;
        let frac = (t - times[j]) / dt;
        cdf[j] * (1.0 - frac) + cdf[j + 1] * frac
    };
    let mut ks: f64 = 0.0;
    for (i, &t) in xa.iter().enumerate() {
        let f = eval(t);
        ks = ks.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    // curve moments (normalized)
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 1..times.len() {
        let w = 0.5 * (density[i] + density[i - 1]) * dt / mass;
        let tm = 0.5 * (times[i] + times[i - 1]);
        m1 += w * tm;
        m2 += w * tm * tm;
    }
    let (ma, va) = mean_var(&xa);
    Ok(IsiComparison { ks_distance: ks, mean_diff: ma - m1, variance_ratio: va / (m2 - m1 * m1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(times: Vec<f64>) -> ISISample {
        let censored = vec![false; times.len()];
        ISISample { times, censored, model_tag: "test".into(), seed: 0 }
    }

    #[test]
    fn identical_samples_have_zero_ks() {
        let a = sample((1..100).map(|i| i as f64).collect());
        let c = compare_isi_samples(&a, &a).unwrap();
        assert_eq!(c.ks_distance, 0.0);
        assert_eq!(c.mean_diff, 0.0);
        assert!((c.variance_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_samples_have_ks_one() {
        let a = sample(vec![1.0, 2.0, 3.0]);
        let b = sample(vec![10.0, 11.0]);
        let c = compare_isi_samples(&a, &b).unwrap();
        assert_eq!(c.ks_distance, 1.0);
    }

    #[test]
    fn sample_against_its_own_density() {
        // uniform density on [0, 1] vs a uniform quantile sample
        let n = 2000;
        let a = sample((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect());
        let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let dens = vec![1.0; times.len()];
        let c = compare_isi_to_density(&a, &times, &dens).unwrap();
        assert!(c.ks_distance < 0.002, "ks {}", c.ks_distance);
        assert!(c.mean_diff.abs() < 1e-3);
        assert!((c.variance_ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn percentile_interpolates() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&xs, 0.0), 0.0);
        assert_eq!(percentile(&xs, 1.0), 4.0);
        assert_eq!(percentile(&xs, 0.5), 2.0);
        assert!((percentile(&xs, 0.95) - 3.8).abs() < 1e-12);
    }

    #[test]
    fn censored_only_rejected() {
        let s = ISISample {
            times: vec![1.0],
            censored: vec![true],
            model_tag: "t".into(),
            seed: 0,
        };
        assert!(compare_isi_samples(&s, &s).is_err());
    }
}
