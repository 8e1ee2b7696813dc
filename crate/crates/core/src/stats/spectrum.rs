//! Periodogram-based spectral estimation.
//!
//! The empirical estimate averages raw (unsmoothed, untapered) periodograms
//! of many quiescent segments, truncated to a common length; averaging rather
//! than smoothing keeps the estimator approximately unbiased. The average is
//! then rescaled so its maximum matches the closed-form density of the
//! rotation-modulated OU approximation on the same frequency grid.

use crate::error::{Error, Result};
use crate::linear::LinearizedSystem;
use crate::ou::{spectrum_xa, SpectralDensity, SpectrumKind};
use crate::sde::Path;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Raw one-sided periodogram of a real series sampled every `dt` ms.
///
/// Returns `(freqs, power)` on the angular-frequency grid
/// `f_j = 2 pi j / (n dt)`, `j = 0..n/2`, with
/// `power_j = dt |X_j|^2 / (2 pi n)` so that the total integral approximates
/// the series variance (two-sided density convention, rad/ms).
pub fn periodogram(xs: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let mut buf: Vec<Complex<f64>> = xs.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let n_out = n / 2 + 1;
    let df = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let scale = dt / (2.0 * std::f64::consts::PI * n as f64);
    let freqs = (0..n_out).map(|j| df * j as f64).collect();
    let power = buf[..n_out].iter().map(|c| scale * c.norm_sqr()).collect();
    (freqs, power)
}

/// Average the raw periodograms of the chosen coordinate over segments
/// truncated to the shortest segment length.
pub fn average_periodograms(segments: &[Path], coord: usize) -> Result<SpectralDensity> {
    if segments.is_empty() {
        return Err(Error::InsufficientSegments { need: 1, got: 0 });
    }
    let n_common = segments.iter().map(|s| s.len()).min().unwrap();
    let dt = segments[0].dt;
    let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut series = Vec::with_capacity(n_common);
    for seg in segments {
        series.clear();
        series.extend(seg.states[..n_common].iter().map(|s| s[coord]));
        let (freqs, power) = periodogram(&series, dt);
        match &mut acc {
            None => acc = Some((freqs, power)),
            Some((_, p)) => {
                for (a, b) in p.iter_mut().zip(&power) {
                    *a += b;
                }
            }
        }
    }
    let (freqs, mut power) = acc.unwrap();
    for p in &mut power {
        *p /= segments.len() as f64;
    }
    Ok(SpectralDensity { freqs, power, kind: SpectrumKind::Empirical })
}

/// Averaged periodogram of at least 20 segments, rescaled so its maximum
/// equals the maximum of the theoretical approximation density on the same
/// grid.
pub fn estimate_spectrum(
    segments: &[Path],
    coord: usize,
    sys: &LinearizedSystem,
) -> Result<SpectralDensity> {
    if segments.len() < 20 {
        return Err(Error::InsufficientSegments { need: 20, got: segments.len() });
    }
    let mut sd = average_periodograms(segments, coord)?;
    let max_emp = sd.power.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_theory = sd
        .freqs
        .iter()
        .map(|&f| spectrum_xa(sys, f))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_emp > 0.0 {
        let scale = max_theory / max_emp;
        for p in &mut sd.power {
            *p *= scale;
        }
    }
    Ok(sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::Path;

    fn sine_segment(freq: f64, dt: f64, n: usize, phase: f64) -> Path {
        let states = (0..n)
            .map(|k| {
                let t = dt * k as f64;
                [(freq * t + phase).sin(), 0.0]
            })
            .collect();
        Path { dt, t0: 0.0, states, boundary_events: 0 }
    }

    #[test]
    fn sinusoid_peaks_in_its_bin() {
        let dt = 0.1;
        let n = 4500;
        let df = 2.0 * std::f64::consts::PI / (n as f64 * dt);
        let j0 = 37;
        let segs: Vec<Path> =
            (0..5).map(|i| sine_segment(df * j0 as f64, dt, n, 0.3 * i as f64)).collect();
        let sd = average_periodograms(&segs, 0).unwrap();
        assert_eq!(sd.peak_index(), j0);
    }

    #[test]
    fn parseval_normalization() {
        // integral of the two-sided density ~ variance/2 on the one-sided grid
        let dt = 0.05;
        let n = 8192;
        let seg = sine_segment(1.3, dt, n, 0.0);
        let (freqs, power) = periodogram(
            &seg.states.iter().map(|s| s[0]).collect::<Vec<_>>(),
            dt,
        );
        let df = freqs[1] - freqs[0];
        let total: f64 = power.iter().sum::<f64>() * df * 2.0; // fold negative side
        let var = 0.5; // variance of a unit sinusoid
        assert!((total - var).abs() < 0.02 * var, "total {total}");
    }

    #[test]
    fn too_few_segments_rejected() {
        let sys = crate::linear::build_linearized(&crate::params::MLParameters::default()).unwrap();
        let segs = vec![sine_segment(0.1, 0.1, 1000, 0.0); 19];
        assert!(matches!(
            estimate_spectrum(&segs, 0, &sys),
            Err(Error::InsufficientSegments { need: 20, got: 19 })
        ));
    }

    #[test]
    fn scaling_matches_theory_maximum() {
        let sys = crate::linear::build_linearized(&crate::params::MLParameters::default()).unwrap();
        let segs: Vec<Path> = (0..20).map(|i| sine_segment(0.08, 0.1, 4500, i as f64)).collect();
        let sd = estimate_spectrum(&segs, 0, &sys).unwrap();
        let max_emp = sd.power.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let max_th = sd
            .freqs
            .iter()
            .map(|&f| crate::ou::spectrum_xa(&sys, f))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max_emp - max_th).abs() < 1e-12 * max_th);
    }
}
