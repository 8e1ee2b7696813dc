//! Linearization of the stochastic Morris-Lecar system around its stable
//! focus.
//!
//! Centered coordinates `x = (v - V_eq, w - W_eq)` obey `dx = M x dt + G dB`
//! with `G = [[0, 0], [0, sigma]]`. `M` has eigenvalues `-lambda +/- i omega`
//! (`lambda` stored positive). The conjugation `Q^{-1} M Q = A`,
//! `A = [[-lambda, omega], [-omega, -lambda]]`, with
//! `Q = [[-omega, m11 + lambda], [0, m21]]`, exposes the slow decay / fast
//! rotation split; `tau^2 = tr(Q^{-1} G G^T Q^{-T}) / 2 = -sigma^2 m12 /
//! (2 omega^2 m21)` is the noise scale of the rotation-averaged dynamics.

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::ml::{self, State2};
use crate::params::MLParameters;
use serde::Serialize;

/// Everything the downstream approximation needs about the linearized system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearizedSystem {
    pub eq: State2,
    /// Drift Jacobian at the equilibrium, 1/ms.
    pub m: Mat2,
    /// Noise matrix; single nonzero entry `sigma` in the (2,2) slot.
    pub g: Mat2,
    pub sigma: f64,
    /// Decay rate, stored positive; eigenvalues are `-lambda +/- i omega`.
    pub lambda: f64,
    /// Rotation rate, rad/ms.
    pub omega: f64,
    pub q: Mat2,
    pub q_inv: Mat2,
    /// Variance scale of the rotation-averaged noise.
    pub tau2: f64,
}

/// Analytic Jacobian of the deterministic drift at any state.
pub fn drift_jacobian(s: State2, p: &MLParameters) -> Mat2 {
    let th = ((s.v - p.v1) / p.v2).tanh();
    let m = 0.5 * (1.0 + th);
    let dm = (1.0 - th * th) / (2.0 * p.v2);
    let m11 = (-p.g_ca * (dm * (s.v - p.v_ca) + m) - p.g_k * s.w - p.g_l) / p.c;
    let m12 = -p.g_k * (s.v - p.v_k) / p.c;

    let half = (s.v - p.v3) / (2.0 * p.v4);
    let c = half.cosh();
    let sh = half.sinh();
    let t = ((s.v - p.v3) / p.v4).tanh();
    let da = 0.5 * p.phi * (sh / (2.0 * p.v4) * (1.0 + t) + c * (1.0 - t * t) / p.v4);
    let db = 0.5 * p.phi * (sh / (2.0 * p.v4) * (1.0 - t) - c * (1.0 - t * t) / p.v4);
    let m21 = da * (1.0 - s.w) - db * s.w;
    let m22 = -(ml::alpha_rate(s.v, p) + ml::beta_rate(s.v, p));
    Mat2::new(m11, m12, m21, m22)
}

/// Jacobian at the equilibrium point.
pub fn jacobian(p: &MLParameters, eq: State2) -> Mat2 {
    drift_jacobian(eq, p)
}

/// Decay and rotation rates from a matrix with complex-conjugate eigenvalues:
/// `lambda = -tr(M)/2`, `omega = sqrt(det M - lambda^2)`.
pub fn eigen_structure(m: &Mat2) -> Result<(f64, f64)> {
    let lambda = -0.5 * m.trace();
    let discriminant = lambda * lambda - m.det();
    if discriminant >= 0.0 {
        return Err(Error::RealEigenvalues { discriminant });
    }
    Ok((lambda, (-discriminant).sqrt()))
}

impl LinearizedSystem {
    /// The stochastic-averaging regime requires a slowly decaying rotation:
    /// `0 < lambda < omega`.
    pub fn averaging_regime_ok(&self) -> bool {
        self.lambda > 0.0 && self.omega > 0.0 && self.lambda < self.omega
    }

    /// `sqrt(2 lambda) / sigma`: a distance `l` along the section line below
    /// the equilibrium maps to radius `r = factor * l` in transformed space.
    pub fn radius_factor(&self) -> f64 {
        (2.0 * self.lambda).sqrt() / self.sigma
    }
}

/// Construct the linearized system at the equilibrium of `p`.
///
/// The analytic Jacobian is cross-checked against central finite differences
/// of the drift (the arbiter if a closed form were transcribed wrong) and the
/// conjugation and noise-scale identities are verified before returning.
pub fn build_linearized(p: &MLParameters) -> Result<LinearizedSystem> {
    let eq = ml::equilibrium(p)?;
    let m = jacobian(p, eq);

    let fd = ml::fd_jacobian(eq, p);
    let closed = m.to_rows();
    for r in 0..2 {
        for c in 0..2 {
            let scale = fd[r][c].abs().max(1e-12);
            let rel = (closed[r][c] - fd[r][c]).abs() / scale;
            if rel > 1e-4 {
                return Err(Error::InvariantViolated(format!(
                    "analytic Jacobian entry ({r},{c}) = {} disagrees with finite differences {} (rel {rel:.2e})",
                    closed[r][c], fd[r][c]
                )));
            }
        }
    }

    let (lambda, omega) = eigen_structure(&m)?;
    let sigma = ml::diffusion_w(eq, p);
    let g = Mat2::new(0.0, 0.0, 0.0, sigma);

    let q = Mat2::new(-omega, m.a + lambda, 0.0, m.c);
    let q_inv = q
        .inverse()
        .ok_or_else(|| Error::InvariantViolated("Q is singular".into()))?;

    // conjugation: Q^{-1} M Q = [[-lambda, omega], [-omega, -lambda]]
    let a = Mat2::new(-lambda, omega, -omega, -lambda);
    let conj = q_inv.mul(&m).mul(&q);
    let err = conj.sub(&a).norm_max();
    if err > 1e-12 * m.norm_max() {
        return Err(Error::InvariantViolated(format!(
            "conjugation residual {err:.3e} exceeds 1e-12 * |M|"
        )));
    }

    // tau^2 two ways: closed form and trace of the transformed covariance
    let tau2 = -sigma * sigma * m.b / (2.0 * omega * omega * m.c);
    let cc = q_inv.mul(&g);
    let b = cc.mul(&cc.transpose());
    let tau2_trace = 0.5 * b.trace();
    if (tau2 - tau2_trace).abs() > 1e-12 * tau2.abs() {
        return Err(Error::InvariantViolated(format!(
            "tau^2 mismatch: closed {tau2:.6e} vs trace {tau2_trace:.6e}"
        )));
    }

    Ok(LinearizedSystem { eq, m, g, sigma, lambda, omega, q, q_inv, tau2 })
}

/// Deterministic solution of the linearized system (`sigma = 0`) from the
/// centered initial condition `x0`:
/// `x(t) = C (cos omega t, sin omega t)^T e^{-lambda t}` with `C` built from
/// the initial condition.
pub fn damped_solution(sys: &LinearizedSystem, x0: [f64; 2], t: f64) -> [f64; 2] {
    let (x, y) = (x0[0], x0[1]);
    let (m11, m12, m21) = (sys.m.a, sys.m.b, sys.m.c);
    let (lambda, omega) = (sys.lambda, sys.omega);
    let c = Mat2::new(
        x,
        (m12 * y + (m11 + lambda) * x) / omega,
        y,
        (m21 * x - (m11 + lambda) * y) / omega,
    );
    let trig = [(omega * t).cos(), (omega * t).sin()];
    let v = c.mul_vec(trig);
    let decay = (-lambda * t).exp();
    [v[0] * decay, v[1] * decay]
}

/// Map a phase-plane state to the rescaled coordinates
/// `(sqrt(lambda)/tau) Q^{-1} (v - V_eq, w - W_eq)`, in which the subthreshold
/// dynamics is a rotation modulated by a standardized planar OU process.
pub fn to_transformed(sys: &LinearizedSystem, s: State2) -> Result<[f64; 2]> {
    if sys.sigma == 0.0 {
        return Err(Error::DegenerateTransform);
    }
    let scale = sys.lambda.sqrt() / sys.tau2.sqrt();
    let centered = [s.v - sys.eq.v, s.w - sys.eq.w];
    let z = sys.q_inv.mul_vec(centered);
    Ok([scale * z[0], scale * z[1]])
}

/// Inverse of [`to_transformed`].
pub fn from_transformed(sys: &LinearizedSystem, z: [f64; 2]) -> Result<State2> {
    if sys.sigma == 0.0 {
        return Err(Error::DegenerateTransform);
    }
    let scale = sys.tau2.sqrt() / sys.lambda.sqrt();
    let x = sys.q.mul_vec([scale * z[0], scale * z[1]]);
    Ok(State2::new(sys.eq.v + x[0], sys.eq.w + x[1]))
}

/// Matrix exponential `e^{M t}` for `M` with eigenvalues `-lambda +/- i omega`:
/// `e^{-lambda t} (cos(omega t) I + sin(omega t) (M + lambda I)/omega)`.
pub fn mat_exp_focus(m: &Mat2, lambda: f64, omega: f64, t: f64) -> Mat2 {
    let (sin, cos) = (omega * t).sin_cos();
    let shifted = m.add(&Mat2::new(lambda, 0.0, 0.0, lambda));
    Mat2::identity()
        .scale(cos)
        .add(&shifted.scale(sin / omega))
        .scale((-lambda * t).exp())
}

/// Stationary covariance of `dX = M X dt + G dB`: the unique solution of
/// `M S + S M^T = -G G^T` (M Hurwitz).
pub fn stationary_covariance(m: &Mat2, g: &Mat2) -> Mat2 {
    let b = g.mul(&g.transpose());
    // unknowns (s11, s12, s22)
    let mut a = [
        [2.0 * m.a, 2.0 * m.b, 0.0, -b.a],
        [m.c, m.a + m.d, m.b, -b.b],
        [0.0, 2.0 * m.c, 2.0 * m.d, -b.d],
    ];
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let s22 = a[2][3] / a[2][2];
    let s12 = (a[1][3] - a[1][2] * s22) / a[1][1];
    let s11 = (a[0][3] - a[0][1] * s12 - a[0][2] * s22) / a[0][0];
    Mat2::new(s11, s12, s12, s22)
}

/// Covariance of `X_t` for `dX = M X dt + G dB`, `X_0` deterministic:
/// `S_inf - e^{Mt} S_inf e^{M^T t}`.
pub fn transient_covariance(m: &Mat2, g: &Mat2, lambda: f64, omega: f64, t: f64) -> Mat2 {
    let s_inf = stationary_covariance(m, g);
    let e = mat_exp_focus(m, lambda, omega, t);
    s_inf.sub(&e.mul(&s_inf).mul(&e.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> MLParameters {
        MLParameters::default()
    }

    fn sys() -> LinearizedSystem {
        build_linearized(&p()).unwrap()
    }

    // High-precision values at the reference equilibrium, frozen from
    // 40-digit evaluation of the closed forms.
    const M11: f64 = 0.0258199723692;
    const M12: f64 = -22.9612532121;
    const M21: f64 = 0.000335141612436;
    const M22: f64 = -0.0446298843279;
    const LAMBDA: f64 = 0.00940495597935;
    const OMEGA: f64 = 0.0803397526005;

    #[test]
    fn jacobian_matches_reference_matrix() {
        let s = sys();
        let rows = s.m.to_rows();
        for (got, want) in rows.iter().flatten().zip([M11, M12, M21, M22]) {
            assert!((got - want).abs() < 1e-6 * want.abs(), "{got} vs {want}");
        }
        // and the three-significant-figure values quoted for this parameter set
        for (got, want) in rows.iter().flatten().zip([0.0258, -22.961, 0.000335, -0.0446]) {
            assert!((got - want).abs() < 5e-3 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn jacobian_agrees_with_finite_differences() {
        let eq = ml::equilibrium(&p()).unwrap();
        let closed = jacobian(&p(), eq).to_rows();
        let fd = ml::fd_jacobian(eq, &p());
        for r in 0..2 {
            for c in 0..2 {
                let rel = (closed[r][c] - fd[r][c]).abs() / fd[r][c].abs();
                assert!(rel < 1e-6, "entry ({r},{c}): rel {rel}");
            }
        }
    }

    #[test]
    fn trace_gives_decay_rate() {
        let s = sys();
        assert!((s.m.trace() - (-0.0188)).abs() < 1e-4);
        assert!((s.m.trace() + 2.0 * s.lambda).abs() < 1e-15);
    }

    #[test]
    fn eigen_structure_reference() {
        let s = sys();
        assert!((s.lambda - 0.0094).abs() < 1e-4);
        assert!((s.omega - 0.0803).abs() < 1e-4);
        assert!((s.lambda - LAMBDA).abs() < 1e-8 * LAMBDA);
        assert!((s.omega - OMEGA).abs() < 1e-8 * OMEGA);
        let period = 2.0 * std::f64::consts::PI / s.omega;
        assert!((period - 78.2076755753).abs() < 1e-4, "period {period}");
        assert!(s.averaging_regime_ok());
    }

    #[test]
    fn eigen_structure_canonical_form() {
        let m = Mat2::new(-0.3, 1.7, -1.7, -0.3);
        let (l, o) = eigen_structure(&m).unwrap();
        assert!((l - 0.3).abs() < 1e-15);
        assert!((o - 1.7).abs() < 1e-15);
    }

    #[test]
    fn real_eigenvalues_rejected() {
        let m = Mat2::new(1.0, 0.5, 0.5, -2.0);
        assert!(matches!(eigen_structure(&m), Err(Error::RealEigenvalues { .. })));
    }

    #[test]
    fn noise_entry_scales_with_sigma_star() {
        let s = build_linearized(&p().with_sigma_star(0.05)).unwrap();
        assert!((s.sigma - 0.0017).abs() < 1e-4, "sigma {}", s.sigma);
        assert!((s.sigma / 0.05 - 0.034).abs() < 0.001);
        assert_eq!(s.g.d, s.sigma);
        assert_eq!(s.g.a, 0.0);
    }

    #[test]
    fn conjugation_identity() {
        let s = sys();
        let a = Mat2::new(-s.lambda, s.omega, -s.omega, -s.lambda);
        let res = s.q_inv.mul(&s.m).mul(&s.q).sub(&a).norm_max();
        assert!(res <= 1e-12 * s.m.norm_max(), "residual {res}");
    }

    #[test]
    fn tau2_reference_and_identity() {
        let s = sys();
        let ratio = s.tau2 / (s.sigma * s.sigma);
        assert!((ratio - 5307332.02).abs() < 1.0, "tau2/sigma2 = {ratio}");
        let cc = s.q_inv.mul(&s.g);
        let b = cc.mul(&cc.transpose());
        assert!((s.tau2 - 0.5 * b.trace()).abs() < 1e-12 * s.tau2);
    }

    #[test]
    fn shifted_eigen_identity() {
        // (m11 + lambda)^2 + omega^2 = -m12 m21
        let s = sys();
        let lhs = (s.m.a + s.lambda).powi(2) + s.omega * s.omega;
        let rhs = -s.m.b * s.m.c;
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs());
    }

    #[test]
    fn damped_solution_initial_condition_and_envelope() {
        let s = sys();
        let x0 = [1.5, -0.004];
        let got = damped_solution(&s, x0, 0.0);
        assert!((got[0] - x0[0]).abs() < 1e-14);
        assert!((got[1] - x0[1]).abs() < 1e-14);
        // after one full rotation period the state is the initial condition
        // shrunk by e^{-lambda T}; frozen from the reference eigenvalues
        let period = 2.0 * std::f64::consts::PI / s.omega;
        let xt = damped_solution(&s, x0, period);
        for i in 0..2 {
            assert!((xt[i] / x0[i] - 0.479246717639).abs() < 1e-6, "component {i}");
        }
    }

    #[test]
    fn transform_centering_and_radius() {
        let s = build_linearized(&p().with_sigma_star(0.05)).unwrap();
        let z = to_transformed(&s, s.eq).unwrap();
        assert!(z[0].abs() < 1e-12 && z[1].abs() < 1e-12);

        // a point at distance l below the equilibrium on the section line
        // lands at radius sqrt(2 lambda)/sigma * l
        let l = 0.0172;
        let z = to_transformed(&s, State2::new(s.eq.v, s.eq.w - l)).unwrap();
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        assert!((r - 1.40194214903).abs() < 1e-6, "r = {r}");
        assert!((r - s.radius_factor() * l).abs() < 1e-12);
        // the quoted transformed threshold for this noise level
        assert!((r - 1.3922).abs() / 1.3922 < 0.05);
    }

    #[test]
    fn degenerate_transform_rejected() {
        let mut s = sys();
        s.sigma = 0.0;
        assert!(matches!(to_transformed(&s, s.eq), Err(Error::DegenerateTransform)));
        assert!(matches!(from_transformed(&s, [0.0, 0.0]), Err(Error::DegenerateTransform)));
    }

    #[test]
    fn stationary_covariance_solves_lyapunov() {
        let s = sys();
        let cov = stationary_covariance(&s.m, &s.g);
        let b = s.g.mul(&s.g.transpose());
        let res = s.m.mul(&cov).add(&cov.mul(&s.m.transpose())).add(&b).norm_max();
        assert!(res < 1e-12 * b.norm_max().max(cov.norm_max()), "residual {res}");
        // symmetric positive diagonal
        assert!(cov.a > 0.0 && cov.d > 0.0);
        assert_eq!(cov.b, cov.c);
    }

    #[test]
    fn matrix_exponential_matches_series() {
        let s = sys();
        let t = 13.7;
        let e = mat_exp_focus(&s.m, s.lambda, s.omega, t);
        // Taylor series with scaling-and-squaring: e^{Mt} = (e^{Mt/2^k})^{2^k}
        let k = 20;
        let dt = t / f64::from(1 << k);
        let mut base = Mat2::identity();
        let mut term = Mat2::identity();
        for n in 1..=12 {
            term = term.mul(&s.m).scale(dt / n as f64);
            base = base.add(&term);
        }
        for _ in 0..k {
            base = base.mul(&base);
        }
        assert!(e.sub(&base).norm_max() < 1e-8, "diff {}", e.sub(&base).norm_max());
    }

    proptest! {
        #[test]
        fn transform_roundtrip(dv in -5.0f64..5.0, dw in -0.05f64..0.05) {
            let s = sys();
            let st = State2::new(s.eq.v + dv, s.eq.w + dw);
            let z = to_transformed(&s, st).unwrap();
            let back = from_transformed(&s, z).unwrap();
            prop_assert!((back.v - st.v).abs() < 1e-12 * st.v.abs().max(1.0));
            prop_assert!((back.w - st.w).abs() < 1e-12);
        }
    }
}
