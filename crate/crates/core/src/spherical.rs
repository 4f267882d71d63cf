//! Spherical functions of (n,n) type and the discrete-series coefficients.
//!
//! [`phi_nn`] chooses between three evaluations: the hypergeometric series
//! (small `|lambda| tanh t`), the Harish-Chandra series (large t) and the
//! integral representation (everything else). The individual routes are public
//! so they can be checked against each other.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_geometry::{cartan_decompose, circle_nodes, GroupElement};
use crate::hc_expansion::{lattice_distance, phi_global_adaptive};
use crate::quadrature::{points_on_breaks, uniform_breaks};
use crate::special_functions::{bessel_jnorm, gauss_2f1_detailed, is_gamma_pole, BesselOrder, SeriesOutcome};

/// Parity class of a K-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

/// The K-type n of an (n,n)-type function, with parity tau derived from n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KType {
    pub n: i64,
}

impl KType {
    pub fn new(n: i64) -> Self {
        KType { n }
    }

    pub fn tau(&self) -> Parity {
        if self.n % 2 == 0 {
            Parity::Plus
        } else {
            Parity::Minus
        }
    }

    pub fn abs_n(&self) -> u64 {
        self.n.unsigned_abs()
    }
}

/// `gamma_p = |2/p - 1|`, half-width of the strip S_p.
pub fn gamma_p(p: f64) -> f64 {
    (2.0 / p - 1.0).abs()
}

/// A spectral parameter, optionally tied to a strip S_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub strip_p: Option<f64>,
}

impl SpectralPoint {
    pub fn new(lambda: Complex64, strip_p: Option<f64>) -> Result<Self> {
        if let Some(p) = strip_p {
            if !(p >= 1.0) {
                return Err(Error::domain(format!("strip exponent p={p} must be >= 1")));
            }
            if lambda.im.abs() > gamma_p(p) + 1e-15 {
                return Err(Error::domain(format!("lambda={lambda} outside S_{p}")));
            }
        }
        Ok(SpectralPoint { lambda, strip_p })
    }
}

/// Checks `n in Z(k)`: opposite parity to k, and n >= k+1 (k > 0) or n <= k-1 (k < 0).
pub fn check_z_membership(k: i64, ktype: KType) -> Result<()> {
    let n = ktype.n;
    if k == 0 {
        return Err(Error::domain("discrete parameter k must be nonzero"));
    }
    if (n - k).rem_euclid(2) == 0 {
        return Err(Error::domain(format!(
            "n={n} not in Z({k}): n must have parity opposite to k"
        )));
    }
    if k > 0 && n < k + 1 {
        return Err(Error::domain(format!("n={n} not in Z({k}): need n >= k+1 = {}", k + 1)));
    }
    if k < 0 && n > k - 1 {
        return Err(Error::domain(format!("n={n} not in Z({k}): need n <= k-1 = {}", k - 1)));
    }
    Ok(())
}

fn hyper_params(n: u64, lambda: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let base = 1.0 - n as f64;
    ((base - i * lambda) / 2.0, (base + i * lambda) / 2.0)
}

/// `cosh(t)^{-|n|} 2F1((1-|n|-i l)/2, (1-|n|+i l)/2; 1; -sinh^2 t)` with series diagnostics.
pub fn phi_nn_hypergeometric_detailed(ktype: KType, lambda: Complex64, t: f64) -> Result<SeriesOutcome> {
    let t = t.abs();
    let n = ktype.abs_n();
    let (a, b) = hyper_params(n, lambda);
    let mut out = gauss_2f1_detailed(a, b, Complex64::new(1.0, 0.0), -t.sinh().powi(2))?;
    let pre = t.cosh().powi(-(n as i32));
    out.value *= pre;
    out.max_term *= pre;
    Ok(out)
}

/// Hypergeometric route alone.
pub fn phi_nn_hypergeometric(ktype: KType, lambda: Complex64, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(phi_nn_hypergeometric_detailed(ktype, lambda, t)?.value)
}

/// Largest cancellation ratio accepted from the hypergeometric series.
const MAX_CANCELLATION: f64 = 1e4;
/// Below this distance to iZ the Harish-Chandra route is skipped.
const HC_LATTICE_GAP: f64 = 1e-6;

/// Which evaluation [`phi_nn`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiRoute {
    Identity,
    Hypergeometric,
    HarishChandra,
    IntegralRep,
}

/// `phi^{n,n}_{tau,lambda}(a_t)` together with the route that produced it.
pub fn phi_nn_routed(ktype: KType, lambda: Complex64, t: f64) -> Result<(Complex64, PhiRoute)> {
    let t = t.abs();
    if !t.is_finite() || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::domain(format!("non-finite input lambda={lambda}, t={t}")));
    }
    if t == 0.0 {
        return Ok((Complex64::new(1.0, 0.0), PhiRoute::Identity));
    }
    let (a, b) = hyper_params(ktype.abs_n(), lambda);
    let terminating = is_gamma_pole(a) || is_gamma_pole(b);
    if terminating || (lambda.norm() * t.tanh() <= 6.0 && t <= 3.5) {
        if let Ok(out) = phi_nn_hypergeometric_detailed(ktype, lambda, t) {
            if out.cancellation() < MAX_CANCELLATION {
                return Ok((out.value, PhiRoute::Hypergeometric));
            }
        }
    }
    if t >= 0.5 && lattice_distance(lambda) >= HC_LATTICE_GAP {
        if let Ok(v) = phi_global_adaptive(ktype.n, lambda, t) {
            return Ok((v, PhiRoute::HarishChandra));
        }
    }
    Ok((phi_nn_integral_rep(ktype, lambda, t)?, PhiRoute::IntegralRep))
}

/// `phi^{n,n}_{tau,lambda}(a_t)`; even in t and in lambda, equal to 1 at t = 0.
pub fn phi_nn(ktype: KType, lambda: Complex64, t: f64) -> Result<Complex64> {
    Ok(phi_nn_routed(ktype, lambda, t)?.0)
}

/// Terminating `2F1(n, -n; 1/2; x)`.
pub fn chebyshev_type_poly(n: u64, x: f64) -> f64 {
    let nf = n as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..n {
        let jf = j as f64;
        term *= (nf + jf) * (jf - nf) / ((0.5 + jf) * (jf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// `(2^{3/2}/pi) int_0^t cos(l s) (cosh 2t - cosh 2s)^{-1/2} 2F1(|n|,-|n|;1/2;x(s)) ds`
/// with `s = t - u^2`, which removes the endpoint singularity.
pub fn phi_nn_integral_rep(ktype: KType, lambda: Complex64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("integral representation needs t > 0, got {t}")));
    }
    let n = ktype.abs_n();
    let root = t.sqrt();
    let phase = lambda.re.abs() * t;
    let panels = 4 + (phase / 6.0).ceil() as usize + 2 * n as usize;
    let pts = points_on_breaks(&uniform_breaks(0.0, root, panels), 32);
    let cosh_t = t.cosh();
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, w) in pts {
        let u2 = u * u;
        let s = t - u2;
        let big = 2.0 * t - u2;
        // 1/sqrt(2 sinh(big)) written with a decaying exponential
        let inv_sqrt_big = (-0.5 * big).exp() / (1.0 - (-2.0 * big).exp()).sqrt();
        let sinhc = if u2 < 1e-4 { 1.0 + u2 * u2 / 6.0 } else { u2.sinh() / u2 };
        let jac = 2.0 * inv_sqrt_big / sinhc.sqrt();
        let x = ((t + s) / 2.0).sinh() * ((t - s) / 2.0).sinh() / cosh_t;
        let poly = chebyshev_type_poly(n, x);
        acc += (lambda * s).cos() * (w * jac * poly);
    }
    let v = acc * (2f64.powf(1.5) / std::f64::consts::PI);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::non_finite(
            "integral representation",
            format!("lambda={lambda}, t={t}"),
        ));
    }
    Ok(v)
}

/// Right-hand side of the radial ODE `f'' = -2 coth(2t) f' - (n^2 sech^2 t + l^2 + 1) f`.
fn ode_rhs(n2: f64, l2p1: Complex64, t: f64, y: [Complex64; 2]) -> [Complex64; 2] {
    let sech = 1.0 / t.cosh();
    let coth2 = 1.0 / (2.0 * t).tanh();
    [y[1], -2.0 * coth2 * y[1] - (l2p1 + n2 * sech * sech) * y[0]]
}

/// Shooting solution of the radial Casimir ODE at the requested radii.
///
/// Starts at `t0 = 1e-3` from the Taylor seed `f = 1 + alpha t^2`,
/// `alpha = -(n^2 + lambda^2 + 1)/4`, and integrates with classical RK4 using
/// steps `min(1e-3, t/20)`.
pub fn phi_nn_ode(ktype: KType, lambda: Complex64, targets: &[f64]) -> Result<Vec<Complex64>> {
    const T0: f64 = 1e-3;
    const H_MAX: f64 = 1e-3;
    let n2 = (ktype.n * ktype.n) as f64;
    let l2p1 = lambda * lambda + 1.0;
    let alpha = -(l2p1 + n2) / 4.0;
    let mut order: Vec<(usize, f64)> = targets.iter().map(|t| t.abs()).enumerate().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = vec![Complex64::new(0.0, 0.0); targets.len()];
    let mut t = T0;
    let mut y = [1.0 + alpha * T0 * T0, alpha * 2.0 * T0];
    for (idx, target) in order {
        if target < T0 {
            out[idx] = 1.0 + alpha * target * target;
            continue;
        }
        while t < target {
            let h = (H_MAX.min(t / 20.0)).min(target - t);
            let k1 = ode_rhs(n2, l2p1, t, y);
            let mid1 = [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)];
            let k2 = ode_rhs(n2, l2p1, t + h / 2.0, mid1);
            let mid2 = [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)];
            let k3 = ode_rhs(n2, l2p1, t + h / 2.0, mid2);
            let end = [y[0] + k3[0] * h, y[1] + k3[1] * h];
            let k4 = ode_rhs(n2, l2p1, t + h, end);
            for c in 0..2 {
                y[c] += (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (h / 6.0);
            }
            t += h;
            if target - t < 1e-14 {
                t = target;
            }
        }
        out[idx] = y[0];
    }
    Ok(out)
}

/// Max over the grid of `|f''/4 + coth(2t) f'/2 + n^2 f/(4 cosh^2 t) + (l^2+1) f/4|`
/// with centred differences of step `h` applied to [`phi_nn`].
pub fn phi_nn_ode_residual(ktype: KType, lambda: Complex64, t_grid: &[f64], h: f64) -> Result<f64> {
    let n2 = (ktype.n * ktype.n) as f64;
    let mut worst = 0.0f64;
    for &t in t_grid {
        if t - h <= 0.0 {
            return Err(Error::domain(format!("grid point {t} too close to 0 for step {h}")));
        }
        let fm = phi_nn(ktype, lambda, t - h)?;
        let f0 = phi_nn(ktype, lambda, t)?;
        let fp = phi_nn(ktype, lambda, t + h)?;
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        let d1 = (fp - fm) / (2.0 * h);
        let res = d2 / 4.0
            + d1 / (2.0 * (2.0 * t).tanh())
            + f0 * (n2 / (4.0 * t.cosh().powi(2)))
            + f0 * (lambda * lambda + 1.0) / 4.0;
        worst = worst.max(res.norm());
    }
    Ok(worst)
}

/// `psi^{n,n}_{ik}(a_t) = phi^{n,n}_{i|k|}(a_t)`, real valued.
pub fn psi_discrete(k: i64, ktype: KType, t: f64) -> Result<f64> {
    check_z_membership(k, ktype)?;
    let v = phi_nn(ktype, Complex64::new(0.0, k.unsigned_abs() as f64), t)?;
    if v.im.abs() > 1e-10 * v.re.abs().max(1e-300) && v.im.abs() > 1e-10 {
        return Err(Error::PrecisionLoss {
            context: "psi_discrete".into(),
            detail: format!("imaginary part {} not negligible", v.im),
            partial_re: v.re,
            partial_im: v.im,
        });
    }
    Ok(v.re)
}

/// `e^{in theta1} phi(a_r) e^{in theta2}` for `g = k_theta1 a_r k_theta2`.
pub fn phi_nn_group(ktype: KType, lambda: Complex64, g: &GroupElement) -> Result<Complex64> {
    let cc = cartan_decompose(g);
    let phase = Complex64::from_polar(1.0, ktype.n as f64 * (cc.theta1 + cc.theta2));
    Ok(phase * phi_nn(ktype, lambda, cc.r)?)
}

/// Both sides of the K-integral identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// `| int_K phi(y k x) e^{-in theta} dtheta/2pi - phi(y) phi(x) |` by the trapezoid rule.
pub fn verify_functional_identity(
    ktype: KType,
    lambda: f64,
    x: &GroupElement,
    y: &GroupElement,
    k_points: usize,
) -> Result<IdentityCheck> {
    if k_points < 64 {
        return Err(Error::domain(format!("need at least 64 circle points, got {k_points}")));
    }
    let lam = Complex64::new(lambda, 0.0);
    let n = ktype.n as f64;
    let mut lhs = Complex64::new(0.0, 0.0);
    for theta in circle_nodes(k_points) {
        let g = *y * GroupElement::k(theta) * *x;
        lhs += phi_nn_group(ktype, lam, &g)? * Complex64::from_polar(1.0, -n * theta);
    }
    lhs /= k_points as f64;
    let rhs = phi_nn_group(ktype, lam, y)? * phi_nn_group(ktype, lam, x)?;
    Ok(IdentityCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// `phi(a_t) (Delta(t)/t)^{1/2} / J0norm(lambda t)`, whose t -> 0 limit is the constant b_0.
pub fn bessel_leading_ratio(ktype: KType, lambda: f64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::domain("t must be positive"));
    }
    let phi = phi_nn(ktype, Complex64::new(lambda, 0.0), t)?;
    let w = (crate::group_geometry::delta(t) / t).sqrt();
    Ok(phi * w / bessel_jnorm(BesselOrder::Zero, lambda * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_and_symmetry() {
        for n in [-3, 0, 2, 5] {
            assert_eq!(phi_nn(KType::new(n), c(0.7, 0.1), 0.0).unwrap(), c(1.0, 0.0));
        }
        let k = KType::new(2);
        let a = phi_nn(k, c(1.3, 0.0), 0.7).unwrap();
        let b = phi_nn(k, c(-1.3, 0.0), 0.7).unwrap();
        let d = phi_nn(KType::new(-2), c(1.3, 0.0), -0.7).unwrap();
        assert!((a - b).norm() < 1e-13 && (a - d).norm() < 1e-13);
    }

    #[test]
    fn integral_rep_examples() {
        let z = phi_nn_integral_rep(KType::new(0), c(0.0, 0.0), 1.0).unwrap();
        assert!((z - phi_nn(KType::new(0), c(0.0, 0.0), 1.0).unwrap()).norm() < 1e-6);
        let v = phi_nn_integral_rep(KType::new(2), c(1.5, 0.0), 0.8).unwrap();
        assert!((v - phi_nn(KType::new(2), c(1.5, 0.0), 0.8).unwrap()).norm() < 1e-6);
        assert!(phi_nn_integral_rep(KType::new(1), c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn polynomial_matches_cosine_form() {
        for n in 0..6u64 {
            for x in [0.0f64, 0.1, 0.33, 0.49] {
                let want = (2.0 * n as f64 * x.sqrt().asin()).cos();
                assert!((chebyshev_type_poly(n, x) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn z_membership() {
        assert!(check_z_membership(1, KType::new(2)).is_ok());
        assert!(check_z_membership(2, KType::new(3)).is_ok());
        assert!(check_z_membership(2, KType::new(4)).is_err());
        assert!(check_z_membership(2, KType::new(1)).is_err());
        assert!(check_z_membership(-1, KType::new(-2)).is_ok());
        assert!(check_z_membership(-1, KType::new(2)).is_err());
        assert!(check_z_membership(0, KType::new(2)).is_err());
    }

    #[test]
    fn psi_is_power_of_sech_for_minimal_n() {
        for k in 1..4i64 {
            for t in [0.0, 0.5, 3.0, 9.0] {
                let v = psi_discrete(k, KType::new(k + 1), t).unwrap();
                let want = t.cosh().powi(-(k as i32 + 1));
                assert!((v - want).abs() <= 1e-13 * want);
            }
        }
    }

    #[test]
    fn group_extension() {
        let k = KType::new(3);
        assert_eq!(
            phi_nn_group(k, c(0.4, 0.0), &GroupElement::identity()).unwrap(),
            c(1.0, 0.0)
        );
        let th = 0.37;
        let v = phi_nn_group(k, c(0.4, 0.0), &GroupElement::k(th)).unwrap();
        assert!((v - Complex64::from_polar(1.0, 3.0 * th)).norm() < 1e-13);
    }

    #[test]
    fn identity_check_trivial() {
        let id = GroupElement::identity();
        let r = verify_functional_identity(KType::new(2), 1.0, &id, &id, 64).unwrap();
        assert!(r.residual < 1e-12);
        assert!(verify_functional_identity(KType::new(2), 1.0, &id, &id, 8).is_err());
    }

    #[test]
    fn strip_membership() {
        assert!(SpectralPoint::new(c(3.0, 0.3), Some(1.5)).is_ok());
        assert!(SpectralPoint::new(c(3.0, 0.4), Some(1.5)).is_err());
        assert!(SpectralPoint::new(c(3.0, 5.0), None).is_ok());
    }
}
