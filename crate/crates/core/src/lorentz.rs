//! Distribution functions and Lorentz quasi-norms of monotone radial profiles.
//!
//! The weak quasi-norm is `sup_alpha alpha d_f(alpha)^{1/p}`; divergence is
//! decided from the fitted power-law exponent of that quantity as alpha -> 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_geometry::{delta, delta_antiderivative};
use crate::quadrature::PanelSpec;
use crate::transforms::RadialProfile;

/// Exponent tolerance separating bounded from growing power laws.
pub const SLOPE_TOL: f64 = 0.01;
const ALPHAS_PER_DECADE: usize = 20;

/// Samples of `alpha -> d_f(alpha)` with alpha decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub alphas: Vec<f64>,
    pub d_values: Vec<f64>,
}

/// A quasi-norm value or a detected divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LorentzNorm {
    Finite(f64),
    Infinite { slope: f64 },
}

impl LorentzNorm {
    pub fn is_finite(&self) -> bool {
        matches!(self, LorentzNorm::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            LorentzNorm::Finite(v) => *v,
            LorentzNorm::Infinite { .. } => f64::INFINITY,
        }
    }
}

fn check_monotone(f: &RadialProfile) -> Result<Vec<f64>> {
    let mags: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    for (i, w) in mags.windows(2).enumerate() {
        if w[1] > w[0] * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::domain(format!(
                "|f| increases between t={} and t={}; only monotone profiles are supported",
                f.t_grid[i],
                f.t_grid[i + 1]
            )));
        }
    }
    Ok(mags)
}

/// Radius where |f| drops to alpha, by bisection on the interpolant.
fn level_radius(f: &RadialProfile, mags: &[f64], alpha: f64) -> f64 {
    let j = mags.partition_point(|m| *m > alpha);
    if j == 0 {
        return f.t_grid[0];
    }
    if j == mags.len() {
        return f.support_end();
    }
    let (mut lo, mut hi) = (f.t_grid[j - 1], f.t_grid[j]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f.eval(mid).norm() > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `d_f(alpha) = int_0^{t(alpha)} Delta(t) dt` for a profile with nonincreasing |f|.
pub fn distribution_function(f: &RadialProfile, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let mags = check_monotone(f)?;
    Ok(distribution_with(f, &mags, alpha))
}

fn distribution_with(f: &RadialProfile, mags: &[f64], alpha: f64) -> f64 {
    if alpha >= mags[0] {
        return 0.0;
    }
    delta_antiderivative(level_radius(f, mags, alpha))
}

/// Log-spaced alphas from the profile maximum down to its smallest sample.
pub fn distribution_curve(f: &RadialProfile) -> Result<DistributionCurve> {
    let mags = check_monotone(f)?;
    let alphas = alpha_grid(&mags);
    let d_values = alphas.iter().map(|&a| distribution_with(f, &mags, a)).collect();
    Ok(DistributionCurve { alphas, d_values })
}

fn alpha_grid(mags: &[f64]) -> Vec<f64> {
    let top = mags[0];
    let bottom = mags
        .iter()
        .copied()
        .filter(|m| *m > 0.0)
        .fold(f64::INFINITY, f64::min)
        .max(top * 1e-300);
    if !(top > 0.0) {
        return Vec::new();
    }
    let decades = (top / bottom).log10();
    let count = ((decades * ALPHAS_PER_DECADE as f64).ceil() as usize).max(2);
    (0..count)
        .map(|i| top * 10f64.powf(-decades * (i as f64 + 0.5) / count as f64))
        .collect()
}

/// Least-squares slope of `log y` against `log alpha` over the lowest three sampled decades.
fn small_alpha_slope(alphas: &[f64], ys: &[f64]) -> f64 {
    let a_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = a_min;
    let hi = lo * 1e3;
    let pts: Vec<(f64, f64)> = alphas
        .iter()
        .zip(ys)
        .filter(|(a, y)| **a >= lo && **a <= hi && **y > 0.0)
        .map(|(a, y)| (a.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), (x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx).powi(2))
    });
    num / den
}

/// Weak quasi-norm `sup_alpha alpha d_f(alpha)^{1/p}`.
pub fn lorentz_weak_norm(f: &RadialProfile, p: f64) -> Result<LorentzNorm> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::domain(format!("p must lie in (0, 2], got {p}")));
    }
    let curve = distribution_curve(f)?;
    if curve.alphas.is_empty() {
        return Ok(LorentzNorm::Finite(0.0));
    }
    let ys: Vec<f64> = curve
        .alphas
        .iter()
        .zip(&curve.d_values)
        .map(|(a, d)| a * d.powf(1.0 / p))
        .collect();
    let slope = small_alpha_slope(&curve.alphas, &ys);
    if slope < -SLOPE_TOL {
        return Ok(LorentzNorm::Infinite { slope });
    }
    Ok(LorentzNorm::Finite(ys.iter().copied().fold(0.0, f64::max)))
}

/// `p^{1/q} (int_0^inf alpha^q d_f(alpha)^{q/p} dalpha/alpha)^{1/q}` by quadrature in log alpha.
pub fn lorentz_pq_norm(f: &RadialProfile, p: f64, q: f64) -> Result<LorentzNorm> {
    if !(p > 0.0) || !(q > 0.0) || !q.is_finite() {
        return Err(Error::domain(format!("need p > 0 and finite q > 0, got p={p}, q={q}")));
    }
    let mags = check_monotone(f)?;
    let curve = distribution_curve(f)?;
    if curve.alphas.is_empty() {
        return Ok(LorentzNorm::Finite(0.0));
    }
    let ys: Vec<f64> = curve
        .alphas
        .iter()
        .zip(&curve.d_values)
        .map(|(a, d)| a * d.powf(1.0 / p))
        .collect();
    let slope = small_alpha_slope(&curve.alphas, &ys);
    if slope * q <= SLOPE_TOL {
        return Ok(LorentzNorm::Infinite { slope });
    }
    let top = mags[0];
    let bottom = *curve.alphas.last().expect("non-empty");
    let pts = PanelSpec::new(16, 0.5).points(bottom.ln(), top.ln());
    let mut acc = 0.0;
    for (x, w) in pts {
        let a = x.exp();
        let d = distribution_with(f, &mags, a);
        acc += w * (a * d.powf(1.0 / p)).powf(q);
    }
    // power-law tail below the smallest sample
    let y_bottom = bottom * distribution_with(f, &mags, bottom).powf(1.0 / p);
    acc += y_bottom.powf(q) / (slope * q);
    Ok(LorentzNorm::Finite(p.powf(1.0 / q) * acc.powf(1.0 / q)))
}

/// `(int_0^inf |h|^q Delta dt)^{1/q}` with an exponential tail fitted beyond `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqEstimate {
    pub value: f64,
    pub tail_rate: f64,
    pub finite: bool,
}

pub fn lq_norm<F: Fn(f64) -> f64>(h: F, q: f64, t_max: f64) -> Result<LqEstimate> {
    if !(q >= 1.0) || !(t_max > 1.0) {
        return Err(Error::domain(format!(
            "need q >= 1 and t_max > 1, got q={q}, t_max={t_max}"
        )));
    }
    let g = |t: f64| h(t).abs().powf(q) * delta(t);
    let (g1, g0) = (g(t_max), g(t_max - 1.0));
    let tail_rate = if g1 > 0.0 && g0 > 0.0 {
        (g1 / g0).ln()
    } else {
        f64::NEG_INFINITY
    };
    let finite = tail_rate < -1e-3;
    let mut acc = 0.0;
    for (t, w) in PanelSpec::default().points(0.0, t_max) {
        let v = g(t);
        if !v.is_finite() {
            return Err(Error::non_finite("L^q integrand", format!("t={t}")));
        }
        acc += w * v;
    }
    if finite && tail_rate.is_finite() {
        acc += g1 / -tail_rate;
    }
    Ok(LqEstimate {
        value: if finite { acc.powf(1.0 / q) } else { f64::INFINITY },
        tail_rate,
        finite,
    })
}

/// Scan p on a grid and return the smallest p with a finite weak norm.
pub fn weak_boundary_scan(f: &RadialProfile, p_grid: &[f64]) -> Result<Option<f64>> {
    for &p in p_grid {
        if lorentz_weak_norm(f, p)?.is_finite() {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherical::KType;
    use num_complex::Complex64;

    fn profile(k: f64) -> RadialProfile {
        let grid: Vec<f64> = (0..=1400).map(|i| i as f64 * 0.01).collect();
        RadialProfile::from_fn(KType::new(0), grid, |t| Complex64::new((-(k + 1.0) * t).exp(), 0.0)).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let f = profile(1.0);
        assert_eq!(distribution_function(&f, 1.5).unwrap(), 0.0);
        for a in [1e-4, 1e-6, 1e-8] {
            let d = distribution_function(&f, a).unwrap();
            let band = d * a.powf(2.0 / 2.0);
            assert!((0.4..0.6).contains(&band), "{band}");
        }
        let t0 = 0.7;
        let step = RadialProfile::from_fn(KType::new(0), (0..=200).map(|i| i as f64 * 0.01).collect(), |t| {
            Complex64::new(if t <= t0 { 1.0 } else { (-(t - t0) * 200.0).exp() }, 0.0)
        })
        .unwrap();
        let d = distribution_function(&step, 0.5).unwrap();
        assert!((d - (2.0 * t0).cosh() + 1.0).abs() < 0.05 * d);
    }

    #[test]
    fn rejects_non_monotone() {
        let f = RadialProfile::from_fn(KType::new(0), (0..50).map(|i| i as f64 * 0.1).collect(), |t| {
            Complex64::new(t.sin().abs(), 0.0)
        })
        .unwrap();
        assert!(distribution_function(&f, 0.1).is_err());
    }

    #[test]
    fn weak_norm_examples() {
        let f = profile(1.0);
        assert!(lorentz_weak_norm(&f, 1.0).unwrap().is_finite());
        assert!(!lorentz_weak_norm(&f, 0.9).unwrap().is_finite());
        let a = lorentz_weak_norm(&f, 1.5).unwrap().value();
        let g = RadialProfile::new(f.ktype, f.t_grid.clone(), f.values.iter().map(|v| v * 3.0).collect()).unwrap();
        let b = lorentz_weak_norm(&g, 1.5).unwrap().value();
        assert!((b - 3.0 * a).abs() < 0.02 * b);
    }

    #[test]
    fn pq_examples() {
        let f = profile(1.0);
        assert!(!lorentz_pq_norm(&f, 1.0, 2.0).unwrap().is_finite());
        assert!(lorentz_pq_norm(&f, 1.5, 2.0).unwrap().is_finite());
        let z = RadialProfile::from_fn(KType::new(0), (0..10).map(|i| i as f64).collect(), |_| {
            Complex64::new(0.0, 0.0)
        })
        .unwrap();
        assert_eq!(lorentz_pq_norm(&z, 1.0, 2.0).unwrap(), LorentzNorm::Finite(0.0));
    }

    #[test]
    fn lq_of_exponential() {
        // int e^{-4t} 2 sinh 2t = 1/3
        let e = lq_norm(|t| (-2.0 * t).exp(), 2.0, 20.0).unwrap();
        assert!(e.finite && (e.value * e.value - 1.0 / 3.0).abs() < 1e-9);
        assert!(!lq_norm(|t| (-0.5 * t).exp(), 2.0, 20.0).unwrap().finite);
    }
}
