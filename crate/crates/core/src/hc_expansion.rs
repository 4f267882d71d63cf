//! Harish-Chandra series of the spherical functions and of the discrete-series coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plancherel::c_nn;
use crate::spherical::{check_z_membership, KType};

pub const DEFAULT_ORDER: usize = 30;
pub const MAX_ORDER: usize = 200;
/// `hc_coefficients` rejects lambda this close to iZ.
pub const LATTICE_TOL: f64 = 1e-9;
/// `phi_global_series` refuses lambda this close to iZ.
pub const REFUSAL_TOL: f64 = 1e-3;

/// Fitted bound `|a_k| <= constant * k^exponent` over the computed coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub exponent: f64,
    pub constant: f64,
}

/// Coefficients `a_0..a_K` of the series `1 + sum a_k e^{-2kt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcExpansion {
    pub n: i64,
    pub lambda: Complex64,
    pub coeffs: Vec<Complex64>,
    pub growth: GrowthWitness,
}

impl HcExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a(lambda, t) = sum_{k>=1} a_k e^{-2kt}`.
    pub fn tail_sum(&self, t: f64) -> Complex64 {
        let q = (-2.0 * t).exp();
        // Horner in q, then drop the constant term
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.coeffs.iter().skip(1).rev() {
            acc = acc * q + a;
        }
        acc * q
    }
}

/// Distance from `lambda` to the lattice iZ.
pub fn lattice_distance(lambda: Complex64) -> f64 {
    let k = lambda.im.round();
    (lambda - Complex64::new(0.0, k)).norm()
}

/// The recursion itself; fails only on an exactly vanishing denominator `k - i lambda`.
pub(crate) fn recursion(n: i64, lambda: Complex64, order: usize) -> Result<Vec<Complex64>> {
    let i = Complex64::i();
    let n2 = (n * n) as f64;
    let mut a = Vec::with_capacity(order + 1);
    a.push(Complex64::new(1.0, 0.0));
    for k in 1..=order {
        let kf = k as f64;
        let denom = kf * (kf - i * lambda);
        if denom.norm() < 1e-12 {
            return Err(Error::SingularDenominator(format!(
                "k - i lambda = 0 at k={k}, lambda={lambda}"
            )));
        }
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            let jf = j as f64;
            if j % 2 == 1 {
                s += a[k - j] * (jf * n2);
            } else {
                s -= a[k - j] * (1.0 - i * lambda + 2.0 * kf - 2.0 * jf + jf * n2);
            }
        }
        a.push(-s / denom);
    }
    Ok(a)
}

fn fit_growth(coeffs: &[Complex64]) -> GrowthWitness {
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .skip((coeffs.len() / 2).max(1))
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(k, a)| ((k as f64).ln(), a.norm().ln()))
        .collect();
    if pts.len() < 2 {
        let c = coeffs.iter().skip(1).map(|a| a.norm()).fold(0.0, f64::max);
        return GrowthWitness {
            exponent: 0.0,
            constant: c,
        };
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), (x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx).powi(2))
    });
    let exponent = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
    let constant = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a.norm() / (k as f64).powf(exponent))
        .fold(0.0, f64::max);
    GrowthWitness { exponent, constant }
}

/// Coefficients `a_k^{n,n}(lambda)`, k = 0..=order, from the three-term-type recursion.
pub fn hc_coefficients(n: i64, lambda: Complex64, order: usize) -> Result<HcExpansion> {
    if order > MAX_ORDER {
        return Err(Error::domain(format!("truncation order {order} exceeds {MAX_ORDER}")));
    }
    if lattice_distance(lambda) < LATTICE_TOL {
        return Err(Error::SingularDenominator(format!("lambda={lambda} lies on iZ")));
    }
    build(n, lambda, order)
}

fn build(n: i64, lambda: Complex64, order: usize) -> Result<HcExpansion> {
    let coeffs = recursion(n, lambda, order)?;
    let growth = fit_growth(&coeffs);
    Ok(HcExpansion {
        n,
        lambda,
        coeffs,
        growth,
    })
}

/// Size of the first omitted term relative to the retained series, `e^{-2(K+1)t}`.
pub fn truncation_error_model(t: f64, order: usize) -> f64 {
    (-2.0 * (order as f64 + 1.0) * t).exp()
}

fn combine(
    t: f64,
    lambda: Complex64,
    c_plus: Complex64,
    c_minus: Complex64,
    a_plus: Complex64,
    a_minus: Complex64,
) -> Complex64 {
    let i = Complex64::i();
    let e_plus = (i * lambda * t - t).exp();
    let e_minus = (-i * lambda * t - t).exp();
    e_plus * c_plus * (1.0 + a_plus) + e_minus * c_minus * (1.0 + a_minus)
}

/// `e^{-t}[e^{i l t} c(l)(1 + a(l,t)) + e^{-i l t} c(-l)(1 + a(-l,t))]` truncated at `order`.
pub fn phi_global_series(n: i64, lambda: Complex64, t: f64, order: usize) -> Result<Complex64> {
    if t < 0.5 {
        return Err(Error::domain(format!("global series needs t >= 1/2, got {t}")));
    }
    if lattice_distance(lambda) < REFUSAL_TOL {
        return Err(Error::domain(format!(
            "lambda={lambda} within {REFUSAL_TOL} of iZ; use the direct evaluation"
        )));
    }
    let plus = hc_coefficients(n, lambda, order)?;
    let minus = hc_coefficients(n, -lambda, order)?;
    Ok(combine(
        t,
        lambda,
        c_nn(n, lambda)?,
        c_nn(n, -lambda)?,
        plus.tail_sum(t),
        minus.tail_sum(t),
    ))
}

/// `1 + a(lambda, t)` summed until terms fall below 1e-17 of the running sum.
pub(crate) fn one_plus_a(n: i64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let i = Complex64::i();
    let n2 = (n * n) as f64;
    let q = (-2.0 * t).exp();
    let mut a = vec![Complex64::new(1.0, 0.0)];
    let mut total = Complex64::new(1.0, 0.0);
    let mut qk = 1.0;
    let mut quiet = 0;
    for k in 1..=MAX_ORDER {
        let kf = k as f64;
        let denom = kf * (kf - i * lambda);
        if denom.norm() < 1e-12 {
            return Err(Error::SingularDenominator(format!("k - i lambda = 0 at k={k}")));
        }
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            let jf = j as f64;
            if j % 2 == 1 {
                s += a[k - j] * (jf * n2);
            } else {
                s -= a[k - j] * (1.0 - i * lambda + 2.0 * kf - 2.0 * jf + jf * n2);
            }
        }
        let ak = -s / denom;
        a.push(ak);
        qk *= q;
        let term = ak * qk;
        total += term;
        if term.norm() < 1e-17 * total.norm() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::PrecisionLoss {
        context: "Harish-Chandra series".into(),
        detail: format!("no convergence in {MAX_ORDER} terms at t={t}"),
        partial_re: total.re,
        partial_im: total.im,
    })
}

/// Adaptive global series used by the spherical-function dispatcher.
pub(crate) fn phi_global_adaptive(n: i64, lambda: Complex64, t: f64) -> Result<Complex64> {
    let one_plus = one_plus_a(n, lambda, t)?;
    let one_minus = one_plus_a(n, -lambda, t)?;
    Ok(combine(
        t,
        lambda,
        c_nn(n, lambda)?,
        c_nn(n, -lambda)?,
        one_plus - 1.0,
        one_minus - 1.0,
    ))
}

/// `d_l = c(i|k|) a_l(i|k|)`, with `c(i|k|)` the finite limit through cancelling Gamma poles.
pub fn psi_coefficients(k: i64, n: i64, order: usize) -> Result<Vec<f64>> {
    check_z_membership(k, KType::new(n))?;
    let lam = Complex64::new(0.0, k.unsigned_abs() as f64);
    let c = c_nn(n, lam)?;
    let a = recursion(n, lam, order)?;
    Ok(a.iter().map(|ak| (c * ak).re).collect())
}

/// `2 e^{-(1+|k|)t} sum_{l<=L} d_l e^{-2lt}`.
pub fn psi_series(k: i64, n: i64, t: f64, order: usize) -> Result<f64> {
    if t < 0.5 {
        return Err(Error::domain(format!("psi series needs t >= 1/2, got {t}")));
    }
    let d = psi_coefficients(k, n, order)?;
    let q = (-2.0 * t).exp();
    let s = d.iter().rev().fold(0.0, |acc, dl| acc * q + dl);
    Ok(2.0 * (-(1.0 + k.unsigned_abs() as f64) * t).exp() * s)
}

type MemoKey = (i64, u64, u64, usize);

/// Thread-safe memo of coefficient tables keyed by `(n, lambda, order)`.
#[derive(Debug, Default)]
pub struct HcMemo {
    table: Mutex<HashMap<MemoKey, Arc<HcExpansion>>>,
}

impl HcMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: i64, lambda: Complex64, order: usize) -> Result<Arc<HcExpansion>> {
        let key = (n, lambda.re.to_bits(), lambda.im.to_bits(), order);
        if let Some(hit) = self.table.lock().expect("memo poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        // computed outside the lock; a racing insert stores an identical value
        let fresh = Arc::new(hc_coefficients(n, lambda, order)?);
        let mut guard = self.table.lock().expect("memo poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(fresh)))
    }

    pub fn len(&self) -> usize {
        self.table.lock().expect("memo poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
