//! The c-function, its reciprocal on strips and the Plancherel density.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_functions::log_gamma;

/// Distance below which a Gamma argument counts as sitting on a pole.
pub const POLE_PROXIMITY: f64 = 1e-6;

/// A c-function value with its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CFunctionValue {
    pub value: Complex64,
    pub lambda: Complex64,
    pub n: i64,
}

/// Distance of `z` to the nearest nonpositive integer, and that integer's order m (z ~ -m).
fn pole_distance(z: Complex64) -> (f64, i64) {
    let m = (-z.re).round().max(0.0);
    let d = (z - Complex64::new(-m, 0.0)).norm();
    (d, m as i64)
}

fn factorial(m: i64) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// `prod Gamma(num) / prod Gamma(den)`, all arguments sharing one spectral shift.
///
/// Poles within [`POLE_PROXIMITY`] are counted per side: an excess in the numerator
/// is an error, an excess in the denominator gives a zero, and exact balanced
/// poles are resolved by `Gamma(-m + d) ~ (-1)^m / (m! d)`.
fn gamma_ratio(num: &[(Complex64, &str)], den: &[(Complex64, &str)]) -> Result<Complex64> {
    let near = |args: &[(Complex64, &str)]| -> Vec<(usize, i64, f64)> {
        args.iter()
            .enumerate()
            .filter_map(|(i, (z, _))| {
                let (d, m) = pole_distance(*z);
                (d < POLE_PROXIMITY).then_some((i, m, d))
            })
            .collect()
    };
    let num_near = near(num);
    let den_near = near(den);
    if num_near.len() > den_near.len() {
        let (i, _, _) = num_near[0];
        return Err(Error::Pole {
            factor: format!("Gamma({}) in numerator", num[i].1),
            arg: format!("{}", num[i].0),
            order: (num_near.len() - den_near.len()) as u32,
        });
    }
    let exact = num_near.iter().chain(&den_near).any(|&(_, _, d)| d == 0.0);
    if !exact {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, _) in num {
            acc += log_gamma(*z)?;
        }
        for (z, _) in den {
            acc -= log_gamma(*z)?;
        }
        return Ok(acc.exp());
    }
    if den_near.len() > num_near.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    let mut side = |args: &[(Complex64, &str)], near: &[(usize, i64, f64)], s: f64| -> Result<()> {
        for (i, (z, _)) in args.iter().enumerate() {
            if let Some(&(_, m, _)) = near.iter().find(|(j, _, _)| *j == i) {
                if m % 2 == 1 {
                    sign = -sign;
                }
                acc -= s * factorial(m).ln();
            } else {
                acc += s * log_gamma(*z)?;
            }
        }
        Ok(())
    };
    side(num, &num_near, 1.0)?;
    side(den, &den_near, -1.0)?;
    Ok(sign * acc.exp())
}

type GammaArgs = [(Complex64, &'static str); 2];

fn c_args(n: i64, lambda: Complex64) -> (GammaArgs, GammaArgs) {
    let i = Complex64::i();
    let na = n.unsigned_abs() as f64;
    let il = i * lambda;
    (
        [(il / 2.0, "i lambda/2"), ((1.0 + il) / 2.0, "(1+i lambda)/2")],
        [
            ((1.0 + il - na) / 2.0, "(1+i lambda-|n|)/2"),
            ((1.0 + il + na) / 2.0, "(1+i lambda+|n|)/2"),
        ],
    )
}

/// `c(lambda) = Gamma(i l/2) Gamma((1+i l)/2) / (sqrt(pi) Gamma((1+i l-|n|)/2) Gamma((1+i l+|n|)/2))`.
pub fn c_nn(n: i64, lambda: Complex64) -> Result<Complex64> {
    let (num, den) = c_args(n, lambda);
    Ok(gamma_ratio(&num, &den)? / PI.sqrt())
}

/// `c(lambda)` wrapped with its arguments.
pub fn c_value(n: i64, lambda: Complex64) -> Result<CFunctionValue> {
    Ok(CFunctionValue {
        value: c_nn(n, lambda)?,
        lambda,
        n,
    })
}

/// `1 / c(-lambda)`, computed as the inverted Gamma quotient so zeros of `c` surface as poles here.
pub fn c_inv_minus(n: i64, lambda: Complex64) -> Result<Complex64> {
    let (num, den) = c_args(n, -lambda);
    Ok(gamma_ratio(&den, &num)? * PI.sqrt())
}

/// `1 / c(lambda)`.
pub fn c_inv(n: i64, lambda: Complex64) -> Result<Complex64> {
    c_inv_minus(n, -lambda)
}

/// `|c(lambda)|^-2` for real lambda; zero where `c` has a pole.
pub fn plancherel_density(n: i64, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must be finite, got {lambda}")));
    }
    let v = match c_nn(n, Complex64::new(lambda, 0.0)) {
        Ok(c) => 1.0 / c.norm_sqr(),
        Err(Error::Pole { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::non_finite(
            "plancherel_density",
            format!("n={n}, lambda={lambda}"),
        ));
    }
    Ok(v)
}

/// Closed forms of the density: `(l pi/2) tanh(l pi/2)` for n even, `|(l pi/2) coth(l pi/2)|` for n odd.
pub fn density_closed_form(n: i64, lambda: f64) -> f64 {
    let x = 0.5 * PI * lambda;
    if n % 2 == 0 {
        x * x.tanh()
    } else if x == 0.0 {
        1.0
    } else {
        (x / x.tanh()).abs()
    }
}

/// The step factor `p_k(lambda) = (lambda - ik) / (lambda + ik)`.
pub fn p_factor(k: i64, lambda: Complex64) -> Complex64 {
    let ik = Complex64::new(0.0, k as f64);
    (lambda - ik) / (lambda + ik)
}
