//! Pseudo-differential operators with (n,n)-type symbols.
//!
//! A symbol is a function `sigma(r, lambda)` of the Cartan radius `r = x^+` and
//! a complex spectral parameter, optionally multiplied by `e^{-eps lambda^2}`.
//! The operator acts on the spectral side; its kernels are built from the same
//! inversion formula and share [`INVERSION_CALIBRATION`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_geometry::{cartan_decompose, delta, nbar_cartan_radius, GroupElement};
use crate::hc_expansion::one_plus_a;
use crate::plancherel::{c_inv_minus, plancherel_density};
use crate::quadrature::{pairwise_sum, points_on_breaks, uniform_breaks};
use crate::special_functions::{bessel_j, BesselOrder};
use crate::spherical::{gamma_p, phi_nn, psi_discrete, KType};
use crate::transforms::{
    discrete_transform, forward, gamma_set, inverse_transform, inversion_at, lambda_weights, RadialProfile,
    SpectralData, TransformConfig,
};
use crate::INVERSION_CALIBRATION;

/// Default Gaussian regularisation for kernel-side computations.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Tolerance of the sampled evenness check.
pub const EVENNESS_TOL: f64 = 1e-10;

/// Distance kept between a shifted contour and a pole of `c(-lambda)^-1`.
pub const INDENT_RADIUS: f64 = 0.05;

pub type SymbolFn = Arc<dyn Fn(f64, Complex64) -> Complex64 + Send + Sync>;

/// A symbol `sigma(r, lambda)` with its class parameters.
#[derive(Clone)]
pub struct SymbolDescriptor {
    pub name: String,
    eval: SymbolFn,
    pub m: f64,
    pub rho: f64,
    pub p: f64,
    pub epsilon: f64,
    /// `sigma_B(ik)` for `k` in `Gamma_n`.
    pub discrete_values: BTreeMap<i64, Complex64>,
    /// Whether `eval` ignores `r`; enables kernel caching.
    pub r_independent: bool,
}

impl fmt::Debug for SymbolDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolDescriptor")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("rho", &self.rho)
            .field("p", &self.p)
            .field("epsilon", &self.epsilon)
            .field("discrete_values", &self.discrete_values)
            .field("r_independent", &self.r_independent)
            .finish()
    }
}

impl SymbolDescriptor {
    pub fn new<F>(name: impl Into<String>, m: f64, rho: f64, p: f64, eval: F) -> Self
    where
        F: Fn(f64, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        SymbolDescriptor {
            name: name.into(),
            eval: Arc::new(eval),
            m,
            rho,
            p,
            epsilon: 0.0,
            discrete_values: BTreeMap::new(),
            r_independent: false,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_discrete(mut self, values: BTreeMap<i64, Complex64>) -> Self {
        self.discrete_values = values;
        self
    }

    fn r_free(mut self) -> Self {
        self.r_independent = true;
        self
    }

    /// Fills `sigma_B(ik) = sigma(r0, i|k|)` (unregularised) for every `k` in `Gamma_n`.
    pub fn with_discrete_from_eval(mut self, n: i64, r0: f64) -> Self {
        self.discrete_values = gamma_set(n)
            .into_iter()
            .map(|k| (k, self.eval_raw(r0, Complex64::new(0.0, k.unsigned_abs() as f64))))
            .collect();
        self
    }

    /// `sigma(r, lambda)` without regularisation.
    pub fn eval_raw(&self, r: f64, lambda: Complex64) -> Complex64 {
        (self.eval)(r, lambda)
    }

    /// `sigma(r, lambda) e^{-eps lambda^2}`.
    pub fn eval(&self, r: f64, lambda: Complex64) -> Complex64 {
        let v = (self.eval)(r, lambda);
        if self.epsilon > 0.0 {
            v * (-self.epsilon * lambda * lambda).exp()
        } else {
            v
        }
    }

    /// Checks `sigma(r, lambda) = sigma(r, -lambda)` on the given samples.
    pub fn check_even(&self, r_grid: &[f64], lambdas: &[Complex64]) -> Result<()> {
        for &r in r_grid {
            for &l in lambdas {
                let a = self.eval_raw(r, l);
                let b = self.eval_raw(r, -l);
                if (a - b).norm() > EVENNESS_TOL * (1.0 + a.norm()) {
                    return Err(Error::domain(format!(
                        "symbol {} is not even in lambda at r={r}, lambda={l}: {a} vs {b}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn discrete_for(&self, n: i64) -> Result<BTreeMap<i64, Complex64>> {
        let mut out = BTreeMap::new();
        for k in gamma_set(n) {
            let v = self.discrete_values.get(&k).ok_or_else(|| {
                Error::domain(format!("symbol {} has no discrete value for k={k} (n={n})", self.name))
            })?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::non_finite(
                    format!("sigma_B of symbol {}", self.name),
                    format!("k={k}"),
                ));
            }
            out.insert(k, *v);
        }
        Ok(out)
    }

    fn require_epsilon(&self, what: &str) -> Result<()> {
        if self.epsilon > 0.0 {
            Ok(())
        } else {
            Err(Error::RegularizationRequired(format!(
                "{what} needs epsilon > 0 (symbol {})",
                self.name
            )))
        }
    }
}

/// Named symbols used by tests, examples and the command line.
pub mod builtin {
    use super::*;

    fn lam2(l: Complex64) -> Complex64 {
        l * l
    }

    /// `sigma = c`.
    pub fn constant(c: Complex64) -> SymbolDescriptor {
        SymbolDescriptor::new("constant", 0.0, 1.0, 2.0, move |_, _| c).r_free()
    }

    /// `sigma = e^{-eps lambda^2}`.
    pub fn gaussian(epsilon: f64) -> SymbolDescriptor {
        constant(Complex64::new(1.0, 0.0)).with_epsilon(epsilon)
    }

    /// `(lambda^2 + 1) / (lambda^2 + 4)`.
    pub fn rational_multiplier() -> SymbolDescriptor {
        SymbolDescriptor::new("rational", 0.0, 1.0, 2.0, |_, l| (lam2(l) + 1.0) / (lam2(l) + 4.0)).r_free()
    }

    /// `((lambda^2 + 1) / 4)^{i (r - nu)}`, of order `2 Im nu`.
    pub fn sigma_nu(nu: Complex64) -> SymbolDescriptor {
        let i = Complex64::i();
        SymbolDescriptor::new("sigma_nu", 2.0 * nu.im, 1.0, 2.0, move |r, l| {
            (i * (r - nu) * ((lam2(l) + 1.0) / 4.0).ln()).exp()
        })
    }

    /// `sin(lambda)`: bounded on the real line but without any decay.
    pub fn sin_lambda() -> SymbolDescriptor {
        SymbolDescriptor::new("sin", 0.0, 1.0, 2.0, |_, l| l.sin()).r_free()
    }

    /// `(1 + lambda^2)^{m/2}`.
    pub fn bessel_potential(m: f64) -> SymbolDescriptor {
        SymbolDescriptor::new("bessel_potential", m, 1.0, 2.0, move |_, l| {
            (lam2(l) + 1.0).powf(m / 2.0)
        })
        .r_free()
    }

    /// `e^{-r^2} (1 + lambda^2)^{-1/2}`.
    pub fn decaying_in_r() -> SymbolDescriptor {
        SymbolDescriptor::new("decaying_in_r", -1.0, 1.0, 2.0, |r, l| {
            (lam2(l) + 1.0).powf(-0.5) * (-r * r).exp()
        })
    }

    /// `b^2 / (lambda^2 + b^2)`, holomorphic on `|Im lambda| < b`.
    pub fn pole(b: f64) -> SymbolDescriptor {
        SymbolDescriptor::new("pole", -2.0, 1.0, 2.0, move |_, l| {
            Complex64::new(b * b, 0.0) / (lam2(l) + b * b)
        })
        .r_free()
    }

    /// `((lambda^2+1) / (lambda^2+b^2))^3`: order 0 with a zero of order three at `lambda = +-i`.
    pub fn vanishing_pole(b: f64) -> SymbolDescriptor {
        SymbolDescriptor::new("vanishing_pole", 0.0, 1.0, 1.0, move |_, l| {
            let l2 = lam2(l);
            ((l2 + 1.0) / (l2 + b * b)).powi(3)
        })
        .r_free()
    }

    /// The family used by the global-kernel bound: a simple pole at `i(gamma_p + 1/4)`
    /// for `n` odd or zero, the vanishing variant with `b = 1.1` for nonzero even `n`.
    ///
    /// For nonzero even `n` and `sigma(i) != 0` the continuous kernel's tail is
    /// close to `-sigma(i) psi_i`, of opposite sign to its local peak; larger
    /// `b` in the vanishing variant moves a sign change into `[1/2, 6]`.
    pub fn global_test_family(p: f64, n: i64, epsilon: f64) -> SymbolDescriptor {
        let s = if n != 0 && n % 2 == 0 {
            vanishing_pole(1.1)
        } else {
            pole(gamma_p(p) + 0.25)
        };
        s.with_p(p).with_epsilon(epsilon).with_discrete_from_eval(n, 0.0)
    }

    /// Piecewise-linear symbol in `|lambda|` on a real grid; `NaN` off the real axis.
    pub fn tabulated(lambda_grid: Vec<f64>, values: Vec<Complex64>) -> Result<SymbolDescriptor> {
        if lambda_grid.len() != values.len() || lambda_grid.len() < 2 {
            return Err(Error::domain("tabulated symbol needs matching grids of length >= 2"));
        }
        if lambda_grid.windows(2).any(|w| w[1] <= w[0]) || lambda_grid[0] < 0.0 {
            return Err(Error::domain(
                "tabulated lambda grid must be increasing and non-negative",
            ));
        }
        Ok(SymbolDescriptor::new("tabulated", 0.0, 1.0, 2.0, move |_, l| {
            if l.im.abs() > 1e-14 {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            let x = l.re.abs();
            let j = lambda_grid.partition_point(|&g| g <= x);
            if j == 0 {
                values[0]
            } else if j >= lambda_grid.len() {
                values[values.len() - 1]
            } else {
                let (x0, x1) = (lambda_grid[j - 1], lambda_grid[j]);
                let w = (x - x0) / (x1 - x0);
                values[j - 1] * (1.0 - w) + values[j] * w
            }
        })
        .r_free())
    }
}

/// Serializable names of the built-in symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant {
        re: f64,
        im: f64,
    },
    Rational,
    SigmaNu {
        re: f64,
        im: f64,
    },
    Sin,
    BesselPotential {
        m: f64,
    },
    DecayingInR,
    Pole {
        b: f64,
    },
    VanishingPole {
        b: f64,
    },
    GlobalTestFamily,
    Tabulated {
        lambda: Vec<f64>,
        re: Vec<f64>,
        im: Vec<f64>,
    },
}

impl SymbolSpec {
    /// Builds the descriptor, with discrete values for `n` taken at `r = 0`.
    pub fn build(&self, n: i64, p: f64, epsilon: f64) -> Result<SymbolDescriptor> {
        let s = match self {
            SymbolSpec::Constant { re, im } => builtin::constant(Complex64::new(*re, *im)),
            SymbolSpec::Rational => builtin::rational_multiplier(),
            SymbolSpec::SigmaNu { re, im } => builtin::sigma_nu(Complex64::new(*re, *im)),
            SymbolSpec::Sin => builtin::sin_lambda(),
            SymbolSpec::BesselPotential { m } => builtin::bessel_potential(*m),
            SymbolSpec::DecayingInR => builtin::decaying_in_r(),
            SymbolSpec::Pole { b } => builtin::pole(*b),
            SymbolSpec::VanishingPole { b } => builtin::vanishing_pole(*b),
            SymbolSpec::GlobalTestFamily => builtin::global_test_family(p, n, epsilon),
            SymbolSpec::Tabulated { lambda, re, im } => {
                if re.len() != im.len() {
                    return Err(Error::domain("tabulated symbol: re and im differ in length"));
                }
                let vals = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
                builtin::tabulated(lambda.clone(), vals)?
            }
        };
        Ok(s.with_p(p).with_epsilon(epsilon).with_discrete_from_eval(n, 0.0))
    }
}

// ---------------------------------------------------------------------------
// Cutoffs

fn bump_edge(u: f64) -> f64 {
    // 1 at u = 0, 0 at u = 1, flat to all orders at both ends
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Local cutoff: 1 on `|t| <= 1/2`, supported in `|t| <= 1`.
pub fn eta_circ(t: f64) -> f64 {
    bump_edge(2.0 * t.abs() - 1.0)
}

/// Global cutoff `1 - eta_circ`.
pub fn eta(t: f64) -> f64 {
    1.0 - eta_circ(t)
}

/// Spectral cutoff: 0 on `|lambda| <= 1`, 1 on `|lambda| >= 2`.
pub fn big_phi(lambda: f64) -> f64 {
    bump_edge(2.0 - lambda.abs())
}

// ---------------------------------------------------------------------------
// Norms and class checks

/// Sampling of `r` and of the closed strip `|Im lambda| <= gamma_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub r_grid: Vec<f64>,
    pub re_grid: Vec<f64>,
    /// Number of imaginary levels (symmetric, including the real axis when odd).
    pub im_levels: usize,
    /// Fraction of `gamma_p` reached by the outermost level.
    pub edge: f64,
}

impl StripGrid {
    pub fn new(r_grid: Vec<f64>, re_grid: Vec<f64>, im_levels: usize) -> Self {
        StripGrid {
            r_grid,
            re_grid,
            im_levels,
            edge: 0.99,
        }
    }

    fn im_values(&self, p: f64) -> Vec<f64> {
        let g = gamma_p(p) * self.edge;
        if g == 0.0 || self.im_levels <= 1 {
            return vec![0.0];
        }
        let m = self.im_levels;
        (0..m).map(|j| g * (2.0 * j as f64 / (m - 1) as f64 - 1.0)).collect()
    }

    fn lambdas(&self, p: f64) -> Vec<Complex64> {
        let ims = self.im_values(p);
        self.re_grid
            .iter()
            .flat_map(|&x| ims.iter().map(move |&y| Complex64::new(x, y)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormDomain {
    RealLine,
    Strip { p: f64, gamma: f64 },
}

/// Sup of each `(beta, alpha)` derivative term.
pub type NormTerms = Vec<((u32, u32), f64)>;

/// A sampled Hormander-type norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderNorm {
    /// Maximal orders `(j, k)` of the `s`- and `lambda`-derivatives.
    pub order: (u32, u32),
    pub domain: NormDomain,
    pub value: f64,
    pub terms: NormTerms,
    /// Norm over the full `r` (or `s`) grid exceeds 1.5x the norm over its lower half.
    pub unbounded_trend: bool,
    /// Largest relative Cauchy-Riemann residual seen on the samples.
    pub cr_defect: f64,
}

fn lambda_step(l: Complex64) -> f64 {
    1e-3 * (1.0 + l.norm())
}

/// `d^alpha/dlambda^alpha g` at `l` by central differences along the real direction.
fn lambda_derivative<G: Fn(Complex64) -> Complex64>(g: &G, l: Complex64, alpha: u32) -> Complex64 {
    let h = lambda_step(l);
    match alpha {
        0 => g(l),
        1 => (g(l + h) - g(l - h)) / (2.0 * h),
        2 => (g(l + h) - g(l) * 2.0 + g(l - h)) / (h * h),
        _ => {
            // iterate the first difference
            let inner = |z: Complex64| lambda_derivative(g, z, alpha - 1);
            (inner(l + h) - inner(l - h)) / (2.0 * h)
        }
    }
}

fn cr_residual<G: Fn(Complex64) -> Complex64>(g: &G, l: Complex64) -> f64 {
    let h = lambda_step(l);
    let i = Complex64::i();
    let dx = (g(l + h) - g(l - h)) / (2.0 * h);
    let dy = (g(l + i * h) - g(l - i * h)) / (2.0 * h);
    let scale = dx.norm() + g(l).norm() + 1e-300;
    (dy - i * dx).norm() / scale
}

fn finite_or_err(v: Complex64, context: &str, r: f64, l: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite(context, format!("r={r}, lambda={l}")))
    }
}

/// Returns per-term sups for the full grid and the lower half of the outer grid.
fn sampled_sups<G>(
    outer: &[f64],
    lambdas: &[Complex64],
    j: u32,
    k: u32,
    context: &str,
    g: G,
) -> Result<(NormTerms, Vec<f64>, f64)>
where
    G: Fn(f64, Complex64, u32, u32) -> Complex64 + Sync,
{
    let omax = outer.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let omin = outer.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = omin + 0.5 * (omax - omin);
    let mut terms = Vec::new();
    let mut half_terms = Vec::new();
    for beta in 0..=j {
        for alpha in 0..=k {
            let mut full = 0.0f64;
            let mut lower = 0.0f64;
            for &s in outer {
                for &l in lambdas {
                    let v = finite_or_err(g(s, l, beta, alpha), context, s, l)?;
                    let w = (1.0 + l.norm()).powi(alpha as i32) * v.norm();
                    full = full.max(w);
                    if s <= half {
                        lower = lower.max(w);
                    }
                }
            }
            terms.push(((beta, alpha), full));
            half_terms.push(lower);
        }
    }
    Ok((terms, half_terms, 0.0))
}

fn assemble_norm(
    order: (u32, u32),
    domain: NormDomain,
    terms: NormTerms,
    half_terms: Vec<f64>,
    cr_defect: f64,
) -> HormanderNorm {
    let value = terms.iter().map(|t| t.1).fold(0.0, f64::max);
    let half = half_terms.iter().cloned().fold(0.0, f64::max);
    HormanderNorm {
        order,
        domain,
        value,
        terms,
        unbounded_trend: value > 1.5 * half && value > 1e-12,
        cr_defect,
    }
}

fn domain_for(p: f64) -> NormDomain {
    let g = gamma_p(p);
    if g == 0.0 {
        NormDomain::RealLine
    } else {
        NormDomain::Strip { p, gamma: g }
    }
}

fn max_cr(symbol: &SymbolDescriptor, rs: &[f64], lambdas: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for &r in rs {
        for &l in lambdas {
            let c = cr_residual(&|z| symbol.eval(r, z), l);
            if c.is_finite() {
                worst = worst.max(c);
            }
        }
    }
    worst
}

/// Sampled Mikhlin-Hormander norm `sup (1+|lambda|)^alpha |d^alpha sigma|`, `alpha <= k`.
pub fn mh_norm(symbol: &SymbolDescriptor, p: f64, k: u32, grid: &StripGrid) -> Result<HormanderNorm> {
    if k > 2 {
        return Err(Error::domain(format!("mh_norm supports k <= 2, got {k}")));
    }
    let lambdas = grid.lambdas(p);
    let (terms, half, _) = sampled_sups(&grid.r_grid, &lambdas, 0, k, "mh_norm", |r, l, _, alpha| {
        lambda_derivative(&|z| symbol.eval(r, z), l, alpha)
    })?;
    let cr = max_cr(symbol, &grid.r_grid, &lambdas);
    Ok(assemble_norm((0, k), domain_for(p), terms, half, cr))
}

const S_STEP: f64 = 1e-3;

/// Sup over `v` of the `(j, k)` norm of `sigma_v(s, lambda) = sigma([nbar_v a_s]^+, lambda)`.
pub fn hormander_norm_na(
    symbol: &SymbolDescriptor,
    p: f64,
    j: u32,
    k: u32,
    v_grid: &[f64],
    s_grid: &[f64],
    grid: &StripGrid,
) -> Result<HormanderNorm> {
    if j > 2 || k > 2 {
        return Err(Error::domain(format!(
            "hormander_norm_na supports j, k <= 2, got ({j}, {k})"
        )));
    }
    let lambdas = grid.lambdas(p);
    let mut best: Option<(NormTerms, Vec<f64>)> = None;
    for &v in v_grid {
        let radius = |s: f64| -> f64 {
            // a_{-s} = w a_s w^-1 changes only the K-parts, so [nbar_v a_s]^+ is defined for all s
            let g = GroupElement::nbar(v) * GroupElement::a(s);
            cartan_decompose(&g).r
        };
        // validate v once
        nbar_cartan_radius(v, 0.0)?;
        let sv = |s: f64, l: Complex64, beta: u32, alpha: u32| -> Complex64 {
            let f = |ss: f64| lambda_derivative(&|z| symbol.eval(radius(ss), z), l, alpha);
            match beta {
                0 => f(s),
                1 => (f(s + S_STEP) - f(s - S_STEP)) / (2.0 * S_STEP),
                _ => (f(s + S_STEP) - f(s) * 2.0 + f(s - S_STEP)) / (S_STEP * S_STEP),
            }
        };
        let (terms, half, _) = sampled_sups(s_grid, &lambdas, j, k, "hormander_norm_na", sv)?;
        best = Some(match best {
            None => (terms, half),
            Some((bt, bh)) => (
                bt.iter().zip(&terms).map(|(a, b)| (a.0, a.1.max(b.1))).collect(),
                bh.iter().zip(&half).map(|(a, b)| a.max(*b)).collect(),
            ),
        });
    }
    let (terms, half) = best.ok_or_else(|| Error::domain("empty v grid"))?;
    let rs: Vec<f64> = s_grid.iter().map(|s| s.abs()).collect();
    let cr = max_cr(symbol, &rs, &lambdas);
    Ok(assemble_norm((j, k), domain_for(p), terms, half, cr))
}

/// Where a class estimate first fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWitness {
    pub alpha: u32,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub r: f64,
}

/// Sampled derivatives at `lambda = i` (strip exponent 1 only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub max_abs: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub m: f64,
    pub rho: f64,
    /// Fitted `C_alpha`.
    pub constants: Vec<f64>,
    pub passed: bool,
    pub witness: Option<ClassWitness>,
    pub vanishing: Option<VanishingReport>,
}

/// Threshold for treating sampled derivatives as zero in the vanishing check.
pub const VANISHING_TOL: f64 = 1e-6;

const CAUCHY_RADIUS: f64 = 0.02;
const CAUCHY_POINTS: usize = 64;

/// `d^alpha g(z0)` from the Cauchy integral on a circle of radius 0.02.
///
/// Exact up to `(0.02/d)^64` for `g` holomorphic within distance `d` of `z0`,
/// unlike central differences whose truncation error swamps a high-order zero.
fn cauchy_derivative<G: Fn(Complex64) -> Complex64>(g: &G, z0: Complex64, alpha: u32) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..CAUCHY_POINTS {
        let th = 2.0 * PI * j as f64 / CAUCHY_POINTS as f64;
        let w = Complex64::from_polar(1.0, th);
        acc += g(z0 + w * CAUCHY_RADIUS) * w.powi(-(alpha as i32));
    }
    let fact: f64 = (1..=alpha).map(|k| k as f64).product();
    acc * (fact / (CAUCHY_POINTS as f64 * CAUCHY_RADIUS.powi(alpha as i32)))
}

/// Growth factor between the second and last quarter of the `|Re lambda|` range
/// above which a class constant counts as unbounded.
pub const CLASS_GROWTH: f64 = 1.2;

/// Checks `|d^alpha sigma| <= C_alpha (1+|lambda|)^{m - rho alpha}` on the grid.
///
/// A constant counts as unbounded when its sup increases across the last three
/// quarters of the `|Re lambda|` range by more than [`CLASS_GROWTH`].
pub fn symbol_class_check(
    symbol: &SymbolDescriptor,
    m: f64,
    rho: f64,
    p: f64,
    alpha_max: u32,
    grid: &StripGrid,
) -> Result<ClassReport> {
    let lambdas = grid.lambdas(p);
    let xmax = grid.re_grid.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut constants = Vec::new();
    let mut witness = None;
    for alpha in 0..=alpha_max {
        // sups over |Re lambda| in [0, X/4), [X/4, X/2), [X/2, 3X/4), [3X/4, X]
        let mut quarters = [0.0f64; 4];
        let mut arg = (0.0, Complex64::new(0.0, 0.0));
        for &r in &grid.r_grid {
            for &l in &lambdas {
                let d = finite_or_err(
                    lambda_derivative(&|z| symbol.eval(r, z), l, alpha),
                    "symbol_class_check",
                    r,
                    l,
                )?;
                let ratio = d.norm() / (1.0 + l.norm()).powf(m - rho * alpha as f64);
                let q = if xmax > 0.0 {
                    ((4.0 * l.re.abs() / xmax) as usize).min(3)
                } else {
                    0
                };
                if q == 3 && ratio > quarters[3] {
                    arg = (r, l);
                }
                quarters[q] = quarters[q].max(ratio);
            }
        }
        constants.push(quarters.iter().cloned().fold(0.0, f64::max));
        let growing = quarters[1] < quarters[2] && quarters[2] < quarters[3];
        if witness.is_none() && growing && quarters[3] > CLASS_GROWTH * quarters[1] && quarters[3] > 1e-12 {
            witness = Some(ClassWitness {
                alpha,
                lambda_re: arg.1.re,
                lambda_im: arg.1.im,
                r: arg.0,
            });
        }
    }
    let vanishing = if (p - 1.0).abs() < 1e-12 {
        let i = Complex64::i();
        let mut max_abs = vec![0.0f64; alpha_max as usize + 1];
        for &r in &grid.r_grid {
            for (alpha, slot) in max_abs.iter_mut().enumerate() {
                let v = cauchy_derivative(&|z| symbol.eval(r, z), i, alpha as u32).norm();
                *slot = slot.max(if v.is_finite() { v } else { f64::INFINITY });
            }
        }
        let holds = max_abs.iter().all(|v| *v < VANISHING_TOL);
        Some(VanishingReport { max_abs, holds })
    } else {
        None
    };
    let passed = witness.is_none() && vanishing.as_ref().is_none_or(|v| v.holds);
    Ok(ClassReport {
        m,
        rho,
        constants,
        passed,
        witness,
        vanishing,
    })
}

// ---------------------------------------------------------------------------
// The operator

/// Spectral grid used to apply a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsidoConfig {
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub transform: TransformConfig,
}

impl Default for PsidoConfig {
    fn default() -> Self {
        PsidoConfig {
            lambda_max: 40.0,
            lambda_points: 2001,
            transform: TransformConfig::default(),
        }
    }
}

/// `Psi_sigma f` on `x_grid`.
pub fn apply_psido(
    symbol: &SymbolDescriptor,
    f: &RadialProfile,
    x_grid: &[f64],
    cfg: &PsidoConfig,
) -> Result<RadialProfile> {
    let grid = crate::transforms::uniform_lambda_grid(cfg.lambda_max, cfg.lambda_points);
    let spectral = forward(f, &grid, &cfg.transform)?;
    apply_psido_spectral(symbol, &spectral, x_grid)
}

/// `Psi_sigma` applied to precomputed spectral data.
pub fn apply_psido_spectral(symbol: &SymbolDescriptor, s: &SpectralData, x_grid: &[f64]) -> Result<RadialProfile> {
    s.validate()?;
    let ktype = KType::new(s.n);
    let sigma_b = symbol.discrete_for(s.n)?;
    let discrete: BTreeMap<i64, Complex64> = s.fhat_b.iter().map(|(k, v)| (*k, *v * sigma_b[k])).collect();
    let w = lambda_weights(&s.lambda_grid)?;
    let dens: Vec<f64> = s
        .lambda_grid
        .iter()
        .map(|&l| plancherel_density(s.n, l))
        .collect::<Result<_>>()?;
    let values: Vec<Result<Complex64>> = x_grid
        .par_iter()
        .map(|&r| {
            let weighted: Vec<Complex64> = (0..w.len())
                .map(|i| s.fhat_h[i] * symbol.eval(r, Complex64::new(s.lambda_grid[i], 0.0)) * (w[i] * dens[i]))
                .collect();
            let (c, d) = inversion_at(ktype, r, &s.lambda_grid, &weighted, &discrete)?;
            let v = c + d;
            finite_or_err(v, "apply_psido", r, Complex64::new(0.0, 0.0))
        })
        .collect();
    Ok(RadialProfile {
        ktype,
        t_grid: x_grid.to_vec(),
        values: values.into_iter().collect::<Result<_>>()?,
    })
}

/// The Fourier multiplier `T_m`: multiply the spectral data and invert.
pub fn multiplier_transform<M>(
    m: M,
    m_discrete: &BTreeMap<i64, Complex64>,
    s: &SpectralData,
    x_grid: &[f64],
) -> Result<RadialProfile>
where
    M: Fn(f64) -> Complex64,
{
    let mut t = s.clone();
    for (v, l) in t.fhat_h.iter_mut().zip(&s.lambda_grid) {
        *v *= m(*l);
    }
    for (k, v) in t.fhat_b.iter_mut() {
        let mk = m_discrete
            .get(k)
            .ok_or_else(|| Error::domain(format!("multiplier has no discrete value for k={k}")))?;
        *v *= *mk;
    }
    Ok(inverse_transform(&t, x_grid)?.profile)
}

// ---------------------------------------------------------------------------
// Kernels

/// Cut-off used by the kernel integrals when none is given: `e^{-eps L^2} = e^{-30}`.
pub fn default_kernel_cutoff(epsilon: f64) -> f64 {
    (30.0 / epsilon).sqrt()
}

const KERNEL_PANEL: f64 = 0.5;
const KERNEL_NODES: usize = 8;

fn kernel_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let panels = ((b - a) / KERNEL_PANEL).ceil().max(1.0) as usize;
    points_on_breaks(&uniform_breaks(a, b, panels), KERNEL_NODES)
}

/// `K^con(a_{r_x}, a_s) = (1/4 pi^2) 2 int_0^L sigma(r_x, l) phi_l(a_s) |c(l)|^-2 dl`, calibrated.
pub fn kernel_continuous(
    symbol: &SymbolDescriptor,
    n: i64,
    r_x: f64,
    s: f64,
    lambda_max: Option<f64>,
) -> Result<Complex64> {
    symbol.require_epsilon("kernel_continuous")?;
    let lmax = lambda_max.unwrap_or_else(|| default_kernel_cutoff(symbol.epsilon));
    let nodes = kernel_nodes(0.0, lmax);
    continuous_on_nodes(symbol, n, r_x, s, &nodes)
}

fn continuous_on_nodes(symbol: &SymbolDescriptor, n: i64, r_x: f64, s: f64, nodes: &[(f64, f64)]) -> Result<Complex64> {
    let ktype = KType::new(n);
    let mut terms = Vec::with_capacity(nodes.len());
    for &(l, w) in nodes {
        let lc = Complex64::new(l, 0.0);
        let sig = symbol.eval(r_x, lc);
        if sig == Complex64::new(0.0, 0.0) {
            continue;
        }
        terms.push(sig * phi_nn(ktype, lc, s.abs())? * (w * plancherel_density(n, l)?));
    }
    Ok(pairwise_sum(&terms) * (2.0 / (4.0 * PI * PI)) * INVERSION_CALIBRATION)
}

/// `K^dis(a_{r_x}, a_s) = (1/2 pi) sum_k sigma_B(ik) psi_ik(a_s) |k|`, calibrated.
pub fn kernel_discrete(symbol: &SymbolDescriptor, n: i64, s: f64) -> Result<Complex64> {
    let ktype = KType::new(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in symbol.discrete_for(n)? {
        acc += v * psi_discrete(k, ktype, s.abs())? * (k.unsigned_abs() as f64);
    }
    Ok(acc * (INVERSION_CALIBRATION / (2.0 * PI)))
}

/// Lowering of the contour away from a pole of `c(-lambda)^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indentation {
    pub pole_im: f64,
    pub requested_height: f64,
    pub used_height: f64,
}

/// Both evaluations of the global kernel and the weighted bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalKernel {
    pub r: f64,
    pub eta: f64,
    /// Real-line integral.
    pub direct: Complex64,
    /// Contour-shifted integral of the global expansion.
    pub contour: Complex64,
    pub height: f64,
    pub indentation: Option<Indentation>,
    pub bound_exponent: f64,
    /// `|K^con| (1+r)^2 e^{bound_exponent r}` from the direct value before the
    /// cutoff, which only lowers `|K^glo|`.
    pub bound_ratio: f64,
}

/// Options for [`kernel_global`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlobalKernelOptions {
    pub lambda_max: Option<f64>,
    /// Overrides the default contour height `gamma_p - gamma_p / (2r)`.
    pub height: Option<f64>,
}

/// Real-part nodes of the shifted contour, refined on `|u| <= 1` where an
/// indented contour passes within [`INDENT_RADIUS`] of a pole.
fn contour_nodes(lmax: f64) -> Vec<(f64, f64)> {
    let mut out = kernel_nodes(-lmax, -1.0);
    out.extend(points_on_breaks(&uniform_breaks(-1.0, 1.0, 80), KERNEL_NODES));
    out.extend(kernel_nodes(1.0, lmax));
    out
}

/// Upper-half-plane poles of `c(-lambda)^-1`: `i(|n| - 1 - 2m) > 0`.
fn upper_poles(n: i64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut v = n.abs() - 1;
    while v > 0 {
        out.push(v as f64);
        v -= 2;
    }
    out
}

fn clamp_height(n: i64, h: f64, symbol: &SymbolDescriptor) -> (f64, Option<Indentation>) {
    for pole in upper_poles(n) {
        // a pole cancelled by a zero of the symbol needs no detour
        let residue_killed = symbol.eval_raw(0.0, Complex64::new(0.0, pole)).norm() < VANISHING_TOL;
        if !residue_killed && h > pole - INDENT_RADIUS {
            let used = pole - INDENT_RADIUS;
            return (
                used,
                Some(Indentation {
                    pole_im: pole,
                    requested_height: h,
                    used_height: used,
                }),
            );
        }
    }
    (h, None)
}

/// `eta(a_r) K^con(a_{r_x}, a_r)` by the real-line integral and by the shifted contour.
pub fn kernel_global(
    symbol: &SymbolDescriptor,
    p: f64,
    n: i64,
    r_x: f64,
    r: f64,
    opts: GlobalKernelOptions,
) -> Result<GlobalKernel> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    if r < 0.0 {
        return Err(Error::domain(format!("radius must be non-negative, got {r}")));
    }
    symbol.require_epsilon("kernel_global")?;
    let g = gamma_p(p);
    let bound_exponent = if p <= 2.0 { 2.0 / p } else { 2.0 * (1.0 - 1.0 / p) };
    let zero = Complex64::new(0.0, 0.0);
    let e = eta(r);
    if r < 0.5 {
        return Ok(GlobalKernel {
            r,
            eta: 0.0,
            direct: zero,
            contour: zero,
            height: 0.0,
            indentation: None,
            bound_exponent,
            bound_ratio: 0.0,
        });
    }
    let lmax = opts.lambda_max.unwrap_or_else(|| default_kernel_cutoff(symbol.epsilon));
    let uncut = continuous_on_nodes(symbol, n, r_x, r, &kernel_nodes(0.0, lmax))?;
    let direct = uncut * e;

    let requested = opts.height.unwrap_or(g - g / (2.0 * r));
    let (h, indentation) = clamp_height(n, requested, symbol);
    let i = Complex64::i();
    let mut terms = Vec::new();
    for (u, w) in contour_nodes(lmax) {
        let l = Complex64::new(u, h);
        let sig = symbol.eval(r_x, l);
        let v = sig * one_plus_a(n, l, r)? * c_inv_minus(n, l)? * (i * l * r).exp();
        terms.push(finite_or_err(v, "kernel_global contour", r, l)? * w);
    }
    let contour = pairwise_sum(&terms) * (2.0 * (-r).exp() / (4.0 * PI * PI)) * INVERSION_CALIBRATION * e;
    let bound_ratio = uncut.norm() * (1.0 + r).powi(2) * (bound_exponent * r).exp();
    Ok(GlobalKernel {
        r,
        eta: e,
        direct,
        contour,
        height: h,
        indentation,
        bound_exponent,
        bound_ratio,
    })
}

// ---------------------------------------------------------------------------
// Local / global / discrete split

/// Quadrature layout for [`split_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub circle_points: usize,
    pub nodes_per_panel: usize,
    /// Kernel cut-off; defaults to [`default_kernel_cutoff`].
    pub lambda_max: Option<f64>,
    pub transform: TransformConfig,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            circle_points: 1024,
            nodes_per_panel: 16,
            lambda_max: None,
            transform: TransformConfig::default(),
        }
    }
}

/// The three pieces of `Psi_sigma f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub x_grid: Vec<f64>,
    pub dis: Vec<Complex64>,
    pub loc: Vec<Complex64>,
    pub glo: Vec<Complex64>,
}

impl SplitResult {
    pub fn total(&self) -> Vec<Complex64> {
        (0..self.x_grid.len())
            .map(|i| self.dis[i] + self.loc[i] + self.glo[i])
            .collect()
    }
}

fn rho_breaks(rho_max: f64) -> Vec<f64> {
    let mut b = vec![0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    b.retain(|&x| x < rho_max);
    let mut x = 1.0;
    while x < rho_max {
        x = (x + 0.25).min(rho_max);
        b.push(x);
    }
    if *b.last().unwrap_or(&0.0) < rho_max {
        b.push(rho_max);
    }
    b
}

/// `(1/2 pi) int e^{inb} f(a_r k_{-b} a_{-rho}) db` for the (n,n) extension of `f`.
fn circle_average(f: &RadialProfile, r: f64, rho: f64, m: usize) -> Complex64 {
    let n = f.ktype.n as f64;
    let ar = GroupElement::a(r);
    let arho = GroupElement::a(-rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let b = 2.0 * PI * j as f64 / m as f64;
        let g = ar * GroupElement::k(-b) * arho;
        let cc = cartan_decompose(&g);
        let v = f.eval(cc.r);
        if v != Complex64::new(0.0, 0.0) {
            acc += v * Complex64::from_polar(1.0, n * (b + cc.theta1 + cc.theta2));
        }
    }
    acc / m as f64
}

/// `Psi^dis f`, `Psi^loc f` and `Psi^glo f` on `x_grid`.
///
/// With `g = y^-1 x = k_a a_rho k_b` the continuous part becomes
/// `int_0^inf Delta(rho) K(r, rho) (1/2pi) int e^{inb} f(a_r k_-b a_-rho) db drho`,
/// split by `eta_circ(rho)` and `eta(rho)`.
pub fn split_operator(
    symbol: &SymbolDescriptor,
    f: &RadialProfile,
    x_grid: &[f64],
    cfg: &SplitConfig,
) -> Result<SplitResult> {
    symbol.require_epsilon("split_operator")?;
    let n = f.ktype.n;
    let lmax = cfg.lambda_max.unwrap_or_else(|| default_kernel_cutoff(symbol.epsilon));
    let lnodes = kernel_nodes(0.0, lmax);
    let support = f.support_end();
    let rmax = x_grid.iter().cloned().fold(0.0, f64::max);
    let rho_nodes = points_on_breaks(&rho_breaks(rmax + support), cfg.nodes_per_panel);

    let kernel_row = |r_x: f64| -> Result<Vec<Complex64>> {
        rho_nodes
            .par_iter()
            .map(|&(rho, _)| continuous_on_nodes(symbol, n, r_x, rho, &lnodes))
            .collect()
    };
    let shared = if symbol.r_independent {
        Some(kernel_row(0.0)?)
    } else {
        None
    };

    let fhat_b = discrete_transform(f, &cfg.transform)?;
    let sigma_b = symbol.discrete_for(n)?;
    let ktype = f.ktype;

    let mut dis = Vec::with_capacity(x_grid.len());
    let mut loc = Vec::with_capacity(x_grid.len());
    let mut glo = Vec::with_capacity(x_grid.len());
    for &r in x_grid {
        let mut d = Complex64::new(0.0, 0.0);
        for (k, fb) in &fhat_b {
            d += sigma_b[k] * *fb * psi_discrete(*k, ktype, r)? * (k.unsigned_abs() as f64);
        }
        dis.push(d * (INVERSION_CALIBRATION / (2.0 * PI)));

        let row = match &shared {
            Some(row) => row.clone(),
            None => kernel_row(r)?,
        };
        let parts: Vec<(Complex64, Complex64)> = rho_nodes
            .par_iter()
            .zip(row.par_iter())
            .map(|(&(rho, w), k)| {
                if rho > r + support {
                    return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                }
                let v = *k * circle_average(f, r, rho, cfg.circle_points) * (w * delta(rho));
                (v * eta_circ(rho), v * eta(rho))
            })
            .collect();
        let lp: Vec<Complex64> = parts.iter().map(|x| x.0).collect();
        let gp: Vec<Complex64> = parts.iter().map(|x| x.1).collect();
        loc.push(pairwise_sum(&lp));
        glo.push(pairwise_sum(&gp));
    }
    Ok(SplitResult {
        x_grid: x_grid.to_vec(),
        dis,
        loc,
        glo,
    })
}

// ---------------------------------------------------------------------------
// Euclidean symbol of the local kernel

/// Quadrature layout for [`cw_symbol_extract`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwConfig {
    pub lambda_max: Option<f64>,
    pub t_panel: f64,
    pub nodes_per_panel: usize,
}

impl Default for CwConfig {
    fn default() -> Self {
        CwConfig {
            lambda_max: None,
            t_panel: 0.025,
            nodes_per_panel: 16,
        }
    }
}

/// `K_0(x a_s, t)` with constant 1, for `t` in `[-1, 1]`.
pub fn cw_kernel_k0(
    symbol: &SymbolDescriptor,
    n: i64,
    r_x: f64,
    s: f64,
    t: f64,
    lambda_max: Option<f64>,
) -> Result<Complex64> {
    symbol.require_epsilon("cw_kernel_k0")?;
    let lmax = lambda_max.unwrap_or_else(|| default_kernel_cutoff(symbol.epsilon));
    let nodes = kernel_nodes(1.0, lmax.max(2.0));
    k0_on_nodes(symbol, n, (r_x + s).abs(), t, &nodes)
}

fn k0_on_nodes(symbol: &SymbolDescriptor, n: i64, radius: f64, t: f64, nodes: &[(f64, f64)]) -> Result<Complex64> {
    let cut = eta_circ(t);
    if cut == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut terms = Vec::with_capacity(nodes.len());
    for &(l, w) in nodes {
        let sig = symbol.eval(radius, Complex64::new(l, 0.0));
        terms.push(sig * (w * big_phi(l) * bessel_j(BesselOrder::Zero, l * t) * plancherel_density(n, l)?));
    }
    Ok(pairwise_sum(&terms) * (cut * (t * delta(t)).abs().sqrt()))
}

/// `a_x(s, xi) = int_{-1}^{1} e^{-2 pi i xi t} K_0(x a_s, t) dt` on `xi_grid`.
pub fn cw_symbol_extract(
    symbol: &SymbolDescriptor,
    n: i64,
    r_x: f64,
    s: f64,
    xi_grid: &[f64],
    cfg: &CwConfig,
) -> Result<Vec<Complex64>> {
    symbol.require_epsilon("cw_symbol_extract")?;
    let lmax = cfg.lambda_max.unwrap_or_else(|| default_kernel_cutoff(symbol.epsilon));
    let lnodes = kernel_nodes(1.0, lmax.max(2.0));
    let radius = (r_x + s).abs();
    let panels = (1.0 / cfg.t_panel).ceil().max(1.0) as usize;
    let tnodes = points_on_breaks(&uniform_breaks(0.0, 1.0, panels), cfg.nodes_per_panel);
    let k0: Vec<Complex64> = tnodes
        .par_iter()
        .map(|&(t, _)| k0_on_nodes(symbol, n, radius, t, &lnodes))
        .collect::<Result<_>>()?;
    // K_0 is even in t
    Ok(xi_grid
        .iter()
        .map(|&xi| {
            let terms: Vec<Complex64> = tnodes
                .iter()
                .zip(&k0)
                .map(|(&(t, w), k)| *k * (2.0 * w * (2.0 * PI * xi * t).cos()))
                .collect();
            pairwise_sum(&terms)
        })
        .collect())
}

/// `sup (1+|xi|)^alpha |Delta^alpha a|` for `alpha = 0, 1, 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwBands {
    pub bands: [f64; 3],
    /// Band over the upper half of the grid divided by the band over the lower half.
    pub tail_ratio: [f64; 3],
    pub bounded: bool,
}

/// Finite-difference band check on a uniform `xi_grid`.
pub fn cw_bands(xi_grid: &[f64], a: &[Complex64]) -> Result<CwBands> {
    if xi_grid.len() != a.len() || a.len() < 5 {
        return Err(Error::domain("cw_bands needs matching grids with at least 5 points"));
    }
    let h = xi_grid[1] - xi_grid[0];
    if xi_grid
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0))
        || h <= 0.0
    {
        return Err(Error::domain("cw_bands needs a uniform increasing xi grid"));
    }
    let mid = xi_grid[0] + 0.5 * (xi_grid[xi_grid.len() - 1] - xi_grid[0]);
    let mut bands = [0.0f64; 3];
    let mut head = [0.0f64; 3];
    let mut tail = [0.0f64; 3];
    for i in 1..a.len() - 1 {
        let d = [
            a[i],
            (a[i + 1] - a[i - 1]) / (2.0 * h),
            (a[i + 1] - a[i] * 2.0 + a[i - 1]) / (h * h),
        ];
        for (alpha, dv) in d.iter().enumerate() {
            let v = (1.0 + xi_grid[i].abs()).powi(alpha as i32) * dv.norm();
            if !v.is_finite() {
                return Err(Error::non_finite("cw_bands", format!("xi={}", xi_grid[i])));
            }
            bands[alpha] = bands[alpha].max(v);
            if xi_grid[i] <= mid {
                head[alpha] = head[alpha].max(v);
            } else {
                tail[alpha] = tail[alpha].max(v);
            }
        }
    }
    let mut tail_ratio = [0.0; 3];
    for a in 0..3 {
        tail_ratio[a] = if head[a] > 0.0 { tail[a] / head[a] } else { 0.0 };
    }
    let bounded = tail_ratio.iter().all(|r| *r <= 2.0);
    Ok(CwBands {
        bands,
        tail_ratio,
        bounded,
    })
}
