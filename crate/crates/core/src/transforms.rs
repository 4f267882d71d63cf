//! Spherical and discrete transforms of (n,n)-type profiles, their inversion, and the Abel transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_geometry::{delta, GroupElement};
use crate::plancherel::plancherel_density;
use crate::quadrature::{pairwise_sum, PanelSpec};
use crate::spherical::{phi_nn, psi_discrete, KType};
use crate::INVERSION_CALIBRATION;

/// Samples of an (n,n)-type function on A+, interpolated by local cubics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub ktype: KType,
    pub t_grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl RadialProfile {
    pub fn new(ktype: KType, t_grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if t_grid.len() != values.len() {
            return Err(Error::domain("grid and values differ in length"));
        }
        if t_grid.len() < 4 {
            return Err(Error::domain("a profile needs at least 4 samples"));
        }
        if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("t grid must be strictly increasing in [0, T]"));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::non_finite("profile sample", format!("t={}", t_grid[i])));
        }
        Ok(RadialProfile { ktype, t_grid, values })
    }

    /// Samples `f` on `t_grid`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(ktype: KType, t_grid: Vec<f64>, f: F) -> Result<Self> {
        let values = t_grid.iter().map(|&t| f(t)).collect();
        Self::new(ktype, t_grid, values)
    }

    pub fn support_end(&self) -> f64 {
        *self.t_grid.last().expect("non-empty grid")
    }

    /// Value at `|t|`; zero beyond the last grid point.
    pub fn eval(&self, t: f64) -> Complex64 {
        let t = t.abs();
        let g = &self.t_grid;
        let m = g.len();
        if t > g[m - 1] {
            return Complex64::new(0.0, 0.0);
        }
        if t <= g[0] {
            return self.values[0];
        }
        let j = g.partition_point(|x| *x <= t).clamp(1, m - 1);
        let start = j.saturating_sub(2).min(m - 4);
        let xs = &g[start..start + 4];
        let ys = &self.values[start..start + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != i {
                    w *= (t - xs[k]) / (xs[i] - xs[k]);
                }
            }
            acc += ys[i] * w;
        }
        acc
    }
}

/// Principal-series samples on a lambda grid plus discrete-series values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub n: i64,
    pub lambda_grid: Vec<f64>,
    pub fhat_h: Vec<Complex64>,
    pub fhat_b: BTreeMap<i64, Complex64>,
}

impl SpectralData {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.len() != self.fhat_h.len() {
            return Err(Error::domain("lambda grid and samples differ in length"));
        }
        let keys: Vec<i64> = self.fhat_b.keys().copied().collect();
        let want = gamma_set(self.n);
        if keys != want {
            return Err(Error::domain(format!(
                "discrete keys {keys:?} differ from Gamma_n = {want:?}"
            )));
        }
        Ok(())
    }
}

/// Gamma_n: integers strictly between 0 and n of parity opposite to n.
pub fn gamma_set(n: i64) -> Vec<i64> {
    let (lo, hi) = if n > 0 { (1, n - 1) } else { (n + 1, -1) };
    (lo..=hi).filter(|k| (n - k).rem_euclid(2) == 1).collect()
}

/// Quadrature layout shared by the forward and inverse transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub nodes_per_panel: usize,
    pub panel_width: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        let p = PanelSpec::default();
        TransformConfig {
            nodes_per_panel: p.nodes_per_panel,
            panel_width: p.panel_width,
        }
    }
}

impl TransformConfig {
    fn panels(&self) -> PanelSpec {
        PanelSpec::new(self.nodes_per_panel, self.panel_width)
    }
}

/// Values of phi_lambda(a_t) on a lambda x t product grid, row-major in lambda.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub ktype: KType,
    pub lambdas: Vec<f64>,
    pub ts: Vec<f64>,
    values: Vec<Complex64>,
}

impl PhiTable {
    pub fn build(ktype: KType, lambdas: &[f64], ts: &[f64]) -> Result<Self> {
        let rows: Vec<Result<Vec<Complex64>>> = lambdas
            .par_iter()
            .map(|&l| ts.iter().map(|&t| phi_nn(ktype, Complex64::new(l, 0.0), t)).collect())
            .collect();
        let mut values = Vec::with_capacity(lambdas.len() * ts.len());
        for r in rows {
            values.extend(r?);
        }
        Ok(PhiTable {
            ktype,
            lambdas: lambdas.to_vec(),
            ts: ts.to_vec(),
            values,
        })
    }

    pub fn get(&self, li: usize, ti: usize) -> Complex64 {
        self.values[li * self.ts.len() + ti]
    }
}

/// Gauss nodes on [0, T] and samples of the profile there.
fn radial_nodes(f: &RadialProfile, cfg: &TransformConfig) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    let pts = cfg.panels().points(0.0, f.support_end());
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = pts.iter().map(|p| p.1 * delta(p.0)).collect();
    let fs: Vec<Complex64> = ts.iter().map(|&t| f.eval(t)).collect();
    (ts, ws, fs)
}

fn forward_with_table(table: &PhiTable, ws: &[f64], fs: &[Complex64]) -> Vec<Complex64> {
    (0..table.lambdas.len())
        .into_par_iter()
        .map(|li| {
            let terms: Vec<Complex64> = (0..ws.len()).map(|ti| fs[ti] * table.get(li, ti) * ws[ti]).collect();
            pairwise_sum(&terms)
        })
        .collect()
}

/// `fhat_H(lambda) = int_0^T f(t) phi_lambda(a_t) Delta(t) dt` on `lambda_grid`.
pub fn spherical_transform(f: &RadialProfile, lambda_grid: &[f64], cfg: &TransformConfig) -> Result<Vec<Complex64>> {
    let (ts, ws, fs) = radial_nodes(f, cfg);
    let table = PhiTable::build(f.ktype, lambda_grid, &ts)?;
    Ok(forward_with_table(&table, &ws, &fs))
}

/// `fhat_B(ik) = int_0^T f(t) psi_ik(a_t) Delta(t) dt` for k in Gamma_n.
pub fn discrete_transform(f: &RadialProfile, cfg: &TransformConfig) -> Result<BTreeMap<i64, Complex64>> {
    let (ts, ws, fs) = radial_nodes(f, cfg);
    let mut out = BTreeMap::new();
    for k in gamma_set(f.ktype.n) {
        let mut terms = Vec::with_capacity(ts.len());
        for i in 0..ts.len() {
            terms.push(fs[i] * psi_discrete(k, f.ktype, ts[i])? * ws[i]);
        }
        out.insert(k, pairwise_sum(&terms));
    }
    Ok(out)
}

/// Both transforms packaged as [`SpectralData`].
pub fn forward(f: &RadialProfile, lambda_grid: &[f64], cfg: &TransformConfig) -> Result<SpectralData> {
    Ok(SpectralData {
        n: f.ktype.n,
        lambda_grid: lambda_grid.to_vec(),
        fhat_h: spherical_transform(f, lambda_grid, cfg)?,
        fhat_b: discrete_transform(f, cfg)?,
    })
}

/// Weights for integrating samples on a uniform grid: Simpson, with a 3/8 panel when the interval count is odd.
pub fn uniform_weights(m: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; m];
    match m {
        0 | 1 => return w,
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
            return w;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
            return w;
        }
        _ => {}
    }
    let intervals = m - 1;
    let simpson_end = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals - 3
    };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Checks the lambda grid is uniform from 0 and returns integration weights.
pub(crate) fn lambda_weights(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 2 {
        return Err(Error::domain("lambda grid needs at least two points"));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let uniform = grid
        .iter()
        .enumerate()
        .all(|(i, l)| (l - (grid[0] + h * i as f64)).abs() <= 1e-9 * (1.0 + l.abs()));
    if !uniform || grid[0].abs() > 1e-12 || !(h > 0.0) {
        return Err(Error::domain("lambda grid must be uniform on [0, Lambda]"));
    }
    Ok(uniform_weights(grid.len(), h))
}

/// Reconstruction and bookkeeping returned by [`inverse_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    pub profile: RadialProfile,
    pub calibration: f64,
    /// `|fhat_H| |c|^-2` at the cut-off relative to its maximum on the grid.
    pub truncation_indicator: f64,
}

pub(crate) fn density_on(n: i64, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&l| plancherel_density(n, l)).collect()
}

/// Continuous and discrete parts of the inversion formula evaluated at one radius.
pub(crate) fn inversion_at(
    ktype: KType,
    t: f64,
    lambdas: &[f64],
    weighted: &[Complex64],
    discrete: &BTreeMap<i64, Complex64>,
) -> Result<(Complex64, Complex64)> {
    let mut terms = Vec::with_capacity(lambdas.len());
    for (l, w) in lambdas.iter().zip(weighted) {
        if *w != Complex64::new(0.0, 0.0) {
            terms.push(*w * phi_nn(ktype, Complex64::new(*l, 0.0), t)?);
        }
    }
    let cont = pairwise_sum(&terms) * (2.0 / (4.0 * PI * PI)) * INVERSION_CALIBRATION;
    let mut dis = Complex64::new(0.0, 0.0);
    for (&k, fb) in discrete {
        dis += *fb * psi_discrete(k, ktype, t)? * (k.unsigned_abs() as f64);
    }
    Ok((cont, dis * (INVERSION_CALIBRATION / (2.0 * PI))))
}

/// Inversion formula on `t_grid`, calibrated by [`INVERSION_CALIBRATION`].
pub fn inverse_transform(s: &SpectralData, t_grid: &[f64]) -> Result<InverseResult> {
    s.validate()?;
    let ktype = KType::new(s.n);
    let w = lambda_weights(&s.lambda_grid)?;
    let dens = density_on(s.n, &s.lambda_grid)?;
    let weighted: Vec<Complex64> = (0..w.len()).map(|i| s.fhat_h[i] * (w[i] * dens[i])).collect();
    let values: Vec<Result<Complex64>> = t_grid
        .par_iter()
        .map(|&t| {
            let (c, d) = inversion_at(ktype, t, &s.lambda_grid, &weighted, &s.fhat_b)?;
            Ok(c + d)
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let mags: Vec<f64> = (0..w.len()).map(|i| s.fhat_h[i].norm() * dens[i]).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let truncation_indicator = if peak > 0.0 { mags[mags.len() - 1] / peak } else { 0.0 };
    Ok(InverseResult {
        profile: RadialProfile {
            ktype,
            t_grid: t_grid.to_vec(),
            values,
        },
        calibration: INVERSION_CALIBRATION,
        truncation_indicator,
    })
}

/// Outcome of a forward/inverse round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub rel_l2_error: f64,
    pub rel_l2_error_without_discrete: f64,
    pub spectral: SpectralData,
}

/// Forward then inverse transform, error measured in L^2(Delta dt) on the Gauss nodes of [0, T].
pub fn round_trip(f: &RadialProfile, lambda_grid: &[f64], cfg: &TransformConfig) -> Result<RoundTrip> {
    let (ts, ws, fs) = radial_nodes(f, cfg);
    let table = PhiTable::build(f.ktype, lambda_grid, &ts)?;
    let fhat_h = forward_with_table(&table, &ws, &fs);
    let fhat_b = discrete_transform(f, cfg)?;
    let spectral = SpectralData {
        n: f.ktype.n,
        lambda_grid: lambda_grid.to_vec(),
        fhat_h,
        fhat_b,
    };
    let lw = lambda_weights(lambda_grid)?;
    let dens = density_on(f.ktype.n, lambda_grid)?;
    let weighted: Vec<Complex64> = (0..lw.len()).map(|i| spectral.fhat_h[i] * (lw[i] * dens[i])).collect();
    let scale = (2.0 / (4.0 * PI * PI)) * INVERSION_CALIBRATION;
    let mut err = 0.0;
    let mut err_nd = 0.0;
    let mut norm = 0.0;
    for (ti, &t) in ts.iter().enumerate() {
        let terms: Vec<Complex64> = (0..lw.len()).map(|li| weighted[li] * table.get(li, ti)).collect();
        let cont = pairwise_sum(&terms) * scale;
        let mut dis = Complex64::new(0.0, 0.0);
        for (&k, fb) in &spectral.fhat_b {
            dis += *fb * psi_discrete(k, f.ktype, t)? * (k.unsigned_abs() as f64);
        }
        dis *= INVERSION_CALIBRATION / (2.0 * PI);
        err += ws[ti] * (cont + dis - fs[ti]).norm_sqr();
        err_nd += ws[ti] * (cont - fs[ti]).norm_sqr();
        norm += ws[ti] * fs[ti].norm_sqr();
    }
    Ok(RoundTrip {
        rel_l2_error: (err / norm).sqrt(),
        rel_l2_error_without_discrete: (err_nd / norm).sqrt(),
        spectral,
    })
}

/// Uniform grid `0, h, ..., Lambda` with `points` samples.
pub fn uniform_lambda_grid(lambda_max: f64, points: usize) -> Vec<f64> {
    let m = points.max(2);
    (0..m).map(|i| lambda_max * i as f64 / (m - 1) as f64).collect()
}

/// `A f(r) = e^r int_R f([nbar_v a_r]^+) dv` for a K-biinvariant profile.
pub fn abel_transform(f: &RadialProfile, r_grid: &[f64]) -> Result<Vec<f64>> {
    if f.ktype.n != 0 {
        return Err(Error::domain(format!(
            "Abel transform needs n = 0, got n = {}",
            f.ktype.n
        )));
    }
    let big_t = f.support_end();
    r_grid.iter().map(|&r| abel_at(f, r, big_t)).collect()
}

fn radius_of(v: f64, r: f64) -> f64 {
    (GroupElement::nbar(v) * GroupElement::a(r)).radius()
}

fn abel_at(f: &RadialProfile, r: f64, big_t: f64) -> Result<f64> {
    if r.abs() >= big_t {
        return Ok(0.0);
    }
    // the radius grows with |v|; find where it leaves the support
    let mut hi = (2.0 * big_t).exp().sqrt();
    while radius_of(hi, r) < big_t {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if radius_of(mid, r) < big_t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    let panels = PanelSpec::new(32, (hi / 40.0).max(1e-6));
    let mut acc = 0.0;
    for (v, w) in panels.points(0.0, hi) {
        let val = f.eval(radius_of(v, r)).re;
        if !val.is_finite() {
            return Err(Error::non_finite("Abel integrand", format!("v={v}, r={r}")));
        }
        acc += w * val;
    }
    Ok(2.0 * r.exp() * acc)
}
