//! SL(2,R) matrices, their Iwasawa and Cartan coordinates, and the Haar weight.
//!
//! Conventions: `k_theta = [[cos, sin], [-sin, cos]]`, `a_t = diag(e^t, e^-t)`,
//! `n_v = [[1, v], [0, 1]]` and `nbar_v = [[1, 0], [v, 1]]`.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::PanelSpec;

const UNIMODULAR_TOL: f64 = 1e-12;

/// A real 2x2 matrix of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl GroupElement {
    /// Checked constructor; the determinant must be 1 to within 1e-12 relative to the entry scale.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if (det - 1.0).abs() > UNIMODULAR_TOL * scale {
            return Err(Error::domain(format!("determinant {det} is not 1")));
        }
        Ok(GroupElement { a, b, c, d })
    }

    /// Builds from entries known to be unimodular by construction.
    fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        GroupElement { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.0, 0.0, 0.0, 1.0)
    }

    pub fn k(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::raw(c, s, -s, c)
    }

    pub fn a(t: f64) -> Self {
        Self::raw(t.exp(), 0.0, 0.0, (-t).exp())
    }

    pub fn n(v: f64) -> Self {
        Self::raw(1.0, v, 0.0, 1.0)
    }

    pub fn nbar(v: f64) -> Self {
        Self::raw(1.0, 0.0, v, 1.0)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Cartan radius x^+.
    pub fn radius(&self) -> f64 {
        cartan_radius(self)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: GroupElement) -> GroupElement {
        GroupElement::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Coordinates of `x = k_theta a_t n_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IwasawaCoords {
    pub theta: f64,
    pub t: f64,
    pub v: f64,
}

impl IwasawaCoords {
    pub fn recompose(&self) -> GroupElement {
        GroupElement::k(self.theta) * GroupElement::a(self.t) * GroupElement::n(self.v)
    }
}

/// Coordinates of `g = k_theta1 a_r k_theta2` with `r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartanCoords {
    pub theta1: f64,
    pub r: f64,
    pub theta2: f64,
}

impl CartanCoords {
    pub fn recompose(&self) -> GroupElement {
        GroupElement::k(self.theta1) * GroupElement::a(self.r) * GroupElement::k(self.theta2)
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

pub fn iwasawa_decompose(g: &GroupElement) -> IwasawaCoords {
    let [a, b, c, d] = g.entries();
    let rho2 = a * a + c * c;
    IwasawaCoords {
        theta: wrap_angle((-c).atan2(a)),
        t: 0.5 * rho2.ln(),
        v: (a * b + c * d) / rho2,
    }
}

fn cartan_radius(g: &GroupElement) -> f64 {
    let [a, b, c, d] = g.entries();
    // sinh r = |(a-d, b+c)| / 2, free of the cancellation in arccosh(|g|^2/2)
    (0.5 * (a - d).hypot(b + c)).asinh()
}

/// Closed-form Cartan decomposition.
///
/// Writing `k_theta = R(-theta)` with `R` the usual rotation,
/// `R(al) diag(e^r, e^-r) R(be) = cosh r R(al+be) + sinh r sigma_z R(be-al)`,
/// which gives both angle combinations from the symmetric and antisymmetric parts.
pub fn cartan_decompose(g: &GroupElement) -> CartanCoords {
    let [a, b, c, d] = g.entries();
    let r = cartan_radius(g);
    let sum = (c - b).atan2(a + d);
    let diff = if r > 0.0 { (-(b + c)).atan2(a - d) } else { -sum };
    // al + be = sum, be - al = diff; r = 0 gauge chooses be = 0 (theta2 = 0)
    let (al, be) = if r > 0.0 {
        (0.5 * (sum - diff), 0.5 * (sum + diff))
    } else {
        (sum, 0.0)
    };
    CartanCoords {
        theta1: wrap_angle(-al),
        r,
        theta2: wrap_angle(-be),
    }
}

/// `[nbar_v a_r]^+` together with `H(nbar_v) = ln(1+v^2)/2` and the remainder `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbarRadius {
    pub radius: f64,
    pub h: f64,
    pub e: f64,
}

pub fn nbar_cartan_radius(v: f64, r: f64) -> Result<NbarRadius> {
    if r < 0.0 || !r.is_finite() || !v.is_finite() {
        return Err(Error::domain(format!(
            "nbar_cartan_radius needs finite v and r >= 0, got v={v}, r={r}"
        )));
    }
    let g = GroupElement::nbar(v) * GroupElement::a(r);
    let radius = cartan_decompose(&g).r;
    let h = 0.5 * v.mul_add(v, 1.0).ln();
    Ok(NbarRadius {
        radius,
        h,
        e: radius - r - h,
    })
}

/// Haar weight of the Cartan integral formula, `2 sinh 2t`.
pub fn delta(t: f64) -> f64 {
    2.0 * (2.0 * t).sinh()
}

/// `int_0^t Delta(s) ds = cosh 2t - 1`, computed without cancellation.
pub fn delta_antiderivative(t: f64) -> f64 {
    2.0 * t.sinh().powi(2)
}

/// A radial integral and an estimate of its relative quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub rel_error_estimate: f64,
}

/// `int_0^T h(t) 2 sinh(2t) dt` by composite Gauss-Legendre.
///
/// The error estimate compares against the same panels with half the nodes.
pub fn radial_integral<F: Fn(f64) -> f64>(h: F, t_max: f64, spec: PanelSpec) -> Result<QuadratureResult> {
    if !(t_max >= 0.0) {
        return Err(Error::domain(format!("upper limit must be >= 0, got {t_max}")));
    }
    let integrate = |spec: PanelSpec| -> Result<f64> {
        let mut acc = 0.0;
        for (t, w) in spec.points(0.0, t_max) {
            let y = h(t);
            if !y.is_finite() {
                return Err(Error::non_finite("radial_integral integrand", format!("t={t}")));
            }
            acc += w * y * delta(t);
        }
        Ok(acc)
    };
    let fine = integrate(spec)?;
    let coarse = integrate(PanelSpec::new((spec.nodes_per_panel / 2).max(1), spec.panel_width))?;
    let rel = if fine != 0.0 {
        (fine - coarse).abs() / fine.abs()
    } else {
        (fine - coarse).abs()
    };
    Ok(QuadratureResult {
        value: fine,
        rel_error_estimate: rel,
    })
}

/// Angles on the circle for an `m`-point trapezoid rule.
pub fn circle_nodes(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| 2.0 * PI * j as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn iwasawa_examples() {
        let id = iwasawa_decompose(&GroupElement::identity());
        assert_eq!((id.theta, id.t, id.v), (0.0, 0.0, 0.0));
        let p = iwasawa_decompose(&GroupElement::a(1.0));
        assert!(p.theta.abs() < 1e-15 && (p.t - 1.0).abs() < 1e-15 && p.v.abs() < 1e-15);
        let q = iwasawa_decompose(&GroupElement::nbar(1.0));
        assert!((q.t - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(q.recompose().max_abs_diff(&GroupElement::nbar(1.0)) < 1e-14);
    }

    #[test]
    fn cartan_examples() {
        let c = cartan_decompose(&GroupElement::a(0.7));
        assert!(c.theta1.abs() < 1e-15 && (c.r - 0.7).abs() < 1e-15 && c.theta2.abs() < 1e-15);
        let k = GroupElement::k(1.1);
        let ck = cartan_decompose(&k);
        assert_eq!(ck.r, 0.0);
        assert!(ck.recompose().max_abs_diff(&k) < 1e-15);
        let nb = cartan_decompose(&GroupElement::nbar(1.0));
        assert!((nb.r - 0.5 * 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(GroupElement::new(1.0, 0.0, 0.0, 2.0).is_err());
        assert!(GroupElement::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn nbar_radius_examples() {
        let z = nbar_cartan_radius(0.0, 2.0).unwrap();
        assert!((z.radius - 2.0).abs() < 1e-15 && z.e.abs() < 1e-15);
        let one = nbar_cartan_radius(1.0, 0.0).unwrap();
        assert!((one.radius - 0.5 * 1.5f64.acosh()).abs() < 1e-15);
        assert!(one.e <= 2.0 && one.e >= -1e-12);
        let far = nbar_cartan_radius(1.0, 5.0).unwrap();
        assert!((far.radius - 5.0 - 0.5 * 2f64.ln()).abs() <= 2.0 * (-10f64).exp());
    }

    #[test]
    fn radial_integral_closed_forms() {
        let z = radial_integral(|_| 0.0, 1.0, PanelSpec::default()).unwrap();
        assert_eq!(z.value, 0.0);
        let one = radial_integral(|_| 1.0, 1.0, PanelSpec::default()).unwrap();
        assert!((one.value - (2f64.cosh() - 1.0)).abs() < 1e-13);
        assert!(radial_integral(|_| f64::NAN, 1.0, PanelSpec::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn decompositions_round_trip(th in 0.0..TAU, t in -4.0..4.0f64, v in -5.0..5.0f64, ph in 0.0..TAU) {
            let g = GroupElement::k(th) * GroupElement::a(t) * GroupElement::n(v) * GroupElement::k(ph);
            let iw = iwasawa_decompose(&g).recompose();
            let ca = cartan_decompose(&g).recompose();
            let scale = g.frobenius_sq().sqrt();
            prop_assert!(iw.max_abs_diff(&g) < 1e-12 * scale.max(1.0));
            prop_assert!(ca.max_abs_diff(&g) < 1e-12 * scale.max(1.0));
        }

        #[test]
        fn radius_sandwich(v in -50.0..50.0f64, r in 0.0..8.0f64) {
            let nr = nbar_cartan_radius(v, r).unwrap();
            prop_assert!(nr.e >= -1e-10 && nr.e <= 2.0 * (-2.0 * r).exp() + 1e-10);
        }
    }
}
