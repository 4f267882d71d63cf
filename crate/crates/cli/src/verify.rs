//! Quick invariant checks behind `nnh verify`.

use std::f64::consts::PI;
use std::time::Instant;

use nn_harmonic::group_geometry::{
    cartan_decompose, delta_antiderivative, iwasawa_decompose, radial_integral, GroupElement,
};
use nn_harmonic::hc_expansion::{phi_global_series, psi_series};
use nn_harmonic::lorentz::weak_boundary_scan;
use nn_harmonic::plancherel::{c_inv, c_inv_minus, density_closed_form, plancherel_density};
use nn_harmonic::psido::{
    apply_psido_spectral, builtin, cw_bands, cw_symbol_extract, kernel_continuous, kernel_global, CwConfig,
    GlobalKernelOptions,
};
use nn_harmonic::quadrature::PanelSpec;
use nn_harmonic::special_functions::{gamma, gauss_2f1};
use nn_harmonic::spherical::{
    phi_nn, phi_nn_hypergeometric, phi_nn_integral_rep, phi_nn_ode, psi_discrete, verify_functional_identity, KType,
};
use nn_harmonic::transforms::{
    abel_transform, forward, round_trip, uniform_lambda_grid, RadialProfile, TransformConfig,
};
use nn_harmonic::{Complex64, Error, Result};

use crate::args::Suite;

type Outcome = Result<(bool, String)>;

struct Check {
    suite: Suite,
    name: &'static str,
    run: fn() -> Outcome,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn bump(n: i64, support: f64) -> Result<RadialProfile> {
    let grid: Vec<f64> = (0..=300).map(|i| i as f64 * support / 300.0).collect();
    RadialProfile::from_fn(KType::new(n), grid, |t| {
        let u = t / support;
        c(if u < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        })
    })
}

fn within(err: f64, tol: f64) -> Outcome {
    Ok((err < tol, format!("{err:.2e} < {tol:.0e}")))
}

fn decompositions() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let g = GroupElement::k(0.31 * i as f64)
                * GroupElement::a(-2.0 + 0.2 * j as f64)
                * GroupElement::n(1.7 - 0.17 * i as f64);
            worst = worst.max(iwasawa_decompose(&g).recompose().max_abs_diff(&g));
            worst = worst.max(cartan_decompose(&g).recompose().max_abs_diff(&g));
        }
    }
    within(worst, 1e-10)
}

fn haar_weight() -> Outcome {
    let q = radial_integral(|_| 1.0, 2.0, PanelSpec::default())?;
    within((q.value - delta_antiderivative(2.0)).abs() / q.value, 1e-12)
}

fn gamma_values() -> Outcome {
    let e1 = (gamma(c(5.0))? - c(24.0)).norm() / 24.0;
    let e2 = (gamma(c(0.5))? - c(PI.sqrt())).norm() / PI.sqrt();
    // Gamma(z) Gamma(1-z) = pi / sin(pi z)
    let z = Complex64::new(0.3, 0.7);
    let e3 = (gamma(z)? * gamma(c(1.0) - z)? * (z * PI).sin() - c(PI)).norm() / PI;
    within(e1.max(e2).max(e3), 1e-13)
}

fn hypergeometric_log() -> Outcome {
    let z = -0.5;
    let got = gauss_2f1(c(1.0), c(1.0), c(2.0), z)?;
    within((got - c(-(1.0 - z).ln() / z)).norm(), 1e-13)
}

fn phi_routes() -> Outcome {
    let mut worst = 0.0f64;
    for n in [0, 1, 3] {
        let kt = KType::new(n);
        for l in [c(0.5), c(2.0), Complex64::new(0.0, 0.5)] {
            let ode = phi_nn_ode(kt, l, &[0.5, 1.5])?;
            for (i, t) in [0.5, 1.5].into_iter().enumerate() {
                let h = phi_nn_hypergeometric(kt, l, t)?;
                worst = worst
                    .max((h - phi_nn_integral_rep(kt, l, t)?).norm())
                    .max((h - ode[i]).norm());
            }
        }
    }
    within(worst, 1e-6)
}

fn phi_at_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in -2..=3 {
        worst = worst.max((phi_nn(KType::new(n), Complex64::new(1.3, 0.2), 0.0)? - c(1.0)).norm());
    }
    within(worst, 1e-14)
}

fn psi_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=3i64 {
        for t in [0.0f64, 0.7, 3.0] {
            let want = t.cosh().powi(-(k as i32 + 1));
            worst = worst.max((psi_discrete(k, KType::new(k + 1), t)? - want).abs() / want);
        }
    }
    within(worst, 1e-12)
}

fn functional_identity() -> Outcome {
    let x = GroupElement::k(0.4) * GroupElement::a(0.6) * GroupElement::n(-0.3);
    let y = GroupElement::k(2.0) * GroupElement::a(-0.2) * GroupElement::n(0.8);
    let chk = verify_functional_identity(KType::new(2), 1.1, &x, &y, 256)?;
    within(chk.residual, 1e-6)
}

fn density_forms() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=4 {
        for l in [0.01, 0.5, 3.0, 25.0] {
            let d = plancherel_density(n, l)?;
            worst = worst.max((d - density_closed_form(n, l).abs()).abs() / d);
            // |c|^-2 = c(lambda)^-1 c(-lambda)^-1 on the real line
            worst = worst.max((c_inv(n, c(l))? * c_inv_minus(n, c(l))? - c(d)).norm() / d);
        }
    }
    within(worst, 1e-10)
}

fn hc_series() -> Outcome {
    let mut worst = 0.0f64;
    for n in [0, 2] {
        for t in [1.0, 2.0] {
            let d = phi_nn_hypergeometric(KType::new(n), c(1.5), t)?;
            worst = worst.max((phi_global_series(n, c(1.5), t, 30)? - d).norm() / d.norm());
        }
    }
    within(worst, 1e-9)
}

fn psi_series_check() -> Outcome {
    let mut worst = 0.0f64;
    for t in [1.0, 2.5] {
        let d = psi_discrete(2, KType::new(3), t)?;
        worst = worst.max((psi_series(2, 3, t, 30)? - d).abs() / d);
    }
    within(worst, 1e-8)
}

fn round_trip_check() -> Outcome {
    let rt = round_trip(
        &bump(2, 3.0)?,
        &uniform_lambda_grid(40.0, 1001),
        &TransformConfig::default(),
    )?;
    let ok = rt.rel_l2_error < 1e-3 && rt.rel_l2_error_without_discrete > rt.rel_l2_error;
    Ok((
        ok,
        format!(
            "{:.2e}, without discrete {:.2e}",
            rt.rel_l2_error, rt.rel_l2_error_without_discrete
        ),
    ))
}

fn abel_even() -> Outcome {
    let f = bump(0, 2.0)?;
    let a = abel_transform(&f, &[-0.7, 0.7])?;
    let odd = abel_transform(&bump(1, 2.0)?, &[0.5]);
    let ok = (a[0] - a[1]).abs() < 1e-10 * a[1].abs() && matches!(odd, Err(Error::Domain(_)));
    Ok((
        ok,
        format!("A f(-r) - A f(r) = {:.1e}; n = 1 rejected", (a[0] - a[1]).abs()),
    ))
}

fn weak_boundary() -> Outcome {
    let ts: Vec<f64> = (0..=1400).map(|i| i as f64 * 0.01).collect();
    let f = RadialProfile::from_fn(KType::new(2), ts, |t| c(t.cosh().powi(-2)))?;
    let grid: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
    let p = weak_boundary_scan(&f, &grid)?;
    Ok((
        p.is_some_and(|p| (p - 1.0).abs() <= 0.05 + 1e-12),
        format!("p* = {p:?}, expected 1"),
    ))
}

fn identity_symbol() -> Outcome {
    let f = bump(1, 3.0)?;
    let s = forward(&f, &uniform_lambda_grid(40.0, 1001), &TransformConfig::default())?;
    let one = builtin::constant(c(1.0)).with_discrete_from_eval(1, 0.0);
    let xs = [0.0, 0.5, 1.0, 2.0];
    let out = apply_psido_spectral(&one, &s, &xs)?;
    let err = xs
        .iter()
        .zip(&out.values)
        .map(|(x, v)| (v - f.eval(*x)).norm())
        .fold(0.0, f64::max);
    within(err, 1e-3)
}

fn kernel_even() -> Outcome {
    let s = builtin::gaussian(1e-2);
    let a = kernel_continuous(&s, 1, 0.0, 0.8, None)?;
    let b = kernel_continuous(&s, 1, 0.0, -0.8, None)?;
    within((a - b).norm() / a.norm(), 1e-10)
}

fn global_bound() -> Outcome {
    let s = builtin::global_test_family(1.5, 0, 1e-3);
    let mut ratios = Vec::new();
    let mut agree = 0.0f64;
    for r in [1.0, 2.0, 4.0, 6.0] {
        let g = kernel_global(&s, 1.5, 0, 0.0, r, GlobalKernelOptions::default())?;
        ratios.push(g.bound_ratio);
        agree = agree.max((g.direct - g.contour).norm() / g.direct.norm());
    }
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        spread < 1e3 && agree < 1e-6,
        format!("max/min {spread:.1}, contour {agree:.0e}"),
    ))
}

fn cw_bounded() -> Outcome {
    let xi: Vec<f64> = (0..=200).map(|i| 0.1 * i as f64).collect();
    let s = builtin::sigma_nu(c(0.5)).with_epsilon(1e-3);
    let a = cw_symbol_extract(&s, 0, 0.3, 0.0, &xi, &CwConfig::default())?;
    let b = cw_bands(&xi, &a)?;
    Ok((b.bounded, format!("tail ratios {:.2?}", b.tail_ratio)))
}

const CHECKS: &[Check] = &[
    Check {
        suite: Suite::Geometry,
        name: "Iwasawa/Cartan recomposition",
        run: decompositions,
    },
    Check {
        suite: Suite::Geometry,
        name: "Haar weight integral",
        run: haar_weight,
    },
    Check {
        suite: Suite::Special,
        name: "Gamma values and reflection",
        run: gamma_values,
    },
    Check {
        suite: Suite::Special,
        name: "2F1(1,1;2;z) logarithm",
        run: hypergeometric_log,
    },
    Check {
        suite: Suite::Spherical,
        name: "phi route agreement",
        run: phi_routes,
    },
    Check {
        suite: Suite::Spherical,
        name: "phi(e) = 1",
        run: phi_at_identity,
    },
    Check {
        suite: Suite::Spherical,
        name: "psi = cosh^-(k+1)",
        run: psi_closed_form,
    },
    Check {
        suite: Suite::Spherical,
        name: "functional identity",
        run: functional_identity,
    },
    Check {
        suite: Suite::Plancherel,
        name: "density closed forms",
        run: density_forms,
    },
    Check {
        suite: Suite::Hc,
        name: "phi series vs direct",
        run: hc_series,
    },
    Check {
        suite: Suite::Hc,
        name: "psi series vs psi",
        run: psi_series_check,
    },
    Check {
        suite: Suite::Transforms,
        name: "inversion round trip",
        run: round_trip_check,
    },
    Check {
        suite: Suite::Transforms,
        name: "Abel evenness",
        run: abel_even,
    },
    Check {
        suite: Suite::Lorentz,
        name: "weak-L^p boundary",
        run: weak_boundary,
    },
    Check {
        suite: Suite::Psido,
        name: "identity symbol",
        run: identity_symbol,
    },
    Check {
        suite: Suite::Psido,
        name: "kernel evenness",
        run: kernel_even,
    },
    Check {
        suite: Suite::Psido,
        name: "global kernel bound",
        run: global_bound,
    },
    Check {
        suite: Suite::Psido,
        name: "Euclidean symbol bands",
        run: cw_bounded,
    },
];

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::All => "all",
        Suite::Geometry => "geometry",
        Suite::Special => "special",
        Suite::Spherical => "spherical",
        Suite::Plancherel => "plancherel",
        Suite::Hc => "hc",
        Suite::Transforms => "transforms",
        Suite::Lorentz => "lorentz",
        Suite::Psido => "psido",
    }
}

/// Prints the table and returns whether every selected check passed.
pub fn run(suite: Suite) -> bool {
    let mut all_ok = true;
    out!("{:<11} {:<32} {:<6} {:>8}  detail", "suite", "check", "result", "time");
    for chk in CHECKS.iter().filter(|c| suite == Suite::All || c.suite == suite) {
        let start = Instant::now();
        let (ok, detail) = match (chk.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all_ok &= ok;
        out!(
            "{:<11} {:<32} {:<6} {:>7.2}s  {detail}",
            suite_name(chk.suite),
            chk.name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    all_ok
}
