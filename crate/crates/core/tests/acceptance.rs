//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nn_harmonic::group_geometry::{cartan_decompose, iwasawa_decompose, GroupElement};
use nn_harmonic::hc_expansion::{phi_global_series, psi_series};
use nn_harmonic::lorentz::{lorentz_pq_norm, weak_boundary_scan};
use nn_harmonic::plancherel::{c_inv_minus, plancherel_density};
use nn_harmonic::psido::{
    apply_psido, apply_psido_spectral, builtin, cw_bands, cw_symbol_extract, kernel_global, multiplier_transform,
    split_operator, CwConfig, GlobalKernelOptions, PsidoConfig, SplitConfig,
};
use nn_harmonic::spherical::{
    phi_nn_hypergeometric, phi_nn_integral_rep, phi_nn_ode, psi_discrete, verify_functional_identity, KType,
};
use nn_harmonic::transforms::{forward, round_trip, uniform_lambda_grid, RadialProfile, TransformConfig};
use nn_harmonic::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn fail<T: std::fmt::Display>(e: T) -> String {
    e.to_string()
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bump(n: i64, support: f64, step: f64) -> RadialProfile {
    let m = (support / step).round() as usize;
    let grid: Vec<f64> = (0..=m).map(|i| i as f64 * step).collect();
    RadialProfile::from_fn(KType::new(n), grid, |t| {
        let u = t / support;
        c(if u < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        })
    })
    .expect("bump grid is valid")
}

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let m = ((stop - start) / step).round() as usize;
    (0..=m).map(|i| start + i as f64 * step).collect()
}

/// Derivatives 0..=2 of a holomorphic (or smooth real) function by five-point stencils.
fn derivs<F: Fn(Complex64) -> Option<Complex64>>(f: &F, z: Complex64, h: f64) -> Option<[Complex64; 3]> {
    let hs = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| f(z + c(k * h)));
    let [m2, m1, z0, p1, p2] = [hs[0]?, hs[1]?, hs[2]?, hs[3]?, hs[4]?];
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z0 + 16.0 * p1 - p2) / (12.0 * h * h);
    Some([z0, d1, d2])
}

/// Band sup over the far half of the sample no larger than twice the near half.
fn bounded_band(xs: &[f64], band: &[f64], split: f64) -> bool {
    let head = xs
        .iter()
        .zip(band)
        .filter(|(x, _)| **x < split)
        .map(|(_, b)| *b)
        .fold(0.0, f64::max);
    let tail = xs
        .iter()
        .zip(band)
        .filter(|(x, _)| **x >= split)
        .map(|(_, b)| *b)
        .fold(0.0, f64::max);
    band.iter().all(|b| b.is_finite()) && tail <= 2.0 * head
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut iw, mut ca) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let a = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.gen_range(-3.0..3.0);
        let cc = rng.gen_range(-3.0..3.0);
        let g = GroupElement::new(a, b, cc, (1.0 + b * cc) / a).map_err(fail)?;
        iw = iw.max(iwasawa_decompose(&g).recompose().max_abs_diff(&g));
        ca = ca.max(cartan_decompose(&g).recompose().max_abs_diff(&g));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        iw < 1e-10 && ca < 1e-10 && secs < 5.0,
        format!("iwasawa {iw:.2e}, cartan {ca:.2e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let ts = [0.3, 1.0, 2.0];
    let lambdas = [c(0.0), c(1.0), c(2.5), Complex64::new(0.0, 1.0)];
    let mut worst = 0.0f64;
    let mut points = 0;
    for n in [0, 1, 2, 4] {
        let kt = KType::new(n);
        for &l in &lambdas {
            let ode = phi_nn_ode(kt, l, &ts).map_err(fail)?;
            for (i, &t) in ts.iter().enumerate() {
                let h = phi_nn_hypergeometric(kt, l, t).map_err(fail)?;
                let r = phi_nn_integral_rep(kt, l, t).map_err(fail)?;
                worst = worst
                    .max((h - r).norm())
                    .max((h - ode[i]).norm())
                    .max((r - ode[i]).norm());
                points += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        points == 48 && worst < 1e-6 && secs < 60.0,
        format!("{points} points, max pairwise {worst:.2e}, {secs:.2} s"),
    )
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random_element = |rng: &mut ChaCha8Rng| {
        GroupElement::k(rng.gen_range(0.0..2.0 * PI))
            * GroupElement::a(rng.gen_range(-1.2..1.2))
            * GroupElement::n(rng.gen_range(-1.0..1.0))
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_element(&mut rng);
        let y = random_element(&mut rng);
        let n = rng.gen_range(0..=4);
        let lambda = rng.gen_range(0.0..3.0);
        let chk = verify_functional_identity(KType::new(n), lambda, &x, &y, 256).map_err(fail)?;
        // recompute the residual from the two sides rather than trusting the reported one
        worst = worst.max((chk.lhs - chk.rhs).norm());
    }
    ensure(worst < 1e-6, format!("20 cases, max residual {worst:.2e}"))
}

fn criterion_4() -> Check {
    let mut worst = 0.0f64;
    for n in 0..=4i64 {
        for i in 1..=5000 {
            let l = 0.01 * i as f64;
            let x = l * PI / 2.0;
            let want = if n % 2 == 0 { x * x.tanh() } else { (x / x.tanh()).abs() };
            let got = plancherel_density(n, l).map_err(fail)?;
            worst = worst.max((got - want).abs() / want);
        }
    }
    if worst >= 1e-10 {
        return Err(format!("density closed form off by {worst:.2e}"));
    }

    let xs = grid(0.0, 0.1, 50.0);
    let mut unbounded = Vec::new();
    for p in [1.0f64, 1.5] {
        let gamma = (2.0 / p - 1.0).abs();
        for n in 0..=4i64 {
            let f = |z: Complex64| c_inv_minus(n, z).ok();
            for y in [-0.99 * gamma, 0.0, 0.5 * gamma, 0.99 * gamma] {
                let mut bands = [vec![], vec![], vec![]];
                let mut kept = Vec::new();
                for &x in &xs {
                    let z = Complex64::new(x, y);
                    let near_pole = (z - Complex64::i()).norm() < 0.1 || (z + Complex64::i()).norm() < 0.1;
                    if p == 1.0 && n % 2 == 0 && n != 0 && near_pole {
                        continue;
                    }
                    let d = derivs(&f, z, 1e-3).ok_or(format!("c(-l)^-1 undefined near {z} (n={n})"))?;
                    for a in 0..3 {
                        bands[a].push((1.0 + z.norm()).powf(a as f64 - 0.5) * d[a].norm());
                    }
                    kept.push(x);
                }
                for (a, b) in bands.iter().enumerate() {
                    if !bounded_band(&kept, b, 25.0) {
                        unbounded.push(format!("c p={p} n={n} y={y:.2} a={a}"));
                    }
                }
            }
        }
    }
    for n in 0..=4i64 {
        let f = |z: Complex64| plancherel_density(n, z.re).ok().map(c);
        let mut bands = [vec![], vec![], vec![]];
        for &x in &xs {
            // the density is even, so stencils at x < 2h are still valid
            let d = derivs(&f, c(x), 1e-3).ok_or(format!("density undefined near {x}"))?;
            for a in 0..3 {
                bands[a].push((1.0 + x).powf(a as f64 - 1.0) * d[a].norm());
            }
        }
        for (a, b) in bands.iter().enumerate() {
            if !bounded_band(&xs, b, 25.0) {
                unbounded.push(format!("density n={n} a={a}"));
            }
        }
    }
    ensure(
        unbounded.is_empty(),
        format!("density max rel err {worst:.2e}; unbounded bands: {unbounded:?}"),
    )
}

fn criterion_5() -> Check {
    let k = 30usize;
    let mut worst_excess = 0.0f64;
    for n in [0, 1, 2, 4] {
        for l in [0.5, 1.5, 2.5] {
            for t in [1.0, 1.5, 2.0, 3.0] {
                let series = phi_global_series(n, c(l), t, k).map_err(fail)?;
                let direct = phi_nn_hypergeometric(KType::new(n), c(l), t).map_err(fail)?;
                let tol = 1e-9f64.max(10.0 * (-2.0 * (k as f64 + 1.0) * t).exp());
                let err = (series - direct).norm() / direct.norm();
                worst_excess = worst_excess.max(err / tol);
            }
        }
    }
    let mut worst_psi = 0.0f64;
    for (kk, n) in [(1, 2), (1, 4), (2, 3), (3, 4), (-1, -2), (-2, -3)] {
        for t in [1.0, 1.5, 2.0, 3.0, 5.0] {
            let s = psi_series(kk, n, t, k).map_err(fail)?;
            let oracle =
                phi_nn_hypergeometric(KType::new(n), Complex64::new(0.0, (kk as f64).abs()), t).map_err(fail)?;
            let direct = psi_discrete(kk, KType::new(n), t).map_err(fail)?;
            worst_psi = worst_psi
                .max((s - oracle.re).abs() / oracle.norm())
                .max((direct - oracle.re).abs() / oracle.norm());
        }
    }
    ensure(
        worst_excess <= 1.0 && worst_psi < 1e-8,
        format!("phi err/tol max {worst_excess:.2e}, psi rel err {worst_psi:.2e}"),
    )
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let lambdas = uniform_lambda_grid(40.0, 2000);
    let cfg = TransformConfig::default();
    let mut errs = Vec::new();
    let mut ablation = (0.0, 0.0);
    for n in 0..=3 {
        let rt = round_trip(&bump(n, 3.0, 0.01), &lambdas, &cfg).map_err(fail)?;
        if n == 2 {
            ablation = (rt.rel_l2_error, rt.rel_l2_error_without_discrete);
        }
        errs.push(rt.rel_l2_error);
    }
    let secs = start.elapsed().as_secs_f64();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    ensure(
        worst < 1e-3 && ablation.1 > ablation.0 && secs < 120.0,
        format!(
            "errors {:?}, n=2 without discrete {:.2e}, {secs:.1} s",
            errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
            ablation.1
        ),
    )
}

fn criterion_7() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let p_grid = grid(0.05, 0.05, 2.0);
    for k in 1..=3i64 {
        let kt = KType::new(k + 1);
        let scaled = |t: f64| psi_discrete(k, kt, t).map(|v| ((1 + k) as f64 * t).exp() * v);
        let (a, b) = (scaled(8.0).map_err(fail)?, scaled(12.0).map_err(fail)?);
        let drift = (a / b - 1.0).abs();
        ok &= drift < 0.01;

        let ts = grid(0.0, 0.01, 14.0);
        let vals: Vec<Complex64> = ts
            .iter()
            .map(|&t| psi_discrete(k, kt, t).map(c))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        let f = RadialProfile::new(kt, ts, vals).map_err(fail)?;
        let p_star = 2.0 / (k as f64 + 1.0);
        let found = weak_boundary_scan(&f, &p_grid).map_err(fail)?;
        let boundary_ok = found.is_some_and(|p| (p - p_star).abs() <= 0.05 + 1e-12);
        let endpoint_diverges = !lorentz_pq_norm(&f, p_star, 2.0).map_err(fail)?.is_finite();
        ok &= boundary_ok && endpoint_diverges;
        notes.push(format!(
            "k={k}: drift {drift:.1e}, p* {found:?} vs {p_star:.3}, L^(p*,2) infinite {endpoint_diverges}"
        ));
    }
    ensure(ok, notes.join("; "))
}

fn criterion_8() -> Check {
    let n = 2;
    let f = bump(n, 3.0, 0.01);
    let xs = grid(0.0, 0.25, 3.0);
    let one = builtin::constant(c(1.0)).with_discrete_from_eval(n, 0.0);
    let out = apply_psido(&one, &f, &xs, &PsidoConfig::default()).map_err(fail)?;
    let num: f64 = xs
        .iter()
        .zip(&out.values)
        .map(|(x, v)| (v - f.eval(*x)).norm_sqr())
        .sum();
    let den: f64 = xs.iter().map(|x| f.eval(*x).norm_sqr()).sum();
    let identity = (num / den).sqrt();

    let spectral = forward(&f, &uniform_lambda_grid(40.0, 1601), &TransformConfig::default()).map_err(fail)?;
    let rat = builtin::rational_multiplier().with_discrete_from_eval(n, 0.0);
    let a = apply_psido_spectral(&rat, &spectral, &xs).map_err(fail)?;
    let m = |l: f64| c((l * l + 1.0) / (l * l + 4.0));
    let b = multiplier_transform(m, &rat.discrete_values, &spectral, &xs).map_err(fail)?;
    let multiplier = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max);

    let g = bump(n, 1.5, 0.001);
    let heat = builtin::gaussian(1e-3).with_discrete_from_eval(n, 0.0);
    let pts = [0.3, 1.0, 2.0];
    let direct = apply_psido(&heat, &g, &pts, &PsidoConfig::default()).map_err(fail)?;
    let split = split_operator(&heat, &g, &pts, &SplitConfig::default()).map_err(fail)?;
    let scale = direct.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let split_err = split
        .total()
        .iter()
        .zip(&direct.values)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max)
        / scale;

    ensure(
        identity < 1e-3 && multiplier < 1e-10 && split_err < 1e-4,
        format!("identity {identity:.2e}, multiplier {multiplier:.2e}, split {split_err:.2e}"),
    )
}

fn criterion_9() -> Check {
    let rs = grid(0.5, 0.25, 6.0);
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [1.0, 1.5] {
        let exponent = if p <= 2.0 { 2.0 / p } else { 2.0 * (1.0 - 1.0 / p) };
        for n in 0..=2i64 {
            let s = builtin::global_test_family(p, n, 1e-3);
            let mut ratios = Vec::new();
            let mut agree = 0.0f64;
            let mut recompute = 0.0f64;
            for &r in &rs {
                let g = kernel_global(&s, p, n, 0.0, r, GlobalKernelOptions::default()).map_err(fail)?;
                ratios.push(g.bound_ratio);
                if g.direct.norm() > 0.0 {
                    agree = agree.max((g.direct - g.contour).norm() / g.direct.norm());
                }
                if g.eta > 0.01 {
                    let mine = (g.direct / g.eta).norm() * (1.0 + r).powi(2) * (exponent * r).exp();
                    recompute = recompute.max((mine - g.bound_ratio).abs() / g.bound_ratio);
                }
            }
            let max = ratios.iter().cloned().fold(0.0, f64::max);
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = max / min;
            ok &= min > 0.0 && spread < 1e3 && agree < 1e-6 && recompute < 1e-8;
            notes.push(format!("p={p} n={n}: max/min {spread:.1}, contour {agree:.0e}"));
        }
    }
    ensure(ok, notes.join("; "))
}

fn criterion_10() -> Check {
    let xi = grid(0.0, 0.05, 20.0);
    let cfg = CwConfig::default();
    let mut ok = true;
    let mut worst_tail = 0.0f64;
    for nu in [0.0, 0.5, 1.0] {
        let s = builtin::sigma_nu(c(nu)).with_epsilon(1e-3);
        for sv in [0.0, 0.5] {
            let a = cw_symbol_extract(&s, 0, 0.3, sv, &xi, &cfg).map_err(fail)?;
            let h = xi[1] - xi[0];
            // finite-difference bands computed here, independent of cw_bands
            for alpha in 0..3usize {
                let (pts, band): (Vec<f64>, Vec<f64>) = (1..xi.len() - 1)
                    .map(|i| {
                        let d = match alpha {
                            0 => a[i],
                            1 => (a[i + 1] - a[i - 1]) / (2.0 * h),
                            _ => (a[i + 1] - 2.0 * a[i] + a[i - 1]) / (h * h),
                        };
                        (xi[i], (1.0 + xi[i]).powi(alpha as i32) * d.norm())
                    })
                    .unzip();
                ok &= bounded_band(&pts, &band, 10.0);
            }
            let lib = cw_bands(&xi, &a).map_err(fail)?;
            ok &= lib.bounded;
            worst_tail = lib.tail_ratio.iter().fold(worst_tail, |m, v| m.max(*v));
        }
    }
    ensure(
        ok,
        format!("sigma_nu nu in {{0, 0.5, 1}}, s in {{0, 0.5}}: worst tail ratio {worst_tail:.2}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("decomposition round-trips", criterion_1),
        ("spherical triple agreement", criterion_2),
        ("functional identity", criterion_3),
        ("c-function closed forms and bands", criterion_4),
        ("Harish-Chandra series", criterion_5),
        ("inversion round-trip", criterion_6),
        ("psi asymptotics and weak L^p", criterion_7),
        ("operator identity and split", criterion_8),
        ("global kernel bound", criterion_9),
        ("Euclidean symbol extraction", criterion_10),
    ];
    let mut failures = 0;
    let mut total = Duration::ZERO;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        total += elapsed;
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:>2}] {name}: {detail} ({:.1} s)", i + 1, elapsed.as_secs_f64());
    }
    println!(
        "acceptance: {} passed, {failures} failed, {:.1} s",
        criteria.len() - failures,
        total.as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
