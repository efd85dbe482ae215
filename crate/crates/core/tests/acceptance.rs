//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run alone with `cargo test -p furstenberg-core --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use furstenberg_core::fourier::{self, PhaseFunctions};
use furstenberg_core::mc::median;
use furstenberg_core::proj2::{act, cartan, cocycle, dist};
use furstenberg_core::renewal::{self, RenewalKind, RenewalQuery, Target};
use furstenberg_core::smoothing::{convolution_gap, gaussian_pair, inequality_exp, pv_hilbert, Regime};
use furstenberg_core::transfer::{
    self, apply_p, b_eps_k, GridFunction, Interpolation, LambdaSource, TransferMatrix,
};
use furstenberg_core::walk::{self, estimate_lyapunov_clt};
use furstenberg_core::{Complex64, GeneratorMeasure, Mat2, ProjPoint, TrajectorySampler};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference() -> TrajectorySampler {
    TrajectorySampler::new(GeneratorMeasure::reference(), 1, 1).unwrap()
}

/// Lyapunov exponent and variance of the reference measure at `n = 10^4`, `N = 10^3`.
fn lyapunov() -> (f64, f64) {
    let l = estimate_lyapunov_clt(&reference().with_seed(2024), 10_000, 1000).unwrap();
    (l.gamma_hat, l.a2_hat)
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Mat2 {
    let l = rng.random_range(0.0..5.0f64).exp();
    Mat2::rotation(rng.random_range(0.0..TAU)) * Mat2::diag(l) * Mat2::rotation(rng.random_range(0.0..TAU))
}

fn random_point(rng: &mut ChaCha8Rng) -> ProjPoint {
    ProjPoint::from_angle(rng.random_range(0.0..PI))
}

fn c01_exact_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = 10_000;
    let mut worst = [0.0f64; 5];
    for _ in 0..cases {
        let (g, h) = (random_matrix(&mut rng), random_matrix(&mut rng));
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        worst[0] = worst[0].max((cocycle(&(g * h), &x) - cocycle(&g, &act(&h, &x)) - cocycle(&h, &x)).abs());
        let lhs = dist(&act(&g, &x), &act(&g, &y));
        worst[1] = worst[1].max((lhs - (-cocycle(&g, &x) - cocycle(&g, &y)).exp() * dist(&x, &y)).abs());
        let c = cartan(&g);
        let z = dist(&c.z_min, &x);
        let mid = cocycle(&g, &x).exp() / g.norm();
        worst[2] = worst[2].max((z - mid).max(mid - z - g.norm().powi(-2)).max(0.0));
        worst[3] = worst[3].max(c.reconstruct().max_abs_diff(&g) / g.norm());
        worst[4] = worst[4].max((g.norm() - g.inverse().norm()).abs() / g.norm());
    }
    let m = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        m <= 1e-9,
        format!(
            "{cases} cases; residuals cocycle {:.1e}, contraction {:.1e}, sandwich {:.1e}, cartan {:.1e}, inverse norm {:.1e} (tol 1e-9)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn c02_lyapunov() -> Outcome {
    let diag = TrajectorySampler::new(GeneratorMeasure::dirac(Mat2::diag(2.0)), 1, 1).unwrap();
    let d = estimate_lyapunov_clt(&diag, 10_000, 4).unwrap();
    let e1 = (d.gamma_hat - std::f64::consts::LN_2).abs();
    let a = estimate_lyapunov_clt(&reference().with_seed(11), 10_000, 1000).unwrap();
    let b = estimate_lyapunov_clt(&reference().with_seed(12), 10_000, 1000).unwrap();
    let z = (a.gamma_hat - b.gamma_hat).abs() / a.se_gamma.hypot(b.se_gamma);
    outcome(
        e1 <= 1e-12 && z <= 3.0,
        format!(
            "diag error {e1:.1e} (tol 1e-12); seeds {:.5} vs {:.5}, gap {z:.2} combined se (tol 3)",
            a.gamma_hat, b.gamma_hat
        ),
    )
}

fn c03_transfer_fixed_point() -> Outcome {
    let mu = GeneratorMeasure::reference();
    let mut worst_one = 0.0f64;
    let mut worst_lambda = 0.0f64;
    for grid in [256, 1024] {
        let op = TransferMatrix::new(&mu, 0.0, grid, Interpolation::Linear).unwrap();
        let u = apply_p(&op, &GridFunction::constant(grid, 1.0).unwrap(), 1).unwrap();
        worst_one = worst_one.max(u.values().iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max));
        let lead = transfer::leading_eigen(&op, 1e-13, 20_000).unwrap();
        worst_lambda = worst_lambda.max((lead.value - 1.0).norm());
    }
    outcome(
        worst_one == 0.0 && worst_lambda <= 1e-10,
        format!("max |P_0 1 - 1| = {worst_one:.1e} (exact), max |lambda_0 - 1| = {worst_lambda:.1e} (tol 1e-10)"),
    )
}

fn c04_eigenvalue_expansion(gamma: f64, a2: f64) -> Outcome {
    let xi_max = (0.3 / a2.sqrt()).min(1.0);
    let c = transfer::lambda_curve(&GeneratorMeasure::reference(), xi_max, 21, 1024).unwrap();
    let r1 = c.gamma_fit / gamma - 1.0;
    let r2 = c.curvature_fit / (a2 + gamma * gamma) - 1.0;
    outcome(
        r1.abs() <= 0.05 && r2.abs() <= 0.15,
        format!(
            "slope ratio - 1 = {r1:+.4} (tol 0.05), curvature ratio - 1 = {r2:+.4} (tol 0.15); xi_max {xi_max:.3}"
        ),
    )
}

fn c05_spectral_radius() -> Outcome {
    let r = transfer::spectral_radius_scan(&GeneratorMeasure::reference(), &[1.0, 2.0, 5.0], 1024, 200).unwrap();
    let rot = transfer::spectral_radius_scan(&GeneratorMeasure::dirac(Mat2::rotation(1.0)), &[1.0], 1024, 200).unwrap();
    let worst = r.iter().map(|p| p.1).fold(0.0, f64::max);
    outcome(
        worst <= 0.98 && (rot[0].1 - 1.0).abs() <= 0.01,
        format!(
            "radii at xi = 1, 2, 5: {:.3}, {:.3}, {:.3} (tol 0.98); rotation {:.4} (1 +- 0.01)",
            r[0].1, r[1].1, r[2].1, rot[0].1
        ),
    )
}

fn c06_equidistribution() -> Outcome {
    let u = GridFunction::from_real_fn(1024, f64::cos).unwrap();
    let n: Vec<usize> = (1..=40).collect();
    let d = transfer::equidistribution_check(&GeneratorMeasure::reference(), &u, &n).unwrap();
    outcome(d.r2 >= 0.9, format!("slope {:.4}, R^2 {:.4} (tol 0.9)", d.slope, d.r2))
}

fn c07_b_eps_k(a2: f64) -> Outcome {
    let syn = b_eps_k(&LambdaSource::Synthetic { gamma: 1.0, a2: 1.0 }, 0.5, 1e4).unwrap();
    let xi_max = (0.3 / a2.sqrt()).min(1.0);
    let c = transfer::lambda_curve(&GeneratorMeasure::reference(), xi_max, 21, 1024).unwrap();
    let fit = b_eps_k(&LambdaSource::Curve(&c), xi_max.min(0.5), 1e4).unwrap();
    outcome(
        (syn - PI).abs() <= 0.02 && (fit - PI).abs() <= 0.1,
        format!("synthetic |B - pi| = {:.1e} (tol 0.02), fitted curve {:.1e} (tol 0.1)", (syn - PI).abs(), (fit - PI).abs()),
    )
}

fn eta(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(2)
    } else {
        0.0
    }
}

fn agrees(est: &renewal::RenewalEstimate, lim: &renewal::LimitEstimate, band: f64) -> (bool, f64) {
    let tol = (3.0 * est.se.hypot(lim.se)).max(band * lim.value.abs());
    let gap = (est.value - lim.value).abs();
    (gap <= tol, gap / tol)
}

fn c08_renewal_asymptotics(gamma: f64) -> Outcome {
    let s = reference();
    let mu = s.measure().clone();
    let n = 100_000;
    let nu = walk::empirical_measure(&s.with_seed(99), 300, n, &ProjPoint::e1());
    let nu_check = walk::empirical_measure(&s.reversed().with_seed(98), 300, n, &ProjPoint::e1());
    let t = 30.0 * gamma;
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut check = |q: &RenewalQuery, band: f64| {
        let est = renewal::estimate(q, &s, gamma, n).unwrap();
        let lim = renewal::limit(q, &nu, Some(&nu_check), &mu, gamma).unwrap();
        let (ok, r) = agrees(&est, &lim, band);
        pass &= ok;
        worst = worst.max(r);
    };
    for x in [ProjPoint::e1(), ProjPoint::e2(), fourier::chart_inverse(2.0)] {
        let q = RenewalQuery::new(
            RenewalKind::R,
            Target::Point(Box::new(|th: f64, u| (1.0 + 0.5 * th.cos()) * eta(u))),
            x,
            t,
        )
        .with_support(-1.0, 1.0);
        check(&q, 0.05);
        for kind in [RenewalKind::E1Plus, RenewalKind::E1Minus] {
            let q = RenewalQuery::new(
                kind,
                Target::Jump(Box::new(|th: f64, v: f64, u: f64| (1.0 + 0.5 * th.cos()) * (1.0 + 0.2 * v) * u.exp())),
                x,
                t,
            );
            check(&q, 0.05);
        }
    }
    let q = RenewalQuery::new(
        RenewalKind::E2Plus,
        Target::Pair(Box::new(|tc: f64, th: f64, _, u: f64| (1.0 + 0.5 * tc.cos()) * (1.0 + 0.3 * th.sin()) * u.exp())),
        ProjPoint::e1(),
        t,
    );
    check(&q, 0.10);
    outcome(
        pass,
        format!("R, E1+, E1- at three starts and E2+ at t = 30 gamma; worst gap / allowed band = {worst:.3}"),
    )
}

fn c09_uniform_bounds(gamma: f64) -> Outcome {
    let s = reference();
    let n = 20_000;
    let e1: Vec<f64> = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]
        .iter()
        .map(|m| {
            let q = RenewalQuery::new(RenewalKind::E1Plus, Target::Jump(Box::new(|_, _, _| 1.0)), ProjPoint::e1(), m * gamma);
            renewal::estimate(&q, &s, gamma, n).unwrap().value
        })
        .collect();
    let spread = e1.iter().copied().fold(0.0, f64::max) / e1.iter().copied().fold(f64::INFINITY, f64::min);
    let cs: Vec<f64> = [-2.0, 5.0 * gamma, 10.0 * gamma, 20.0 * gamma]
        .iter()
        .map(|&t| {
            [0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|&b: &f64| {
                    let q = RenewalQuery::new(RenewalKind::R, Target::Point(Box::new(|_, _| 1.0)), ProjPoint::e1(), t)
                        .with_support(-b, b);
                    renewal::estimate(&q, &s, gamma, n).unwrap().value / (b + 1.0).powi(2)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let c_max = cs.iter().copied().fold(0.0, f64::max);
    let c_med = median(&cs);
    outcome(
        spread <= 3.0 && c_max <= 2.0 * c_med,
        format!(
            "E1+ of 1: max/min {spread:.3} (tol 3); R envelope C(t) at t = -2, 5, 10, 20 gamma: {:.3}, {:.3}, {:.3}, {:.3}, max/median {:.3} (tol 2)",
            cs[0], cs[1], cs[2], cs[3], c_max / c_med
        ),
    )
}

fn c10_decomposition(gamma: f64) -> Outcome {
    let s = reference();
    let n = 100_000;
    let mut pass = true;
    let mut parts = Vec::new();
    let one = fourier::decomp_check(&|_| Complex64::new(1.0, 0.0), 5.0 * gamma, &s, n, gamma, 300).unwrap();
    let z = (one.rhs - 1.0).norm() / one.rhs_se;
    pass &= z <= 3.0;
    parts.push(format!("f = 1: |rhs - 1| / se = {z:.2}"));
    for m in [5.0, 10.0] {
        let r = fourier::decomp_check(&|th| Complex64::from_polar(1.0, 3.0 * th), m * gamma, &s, n, gamma, 300).unwrap();
        let z = r.gap() / r.combined_se();
        pass &= z <= 3.0;
        parts.push(format!("e^(3i theta) at t = {m} gamma: {z:.2}"));
    }
    outcome(pass, format!("{} (tol 3)", parts.join("; ")))
}

fn c11_fourier_decay() -> Outcome {
    let f = fourier::fourier_coefficients(&reference(), 256, 1_000_000, 300).unwrap();
    let low: Vec<f64> = f.rows[1..=8].iter().map(|r| r.abs()).collect();
    let high: Vec<f64> = f.rows[128..=256].iter().map(|r| r.abs()).collect();
    let (ml, mh) = (median(&low), median(&high));
    let mx = high.iter().copied().fold(0.0, f64::max);
    outcome(
        mh < ml - 0.1 && mx <= 0.3,
        format!("median |nu_hat| on [1, 8] {ml:.4}, on [128, 256] {mh:.4}; max on [128, 256] {mx:.4} (tol 0.3)"),
    )
}

fn c12_analysis_utilities() -> Outcome {
    let pair = gaussian_pair();
    let pv = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|&t| {
            let r = pv_hilbert(&pair, t).unwrap();
            (r.lhs - r.rhs).norm()
        })
        .fold(0.0, f64::max);
    let (b1, b2, delta) = (-2.0, 3.0, 0.3);
    let phi = |u: f64| 1.0 / (1.0 + u * u);
    let grid: Vec<f64> = (0..=260).map(|i| -6.0 + 0.05 * i as f64).collect();
    let rows = convolution_gap(phi, b1, b2, delta, &grid).unwrap();
    let shape = rows.iter().all(|r| match r.regime {
        Regime::Interior => r.gap <= delta,
        Regime::Edge => r.gap <= 1.0,
        Regime::Exterior => r.gap <= r.indicator_conv + 1e-12,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = 0;
    for _ in 0..1000 {
        let a = rng.random_range(-5.0..5.0f64);
        let b = a + rng.random_range(0.01..5.0f64);
        let w = rng.random_range(1.0..200.0f64) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (v, bound) = inequality_exp(a, b, w).unwrap();
        if v > bound {
            violations += 1;
        }
    }
    outcome(
        pv <= 1e-6 && shape && violations == 0,
        format!(
            "p.v. residual {pv:.1e} (tol 1e-6); three-regime gap shape {}; inequality violations {violations}/1000",
            if shape { "holds" } else { "broken" }
        ),
    )
}

fn c13_phase_approximation(gamma: f64) -> Outcome {
    let rows = fourier::gamma_lambda_compare(
        &ProjPoint::e1(),
        &ProjPoint::e2(),
        40.0,
        &[3.0, 6.0, 20.0, 30.0],
        &PhaseFunctions::standard(),
        &reference(),
        100_000,
        gamma,
    )
    .unwrap();
    let (s3, s6) = (&rows[0], &rows[1]);
    let pass = s6.good_fraction >= 0.9 && s6.mean_abs < s3.mean_abs;
    outcome(
        pass,
        format!(
            "{} crossings; good fraction s=3 {:.3}, s=6 {:.3} (tol 0.9); mean |Gamma - Lambda| s=3 {:.3e}, s=6 {:.3e}; informational: s=20 fraction {:.3} mean {:.3e}, s=30 fraction {:.3} mean {:.3e}",
            s3.crossings, s3.good_fraction, s6.good_fraction, s3.mean_abs, s6.mean_abs,
            rows[2].good_fraction, rows[2].mean_abs, rows[3].good_fraction, rows[3].mean_abs
        ),
    )
}

fn c14_regularity() -> Outcome {
    let nu = walk::empirical_measure(&reference().with_seed(77), 300, 1_000_000, &ProjPoint::e1());
    let r: Vec<f64> = (2..=8).map(|j| (-(j as f64)).exp()).collect();
    let rows = fourier::regularity_profile(&nu, &r, 4096).unwrap();
    let first = rows[0].ratio;
    let mx = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    outcome(
        mx <= 2.0 * first,
        format!("mass |log r| over r = e^-2..e^-8: max {mx:.4}, at e^-2 {first:.4} (tol 2x)"),
    )
}

fn main() {
    furstenberg_core::mc::init_threads();
    let start = Instant::now();
    let (gamma, a2) = lyapunov();
    println!("reference measure: gamma_hat {gamma:.5}, a2_hat {a2:.5}");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("exact identities", Box::new(c01_exact_identities)),
        ("lyapunov exponent", Box::new(c02_lyapunov)),
        ("transfer fixed point", Box::new(c03_transfer_fixed_point)),
        ("eigenvalue expansion", Box::new(move || c04_eigenvalue_expansion(gamma, a2))),
        ("spectral radius off zero", Box::new(c05_spectral_radius)),
        ("equidistribution", Box::new(c06_equidistribution)),
        ("B_eps^k limit", Box::new(move || c07_b_eps_k(a2))),
        ("renewal asymptotics", Box::new(move || c08_renewal_asymptotics(gamma))),
        ("uniform renewal bounds", Box::new(move || c09_uniform_bounds(gamma))),
        ("decomposition identity", Box::new(move || c10_decomposition(gamma))),
        ("Fourier decay", Box::new(c11_fourier_decay)),
        ("analysis utilities", Box::new(c12_analysis_utilities)),
        ("Gamma/Lambda approximation", Box::new(move || c13_phase_approximation(gamma))),
        ("regularity", Box::new(c14_regularity)),
    ];
    // ACCEPTANCE_ONLY=3,7 runs a subset.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let o = run();
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        ran - failed.len(),
        ran,
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
