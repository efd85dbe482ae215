//! Exact identities from every module, evaluated on fixed inputs.

use std::f64::consts::{LN_2, TAU};

use furstenberg_core::fourier::{self, OscillatoryQuery};
use furstenberg_core::proj2::{act, cartan, cocycle, dist};
use furstenberg_core::renewal::{self, Direction, Monitored, RenewalKind, RenewalQuery, Target};
use furstenberg_core::smoothing::{inequality_exp, make_kernel};
use furstenberg_core::transfer::{apply_p, GridFunction, Interpolation, TransferMatrix};
use furstenberg_core::{walk, Complex64, GeneratorMeasure, Mat2, ProjPoint, TrajectorySampler};

use crate::commands::Outcome;
use crate::output::{f, s, Table};

struct Check {
    name: &'static str,
    residual: f64,
    tol: f64,
}

fn points() -> Vec<ProjPoint> {
    (0..16).map(|j| fourier::chart_inverse(0.37 + TAU * j as f64 / 16.0)).collect()
}

fn words() -> Vec<Mat2> {
    let mu = GeneratorMeasure::reference();
    let a = mu.atoms()[0].matrix;
    let b = mu.atoms()[1].matrix;
    vec![a, b, a * b, b * a * b, Mat2::rotation(0.3) * a, b * Mat2::rotation(1.1)]
}

fn max_over<F: Fn(&Mat2, &ProjPoint) -> f64>(f: F) -> f64 {
    let mut r: f64 = 0.0;
    for g in &words() {
        for x in &points() {
            r = r.max(f(g, x));
        }
    }
    r
}

fn checks() -> furstenberg_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    let ws = words();
    let h = ws[1];
    out.push(Check {
        name: "cocycle_additivity",
        residual: max_over(|g, x| (cocycle(&(*g * h), x) - cocycle(g, &act(&h, x)) - cocycle(&h, x)).abs()),
        tol: 1e-12,
    });
    let y = fourier::chart_inverse(2.9);
    out.push(Check {
        name: "contraction_identity",
        residual: max_over(|g, x| {
            (dist(&act(g, x), &act(g, &y)) - (-cocycle(g, x) - cocycle(g, &y)).exp() * dist(x, &y)).abs()
        }),
        tol: 1e-12,
    });
    out.push(Check {
        name: "norm_of_inverse",
        residual: ws.iter().map(|g| (g.norm() - g.inverse().norm()).abs()).fold(0.0, f64::max),
        tol: 1e-12,
    });
    out.push(Check {
        name: "cartan_reconstruction",
        residual: ws.iter().map(|g| cartan(g).reconstruct().max_abs_diff(g)).fold(0.0, f64::max),
        tol: 1e-12,
    });
    let mu = GeneratorMeasure::reference();
    let op = TransferMatrix::new(&mu, 0.0, 64, Interpolation::Linear)?;
    let one = apply_p(&op, &GridFunction::constant(64, 1.0)?, 1)?;
    out.push(Check {
        name: "markov_operator_fixes_constants",
        residual: one.values().iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max),
        tol: 1e-14,
    });
    out.push(Check {
        name: "chart_round_trip",
        residual: (0..64)
            .map(|j| {
                let th = TAU * j as f64 / 64.0;
                (fourier::chart(&fourier::chart_inverse(th)) - th).abs()
            })
            .fold(0.0, f64::max),
        tol: 1e-12,
    });
    let p = points();
    let anti = (0..14)
        .map(|j| (fourier::sign(&p[j], &p[j + 1], &p[j + 2]) + fourier::sign(&p[j + 1], &p[j], &p[j + 2])) as f64)
        .fold(0.0, |a: f64, b| a.max(b.abs()));
    out.push(Check {
        name: "sign_antisymmetry",
        residual: anti,
        tol: 0.0,
    });
    let sm = TrajectorySampler::new(mu.clone(), 11, 1)?;
    let fs = fourier::fourier_coefficients(&sm, 2, 500, 50)?;
    out.push(Check {
        name: "fourier_zero_mode",
        residual: (fs.get(0).unwrap_or_default() - Complex64::new(1.0, 0.0)).norm(),
        tol: 0.0,
    });
    out.push(Check {
        name: "kernel_unit_mass",
        residual: (make_kernel(0.5)?.integral()? - 1.0).abs(),
        tol: 1e-9,
    });
    let diag = TrajectorySampler::new(GeneratorMeasure::dirac(Mat2::diag(2.0)), 1, 1)?;
    let run = renewal::crossing_sampler(&diag, 1.5, Direction::Up, Monitored::LogNorm, &ProjPoint::e1(), LN_2, 2)?;
    let c = run.trajectories[0].first().copied();
    out.push(Check {
        name: "deterministic_crossing",
        residual: c.map_or(f64::INFINITY, |c| (c.overshoot - (3.0 * LN_2 - 1.5)).abs() + (c.n as f64 - 3.0).abs()),
        tol: 1e-12,
    });
    let l = renewal::l_estimate(0.8, &ProjPoint::e1(), 5.0, &diag, LN_2, 2)?;
    let count = (5..=14).filter(|&n| (n as f64 * LN_2 - 5.0).abs() <= 0.8).count();
    out.push(Check {
        name: "deterministic_l_count",
        residual: (l.value - count as f64).abs(),
        tol: 0.0,
    });
    let nu = walk::empirical_measure(&sm, 50, 200, &ProjPoint::e1());
    let zero = RenewalQuery::new(RenewalKind::E1Plus, Target::Jump(Box::new(|_, _, _| 0.0)), ProjPoint::e1(), 3.0);
    out.push(Check {
        name: "renewal_limit_of_zero",
        residual: renewal::limit(&zero, &nu, None, &mu, 0.4)?.value.abs(),
        tol: 0.0,
    });
    let q = OscillatoryQuery {
        phi: Box::new(|t| t),
        psi: Box::new(|_| 0.0),
        c: 7.0,
        k: 30.0,
    };
    out.push(Check {
        name: "oscillatory_zero_amplitude",
        residual: fourier::oscillatory_integral(&q, &nu)?.value.norm(),
        tol: 0.0,
    });
    let lyap = walk::estimate_lyapunov_clt(&diag, 100, 2)?;
    out.push(Check {
        name: "deterministic_lyapunov",
        residual: (lyap.gamma_hat - LN_2).abs(),
        tol: 1e-12,
    });
    let mut worst: f64 = 0.0;
    for (b1, b2, w) in [(-1.0, 2.0, 3.0), (0.0, 0.5, -7.0), (-3.0, 1.0, 40.0)] {
        let (v, bound) = inequality_exp(b1, b2, w)?;
        worst = worst.max(v - bound);
    }
    out.push(Check {
        name: "inequality_exp_bound",
        residual: worst.max(0.0),
        tol: 0.0,
    });
    Ok(out)
}

pub fn run() -> Outcome {
    let list = checks()?;
    let mut t = Table::new("selftest", &["check", "residual", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for c in &list {
        let pass = c.residual <= c.tol;
        if !pass {
            failed.push(c.name);
        }
        t.push(vec![s(c.name), f(c.residual), f(c.tol), s(pass.to_string())]);
    }
    let summary = if failed.is_empty() {
        format!("selftest: {}/{} identities hold", list.len(), list.len())
    } else {
        format!("FAIL selftest: {}", failed.join(", "))
    };
    Ok((t, summary))
}
