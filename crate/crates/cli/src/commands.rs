//! One function per experiment subcommand: each returns its table and a
//! one-line summary.

use std::f64::consts::PI;

use furstenberg_core::fourier::{self, CircleCFn, PhaseFunctions};
use furstenberg_core::model::{load_measure, moment_report, nonelementary_probe};
use furstenberg_core::renewal::{self, RenewalKind, RenewalQuery, Target};
use furstenberg_core::transfer::{self, GridFunction, Interpolation, TransferMatrix};
use furstenberg_core::walk::{self, DeviationEvent};
use furstenberg_core::{Complex64, GeneratorMeasure, ProjPoint, TrajectorySampler};

use crate::output::{f, i, s, u, Table};
use crate::{CliError, Common};

pub type Outcome = Result<(Table, String), CliError>;

const GAMMA_SEED_SALT: u64 = 0x6761_6d6d_615f_6861;
const NU_SEED_SALT: u64 = 0x6e75_5f73_616d_706c;
const NU_CHECK_SEED_SALT: u64 = 0x6e75_5f63_6865_636b;

fn measure(c: &Common) -> Result<GeneratorMeasure, CliError> {
    match &c.config {
        None => Ok(GeneratorMeasure::reference()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(load_measure(&text)?)
        }
    }
}

fn sampler(c: &Common) -> Result<TrajectorySampler, CliError> {
    Ok(TrajectorySampler::new(measure(c)?, c.seed, 1)?)
}

fn samples(c: &Common, default: usize) -> Result<usize, CliError> {
    let n = c.samples.unwrap_or(default);
    if n < 2 {
        return Err(CliError::Usage(format!("--samples must be at least 2, got {n}")));
    }
    Ok(n)
}

fn grid(c: &Common, default: usize) -> Result<usize, CliError> {
    let n = c.grid.unwrap_or(default);
    if n < 8 {
        return Err(CliError::Usage(format!("--grid must be at least 8, got {n}")));
    }
    Ok(n)
}

/// `--gamma` if given, else a CLT estimate on a separate stream.
fn gamma(c: &Common, s: &TrajectorySampler) -> Result<f64, CliError> {
    if let Some(g) = c.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(CliError::Usage(format!("--gamma must be positive, got {g}")));
        }
        return Ok(g);
    }
    let est = walk::estimate_lyapunov_clt(&s.with_seed(s.seed() ^ GAMMA_SEED_SALT), 2000, 400)?;
    if !(est.gamma_hat > 0.0) {
        return Err(CliError::Core(furstenberg_core::Error::invalid(format!(
            "estimated Lyapunov exponent {:.4} is not positive",
            est.gamma_hat
        ))));
    }
    Ok(est.gamma_hat)
}

pub fn validate(c: &Common, depth: usize) -> Outcome {
    let mu = measure(c)?;
    let m = moment_report(&mu);
    let probe = nonelementary_probe(&mu, depth)?;
    let mut t = Table::new("validate", &["quantity", "value"]);
    t.push(vec![s("atoms"), u(mu.len())]);
    t.push(vec![s("m1"), f(m.m1)]);
    t.push(vec![s("m2"), f(m.m2)]);
    t.push(vec![s("probe_depth"), u(depth)]);
    t.push(vec![s("verdict"), s(probe.verdict.as_str())]);
    let summary = format!(
        "validate: {} atoms, E log|g| = {:.6}, E log^2|g| = {:.6}, {}",
        mu.len(),
        m.m1,
        m.m2,
        probe.verdict.as_str()
    );
    Ok((t, summary))
}

pub fn lyapunov(c: &Common, n: usize) -> Outcome {
    let big_n = samples(c, 1000)?;
    let est = walk::estimate_lyapunov_clt(&sampler(c)?, n, big_n)?;
    let mut t = Table::new("lyapunov", &["n", "N", "gamma_hat", "se_gamma", "a2_hat", "se_a2"]);
    t.push(vec![u(n), u(big_n), f(est.gamma_hat), f(est.se_gamma), f(est.a2_hat), f(est.se_a2)]);
    Ok((t, format!("lyapunov: gamma = {:.6} ± {:.2e}", est.gamma_hat, est.se_gamma)))
}

pub fn ldp(c: &Common, epsilon: f64, n_list: &[usize]) -> Outcome {
    let sm = sampler(c)?;
    let g = gamma(c, &sm)?;
    let big_n = samples(c, 1000)?;
    let prof = walk::deviation_profile(&sm, g, epsilon, n_list, &ProjPoint::e1(), &ProjPoint::e2(), big_n)?;
    let mut t = Table::new("deviations", &["event", "n", "epsilon", "fraction", "se"]);
    for r in &prof.rows {
        t.push(vec![s(r.event.name()), u(r.n), f(r.epsilon), f(r.exceed_fraction), f(r.se)]);
    }
    let n_last = *n_list.iter().max().unwrap_or(&0);
    let last = prof
        .rows
        .iter()
        .find(|r| r.event == DeviationEvent::Norm && r.n == n_last)
        .map_or(f64::NAN, |r| r.exceed_fraction);
    Ok((t, format!("ldp: gamma = {g:.6}, norm exceedance at n = {n_last}: {last:.4}")))
}

pub fn spectrum(c: &Common, xi_max: f64, points: usize) -> Outcome {
    let mu = measure(c)?;
    let ng = grid(c, 256)?;
    let curve = transfer::lambda_curve(&mu, xi_max, points, ng)?;
    let radii = transfer::spectral_radius_scan(&mu, &curve.xi_grid, ng, 200)?;
    let mut t = Table::new("spectrum", &["xi", "re_lambda", "im_lambda", "gap", "radius"]);
    for (j, &xi) in curve.xi_grid.iter().enumerate() {
        let op = TransferMatrix::new(&mu, xi, ng, Interpolation::Linear)?;
        let lead = transfer::leading_eigen(&op, 1e-12, 20_000)?;
        let sub = transfer::subdominant(&op, &lead, 200)?;
        let l = curve.lambda[j];
        t.push(vec![f(xi), f(l.re), f(l.im), f(sub.gap), f(radii[j].1)]);
    }
    Ok((
        t,
        format!(
            "spectrum: gamma_fit = {:.6}, curvature = {:.6}, a2_fit = {:.6}",
            curve.gamma_fit, curve.curvature_fit, curve.a2_fit
        ),
    ))
}

pub fn equidist(c: &Common, n_max: usize) -> Outcome {
    let mu = measure(c)?;
    let ng = grid(c, 256)?;
    let u0 = GridFunction::from_real_fn(ng, f64::cos)?;
    let n_list: Vec<usize> = (1..=n_max).collect();
    let d = transfer::equidistribution_check(&mu, &u0, &n_list)?;
    let mut t = Table::new("equidist", &["n", "sup_deviation"]);
    for &(n, dev) in &d.rows {
        t.push(vec![u(n), f(dev)]);
    }
    Ok((t, format!("equidist: log-deviation slope = {:.6}, R^2 = {:.4}", d.slope, d.r2)))
}

/// C^1 bump on `(-1, 1)`.
pub fn eta(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(2)
    } else {
        0.0
    }
}

fn renewal_query(kind: RenewalKind, t: f64, b: f64, x: ProjPoint) -> RenewalQuery {
    match kind {
        RenewalKind::R => RenewalQuery::new(kind, Target::Point(Box::new(|_, u| eta(u))), x, t).with_support(-1.0, 1.0),
        RenewalKind::L => RenewalQuery::new(kind, Target::Point(Box::new(|_, _| 1.0)), x, t).with_support(-b, b),
        RenewalKind::E => RenewalQuery::new(
            kind,
            Target::Jump(Box::new(|th: f64, _, u| (1.0 + 0.5 * th.cos()) * eta(u))),
            x,
            t,
        )
        .with_support(-1.0, 1.0),
        RenewalKind::E1Plus | RenewalKind::E1Minus => {
            RenewalQuery::new(kind, Target::Jump(Box::new(|_, _, _| 1.0)), x, t)
        }
        RenewalKind::E2Plus | RenewalKind::E2Minus => {
            RenewalQuery::new(kind, Target::Pair(Box::new(|_, _, _, _| 1.0)), x, t)
        }
    }
}

pub fn renewal(c: &Common, kind: &str, t: f64, b: f64, theta: f64) -> Outcome {
    let kind = RenewalKind::parse(kind)?;
    let sm = sampler(c)?;
    let g = gamma(c, &sm)?;
    let n = samples(c, 10_000)?;
    let q = renewal_query(kind, t, b, fourier::chart_inverse(theta));
    let est = renewal::estimate(&q, &sm, g, n)?;
    let lim = if kind == RenewalKind::L {
        None
    } else {
        let nu = walk::empirical_measure(&sm.with_seed(c.seed ^ NU_SEED_SALT), 300, n, &ProjPoint::e1());
        let nu_check = walk::empirical_measure(
            &sm.reversed().with_seed(c.seed ^ NU_CHECK_SEED_SALT),
            300,
            n,
            &ProjPoint::e1(),
        );
        Some(renewal::limit(&q, &nu, Some(&nu_check), sm.measure(), g)?)
    };
    let mut tb = Table::new("renewal", &["kind", "t", "estimate", "se", "limit", "limit_se", "tail_proxy"]);
    tb.push(vec![
        s(kind.name()),
        f(t),
        f(est.value),
        f(est.se),
        f(lim.map_or(f64::NAN, |l| l.value)),
        f(lim.map_or(f64::NAN, |l| l.se)),
        f(est.tail_bound_proxy),
    ]);
    let summary = match lim {
        Some(l) => format!(
            "renewal {}: {:.6} ± {:.2e} (limit {:.6} ± {:.2e}, gamma = {g:.6})",
            kind.name(),
            est.value,
            est.se,
            l.value,
            l.se
        ),
        None => format!("renewal {}: {:.6} ± {:.2e} (gamma = {g:.6})", kind.name(), est.value, est.se),
    };
    Ok((tb, summary))
}

pub fn fourier(c: &Common, kmax: usize, burn_in: usize) -> Outcome {
    let n = samples(c, 100_000)?;
    let fs = fourier::fourier_coefficients(&sampler(c)?, kmax, n, burn_in)?;
    if let Some(w) = &fs.warning {
        eprintln!("warning: {w}");
    }
    let mut t = Table::new("fourier", &["k", "re", "im", "abs", "se"]);
    for r in &fs.rows {
        t.push(vec![i(r.k), f(r.re), f(r.im), f(r.abs()), f(r.se)]);
    }
    let last = fs.rows.last().map_or(f64::NAN, |r| r.abs());
    Ok((t, format!("fourier: N = {n}, |nu_hat({kmax})| = {last:.4}")))
}

/// Test functions for the decomposition, by id.
pub fn decomp_functions() -> Vec<(&'static str, Box<CircleCFn>)> {
    vec![
        ("one", Box::new(|_| Complex64::new(1.0, 0.0))),
        ("e1", Box::new(|th: f64| Complex64::from_polar(1.0, th))),
        ("e3", Box::new(|th: f64| Complex64::from_polar(1.0, 3.0 * th))),
        ("bump", Box::new(|th: f64| Complex64::new(eta(fourier::wrap(th - PI)), 0.0))),
    ]
}

pub fn decomp(c: &Common, t: f64, burn_in: usize) -> Outcome {
    let sm = sampler(c)?;
    let g = gamma(c, &sm)?;
    let n = samples(c, 10_000)?;
    let mut tb = Table::new("decomp", &["t", "f_id", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "se"]);
    let mut worst: f64 = 0.0;
    for (id, func) in decomp_functions() {
        let r = fourier::decomp_check(&*func, t, &sm, n, g, burn_in)?;
        worst = worst.max(r.gap() / r.combined_se().max(1e-300));
        tb.push(vec![f(t), s(id), f(r.lhs.re), f(r.lhs.im), f(r.rhs.re), f(r.rhs.im), f(r.combined_se())]);
    }
    Ok((tb, format!("decomp: t = {t}, largest |lhs - rhs| / se = {worst:.3}")))
}

pub fn gammalambda(c: &Common, s_list: &[f64], t: f64) -> Outcome {
    let sm = sampler(c)?;
    let g = gamma(c, &sm)?;
    let n = samples(c, 10_000)?;
    let rows = fourier::gamma_lambda_compare(
        &ProjPoint::e1(),
        &ProjPoint::e2(),
        t,
        s_list,
        &PhaseFunctions::standard(),
        &sm,
        n,
        g,
    )?;
    let mut tb = Table::new(
        "gammalambda",
        &["t", "s", "log_k", "crossings", "good_fraction", "mean_abs", "max_abs", "asymptotic_regime"],
    );
    for r in &rows {
        tb.push(vec![
            f(r.t),
            f(r.s),
            f(r.log_k),
            u(r.crossings),
            f(r.good_fraction),
            f(r.mean_abs),
            f(r.max_abs),
            s(r.asymptotic_regime.to_string()),
        ]);
    }
    let first = rows.first().map_or(f64::NAN, |r| r.good_fraction);
    Ok((tb, format!("gammalambda: t = {t}, good fraction at s = {} is {first:.4}", s_list[0])))
}

pub fn regularity(c: &Common, log_r: &[f64], centers: usize) -> Outcome {
    let n = samples(c, 100_000)?;
    let sm = sampler(c)?;
    let nu = walk::empirical_measure(&sm, 300, n, &ProjPoint::e1());
    let r_list: Vec<f64> = log_r.iter().map(|j| (-j).exp()).collect();
    let rows = fourier::regularity_profile(&nu, &r_list, centers)?;
    let mut t = Table::new("regularity", &["r", "mass", "ratio"]);
    for r in &rows {
        t.push(vec![f(r.r), f(r.mass), f(r.ratio)]);
    }
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok((t, format!("regularity: N = {n}, max mass*|log r| = {worst:.4}")))
}
