//! Fourier coefficients of the stationary measure in the double-angle chart,
//! oscillatory integrals, the crossing decomposition of the stationary
//! measure, and ball-mass profiles.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mc;
use crate::model::{nonelementary_probe, Verdict};
use crate::proj2::{dist, CProjPoint, ProjPoint, ScaledMat2};
use crate::renewal::{horizon, visit_crossings, Direction, Monitored};
use crate::walk::{empirical_measure, TrajectorySampler};

const DISTINCT_TOL: f64 = 1e-10;

/// `theta = 2 phi` for `x = [cos phi : sin phi]`, `phi in [0, pi)`.
pub fn chart(x: &ProjPoint) -> f64 {
    x.theta()
}

pub fn chart_inverse(theta: f64) -> ProjPoint {
    ProjPoint::from_theta(theta)
}

/// `theta` mapped into `(-pi, pi]`.
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Cyclic order of three points: `+1` when going counterclockwise from `x`
/// one meets `y` before `z`, `-1` for the opposite order, `0` unless the
/// points are pairwise distinct.
pub fn sign(x: &ProjPoint, y: &ProjPoint, z: &ProjPoint) -> i8 {
    if dist(x, y) <= DISTINCT_TOL || dist(y, z) <= DISTINCT_TOL || dist(x, z) <= DISTINCT_TOL {
        return 0;
    }
    let (a, b, c) = (chart(x), chart(y), chart(z));
    let dy = (b - a).rem_euclid(TAU);
    let dz = (c - a).rem_euclid(TAU);
    if dy < dz {
        1
    } else {
        -1
    }
}

/// [`sign`] for points given over the complex field; they must be real.
pub fn sign_checked(x: &CProjPoint, y: &CProjPoint, z: &CProjPoint) -> Result<i8> {
    let real = |p: &CProjPoint| {
        p.to_real()
            .ok_or_else(|| Error::invalid("sign needs points of the real projective line"))
    };
    Ok(sign(&real(x)?, &real(y)?, &real(z)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierRow {
    pub k: i64,
    pub re: f64,
    pub im: f64,
    pub se: f64,
}

impl FourierRow {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Clone, Debug)]
pub struct FourierSeries {
    /// Rows for `k = 0, ..., k_max`.
    pub rows: Vec<FourierRow>,
    pub n: usize,
    pub warning: Option<String>,
}

impl FourierSeries {
    pub fn k_max(&self) -> i64 {
        self.rows.len() as i64 - 1
    }

    /// `nu_hat(k)`, using `nu_hat(-k) = conj(nu_hat(k))` for negative `k`.
    pub fn get(&self, k: i64) -> Option<Complex64> {
        let r = self.rows.get(k.unsigned_abs() as usize)?;
        let z = Complex64::new(r.re, r.im);
        Some(if k < 0 { z.conj() } else { z })
    }
}

/// Mean of `psi_j e^{i k phi_j}` with its standard error. Coefficients and
/// oscillatory integrals both go through here, so they agree bit for bit.
fn phase_mean(phi: &[f64], psi: &[f64], k: f64) -> (Complex64, f64) {
    let n = phi.len();
    let term = |j: usize| Complex64::from_polar(1.0, k * phi[j]) * psi[j];
    let mean = mc::pairwise_csum_by(n, &term) / n as f64;
    let second = mc::pairwise_sum_by(n, &|j| psi[j] * psi[j]) / n as f64;
    let se = ((second - mean.norm_sqr()).max(0.0) / n as f64).sqrt();
    (mean, se)
}

/// Coefficients `k = 0..=k_max` of the empirical measure of `thetas`.
pub fn coefficients_from_thetas(thetas: &[f64], k_max: usize) -> Result<Vec<FourierRow>> {
    if thetas.is_empty() {
        return Err(Error::invalid("Fourier coefficients need a nonempty sample"));
    }
    let ones = vec![1.0; thetas.len()];
    Ok(mc::par_replicas(k_max + 1, |k| {
        let (z, se) = phase_mean(thetas, &ones, k as f64);
        FourierRow {
            k: k as i64,
            re: z.re,
            im: z.im,
            se,
        }
    }))
}

/// `nu_hat(k)` from `n` stationary samples after `burn_in` steps from `e1`.
pub fn fourier_coefficients(
    sampler: &TrajectorySampler,
    k_max: usize,
    n: usize,
    burn_in: usize,
) -> Result<FourierSeries> {
    if n < 2 {
        return Err(Error::invalid("Fourier coefficients need N >= 2"));
    }
    let probe = nonelementary_probe(sampler.measure(), 4)?;
    let warning = (probe.verdict != Verdict::LikelyNonElementary).then(|| {
        format!(
            "probe verdict {}: coefficients need not decay",
            probe.verdict.as_str()
        )
    });
    let pts = empirical_measure(sampler, burn_in, n, &ProjPoint::e1());
    let thetas: Vec<f64> = pts.iter().map(chart).collect();
    Ok(FourierSeries {
        rows: coefficients_from_thetas(&thetas, k_max)?,
        n,
        warning,
    })
}

pub type CircleFn = dyn Fn(f64) -> f64 + Send + Sync;

/// `int e^{i k phi} psi d nu` with `|phi|_{C^2} <= c` and `|phi'| >= 1/c`
/// on the support of `psi`. `phi` is evaluated on real arguments, not
/// reduced mod `2 pi`, so `phi(theta) = theta` is admissible for integer `k`.
pub struct OscillatoryQuery {
    pub phi: Box<CircleFn>,
    pub psi: Box<CircleFn>,
    pub c: f64,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatoryValue {
    pub value: Complex64,
    pub se: f64,
}

const HYPOTHESIS_GRID: usize = 8192;

impl OscillatoryQuery {
    /// Checks both bounds on a grid of the circle, with centered differences.
    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite() && self.k.is_finite()) {
            return Err(Error::invalid("oscillatory query needs finite c > 0 and finite k"));
        }
        let h = 1e-4;
        let (mut c0, mut c1, mut c2) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..HYPOTHESIS_GRID {
            let th = TAU * i as f64 / HYPOTHESIS_GRID as f64;
            let (fm, f0, fp) = ((self.phi)(th - h), (self.phi)(th), (self.phi)(th + h));
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            c0 = c0.max(f0.abs());
            c1 = c1.max(d1.abs());
            c2 = c2.max(d2.abs());
            if (self.psi)(th) != 0.0 && d1.abs() < 1.0 / self.c {
                return Err(Error::invalid(format!(
                    "|phi'| = {:.3e} < 1/c at theta = {th:.6} inside supp psi",
                    d1.abs()
                )));
            }
        }
        let norm = c0.max(c1).max(c2);
        if norm > self.c * (1.0 + 1e-6) {
            return Err(Error::invalid(format!("|phi|_C2 = {norm:.4} exceeds c = {}", self.c)));
        }
        Ok(())
    }
}

pub fn oscillatory_integral(query: &OscillatoryQuery, nu: &[ProjPoint]) -> Result<OscillatoryValue> {
    query.check()?;
    if nu.is_empty() {
        return Err(Error::invalid("oscillatory integral needs a nonempty sample"));
    }
    let (phi, psi) = eval_on_sample(query, nu);
    let (value, se) = phase_mean(&phi, &psi, query.k);
    Ok(OscillatoryValue { value, se })
}

fn eval_on_sample(query: &OscillatoryQuery, nu: &[ProjPoint]) -> (Vec<f64>, Vec<f64>) {
    let th: Vec<f64> = nu.iter().map(chart).collect();
    (
        th.iter().map(|&t| (query.phi)(t)).collect(),
        th.iter().map(|&t| (query.psi)(t)).collect(),
    )
}

/// `(k, |value|, se)` over `ks`, with the query's own `k` ignored.
pub fn oscillatory_sweep(query: &OscillatoryQuery, nu: &[ProjPoint], ks: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    query.check()?;
    if nu.is_empty() {
        return Err(Error::invalid("oscillatory sweep needs a nonempty sample"));
    }
    let (phi, psi) = eval_on_sample(query, nu);
    Ok(mc::par_replicas(ks.len(), |i| {
        let (z, se) = phase_mean(&phi, &psi, ks[i]);
        (ks[i], z.norm(), se)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompReport {
    pub t: f64,
    /// `int f d nu` from a stationary sample.
    pub lhs: Complex64,
    pub lhs_se: f64,
    /// Sum over upward crossings minus sum over downward crossings.
    pub rhs: Complex64,
    pub rhs_se: f64,
    /// Mean number of upward and downward crossings per trajectory.
    pub plus_mass: f64,
    pub minus_mass: f64,
    /// Mean number of crossings per trajectory past the horizon.
    pub tail_rate: f64,
    pub n_max: usize,
}

impl DecompReport {
    pub fn combined_se(&self) -> f64 {
        self.lhs_se.hypot(self.rhs_se)
    }

    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub type CircleCFn = dyn Fn(f64) -> Complex64 + Send + Sync;

const LHS_SEED_SALT: u64 = 0x6c68_735f_7365_6564;
const X_SEED_SALT: u64 = 0x785f_7365_6564_5f31;

/// Both sides of `int f d nu = E[sum_{M_t^+} f(g x) - sum_{M_t^-} f(g x)]`.
///
/// Crossing words come from log-norm crossings of reversed-measure
/// trajectories `S_n`; the word in `M_t^+-` is `S_n^{-1}`, applied to an
/// independent stationary point `x` per trajectory.
pub fn decomp_check(
    f: &CircleCFn,
    t: f64,
    sampler: &TrajectorySampler,
    n: usize,
    gamma_hat: f64,
    burn_in: usize,
) -> Result<DecompReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("decomposition needs t > 0, got {t}")));
    }
    if !(gamma_hat > 0.0) {
        return Err(Error::invalid("decomposition needs gamma_hat > 0"));
    }
    if n < 2 {
        return Err(Error::invalid("decomposition needs N >= 2"));
    }
    let seed = sampler.seed();
    let lhs_pts = empirical_measure(&sampler.with_seed(seed ^ LHS_SEED_SALT), burn_in, n, &ProjPoint::e1());
    let lhs_vals: Vec<Complex64> = lhs_pts.iter().map(|p| f(chart(p))).collect();
    let lhs = mc::cmean_se(&lhs_vals);

    let xs = empirical_measure(&sampler.with_seed(seed ^ X_SEED_SALT), burn_in, n, &ProjPoint::e1());
    let rev = sampler.reversed();
    let n_max = horizon(t, 0.0, gamma_hat);
    let n_ext = n_max / 4 + 10;
    let runs = mc::par_replicas(n, |r| {
        let x = xs[r];
        let mut sum = Complex64::new(0.0, 0.0);
        let (mut plus, mut minus, mut tail) = (0usize, 0usize, 0usize);
        visit_crossings(&rev, r as u64, t, Monitored::LogNorm, &x, n_max, n_ext, |c, inside| {
            if !inside {
                tail += 1;
                return;
            }
            let v = f(chart(&c.word.inverse_act(&x)));
            match c.direction {
                Direction::Up => {
                    sum += v;
                    plus += 1;
                }
                Direction::Down => {
                    sum -= v;
                    minus += 1;
                }
            }
        });
        (sum, plus, minus, tail)
    });
    let sums: Vec<Complex64> = runs.iter().map(|r| r.0).collect();
    let rhs = mc::cmean_se(&sums);
    let nf = n as f64;
    Ok(DecompReport {
        t,
        lhs: lhs.mean,
        lhs_se: lhs.se,
        rhs: rhs.mean,
        rhs_se: rhs.se,
        plus_mass: runs.iter().map(|r| r.1).sum::<usize>() as f64 / nf,
        minus_mass: runs.iter().map(|r| r.2).sum::<usize>() as f64 / nf,
        tail_rate: runs.iter().map(|r| r.3).sum::<usize>() as f64 / nf,
        n_max,
    })
}

/// Phase data of the comparison: `phi`, `phi'` and `psi` on the chart.
pub struct PhaseFunctions {
    pub phi: Box<CircleFn>,
    pub dphi: Box<CircleFn>,
    pub psi: Box<CircleFn>,
}

impl PhaseFunctions {
    /// `phi = sin`, `psi` a C^1 bump on `|theta| < 1.2`, where `phi' >= cos 1.2`.
    pub fn standard() -> Self {
        PhaseFunctions {
            phi: Box::new(f64::sin),
            dphi: Box::new(f64::cos),
            psi: Box::new(|th| {
                let w = wrap(th) / 1.2;
                if w.abs() < 1.0 {
                    (1.0 - w * w).powi(2)
                } else {
                    0.0
                }
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaLambdaRow {
    pub t: f64,
    pub s: f64,
    /// `log k = 2 t + s`.
    pub log_k: f64,
    pub crossings: usize,
    pub good: usize,
    pub good_fraction: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Whether `t > s^20`.
    pub asymptotic_regime: bool,
}

/// Orientation of the chart relative to the cyclic order used by `sign`,
/// fixed by comparing both phases on crossing words at `t = 40`.
const LAMBDA_ORIENTATION: f64 = -1.0;

struct CrossWord {
    word: ScaledMat2,
    jump: f64,
}

fn unit_vec(p: &ProjPoint) -> [f64; 2] {
    p.vector()
}

/// `theta(g^{-1} x0) - theta(g^{-1} y0)` in `(-pi, pi]`, accurate when the
/// two preimages are exponentially close.
fn preimage_chart_gap(g: &ScaledMat2, x0: &ProjPoint, y0: &ProjPoint) -> f64 {
    let adj = g.unit().inverse();
    let a = adj.apply(unit_vec(x0));
    let b = adj.apply(unit_vec(y0));
    let [v, w] = [unit_vec(x0), unit_vec(y0)];
    // det(adj m) = det(m) = |g|^{-2} for the unit factor of a unimodular product.
    let det = g.ratio() * (v[0] * w[1] - v[1] * w[0]);
    let dot = a[0] * b[0] + a[1] * b[1];
    let mut alpha = det.atan2(dot);
    if alpha > PI / 2.0 {
        alpha -= PI;
    } else if alpha <= -PI / 2.0 {
        alpha += PI;
    }
    -2.0 * alpha
}

fn gamma_value(pf: &PhaseFunctions, g: &ScaledMat2, x0: &ProjPoint, y0: &ProjPoint, log_k: f64) -> Complex64 {
    let ta = chart(&g.inverse_act(x0));
    let tb = chart(&g.inverse_act(y0));
    let amp = (pf.psi)(ta) * (pf.psi)(tb);
    if amp == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let gap = preimage_chart_gap(g, x0, y0);
    let dphi = if gap.abs() < 1e-4 {
        (pf.dphi)(ta - 0.5 * gap) * gap
    } else {
        (pf.phi)(ta) - (pf.phi)(ta - gap)
    };
    Complex64::from_polar(amp, phase_times_k(dphi, log_k))
}

/// `k x` reduced mod `2 pi` for `k = e^{log_k}`.
fn phase_times_k(x: f64, log_k: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = x.signum() * (x.abs().ln() + log_k).exp();
    p.rem_euclid(TAU)
}

fn lambda_value(pf: &PhaseFunctions, g: &ScaledMat2, x0: &ProjPoint, y0: &ProjPoint, log_k: f64) -> Complex64 {
    let ta = chart(&g.inverse_act(x0));
    let psi = (pf.psi)(ta);
    if psi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let gx = g.act(x0);
    let sg = sign(&gx, x0, y0) as f64;
    let denom = dist(&gx, x0) * dist(&gx, y0);
    // Chart lengths are twice projective distances; k / |g|^2 = e^{log_k - 2 log|g|}.
    let x = LAMBDA_ORIENTATION * sg * (pf.dphi)(ta) * 2.0 * dist(x0, y0) / denom;
    let phase = phase_times_k(x, log_k - 2.0 * g.log_norm());
    Complex64::from_polar(psi * psi, phase)
}

fn in_good_set(c: &CrossWord, x0: &ProjPoint, y0: &ProjPoint, t: f64, s: f64) -> bool {
    let gx = c.word.act(x0);
    let sep = 2.0 * (-s / 9.0).exp();
    c.jump.abs() < s / 9.0
        && c.word.dist_image_to_attractor(x0) < (-t).exp()
        && dist(&gx, x0) > sep
        && dist(&gx, y0) > sep
}

/// Compares `Gamma(g)` with its approximation `Lambda(g)` on upward
/// log-norm crossing words of the reversed measure, for each `s` in
/// `s_list`, with `k = e^{2t + s}`. Crossing words are harvested once.
pub fn gamma_lambda_compare(
    x0: &ProjPoint,
    y0: &ProjPoint,
    t: f64,
    s_list: &[f64],
    pf: &PhaseFunctions,
    sampler: &TrajectorySampler,
    n: usize,
    gamma_hat: f64,
) -> Result<Vec<GammaLambdaRow>> {
    if !(gamma_hat > 0.0) {
        return Err(Error::invalid("comparison needs gamma_hat > 0"));
    }
    for &s in s_list {
        if !(dist(x0, y0) > (-s / 9.0).exp()) {
            return Err(Error::invalid(format!(
                "d(x0, y0) = {:.4} must exceed e^(-s/9) = {:.4}",
                dist(x0, y0),
                (-s / 9.0).exp()
            )));
        }
    }
    let rev = sampler.reversed();
    let n_max = horizon(t, 0.0, gamma_hat);
    let per_traj = mc::par_replicas(n, |r| {
        let mut out = Vec::new();
        visit_crossings(&rev, r as u64, t, Monitored::LogNorm, x0, n_max, 0, |c, _| {
            if c.direction == Direction::Up {
                out.push(CrossWord { word: c.word, jump: c.jump });
            }
        });
        out
    });
    let words: Vec<CrossWord> = per_traj.into_iter().flatten().collect();
    if words.is_empty() {
        return Err(Error::invalid(format!("no crossings of t = {t} harvested")));
    }
    Ok(s_list
        .iter()
        .map(|&s| {
            let log_k = 2.0 * t + s;
            let diffs: Vec<f64> = mc::par_replicas(words.len(), |i| {
                let c = &words[i];
                if !in_good_set(c, x0, y0, t, s) {
                    return f64::NAN;
                }
                (gamma_value(pf, &c.word, x0, y0, log_k) - lambda_value(pf, &c.word, x0, y0, log_k)).norm()
            });
            let good: Vec<f64> = diffs.into_iter().filter(|d| !d.is_nan()).collect();
            let (mean_abs, max_abs) = if good.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (
                    mc::pairwise_sum(&good) / good.len() as f64,
                    good.iter().copied().fold(0.0, f64::max),
                )
            };
            GammaLambdaRow {
                t,
                s,
                log_k,
                crossings: words.len(),
                good: good.len(),
                good_fraction: good.len() as f64 / words.len() as f64,
                mean_abs,
                max_abs,
                asymptotic_regime: t > s.powi(20),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityRow {
    pub r: f64,
    /// Largest empirical mass of a closed ball of radius `r` over the centers.
    pub mass: f64,
    /// `mass * |log r|`.
    pub ratio: f64,
}

/// Sup of empirical ball masses over `center_count` equally spaced centers.
pub fn regularity_profile(nu: &[ProjPoint], r_list: &[f64], center_count: usize) -> Result<Vec<RegularityRow>> {
    if nu.is_empty() || center_count == 0 {
        return Err(Error::invalid("regularity profile needs samples and centers"));
    }
    if let Some(r) = r_list.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::invalid(format!("radius {r} must lie in (0, 1]")));
    }
    let mut th: Vec<f64> = nu.iter().map(chart).collect();
    th.sort_by(f64::total_cmp);
    let n = th.len();
    // Points with theta in [lo, hi], for 0 <= lo <= hi < 2 pi.
    let count = |lo: f64, hi: f64| -> usize {
        th.partition_point(|&x| x <= hi) - th.partition_point(|&x| x < lo)
    };
    Ok(r_list
        .iter()
        .map(|&r| {
            // d(x, y) = |sin((theta_x - theta_y) / 2)|.
            let half = 2.0 * r.asin();
            let best = if half >= PI {
                n
            } else {
                (0..center_count)
                    .map(|i| {
                        let c = TAU * i as f64 / center_count as f64;
                        let (lo, hi) = (c - half, c + half);
                        if lo < 0.0 {
                            count(0.0, hi) + count(lo + TAU, TAU)
                        } else if hi >= TAU {
                            count(lo, TAU) + count(0.0, hi - TAU)
                        } else {
                            count(lo, hi)
                        }
                    })
                    .max()
                    .unwrap_or(0)
            };
            let mass = best as f64 / n as f64;
            RegularityRow {
                r,
                mass,
                ratio: mass * r.ln().abs(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeneratorMeasure;

    #[test]
    fn chart_conventions() {
        assert_eq!(chart(&ProjPoint::e1()), 0.0);
        assert!((chart(&ProjPoint::e2()) - PI).abs() < 1e-15);
        for i in 0..100 {
            let th = TAU * i as f64 / 100.0;
            assert!((chart(&chart_inverse(th)) - th).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_sign() {
        let p = |t: f64| chart_inverse(t);
        assert_eq!(sign(&p(0.1), &p(0.2), &p(0.3)), 1);
        assert_eq!(sign(&p(0.2), &p(0.1), &p(0.3)), -1);
        assert_eq!(sign(&p(0.1), &p(0.1), &p(0.3)), 0);
        assert_eq!(sign(&p(6.0), &p(0.1), &p(0.3)), 1);
        let c = ProjPoint::<Complex64>::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
        let r = p(0.5).to_complex();
        assert!(sign_checked(&c, &r, &r).is_err());
    }

    #[test]
    fn coefficient_basics() {
        let s = TrajectorySampler::new(GeneratorMeasure::reference(), 3, 1).unwrap();
        let f = fourier_coefficients(&s, 8, 2000, 50).unwrap();
        assert_eq!(f.get(0), Some(Complex64::new(1.0, 0.0)));
        assert!(f.warning.is_none());
        for r in &f.rows {
            assert!(r.abs() <= 1.0 + 1e-12);
        }
        assert_eq!(f.get(-3), f.get(3).map(|z| z.conj()));
    }

    #[test]
    fn oscillatory_matches_coefficients_bitwise() {
        let s = TrajectorySampler::new(GeneratorMeasure::reference(), 5, 1).unwrap();
        let nu = empirical_measure(&s, 50, 3000, &ProjPoint::e1());
        let th: Vec<f64> = nu.iter().map(chart).collect();
        let rows = coefficients_from_thetas(&th, 12).unwrap();
        for k in [1usize, 7, 12] {
            let q = OscillatoryQuery {
                phi: Box::new(|t| t),
                psi: Box::new(|_| 1.0),
                c: 7.0,
                k: k as f64,
            };
            let v = oscillatory_integral(&q, &nu).unwrap();
            assert_eq!(v.value.re.to_bits(), rows[k].re.to_bits());
            assert_eq!(v.value.im.to_bits(), rows[k].im.to_bits());
        }
        let zero = OscillatoryQuery {
            phi: Box::new(|t| t),
            psi: Box::new(|_| 0.0),
            c: 7.0,
            k: 40.0,
        };
        assert_eq!(oscillatory_integral(&zero, &nu).unwrap().value, Complex64::new(0.0, 0.0));
        let flat = OscillatoryQuery {
            phi: Box::new(|t| 0.1 * t.sin()),
            psi: Box::new(|_| 1.0),
            c: 2.0,
            k: 1.0,
        };
        assert!(oscillatory_integral(&flat, &nu).is_err());
    }

    #[test]
    fn unit_ball_has_full_mass() {
        let nu: Vec<ProjPoint> = (0..100).map(|i| chart_inverse(0.06 * i as f64)).collect();
        let rows = regularity_profile(&nu, &[1.0, 1e-9], 64).unwrap();
        assert_eq!(rows[0].mass, 1.0);
        assert!(rows[1].mass <= 0.02);
        assert!(regularity_profile(&nu, &[0.0], 8).is_err());
    }

    #[test]
    fn preimage_gap_agrees_with_direct_difference() {
        let mut g = ScaledMat2::identity();
        g.left_mul(&crate::proj2::Mat2::new(2.0, 0.5, -4.0, -0.5).unwrap());
        g.left_mul(&crate::proj2::Mat2::diag(2.0));
        let (x0, y0) = (ProjPoint::e1(), chart_inverse(1.0));
        let direct = wrap(chart(&g.inverse_act(&x0)) - chart(&g.inverse_act(&y0)));
        assert!((preimage_chart_gap(&g, &x0, &y0) - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_psi_gives_equal_gamma_and_lambda() {
        let pf = PhaseFunctions {
            phi: Box::new(f64::sin),
            dphi: Box::new(f64::cos),
            psi: Box::new(|_| 0.0),
        };
        let mut g = ScaledMat2::identity();
        g.left_mul(&crate::proj2::Mat2::diag(3.0));
        let (x0, y0) = (chart_inverse(0.4), chart_inverse(2.0));
        assert_eq!(gamma_value(&pf, &g, &x0, &y0, 5.0), lambda_value(&pf, &g, &x0, &y0, 5.0));
    }
}
