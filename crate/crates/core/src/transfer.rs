//! Collocation discretization of the perturbed Markov operators
//! `P_xi u(x) = sum_g w_g exp(i xi sigma_g(x)) u(g x)` on a uniform grid of
//! the double-angle circle.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc;
use crate::model::{nonelementary_probe, GeneratorMeasure, Verdict};
use crate::proj2::{act, cocycle, ProjPoint};
use crate::quad::Quad;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<Complex64>,
}

fn check_grid(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("grid size {n} must be a power of two >= 16")));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_grid(values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("grid function has non-finite values"));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(n: usize, f: F) -> Result<Self> {
        check_grid(n)?;
        Self::new((0..n).map(|i| f(TAU * i as f64 / n as f64)).collect())
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Self> {
        Self::from_fn(n, |t| Complex64::new(f(t), 0.0))
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_real_fn(n, |_| c)
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn theta(&self, i: usize) -> f64 {
        TAU * i as f64 / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Cubic,
}

/// Sparse rows of the discretized `P_xi`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    xi: f64,
    grid: usize,
    order: Interpolation,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<Complex64>,
}

fn interpolation_weights(pos: f64, n: usize, order: Interpolation, out: &mut Vec<(usize, f64)>) {
    let j0 = pos.floor();
    let f = pos - j0;
    let j0 = j0 as i64;
    let wrap = |j: i64| j.rem_euclid(n as i64) as usize;
    match order {
        Interpolation::Linear => {
            out.push((wrap(j0), 1.0 - f));
            out.push((wrap(j0 + 1), f));
        }
        Interpolation::Cubic => {
            out.push((wrap(j0 - 1), -f * (f - 1.0) * (f - 2.0) / 6.0));
            out.push((wrap(j0), (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0));
            out.push((wrap(j0 + 1), -(f + 1.0) * f * (f - 2.0) / 2.0));
            out.push((wrap(j0 + 2), (f + 1.0) * f * (f - 1.0) / 6.0));
        }
    }
}

impl TransferMatrix {
    pub fn new(mu: &GeneratorMeasure, xi: f64, grid: usize, order: Interpolation) -> Result<Self> {
        check_grid(grid)?;
        if !xi.is_finite() {
            return Err(Error::invalid("xi must be finite"));
        }
        let h = TAU / grid as f64;
        let rows: Vec<Vec<(usize, Complex64)>> = (0..grid)
            .into_par_iter()
            .map(|i| {
                let x = ProjPoint::from_theta(h * i as f64);
                let mut raw: Vec<(usize, f64)> = Vec::new();
                let mut entries: Vec<(usize, Complex64)> = Vec::new();
                for atom in mu.atoms() {
                    let s = cocycle(&atom.matrix, &x);
                    let phase = if xi == 0.0 {
                        Complex64::new(atom.weight, 0.0)
                    } else {
                        Complex64::from_polar(atom.weight, xi * s)
                    };
                    raw.clear();
                    interpolation_weights(act(&atom.matrix, &x).theta() / h, grid, order, &mut raw);
                    for &(j, w) in &raw {
                        entries.push((j, phase * w));
                    }
                }
                entries.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
                for (j, w) in entries {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += w,
                        _ => merged.push((j, w)),
                    }
                }
                if xi == 0.0 {
                    // Make the row sum to one exactly in application order.
                    let k = merged.len();
                    let mut partial = ZERO;
                    for e in &merged[..k - 1] {
                        partial += e.1;
                    }
                    merged[k - 1].1 = Complex64::new(1.0 - partial.re, 0.0);
                }
                merged
            })
            .collect();
        let mut row_start = Vec::with_capacity(grid + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_start.push(0);
        for r in rows {
            for (j, w) in r {
                cols.push(j);
                weights.push(w);
            }
            row_start.push(cols.len());
        }
        Ok(TransferMatrix {
            xi,
            grid,
            order,
            row_start,
            cols,
            weights,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn order(&self) -> Interpolation {
        self.order
    }

    fn row_dot(&self, i: usize, u: &[Complex64]) -> Complex64 {
        let mut s = ZERO;
        for k in self.row_start[i]..self.row_start[i + 1] {
            s += self.weights[k] * u[self.cols[k]];
        }
        s
    }

    fn apply_raw(&self, u: &[Complex64]) -> Vec<Complex64> {
        (0..self.grid)
            .into_par_iter()
            .with_min_len(256)
            .map(|i| self.row_dot(i, u))
            .collect()
    }

    /// Row vector times matrix: `(v P)_j = sum_i v_i P_ij`.
    fn apply_left_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.grid];
        for (i, vi) in v.iter().enumerate() {
            for k in self.row_start[i]..self.row_start[i + 1] {
                out[self.cols[k]] += *vi * self.weights[k];
            }
        }
        out
    }

    /// Dense copy, for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut d = vec![vec![ZERO; self.grid]; self.grid];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.row_start[i]..self.row_start[i + 1] {
                row[self.cols[k]] += self.weights[k];
            }
        }
        d
    }
}

pub fn apply_p(op: &TransferMatrix, u: &GridFunction, n: usize) -> Result<GridFunction> {
    if u.nodes() != op.grid {
        return Err(Error::invalid(format!(
            "grid mismatch: operator has {} nodes, function has {}",
            op.grid,
            u.nodes()
        )));
    }
    let mut v = u.values.clone();
    for _ in 0..n {
        v = op.apply_raw(&v);
    }
    Ok(GridFunction { values: v })
}

#[derive(Clone, Debug)]
pub struct Eigen {
    pub value: Complex64,
    pub vector: GridFunction,
    pub iterations: usize,
    pub residual: f64,
}

fn normalize_phase(v: &mut [Complex64]) {
    let s = sup(v);
    let anchor = v.iter().find(|z| z.norm() > 1e-300).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let u = anchor.conj() / anchor.norm() / s;
    for z in v.iter_mut() {
        *z *= u;
    }
}

/// Power iteration for the eigenvalue of largest modulus, started from `start`
/// (the constant function when `None`).
pub fn leading_eigen_from(
    op: &TransferMatrix,
    start: Option<&GridFunction>,
    tol: f64,
    max_iter: usize,
) -> Result<Eigen> {
    if !(tol > 0.0) {
        return Err(Error::invalid("eigen tolerance must be positive"));
    }
    let mut v = match start {
        Some(s) if s.nodes() == op.grid => s.values.clone(),
        Some(_) => return Err(Error::invalid("start vector grid mismatch")),
        None => vec![Complex64::new(1.0, 0.0); op.grid],
    };
    let s = sup(&v);
    v.iter_mut().for_each(|z| *z /= s);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let w = op.apply_raw(&v);
        let num = mc::pairwise_csum_by(op.grid, &|i| v[i].conj() * w[i]);
        let den = mc::pairwise_sum_by(op.grid, &|i| v[i].norm_sqr());
        let lambda = num / den;
        residual = (0..op.grid)
            .map(|i| (w[i] - lambda * v[i]).norm())
            .fold(0.0, f64::max)
            / sup(&v);
        if residual <= tol {
            normalize_phase(&mut v);
            return Ok(Eigen {
                value: lambda,
                vector: GridFunction { values: v },
                iterations: it,
                residual,
            });
        }
        let sw = sup(&w);
        if sw == 0.0 {
            return Err(Error::NoConvergence("iterate vanished".into()));
        }
        v = w.into_iter().map(|z| z / sw).collect();
    }
    Err(Error::NoConvergence(format!(
        "power iteration at xi = {} stopped at residual {residual:.3e} after {max_iter} steps",
        op.xi
    )))
}

pub fn leading_eigen(op: &TransferMatrix, tol: f64, max_iter: usize) -> Result<Eigen> {
    leading_eigen_from(op, None, tol, max_iter)
}

/// Left eigenvector for the same leading eigenvalue, by power iteration on
/// row vectors.
fn leading_left(op: &TransferMatrix, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let mut v = vec![Complex64::new(1.0 / op.grid as f64, 0.0); op.grid];
    for _ in 0..max_iter {
        let w = op.apply_left_raw(&v);
        let sw = sup(&w);
        if sw == 0.0 {
            return Err(Error::NoConvergence("left iterate vanished".into()));
        }
        let w: Vec<Complex64> = w.into_iter().map(|z| z / sw).collect();
        // Compare up to a unimodular factor.
        let k = (0..op.grid).max_by(|&a, &b| w[a].norm().total_cmp(&w[b].norm())).expect("grid");
        let ph = if v[k].norm() > 0.0 { (w[k] / v[k]) / (w[k] / v[k]).norm() } else { Complex64::new(1.0, 0.0) };
        let diff = (0..op.grid).map(|i| (w[i] - ph * v[i] / sup(&v)).norm()).fold(0.0, f64::max);
        v = w;
        if diff <= tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence("left power iteration did not converge".into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subdominant {
    /// Estimated modulus of the second eigenvalue.
    pub modulus: f64,
    /// `|lambda_1| - modulus`.
    pub gap: f64,
    /// False when the growth ratio did not settle or the gap is degenerate.
    pub converged: bool,
}

/// Second eigenvalue modulus by power iteration on the deflated operator
/// `u -> P u - lambda v (l . u) / (l . v)`.
pub fn subdominant(op: &TransferMatrix, lead: &Eigen, iters: usize) -> Result<Subdominant> {
    let left = leading_left(op, 1e-12, 20_000)?;
    let v = lead.vector.values();
    let lv = mc::pairwise_csum_by(op.grid, &|i| left[i] * v[i]);
    let deflate = |u: &mut Vec<Complex64>| {
        let lu = mc::pairwise_csum_by(op.grid, &|i| left[i] * u[i]);
        let c = lu / lv;
        for (ui, vi) in u.iter_mut().zip(v) {
            *ui -= c * vi;
        }
    };
    let mut u: Vec<Complex64> = (0..op.grid)
        .map(|i| {
            let t = TAU * i as f64 / op.grid as f64;
            Complex64::new(t.cos() + 0.5 * (3.0 * t).sin() + 0.25 * (5.0 * t + 0.3).cos(), 0.0)
        })
        .collect();
    deflate(&mut u);
    let mut logs = Vec::with_capacity(iters);
    for _ in 0..iters {
        let s = sup(&u);
        if s == 0.0 {
            return Ok(Subdominant { modulus: 0.0, gap: lead.value.norm(), converged: true });
        }
        u.iter_mut().for_each(|z| *z /= s);
        let mut w = op.apply_raw(&u);
        deflate(&mut w);
        logs.push(sup(&w).ln());
        u = w;
    }
    let window = (iters / 4).max(1);
    let tail = &logs[logs.len() - window..];
    let half = window / 2;
    let m1 = tail[..half.max(1)].iter().sum::<f64>() / half.max(1) as f64;
    let m2 = tail[half..].iter().sum::<f64>() / (window - half).max(1) as f64;
    let modulus = (tail.iter().sum::<f64>() / window as f64).exp();
    let gap = lead.value.norm() - modulus;
    let settled = (m1 - m2).abs() < 1e-3;
    Ok(Subdominant {
        modulus,
        gap,
        converged: settled && gap > 1e-8,
    })
}

#[derive(Clone, Debug)]
pub struct Stationary {
    /// Density against `d theta / 2 pi`: nonnegative, mean one.
    pub density: GridFunction,
    /// Node masses summing to one.
    pub masses: Vec<f64>,
    pub warning: Option<String>,
}

/// Left fixed vector of the discretized `P_0`.
pub fn stationary_density(op: &TransferMatrix, mu: &GeneratorMeasure) -> Result<Stationary> {
    if op.xi != 0.0 {
        return Err(Error::invalid("stationary density needs the operator at xi = 0"));
    }
    let n = op.grid;
    let mut pi = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut converged = false;
    for _ in 0..200_000 {
        let next = op.apply_left_raw(&pi);
        let total: f64 = mc::pairwise_sum_by(n, &|i| next[i].re);
        let next: Vec<Complex64> = next.into_iter().map(|z| Complex64::new(z.re / total, 0.0)).collect();
        let diff: f64 = (0..n).map(|i| (next[i].re - pi[i].re).abs()).sum();
        pi = next;
        if diff < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("stationary vector did not settle".into()));
    }
    let mut masses = Vec::with_capacity(n);
    for z in &pi {
        if z.re < -1e-8 {
            return Err(Error::NoConvergence(format!("stationary mass {} is negative", z.re)));
        }
        masses.push(z.re.max(0.0));
    }
    let density = GridFunction {
        values: masses.iter().map(|m| Complex64::new(m * n as f64, 0.0)).collect(),
    };
    let warning = match nonelementary_probe(mu, 4).map(|r| r.verdict) {
        Ok(Verdict::LikelyNonElementary) => None,
        _ => Some("measure may be elementary: the stationary vector need not be unique".into()),
    };
    Ok(Stationary { density, masses, warning })
}

/// Natural cubic spline on increasing nodes, complex values.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<Complex64>) -> Self {
        let n = xs.len();
        let mut m = vec![ZERO; n];
        if n >= 3 {
            // Tridiagonal solve for second derivatives.
            let mut c = vec![0.0; n];
            let mut d = vec![ZERO; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let rhs = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (rhs - d[i - 1] * a) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - m[i + 1] * c[i];
            }
        }
        CubicSpline { xs, ys, m }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.xs.len();
        let i = match self.xs.iter().position(|&v| v > x) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        }
        .min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        self.ys[i] * a
            + self.ys[i + 1] * b
            + (self.m[i] * (a * a * a - a) + self.m[i + 1] * (b * b * b - b)) * (h * h / 6.0)
    }
}

#[derive(Clone, Debug)]
pub struct LambdaCurve {
    pub xi_grid: Vec<f64>,
    pub lambda: Vec<Complex64>,
    /// Slope of `Im lambda` at zero.
    pub gamma_fit: f64,
    /// `C` in `Re lambda ~ 1 - C xi^2 / 2`; estimates `a^2 + gamma^2`.
    pub curvature_fit: f64,
    /// `a^2` in `|lambda|^2 ~ 1 - a^2 xi^2`.
    pub a2_fit: f64,
    /// Largest `|lambda - (1 + i gamma xi - C xi^2 / 2)|` on the grid.
    pub residual: f64,
    spline: CubicSpline,
}

impl LambdaCurve {
    pub fn xi_max(&self) -> f64 {
        self.xi_grid[self.xi_grid.len() - 1]
    }

    /// Spline interpolant of `log lambda`, exponentiated.
    pub fn eval(&self, xi: f64) -> Complex64 {
        self.spline.eval(xi).exp()
    }
}

/// Least squares for `y = b1 x^p1 + b2 x^p2`.
fn two_term_fit(xs: &[f64], ys: &[f64], p1: i32, p2: i32) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let f1 = x.powi(p1);
        let f2 = x.powi(p2);
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        t1 += f1 * y;
        t2 += f2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    ((t1 * s22 - t2 * s12) / det, (s11 * t2 - s12 * t1) / det)
}

pub fn lambda_curve(
    mu: &GeneratorMeasure,
    xi_max: f64,
    m_points: usize,
    grid: usize,
) -> Result<LambdaCurve> {
    if !(xi_max > 0.0 && xi_max <= 1.0) {
        return Err(Error::invalid(format!("xi_max = {xi_max} must lie in (0, 1]")));
    }
    if m_points < 5 || m_points % 2 == 0 {
        return Err(Error::invalid("lambda curve needs an odd number of points >= 5"));
    }
    let half = (m_points - 1) / 2;
    let xi_grid: Vec<f64> = (0..m_points)
        .map(|j| xi_max * (j as f64 - half as f64) / half as f64)
        .collect();
    let mut lambda = vec![ZERO; m_points];
    let solve = |xi: f64, start: Option<&GridFunction>| -> Result<Eigen> {
        let op = TransferMatrix::new(mu, xi, grid, Interpolation::Linear)?;
        leading_eigen_from(&op, start, 1e-11, 100_000)
    };
    let e0 = solve(0.0, None)?;
    lambda[half] = e0.value;
    for dir in [1i64, -1] {
        let mut prev = e0.vector.clone();
        for step in 1..=half as i64 {
            let j = (half as i64 + dir * step) as usize;
            let e = solve(xi_grid[j], Some(&prev))?;
            lambda[j] = e.value;
            prev = e.vector;
        }
    }
    let im: Vec<f64> = lambda.iter().map(|l| l.im).collect();
    let re: Vec<f64> = lambda.iter().map(|l| l.re - 1.0).collect();
    let mod2: Vec<f64> = lambda.iter().map(|l| l.norm_sqr() - 1.0).collect();
    let (gamma_fit, _) = two_term_fit(&xi_grid, &im, 1, 3);
    let (half_c, _) = two_term_fit(&xi_grid, &re, 2, 4);
    let (neg_a2, _) = two_term_fit(&xi_grid, &mod2, 2, 4);
    let curvature_fit = -2.0 * half_c;
    let residual = xi_grid
        .iter()
        .zip(&lambda)
        .map(|(&x, l)| {
            (l - Complex64::new(1.0 - curvature_fit * x * x / 2.0, gamma_fit * x)).norm()
        })
        .fold(0.0, f64::max);
    let spline = CubicSpline::new(xi_grid.clone(), lambda.iter().map(|l| l.ln()).collect());
    Ok(LambdaCurve {
        xi_grid,
        lambda,
        gamma_fit,
        curvature_fit,
        a2_fit: -neg_a2,
        residual,
        spline,
    })
}

/// Test functions for the spectral radius estimate.
fn radius_basis(grid: usize) -> Vec<Vec<Complex64>> {
    let mut out = vec![vec![Complex64::new(1.0, 0.0); grid]];
    for k in 1..=3 {
        for f in [f64::cos, f64::sin] {
            out.push(
                (0..grid)
                    .map(|i| Complex64::new(f(k as f64 * TAU * i as f64 / grid as f64), 0.0))
                    .collect(),
            );
        }
    }
    out
}

/// `max_u (|P_xi^n u|_inf / |u|_inf)^{1/n}` over a small trigonometric basis.
pub fn spectral_radius_scan(
    mu: &GeneratorMeasure,
    xi_list: &[f64],
    grid: usize,
    n_powers: usize,
) -> Result<Vec<(f64, f64)>> {
    if n_powers == 0 {
        return Err(Error::invalid("n_powers must be positive"));
    }
    let basis = radius_basis(grid);
    xi_list
        .iter()
        .map(|&xi| {
            let op = TransferMatrix::new(mu, xi, grid, Interpolation::Linear)?;
            let mut best: f64 = 0.0;
            for u in &basis {
                let mut v = u.clone();
                let mut log_growth = -sup(u).ln();
                for _ in 0..n_powers {
                    v = op.apply_raw(&v);
                    let s = sup(&v);
                    if s == 0.0 {
                        log_growth = f64::NEG_INFINITY;
                        break;
                    }
                    log_growth += s.ln();
                    v.iter_mut().for_each(|z| *z /= s);
                }
                best = best.max((log_growth / n_powers as f64).exp());
            }
            Ok((xi, best))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DecayTable {
    pub rows: Vec<(usize, f64)>,
    /// Fit of `log deviation = intercept + slope n` over rows with positive deviation.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Sup-distance of `P_0^n u` from its limit `sum_i pi_i u_i`.
pub fn equidistribution_check(
    mu: &GeneratorMeasure,
    u: &GridFunction,
    n_list: &[usize],
) -> Result<DecayTable> {
    let op = TransferMatrix::new(mu, 0.0, u.nodes(), Interpolation::Linear)?;
    let st = stationary_density(&op, mu)?;
    let mean = mc::pairwise_csum_by(u.nodes(), &|i| u.values[i] * st.masses[i]);
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let mut v = u.values.clone();
    let mut rows = Vec::new();
    for n in 1..=n_max {
        v = op.apply_raw(&v);
        if n_list.contains(&n) {
            let dev = v.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
            rows.push((n, dev));
        }
    }
    let pos: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 0.0)
        .map(|r| (r.0 as f64, r.1.ln()))
        .collect();
    let (intercept, slope, r2) = if pos.len() >= 2 {
        let xs: Vec<f64> = pos.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.1).collect();
        mc::linear_fit(&xs, &ys)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(DecayTable {
        rows,
        slope,
        intercept,
        r2,
    })
}

pub enum LambdaSource<'a> {
    /// `lambda_xi = exp(i gamma xi - a2 xi^2 / 2)`.
    Synthetic { gamma: f64, a2: f64 },
    Curve(&'a LambdaCurve),
}

impl LambdaSource<'_> {
    pub fn eval(&self, xi: f64) -> Complex64 {
        match self {
            LambdaSource::Synthetic { gamma, a2 } => Complex64::new(-a2 * xi * xi / 2.0, gamma * xi).exp(),
            LambdaSource::Curve(c) => c.eval(xi),
        }
    }

    fn slope_hint(&self) -> f64 {
        match self {
            LambdaSource::Synthetic { gamma, .. } => gamma.abs(),
            LambdaSource::Curve(c) => c.gamma_fit.abs(),
        }
    }
}

/// `B_eps^k = int_0^eps (lambda_xi^k - lambda_{-xi}^k) / (i xi) d xi`.
pub fn b_eps_k(source: &LambdaSource, epsilon: f64, k: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !(k >= 0.0) {
        return Err(Error::invalid("b_eps_k needs epsilon > 0 and k >= 0"));
    }
    if let LambdaSource::Curve(c) = source {
        if epsilon > c.xi_max() {
            return Err(Error::invalid(format!(
                "epsilon {epsilon} exceeds the fitted range {}",
                c.xi_max()
            )));
        }
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    let pieces = ((k * epsilon * source.slope_hint() / 2.0).ceil() as usize).clamp(1, 20_000);
    let f = |xi: f64| {
        let d = source.eval(xi).powf(k) - source.eval(-xi).powf(k);
        d / Complex64::new(0.0, xi)
    };
    let r = Quad::default().tol(1e-11, 1e-11).pieces(pieces).complex(f, 0.0, epsilon)?;
    Ok(r.value.re)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteNorms {
    pub w12: f64,
    pub logp_seminorm: f64,
    pub sup: f64,
}

/// Grid versions of `|u|_{L2} + |u'|_{L2}`, `[u]_{log^p}` and `|u|_inf`,
/// with `L2` against `d theta / 2 pi`.
pub fn discrete_norms(u: &GridFunction, p: f64) -> Result<DiscreteNorms> {
    let n = u.nodes();
    if n > 4096 {
        return Err(Error::invalid("log^p seminorm is quadratic; grid must be <= 4096"));
    }
    let h = TAU / n as f64;
    let v = &u.values;
    let l2 = (mc::pairwise_sum_by(n, &|i| v[i].norm_sqr()) / n as f64).sqrt();
    let d2 = (mc::pairwise_sum_by(n, &|i| ((v[(i + 1) % n] - v[i]) / h).norm_sqr()) / n as f64).sqrt();
    let logp = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for j in (i + 1)..n {
                let d = ((j - i) as f64 * h / 2.0).sin().abs();
                let w = (1.0 + d.ln().abs()).powf(p);
                best = best.max((v[i] - v[j]).norm() * w);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(DiscreteNorms {
        w12: l2 + d2,
        logp_seminorm: logp,
        sup: sup(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proj2::Mat2;

    #[test]
    fn markov_property_is_exact() {
        let mu = GeneratorMeasure::reference();
        for grid in [64, 256] {
            let op = TransferMatrix::new(&mu, 0.0, grid, Interpolation::Linear).unwrap();
            let one = GridFunction::constant(grid, 1.0).unwrap();
            let out = apply_p(&op, &one, 7).unwrap();
            assert!(out.values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn positivity() {
        let op = TransferMatrix::new(&GeneratorMeasure::reference(), 0.0, 128, Interpolation::Linear)
            .unwrap();
        let u = GridFunction::from_real_fn(128, |t| (t.sin()).max(0.0)).unwrap();
        let v = apply_p(&op, &u, 3).unwrap();
        assert!(v.values().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
    }

    #[test]
    fn grid_aligned_rotation_shifts() {
        let n = 64;
        // Rotation by angle pi/n moves theta by 2 pi / n.
        let mu = GeneratorMeasure::dirac(Mat2::rotation(std::f64::consts::PI / n as f64));
        let op = TransferMatrix::new(&mu, 0.0, n, Interpolation::Linear).unwrap();
        let u = GridFunction::from_real_fn(n, |t| t.sin() + 0.1 * t).unwrap();
        let v = apply_p(&op, &u, 1).unwrap();
        for i in 0..n {
            assert!((v.values()[i] - u.values()[(i + 1) % n]).norm() < 1e-9);
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let op = TransferMatrix::new(&GeneratorMeasure::reference(), 0.0, 64, Interpolation::Linear)
            .unwrap();
        let u = GridFunction::constant(32, 1.0).unwrap();
        assert!(apply_p(&op, &u, 1).is_err());
        assert!(GridFunction::constant(48, 1.0).is_err());
    }

    #[test]
    fn leading_eigen_at_zero_is_one() {
        let op = TransferMatrix::new(&GeneratorMeasure::reference(), 0.0, 256, Interpolation::Linear)
            .unwrap();
        let e = leading_eigen(&op, 1e-12, 100).unwrap();
        assert!((e.value - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(e.vector.values().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn rotation_has_degenerate_gap() {
        let mu = GeneratorMeasure::dirac(Mat2::rotation(std::f64::consts::PI / 64.0));
        let op = TransferMatrix::new(&mu, 0.0, 64, Interpolation::Linear).unwrap();
        let e = leading_eigen(&op, 1e-12, 100).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-12);
        let s = subdominant(&op, &e, 200).unwrap();
        assert!(!s.converged);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let mut out = Vec::new();
        interpolation_weights(3.3, 16, Interpolation::Cubic, &mut out);
        let s: f64 = out.iter().map(|e| e.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
        let val: f64 = out
            .iter()
            .map(|&(j, w)| w * (j as f64).powi(3))
            .sum();
        assert!((val - 3.3f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn spline_reproduces_nodes_and_lines() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<Complex64> = xs.iter().map(|x| Complex64::new(2.0 * x - 1.0, -x)).collect();
        let s = CubicSpline::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).norm() < 1e-14);
        }
        assert!((s.eval(0.6) - Complex64::new(0.2, -0.6)).norm() < 1e-14);
    }

    #[test]
    fn b_eps_k_trivial_cases() {
        let src = LambdaSource::Synthetic { gamma: 1.0, a2: 1.0 };
        assert_eq!(b_eps_k(&src, 0.5, 0.0).unwrap(), 0.0);
        assert!(b_eps_k(&src, -0.5, 1.0).is_err());
    }

    #[test]
    fn norms_of_constants_and_cosines() {
        let c = GridFunction::constant(64, -2.0).unwrap();
        let n = discrete_norms(&c, 2.0).unwrap();
        assert_eq!(n.logp_seminorm, 0.0);
        assert!((n.w12 - 2.0).abs() < 1e-14);
        assert_eq!(n.sup, 2.0);
        let u = GridFunction::from_real_fn(256, f64::cos).unwrap();
        let n = discrete_norms(&u, 2.0).unwrap();
        assert!(n.w12.is_finite() && n.logp_seminorm.is_finite());
        assert!((n.w12 - 2.0 * 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn constant_has_no_deviation() {
        let u = GridFunction::constant(64, 3.0).unwrap();
        let t = equidistribution_check(&GeneratorMeasure::reference(), &u, &[1, 2, 3]).unwrap();
        assert!(t.rows.iter().all(|r| r.1 < 1e-14));
    }
}
