//! Fourier-analytic utilities on the real line: the band-limited smoothing
//! kernels, principal values, convolution error profiles and a Hölder decay
//! probe.
//!
//! Transforms use `f^(xi) = int f(u) exp(-i u xi) du`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::Quad;

const C0: f64 = 3.0 / (8.0 * PI);

/// Base kernel `theta(u) = c0 (sin(u/4) / (u/4))^4`, integral one.
pub fn base_kernel(u: f64) -> f64 {
    let x = u / 4.0;
    if x.abs() < 1e-4 {
        // Taylor expansion of (sin x / x)^4.
        let x2 = x * x;
        return C0 * (1.0 - 2.0 * x2 / 3.0 + x2 * x2 / 5.0);
    }
    let s = x.sin() / x;
    C0 * s * s * s * s
}

/// Cubic B-spline on `[-2, 2]`, `N(0) = 2/3`.
fn cubic_bspline(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        0.0
    } else if a <= 1.0 {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    } else {
        let b = 2.0 - a;
        b * b * b / 6.0
    }
}

/// Transform of [`base_kernel`]: `1.5 N(2 xi)`, supported on `[-1, 1]`.
pub fn base_transform(xi: f64) -> f64 {
    1.5 * cubic_bspline(2.0 * xi)
}

/// `theta_delta(u) = delta^-2 theta(u / delta^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    delta: f64,
}

pub fn make_kernel(delta: f64) -> Result<Kernel> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("kernel needs 0 < delta < 1, got {delta}")));
    }
    Ok(Kernel { delta })
}

impl Kernel {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, u: f64) -> f64 {
        let d2 = self.delta * self.delta;
        base_kernel(u / d2) / d2
    }

    pub fn transform(&self, xi: f64) -> f64 {
        base_transform(self.delta * self.delta * xi)
    }

    /// The transform vanishes outside `[-b, b]`.
    pub fn support_bound(&self) -> f64 {
        1.0 / (self.delta * self.delta)
    }

    /// `int theta_delta`, by quadrature.
    pub fn integral(&self) -> Result<f64> {
        let d2 = self.delta * self.delta;
        let q = Quad::default().tol(1e-12, 1e-11);
        let core = q.pieces(64).real(|u| self.eval(u), 0.0, 400.0 * d2)?.value;
        let tail = q.real_to_inf(|u| self.eval(u), 400.0 * d2)?.value;
        Ok(2.0 * (core + tail))
    }

    /// `int_{|u| >= delta} theta_delta`.
    pub fn tail_mass(&self) -> Result<f64> {
        let v0 = 1.0 / self.delta;
        let q = Quad::default().tol(1e-15, 1e-10);
        let pieces = ((400.0 - v0).max(0.0) / 4.0).ceil() as usize + 1;
        let near = if v0 < 400.0 {
            q.pieces(pieces).real(base_kernel, v0, 400.0)?.value
        } else {
            0.0
        };
        let far = q.real_to_inf(base_kernel, v0.max(400.0))?.value;
        Ok(2.0 * (near + far))
    }

    /// Smoothed indicator `1_[b1, b2] * theta_delta (u) = int_{u - b2}^{u - b1} theta_delta`.
    pub fn smoothed_indicator(&self, b1: f64, b2: f64, u: f64) -> Result<f64> {
        self.convolve(|_| 1.0, b1, b2, u)
    }

    /// `(phi 1_[b1, b2]) * theta_delta (u)`.
    pub fn convolve<F: Fn(f64) -> f64>(&self, phi: F, b1: f64, b2: f64, u: f64) -> Result<f64> {
        let d2 = self.delta * self.delta;
        // The kernel lives on scale delta^2 around w = u; resolve it there and
        // let the adaptive rule handle the heavy tails.
        let near_lo = (u - 200.0 * d2).max(b1);
        let near_hi = (u + 200.0 * d2).min(b2);
        let q = Quad::default().tol(1e-14, 1e-11);
        let f = |w: f64| phi(w) * self.eval(u - w);
        let mut total = 0.0;
        if near_lo < near_hi {
            total += q.pieces(64).real(f, near_lo, near_hi)?.value;
            if b1 < near_lo {
                total += q.pieces(16).real(f, b1, near_lo)?.value;
            }
            if near_hi < b2 {
                total += q.pieces(16).real(f, near_hi, b2)?.value;
            }
        } else {
            total += q.pieces(16).real(f, b1, b2)?.value;
        }
        Ok(total)
    }
}

/// An integrable function together with its transform.
pub struct TransformPair<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub transform: &'a dyn Fn(f64) -> Complex64,
}

/// Standard normal density and its transform `exp(-xi^2 / 2)`.
pub fn gaussian_pair() -> TransformPair<'static> {
    TransformPair {
        f: &|u| (-u * u / 2.0).exp() / (2.0 * PI).sqrt(),
        transform: &|xi| Complex64::new((-xi * xi / 2.0).exp(), 0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvResult {
    /// Principal value of `int phi^(xi) exp(-i t xi) / xi d xi`.
    pub lhs: Complex64,
    /// `i pi int_{-inf}^{-t} phi - i pi int_{-t}^{inf} phi`.
    pub rhs: Complex64,
    /// Size of the last Richardson correction.
    pub extrapolation_error: f64,
}

/// Richardson extrapolation of values at `eta_0 / 2^j` to `eta -> 0`,
/// assuming a power series in `eta`.
fn richardson(vals: &[Complex64]) -> (Complex64, f64) {
    let mut table = vals.to_vec();
    let mut last_change = f64::INFINITY;
    for level in 1..vals.len() {
        let factor = (1u64 << level) as f64;
        let mut next = Vec::with_capacity(table.len() - 1);
        for j in 0..table.len() - 1 {
            next.push((table[j + 1] * factor - table[j]) / (factor - 1.0));
        }
        last_change = (next[next.len() - 1] - table[table.len() - 1]).norm();
        table = next;
    }
    (table[0], last_change)
}

pub fn pv_hilbert(phi: &TransformPair, t: f64) -> Result<PvResult> {
    let g = |xi: f64| {
        let a = (phi.transform)(xi) * Complex64::from_polar(1.0, -t * xi);
        let b = (phi.transform)(-xi) * Complex64::from_polar(1.0, t * xi);
        (a - b) / xi
    };
    let q = Quad::default().tol(1e-13, 1e-12);
    let pieces = ((t.abs() + 1.0) * 4.0).ceil() as usize;
    let far = q.complex_to_inf(g, 1.0)?.value;
    let vals: Vec<Complex64> = (0..6)
        .map(|j| {
            let eta = 0.1 / (1.0 + t.abs()) / (1u64 << j) as f64;
            q.pieces(pieces).complex(g, eta, 1.0).map(|r| r.value + far)
        })
        .collect::<Result<_>>()?;
    let (lhs, extrapolation_error) = richardson(&vals);
    if extrapolation_error > 1e-7 {
        return Err(Error::NoConvergence(format!(
            "principal value extrapolation stalled at {extrapolation_error:.2e}"
        )));
    }
    let rq = Quad::default().tol(1e-14, 1e-13);
    let left = rq.real_from_neg_inf(|u| (phi.f)(u), -t)?.value;
    let right = rq.real_to_inf(|u| (phi.f)(u), -t)?.value;
    let rhs = Complex64::new(0.0, PI * (left - right));
    Ok(PvResult {
        lhs,
        rhs,
        extrapolation_error,
    })
}

/// Principal value of `int exp(-i u xi) / u du`, by symmetric exclusion on
/// `[eta, m]` with an asymptotic correction for `[m, inf)`.
pub fn pv_sign_identity(xi: f64) -> Result<Complex64> {
    if xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a = xi.abs();
    let m = 400.0 * PI / a;
    // Folded integrand: (exp(-i u xi) - exp(i u xi)) / u = -2i sin(u xi) / u.
    let g = |u: f64| Complex64::new(0.0, -2.0 * (u * xi).sin() / u);
    let q = Quad::default().tol(1e-13, 1e-12);
    let body = q.pieces(800).complex(g, 1.0 / a, m)?.value;
    let vals: Vec<Complex64> = (0..6)
        .map(|j| {
            let eta = 0.25 / a / (1u64 << j) as f64;
            q.pieces(8).complex(g, eta, 1.0 / a).map(|r| r.value + body)
        })
        .collect::<Result<_>>()?;
    let (near, _) = richardson(&vals);
    // int_m^inf sin(a u)/u du ~ cos(am)/(am) - sin(am)/(am)^2 - 2 cos(am)/(am)^3.
    let am = a * m;
    let tail = (am.cos() / am - am.sin() / (am * am) - 2.0 * am.cos() / am.powi(3)) * xi.signum();
    Ok(near + Complex64::new(0.0, -2.0 * tail))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `u in [b1 + delta, b2 - delta]`
    Interior,
    /// within `delta` of an endpoint
    Edge,
    /// `u` outside `[b1 - delta, b2 + delta]`
    Exterior,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::Edge => "edge",
            Regime::Exterior => "exterior",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRow {
    pub u: f64,
    pub gap: f64,
    pub regime: Regime,
    /// `1_[b1, b2] * theta_delta (u)`, the exterior reference.
    pub indicator_conv: f64,
}

/// `|phi_C * theta_delta - phi_C|` on `u_grid`, with `phi_C = 1_[b1, b2] phi`.
pub fn convolution_gap<F: Fn(f64) -> f64>(
    phi: F,
    b1: f64,
    b2: f64,
    delta: f64,
    u_grid: &[f64],
) -> Result<Vec<GapRow>> {
    if !(b2 - b1 > 2.0 * delta) {
        return Err(Error::invalid("convolution gap needs b2 - b1 > 2 delta"));
    }
    let k = make_kernel(delta)?;
    u_grid
        .iter()
        .map(|&u| {
            let conv = k.convolve(&phi, b1, b2, u)?;
            let own = if (b1..=b2).contains(&u) { phi(u) } else { 0.0 };
            let regime = if u >= b1 + delta && u <= b2 - delta {
                Regime::Interior
            } else if u < b1 - delta || u > b2 + delta {
                Regime::Exterior
            } else {
                Regime::Edge
            };
            Ok(GapRow {
                u,
                gap: (conv - own).abs(),
                regime,
                indicator_conv: k.smoothed_indicator(b1, b2, u)?,
            })
        })
        .collect()
}

/// `f^(xi)` for `f` supported on `[a, b]` and smooth away from `breaks`.
pub fn transform_numeric<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    xi: f64,
) -> Result<Complex64> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    let q = Quad::default().tol(1e-12, 1e-10);
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) * xi.abs() / PI).ceil().max(1.0) as usize;
        total += q
            .pieces(pieces)
            .complex(|u| Complex64::from_polar(f(u), -u * xi), w[0], w[1])?
            .value;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderDecay {
    /// `sup_xi |f^(xi)| (1 + |xi|)^{1 / (4q - 2)}`.
    pub statistic: f64,
    pub rows: Vec<(f64, f64)>,
}

pub fn holder_decay_probe<F: Fn(f64) -> f64>(
    f: &F,
    support: (f64, f64),
    breaks: &[f64],
    q: f64,
    xi_grid: &[f64],
) -> Result<HolderDecay> {
    if !(q > 1.0) {
        return Err(Error::invalid("holder probe needs q > 1"));
    }
    let e = 1.0 / (4.0 * q - 2.0);
    let rows: Vec<(f64, f64)> = xi_grid
        .iter()
        .map(|&xi| {
            transform_numeric(f, support.0, support.1, breaks, xi)
                .map(|v| (xi, v.norm() * (1.0 + xi.abs()).powf(e)))
        })
        .collect::<Result<_>>()?;
    let statistic = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(HolderDecay { statistic, rows })
}

/// `|int_{b1}^{b2} exp(i w e^{-u}) du|` and the bound `(2 e^{b1} + 2 e^{b2}) / |w|`.
pub fn inequality_exp(b1: f64, b2: f64, w: f64) -> Result<(f64, f64)> {
    if !(b2 > b1) || w == 0.0 {
        return Err(Error::invalid("inequality check needs b1 < b2 and w != 0"));
    }
    // v = e^{-u}: the integral becomes int_{e^{-b2}}^{e^{-b1}} e^{i w v} / v dv.
    let (lo, hi) = ((-b2).exp(), (-b1).exp());
    let pieces = ((hi - lo) * w.abs() / PI).ceil().clamp(1.0, 1e5) as usize;
    let v = Quad::default()
        .tol(1e-11 * lo.recip().max(1.0), 1e-11)
        .pieces(pieces)
        .complex(|v| Complex64::from_polar(1.0 / v, w * v), lo, hi)?
        .value;
    Ok((v.norm(), (2.0 * b1.exp() + 2.0 * b2.exp()) / w.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_basics() {
        for d in [0.9, 0.5, 0.2] {
            let k = make_kernel(d).unwrap();
            assert!((k.integral().unwrap() - 1.0).abs() < 1e-8);
            assert_eq!(k.transform(1.0001 / (d * d)), 0.0);
            assert!((k.transform(0.0) - 1.0).abs() < 1e-15);
            assert_eq!(k.eval(0.37), k.eval(-0.37));
        }
        assert!((base_kernel(0.0) - C0).abs() < 1e-16);
        assert!((base_kernel(1e-5) - base_kernel(2e-4)).abs() < 1e-9);
        assert!(make_kernel(1.0).is_err() && make_kernel(0.0).is_err());
    }

    #[test]
    fn tail_mass_is_order_delta() {
        let ratios: Vec<f64> = [0.5, 0.1, 0.02]
            .iter()
            .map(|&d| make_kernel(d).unwrap().tail_mass().unwrap() / d)
            .collect();
        assert!(ratios[0] < 1.2, "{ratios:?}");
        assert!(ratios[1] < ratios[0] && ratios[2] < ratios[1], "{ratios:?}");
    }

    #[test]
    fn gaussian_pv_edge_cases() {
        let r = pv_hilbert(&gaussian_pair(), 0.0).unwrap();
        assert!(r.lhs.norm() < 1e-9 && r.rhs.norm() < 1e-12);
        let r = pv_hilbert(&gaussian_pair(), 12.0).unwrap();
        assert!((r.rhs - Complex64::new(0.0, -PI)).norm() < 1e-12);
        assert!((r.lhs - r.rhs).norm() < 1e-6);
    }

    #[test]
    fn sign_identity() {
        for xi in [1.0, -1.0, 2.5] {
            let v = pv_sign_identity(xi).unwrap();
            assert!((v - Complex64::new(0.0, -PI * f64::signum(xi))).norm() < 1e-6, "{xi}: {v}");
        }
    }

    #[test]
    fn gap_regimes() {
        let rows = convolution_gap(|_| 1.0, 0.0, 1.0, 0.1, &[0.5, 0.0, 3.0]).unwrap();
        assert_eq!(rows[0].regime, Regime::Interior);
        assert!(rows[0].gap <= 0.1);
        assert_eq!(rows[1].regime, Regime::Edge);
        assert!((rows[1].gap - 0.5).abs() < 1e-3);
        assert_eq!(rows[2].regime, Regime::Exterior);
        assert!((rows[2].gap - rows[2].indicator_conv).abs() < 1e-12);
        assert!(convolution_gap(|_| 1.0, 0.0, 0.1, 0.1, &[0.0]).is_err());
    }

    #[test]
    fn exp_inequality_on_fixed_triples() {
        for (b1, b2, w) in [(-1.0, 2.0, 3.0), (0.0, 0.5, -40.0), (-3.0, 3.0, 1.0)] {
            let (v, bound) = inequality_exp(b1, b2, w).unwrap();
            assert!(v <= bound);
        }
    }
}
