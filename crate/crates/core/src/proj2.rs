//! 2x2 unimodular matrices acting on the projective line.
//!
//! Points are unit vectors with a fixed phase: the first nonzero coordinate
//! is made real and positive. The metric is `d(x, y) = |det(v, w)|` on unit
//! representatives, so the line has diameter one.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|det - 1|` accepted at construction.
pub const DET_TOL: f64 = 1e-9;
/// Below `1 + DEGENERATE_TOL` the Cartan density points collapse to `e1`.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Projective equality threshold.
pub const EQ_TOL: f64 = 1e-10;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;
    /// Unit scalar `u` with `u * self` real and positive (1 for zero).
    fn unphase(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn unphase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn unphase(self) -> Self {
        let a = Scalar::abs(self);
        if a == 0.0 {
            Self::one()
        } else {
            Complex64::conj(&self) / a
        }
    }
}

fn vec_norm<T: Scalar>(v: [T; 2]) -> f64 {
    v[0].abs().hypot(v[1].abs())
}

/// `det(v, w) = v0 w1 - v1 w0`.
fn det2<T: Scalar>(v: [T; 2], w: [T; 2]) -> T {
    v[0] * w[1] - v[1] * w[0]
}

/// Hermitian inner product, conjugate-linear in the first slot.
fn inner<T: Scalar>(v: [T; 2], w: [T; 2]) -> T {
    v[0].conj() * w[0] + v[1].conj() * w[1]
}

/// A 2x2 matrix, row-major. Constructors check `|det - 1| <= DET_TOL`;
/// products and inverses are exact operations on unimodular matrices and
/// are not re-validated (rounding would spoil long products).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T: Scalar = f64> {
    m: [[T; 2]; 2],
}

pub type CMat2 = Mat2<Complex64>;

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let g = Mat2 { m: [[a, b], [c, d]] };
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let det = g.det();
        let err = (det - T::one()).abs();
        if !(err <= DET_TOL) {
            return Err(Error::invalid(format!(
                "matrix is not unimodular: det = {det:?}"
            )));
        }
        Ok(g)
    }

    /// Builds a matrix without the determinant check.
    pub fn from_rows_unchecked(rows: [[T; 2]; 2]) -> Self {
        Mat2 { m: rows }
    }

    pub fn identity() -> Self {
        Mat2 {
            m: [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }

    pub fn rows(&self) -> [[T; 2]; 2] {
        self.m
    }

    /// Row-major `[a, b, c, d]`.
    pub fn entries(&self) -> [T; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Inverse of a unimodular matrix (the adjugate).
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Mat2 {
            m: [[d, -b], [-c, a]],
        }
    }

    pub fn adjoint(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Mat2 {
            m: [[a.conj(), c.conj()], [b.conj(), d.conj()]],
        }
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let [[a, b], [c, d]] = self.m;
        Mat2 {
            m: [[a.scale(s), b.scale(s)], [c.scale(s), d.scale(s)]],
        }
    }

    /// Operator norm, from the top eigenvalue of `g* g`.
    pub fn norm(&self) -> f64 {
        let (p, r, q) = self.gram();
        ((p + r) / 2.0 + ((p - r) / 2.0).hypot(q.abs())).sqrt()
    }

    /// `(p, r, q)` with `g* g = [[p, q], [conj q, r]]`.
    fn gram(&self) -> (f64, f64, T) {
        let [[a, b], [c, d]] = self.m;
        let p = a.norm_sqr() + c.norm_sqr();
        let r = b.norm_sqr() + d.norm_sqr();
        let q = a.conj() * b + c.conj() * d;
        (p, r, q)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.entries();
        let b = other.entries();
        (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

impl Mat2<f64> {
    pub fn diag(l: f64) -> Self {
        Mat2 {
            m: [[l, 0.0], [0.0, 1.0 / l]],
        }
    }

    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Mat2 { m: [[c, -s], [s, c]] }
    }

    pub fn to_complex(&self) -> CMat2 {
        let [[a, b], [c, d]] = self.m;
        let z = |x: f64| Complex64::new(x, 0.0);
        Mat2 {
            m: [[z(a), z(b)], [z(c), z(d)]],
        }
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, o: Mat2<T>) -> Mat2<T> {
        let a = self.m;
        let b = o.m;
        Mat2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }
}

/// A point of the projective line as a normalized homogeneous vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPoint<T: Scalar = f64> {
    v: [T; 2],
}

pub type CProjPoint = ProjPoint<Complex64>;

impl<T: Scalar> ProjPoint<T> {
    pub fn new(v0: T, v1: T) -> Result<Self> {
        Self::from_vector([v0, v1])
            .ok_or_else(|| Error::invalid("projective point needs a finite nonzero vector"))
    }

    /// Normalizes `v`; `None` for the zero or a non-finite vector.
    pub fn from_vector(v: [T; 2]) -> Option<Self> {
        let n = vec_norm(v);
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        let inv = 1.0 / n;
        let w = [v[0].scale(inv), v[1].scale(inv)];
        let u = if w[0] != T::zero() {
            w[0].unphase()
        } else {
            w[1].unphase()
        };
        Some(ProjPoint {
            v: [u * w[0], u * w[1]],
        })
    }

    pub fn e1() -> Self {
        ProjPoint {
            v: [T::one(), T::zero()],
        }
    }

    pub fn e2() -> Self {
        ProjPoint {
            v: [T::zero(), T::one()],
        }
    }

    pub fn vector(&self) -> [T; 2] {
        self.v
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        dist(self, other) <= EQ_TOL
    }
}

impl ProjPoint<f64> {
    /// The point `[cos phi : sin phi]`.
    pub fn from_angle(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::from_vector([c, s]).expect("unit vector")
    }

    /// Double-angle chart coordinate in `[0, 2 pi)`.
    pub fn theta(&self) -> f64 {
        let [a, b] = self.v;
        let mut phi = b.atan2(a);
        if phi < 0.0 {
            phi += std::f64::consts::PI;
        }
        if phi >= std::f64::consts::PI {
            phi -= std::f64::consts::PI;
        }
        let th = 2.0 * phi;
        if th >= std::f64::consts::TAU {
            0.0
        } else {
            th
        }
    }

    /// Inverse of [`ProjPoint::theta`].
    pub fn from_theta(theta: f64) -> Self {
        Self::from_angle(theta / 2.0)
    }

    pub fn to_complex(&self) -> CProjPoint {
        ProjPoint {
            v: [Complex64::new(self.v[0], 0.0), Complex64::new(self.v[1], 0.0)],
        }
    }
}

impl CProjPoint {
    /// The real point with the same class, if there is one.
    pub fn to_real(&self) -> Option<ProjPoint<f64>> {
        let [a, b] = self.v;
        if a.im.abs() > 1e-12 || b.im.abs() > 1e-12 {
            return None;
        }
        ProjPoint::from_vector([a.re, b.re])
    }
}

pub fn act<T: Scalar>(g: &Mat2<T>, x: &ProjPoint<T>) -> ProjPoint<T> {
    ProjPoint::from_vector(g.apply(x.v)).expect("invertible matrix maps nonzero vectors to nonzero vectors")
}

pub fn dist<T: Scalar>(x: &ProjPoint<T>, y: &ProjPoint<T>) -> f64 {
    let d = det2(x.v, y.v).abs() / (vec_norm(x.v) * vec_norm(y.v));
    d.min(1.0)
}

/// `log(|g v| / |v|)`.
pub fn cocycle<T: Scalar>(g: &Mat2<T>, x: &ProjPoint<T>) -> f64 {
    (vec_norm(g.apply(x.v)) / vec_norm(x.v)).ln()
}

/// `g = k diag(a_lambda, 1/a_lambda) ell` with `k`, `ell` in SO(2) for real
/// input and SU(2) for complex input.
#[derive(Clone, Copy, Debug)]
pub struct CartanTriple<T: Scalar = f64> {
    pub k: Mat2<T>,
    pub a_lambda: f64,
    pub ell: Mat2<T>,
    /// Attracting point `k e1`.
    pub z_max: ProjPoint<T>,
    /// Repelling point `ell^{-1} e2`.
    pub z_min: ProjPoint<T>,
}

impl<T: Scalar> CartanTriple<T> {
    pub fn reconstruct(&self) -> Mat2<T> {
        let l = self.a_lambda;
        let a = Mat2::from_rows_unchecked([
            [T::from_real(l), T::zero()],
            [T::zero(), T::from_real(1.0 / l)],
        ]);
        self.k * a * self.ell
    }
}

/// Singular frame of an arbitrary invertible 2x2 matrix.
#[derive(Clone, Copy, Debug)]
pub struct Frame<T: Scalar> {
    pub s_max: f64,
    /// Right singular vectors: `v1` is expanded most.
    pub v1: [T; 2],
    pub v2: [T; 2],
    /// Left singular vectors: `u1 = m v1 / s_max`, `u2` its complement.
    pub u1: [T; 2],
    pub u2: [T; 2],
}

fn complement<T: Scalar>(v: [T; 2]) -> [T; 2] {
    [-(v[1].conj()), v[0].conj()]
}

pub fn frame<T: Scalar>(m: &Mat2<T>) -> Frame<T> {
    let (p, r, q) = m.gram();
    let s2 = (p + r) / 2.0 + ((p - r) / 2.0).hypot(q.abs());
    let cand_a = [q, T::from_real(s2 - p)];
    let cand_b = [T::from_real(s2 - r), q.conj()];
    let (na, nb) = (vec_norm(cand_a), vec_norm(cand_b));
    let v1 = if na == 0.0 && nb == 0.0 {
        [T::one(), T::zero()]
    } else if na >= nb {
        [cand_a[0].scale(1.0 / na), cand_a[1].scale(1.0 / na)]
    } else {
        [cand_b[0].scale(1.0 / nb), cand_b[1].scale(1.0 / nb)]
    };
    let v2 = complement(v1);
    let img = m.apply(v1);
    let n = vec_norm(img);
    let u1 = [img[0].scale(1.0 / n), img[1].scale(1.0 / n)];
    let u2 = complement(u1);
    Frame {
        s_max: s2.sqrt(),
        v1,
        v2,
        u1,
        u2,
    }
}

pub fn cartan<T: Scalar>(g: &Mat2<T>) -> CartanTriple<T> {
    let f = frame(g);
    let ell = Mat2::from_rows_unchecked([
        [f.v1[0].conj(), f.v1[1].conj()],
        [f.v2[0].conj(), f.v2[1].conj()],
    ]);
    let k = Mat2::from_rows_unchecked([[f.u1[0], f.u2[0]], [f.u1[1], f.u2[1]]]);
    let a_lambda = f.s_max;
    let (z_max, z_min) = if a_lambda <= 1.0 + DEGENERATE_TOL {
        (ProjPoint::e1(), ProjPoint::e1())
    } else {
        (
            ProjPoint::from_vector(f.u1).expect("unit"),
            ProjPoint::from_vector(f.v2).expect("unit"),
        )
    };
    CartanTriple {
        k,
        a_lambda,
        ell,
        z_max,
        z_min,
    }
}

/// `d(g x, z^M)` for a matrix with singular frame `f` and singular value
/// ratio `r = s_min / s_max`, without forming `g x`.
pub fn dist_image_to_attractor<T: Scalar>(f: &Frame<T>, r: f64, x: &ProjPoint<T>) -> f64 {
    let c = inner(f.v1, x.v).abs();
    let s = inner(f.v2, x.v).abs() * r;
    if s == 0.0 {
        0.0
    } else {
        s / c.hypot(s)
    }
}

/// `d(g^{-1} x, z^m)` with the same conventions.
pub fn dist_preimage_to_repeller<T: Scalar>(f: &Frame<T>, r: f64, x: &ProjPoint<T>) -> f64 {
    let c = inner(f.u1, x.v).abs() * r;
    let s = inner(f.u2, x.v).abs();
    if c == 0.0 {
        0.0
    } else {
        c / c.hypot(s)
    }
}

/// A long real product `e^{log_scale} m` kept with `|m| = 1`.
///
/// The log scale is accumulated with Neumaier compensation so that
/// `log |S_n|` of a deterministic walk is exact to a few ulps.
#[derive(Clone, Copy, Debug)]
pub struct ScaledMat2 {
    m: Mat2<f64>,
    log_sum: f64,
    log_comp: f64,
}

impl ScaledMat2 {
    pub fn identity() -> Self {
        ScaledMat2 {
            m: Mat2::identity(),
            log_sum: 0.0,
            log_comp: 0.0,
        }
    }

    pub fn from_mat(g: &Mat2<f64>) -> Self {
        let mut s = ScaledMat2 {
            m: *g,
            log_sum: 0.0,
            log_comp: 0.0,
        };
        s.renormalize();
        s
    }

    fn add_log(&mut self, x: f64) {
        let t = self.log_sum + x;
        if self.log_sum.abs() >= x.abs() {
            self.log_comp += (self.log_sum - t) + x;
        } else {
            self.log_comp += (x - t) + self.log_sum;
        }
        self.log_sum = t;
    }

    fn renormalize(&mut self) {
        let n = self.m.norm();
        if n != 1.0 {
            self.m = self.m.scaled(1.0 / n);
            self.add_log(n.ln());
        }
    }

    /// `self <- g self`.
    pub fn left_mul(&mut self, g: &Mat2<f64>) {
        self.m = *g * self.m;
        self.renormalize();
    }

    /// `self <- self g`.
    pub fn right_mul(&mut self, g: &Mat2<f64>) {
        self.m = self.m * *g;
        self.renormalize();
    }

    pub fn log_norm(&self) -> f64 {
        (self.log_sum + self.log_comp) + self.m.norm().ln()
    }

    /// The normalized factor `m` with `|m| = 1`.
    pub fn unit(&self) -> &Mat2<f64> {
        &self.m
    }

    /// The product itself; overflows to infinity for very long words.
    pub fn to_mat(&self) -> Mat2<f64> {
        self.m.scaled((self.log_sum + self.log_comp).exp())
    }

    pub fn act(&self, x: &ProjPoint) -> ProjPoint {
        act(&self.m, x)
    }

    /// `g^{-1} x`, through the adjugate of the unit factor.
    pub fn inverse_act(&self, x: &ProjPoint) -> ProjPoint {
        act(&self.m.inverse(), x)
    }

    /// `sigma_g(x) = log |g v|` for unit `v`.
    pub fn cocycle(&self, x: &ProjPoint) -> f64 {
        (self.log_sum + self.log_comp) + cocycle(&self.m, x)
    }

    pub fn frame(&self) -> Frame<f64> {
        frame(&self.m)
    }

    /// Ratio of singular values `1 / |g|^2` of the unimodular product.
    pub fn ratio(&self) -> f64 {
        (-2.0 * self.log_norm()).exp()
    }

    pub fn attractor(&self) -> ProjPoint {
        ProjPoint::from_vector(self.frame().u1).expect("unit")
    }

    pub fn repeller(&self) -> ProjPoint {
        ProjPoint::from_vector(self.frame().v2).expect("unit")
    }

    pub fn dist_image_to_attractor(&self, x: &ProjPoint) -> f64 {
        dist_image_to_attractor(&self.frame(), self.ratio(), x)
    }

    pub fn dist_preimage_to_repeller(&self, x: &ProjPoint) -> f64 {
        dist_preimage_to_repeller(&self.frame(), self.ratio(), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn p(a: f64, b: f64) -> ProjPoint {
        ProjPoint::new(a, b).unwrap()
    }

    #[test]
    fn act_examples() {
        let x = p(0.3, -0.8);
        assert!(act(&Mat2::identity(), &x).approx_eq(&x));
        assert!(act(&Mat2::diag(2.0), &p(1.0, 1.0)).approx_eq(&p(4.0, 1.0)));
        let u = Mat2::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(act(&u, &p(0.0, 1.0)).approx_eq(&p(1.0, 1.0)));
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(&ProjPoint::<f64>::e1(), &ProjPoint::e2()), 1.0);
        let x = p(0.6, 0.8);
        assert_eq!(dist(&x, &x), 0.0);
        let d = dist(&p(1.0, 0.0), &p(1.0, 1.0));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cocycle_examples() {
        let x = p(0.2, 0.9);
        assert_eq!(cocycle(&Mat2::identity(), &x), 0.0);
        assert!((cocycle(&Mat2::diag(2.0), &ProjPoint::e1()) - LN_2).abs() < 1e-15);
        let u = Mat2::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((cocycle(&u, &ProjPoint::e2()) - 0.5 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn sign_convention() {
        let x = p(-1.0, 2.0);
        assert!(x.vector()[0] > 0.0);
        let y = p(0.0, -3.0);
        assert_eq!(y.vector(), [0.0, 1.0]);
        let z = ProjPoint::<Complex64>::new(Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0))
            .unwrap();
        assert!(z.vector()[0].im.abs() < 1e-15 && z.vector()[0].re > 0.0);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(Mat2::new(1.0, 0.0, 0.0, 2.0).is_err());
        assert!(Mat2::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cartan_diagonal() {
        let c = cartan(&Mat2::diag(2.0));
        assert!((c.a_lambda - 2.0).abs() < 1e-15);
        assert!(c.k.max_abs_diff(&Mat2::identity()) < 1e-15);
        assert!(c.ell.max_abs_diff(&Mat2::identity()) < 1e-15);
        assert!(c.z_max.approx_eq(&ProjPoint::e1()));
        assert!(c.z_min.approx_eq(&ProjPoint::e2()));
    }

    #[test]
    fn cartan_rotation_is_degenerate() {
        let c = cartan(&Mat2::rotation(0.7));
        assert!((c.a_lambda - 1.0).abs() < 1e-12);
        assert_eq!(c.z_max, ProjPoint::e1());
        assert_eq!(c.z_min, ProjPoint::e1());
        assert!(c.reconstruct().max_abs_diff(&Mat2::rotation(0.7)) < 1e-12);
    }

    #[test]
    fn cartan_complex_reconstructs() {
        let g = Mat2::new(
            Complex64::new(1.0, 1.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(0.0, 0.0),
        );
        // det = 0 - 0.5 * (-2i) = i, so rescale by a square root of -i.
        assert!(g.is_err());
        let w = Complex64::from_polar(1.0, -PI / 4.0);
        let g = Mat2::new(
            Complex64::new(1.0, 1.0) * w,
            Complex64::new(0.5, 0.0) * w,
            Complex64::new(0.0, -2.0) * w,
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        let c = cartan(&g);
        assert!(c.reconstruct().max_abs_diff(&g) < 1e-12 * c.a_lambda);
        assert!((c.k.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((c.ell.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((c.a_lambda - g.inverse().norm()).abs() < 1e-12);
    }

    #[test]
    fn theta_chart() {
        assert_eq!(ProjPoint::<f64>::e1().theta(), 0.0);
        assert!((ProjPoint::<f64>::e2().theta() - PI).abs() < 1e-15);
        for i in 0..100 {
            let th = i as f64 * 0.0628;
            assert!((ProjPoint::from_theta(th).theta() - th).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_product_tracks_log_norm() {
        let a = Mat2::new(2.0, 0.5, -4.0, -0.5).unwrap();
        let b = Mat2::diag(2.0);
        let mut s = ScaledMat2::identity();
        let mut direct = Mat2::identity();
        for i in 0..20 {
            let g = if i % 3 == 0 { a } else { b };
            s.left_mul(&g);
            direct = g * direct;
        }
        assert!((s.log_norm() - direct.norm().ln()).abs() < 1e-12);
        let x = p(0.3, 0.4);
        assert!(s.act(&x).approx_eq(&act(&direct, &x)));
        assert!(s.inverse_act(&x).approx_eq(&act(&direct.inverse(), &x)));
        assert!((s.cocycle(&x) - cocycle(&direct, &x)).abs() < 1e-10);
    }

    #[test]
    fn fine_distances_agree_with_direct_ones() {
        let g = Mat2::new(2.0, 0.5, -4.0, -0.5).unwrap() * Mat2::diag(2.0);
        let c = cartan(&g);
        let f = frame(&g);
        let r = 1.0 / (c.a_lambda * c.a_lambda);
        let x = p(0.3, 0.9);
        let direct = dist(&act(&g, &x), &c.z_max);
        assert!((dist_image_to_attractor(&f, r, &x) - direct).abs() < 1e-12);
        let direct = dist(&act(&g.inverse(), &x), &c.z_min);
        assert!((dist_preimage_to_repeller(&f, r, &x) - direct).abs() < 1e-12);
    }
}
