//! Renewal sums along trajectories and their limits as `t -> infinity`.
//!
//! All sums follow the `mu^N = sum_n mu^{*n}` reading: each trajectory
//! contributes at every step `n` (including `n = 0`, the identity word)
//! until a truncation horizon, and the estimate is the mean over
//! trajectories.

use crate::error::{Error, Result};
use crate::mc;
use crate::model::GeneratorMeasure;
use crate::proj2::{act, cocycle, ProjPoint, ScaledMat2};
use crate::quad::Quad;
use crate::walk::TrajectorySampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RenewalKind {
    R,
    L,
    E,
    E1Plus,
    E1Minus,
    E2Plus,
    E2Minus,
}

impl RenewalKind {
    pub fn name(&self) -> &'static str {
        match self {
            RenewalKind::R => "R",
            RenewalKind::L => "L",
            RenewalKind::E => "E",
            RenewalKind::E1Plus => "E1+",
            RenewalKind::E1Minus => "E1-",
            RenewalKind::E2Plus => "E2+",
            RenewalKind::E2Minus => "E2-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "R" => RenewalKind::R,
            "L" => RenewalKind::L,
            "E" => RenewalKind::E,
            "E1+" => RenewalKind::E1Plus,
            "E1-" => RenewalKind::E1Minus,
            "E2+" => RenewalKind::E2Plus,
            "E2-" => RenewalKind::E2Minus,
            other => return Err(Error::invalid(format!("unknown renewal kind {other:?}"))),
        })
    }
}

pub type PointFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
pub type JumpFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
pub type PairFn = dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync;

/// Target functions, with points passed through the chart `theta`.
pub enum Target {
    /// `f(theta, u)`, for R and L.
    Point(Box<PointFn>),
    /// `f(theta, v, u)`, for E and E1+-.
    Jump(Box<JumpFn>),
    /// `f(theta_check, theta, v, u)`, for E2+-.
    Pair(Box<PairFn>),
}

pub struct RenewalQuery {
    pub kind: RenewalKind,
    pub target: Target,
    pub x: ProjPoint,
    /// Second start point, used by E2+-.
    pub x_check: ProjPoint,
    pub t: f64,
    /// `f` vanishes for `u` outside this window (R, L and E).
    pub u_support: (f64, f64),
    /// Points in `u` where `f` may jump; quadrature splits there.
    pub u_breaks: Vec<f64>,
}

impl RenewalQuery {
    pub fn new(kind: RenewalKind, target: Target, x: ProjPoint, t: f64) -> Self {
        RenewalQuery {
            kind,
            target,
            x,
            x_check: ProjPoint::e2(),
            t,
            u_support: (f64::NEG_INFINITY, f64::INFINITY),
            u_breaks: Vec::new(),
        }
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.u_support = (lo, hi);
        self
    }

    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.u_breaks = breaks.to_vec();
        self
    }

    pub fn with_x_check(mut self, x_check: ProjPoint) -> Self {
        self.x_check = x_check;
        self
    }

    fn check(&self) -> Result<()> {
        let ok = matches!(
            (self.kind, &self.target),
            (RenewalKind::R | RenewalKind::L, Target::Point(_))
                | (RenewalKind::E | RenewalKind::E1Plus | RenewalKind::E1Minus, Target::Jump(_))
                | (RenewalKind::E2Plus | RenewalKind::E2Minus, Target::Pair(_))
        );
        if !ok {
            return Err(Error::invalid(format!(
                "target arity does not match kind {}",
                self.kind.name()
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::invalid("t must be finite"));
        }
        if matches!(self.kind, RenewalKind::R | RenewalKind::E) && !self.u_support.1.is_finite() {
            return Err(Error::invalid(
                "R and E need a finite upper bound on the u-support of f",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenewalEstimate {
    pub value: f64,
    pub se: f64,
    pub n_max_used: usize,
    /// Mean absolute mass collected in an extension window past `n_max`.
    pub tail_bound_proxy: f64,
    pub replicas: usize,
}

/// `ceil(2 t / gamma) + ceil((u_max + 10) / gamma)`, with negative parts clamped.
pub fn horizon(t: f64, u_max: f64, gamma_hat: f64) -> usize {
    let a = (2.0 * t.max(0.0) / gamma_hat).ceil();
    let b = ((u_max.max(0.0) + 10.0) / gamma_hat).ceil();
    (a + b) as usize
}

fn extension(n_max: usize) -> usize {
    n_max / 4 + 10
}

fn check_gamma(gamma_hat: f64) -> Result<()> {
    if !(gamma_hat > 0.0 && gamma_hat.is_finite()) {
        return Err(Error::invalid(format!("renewal needs gamma_hat > 0, got {gamma_hat}")));
    }
    Ok(())
}

/// One trajectory: (sum up to `n_max`, sum of |terms| in the extension window).
fn trajectory(
    q: &RenewalQuery,
    sampler: &TrajectorySampler,
    replica: u64,
    n_lo: usize,
    n_max: usize,
    n_ext: usize,
) -> (f64, f64) {
    let mut w = sampler.walker(replica);
    let t = q.t;
    let (mut main, mut tail) = (0.0, 0.0);
    let mut add = |n: usize, c: f64| {
        if n < n_lo {
        } else if n <= n_max {
            main += c;
        } else {
            tail += c.abs();
        }
    };
    let n_total = n_max + n_ext;
    match (&q.kind, &q.target) {
        (RenewalKind::R, Target::Point(f)) => {
            let mut x = q.x;
            let mut sigma = 0.0;
            for n in 0..=n_total {
                let u = sigma - t;
                if u >= q.u_support.0 && u <= q.u_support.1 {
                    add(n, f(x.theta(), u));
                }
                let g = w.next_atom();
                sigma += cocycle(g, &x);
                x = act(g, &x);
            }
        }
        (RenewalKind::L, Target::Point(f)) => {
            let mut s = ScaledMat2::identity();
            for n in 0..=n_max {
                if n >= n_lo {
                    let u = s.log_norm() - t;
                    if u >= q.u_support.0 && u <= q.u_support.1 {
                        add(n, f(s.act(&q.x).theta(), u));
                    }
                }
                s.left_mul(w.next_atom());
            }
        }
        (kind @ (RenewalKind::E | RenewalKind::E1Plus | RenewalKind::E1Minus), Target::Jump(f)) => {
            let mut x = q.x;
            let mut sigma = 0.0;
            for n in 0..=n_total {
                let h = w.next_atom();
                let v = cocycle(h, &x);
                let next = act(h, &x);
                let post = sigma + v;
                let u = sigma - t;
                let hit = match kind {
                    RenewalKind::E => u >= q.u_support.0 && u <= q.u_support.1,
                    RenewalKind::E1Plus => sigma < t && t <= post,
                    _ => post < t && t <= sigma,
                };
                if hit {
                    add(n, f(next.theta(), v, u));
                }
                sigma = post;
                x = next;
            }
        }
        (kind @ (RenewalKind::E2Plus | RenewalKind::E2Minus), Target::Pair(f)) => {
            let mut s = ScaledMat2::identity();
            let mut pre = 0.0;
            for n in 0..=n_total {
                s.left_mul(w.next_atom());
                let post = s.log_norm();
                let hit = if *kind == RenewalKind::E2Plus {
                    pre < t && t <= post
                } else {
                    post < t && t <= pre
                };
                if hit {
                    let xc = s.inverse_act(&q.x_check);
                    add(n, f(xc.theta(), s.act(&q.x).theta(), post - pre, pre - t));
                }
                pre = post;
            }
        }
        _ => unreachable!("checked arity"),
    }
    (main, tail)
}

/// Monte Carlo estimate of the renewal sum for `query` over `replicas` trajectories.
pub fn estimate(
    query: &RenewalQuery,
    sampler: &TrajectorySampler,
    gamma_hat: f64,
    replicas: usize,
) -> Result<RenewalEstimate> {
    query.check()?;
    check_gamma(gamma_hat)?;
    if replicas < 2 {
        return Err(Error::invalid("renewal estimate needs at least two trajectories"));
    }
    let (n_lo, n_max, n_ext) = if query.kind == RenewalKind::L {
        let (lo, hi) = l_range(query.t, gamma_hat)?;
        (lo, hi, 0)
    } else {
        let u_max = match query.kind {
            RenewalKind::R | RenewalKind::E => query.u_support.1,
            _ => 0.0,
        };
        let n_max = horizon(query.t, u_max, gamma_hat);
        (0, n_max, extension(n_max))
    };
    let runs = mc::par_replicas(replicas, |r| {
        trajectory(query, sampler, r as u64, n_lo, n_max, n_ext)
    });
    let mains: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let m = mc::mean_se(&mains);
    let tail = mc::pairwise_sum_by(replicas, &|i| runs[i].1) / replicas as f64;
    if tail > 10.0 * m.se && tail > 1e-12 * m.mean.abs().max(1.0) {
        return Err(Error::TruncationDominated { tail, se: m.se });
    }
    Ok(RenewalEstimate {
        value: m.mean,
        se: m.se,
        n_max_used: n_max,
        tail_bound_proxy: tail,
        replicas,
    })
}

fn l_range(t: f64, gamma_hat: f64) -> Result<(usize, usize)> {
    if !(t >= 3.0 * gamma_hat) {
        return Err(Error::invalid(format!(
            "L needs t >= 3 gamma_hat = {:.4}, got {t}",
            3.0 * gamma_hat
        )));
    }
    Ok((
        (2.0 * t / (3.0 * gamma_hat)).ceil() as usize,
        (2.0 * t / gamma_hat).floor() as usize,
    ))
}

/// `L(1_{u in [-b, b]})(x, t)`: visits of `log |S_n| - t` to `[-b, b]` for
/// `n` in `[ceil(2t / 3 gamma), floor(2t / gamma)]`.
pub fn l_estimate(
    b: f64,
    x: &ProjPoint,
    t: f64,
    sampler: &TrajectorySampler,
    gamma_hat: f64,
    replicas: usize,
) -> Result<RenewalEstimate> {
    if !(b >= 0.0) {
        return Err(Error::invalid("L needs b >= 0"));
    }
    let q = RenewalQuery::new(RenewalKind::L, Target::Point(Box::new(|_, _| 1.0)), *x, t)
        .with_support(-b, b);
    estimate(&q, sampler, gamma_hat, replicas)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    /// Standard error from the stationary sample(s).
    pub se: f64,
}

fn integrate_u<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    let q = Quad::default().tol(1e-11, 1e-9).pieces(2);
    let mut s = 0.0;
    for w in cuts.windows(2) {
        s += q.real(&f, w[0], w[1])?.value;
    }
    Ok(s)
}

/// The `t -> infinity` limit of `query`, from stationary samples `nu`
/// (and `nu_check` of the reversed measure for E2+-), the atoms of `mu`
/// and quadrature in `u`.
pub fn limit(
    query: &RenewalQuery,
    nu: &[ProjPoint],
    nu_check: Option<&[ProjPoint]>,
    mu: &GeneratorMeasure,
    gamma_hat: f64,
) -> Result<LimitEstimate> {
    query.check()?;
    check_gamma(gamma_hat)?;
    if nu.len() < 2 {
        return Err(Error::invalid("limit needs a stationary sample of size >= 2"));
    }
    let t = query.t;
    let lo = (-t).max(query.u_support.0);
    let hi = query.u_support.1;
    let breaks = &query.u_breaks;
    let vals: Vec<Result<f64>> = match (&query.kind, &query.target) {
        (RenewalKind::R, Target::Point(f)) => mc::par_replicas(nu.len(), |j| {
            let th = nu[j].theta();
            integrate_u(|u| f(th, u), lo, hi, breaks)
        }),
        (kind @ (RenewalKind::E | RenewalKind::E1Plus | RenewalKind::E1Minus), Target::Jump(f)) => {
            mc::par_replicas(nu.len(), |j| {
                let mut s = 0.0;
                for atom in mu.atoms() {
                    let v = cocycle(&atom.matrix, &nu[j]);
                    let th = act(&atom.matrix, &nu[j]).theta();
                    let (a, b) = match kind {
                        RenewalKind::E => (lo, hi),
                        RenewalKind::E1Plus => (-v.max(0.0), 0.0),
                        _ => (0.0, (-v).max(0.0)),
                    };
                    s += atom.weight * integrate_u(|u| f(th, v, u), a, b, breaks)?;
                }
                Ok(s)
            })
        }
        (kind @ (RenewalKind::E2Plus | RenewalKind::E2Minus), Target::Pair(f)) => {
            let check = nu_check.ok_or_else(|| Error::invalid("E2 limits need a reversed stationary sample"))?;
            if check.len() != nu.len() {
                return Err(Error::invalid("stationary samples must have equal sizes"));
            }
            mc::par_replicas(nu.len(), |j| {
                let thc = check[j].theta();
                let mut s = 0.0;
                for atom in mu.atoms() {
                    let v = cocycle(&atom.matrix, &nu[j]);
                    let th = act(&atom.matrix, &nu[j]).theta();
                    let (a, b) = if *kind == RenewalKind::E2Plus {
                        (-v.max(0.0), 0.0)
                    } else {
                        (0.0, (-v).max(0.0))
                    };
                    s += atom.weight * integrate_u(|u| f(thc, th, v, u), a, b, breaks)?;
                }
                Ok(s)
            })
        }
        (RenewalKind::L, _) => {
            return Err(Error::invalid("L has no limit functional"));
        }
        _ => unreachable!("checked arity"),
    };
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let m = mc::mean_se(&vals);
    Ok(LimitEstimate {
        value: m.mean / gamma_hat,
        se: m.se / gamma_hat,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn symbol(&self) -> &'static str {
        match self {
            Direction::Up => "+",
            Direction::Down => "-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monitored {
    Cocycle,
    LogNorm,
}

#[derive(Clone, Copy, Debug)]
pub struct CrossingSample {
    /// Word length; the crossing happens between steps `n - 1` and `n`.
    pub n: usize,
    pub word: ScaledMat2,
    /// Post-crossing value minus `t`.
    pub overshoot: f64,
    /// Post-crossing value minus pre-crossing value.
    pub jump: f64,
    pub direction: Direction,
}

/// Visits every crossing of level `t` by the monitored functional along one
/// trajectory, up to `n_max + n_ext` steps. The flag tells whether the
/// crossing lies inside the horizon `n_max`.
pub fn visit_crossings<F: FnMut(&CrossingSample, bool)>(
    sampler: &TrajectorySampler,
    replica: u64,
    t: f64,
    monitored: Monitored,
    x: &ProjPoint,
    n_max: usize,
    n_ext: usize,
    mut visit: F,
) {
    let mut w = sampler.walker(replica);
    let mut s = ScaledMat2::identity();
    let mut y = *x;
    let mut pre = 0.0;
    for n in 1..=n_max + n_ext {
        let g = w.next_atom();
        let post = match monitored {
            Monitored::Cocycle => {
                let p = pre + cocycle(g, &y);
                y = act(g, &y);
                s.left_mul(g);
                p
            }
            Monitored::LogNorm => {
                s.left_mul(g);
                s.log_norm()
            }
        };
        let direction = if pre < t && t <= post {
            Some(Direction::Up)
        } else if post < t && t <= pre {
            Some(Direction::Down)
        } else {
            None
        };
        if let Some(direction) = direction {
            visit(
                &CrossingSample {
                    n,
                    word: s,
                    overshoot: post - t,
                    jump: post - pre,
                    direction,
                },
                n <= n_max,
            );
        }
        pre = post;
    }
}

#[derive(Clone, Debug)]
pub struct CrossingRun {
    /// Crossings per trajectory, inside the horizon.
    pub trajectories: Vec<Vec<CrossingSample>>,
    pub n_max: usize,
    /// Mean number of crossings per trajectory found past the horizon.
    pub tail_rate: f64,
}

/// All crossings of level `t` in direction `direction` along `replicas` trajectories.
pub fn crossing_sampler(
    sampler: &TrajectorySampler,
    t: f64,
    direction: Direction,
    monitored: Monitored,
    x: &ProjPoint,
    gamma_hat: f64,
    replicas: usize,
) -> Result<CrossingRun> {
    check_gamma(gamma_hat)?;
    let n_max = horizon(t, 0.0, gamma_hat);
    let n_ext = extension(n_max);
    let runs = mc::par_replicas(replicas, |r| {
        let mut inside = Vec::new();
        let mut outside = 0usize;
        visit_crossings(sampler, r as u64, t, monitored, x, n_max, n_ext, |c, ok| {
            if c.direction == direction {
                if ok {
                    inside.push(*c);
                } else {
                    outside += 1;
                }
            }
        });
        (inside, outside)
    });
    let tail: usize = runs.iter().map(|r| r.1).sum();
    Ok(CrossingRun {
        trajectories: runs.into_iter().map(|r| r.0).collect(),
        n_max,
        tail_rate: tail as f64 / replicas.max(1) as f64,
    })
}
