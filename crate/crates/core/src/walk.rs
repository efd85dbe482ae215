//! Random walks `S_n = g_n ... g_1` driven by a generator measure.

use crate::error::{Error, Result};
use crate::mc::{self, Stream};
use crate::model::GeneratorMeasure;
use crate::proj2::{act, cocycle, Mat2, ProjPoint, ScaledMat2};

#[derive(Clone, Debug)]
pub struct TrajectorySampler {
    measure: GeneratorMeasure,
    seed: u64,
    stream_count: usize,
}

/// Draws atoms for one replica.
pub struct Walker<'a> {
    measure: &'a GeneratorMeasure,
    rng: Stream,
}

impl<'a> Walker<'a> {
    pub fn next_index(&mut self) -> usize {
        self.measure.index_for(mc::uniform(&mut self.rng))
    }

    pub fn next_atom(&mut self) -> &'a Mat2 {
        let i = self.next_index();
        &self.measure.atoms()[i].matrix
    }

    pub fn rng(&mut self) -> &mut Stream {
        &mut self.rng
    }
}

impl TrajectorySampler {
    pub fn new(measure: GeneratorMeasure, seed: u64, stream_count: usize) -> Result<Self> {
        if stream_count == 0 {
            return Err(Error::invalid("stream_count must be at least 1"));
        }
        Ok(TrajectorySampler {
            measure,
            seed,
            stream_count,
        })
    }

    pub fn measure(&self) -> &GeneratorMeasure {
        &self.measure
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_count(&self) -> usize {
        self.stream_count
    }

    /// Same measure, different seed. Used to keep independent estimates
    /// (e.g. a stationary sample and trajectories) on disjoint streams.
    pub fn with_seed(&self, seed: u64) -> Self {
        TrajectorySampler {
            measure: self.measure.clone(),
            seed,
            stream_count: self.stream_count,
        }
    }

    /// Sampler for the reversed measure on the same seed.
    pub fn reversed(&self) -> Self {
        TrajectorySampler {
            measure: crate::model::reverse(&self.measure),
            seed: self.seed,
            stream_count: self.stream_count,
        }
    }

    pub fn walker(&self, replica: u64) -> Walker<'_> {
        Walker {
            measure: &self.measure,
            rng: mc::stream(self.seed, replica),
        }
    }
}

/// Product of `n` atoms of replica `replica`, with the atom indices if asked.
pub fn sample_product(
    sampler: &TrajectorySampler,
    n: usize,
    replica: u64,
    keep_trajectory: bool,
) -> (Mat2, Option<Vec<usize>>) {
    let mut w = sampler.walker(replica);
    let mut g = Mat2::identity();
    let mut idx = keep_trajectory.then(|| Vec::with_capacity(n));
    for _ in 0..n {
        let i = w.next_index();
        g = sampler.measure.atoms()[i].matrix * g;
        if let Some(v) = idx.as_mut() {
            v.push(i);
        }
    }
    (g, idx)
}

/// Like [`sample_product`] but safe from overflow for long words.
pub fn sample_scaled_product(sampler: &TrajectorySampler, n: usize, replica: u64) -> ScaledMat2 {
    let mut w = sampler.walker(replica);
    let mut s = ScaledMat2::identity();
    for _ in 0..n {
        s.left_mul(w.next_atom());
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovEstimate {
    pub gamma_hat: f64,
    pub a2_hat: f64,
    pub se_gamma: f64,
    pub se_a2: f64,
    pub n: usize,
    pub replicas: usize,
}

/// `gamma_hat = mean(log |S_n|) / n`, `a2_hat = var(log |S_n|) / n`.
pub fn estimate_lyapunov_clt(
    sampler: &TrajectorySampler,
    n: usize,
    replicas: usize,
) -> Result<LyapunovEstimate> {
    if n == 0 || replicas < 2 {
        return Err(Error::invalid("lyapunov needs n >= 1 and N >= 2"));
    }
    let logs = mc::par_replicas(replicas, |r| {
        sample_scaled_product(sampler, n, r as u64).log_norm()
    });
    let m = mc::mean_se(&logs);
    let nf = n as f64;
    let m4 = mc::pairwise_sum_by(replicas, &|i| (logs[i] - m.mean).powi(4)) / replicas as f64;
    let se_var = ((m4 - m.var * m.var).max(0.0) / replicas as f64).sqrt();
    Ok(LyapunovEstimate {
        gamma_hat: m.mean / nf,
        a2_hat: m.var / nf,
        se_gamma: m.se / nf,
        se_a2: se_var / nf,
        n,
        replicas,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRecord {
    pub n_t: usize,
    /// `sigma(S_{n_t}, x) - t`, positive.
    pub overshoot: f64,
    pub endpoint: ProjPoint,
}

/// First `n` with `sigma(S_n, x) > t`, capped at `ceil(20 t / gamma_hat) + 1000`.
pub fn stopping_time(
    sampler: &TrajectorySampler,
    x: &ProjPoint,
    t: f64,
    gamma_hat: f64,
    replica: u64,
) -> Result<StoppingRecord> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("stopping time needs t >= 0, got {t}")));
    }
    if !(gamma_hat > 0.0) {
        return Err(Error::invalid(format!("stopping time needs gamma_hat > 0, got {gamma_hat}")));
    }
    let cap = (20.0 * t / gamma_hat).ceil() as usize + 1000;
    let mut w = sampler.walker(replica);
    let mut x = *x;
    let mut sigma = 0.0;
    for n in 1..=cap {
        let g = w.next_atom();
        sigma += cocycle(g, &x);
        x = act(g, &x);
        if sigma > t {
            return Ok(StoppingRecord {
                n_t: n,
                overshoot: sigma - t,
                endpoint: x,
            });
        }
    }
    Err(Error::NoConvergence(format!(
        "stopping time exceeded the cap {cap} at t = {t}"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeviationEvent {
    /// `|log |g| - n gamma| >= eps n`
    Norm,
    /// `|sigma_g(x) - n gamma| >= eps n`
    Cocycle,
    /// `d(g^{-1} x, z^m_g) >= exp(-(2 gamma - eps) n)`
    PreimageFar,
    /// `d(z^m_g, y) <= exp(-eps n)`
    RepellerNear,
    /// `d(g^{-1} x, y) <= exp(-eps n)`
    PreimageNear,
}

impl DeviationEvent {
    pub const ALL: [DeviationEvent; 5] = [
        DeviationEvent::Norm,
        DeviationEvent::Cocycle,
        DeviationEvent::PreimageFar,
        DeviationEvent::RepellerNear,
        DeviationEvent::PreimageNear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DeviationEvent::Norm => "norm",
            DeviationEvent::Cocycle => "cocycle",
            DeviationEvent::PreimageFar => "preimage_far_from_repeller",
            DeviationEvent::RepellerNear => "repeller_near_y",
            DeviationEvent::PreimageNear => "preimage_near_y",
        }
    }

    /// Whether the word `g` of length `n` lies in the event.
    pub fn holds(
        &self,
        g: &ScaledMat2,
        n: usize,
        gamma: f64,
        eps: f64,
        x: &ProjPoint,
        y: &ProjPoint,
    ) -> bool {
        let nf = n as f64;
        match self {
            DeviationEvent::Norm => (g.log_norm() - nf * gamma).abs() >= eps * nf,
            DeviationEvent::Cocycle => (g.cocycle(x) - nf * gamma).abs() >= eps * nf,
            DeviationEvent::PreimageFar => {
                g.dist_preimage_to_repeller(x) >= (-(2.0 * gamma - eps) * nf).exp()
            }
            DeviationEvent::RepellerNear => {
                crate::proj2::dist(&g.repeller(), y) <= (-eps * nf).exp()
            }
            DeviationEvent::PreimageNear => {
                crate::proj2::dist(&g.inverse_act(x), y) <= (-eps * nf).exp()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationRow {
    pub event: DeviationEvent,
    pub n: usize,
    pub epsilon: f64,
    pub exceed_fraction: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationProfile {
    pub rows: Vec<DeviationRow>,
    pub replicas: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn deviation_profile(
    sampler: &TrajectorySampler,
    gamma: f64,
    epsilon: f64,
    n_list: &[usize],
    x: &ProjPoint,
    y: &ProjPoint,
    replicas: usize,
) -> Result<DeviationProfile> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("deviation profile needs epsilon > 0"));
    }
    if replicas == 0 || n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("deviation profile needs N >= 1 and n >= 1"));
    }
    let n_max = *n_list.iter().max().expect("nonempty");
    let flags: Vec<Vec<bool>> = mc::par_replicas(replicas, |r| {
        let mut w = sampler.walker(r as u64);
        let mut s = ScaledMat2::identity();
        let mut out = Vec::with_capacity(n_list.len() * 5);
        let mut hits = vec![None; n_max + 1];
        for n in 1..=n_max {
            s.left_mul(w.next_atom());
            if n_list.contains(&n) {
                hits[n] = Some(
                    DeviationEvent::ALL
                        .iter()
                        .map(|e| e.holds(&s, n, gamma, epsilon, x, y))
                        .collect::<Vec<_>>(),
                );
            }
        }
        for e in 0..5 {
            for &n in n_list {
                out.push(hits[n].as_ref().expect("visited")[e]);
            }
        }
        out
    });
    let mut rows = Vec::new();
    for (e, event) in DeviationEvent::ALL.iter().enumerate() {
        for (j, &n) in n_list.iter().enumerate() {
            let k = e * n_list.len() + j;
            let count = flags.iter().filter(|f| f[k]).count();
            let f = count as f64 / replicas as f64;
            rows.push(DeviationRow {
                event: *event,
                n,
                epsilon,
                exceed_fraction: f,
                se: (f * (1.0 - f) / replicas as f64).sqrt(),
            });
        }
    }
    Ok(DeviationProfile { rows, replicas })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingRecord {
    pub n: usize,
    pub l: usize,
    pub bound: f64,
    pub violation_fraction: f64,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
}

/// Checks `|log |g2 g1| - sigma_{g2}(g1 x) - log |g1|| <= 4 exp(-gamma l)`
/// for `g1` of length `l` and `g2` of length `n - l`.
pub fn coupling_check(
    sampler: &TrajectorySampler,
    gamma: f64,
    n: usize,
    l: usize,
    x: &ProjPoint,
    replicas: usize,
) -> Result<CouplingRecord> {
    if !(l >= 1 && n > l && n <= 100 * l) {
        return Err(Error::invalid(format!(
            "coupling check needs 100 l >= n > l >= 1, got n = {n}, l = {l}"
        )));
    }
    let bound = 4.0 * (-gamma * l as f64).exp();
    let disc = mc::par_replicas(replicas, |r| {
        let mut w = sampler.walker(r as u64);
        let mut g1 = ScaledMat2::identity();
        for _ in 0..l {
            g1.left_mul(w.next_atom());
        }
        let mut g2 = ScaledMat2::identity();
        let mut full = g1;
        for _ in l..n {
            let g = w.next_atom();
            g2.left_mul(g);
            full.left_mul(g);
        }
        (full.log_norm() - g2.cocycle(&g1.act(x)) - g1.log_norm()).abs()
    });
    let viol = disc.iter().filter(|&&d| d > bound).count();
    Ok(CouplingRecord {
        n,
        l,
        bound,
        violation_fraction: viol as f64 / replicas as f64,
        max_discrepancy: disc.iter().cloned().fold(0.0, f64::max),
        mean_discrepancy: mc::mean_se(&disc).mean,
    })
}

/// `N` points of the chain `x_{k+1} = g_{k+1} x_k` after `burn_in` steps,
/// one independent chain per replica.
pub fn empirical_measure(
    sampler: &TrajectorySampler,
    burn_in: usize,
    replicas: usize,
    start: &ProjPoint,
) -> Vec<ProjPoint> {
    mc::par_replicas(replicas, |r| {
        let mut w = sampler.walker(r as u64);
        let mut x = *start;
        for _ in 0..burn_in {
            x = act(w.next_atom(), &x);
        }
        x
    })
}

pub fn thetas(points: &[ProjPoint]) -> Vec<f64> {
    points.iter().map(|p| p.theta()).collect()
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
