//! Finitely supported generator measures on SL2(R).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proj2::{act, dist, CMat2, CProjPoint, Mat2, ProjPoint};

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub matrix: Mat2,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMeasure {
    atoms: Vec<Atom>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    m: [f64; 4],
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    atoms: Vec<AtomDoc>,
}

impl GeneratorMeasure {
    /// Validates atoms and weights. Weights summing to 1 within 1e-6 are
    /// renormalized; anything further off is rejected.
    pub fn new(atoms: Vec<(Mat2, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure has no atoms"));
        }
        for (i, (g, w)) in atoms.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::invalid(format!("atom {i}: weight {w} is not positive")));
            }
            Mat2::new(g.entries()[0], g.entries()[1], g.entries()[2], g.entries()[3])
                .map_err(|_| Error::invalid(format!("atom {i}: det = {} != 1", g.det())))?;
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let scale = if (total - 1.0).abs() <= 1e-12 { 1.0 } else { 1.0 / total };
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(matrix, w)| Atom {
                matrix,
                weight: w * scale,
            })
            .collect();
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.weight;
                acc
            })
            .collect();
        Ok(GeneratorMeasure { atoms, cumulative })
    }

    pub fn dirac(g: Mat2) -> Self {
        Self::new(vec![(g, 1.0)]).expect("single unimodular atom")
    }

    pub fn uniform(gs: &[Mat2]) -> Result<Self> {
        let w = 1.0 / gs.len() as f64;
        Self::new(gs.iter().map(|g| (*g, w)).collect())
    }

    /// Uniform measure on `diag(2, 1/2)` and `W diag(2, 1/2)` with
    /// `W = [[1, 1], [-2, -1]]`: non-elementary, dyadic entries.
    pub fn reference() -> Self {
        let a = Mat2::diag(2.0);
        let b = Mat2::new(2.0, 0.5, -4.0, -0.5).expect("det 1");
        Self::uniform(&[a, b]).expect("valid")
    }

    /// Uniform measure on `diag(2, 1/2)` and `[[1, 1], [0, 1]] diag(2, 1/2)`.
    /// Both atoms fix `e1`, so this measure is elementary.
    pub fn triangular_pair() -> Self {
        let a = Mat2::diag(2.0);
        let b = Mat2::new(2.0, 0.5, 0.0, 0.5).expect("det 1");
        Self::uniform(&[a, b]).expect("valid")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// All atoms are real; complex atoms are not representable here.
    pub fn real_flag(&self) -> bool {
        true
    }

    /// Atom index for a uniform variate `u` in `[0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let target = u * self.cumulative[self.cumulative.len() - 1];
        self.cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or(self.atoms.len() - 1)
    }

    pub fn to_json(&self) -> String {
        let doc = MeasureDoc {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomDoc {
                    m: a.matrix.entries(),
                    w: a.weight,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }
}

pub fn load_measure(source: &str) -> Result<GeneratorMeasure> {
    let doc: MeasureDoc =
        serde_json::from_str(source).map_err(|e| Error::Malformed(e.to_string()))?;
    let atoms = doc
        .atoms
        .into_iter()
        .map(|a| {
            let [x, y, z, w] = a.m;
            (Mat2::from_rows_unchecked([[x, y], [z, w]]), a.w)
        })
        .collect();
    GeneratorMeasure::new(atoms)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub m1: f64,
    pub m2: f64,
}

/// `sum_i w_i log^p |g_i|`.
pub fn moments(mu: &GeneratorMeasure, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("moment order p = {p} must be positive")));
    }
    Ok(mu
        .atoms
        .iter()
        .map(|a| a.weight * a.matrix.norm().ln().powf(p))
        .sum())
}

pub fn moment_report(mu: &GeneratorMeasure) -> MomentReport {
    MomentReport {
        m1: moments(mu, 1.0).expect("p > 0"),
        m2: moments(mu, 2.0).expect("p > 0"),
    }
}

/// The image of `mu` under `g -> g^{-1}`.
pub fn reverse(mu: &GeneratorMeasure) -> GeneratorMeasure {
    GeneratorMeasure::new(
        mu.atoms
            .iter()
            .map(|a| (a.matrix.inverse(), a.weight))
            .collect(),
    )
    .expect("inverses of valid atoms are valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    LikelyNonElementary,
    Inconclusive,
    ElementaryEvidence,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::LikelyNonElementary => "likely-non-elementary",
            Verdict::Inconclusive => "inconclusive",
            Verdict::ElementaryEvidence => "elementary-evidence",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub depth: usize,
    pub words_checked: usize,
    /// Largest norm over the enumerated words.
    pub max_norm: f64,
    pub noncompact: bool,
    /// A set of at most two points preserved by every atom, if one was found.
    pub invariant_set: Option<Vec<CProjPoint>>,
    /// Two hyperbolic words whose fixed-point pairs are disjoint.
    pub disjoint_pair: Option<(Vec<usize>, Vec<usize>)>,
    pub verdict: Verdict,
}

const MAX_PROBE_WORDS: usize = 200_000;

/// Fixed points of a non-scalar complex 2x2 matrix (one or two points).
fn fixed_points(g: &CMat2) -> Vec<CProjPoint> {
    let [a, b, c, d] = g.entries();
    let tr = a + d;
    let disc = (tr * tr - g.det() * 4.0).sqrt();
    let mut out: Vec<CProjPoint> = Vec::new();
    for l in [(tr + disc) * 0.5, (tr - disc) * 0.5] {
        let c1 = [b, l - a];
        let c2 = [l - d, c];
        let v = if c1[0].norm() + c1[1].norm() >= c2[0].norm() + c2[1].norm() {
            c1
        } else {
            c2
        };
        if let Some(p) = CProjPoint::from_vector(v) {
            if !out.iter().any(|q| q.approx_eq(&p)) {
                out.push(p);
            }
        }
    }
    out
}

fn is_scalar(g: &CMat2) -> bool {
    let [a, b, c, d] = g.entries();
    let s = g.norm();
    b.norm() <= 1e-12 * s && c.norm() <= 1e-12 * s && (a - d).norm() <= 1e-12 * s
}

fn preserves(atoms: &[CMat2], set: &[CProjPoint]) -> bool {
    atoms.iter().all(|g| {
        set.iter().all(|x| {
            let y = act(g, x);
            set.iter().any(|z| dist(&y, z) <= 1e-9)
        })
    })
}

/// Heuristic test for non-elementarity by word enumeration up to `depth`.
pub fn nonelementary_probe(mu: &GeneratorMeasure, depth: usize) -> Result<ProbeReport> {
    if depth == 0 || depth > 8 {
        return Err(Error::invalid(format!("probe depth {depth} must lie in 1..=8")));
    }
    let gens: Vec<Mat2> = mu.atoms.iter().map(|a| a.matrix).collect();
    let mut words: Vec<(Vec<usize>, Mat2)> = Vec::new();
    let mut frontier: Vec<(Vec<usize>, Mat2)> = vec![(Vec::new(), Mat2::identity())];
    'outer: for _ in 0..depth {
        let mut next = Vec::new();
        for (w, g) in &frontier {
            for (i, h) in gens.iter().enumerate() {
                let mut w2 = w.clone();
                w2.push(i);
                next.push((w2, *h * *g));
                if words.len() + next.len() >= MAX_PROBE_WORDS {
                    words.extend(next);
                    break 'outer;
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let max_norm = words.iter().map(|(_, g)| g.norm()).fold(1.0, f64::max);
    let noncompact = max_norm > 1.0 + 1e-6;

    let cgens: Vec<CMat2> = gens.iter().map(|g| g.to_complex()).collect();
    let mut invariant_set = None;
    if let Some((_, g)) = words
        .iter()
        .find(|(_, g)| !is_scalar(&(*g * *g).to_complex()))
    {
        let cands = fixed_points(&(*g * *g).to_complex());
        let mut sets: Vec<Vec<CProjPoint>> = cands.iter().map(|p| vec![*p]).collect();
        if cands.len() == 2 {
            sets.push(cands.clone());
        }
        invariant_set = sets.into_iter().find(|s| preserves(&cgens, s));
    }

    let mut disjoint_pair = None;
    if invariant_set.is_none() && noncompact {
        let hyper: Vec<(&Vec<usize>, Vec<CProjPoint>)> = words
            .iter()
            .filter(|(_, g)| {
                let [a, _, _, d] = g.entries();
                (a + d).abs() > 2.0 + 1e-9
            })
            .map(|(w, g)| (w, fixed_points(&g.to_complex())))
            .filter(|(_, f)| f.len() == 2)
            .collect();
        'search: for i in 0..hyper.len() {
            for j in (i + 1)..hyper.len() {
                let apart = hyper[i]
                    .1
                    .iter()
                    .all(|p| hyper[j].1.iter().all(|q| dist(p, q) > 1e-6));
                if apart {
                    disjoint_pair = Some((hyper[i].0.clone(), hyper[j].0.clone()));
                    break 'search;
                }
            }
        }
    }

    let verdict = if invariant_set.is_some() || !noncompact {
        Verdict::ElementaryEvidence
    } else if disjoint_pair.is_some() {
        Verdict::LikelyNonElementary
    } else {
        Verdict::Inconclusive
    };
    Ok(ProbeReport {
        depth,
        words_checked: words.len(),
        max_norm,
        noncompact,
        invariant_set,
        disjoint_pair,
        verdict,
    })
}

/// The real points of an invariant set, for display.
pub fn real_points(set: &[CProjPoint]) -> Vec<ProjPoint> {
    set.iter().filter_map(|p| p.to_real()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn load_examples() {
        let one = load_measure(r#"{"atoms":[{"m":[2,0,0,0.5],"w":1}]}"#).unwrap();
        assert_eq!(one.len(), 1);
        let two = load_measure(r#"{"atoms":[{"m":[2,0,0,0.5],"w":0.5},{"m":[1,1,0,1],"w":0.5}]}"#)
            .unwrap();
        assert_eq!(two.len(), 2);
        let err = load_measure(r#"{"atoms":[{"m":[1,0,0,2],"w":1}]}"#).unwrap_err();
        assert!(err.to_string().contains("det = 2"));
        assert!(load_measure(r#"{"atoms":[{"m":[1,0,0,1],"w":0}]}"#).is_err());
        assert!(matches!(load_measure("{\"atoms\": 3}"), Err(Error::Malformed(_))));
        assert!(load_measure(r#"{"atoms":[{"m":[1,0,0,1],"w":0.9}]}"#).is_err());
    }

    #[test]
    fn renormalizes_close_weights() {
        let mu = load_measure(
            r#"{"atoms":[{"m":[2,0,0,0.5],"w":0.5000001},{"m":[1,1,0,1],"w":0.5}]}"#,
        )
        .unwrap();
        let s: f64 = mu.atoms().iter().map(|a| a.weight).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_is_idempotent_and_round_trips() {
        let mu = GeneratorMeasure::reference();
        let again = load_measure(&mu.to_json()).unwrap();
        assert_eq!(mu, again);
        assert_eq!(again.to_json(), mu.to_json());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moments(&GeneratorMeasure::dirac(Mat2::identity()), 1.5).unwrap(), 0.0);
        let m = moments(&GeneratorMeasure::dirac(Mat2::diag(2.0)), 2.0).unwrap();
        assert!((m - LN_2 * LN_2).abs() < 1e-15);
        let mu = GeneratorMeasure::uniform(&[Mat2::diag(2.0), Mat2::diag(3.0)]).unwrap();
        let m = moments(&mu, 1.0).unwrap();
        assert!((m - (LN_2 + 3f64.ln()) / 2.0).abs() < 1e-15);
        assert!(moments(&mu, 0.0).is_err());
    }

    #[test]
    fn splitting_an_atom_keeps_moments() {
        let mu = GeneratorMeasure::reference();
        let a = mu.atoms()[0].matrix;
        let b = mu.atoms()[1].matrix;
        let split = GeneratorMeasure::new(vec![(a, 0.25), (a, 0.25), (b, 0.5)]).unwrap();
        for p in [0.5, 1.0, 2.0, 3.0] {
            let d = moments(&mu, p).unwrap() - moments(&split, p).unwrap();
            assert!(d.abs() < 1e-15);
        }
        let r = moment_report(&mu);
        assert!(r.m2 >= r.m1 * r.m1);
    }

    #[test]
    fn reverse_is_an_involution() {
        let mu = GeneratorMeasure::reference();
        assert_eq!(reverse(&reverse(&mu)), mu);
        let a = Mat2::diag(2.0);
        assert_eq!(reverse(&GeneratorMeasure::dirac(a)).atoms()[0].matrix, a.inverse());
        for p in [1.0, 2.0] {
            assert_eq!(moments(&reverse(&mu), p).unwrap(), moments(&mu, p).unwrap());
        }
    }

    #[test]
    fn probe_verdicts() {
        let rot = GeneratorMeasure::dirac(Mat2::rotation(1.0));
        assert_eq!(nonelementary_probe(&rot, 6).unwrap().verdict, Verdict::ElementaryEvidence);
        let d = GeneratorMeasure::dirac(Mat2::diag(2.0));
        let r = nonelementary_probe(&d, 6).unwrap();
        assert_eq!(r.verdict, Verdict::ElementaryEvidence);
        assert!(r.invariant_set.is_some());
        let r = nonelementary_probe(&GeneratorMeasure::triangular_pair(), 6).unwrap();
        assert_eq!(r.verdict, Verdict::ElementaryEvidence);
        let fixed = real_points(r.invariant_set.as_ref().unwrap());
        assert!(fixed.iter().any(|p| p.approx_eq(&ProjPoint::e1())));
        let r = nonelementary_probe(&GeneratorMeasure::reference(), 6).unwrap();
        assert_eq!(r.verdict, Verdict::LikelyNonElementary);
        assert!(nonelementary_probe(&rot, 9).is_err());
    }

    #[test]
    fn index_for_respects_weights() {
        let mu = GeneratorMeasure::new(vec![(Mat2::identity(), 0.25), (Mat2::diag(2.0), 0.75)])
            .unwrap();
        assert_eq!(mu.index_for(0.0), 0);
        assert_eq!(mu.index_for(0.2499), 0);
        assert_eq!(mu.index_for(0.25), 1);
        assert_eq!(mu.index_for(0.9999), 1);
    }
}
