//! Deformed and two-distribution instances: Tsallis α-entropy, the
//! Kullback-Leibler and α-KL divergences, and cross-entropy.
//!
//! Each instance evaluates `K_1(Y | Z)` as the averaged conditioning of the
//! unconditional quantity, with the action weights that make its chain rule
//! hold: `P_Z(z)` for KL and cross-entropy, `P_Z(z)^α` for Tsallis and
//! `P_Z(z)^α Q_Z(z)^{1-α}` for α-KL. For α ≠ 1 the joint-minus-marginal
//! shortcut is wrong, so none of them use it.

use crate::diagram::{ActionForm, ChainRule};
use crate::error::{Error, Result};
use crate::monoid::Joint;
use crate::shannon::{
    condition, distinct_rows, marginal, Dist, Generators, LogBase, RandomVariable, Refinement, MAX_SAMPLE_POINTS,
};

/// Masses below this are treated as zero when α <= 0 makes `0^α` undefined.
const MIN_MASS_FOR_NEGATIVE_ALPHA: f64 = 1e-300;

/// A deformation parameter, anything but the pole at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Alpha> {
        if value == 1.0 {
            return Err(Error::AlphaIsOne);
        }
        if !value.is_finite() {
            return Err(Error::InvalidDistribution(format!("alpha {value} is not finite")));
        }
        Ok(Alpha(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ln_α(p) = (p^{α-1} - 1) / (α - 1)`.
pub fn ln_alpha(p: f64, alpha: Alpha) -> f64 {
    (p.powf(alpha.0 - 1.0) - 1.0) / (alpha.0 - 1.0)
}

fn require_positive(p: &Dist, alpha: Alpha) -> Result<()> {
    if alpha.0 > 0.0 {
        return Ok(());
    }
    match p.masses().iter().position(|&m| m < MIN_MASS_FOR_NEGATIVE_ALPHA) {
        Some(point) => Err(Error::NonPositiveMass {
            alpha: alpha.0,
            point,
            mass: p.masses()[point],
        }),
        None => Ok(()),
    }
}

/// `(Σ_x p_x^α - 1) / (1 - α)` over the positive masses.
fn tsallis_of_masses(masses: impl IntoIterator<Item = f64>, alpha: Alpha) -> f64 {
    let power: f64 = masses.into_iter().filter(|&m| m > 0.0).map(|m| m.powf(alpha.0)).sum();
    (power - 1.0) / (1.0 - alpha.0)
}

/// `I_1^α(X; P) = (Σ_x P_X(x)^α - 1) / (1 - α)`.
pub fn tsallis_entropy(p: &Dist, x: &RandomVariable, alpha: f64) -> Result<f64> {
    let alpha = Alpha::new(alpha)?;
    let px = marginal(p, x);
    require_positive(&px, alpha)?;
    Ok(tsallis_of_masses(px.masses().iter().copied(), alpha))
}

/// Tsallis α-entropy of joints with the α-weighted action.
#[derive(Debug, Clone)]
pub struct TsallisInstance {
    p: Dist,
    gens: Generators,
    alpha: Alpha,
}

pub fn tsallis_instance(p: &Dist, gens: &[RandomVariable], alpha: f64) -> Result<TsallisInstance> {
    let alpha = Alpha::new(alpha)?;
    require_positive(p, alpha)?;
    Ok(TsallisInstance {
        p: p.clone(),
        gens: Generators::new(gens.to_vec(), p.len())?,
        alpha,
    })
}

impl TsallisInstance {
    pub fn alpha(&self) -> f64 {
        self.alpha.0
    }
}

impl ChainRule for TsallisInstance {
    fn generators(&self) -> usize {
        self.gens.len()
    }

    /// `Σ_z P_Z(z)^α · I_1^α(Y; P|_{Z=z})`.
    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        let r = Refinement::new(&self.gens, target, given, &[self.p.masses()]);
        let (pz, pyz) = (&r.given[0], &r.joint[0]);
        let mut inner = vec![0.0; pz.len()];
        for (c, &m) in pyz.iter().enumerate() {
            let z = r.parent[c] as usize;
            if m > 0.0 {
                inner[z] += (m / pz[z]).powf(self.alpha.0);
            }
        }
        pz.iter()
            .zip(&inner)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &s)| w.powf(self.alpha.0) * (s - 1.0) / (1.0 - self.alpha.0))
            .sum()
    }
}

impl ActionForm for TsallisInstance {
    fn acted(&self, target: Joint, given: Joint) -> f64 {
        let z = self.gens.joint(given);
        let y = self.gens.joint(target);
        let pz = marginal(&self.p, &z);
        pz.masses()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(label, &w)| {
                let cond = condition(&self.p, &z, label as u32);
                let f = tsallis_of_masses(marginal(&cond, &y).masses().iter().copied(), self.alpha);
                w.powf(self.alpha.0) * f
            })
            .sum()
    }
}

/// Two distributions on one sample space with `P ≪ Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistPair {
    p: Dist,
    q: Dist,
}

impl DistPair {
    pub fn new(p: Dist, q: Dist) -> Result<DistPair> {
        if p.len() != q.len() {
            return Err(Error::SampleSpaceMismatch {
                what: "distribution pair",
                expected: p.len(),
                found: q.len(),
            });
        }
        if let Some(point) = p
            .masses()
            .iter()
            .zip(q.masses())
            .position(|(&pm, &qm)| qm == 0.0 && pm > 0.0)
        {
            return Err(Error::AbsoluteContinuity {
                point,
                p: p.masses()[point],
            });
        }
        Ok(DistPair { p, q })
    }

    /// `(P, (1-λ)P + λ·uniform)`, absolutely continuous for every λ in (0, 1].
    pub fn smoothed(p: Dist, lambda: f64) -> Result<DistPair> {
        assert!(lambda > 0.0 && lambda <= 1.0, "λ must lie in (0, 1]");
        let u = 1.0 / p.len() as f64;
        let q = Dist::from_weights(
            &p.masses()
                .iter()
                .map(|&m| (1.0 - lambda) * m + lambda * u)
                .collect::<Vec<_>>(),
        )?;
        DistPair::new(p, q)
    }

    pub fn p(&self) -> &Dist {
        &self.p
    }

    pub fn q(&self) -> &Dist {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// `Σ_x p_x log(p_x / q_x)` over `p_x > 0`.
fn kl_of_masses(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * base.log(a / b))
        .sum()
}

/// `Σ_x p_x^α q_x^{1-α}` over `p_x > 0`.
fn alpha_overlap(p: &[f64], q: &[f64], alpha: Alpha) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a.powf(alpha.0) * b.powf(1.0 - alpha.0))
        .sum()
}

/// `-Σ_x p_x log q_x` over `p_x > 0`.
fn cross_of_masses(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    -p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * base.log(b))
        .sum::<f64>()
}

/// `D_1(X; P‖Q) = Σ_x P_X(x) ln(P_X(x) / Q_X(x))`, in nats.
pub fn kl(pair: &DistPair, x: &RandomVariable) -> f64 {
    kl_in(pair, x, LogBase::Nats)
}

pub fn kl_in(pair: &DistPair, x: &RandomVariable, base: LogBase) -> f64 {
    kl_of_masses(marginal(&pair.p, x).masses(), marginal(&pair.q, x).masses(), base)
}

/// `D_1^α(X; P‖Q) = (Σ_x P_X^α Q_X^{1-α} - 1) / (α - 1)`.
pub fn alpha_kl(pair: &DistPair, x: &RandomVariable, alpha: f64) -> Result<f64> {
    let alpha = Alpha::new(alpha)?;
    let px = marginal(&pair.p, x);
    require_positive(&px, alpha)?;
    let qx = marginal(&pair.q, x);
    Ok((alpha_overlap(px.masses(), qx.masses(), alpha) - 1.0) / (alpha.0 - 1.0))
}

/// `C_1(X; P‖Q) = -Σ_x P_X(x) log Q_X(x)`.
pub fn cross_entropy(pair: &DistPair, x: &RandomVariable, base: LogBase) -> f64 {
    cross_of_masses(marginal(&pair.p, x).masses(), marginal(&pair.q, x).masses(), base)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PairKind {
    Kl(LogBase),
    AlphaKl(Alpha),
    Cross(LogBase),
}

/// A two-distribution instance: KL, α-KL or cross-entropy of joints.
#[derive(Debug, Clone)]
pub struct PairInstance {
    pair: DistPair,
    gens: Generators,
    kind: PairKind,
}

pub fn kl_instance(pair: &DistPair, gens: &[RandomVariable], base: LogBase) -> Result<PairInstance> {
    PairInstance::build(pair, gens, PairKind::Kl(base))
}

pub fn alpha_kl_instance(pair: &DistPair, gens: &[RandomVariable], alpha: f64) -> Result<PairInstance> {
    let alpha = Alpha::new(alpha)?;
    require_positive(&pair.p, alpha)?;
    PairInstance::build(pair, gens, PairKind::AlphaKl(alpha))
}

pub fn cross_entropy_instance(pair: &DistPair, gens: &[RandomVariable], base: LogBase) -> Result<PairInstance> {
    PairInstance::build(pair, gens, PairKind::Cross(base))
}

impl PairInstance {
    fn build(pair: &DistPair, gens: &[RandomVariable], kind: PairKind) -> Result<PairInstance> {
        Ok(PairInstance {
            pair: pair.clone(),
            gens: Generators::new(gens.to_vec(), pair.len())?,
            kind,
        })
    }

    pub fn pair(&self) -> &DistPair {
        &self.pair
    }

    /// Action weight of a conditioning class with masses `p`, `q`.
    fn weight(&self, p: f64, q: f64) -> f64 {
        match self.kind {
            PairKind::Kl(_) | PairKind::Cross(_) => p,
            PairKind::AlphaKl(a) => p.powf(a.0) * q.powf(1.0 - a.0),
        }
    }

    /// The unconditional quantity for pushforward masses `p`, `q`.
    fn value(&self, p: &[f64], q: &[f64]) -> f64 {
        match self.kind {
            PairKind::Kl(base) => kl_of_masses(p, q, base),
            PairKind::AlphaKl(a) => (alpha_overlap(p, q, a) - 1.0) / (a.0 - 1.0),
            PairKind::Cross(base) => cross_of_masses(p, q, base),
        }
    }
}

impl ChainRule for PairInstance {
    fn generators(&self) -> usize {
        self.gens.len()
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        let r = Refinement::new(&self.gens, target, given, &[self.pair.p.masses(), self.pair.q.masses()]);
        let (pz, qz) = (&r.given[0], &r.given[1]);
        let mut cells: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); pz.len()];
        for c in 0..r.parent.len() {
            let z = r.parent[c] as usize;
            if pz[z] > 0.0 {
                cells[z].0.push(r.joint[0][c] / pz[z]);
                cells[z].1.push(r.joint[1][c] / qz[z]);
            }
        }
        pz.iter()
            .zip(qz)
            .zip(&cells)
            .filter(|((&p, _), _)| p > 0.0)
            .map(|((&p, &q), (cp, cq))| self.weight(p, q) * self.value(cp, cq))
            .sum()
    }
}

impl ActionForm for PairInstance {
    fn acted(&self, target: Joint, given: Joint) -> f64 {
        let z = self.gens.joint(given);
        let y = self.gens.joint(target);
        let pz = marginal(&self.pair.p, &z);
        let qz = marginal(&self.pair.q, &z);
        (0..z.value_count())
            .filter(|&label| pz.masses()[label] > 0.0)
            .map(|label| {
                let cp = condition(&self.pair.p, &z, label as u32);
                let cq = condition(&self.pair.q, &z, label as u32);
                let f = self.value(marginal(&cp, &y).masses(), marginal(&cq, &y).masses());
                self.weight(pz.masses()[label], qz.masses()[label]) * f
            })
            .sum()
    }
}

/// Joins two row tables on identical row tuples: the sample space is the
/// distinct rows of `P` followed by rows only `Q` has.
pub fn empirical_pair_from_rows<S: AsRef<str>>(
    p_rows: &[Vec<S>],
    p_weights: Option<&[f64]>,
    q_rows: &[Vec<S>],
    q_weights: Option<&[f64]>,
) -> Result<(DistPair, Vec<RandomVariable>)> {
    let (p_points, p_mass) = distinct_rows(p_rows, p_weights, MAX_SAMPLE_POINTS)?;
    let (q_points, q_mass) = distinct_rows(q_rows, q_weights, MAX_SAMPLE_POINTS)?;
    if p_points[0].len() != q_points[0].len() {
        return Err(Error::Ingestion {
            row: 1,
            message: format!(
                "Q rows have {} fields but P rows have {}",
                q_points[0].len(),
                p_points[0].len()
            ),
        });
    }
    let mut points = p_points;
    let mut index: std::collections::HashMap<Vec<String>, usize> =
        points.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
    let mut q_full = vec![0.0; points.len()];
    for (row, m) in q_points.into_iter().zip(q_mass) {
        match index.get(&row) {
            Some(&i) => q_full[i] += m,
            None => {
                index.insert(row.clone(), points.len());
                points.push(row);
                q_full.push(m);
            }
        }
    }
    if points.len() > MAX_SAMPLE_POINTS {
        return Err(Error::TooManySamplePoints {
            count: points.len(),
            cap: MAX_SAMPLE_POINTS,
        });
    }
    let mut p_full = p_mass;
    p_full.resize(points.len(), 0.0);
    let width = points[0].len();
    let vars = (0..width)
        .map(|c| RandomVariable::from_labels(points.iter().map(|r| r[c].as_str())))
        .collect();
    let pair = DistPair::new(Dist::from_weights(&p_full)?, Dist::from_weights(&q_full)?)?;
    Ok((pair, vars))
}

/// Two binary symmetric channels from a uniform bit `X` to `Y`: `P` flips
/// with probability 1/2, `Q` with probability `epsilon`. Sample points are
/// `(x, y)` in the order 00, 01, 10, 11; generators are `X` then `Y`.
pub fn binary_symmetric_pair(epsilon: f64) -> Result<(DistPair, Vec<RandomVariable>)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidDistribution(format!(
            "channel flip probability {epsilon} must lie strictly between 0 and 1"
        )));
    }
    let p = Dist::uniform(4);
    let q = Dist::new(vec![
        0.5 * (1.0 - epsilon),
        0.5 * epsilon,
        0.5 * epsilon,
        0.5 * (1.0 - epsilon),
    ])?;
    let x = RandomVariable::from_labels([0, 0, 1, 1]);
    let y = RandomVariable::from_labels([0, 1, 0, 1]);
    Ok((DistPair::new(p, q)?, vec![x, y]))
}
