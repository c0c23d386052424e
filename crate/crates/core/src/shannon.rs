//! Finite probability spaces, random variables as labelings (equivalently
//! partitions) of the sample points, averaged conditioning, and Shannon
//! entropy as a chain-rule instance.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::{Add, Sub};

use crate::diagram::{ActionForm, ChainRule};
use crate::error::{Error, Result};
use crate::monoid::{all_joints, check_n, Joint};

/// Default cap on distinct sample points accepted by ingestion.
pub const MAX_SAMPLE_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Nats => x.ln(),
            LogBase::Bits => x.log2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

/// A probability mass function on sample points `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    masses: Vec<f64>,
}

fn sum_tolerance(len: usize) -> f64 {
    1e-12_f64.max(len as f64 * 4.0 * f64::EPSILON)
}

impl Dist {
    /// Masses must be finite, nonnegative and sum to 1.
    pub fn new(masses: Vec<f64>) -> Result<Dist> {
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("no sample points".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidDistribution(format!("mass {m} at sample point {i}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > sum_tolerance(masses.len()) {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        Ok(Dist { masses })
    }

    /// Normalizes nonnegative finite weights with a positive sum.
    pub fn from_weights(weights: &[f64]) -> Result<Dist> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w} at sample point {i}")));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Dist {
            masses: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(len: usize) -> Dist {
        assert!(len > 0, "uniform distribution needs a sample point");
        Dist {
            masses: vec![1.0 / len as f64; len],
        }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.masses.iter().all(|&m| m > 0.0)
    }
}

/// A labeling of sample points. Labels are stored as dense ids assigned in
/// order of first occurrence, so two variables induce the same partition
/// exactly when their label vectors are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomVariable {
    labels: Vec<u32>,
    values: usize,
}

impl RandomVariable {
    pub fn from_labels<T: Hash + Eq>(labels: impl IntoIterator<Item = T>) -> RandomVariable {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(l).or_insert(next)
            })
            .collect();
        RandomVariable {
            labels,
            values: ids.len(),
        }
    }

    /// The trivial variable `1` on `len` points.
    pub fn constant(len: usize) -> RandomVariable {
        RandomVariable {
            labels: vec![0; len],
            values: usize::from(len > 0),
        }
    }

    /// The identity on `len` points.
    pub fn identity(len: usize) -> RandomVariable {
        RandomVariable {
            labels: (0..len as u32).collect(),
            values: len,
        }
    }

    /// Label id of each sample point.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of distinct labels.
    pub fn value_count(&self) -> usize {
        self.values
    }

    pub fn sample_points(&self) -> usize {
        self.labels.len()
    }

    /// Preimages of each label, in label order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.values];
        for (w, &l) in self.labels.iter().enumerate() {
            cells[l as usize].push(w);
        }
        cells
    }
}

fn same_space(what: &'static str, expected: usize, found: usize) {
    assert_eq!(
        expected, found,
        "{what}: sample spaces differ ({expected} vs {found} points)"
    );
}

/// Pushforward `P_X(x) = P(X^{-1}(x))`, indexed by label id.
pub fn marginal(p: &Dist, x: &RandomVariable) -> Dist {
    same_space("marginal", p.len(), x.sample_points());
    let mut masses = vec![0.0; x.value_count()];
    for (m, &l) in p.masses.iter().zip(&x.labels) {
        masses[l as usize] += m;
    }
    Dist { masses }
}

/// `P|_{X=x}`: the renormalized restriction to `X^{-1}(x)`, or `P` itself
/// when `P_X(x) = 0`.
pub fn condition(p: &Dist, x: &RandomVariable, label: u32) -> Dist {
    same_space("condition", p.len(), x.sample_points());
    let cell_mass: f64 = p
        .masses
        .iter()
        .zip(&x.labels)
        .filter(|(_, &l)| l == label)
        .map(|(m, _)| m)
        .sum();
    if cell_mass == 0.0 {
        return p.clone();
    }
    Dist {
        masses: p
            .masses
            .iter()
            .zip(&x.labels)
            .map(|(&m, &l)| if l == label { m / cell_mass } else { 0.0 })
            .collect(),
    }
}

/// `-Σ p log p` with `0 log 0 = 0`. Clamped at zero, since masses summing
/// to one plus an ulp would otherwise give `-0.0` or `-2e-16`.
pub fn entropy_of_masses(masses: &[f64], base: LogBase) -> f64 {
    let h = -masses
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * base.log(m))
        .sum::<f64>();
    h.max(0.0)
}

/// `H(X; P) = H(P_X)`.
pub fn entropy(p: &Dist, x: &RandomVariable, base: LogBase) -> f64 {
    entropy_of_masses(marginal(p, x).masses(), base)
}

/// `XY`, labeled by pairs of labels.
pub fn joint(x: &RandomVariable, y: &RandomVariable) -> Result<RandomVariable> {
    if x.sample_points() != y.sample_points() {
        return Err(Error::SampleSpaceMismatch {
            what: "joint",
            expected: x.sample_points(),
            found: y.sample_points(),
        });
    }
    Ok(RandomVariable::from_labels(x.labels.iter().zip(&y.labels)))
}

/// Whether `X` and `Y` induce the same partition of the sample points.
pub fn equivalent(x: &RandomVariable, y: &RandomVariable) -> bool {
    same_space("equivalent", x.sample_points(), y.sample_points());
    x.labels == y.labels
}

/// Whether `Y` is a function of `X` (`Y ≾ X`): every cell of `X` lies in one cell of `Y`.
pub fn refines(x: &RandomVariable, y: &RandomVariable) -> bool {
    same_space("refines", x.sample_points(), y.sample_points());
    let mut image: Vec<Option<u32>> = vec![None; x.value_count()];
    x.labels.iter().zip(&y.labels).all(|(&a, &b)| {
        let slot = &mut image[a as usize];
        match *slot {
            Some(seen) => seen == b,
            None => {
                *slot = Some(b);
                true
            }
        }
    })
}

/// A function of the distribution, built from entropies by sums,
/// differences and averaged conditioning.
#[derive(Debug, Clone, PartialEq)]
pub enum InfoFunction {
    Entropy {
        var: RandomVariable,
        base: LogBase,
    },
    Conditioned {
        by: RandomVariable,
        inner: Box<InfoFunction>,
    },
    Sum(Box<InfoFunction>, Box<InfoFunction>),
    Difference(Box<InfoFunction>, Box<InfoFunction>),
}

impl InfoFunction {
    pub fn entropy(var: RandomVariable, base: LogBase) -> InfoFunction {
        InfoFunction::Entropy { var, base }
    }

    /// `by.self`.
    pub fn conditioned(self, by: RandomVariable) -> InfoFunction {
        InfoFunction::Conditioned {
            by,
            inner: Box::new(self),
        }
    }

    pub fn eval(&self, p: &Dist) -> f64 {
        match self {
            InfoFunction::Entropy { var, base } => entropy(p, var, *base),
            InfoFunction::Conditioned { by, inner } => act(by, inner, p),
            InfoFunction::Sum(a, b) => a.eval(p) + b.eval(p),
            InfoFunction::Difference(a, b) => a.eval(p) - b.eval(p),
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            InfoFunction::Entropy { .. } => "entropy",
            InfoFunction::Conditioned { .. } => "conditioned",
            InfoFunction::Sum(..) => "sum",
            InfoFunction::Difference(..) => "difference",
        }
    }
}

impl Add for InfoFunction {
    type Output = InfoFunction;
    fn add(self, rhs: InfoFunction) -> InfoFunction {
        InfoFunction::Sum(Box::new(self), Box::new(rhs))
    }
}

impl Sub for InfoFunction {
    type Output = InfoFunction;
    fn sub(self, rhs: InfoFunction) -> InfoFunction {
        InfoFunction::Difference(Box::new(self), Box::new(rhs))
    }
}

/// `(X.F)(P) = Σ_x P_X(x) F(P|_{X=x})`.
pub fn act(x: &RandomVariable, f: &InfoFunction, p: &Dist) -> f64 {
    let px = marginal(p, x);
    px.masses()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(label, &w)| w * f.eval(&condition(p, x, label as u32)))
        .sum()
}

/// The generators of a diagram over one sample space, with joints by mask.
#[derive(Debug, Clone)]
pub struct Generators {
    vars: Vec<RandomVariable>,
    points: usize,
}

impl Generators {
    pub fn new(vars: Vec<RandomVariable>, points: usize) -> Result<Generators> {
        check_n(vars.len())?;
        if let Some(v) = vars.iter().find(|v| v.sample_points() != points) {
            return Err(Error::SampleSpaceMismatch {
                what: "generator",
                expected: points,
                found: v.sample_points(),
            });
        }
        Ok(Generators { vars, points })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[RandomVariable] {
        &self.vars
    }

    pub fn sample_points(&self) -> usize {
        self.points
    }

    /// `X_I` as a variable; the constant variable for the unit.
    pub fn joint(&self, mask: Joint) -> RandomVariable {
        let members: Vec<&RandomVariable> = mask
            .indices()
            .into_iter()
            .filter_map(|i| self.vars.get(i - 1))
            .collect();
        match members.as_slice() {
            [] => RandomVariable::constant(self.points),
            [one] => (*one).clone(),
            many => RandomVariable::from_labels(
                (0..self.points).map(|w| many.iter().map(|v| v.labels[w]).collect::<Vec<u32>>()),
            ),
        }
    }
}

/// Class masses of `given` and of `target ∪ given` under one or more
/// measures, plus the `given`-class of each joint class. Shared by the
/// averaged-conditioning instances.
pub(crate) struct Refinement {
    /// `given[m][z]`: mass of class `z` under measure `m`.
    pub given: Vec<Vec<f64>>,
    /// `joint[m][c]`: mass of joint class `c` under measure `m`.
    pub joint: Vec<Vec<f64>>,
    pub parent: Vec<u32>,
}

impl Refinement {
    pub fn new(gens: &Generators, target: Joint, given: Joint, measures: &[&[f64]]) -> Refinement {
        let z = gens.joint(given);
        let yz = gens.joint(target.join(given));
        let mut parent = vec![0u32; yz.value_count()];
        for w in 0..gens.sample_points() {
            parent[yz.labels[w] as usize] = z.labels[w];
        }
        let tally = |var: &RandomVariable, masses: &[f64]| {
            let mut out = vec![0.0; var.value_count()];
            for (w, &l) in var.labels.iter().enumerate() {
                out[l as usize] += masses[w];
            }
            out
        };
        Refinement {
            given: measures.iter().map(|m| tally(&z, m)).collect(),
            joint: measures.iter().map(|m| tally(&yz, m)).collect(),
            parent,
        }
    }
}

/// Shannon entropy of joints of the generators under a fixed `P`:
/// `K_1(Y | Z) = H(YZ; P) - H(Z; P)`.
#[derive(Debug, Clone)]
pub struct ShannonInstance {
    p: Dist,
    gens: Generators,
    base: LogBase,
    totals: Vec<f64>,
}

impl ShannonInstance {
    pub fn dist(&self) -> &Dist {
        &self.p
    }

    pub fn generators_ref(&self) -> &Generators {
        &self.gens
    }

    pub fn base(&self) -> LogBase {
        self.base
    }
}

pub fn shannon_instance(p: &Dist, gens: &[RandomVariable], base: LogBase) -> Result<ShannonInstance> {
    let gens = Generators::new(gens.to_vec(), p.len())?;
    let totals = all_joints(gens.len())
        .map(|j| entropy(p, &gens.joint(j), base))
        .collect();
    Ok(ShannonInstance {
        p: p.clone(),
        gens,
        base,
        totals,
    })
}

impl ChainRule for ShannonInstance {
    fn generators(&self) -> usize {
        self.gens.len()
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        self.totals[target.join(given).bits() as usize] - self.totals[given.bits() as usize]
    }

    fn total(&self, joint: Joint) -> f64 {
        self.totals[joint.bits() as usize]
    }
}

impl ActionForm for ShannonInstance {
    fn acted(&self, target: Joint, given: Joint) -> f64 {
        let f = InfoFunction::entropy(self.gens.joint(target), self.base);
        act(&self.gens.joint(given), &f, &self.p)
    }
}

/// Distinct rows become sample points (first-occurrence order) with
/// normalized, optionally weighted, counts; each column becomes a variable.
pub fn empirical_from_rows<S: AsRef<str>>(
    rows: &[Vec<S>],
    weights: Option<&[f64]>,
) -> Result<(Dist, Vec<RandomVariable>)> {
    let (points, masses) = distinct_rows(rows, weights, MAX_SAMPLE_POINTS)?;
    let width = points.first().map_or(0, |r| r.len());
    let vars = (0..width)
        .map(|c| RandomVariable::from_labels(points.iter().map(|r| r[c].as_str())))
        .collect();
    Ok((Dist::from_weights(&masses)?, vars))
}

/// Distinct rows in first-occurrence order with their accumulated weights.
pub(crate) fn distinct_rows<S: AsRef<str>>(
    rows: &[Vec<S>],
    weights: Option<&[f64]>,
    cap: usize,
) -> Result<(Vec<Vec<String>>, Vec<f64>)> {
    let Some(first) = rows.first() else {
        return Err(Error::Ingestion {
            row: 0,
            message: "no rows".into(),
        });
    };
    let width = first.len();
    if let Some(w) = weights {
        if w.len() != rows.len() {
            return Err(Error::Ingestion {
                row: w.len().min(rows.len()) + 1,
                message: format!("{} weights for {} rows", w.len(), rows.len()),
            });
        }
    }
    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut points: Vec<Vec<String>> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Ingestion {
                row: r + 1,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let w = weights.map_or(1.0, |w| w[r]);
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Ingestion {
                row: r + 1,
                message: format!("weight {w} is not a finite nonnegative number"),
            });
        }
        let key: Vec<String> = row.iter().map(|s| s.as_ref().to_owned()).collect();
        let slot = match index.get(&key) {
            Some(&i) => i,
            None => {
                if points.len() == cap {
                    return Err(Error::TooManySamplePoints { count: cap + 1, cap });
                }
                index.insert(key.clone(), points.len());
                points.push(key);
                masses.push(0.0);
                points.len() - 1
            }
        };
        masses[slot] += w;
    }
    let total: f64 = masses.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Ingestion {
            row: rows.len(),
            message: "weights sum to zero".into(),
        });
    }
    Ok((points, masses))
}
