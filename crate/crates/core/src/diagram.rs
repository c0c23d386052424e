//! The diagram engine: the atom measure built from a chain-rule function,
//! the recursive interaction terms, and the exhaustive identity checker.
//!
//! Everything here talks to an instance only through [`ChainRule`], the
//! two-argument form `K_1(Y | Z)`. Given the chain rule
//! `K_1(YZ) = K_1(Y) + K_1(Z | Y)`, the higher terms
//!
//! ```text
//! K_q(Y_1; ...; Y_q | Z) = K_{q-1}(Y_1; ...; Y_{q-1} | Z) - K_{q-1}(Y_1; ...; Y_{q-1} | Y_q Z)
//! ```
//!
//! equal the measure of `⋂_k X̃_{L_k} \ X̃_J`, where the measure of atom `p_I` is
//! an alternating sum of unconditional values `K_1(X_K)` over `K ⊇ [n] \ I`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ChainRuleViolation, Error, Result};
use crate::exec::Strategy;
use crate::monoid::{all_joints, check_n, full_bits, hu_region, Atom, Joint, Region};

/// Default absolute tolerance for double-precision instances.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest generator count for exhaustive sweeps and the linear-solve oracle.
pub const EXHAUSTIVE_MAX_N: usize = 5;

/// A function satisfying the chain rule of information over the monoid of
/// joints of `generators()` generators, in two-argument form.
pub trait ChainRule: Sync {
    fn generators(&self) -> usize;

    /// `K_1(target | given)`.
    fn conditional(&self, target: Joint, given: Joint) -> f64;

    /// `F_1(X) = K_1(X | 1)`.
    fn total(&self, joint: Joint) -> f64 {
        self.conditional(joint, Joint::UNIT)
    }
}

impl<C: ChainRule + ?Sized> ChainRule for &C {
    fn generators(&self) -> usize {
        (**self).generators()
    }
    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        (**self).conditional(target, given)
    }
    fn total(&self, joint: Joint) -> f64 {
        (**self).total(joint)
    }
}

impl<C: ChainRule + ?Sized> ChainRule for Box<C> {
    fn generators(&self) -> usize {
        (**self).generators()
    }
    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        (**self).conditional(target, given)
    }
    fn total(&self, joint: Joint) -> f64 {
        (**self).total(joint)
    }
}

/// Instances that also carry the monoid-action form `Z.F_1(Y)`, evaluated by
/// literally averaging `F_1(Y)` over the conditionals given `Z`.
pub trait ActionForm: ChainRule {
    fn acted(&self, target: Joint, given: Joint) -> f64;
}

/// `(-1)^{|K| + |I| + 1 - n}` as a float.
fn alternating_sign(k: usize, i: usize, n: usize) -> f64 {
    if (k + i + 1 + n).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `μ(p_I) = Σ_{∅ ≠ K ⊇ I^c} (-1)^{|K|+|I|+1-n} F_1(X_K)`, summed in ascending mask order of `K`.
pub fn mu_atom<C: ChainRule + ?Sized>(inst: &C, atom: Atom) -> f64 {
    mu_atom_from(inst.generators(), atom, |k| inst.total(k))
}

fn mu_atom_from(n: usize, atom: Atom, total: impl Fn(Joint) -> f64) -> f64 {
    let subset = atom.subset();
    let outside = subset.complement(n);
    let mut acc = 0.0;
    for part in subset.subsets() {
        let k = outside.join(part);
        if k.is_unit() {
            continue;
        }
        acc += alternating_sign(k.len(), subset.len(), n) * total(k);
    }
    acc
}

/// Atom values of one diagram, indexed by atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomMeasure {
    n: usize,
    values: Vec<f64>,
}

impl AtomMeasure {
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), full_bits(n) as usize, "one value per atom");
        AtomMeasure { n, values }
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn get(&self, atom: Atom) -> f64 {
        self.values[atom.slot()]
    }

    /// `(atom, value)` pairs in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = (Atom, f64)> + '_ {
        self.values.iter().enumerate().map(|(s, &v)| (Atom::from_slot(s), v))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Measure of a region: the sum of its atoms in ascending mask order.
    pub fn measure(&self, region: &Region) -> f64 {
        assert_eq!(region.generators(), self.n, "region from a different diagram");
        region.iter().map(|a| self.get(a)).sum()
    }

    /// Largest absolute difference to another table on the same diagram.
    pub fn max_gap(&self, other: &AtomMeasure) -> f64 {
        assert_eq!(self.n, other.n);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The closed-form value of every atom.
pub fn mu_table<C: ChainRule + ?Sized>(inst: &C) -> Result<AtomMeasure> {
    mu_table_with(inst, Strategy::default())
}

pub fn mu_table_with<C: ChainRule + ?Sized>(inst: &C, strategy: Strategy) -> Result<AtomMeasure> {
    let n = inst.generators();
    check_n(n)?;
    // 2^n totals once, instead of 3^n calls inside the per-atom sums
    let totals = strategy.map_range(1usize << n, |k| match k {
        0 => 0.0,
        k => inst.total(Joint::from_bits(k as u32)),
    });
    let values = strategy.map_range(full_bits(n) as usize, |slot| {
        mu_atom_from(n, Atom::from_slot(slot), |k| totals[k.bits() as usize])
    });
    Ok(AtomMeasure { n, values })
}

/// Measure of a region computed atom by atom from the closed form.
pub fn mu_region<C: ChainRule + ?Sized>(inst: &C, region: &Region) -> f64 {
    region.iter().map(|a| mu_atom(inst, a)).sum()
}

/// Memoized evaluator for `K_q(L_1; ...; L_q | J)`.
///
/// Inner terms are cached under their sorted argument list and conditioning
/// joint; the outermost call keeps the caller's argument order.
pub struct Interactions<'a, C: ?Sized> {
    inst: &'a C,
    memo: HashMap<(Vec<Joint>, Joint), f64>,
}

impl<'a, C: ChainRule + ?Sized> Interactions<'a, C> {
    pub fn new(inst: &'a C) -> Self {
        Interactions {
            inst,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, terms: &[Joint], given: Joint) -> Result<f64> {
        match terms {
            [] => Err(Error::EmptyInteraction),
            [only] => Ok(self.inst.conditional(*only, given)),
            [head @ .., last] => Ok(self.cached(head, given) - self.cached(head, last.join(given))),
        }
    }

    fn cached(&mut self, terms: &[Joint], given: Joint) -> f64 {
        if let [only] = terms {
            return self.inst.conditional(*only, given);
        }
        let mut key = terms.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.memo.get(&(key.clone(), given)) {
            return v;
        }
        let (last, head) = key.split_last().expect("at least two terms");
        let value = self.cached(head, given) - self.cached(head, last.join(given));
        self.memo.insert((key, given), value);
        value
    }

    pub fn cache_len(&self) -> usize {
        self.memo.len()
    }
}

/// `K_q(L_1; ...; L_q | J)` by the defining recursion.
pub fn interaction<C: ChainRule + ?Sized>(inst: &C, terms: &[Joint], given: Joint) -> Result<f64> {
    Interactions::new(inst).eval(terms, given)
}

/// `K_q(L_1; ...; L_q | J) = Σ_{K ⊆ [q]} (-1)^{|K|+1} F_1(L_K J)`, without recursion.
pub fn interaction_incl_excl<C: ChainRule + ?Sized>(inst: &C, terms: &[Joint], given: Joint) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::EmptyInteraction);
    }
    assert!(terms.len() < 32, "at most 31 interaction arguments");
    let mut acc = 0.0;
    for pick in 0u32..(1 << terms.len()) {
        let joint = terms
            .iter()
            .enumerate()
            .filter(|(k, _)| pick >> k & 1 == 1)
            .fold(given, |acc, (_, l)| acc.join(*l));
        let sign = if pick.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * inst.total(joint);
    }
    Ok(acc)
}

/// `η_I = X_{[n]∖I}.F_q(X_{i_1}; ...; X_{i_q})`: the fully conditioned
/// interaction of the singletons of `I`.
pub fn eta<C: ChainRule + ?Sized>(inst: &C, atom: Atom) -> f64 {
    let n = inst.generators();
    let singles: Vec<Joint> = atom.subset().indices().into_iter().map(Joint::generator).collect();
    interaction(inst, &singles, atom.subset().complement(n)).expect("atoms are nonempty")
}

/// Which `(L_1, ..., L_q, J)` tuples a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Every tuple of joints; requires `n <= 5`.
    Exhaustive,
    /// `per_degree` uniformly drawn tuples for each `q`, reproducible from `seed`.
    Sampled { per_degree: usize, seed: u64 },
}

impl Sweep {
    /// Exhaustive when the diagram is small enough, sampled otherwise.
    pub fn auto(n: usize, seed: u64) -> Sweep {
        if n <= EXHAUSTIVE_MAX_N {
            Sweep::Exhaustive
        } else {
            Sweep::Sampled {
                per_degree: 20_000,
                seed,
            }
        }
    }
}

/// One compared identity: `K_q(L | J)` on the left, `μ(⋂ X̃_{L_k} \ X̃_J)` on the right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub q: usize,
    pub terms: Vec<Joint>,
    pub given: Joint,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramReport {
    pub atom_values: AtomMeasure,
    pub residuals: Vec<Residual>,
    pub max_residual: f64,
}

impl DiagramReport {
    /// The residual with the largest gap (first one on ties).
    pub fn worst(&self) -> Option<&Residual> {
        self.residuals
            .iter()
            .reduce(|best, r| if r.gap > best.gap { r } else { best })
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

fn joint_pair_count(n: usize) -> usize {
    1usize << (2 * n)
}

/// Checks `K_1(1 | Z) = 0` and `K_1(YZ) = K_1(Y) + K_1(Z | Y)` over all pairs
/// (`n <= 6`) or a seeded sample of pairs. Returns the violations beyond `tol`,
/// worst first.
pub fn check_chain_rule<C: ChainRule + ?Sized>(inst: &C, tol: f64, seed: u64) -> Vec<ChainRuleViolation> {
    let n = inst.generators();
    let pairs: Vec<(Joint, Joint)> = if n <= 6 {
        all_joints(n).flat_map(|y| all_joints(n).map(move |z| (y, z))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = full_bits(n);
        (0..joint_pair_count(6))
            .map(|_| {
                (
                    Joint::from_bits(rng.gen_range(0..=top)),
                    Joint::from_bits(rng.gen_range(0..=top)),
                )
            })
            .collect()
    };
    let mut out: Vec<ChainRuleViolation> = Strategy::default()
        .map_slice(&pairs, |&(y, z)| {
            let mut found = Vec::new();
            let unit = inst.conditional(Joint::UNIT, z);
            if unit.abs() > tol || unit.is_nan() {
                found.push(ChainRuleViolation {
                    first: Joint::UNIT,
                    second: z,
                    lhs: unit,
                    rhs: 0.0,
                    gap: unit.abs(),
                });
            }
            let lhs = inst.total(y.join(z));
            let rhs = inst.total(y) + inst.conditional(z, y);
            let gap = (lhs - rhs).abs();
            if gap > tol || gap.is_nan() {
                found.push(ChainRuleViolation {
                    first: y,
                    second: z,
                    lhs,
                    rhs,
                    gap,
                });
            }
            found
        })
        .into_iter()
        .flatten()
        .collect();
    out.sort_by(|a, b| b.gap.total_cmp(&a.gap));
    out
}

/// Compares the recursion against the region measure for every `q <= q_max`
/// and every tuple in the sweep, without checking the chain-rule precondition.
pub fn hu_residuals<C: ChainRule + ?Sized>(inst: &C, q_max: usize, sweep: Sweep) -> Result<DiagramReport> {
    hu_residuals_with(inst, q_max, sweep, Strategy::default())
}

pub fn hu_residuals_with<C: ChainRule + ?Sized>(
    inst: &C,
    q_max: usize,
    sweep: Sweep,
    strategy: Strategy,
) -> Result<DiagramReport> {
    let n = inst.generators();
    check_n(n)?;
    if q_max == 0 {
        return Err(Error::EmptyInteraction);
    }
    if sweep == Sweep::Exhaustive && n > EXHAUSTIVE_MAX_N {
        return Err(Error::GeneratorCount {
            n,
            cap: EXHAUSTIVE_MAX_N,
        });
    }
    let measure = mu_table_with(inst, strategy)?;
    let digit_bits = n as u32;
    let digit_mask = full_bits(n);

    let mut residuals = Vec::new();
    for q in 1..=q_max {
        let tuples: Vec<u64> = match sweep {
            Sweep::Exhaustive => (0..1u64 << (digit_bits as usize * (q + 1))).collect(),
            Sweep::Sampled { per_degree, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (q as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let bits = digit_bits as usize * (q + 1);
                (0..per_degree)
                    .map(|_| {
                        (0..q + 1).fold(0u64, |acc, d| {
                            acc | (rng.gen_range(0..=digit_mask) as u64) << (d * digit_bits as usize)
                        }) & if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 }
                    })
                    .collect()
            }
        };
        let chunk = strategy.map_range_with(
            tuples.len(),
            || Interactions::new(inst),
            |memo, idx| {
                let code = tuples[idx];
                let digit = |d: usize| Joint::from_bits(((code >> (d * digit_bits as usize)) as u32) & digit_mask);
                let terms: Vec<Joint> = (0..q).map(digit).collect();
                let given = digit(q);
                let lhs = memo.eval(&terms, given).expect("q >= 1");
                let region = hu_region(&terms, given, n).expect("n checked above");
                let rhs = measure.measure(&region);
                let gap = (lhs - rhs).abs();
                Residual {
                    q,
                    terms,
                    given,
                    lhs,
                    rhs,
                    gap: if gap.is_nan() { f64::INFINITY } else { gap },
                }
            },
        );
        residuals.extend(chunk);
    }
    let max_residual = residuals.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(DiagramReport {
        atom_values: measure,
        residuals,
        max_residual,
    })
}

/// Validates the chain rule within `tol`, then sweeps the Hu identity.
pub fn verify_hu<C: ChainRule + ?Sized>(inst: &C, q_max: usize, tol: f64, sweep: Sweep) -> Result<DiagramReport> {
    let seed = match sweep {
        Sweep::Sampled { seed, .. } => seed,
        Sweep::Exhaustive => 0,
    };
    let violations = check_chain_rule(inst, tol, seed);
    if !violations.is_empty() {
        return Err(Error::ChainRule(violations));
    }
    hu_residuals(inst, q_max, sweep)
}

/// The instance of terms relative to fixed `Y_1, ..., Y_p` and conditioning `Z`:
/// `K̃_1(V | W) = K_{p+1}(Y_1; ...; Y_p; V | W Z)`.
pub struct Relative<'a, C: ?Sized> {
    base: &'a C,
    fixed: Vec<Joint>,
    given: Joint,
}

impl<C: ChainRule + ?Sized> ChainRule for Relative<'_, C> {
    fn generators(&self) -> usize {
        self.base.generators()
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        let mut terms = self.fixed.clone();
        terms.push(target);
        interaction(self.base, &terms, given.join(self.given)).expect("nonempty terms")
    }
}

impl<C: ?Sized> Relative<'_, C> {
    pub fn fixed(&self) -> &[Joint] {
        &self.fixed
    }

    pub fn given(&self) -> Joint {
        self.given
    }
}

pub fn relative_instance<'a, C: ChainRule + ?Sized>(inst: &'a C, fixed: &[Joint], given: Joint) -> Relative<'a, C> {
    Relative {
        base: inst,
        fixed: fixed.to_vec(),
        given,
    }
}

/// Largest `|acted(Y, Z) - conditional(Y, Z)|` over all pairs of joints.
pub fn action_gap<C: ActionForm + ?Sized>(inst: &C) -> f64 {
    let n = inst.generators();
    let pairs: Vec<(Joint, Joint)> = all_joints(n).flat_map(|y| all_joints(n).map(move |z| (y, z))).collect();
    Strategy::default()
        .map_slice(&pairs, |&(y, z)| (inst.acted(y, z) - inst.conditional(y, z)).abs())
        .into_iter()
        .fold(0.0, f64::max)
}
