//! Instances whose chain rule holds by construction: arbitrary set functions,
//! submodular information functions, the advantage of the optimal
//! generalization error, and a compression-based information function.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use serde::Serialize;

use crate::diagram::ChainRule;
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::monoid::{all_joints, check_n, full_bits, Joint};
use crate::shannon::{entropy, joint, Dist, LogBase, RandomVariable};

/// Tolerance for the submodularity, normalization and monotonicity checks.
pub const SUBMODULAR_TOL: f64 = 1e-12;

/// Deflate level used by [`Deflate::default`].
pub const DEFLATE_LEVEL: u32 = 9;

/// A real function on the subsets of `[n]`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetFunction {
    n: usize,
    values: Vec<f64>,
}

impl SetFunction {
    /// `values[mask]` for every mask in `0..2^n`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<SetFunction> {
        check_n(n)?;
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::SetFunctionSize {
                n,
                expected,
                found: values.len(),
            });
        }
        Ok(SetFunction { n, values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(Joint) -> f64) -> Result<SetFunction> {
        check_n(n)?;
        SetFunction::new(n, all_joints(n).map(f).collect())
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: Joint) -> f64 {
        self.values[a.bits() as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `R_1(A | B) = R(A ∪ B) - R(B)`.
#[derive(Debug, Clone)]
pub struct R1Instance {
    r: SetFunction,
}

pub fn r1_instance(r: &SetFunction) -> R1Instance {
    R1Instance { r: r.clone() }
}

impl R1Instance {
    pub fn set_function(&self) -> &SetFunction {
        &self.r
    }
}

impl ChainRule for R1Instance {
    fn generators(&self) -> usize {
        self.r.n
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        self.r.get(target.join(given)) - self.r.get(given)
    }
}

/// Why a set function is not a submodular information function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SubmodularWitness {
    /// `R(∅) ≠ 0`.
    Normalization { value: f64 },
    /// `a ⊂ b` with `R(a) > R(b)`.
    Monotonicity { a: Joint, b: Joint },
    /// `R(a) + R(b) < R(a ∪ b) + R(a ∩ b)`.
    Submodularity { a: Joint, b: Joint },
}

/// Whether `R` is normalized, monotone and submodular within
/// [`SUBMODULAR_TOL`], with the first violation found otherwise.
pub fn is_submodular(r: &SetFunction) -> (bool, Option<SubmodularWitness>) {
    let w = submodular_witness(r);
    (w.is_none(), w)
}

fn submodular_witness(r: &SetFunction) -> Option<SubmodularWitness> {
    let empty = r.get(Joint::UNIT);
    if empty.abs() > SUBMODULAR_TOL {
        return Some(SubmodularWitness::Normalization { value: empty });
    }
    let full = full_bits(r.n);
    // one-element extensions suffice for monotonicity
    for a in all_joints(r.n) {
        for i in 1..=r.n {
            let b = a.join(Joint::generator(i));
            if b != a && r.get(a) > r.get(b) + SUBMODULAR_TOL {
                return Some(SubmodularWitness::Monotonicity { a, b });
            }
        }
    }
    for a in 0..=full {
        for b in a + 1..=full {
            if a & b == a || a & b == b {
                continue;
            }
            let (ja, jb) = (Joint::from_bits(a), Joint::from_bits(b));
            let lhs = r.get(ja) + r.get(jb);
            let rhs = r.get(ja.join(jb)) + r.get(ja.meet(jb));
            if lhs + SUBMODULAR_TOL < rhs {
                return Some(SubmodularWitness::Submodularity { a: ja, b: jb });
            }
        }
    }
    None
}

/// `I(a; b | c) = R(a ∪ c) + R(b ∪ c) - R(a ∪ b ∪ c) - R(c)`, grouped as
/// `R_1(a | c) - R_1(a | b ∪ c)` so it matches the interaction recursion bit for bit.
pub fn conditional_mutual(r: &SetFunction, a: Joint, b: Joint, c: Joint) -> f64 {
    let first = r.get(a.join(c)) - r.get(c);
    let second = r.get(a.join(b).join(c)) - r.get(b.join(c));
    first - second
}

/// Optimal generalization error `E(A)` for each feature subset `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisEvaluator {
    errors: SetFunction,
}

impl HypothesisEvaluator {
    pub fn new(n: usize, errors: Vec<f64>) -> Result<HypothesisEvaluator> {
        Ok(HypothesisEvaluator {
            errors: SetFunction::new(n, errors)?,
        })
    }

    pub fn from_set_function(errors: SetFunction) -> HypothesisEvaluator {
        HypothesisEvaluator { errors }
    }

    pub fn features(&self) -> usize {
        self.errors.n
    }

    pub fn error(&self, a: Joint) -> f64 {
        self.errors.get(a)
    }

    pub fn errors(&self) -> &SetFunction {
        &self.errors
    }

    /// `E(B) <= E(A) + tol` whenever `A ⊆ B`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        let n = self.errors.n;
        all_joints(n).all(|a| (1..=n).all(|i| self.error(a.join(Joint::generator(i))) <= self.error(a) + tol))
    }
}

/// `Ad(A | B) = E(B) - E(A ∪ B)`.
#[derive(Debug, Clone)]
pub struct AdvantageInstance {
    e: HypothesisEvaluator,
}

pub fn advantage_instance(e: &HypothesisEvaluator) -> AdvantageInstance {
    AdvantageInstance { e: e.clone() }
}

impl AdvantageInstance {
    pub fn evaluator(&self) -> &HypothesisEvaluator {
        &self.e
    }
}

impl ChainRule for AdvantageInstance {
    fn generators(&self) -> usize {
        self.e.features()
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        self.e.error(given) - self.e.error(target.join(given))
    }
}

/// The Bayes-optimal log-loss for predicting `target` from each feature
/// subset: `E(A) = H(target | features in A)`.
pub fn bayes_error_evaluator(
    p: &Dist,
    features: &[RandomVariable],
    target: &RandomVariable,
    base: LogBase,
) -> Result<HypothesisEvaluator> {
    let n = features.len();
    check_n(n)?;
    for v in features.iter().chain(std::iter::once(target)) {
        if v.sample_points() != p.len() {
            return Err(Error::SampleSpaceMismatch {
                what: "feature or target variable",
                expected: p.len(),
                found: v.sample_points(),
            });
        }
    }
    let mut errors = Vec::with_capacity(1 << n);
    for a in all_joints(n) {
        let mut feats = RandomVariable::constant(p.len());
        for i in a.indices() {
            feats = joint(&feats, &features[i - 1])?;
        }
        let with_target = joint(&feats, target)?;
        errors.push(entropy(p, &with_target, base) - entropy(p, &feats, base));
    }
    HypothesisEvaluator::new(n, errors)
}

/// Bytes in, bytes out. Must be deterministic and free of shared state.
pub trait Compressor: Sync {
    /// Identity and settings, recorded in report metadata.
    fn name(&self) -> String;

    fn compress(&self, input: &[u8]) -> std::result::Result<Vec<u8>, String>;
}

/// Raw deflate at a fixed level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deflate {
    pub level: u32,
}

impl Default for Deflate {
    fn default() -> Self {
        Deflate { level: DEFLATE_LEVEL }
    }
}

impl Compressor for Deflate {
    fn name(&self) -> String {
        format!("deflate (flate2, level {})", self.level)
    }

    fn compress(&self, input: &[u8]) -> std::result::Result<Vec<u8>, String> {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(self.level));
        enc.write_all(input).map_err(|e| e.to_string())?;
        enc.finish().map_err(|e| e.to_string())
    }
}

/// Blobs at the indices of `subset`, ascending, each prefixed by its length
/// as a little-endian `u64`.
pub fn canonical_encoding(blobs: &[Vec<u8>], subset: Joint) -> Vec<u8> {
    let mut out = Vec::new();
    for i in subset.indices() {
        let blob = &blobs[i - 1];
        out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
        out.extend_from_slice(blob);
    }
    out
}

/// `R(S)` = compressed length in bytes of the canonical encoding of `S`.
pub fn compressor_setfunction<C: Compressor + ?Sized>(blobs: &[Vec<u8>], c: &C) -> Result<SetFunction> {
    compressor_setfunction_with(blobs, c, Strategy::default())
}

pub fn compressor_setfunction_with<C: Compressor + ?Sized>(
    blobs: &[Vec<u8>],
    c: &C,
    strategy: Strategy,
) -> Result<SetFunction> {
    let n = blobs.len();
    check_n(n)?;
    let lengths = strategy.map_range(1 << n, |mask| {
        let subset = Joint::from_bits(mask as u32);
        c.compress(&canonical_encoding(blobs, subset))
            .map(|out| out.len() as f64)
            .map_err(|message| Error::Compressor { subset, message })
    });
    SetFunction::new(n, lengths.into_iter().collect::<Result<Vec<_>>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{interaction, verify_hu, Sweep};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xor() -> (Dist, Vec<RandomVariable>) {
        let p = Dist::new(vec![0.25, 0.0, 0.0, 0.25, 0.0, 0.25, 0.25, 0.0]).unwrap();
        let bit = |k: u32| RandomVariable::from_labels((0..8u32).map(|i| (i >> (2 - k)) & 1));
        (p, vec![bit(0), bit(1), bit(2)])
    }

    #[test]
    fn size_is_checked() {
        assert!(matches!(
            SetFunction::new(2, vec![0.0; 3]),
            Err(Error::SetFunctionSize {
                expected: 4,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn constant_and_modular() {
        let c = r1_instance(&SetFunction::from_fn(3, |_| 2.5).unwrap());
        let m = r1_instance(&SetFunction::from_fn(3, |a| a.len() as f64).unwrap());
        let (x1, x2, x3) = (Joint::of(&[1]), Joint::of(&[2]), Joint::of(&[3]));
        assert_eq!(interaction(&c, &[x1, x2], x3).unwrap(), 0.0);
        assert_eq!(interaction(&c, &[x1.join(x3)], Joint::UNIT).unwrap(), 0.0);
        assert_eq!(interaction(&m, &[x1, x2], Joint::UNIT).unwrap(), 0.0);
        assert_eq!(interaction(&m, &[x1, x2, x3], Joint::UNIT).unwrap(), 0.0);
    }

    #[test]
    fn random_set_function_diagram() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = SetFunction::from_fn(4, |_| rng.gen_range(-3.0..3.0)).unwrap();
        let report = verify_hu(&r1_instance(&r), 3, 1e-12, Sweep::Exhaustive).unwrap();
        assert!(report.max_residual <= 1e-12);
    }

    #[test]
    fn submodularity() {
        let modular = SetFunction::from_fn(3, |a| a.len() as f64).unwrap();
        assert_eq!(is_submodular(&modular), (true, None));

        let (p, v) = xor();
        let h = SetFunction::from_fn(3, |a| {
            let mut x = RandomVariable::constant(8);
            for i in a.indices() {
                x = joint(&x, &v[i - 1]).unwrap();
            }
            entropy(&p, &x, LogBase::Bits)
        })
        .unwrap();
        assert!(is_submodular(&h).0);

        let bad = SetFunction::new(2, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(
            is_submodular(&bad),
            (
                false,
                Some(SubmodularWitness::Submodularity {
                    a: Joint::of(&[1]),
                    b: Joint::of(&[2])
                })
            )
        );
        let shifted = SetFunction::new(1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            is_submodular(&shifted).1,
            Some(SubmodularWitness::Normalization { .. })
        ));
        let falling = SetFunction::new(1, vec![0.0, -1.0]).unwrap();
        assert!(matches!(
            is_submodular(&falling).1,
            Some(SubmodularWitness::Monotonicity { .. })
        ));
    }

    #[test]
    fn conditional_mutual_matches_interaction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = SetFunction::from_fn(4, |_| rng.gen_range(0.0..5.0)).unwrap();
        let inst = r1_instance(&r);
        for a in all_joints(4) {
            for b in all_joints(4) {
                for c in [Joint::UNIT, Joint::of(&[2]), Joint::of(&[1, 4])] {
                    assert_eq!(conditional_mutual(&r, a, b, c), interaction(&inst, &[a, b], c).unwrap());
                }
                assert_eq!(conditional_mutual(&r, a, b, a), 0.0);
            }
        }
        let modular = SetFunction::from_fn(3, |a| a.len() as f64).unwrap();
        assert_eq!(
            conditional_mutual(&modular, Joint::of(&[1]), Joint::of(&[2]), Joint::of(&[3])),
            0.0
        );
    }

    #[test]
    fn xor_conditional_mutual() {
        let (p, v) = xor();
        let h = SetFunction::from_fn(3, |a| {
            let mut x = RandomVariable::constant(8);
            for i in a.indices() {
                x = joint(&x, &v[i - 1]).unwrap();
            }
            entropy(&p, &x, LogBase::Bits)
        })
        .unwrap();
        let (x, y, z) = (Joint::of(&[1]), Joint::of(&[2]), Joint::of(&[3]));
        assert_eq!(conditional_mutual(&h, x, y, Joint::UNIT), 0.0);
        assert_eq!(conditional_mutual(&h, x, y, z), 1.0);
    }

    #[test]
    fn xor_advantage() {
        let (p, v) = xor();
        let e = bayes_error_evaluator(&p, &v[..2], &v[2], LogBase::Bits).unwrap();
        assert_eq!(e.errors().values(), &[1.0, 1.0, 1.0, 0.0]);
        let ad = advantage_instance(&e);
        assert_eq!(
            interaction(&ad, &[Joint::of(&[1]), Joint::of(&[2])], Joint::UNIT).unwrap(),
            -1.0
        );
    }

    #[test]
    fn bayes_error_edge_cases() {
        let p = Dist::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f1 = RandomVariable::from_labels([0, 0, 1, 1]);
        let f2 = RandomVariable::from_labels([0, 1, 0, 1]);
        let e = bayes_error_evaluator(&p, &[f1.clone(), f2.clone()], &f1, LogBase::Nats).unwrap();
        assert_eq!(e.error(Joint::of(&[1])), 0.0);
        assert!(e.is_monotone(1e-12));

        let u = Dist::uniform(4);
        let t = RandomVariable::from_labels([0, 1, 1, 0]);
        let e = bayes_error_evaluator(&u, &[f1], &t, LogBase::Bits).unwrap();
        assert_eq!(e.errors().values(), &[1.0, 1.0]);
        assert!(advantage_instance(&e).conditional(Joint::of(&[1]), Joint::UNIT).abs() < 1e-15);
    }

    #[test]
    fn degree_two_advantage_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = HypothesisEvaluator::new(4, (0..16).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap();
        let ad = advantage_instance(&e);
        for a in all_joints(4) {
            for b in all_joints(4) {
                let direct = e.error(Joint::UNIT) - e.error(a) - e.error(b) + e.error(a.join(b));
                assert_abs_diff_eq!(interaction(&ad, &[a, b], Joint::UNIT).unwrap(), direct, epsilon = 1e-12);
            }
        }
    }

    struct Failing;

    impl Compressor for Failing {
        fn name(&self) -> String {
            "failing".into()
        }

        fn compress(&self, input: &[u8]) -> std::result::Result<Vec<u8>, String> {
            if input.len() > 20 {
                Err("input too long".into())
            } else {
                Ok(input.to_vec())
            }
        }
    }

    #[test]
    fn compressor_set_function() {
        let b = b"abracadabra abracadabra abracadabra".to_vec();
        let blobs = vec![b.clone(), b, b"completely different bytes".to_vec()];
        let r = compressor_setfunction(&blobs, &Deflate::default()).unwrap();
        let again = compressor_setfunction_with(&blobs, &Deflate::default(), Strategy::Sequential).unwrap();
        assert_eq!(r, again);
        assert!(r.get(Joint::UNIT) > 0.0);
        assert_eq!(canonical_encoding(&blobs, Joint::UNIT), Vec::<u8>::new());
        let enc = canonical_encoding(&blobs, Joint::of(&[3, 1]));
        assert_eq!(&enc[..8], &(blobs[0].len() as u64).to_le_bytes());
        let report = verify_hu(&r1_instance(&r), 3, 1e-12, Sweep::Exhaustive).unwrap();
        assert!(report.max_residual <= 1e-12);
    }

    #[test]
    fn compressor_failure_names_subset() {
        let blobs = vec![vec![1u8; 4], vec![2u8; 4]];
        match compressor_setfunction(&blobs, &Failing) {
            Err(Error::Compressor { subset, .. }) => assert_eq!(subset, Joint::of(&[1, 2])),
            other => panic!("{other:?}"),
        }
    }
}
