//! The free commutative idempotent monoid on `n` generators, the atoms of the
//! `n`-set Venn diagram, and regions (sets of atoms).
//!
//! Generators are numbered from 1 in every public constructor and in display
//! output, matching the usual `X_1, ..., X_n` naming. Internally generator `i`
//! is bit `i - 1`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on the generator count.
pub const N_MAX: usize = 12;

/// Hard ceiling no override can exceed; regions are dense bitsets over `2^n - 1` atoms.
pub const N_HARD_LIMIT: usize = 20;

/// The generator cap in force: `INFODIAGRAM_MAX_N` if set and parseable, else [`N_MAX`].
pub fn n_max() -> usize {
    std::env::var("INFODIAGRAM_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.clamp(1, N_HARD_LIMIT))
        .unwrap_or(N_MAX)
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    let cap = n_max();
    if n == 0 || n > cap {
        return Err(Error::GeneratorCount { n, cap });
    }
    Ok(())
}

/// A joint of generators, `X_I` for `I ⊆ [n]`. Multiplication is union of
/// the index sets, so idempotence and commutativity hold structurally.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Joint(u32);

impl Joint {
    /// The neutral element `1` (the empty joint).
    pub const UNIT: Joint = Joint(0);

    pub const fn from_bits(bits: u32) -> Self {
        Joint(bits)
    }

    /// `X_I` from 1-based generator indices. Panics on index 0 or above 32.
    pub fn of(indices: &[usize]) -> Self {
        Joint(indices.iter().fold(0u32, |acc, &i| {
            assert!((1..=32).contains(&i), "generator index {i} out of range");
            acc | 1 << (i - 1)
        }))
    }

    /// The single generator `X_i`, 1-based.
    pub fn generator(i: usize) -> Self {
        Joint::of(&[i])
    }

    /// `X_[n]`, the joint of all generators.
    pub fn full(n: usize) -> Self {
        Joint(full_bits(n))
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn is_unit(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn join(self, other: Joint) -> Joint {
        Joint(self.0 | other.0)
    }

    pub const fn meet(self, other: Joint) -> Joint {
        Joint(self.0 & other.0)
    }

    pub const fn without(self, other: Joint) -> Joint {
        Joint(self.0 & !other.0)
    }

    pub const fn contains(self, other: Joint) -> bool {
        self.0 & other.0 == other.0
    }

    pub const fn intersects(self, other: Joint) -> bool {
        self.0 & other.0 != 0
    }

    /// Complement inside `[n]`.
    pub const fn complement(self, n: usize) -> Joint {
        Joint(!self.0 & full_bits(n))
    }

    /// Sorted 1-based generator indices.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    /// All subsets of `self`, ascending by mask.
    pub fn subsets(self) -> impl Iterator<Item = Joint> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            // standard "next submask in increasing order" step
            next = if cur == full {
                None
            } else {
                Some(((cur | !full).wrapping_add(1)) & full)
            };
            Some(Joint(cur))
        })
    }
}

pub(crate) const fn full_bits(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Every joint of `n` generators including the unit, ascending by mask.
pub fn all_joints(n: usize) -> impl Iterator<Item = Joint> {
    (0..=full_bits(n)).map(Joint)
}

impl fmt::Display for Joint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for Joint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{self}")
    }
}

impl Serialize for Joint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

/// An atom `p_I` of the Venn diagram, `I` a nonempty subset of `[n]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

impl Atom {
    pub fn new(subset: Joint) -> Option<Atom> {
        (!subset.is_unit()).then_some(Atom(subset.0))
    }

    /// `p_I` from 1-based indices. Panics on an empty list.
    pub fn of(indices: &[usize]) -> Atom {
        Atom::new(Joint::of(indices)).expect("atoms are indexed by nonempty subsets")
    }

    pub const fn subset(self) -> Joint {
        Joint(self.0)
    }

    pub(crate) const fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) const fn from_slot(slot: usize) -> Atom {
        Atom(slot as u32 + 1)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<String> = self.subset().indices().iter().map(|i| i.to_string()).collect();
        write!(f, "p_{}", digits.join(""))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.subset().serialize(s)
    }
}

/// All `2^n - 1` atoms in ascending mask order.
pub fn atoms(n: usize) -> Result<Vec<Atom>> {
    check_n(n)?;
    Ok((1..=full_bits(n)).map(Atom).collect())
}

/// A set of atoms of the `n`-generator diagram, stored as a dense bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Region {
    n: usize,
    words: Vec<u64>,
}

impl Region {
    pub fn empty(n: usize) -> Region {
        let slots = full_bits(n) as usize;
        Region {
            n,
            words: vec![0; slots.div_ceil(64)],
        }
    }

    /// The whole diagram.
    pub fn all(n: usize) -> Region {
        let mut r = Region::empty(n);
        for slot in 0..full_bits(n) as usize {
            r.words[slot / 64] |= 1 << (slot % 64);
        }
        r
    }

    pub fn from_atoms(n: usize, atoms: impl IntoIterator<Item = Atom>) -> Region {
        let mut r = Region::empty(n);
        for a in atoms {
            r.insert(a);
        }
        r
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, atom: Atom) {
        let s = atom.slot();
        assert!(
            s < full_bits(self.n) as usize,
            "{atom} is not an atom of an {}-set diagram",
            self.n
        );
        self.words[s / 64] |= 1 << (s % 64);
    }

    pub fn contains(&self, atom: Atom) -> bool {
        let s = atom.slot();
        s < full_bits(self.n) as usize && self.words[s / 64] >> (s % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Member atoms in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = Atom> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(Atom::from_slot(wi * 64 + b))
            })
        })
    }

    fn zip_with(&self, other: &Region, op: impl Fn(u64, u64) -> u64) -> Region {
        assert_eq!(self.n, other.n, "regions of different diagrams");
        Region {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `X̃_I`: the atoms `p_J` with `J ∩ I ≠ ∅`.
pub fn circle_region(joint: Joint, n: usize) -> Result<Region> {
    check_n(n)?;
    let mut r = Region::empty(n);
    for bits in 1..=full_bits(n) {
        if bits & joint.bits() != 0 {
            r.insert(Atom(bits));
        }
    }
    Ok(r)
}

/// `⋂_k X̃_{L_k} \ X̃_J`, by direct membership: `p_I` belongs iff `I` meets
/// every `L_k` and misses `J`.
pub fn hu_region(terms: &[Joint], given: Joint, n: usize) -> Result<Region> {
    check_n(n)?;
    if terms.is_empty() {
        return Err(Error::EmptyInteraction);
    }
    let mut r = Region::empty(n);
    for bits in 1..=full_bits(n) {
        let i = Joint(bits);
        if !i.intersects(given) && terms.iter().all(|l| i.intersects(*l)) {
            r.insert(Atom(bits));
        }
    }
    Ok(r)
}
