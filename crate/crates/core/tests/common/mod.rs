//! Random contexts and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use infodiagram::divergences::DistPair;
use infodiagram::{Dist, Joint, RandomVariable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Context {
    pub p: Dist,
    pub vars: Vec<RandomVariable>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` variables with 2 or 3 values each over `points` sample points. With
/// `zeros`, roughly a fifth of the points get mass 0.
pub fn random_context(rng: &mut ChaCha8Rng, n: usize, points: usize, zeros: bool) -> Context {
    let mut weights: Vec<f64> = (0..points)
        .map(|_| {
            if zeros && rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights[0] = 1.0;
    }
    let vars = (0..n)
        .map(|_| {
            let k = rng.gen_range(2..=3u32);
            RandomVariable::from_labels((0..points).map(|_| rng.gen_range(0..k)))
        })
        .collect();
    Context {
        p: Dist::from_weights(&weights).unwrap(),
        vars,
    }
}

/// `(P, (1-λ)P + λ·uniform)` for a random λ in [0.05, 1].
pub fn smoothed_pair(rng: &mut ChaCha8Rng, p: &Dist) -> DistPair {
    DistPair::smoothed(p.clone(), rng.gen_range(0.05..=1.0)).unwrap()
}

/// Label tuple of the joint of the variables in `mask` at each point.
fn tuples(vars: &[RandomVariable], mask: Joint, w: usize) -> Vec<u32> {
    mask.indices().iter().map(|&i| vars[i - 1].labels()[w]).collect()
}

/// Mass of each distinct label tuple of `X_mask`.
pub fn joint_masses(masses: &[f64], vars: &[RandomVariable], mask: Joint) -> HashMap<Vec<u32>, f64> {
    let mut out = HashMap::new();
    for (w, &m) in masses.iter().enumerate() {
        *out.entry(tuples(vars, mask, w)).or_insert(0.0) += m;
    }
    out
}

/// `H(X_mask)` in nats, straight from the definition.
pub fn entropy_nats(p: &Dist, vars: &[RandomVariable], mask: Joint) -> f64 {
    -joint_masses(p.masses(), vars, mask)
        .values()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * m.ln())
        .sum::<f64>()
}

/// `D(P_{X_mask} ‖ Q_{X_mask})` in nats.
pub fn kl_nats(p: &Dist, q: &Dist, vars: &[RandomVariable], mask: Joint) -> f64 {
    let pm = joint_masses(p.masses(), vars, mask);
    let qm = joint_masses(q.masses(), vars, mask);
    pm.iter()
        .filter(|(_, &m)| m > 0.0)
        .map(|(k, &m)| m * (m / qm[k]).ln())
        .sum()
}

/// Interaction information of the given joints by inclusion-exclusion over
/// brute-force totals: `Σ_{∅≠K⊆[q]} (-1)^{|K|+1} F(∪_{k∈K} L_k ∪ J) - F(J)`,
/// written as `Σ_K (-1)^{|K|+1} (F(L_K ∪ J) - F(J))`.
pub fn incl_excl_oracle(f: impl Fn(Joint) -> f64, terms: &[Joint], given: Joint) -> f64 {
    let q = terms.len();
    let mut total = 0.0;
    for k in 1u32..(1 << q) {
        let mut union = given;
        for (i, t) in terms.iter().enumerate() {
            if k >> i & 1 == 1 {
                union = union.join(*t);
            }
        }
        let sign = if k.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * (f(union) - f(given));
    }
    total
}

/// Every partition of `0..m` as a restricted-growth label vector.
pub fn partitions(m: usize) -> Vec<Vec<u32>> {
    fn grow(prefix: &mut Vec<u32>, m: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |x| x + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), m, &mut out);
    out
}
