//! Atom values recovered by brute force: solve the dense inclusion-exclusion
//! system `Σ_{p_I ∈ X̃_K} a_I = F_1(X_K)` for every nonempty `K`.
//!
//! This route shares nothing with the closed-form alternating sum in
//! [`crate::diagram::mu_atom`] beyond the unconditional values `F_1`.

use nalgebra::{DMatrix, DVector};

use crate::diagram::{AtomMeasure, ChainRule, EXHAUSTIVE_MAX_N};
use crate::error::{Error, Result};
use crate::monoid::{check_n, full_bits};

/// Relative residual above which the solve is reported as unreliable.
const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

pub fn mobius_oracle<C: ChainRule + ?Sized>(inst: &C) -> Result<AtomMeasure> {
    let n = inst.generators();
    check_n(n)?;
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::GeneratorCount {
            n,
            cap: EXHAUSTIVE_MAX_N,
        });
    }
    let size = full_bits(n) as usize;
    // row r <-> K = r + 1, column c <-> atom p_I with I = c + 1
    let system = DMatrix::from_fn(
        size,
        size,
        |r, c| {
            if (r as u32 + 1) & (c as u32 + 1) != 0 {
                1.0
            } else {
                0.0
            }
        },
    );
    let totals = DVector::from_fn(size, |r, _| inst.total(crate::monoid::Joint::from_bits(r as u32 + 1)));
    let solution = system.clone().lu().solve(&totals).ok_or(Error::SingularSystem {
        residual: f64::INFINITY,
    })?;

    let scale = totals.amax().max(1.0);
    let residual = (&system * &solution - &totals).amax() / scale;
    if residual.is_nan() || residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::SingularSystem { residual });
    }
    Ok(AtomMeasure::from_values(n, solution.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::mu_table;
    use crate::monoid::Joint;

    struct Table(usize, Vec<f64>);

    impl ChainRule for Table {
        fn generators(&self) -> usize {
            self.0
        }
        fn conditional(&self, t: Joint, g: Joint) -> f64 {
            self.1[t.join(g).bits() as usize] - self.1[g.bits() as usize]
        }
    }

    #[test]
    fn single_generator() {
        let t = Table(1, vec![0.0, 0.7]);
        let m = mobius_oracle(&t).unwrap();
        assert_eq!(m.values(), &[0.7]);
    }

    #[test]
    fn agrees_with_closed_form() {
        let values: Vec<f64> = (0..16).map(|i| ((i * 37 % 11) as f64) / 7.0).collect();
        let t = Table(4, values);
        let oracle = mobius_oracle(&t).unwrap();
        let closed = mu_table(&t).unwrap();
        assert!(oracle.max_gap(&closed) < 1e-12);
    }

    #[test]
    fn rejects_large_n() {
        let t = Table(6, vec![0.0; 64]);
        assert!(matches!(mobius_oracle(&t), Err(Error::GeneratorCount { n: 6, cap: 5 })));
    }
}
