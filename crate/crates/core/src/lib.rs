//! Information diagrams for functions obeying the chain rule of information.
//!
//! Any `K_1(Y | Z)` over joints of `n` generators that satisfies
//! `K_1(YZ) = K_1(Y) + K_1(Z | Y)` has a unique additive measure on the
//! `2^n - 1` atoms of the Venn diagram such that every conditional
//! interaction term equals the measure of the matching region. This crate
//! computes that measure, evaluates the interaction terms, and checks the
//! correspondence exhaustively for small `n`.
//!
//! Shipped instances: Shannon and Tsallis entropy, Kullback-Leibler and
//! α-KL divergence, cross-entropy, arbitrary set functions (including
//! submodular ones and a compression-based one), and the advantage derived
//! from the optimal generalization error.

pub mod diagram;
pub mod divergences;
pub mod error;
pub mod exec;
pub mod monoid;
pub mod oracle;
pub mod setfun;
pub mod shannon;

pub use diagram::{
    check_chain_rule, eta, hu_residuals, interaction, interaction_incl_excl, mu_atom, mu_region, mu_table,
    relative_instance, verify_hu, ActionForm, AtomMeasure, ChainRule, DiagramReport, Interactions, Residual, Sweep,
    DEFAULT_TOL,
};
pub use error::{ChainRuleViolation, Error, Result};
pub use exec::Strategy;
pub use monoid::{atoms, circle_region, hu_region, Atom, Joint, Region, N_MAX};
pub use oracle::mobius_oracle;
pub use shannon::{Dist, LogBase, RandomVariable};
