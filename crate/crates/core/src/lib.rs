//! Collection, Hall polynomials and residue stratification in free nilpotent groups.

pub mod basis;
pub mod claims;
pub mod collector;
pub mod error;
pub mod expr;
pub mod hallpoly;
pub mod ivp;
pub mod magnus;
pub mod residue;
pub mod strata;
pub mod scalar;

pub use basis::{build_basis, free_basis, witt_count, Basis, BasicCommutator, Definition, GeneratorDecl, Tree};
pub use collector::{substitute, ExponentVector, GroupContext, SubstTarget, Substitution, Word};
pub use error::{Error, Result};
pub use expr::Expr;
pub use hallpoly::{
    expand_power_commutator, hall_expansion, tail_of_power, verify_drcs_table,
    verify_weighted_expansion_gamma3, HallExpansion,
};
pub use ivp::{ivp_from_values, IntegerValuedPolynomial};
pub use magnus::{check_normal_form, magnus_image, MagnusAlgebra, Oracle, TruncatedSeries};
pub use residue::{binom_residue, padic_valuation, verify_residue_stability};
pub use scalar::Exponent;
pub use strata::{in_k, in_n, rv, rv_power_commutator, span_accumulate, RepVector, SpanState, StratificationSpec};

pub use num_bigint::BigInt;

/// Arbitrary precision group context.
pub type Group = GroupContext<BigInt>;
/// Arbitrary precision normal form.
pub type Element = ExponentVector<BigInt>;
/// Fixed-width context; overflow panics under checked builds.
pub type Group128 = GroupContext<i128>;
pub type Group64 = GroupContext<i64>;
