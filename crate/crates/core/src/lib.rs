//! Valuation-based systems.
//!
//! Knowledge about a set of variables is a [`Valuation`]: a table for the
//! probability, kappa (ranking) and possibility calculi, or a mass function
//! for belief functions. Three operators act on valuations: combination
//! ([`combine`]), marginalization ([`marginalize`]) and removal
//! ([`remove`]). On top of them sit the fusion algorithm for local
//! computation of marginals ([`fusion`]), factorization-based independence
//! queries ([`independence`]), a randomized axiom audit ([`audit`]) and the
//! JSON model format ([`model`]).

pub mod audit;
pub mod bench;
pub mod calculi;
pub mod domain;
pub mod error;
pub mod format;
pub mod fusion;
pub mod independence;
pub mod model;
pub mod random;
pub mod valuation;

pub use calculi::{combine, combine_all, marginalize, marginalize_to, remove};
pub use calculi::{ConfigSet, MassValuation};
pub use domain::{project_config, Configuration, Domain, Registry, VarId, Variable};
pub use error::{Error, Result};
pub use valuation::{
    classify, identity_for, is_identity_for, normalize, support_identity, valuations_equal,
    zero_for, Calculus, ClassFlags, TabularValuation, Valuation, DEFAULT_TOL,
};
