//! Minimal free resolutions of monomial ideals with linear quotients, built as
//! iterated mapping cones, together with the cell complexes that support them.

pub mod cointerval;
pub mod complex;
pub mod corpus;
pub mod decomp;
pub mod ek;
pub mod error;
pub mod ideal;
pub mod linalg;
pub mod monomial;
pub mod rule;
pub mod verify;

pub use complex::{
    check_dd_zero, check_minimal, ht_resolution, iterated_cone_resolution, koszul_complex,
    mapping_cone, rule_resolution, BasisLabel, ChainMap, LabeledChainComplex, SparseMatrix, Symbol,
};
pub use cointerval::{build_hom_complex, homcone_resolution, is_cointerval, DGraph, HomComplex};
pub use corpus::{gen_corpus, CorpusEntry, CorpusSpec};
pub use decomp::{combinatorial_type, enumerate_regular_rules, rule_family};
pub use ek::{build_ek_cw, cellular_chain_complex, CwComplex, GlueCell};
pub use error::{Error, Result};
pub use ideal::{find_linear_quotient_order, parse_ideal, OrderedIdeal};
pub use monomial::Monomial;
pub use linalg::RankConfig;
pub use rule::{ChainPolicy, DecompRule};
pub use verify::{check_cellular_resolution, multigraded_betti, taylor_complex, BettiTable};
