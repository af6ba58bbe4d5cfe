//! Proof kernel and normalization engine for negative free logic.
//!
//! The library implements natural deduction for eight systems of negative
//! free logic: the intuitionist and classical base calculi (`INF`, `CNF`),
//! their extensions with the ι definite-description operator (`INFι`,
//! `CNFι`), the "primed" variants in which the identity introduction rule is
//! generalised and quantifier/ι rules are restricted to atomic terms
//! (`INFι′`, `CNFι′`), and the Jaśkowski-style reformulations that trade the
//! existence predicate for term judgments (`INF^J`, `CNF^J`).
//!
//! The crate is organised around seven modules:
//!
//! * [`syntax`] — terms, formulas, substitution, degree, subformulas;
//! * [`deduction`] — deduction trees with assumption classes and grafting;
//! * [`calculi`] — system configurations, rule schemas and the checker;
//! * [`analysis`] — segments, maximal segments, rank, paths and the
//!   subformula-property reports;
//! * [`rewrite`] — reduction procedures and the normalization driver;
//! * [`transforms`] — derived-rule constructions and system translations;
//! * [`frontend`] — parsing, printing, the corpus, fuzzing and the CLI.

pub mod analysis;
pub mod calculi;
pub mod deduction;
pub mod frontend;
pub mod rewrite;
pub mod syntax;
pub mod transforms;
