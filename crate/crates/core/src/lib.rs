//! Binary-driven Fibonacci-type recurrences: exact ratio computation,
//! automaticity proofs by guess-and-verify and window transduction, and the
//! orbit classification of ratios for ultimately periodic drivers.

pub mod automata;
pub mod dfaoguess;
pub mod dynamics;
pub mod polyrat;
pub mod ptm;
pub mod seqcore;
pub mod transduce;
