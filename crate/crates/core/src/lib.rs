//! Regular realizability for context-free filters.
//!
//! Given an NFA `A` and a fixed filter language `F`, decide whether
//! `L(A) ∩ F` is nonempty and produce evidence. The crate bundles the
//! machinery around that question: grammar × automaton intersection,
//! rational transducers and their compositions, a transducer realizing
//! `T(D₂) = L(G)`, the marking transformation and the reduction into
//! `S_#^↑`, one-counter automata, substitution collapse, rational index
//! measurement and a divide-and-conquer witness checker.

pub mod automata;
pub mod counter;
pub mod engine;
pub mod error;
pub mod filters;
pub mod gen;
pub mod grammar;
pub mod oracle;
pub mod reductions;
pub mod transducer;

pub use automata::{Nfa, NfaBuilder, Word};

pub use error::{Error, Result};

pub use grammar::Cfg;

pub use counter::CounterAutomaton;
pub use filters::FilterSpec;
pub use transducer::Transducer;
