//! Compensating CSP with synchronisation: abstract syntax, a compositional
//! trace semantics, a small-step operational semantics, and an executable
//! check that the two agree.
//!
//! ```
//! use ccsp::{check_theorem1, parse, Engine};
//!
//! let term = parse("(a ; throw) ||{a} a").unwrap();
//! let report = check_theorem1(&Engine::new(), &term).unwrap();
//! assert!(report.holds);
//! ```

pub mod carbroker;
pub mod correspondence;
pub mod denotational;
pub mod operational;
pub mod syntax;
pub mod terms;
pub mod trace;

pub use correspondence::{
    check_lemma, check_theorem1, check_theorem1_compensable, check_theorem1_standard, run_campaign,
    CheckError, CheckReport, GenConfig, LemmaKind,
};
pub use denotational::{
    eval_compensable, eval_standard, CompensableDenotation, StandardDenotation,
};
pub use operational::{Engine, EngineError, Mutation};
pub use syntax::{parse, parse_compensable, parse_standard, pretty, ParseError};
pub use terms::{CompensableTerm, Event, Sort, StandardTerm, SyncSet, Term, Terminal};
pub use trace::{Trace, TracePair};
