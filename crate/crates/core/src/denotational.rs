//! Compositional trace semantics.
//!
//! Each clause first computes the nominal traces of the operator and the
//! result is then closed under the partial-behaviour axioms: every prefix of
//! a run may be cut short with `bot`, and a partial forward run carries the
//! canonical `<bot>` compensation.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::terms::{CompensableTerm, StandardTerm, Terminal};
use crate::trace::{parallel_pairs, parallel_traces, seq_traces, Trace, TracePair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenotationError {
    #[error("the null process has no trace denotation")]
    NullTerm,
}

/// Canonical trace set of a standard process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardDenotation(BTreeSet<Trace>);

/// Canonical trace-pair set of a compensable process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompensableDenotation(BTreeSet<TracePair>);

/// One way a denotation can break the closure axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureViolation {
    MissingBot,
    MissingPartialPrefix { of: String, missing: String },
    MissingCompensationPrefix { of: String, missing: String },
    NonCanonicalPartial(String),
}

impl fmt::Display for ClosureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureViolation::MissingBot => f.write_str("<bot> is missing"),
            ClosureViolation::MissingPartialPrefix { of, missing } => {
                write!(f, "{of} present but its partial prefix {missing} is not")
            }
            ClosureViolation::MissingCompensationPrefix { of, missing } => {
                write!(f, "{of} present but compensation prefix {missing} is not")
            }
            ClosureViolation::NonCanonicalPartial(pair) => {
                write!(f, "{pair} is partial but stores a compensation")
            }
        }
    }
}

impl StandardDenotation {
    /// Closes `traces` under the partial-behaviour axioms.
    pub fn closed(traces: BTreeSet<Trace>) -> Self {
        let mut out = traces.clone();
        out.insert(Trace::bot());
        for t in &traces {
            for len in 0..=t.len() {
                out.insert(t.partial_prefix(len));
            }
        }
        StandardDenotation(out)
    }

    pub fn traces(&self) -> &BTreeSet<Trace> {
        &self.0
    }

    pub fn into_traces(self) -> BTreeSet<Trace> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn closure_violations(&self) -> Vec<ClosureViolation> {
        let mut out = Vec::new();
        if !self.0.contains(&Trace::bot()) {
            out.push(ClosureViolation::MissingBot);
        }
        for t in &self.0 {
            for len in 0..t.len() {
                let prefix = t.partial_prefix(len);
                if !self.0.contains(&prefix) {
                    out.push(ClosureViolation::MissingPartialPrefix {
                        of: t.to_string(),
                        missing: prefix.to_string(),
                    });
                }
            }
        }
        out
    }
}

impl CompensableDenotation {
    pub fn closed(pairs: BTreeSet<TracePair>) -> Self {
        let mut out = BTreeSet::new();
        out.insert(TracePair::partial(Trace::bot()));
        for pair in pairs {
            for len in 0..=pair.forward.len() {
                out.insert(TracePair::partial(pair.forward.partial_prefix(len)));
            }
            if pair.forward.is_partial() {
                continue;
            }
            for len in 0..=pair.compensation.len() {
                out.insert(TracePair::new(
                    pair.forward.clone(),
                    pair.compensation.partial_prefix(len),
                ));
            }
            out.insert(pair);
        }
        CompensableDenotation(out)
    }

    pub fn pairs(&self) -> &BTreeSet<TracePair> {
        &self.0
    }

    pub fn into_pairs(self) -> BTreeSet<TracePair> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn closure_violations(&self) -> Vec<ClosureViolation> {
        let mut out = Vec::new();
        if !self.0.contains(&TracePair::partial(Trace::bot())) {
            out.push(ClosureViolation::MissingBot);
        }
        for pair in &self.0 {
            if !pair.is_canonical() {
                out.push(ClosureViolation::NonCanonicalPartial(pair.to_string()));
            }
            for len in 0..pair.forward.len() {
                let prefix = TracePair::partial(pair.forward.partial_prefix(len));
                if !self.0.contains(&prefix) {
                    out.push(ClosureViolation::MissingPartialPrefix {
                        of: pair.to_string(),
                        missing: prefix.to_string(),
                    });
                }
            }
            for len in 0..pair.compensation.len() {
                let prefix =
                    TracePair::new(pair.forward.clone(), pair.compensation.partial_prefix(len));
                if !self.0.contains(&prefix) {
                    out.push(ClosureViolation::MissingCompensationPrefix {
                        of: pair.to_string(),
                        missing: prefix.to_string(),
                    });
                }
            }
        }
        out
    }
}

pub fn eval_standard(term: &StandardTerm) -> Result<StandardDenotation, DenotationError> {
    use StandardTerm::*;
    let nominal: BTreeSet<Trace> = match term {
        Null => return Err(DenotationError::NullTerm),
        Atom(a) => BTreeSet::from([Trace::new(vec![a.clone()], Terminal::Tick)]),
        Skip => BTreeSet::from([Trace::terminal(Terminal::Tick)]),
        Throw => BTreeSet::from([Trace::terminal(Terminal::Bang)]),
        Yield => BTreeSet::from([
            Trace::terminal(Terminal::Query),
            Trace::terminal(Terminal::Tick),
        ]),
        Seq(p, q) => {
            let tp = eval_standard(p)?;
            let tq = eval_standard(q)?;
            let mut out = BTreeSet::new();
            for p in tp.traces() {
                if p.terminal == Terminal::Tick {
                    out.extend(tq.traces().iter().map(|q| seq_traces(p, q)));
                } else {
                    out.insert(p.clone());
                }
            }
            out
        }
        Choice(p, q) => {
            let mut out = eval_standard(p)?.into_traces();
            out.extend(eval_standard(q)?.into_traces());
            out
        }
        IntHandler(p, q) => {
            let tp = eval_standard(p)?;
            let tq = eval_standard(q)?;
            let mut out = BTreeSet::new();
            for p in tp.traces() {
                if p.terminal == Terminal::Bang {
                    out.extend(tq.traces().iter().map(|q| p.splice(q)));
                } else {
                    out.insert(p.clone());
                }
            }
            out
        }
        SyncPar(x, p, q) => {
            let tp = eval_standard(p)?;
            let tq = eval_standard(q)?;
            let mut out = BTreeSet::new();
            for p in tp.traces() {
                for q in tq.traces() {
                    out.extend(parallel_traces(x, p, q));
                }
            }
            out
        }
        Block(pp) => {
            let tpp = eval_compensable(pp)?;
            let mut out = BTreeSet::new();
            for pair in tpp.pairs() {
                match pair.forward.terminal {
                    Terminal::Tick | Terminal::Bot => {
                        out.insert(pair.forward.clone());
                    }
                    Terminal::Bang => {
                        out.insert(pair.forward.splice(&pair.compensation));
                    }
                    // A yield has nothing left to yield to once the block closes.
                    Terminal::Query => {}
                }
            }
            out
        }
    };
    let den = StandardDenotation::closed(nominal);
    debug_assert!(den.closure_violations().is_empty());
    Ok(den)
}

pub fn eval_compensable(term: &CompensableTerm) -> Result<CompensableDenotation, DenotationError> {
    use CompensableTerm::*;
    let nominal: BTreeSet<TracePair> = match term {
        Null => return Err(DenotationError::NullTerm),
        Pair(p, q) => {
            let tp = eval_standard(p)?;
            let tq = eval_standard(q)?;
            let skip = eval_standard(&StandardTerm::Skip)?;
            let mut out = BTreeSet::new();
            for p in tp.traces() {
                match p.terminal {
                    Terminal::Tick => out.extend(
                        tq.traces()
                            .iter()
                            .map(|q| TracePair::new(p.clone(), q.clone())),
                    ),
                    Terminal::Bang | Terminal::Query => out.extend(
                        skip.traces()
                            .iter()
                            .map(|q| TracePair::new(p.clone(), q.clone())),
                    ),
                    Terminal::Bot => {
                        out.insert(TracePair::partial(p.clone()));
                    }
                }
            }
            out
        }
        Seq(pp, qq) => {
            let tpp = eval_compensable(pp)?;
            let tqq = eval_compensable(qq)?;
            let mut out = BTreeSet::new();
            for first in tpp.pairs() {
                match first.forward.terminal {
                    Terminal::Tick => {
                        for second in tqq.pairs() {
                            out.insert(TracePair::new(
                                seq_traces(&first.forward, &second.forward),
                                // compensations run in reverse order
                                seq_traces(&second.compensation, &first.compensation),
                            ));
                        }
                    }
                    Terminal::Bang | Terminal::Query => {
                        out.insert(first.clone());
                    }
                    Terminal::Bot => {
                        out.insert(TracePair::partial(first.forward.clone()));
                    }
                }
            }
            out
        }
        Choice(pp, qq) => {
            let mut out = eval_compensable(pp)?.into_pairs();
            out.extend(eval_compensable(qq)?.into_pairs());
            out
        }
        SyncPar(x, pp, qq) => {
            let tpp = eval_compensable(pp)?;
            let tqq = eval_compensable(qq)?;
            let mut out = BTreeSet::new();
            for left in tpp.pairs() {
                for right in tqq.pairs() {
                    out.extend(parallel_pairs(x, left, right));
                }
            }
            out
        }
    };
    let den = CompensableDenotation::closed(nominal);
    debug_assert!(den.closure_violations().is_empty());
    Ok(den)
}
