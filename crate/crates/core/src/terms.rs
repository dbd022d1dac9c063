//! Abstract syntax for standard and compensable process terms.
//!
//! The two sorts are mutually recursive: a compensation pair is built from
//! two standard terms and a transaction block turns a compensable term back
//! into a standard one. [`StandardTerm::Null`] and [`CompensableTerm::Null`]
//! only ever show up as states of the transition system.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Spellings that belong to terminal symbols and can never name an event.
pub const RESERVED_NAMES: [&str; 4] = ["ok", "!", "?", "bot"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("event name must not be empty")]
    EmptyEventName,
    #[error("`{0}` is a reserved terminal spelling and cannot name an event")]
    ReservedEventName(String),
    #[error("an indexed choice needs at least one branch")]
    EmptyChoice,
}

/// An observable action.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(Arc<str>);

impl Event {
    pub fn new(name: impl AsRef<str>) -> Result<Self, TermError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(TermError::EmptyEventName);
        }
        if RESERVED_NAMES.contains(&name) {
            return Err(TermError::ReservedEventName(name.to_string()));
        }
        Ok(Event(Arc::from(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How a trace ends: successful completion, a thrown interrupt, a yield to an
/// interrupt, or partial behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Terminal {
    Tick,
    Bang,
    Query,
    Bot,
}

impl Terminal {
    pub const ALL: [Terminal; 4] = [
        Terminal::Tick,
        Terminal::Bang,
        Terminal::Query,
        Terminal::Bot,
    ];

    pub fn is_partial(self) -> bool {
        self == Terminal::Bot
    }

    /// Concrete spelling used in rendered traces.
    pub fn symbol(self) -> &'static str {
        match self {
            Terminal::Tick => "ok",
            Terminal::Bang => "!",
            Terminal::Query => "?",
            Terminal::Bot => "bot",
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Events two parallel operands must perform jointly.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SyncSet(BTreeSet<Event>);

impl SyncSet {
    pub fn empty() -> Self {
        SyncSet(BTreeSet::new())
    }

    pub fn contains(&self, event: &Event) -> bool {
        self.0.contains(event)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn without(&self, event: &Event) -> SyncSet {
        let mut members = self.0.clone();
        members.remove(event);
        SyncSet(members)
    }
}

impl FromIterator<Event> for SyncSet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        SyncSet(iter.into_iter().collect())
    }
}

/// A standard process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StandardTerm {
    Atom(Event),
    Skip,
    Throw,
    Yield,
    Seq(Box<StandardTerm>, Box<StandardTerm>),
    Choice(Box<StandardTerm>, Box<StandardTerm>),
    /// `P ▷ Q`: run `Q` when `P` throws.
    IntHandler(Box<StandardTerm>, Box<StandardTerm>),
    SyncPar(SyncSet, Box<StandardTerm>, Box<StandardTerm>),
    /// Transaction block `[PP]`.
    Block(Box<CompensableTerm>),
    Null,
}

/// A compensable process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompensableTerm {
    /// Compensation pair `P ÷ Q`.
    Pair(Box<StandardTerm>, Box<StandardTerm>),
    Seq(Box<CompensableTerm>, Box<CompensableTerm>),
    Choice(Box<CompensableTerm>, Box<CompensableTerm>),
    SyncPar(SyncSet, Box<CompensableTerm>, Box<CompensableTerm>),
    Null,
}

/// A term of either sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Standard(StandardTerm),
    Compensable(CompensableTerm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Standard,
    Compensable,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Standard => f.write_str("standard"),
            Sort::Compensable => f.write_str("compensable"),
        }
    }
}

/// The compensable keywords that abbreviate a pair with an empty compensation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Skipp,
    Throww,
    Yieldd,
}

pub fn desugar_keyword(kw: Keyword) -> CompensableTerm {
    let forward = match kw {
        Keyword::Skipp => StandardTerm::Skip,
        Keyword::Throww => StandardTerm::Throw,
        Keyword::Yieldd => StandardTerm::Yield,
    };
    CompensableTerm::pair(forward, StandardTerm::Skip)
}

/// Right fold of binary choice over `branches`.
pub fn indexed_choice(branches: Vec<StandardTerm>) -> Result<StandardTerm, TermError> {
    let mut iter = branches.into_iter().rev();
    let last = iter.next().ok_or(TermError::EmptyChoice)?;
    Ok(iter.fold(last, |acc, branch| StandardTerm::choice(branch, acc)))
}

/// Compensable counterpart of [`indexed_choice`].
pub fn indexed_cchoice(branches: Vec<CompensableTerm>) -> Result<CompensableTerm, TermError> {
    let mut iter = branches.into_iter().rev();
    let last = iter.next().ok_or(TermError::EmptyChoice)?;
    Ok(iter.fold(last, |acc, branch| CompensableTerm::choice(branch, acc)))
}

impl StandardTerm {
    pub fn atom(name: &str) -> Result<Self, TermError> {
        Event::new(name).map(StandardTerm::Atom)
    }

    pub fn seq(p: StandardTerm, q: StandardTerm) -> Self {
        StandardTerm::Seq(Box::new(p), Box::new(q))
    }

    pub fn choice(p: StandardTerm, q: StandardTerm) -> Self {
        StandardTerm::Choice(Box::new(p), Box::new(q))
    }

    pub fn handler(p: StandardTerm, q: StandardTerm) -> Self {
        StandardTerm::IntHandler(Box::new(p), Box::new(q))
    }

    pub fn par(x: SyncSet, p: StandardTerm, q: StandardTerm) -> Self {
        StandardTerm::SyncPar(x, Box::new(p), Box::new(q))
    }

    pub fn block(pp: CompensableTerm) -> Self {
        StandardTerm::Block(Box::new(pp))
    }

    /// Number of syntax nodes. Sync sets are attributes, not nodes.
    pub fn size(&self) -> usize {
        use StandardTerm::*;
        match self {
            Atom(_) | Skip | Throw | Yield | Null => 1,
            Seq(p, q) | Choice(p, q) | IntHandler(p, q) | SyncPar(_, p, q) => {
                1 + p.size() + q.size()
            }
            Block(pp) => 1 + pp.size(),
        }
    }

    pub fn alphabet(&self) -> BTreeSet<Event> {
        let mut out = BTreeSet::new();
        self.collect_alphabet(&mut out);
        out
    }

    fn collect_alphabet(&self, out: &mut BTreeSet<Event>) {
        use StandardTerm::*;
        match self {
            Atom(e) => {
                out.insert(e.clone());
            }
            Skip | Throw | Yield | Null => {}
            Seq(p, q) | Choice(p, q) | IntHandler(p, q) => {
                p.collect_alphabet(out);
                q.collect_alphabet(out);
            }
            SyncPar(x, p, q) => {
                out.extend(x.iter().cloned());
                p.collect_alphabet(out);
                q.collect_alphabet(out);
            }
            Block(pp) => pp.collect_alphabet(out),
        }
    }

    /// True when `Null` occurs anywhere in the tree.
    pub fn contains_null(&self) -> bool {
        use StandardTerm::*;
        match self {
            Null => true,
            Atom(_) | Skip | Throw | Yield => false,
            Seq(p, q) | Choice(p, q) | IntHandler(p, q) | SyncPar(_, p, q) => {
                p.contains_null() || q.contains_null()
            }
            Block(pp) => pp.contains_null(),
        }
    }
}

impl CompensableTerm {
    pub fn pair(p: StandardTerm, q: StandardTerm) -> Self {
        CompensableTerm::Pair(Box::new(p), Box::new(q))
    }

    pub fn seq(pp: CompensableTerm, qq: CompensableTerm) -> Self {
        CompensableTerm::Seq(Box::new(pp), Box::new(qq))
    }

    pub fn choice(pp: CompensableTerm, qq: CompensableTerm) -> Self {
        CompensableTerm::Choice(Box::new(pp), Box::new(qq))
    }

    pub fn par(x: SyncSet, pp: CompensableTerm, qq: CompensableTerm) -> Self {
        CompensableTerm::SyncPar(x, Box::new(pp), Box::new(qq))
    }

    pub fn size(&self) -> usize {
        use CompensableTerm::*;
        match self {
            Null => 1,
            Pair(p, q) => 1 + p.size() + q.size(),
            Seq(pp, qq) | Choice(pp, qq) | SyncPar(_, pp, qq) => 1 + pp.size() + qq.size(),
        }
    }

    pub fn alphabet(&self) -> BTreeSet<Event> {
        let mut out = BTreeSet::new();
        self.collect_alphabet(&mut out);
        out
    }

    fn collect_alphabet(&self, out: &mut BTreeSet<Event>) {
        use CompensableTerm::*;
        match self {
            Null => {}
            Pair(p, q) => {
                p.collect_alphabet(out);
                q.collect_alphabet(out);
            }
            Seq(pp, qq) | Choice(pp, qq) => {
                pp.collect_alphabet(out);
                qq.collect_alphabet(out);
            }
            SyncPar(x, pp, qq) => {
                out.extend(x.iter().cloned());
                pp.collect_alphabet(out);
                qq.collect_alphabet(out);
            }
        }
    }

    pub fn contains_null(&self) -> bool {
        use CompensableTerm::*;
        match self {
            Null => true,
            Pair(p, q) => p.contains_null() || q.contains_null(),
            Seq(pp, qq) | Choice(pp, qq) | SyncPar(_, pp, qq) => {
                pp.contains_null() || qq.contains_null()
            }
        }
    }
}

impl Term {
    pub fn sort(&self) -> Sort {
        match self {
            Term::Standard(_) => Sort::Standard,
            Term::Compensable(_) => Sort::Compensable,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Standard(p) => p.size(),
            Term::Compensable(pp) => pp.size(),
        }
    }

    pub fn alphabet(&self) -> BTreeSet<Event> {
        match self {
            Term::Standard(p) => p.alphabet(),
            Term::Compensable(pp) => pp.alphabet(),
        }
    }
}

impl From<StandardTerm> for Term {
    fn from(p: StandardTerm) -> Self {
        Term::Standard(p)
    }
}

impl From<CompensableTerm> for Term {
    fn from(pp: CompensableTerm) -> Self {
        Term::Compensable(pp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(name: &str) -> Event {
        Event::new(name).unwrap()
    }

    fn atom(name: &str) -> StandardTerm {
        StandardTerm::atom(name).unwrap()
    }

    #[test]
    fn keywords_pair_with_skip() {
        use StandardTerm::*;
        assert_eq!(
            desugar_keyword(Keyword::Skipp),
            CompensableTerm::pair(Skip, Skip)
        );
        assert_eq!(
            desugar_keyword(Keyword::Throww),
            CompensableTerm::pair(Throw, Skip)
        );
        assert_eq!(
            desugar_keyword(Keyword::Yieldd),
            CompensableTerm::pair(Yield, Skip)
        );
    }

    #[test]
    fn indexed_choice_folds_right() {
        assert_eq!(indexed_choice(vec![atom("a")]).unwrap(), atom("a"));
        assert_eq!(
            indexed_choice(vec![atom("a"), atom("b")]).unwrap(),
            StandardTerm::choice(atom("a"), atom("b"))
        );
        assert_eq!(
            indexed_choice(vec![atom("a"), atom("b"), atom("c")]).unwrap(),
            StandardTerm::choice(atom("a"), StandardTerm::choice(atom("b"), atom("c")))
        );
        assert_eq!(indexed_choice(vec![]), Err(TermError::EmptyChoice));
    }

    #[test]
    fn alphabet_includes_sync_sets() {
        assert!(StandardTerm::Skip.alphabet().is_empty());
        let seq = StandardTerm::seq(atom("a"), atom("b"));
        assert_eq!(seq.alphabet(), [ev("a"), ev("b")].into_iter().collect());
        let par = StandardTerm::par(
            [ev("c")].into_iter().collect(),
            atom("a"),
            StandardTerm::Skip,
        );
        assert_eq!(par.alphabet(), [ev("a"), ev("c")].into_iter().collect());
    }

    #[test]
    fn reserved_names_rejected() {
        for name in RESERVED_NAMES {
            assert!(matches!(
                Event::new(name),
                Err(TermError::ReservedEventName(_))
            ));
        }
        assert_eq!(Event::new(""), Err(TermError::EmptyEventName));
        assert_eq!(ev("c.1"), ev("c.1"));
    }

    #[test]
    fn sizes_count_nodes() {
        assert_eq!(StandardTerm::Skip.size(), 1);
        assert_eq!(desugar_keyword(Keyword::Skipp).size(), 3);
        let blk = StandardTerm::block(CompensableTerm::seq(
            CompensableTerm::pair(atom("a"), atom("r")),
            desugar_keyword(Keyword::Throww),
        ));
        assert_eq!(blk.size(), 8);
    }
}
