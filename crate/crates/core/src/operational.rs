//! Small-step operational semantics and derived traces.
//!
//! There are no silent transitions. Wherever a process "continues as"
//! another one (after `ok` in a sequence, after `!` in a handler or block),
//! the successor's transitions are surfaced directly from the composite.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::terms::{CompensableTerm, Event, StandardTerm, SyncSet, Term, Terminal};
use crate::trace::{sync_terminal, Trace, TracePair};

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("state bound of {bound} exceeded while exploring the transition system")]
    StateBound { bound: usize },
    #[error("derived traces are undefined for the null process")]
    NullTerm,
}

/// Deliberate rule defects, used to show the correspondence checker notices
/// a broken engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// No universal `bot` transition.
    DropUniversalBottom,
    /// No deadlock-specific `bot` transitions for the parallel operators.
    DropDeadlockClauses,
    /// Compensations of a compensable sequence run in forward order.
    ReverseCompensationOrder,
}

/// A state of the transition system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Standard(StandardTerm),
    Compensable(CompensableTerm),
}

impl From<Term> for State {
    fn from(term: Term) -> Self {
        match term {
            Term::Standard(p) => State::Standard(p),
            Term::Compensable(pp) => State::Compensable(pp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Event(Event),
    Terminal(Terminal),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Event(e) => write!(f, "{e}"),
            Label::Terminal(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub label: Label,
    pub target: State,
}

/// An explicit transition system, states numbered in discovery order.
#[derive(Debug, Clone, Default)]
pub struct Lts {
    pub states: Vec<State>,
    pub edges: Vec<(usize, Label, usize)>,
}

type NormalStd = BTreeSet<(Event, StandardTerm)>;
type TerminalStd = BTreeSet<(Terminal, StandardTerm)>;
type NormalComp = BTreeSet<(Event, CompensableTerm)>;

/// The transition rules, optionally with one rule broken.
#[derive(Debug, Clone)]
pub struct Engine {
    mutation: Option<Mutation>,
    state_bound: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            mutation: None,
            state_bound: DEFAULT_STATE_BOUND,
        }
    }
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = Some(mutation);
        self
    }

    pub fn with_state_bound(mut self, bound: usize) -> Self {
        self.state_bound = bound;
        self
    }

    pub fn mutation(&self) -> Option<Mutation> {
        self.mutation
    }

    pub fn state_bound(&self) -> usize {
        self.state_bound
    }

    fn universal_bottom(&self) -> bool {
        self.mutation != Some(Mutation::DropUniversalBottom)
    }

    fn deadlock_clauses(&self) -> bool {
        self.mutation != Some(Mutation::DropDeadlockClauses)
    }

    pub fn normal_steps_standard(&self, term: &StandardTerm) -> NormalStd {
        use StandardTerm::*;
        let mut out = NormalStd::new();
        match term {
            Atom(a) => {
                out.insert((a.clone(), Skip));
            }
            Skip | Throw | Yield | Null => {}
            Seq(p, q) => {
                for (a, p2) in self.normal_steps_standard(p) {
                    out.insert((a, StandardTerm::seq(p2, (**q).clone())));
                }
                if self.terminates_with(p, Terminal::Tick) {
                    out.extend(self.normal_steps_standard(q));
                }
            }
            Choice(p, q) => {
                out.extend(self.normal_steps_standard(p));
                out.extend(self.normal_steps_standard(q));
            }
            IntHandler(p, q) => {
                for (a, p2) in self.normal_steps_standard(p) {
                    out.insert((a, StandardTerm::handler(p2, (**q).clone())));
                }
                if self.terminates_with(p, Terminal::Bang) {
                    out.extend(self.normal_steps_standard(q));
                }
            }
            SyncPar(x, p, q) => {
                let left = self.normal_steps_standard(p);
                let right = self.normal_steps_standard(q);
                for (a, p2) in &left {
                    if x.contains(a) {
                        for (b, q2) in right.iter().filter(|(b, _)| b == a) {
                            out.insert((
                                b.clone(),
                                StandardTerm::par(x.clone(), p2.clone(), q2.clone()),
                            ));
                        }
                    } else {
                        out.insert((
                            a.clone(),
                            StandardTerm::par(x.clone(), p2.clone(), (**q).clone()),
                        ));
                    }
                }
                for (b, q2) in right.into_iter().filter(|(b, _)| !x.contains(b)) {
                    out.insert((b, StandardTerm::par(x.clone(), (**p).clone(), q2)));
                }
            }
            Block(pp) => {
                for (a, pp2) in self.normal_steps_compensable(pp) {
                    out.insert((a, StandardTerm::block(pp2)));
                }
                for (w, comp) in self.terminal_steps_compensable(pp) {
                    if w == Terminal::Bang {
                        out.extend(self.normal_steps_standard(&comp));
                    }
                }
            }
        }
        out
    }

    pub fn terminal_steps_standard(&self, term: &StandardTerm) -> TerminalStd {
        use StandardTerm::*;
        let mut labels = BTreeSet::new();
        match term {
            Null => return TerminalStd::new(),
            Atom(_) => {}
            Skip => {
                labels.insert(Terminal::Tick);
            }
            Throw => {
                labels.insert(Terminal::Bang);
            }
            Yield => {
                labels.insert(Terminal::Query);
                labels.insert(Terminal::Tick);
            }
            Seq(p, q) => {
                for w in self.terminal_labels(p) {
                    if w == Terminal::Tick {
                        labels.extend(self.terminal_labels(q));
                    } else {
                        labels.insert(w);
                    }
                }
            }
            Choice(p, q) => {
                labels.extend(self.terminal_labels(p));
                labels.extend(self.terminal_labels(q));
            }
            IntHandler(p, q) => {
                for w in self.terminal_labels(p) {
                    if w == Terminal::Bang {
                        labels.extend(self.terminal_labels(q));
                    } else {
                        labels.insert(w);
                    }
                }
            }
            SyncPar(x, p, q) => {
                let left = self.terminal_labels(p);
                let right = self.terminal_labels(q);
                for &w1 in &left {
                    for &w2 in &right {
                        labels.insert(sync_terminal(w1, w2));
                    }
                }
                if self.deadlock_clauses() && self.std_deadlocks(x, p, q, &left, &right) {
                    labels.insert(Terminal::Bot);
                }
            }
            Block(pp) => {
                for (w, comp) in self.terminal_steps_compensable(pp) {
                    match w {
                        Terminal::Tick | Terminal::Bot => {
                            labels.insert(w);
                        }
                        Terminal::Bang => labels.extend(self.terminal_labels(&comp)),
                        Terminal::Query => {}
                    }
                }
            }
        }
        if self.universal_bottom() {
            labels.insert(Terminal::Bot);
        }
        labels.into_iter().map(|w| (w, Null)).collect()
    }

    fn terminal_labels(&self, term: &StandardTerm) -> BTreeSet<Terminal> {
        self.terminal_steps_standard(term)
            .into_iter()
            .map(|(w, _)| w)
            .collect()
    }

    fn terminates_with(&self, term: &StandardTerm, w: Terminal) -> bool {
        self.terminal_steps_standard(term)
            .contains(&(w, StandardTerm::Null))
    }

    // One side terminates while the other offers a synchronised event, or the
    // two sides offer different synchronised events.
    fn std_deadlocks(
        &self,
        x: &SyncSet,
        p: &StandardTerm,
        q: &StandardTerm,
        left_terms: &BTreeSet<Terminal>,
        right_terms: &BTreeSet<Terminal>,
    ) -> bool {
        let offers = |t: &StandardTerm| -> BTreeSet<Event> {
            self.normal_steps_standard(t)
                .into_iter()
                .map(|(a, _)| a)
                .filter(|a| x.contains(a))
                .collect()
        };
        sync_deadlock(
            &offers(p),
            &offers(q),
            !left_terms.is_empty(),
            !right_terms.is_empty(),
        )
    }

    pub fn normal_steps_compensable(&self, term: &CompensableTerm) -> NormalComp {
        use CompensableTerm::*;
        let mut out = NormalComp::new();
        match term {
            Null => {}
            Pair(p, q) => {
                for (a, p2) in self.normal_steps_standard(p) {
                    out.insert((a, CompensableTerm::pair(p2, (**q).clone())));
                }
            }
            Seq(pp, qq) => {
                for (a, pp2) in self.normal_steps_compensable(pp) {
                    out.insert((a, CompensableTerm::seq(pp2, (**qq).clone())));
                }
                let installed: Vec<StandardTerm> = self
                    .terminal_steps_compensable(pp)
                    .into_iter()
                    .filter(|(w, _)| *w == Terminal::Tick)
                    .map(|(_, comp)| comp)
                    .collect();
                if !installed.is_empty() {
                    let next = self.normal_steps_compensable(qq);
                    for comp in installed {
                        for (a, qq2) in &next {
                            out.insert((a.clone(), attach(comp.clone(), qq2.clone())));
                        }
                    }
                }
            }
            Choice(pp, qq) => {
                out.extend(self.normal_steps_compensable(pp));
                out.extend(self.normal_steps_compensable(qq));
            }
            SyncPar(x, pp, qq) => {
                let left = self.normal_steps_compensable(pp);
                let right = self.normal_steps_compensable(qq);
                for (a, pp2) in &left {
                    if x.contains(a) {
                        for (b, qq2) in right.iter().filter(|(b, _)| b == a) {
                            out.insert((
                                b.clone(),
                                CompensableTerm::par(x.clone(), pp2.clone(), qq2.clone()),
                            ));
                        }
                    } else {
                        out.insert((
                            a.clone(),
                            CompensableTerm::par(x.clone(), pp2.clone(), (**qq).clone()),
                        ));
                    }
                }
                for (b, qq2) in right.into_iter().filter(|(b, _)| !x.contains(b)) {
                    out.insert((b, CompensableTerm::par(x.clone(), (**pp).clone(), qq2)));
                }
            }
        }
        out
    }

    /// Terminal transitions of a compensable term. The target is the
    /// compensation left behind, or `Null` after `bot`.
    pub fn terminal_steps_compensable(&self, term: &CompensableTerm) -> TerminalStd {
        use CompensableTerm::*;
        let mut out = TerminalStd::new();
        match term {
            Null => return out,
            Pair(p, q) => {
                for w in self.terminal_labels(p) {
                    match w {
                        Terminal::Tick => out.insert((w, (**q).clone())),
                        Terminal::Bang | Terminal::Query => out.insert((w, StandardTerm::Skip)),
                        Terminal::Bot => out.insert((w, StandardTerm::Null)),
                    };
                }
            }
            Seq(pp, qq) => {
                for (w, first) in self.terminal_steps_compensable(pp) {
                    if w != Terminal::Tick {
                        out.insert((w, first));
                        continue;
                    }
                    for (w2, second) in self.terminal_steps_compensable(qq) {
                        if w2 == Terminal::Bot {
                            out.insert((w2, StandardTerm::Null));
                        } else if self.mutation == Some(Mutation::ReverseCompensationOrder) {
                            out.insert((w2, StandardTerm::seq(first.clone(), second)));
                        } else {
                            out.insert((w2, StandardTerm::seq(second, first.clone())));
                        }
                    }
                }
            }
            Choice(pp, qq) => {
                out.extend(self.terminal_steps_compensable(pp));
                out.extend(self.terminal_steps_compensable(qq));
            }
            SyncPar(x, pp, qq) => {
                let left = self.terminal_steps_compensable(pp);
                let right = self.terminal_steps_compensable(qq);
                for (w1, c1) in &left {
                    for (w2, c2) in &right {
                        let w = sync_terminal(*w1, *w2);
                        if w != Terminal::Bot {
                            out.insert((w, StandardTerm::par(x.clone(), c1.clone(), c2.clone())));
                        }
                    }
                }
                if self.deadlock_clauses() {
                    let offers = |t: &CompensableTerm| -> BTreeSet<Event> {
                        self.normal_steps_compensable(t)
                            .into_iter()
                            .map(|(a, _)| a)
                            .filter(|a| x.contains(a))
                            .collect()
                    };
                    if sync_deadlock(
                        &offers(pp),
                        &offers(qq),
                        !left.is_empty(),
                        !right.is_empty(),
                    ) {
                        out.insert((Terminal::Bot, StandardTerm::Null));
                    }
                }
            }
        }
        if self.universal_bottom() {
            out.insert((Terminal::Bot, StandardTerm::Null));
        }
        out
    }

    /// Enabled transitions of any state.
    pub fn transitions(&self, state: &State) -> Vec<Transition> {
        let mut out = Vec::new();
        match state {
            State::Standard(p) => {
                for (a, p2) in self.normal_steps_standard(p) {
                    out.push(Transition {
                        label: Label::Event(a),
                        target: State::Standard(p2),
                    });
                }
                for (w, p2) in self.terminal_steps_standard(p) {
                    out.push(Transition {
                        label: Label::Terminal(w),
                        target: State::Standard(p2),
                    });
                }
            }
            State::Compensable(pp) => {
                for (a, pp2) in self.normal_steps_compensable(pp) {
                    out.push(Transition {
                        label: Label::Event(a),
                        target: State::Compensable(pp2),
                    });
                }
                for (w, comp) in self.terminal_steps_compensable(pp) {
                    out.push(Transition {
                        label: Label::Terminal(w),
                        target: State::Standard(comp),
                    });
                }
            }
        }
        out
    }

    /// Breadth-first construction of the transition system reachable from
    /// `root`, including the installed compensations.
    pub fn lts(&self, root: State) -> Result<Lts, EngineError> {
        let mut lts = Lts::default();
        let mut index: HashMap<State, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        index.insert(root.clone(), 0);
        lts.states.push(root.clone());
        queue.push_back(root);
        while let Some(state) = queue.pop_front() {
            let from = index[&state];
            for t in self.transitions(&state) {
                let to = match index.get(&t.target) {
                    Some(&i) => i,
                    None => {
                        let i = lts.states.len();
                        if i >= self.state_bound {
                            return Err(EngineError::StateBound {
                                bound: self.state_bound,
                            });
                        }
                        index.insert(t.target.clone(), i);
                        lts.states.push(t.target.clone());
                        queue.push_back(t.target.clone());
                        i
                    }
                };
                lts.edges.push((from, t.label, to));
            }
        }
        Ok(lts)
    }

    pub fn derived_traces_standard(
        &self,
        term: &StandardTerm,
    ) -> Result<BTreeSet<Trace>, EngineError> {
        if *term == StandardTerm::Null {
            return Err(EngineError::NullTerm);
        }
        let mut explorer = Explorer::new(self);
        let traces = explorer.standard(term)?;
        Ok((*traces).clone())
    }

    /// Forward runs paired with the compensation each one installs (`Null`
    /// after a partial run).
    pub fn forward_runs(
        &self,
        term: &CompensableTerm,
    ) -> Result<BTreeSet<(Trace, StandardTerm)>, EngineError> {
        if *term == CompensableTerm::Null {
            return Err(EngineError::NullTerm);
        }
        let mut explorer = Explorer::new(self);
        let runs = explorer.forward(term)?;
        Ok((*runs).clone())
    }

    pub fn derived_traces_compensable(
        &self,
        term: &CompensableTerm,
    ) -> Result<BTreeSet<TracePair>, EngineError> {
        Ok(self.explore_compensable(term)?.0)
    }

    /// Derived trace pairs together with the number of distinct states visited.
    pub(crate) fn explore_compensable(
        &self,
        term: &CompensableTerm,
    ) -> Result<(BTreeSet<TracePair>, usize), EngineError> {
        if *term == CompensableTerm::Null {
            return Err(EngineError::NullTerm);
        }
        let mut explorer = Explorer::new(self);
        let runs = explorer.forward(term)?;
        let mut out = BTreeSet::new();
        for (t, residual) in runs.iter() {
            if t.is_partial() {
                out.insert(TracePair::partial(t.clone()));
            } else if *residual != StandardTerm::Null {
                for t2 in explorer.standard(residual)?.iter() {
                    out.insert(TracePair::new(t.clone(), t2.clone()));
                }
            }
        }
        Ok((out, explorer.visited()))
    }

    pub(crate) fn explore_standard(
        &self,
        term: &StandardTerm,
    ) -> Result<(BTreeSet<Trace>, usize), EngineError> {
        if *term == StandardTerm::Null {
            return Err(EngineError::NullTerm);
        }
        let mut explorer = Explorer::new(self);
        let traces = explorer.standard(term)?;
        Ok(((*traces).clone(), explorer.visited()))
    }
}

/// `Null`-free compensable term behaving as `qq` with `comp` run after
/// `qq`'s own compensation.
pub fn attach(comp: StandardTerm, qq: CompensableTerm) -> CompensableTerm {
    CompensableTerm::seq(CompensableTerm::pair(StandardTerm::Skip, comp), qq)
}

fn sync_deadlock(
    left_offers: &BTreeSet<Event>,
    right_offers: &BTreeSet<Event>,
    left_terminates: bool,
    right_terminates: bool,
) -> bool {
    (!left_offers.is_empty() && right_terminates)
        || (!right_offers.is_empty() && left_terminates)
        || left_offers
            .iter()
            .any(|a| right_offers.iter().any(|b| a != b))
}

// Memoised depth-first exploration. The transition system of a source term is
// acyclic, so the derived traces of a state are a function of the state.
struct Explorer<'e> {
    engine: &'e Engine,
    standard: HashMap<StandardTerm, Rc<BTreeSet<Trace>>>,
    forward: HashMap<CompensableTerm, Rc<BTreeSet<(Trace, StandardTerm)>>>,
}

impl<'e> Explorer<'e> {
    fn new(engine: &'e Engine) -> Self {
        Explorer {
            engine,
            standard: HashMap::new(),
            forward: HashMap::new(),
        }
    }

    fn visited(&self) -> usize {
        self.standard.len() + self.forward.len()
    }

    fn check_bound(&self) -> Result<(), EngineError> {
        if self.visited() >= self.engine.state_bound {
            Err(EngineError::StateBound {
                bound: self.engine.state_bound,
            })
        } else {
            Ok(())
        }
    }

    fn standard(&mut self, term: &StandardTerm) -> Result<Rc<BTreeSet<Trace>>, EngineError> {
        if let Some(hit) = self.standard.get(term) {
            return Ok(hit.clone());
        }
        self.check_bound()?;
        let mut out = BTreeSet::new();
        for (w, _) in self.engine.terminal_steps_standard(term) {
            out.insert(Trace::terminal(w));
        }
        for (a, next) in self.engine.normal_steps_standard(term) {
            for t in self.standard(&next)?.iter() {
                out.insert(t.clone().prefixed(a.clone()));
            }
        }
        let out = Rc::new(out);
        self.standard.insert(term.clone(), out.clone());
        Ok(out)
    }

    fn forward(
        &mut self,
        term: &CompensableTerm,
    ) -> Result<Rc<BTreeSet<(Trace, StandardTerm)>>, EngineError> {
        if let Some(hit) = self.forward.get(term) {
            return Ok(hit.clone());
        }
        self.check_bound()?;
        let mut out = BTreeSet::new();
        for (w, comp) in self.engine.terminal_steps_compensable(term) {
            out.insert((Trace::terminal(w), comp));
        }
        for (a, next) in self.engine.normal_steps_compensable(term) {
            for (t, comp) in self.forward(&next)?.iter() {
                out.insert((t.clone().prefixed(a.clone()), comp.clone()));
            }
        }
        let out = Rc::new(out);
        self.forward.insert(term.clone(), out.clone());
        Ok(out)
    }
}

pub fn normal_steps_standard(term: &StandardTerm) -> NormalStd {
    Engine::default().normal_steps_standard(term)
}

pub fn terminal_steps_standard(term: &StandardTerm) -> TerminalStd {
    Engine::default().terminal_steps_standard(term)
}

pub fn normal_steps_compensable(term: &CompensableTerm) -> NormalComp {
    Engine::default().normal_steps_compensable(term)
}

pub fn terminal_steps_compensable(term: &CompensableTerm) -> TerminalStd {
    Engine::default().terminal_steps_compensable(term)
}

pub fn derived_traces_standard(term: &StandardTerm) -> Result<BTreeSet<Trace>, EngineError> {
    Engine::default().derived_traces_standard(term)
}

pub fn derived_traces_compensable(
    term: &CompensableTerm,
) -> Result<BTreeSet<TracePair>, EngineError> {
    Engine::default().derived_traces_compensable(term)
}
