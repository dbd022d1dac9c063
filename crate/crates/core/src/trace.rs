//! Traces, trace pairs and the trace-level operators.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::terms::{Event, SyncSet, Terminal};

/// A finite run: observable events followed by exactly one terminal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub events: Vec<Event>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn new(events: Vec<Event>, terminal: Terminal) -> Self {
        Trace { events, terminal }
    }

    /// `<ω>` with no events.
    pub fn terminal(terminal: Terminal) -> Self {
        Trace {
            events: Vec::new(),
            terminal,
        }
    }

    pub fn bot() -> Self {
        Trace::terminal(Terminal::Bot)
    }

    pub fn is_partial(&self) -> bool {
        self.terminal.is_partial()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn prefixed(mut self, event: Event) -> Self {
        self.events.insert(0, event);
        self
    }

    /// The partial trace made of the first `len` events.
    pub fn partial_prefix(&self, len: usize) -> Trace {
        Trace::new(self.events[..len].to_vec(), Terminal::Bot)
    }

    /// Events of `self` followed by `other` in full.
    pub fn splice(&self, other: &Trace) -> Trace {
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        Trace::new(events, other.terminal)
    }
}

/// `<e1,...,en,TERM>`.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for event in &self.events {
            write!(f, "{event},")?;
        }
        write!(f, "{}>", self.terminal)
    }
}

/// Forward behaviour together with the compensation it installs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracePair {
    pub forward: Trace,
    pub compensation: Trace,
}

impl TracePair {
    pub fn new(forward: Trace, compensation: Trace) -> Self {
        TracePair {
            forward,
            compensation,
        }
    }

    /// A partial forward run stores no compensation.
    pub fn partial(forward: Trace) -> Self {
        debug_assert!(forward.is_partial());
        TracePair {
            forward,
            compensation: Trace::bot(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        !self.forward.is_partial() || self.compensation == Trace::bot()
    }
}

impl fmt::Display for TracePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.forward, self.compensation)
    }
}

/// Sequential composition of traces. Only `ok` lets the continuation run;
/// `!`, `?` and `bot` absorb it (for `bot` this is the cut).
pub fn seq_traces(p: &Trace, q: &Trace) -> Trace {
    match p.terminal {
        Terminal::Tick => p.splice(q),
        Terminal::Bang | Terminal::Query | Terminal::Bot => p.clone(),
    }
}

/// Synchronisation of terminal symbols.
///
/// `bot` is absorbing, then `!` dominates `?` which dominates `ok`.
pub fn sync_terminal(w1: Terminal, w2: Terminal) -> Terminal {
    use Terminal::*;
    match (w1, w2) {
        (Bot, _) | (_, Bot) => Bot,
        (Bang, _) | (_, Bang) => Bang,
        (Query, _) | (_, Query) => Query,
        (Tick, Tick) => Tick,
    }
}

/// Outcome of synchronising two observable events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventSync {
    Joint(Event),
    Fail,
}

pub fn sync_event(a: &Event, b: &Event) -> EventSync {
    if a == b {
        EventSync::Joint(a.clone())
    } else {
        EventSync::Fail
    }
}

/// All interleavings of `p` and `q` that agree on `x`.
///
/// Heads in `x` must be matched by an equal head on the other side; a
/// mismatch, or an in-`x` head facing a finished trace, deadlocks into
/// `<bot>`. Heads outside `x` run independently.
pub fn parallel_traces(x: &SyncSet, p: &Trace, q: &Trace) -> BTreeSet<Trace> {
    let mut memo = HashMap::new();
    let suffixes = par_suffix(x, p, q, 0, 0, &mut memo);
    suffixes
        .iter()
        .map(|(events, terminal)| Trace::new(events.clone(), *terminal))
        .collect()
}

type Suffixes = BTreeSet<(Vec<Event>, Terminal)>;

// Memoised on the unconsumed positions of both operands.
fn par_suffix(
    x: &SyncSet,
    p: &Trace,
    q: &Trace,
    i: usize,
    j: usize,
    memo: &mut HashMap<(usize, usize), Suffixes>,
) -> Suffixes {
    if let Some(hit) = memo.get(&(i, j)) {
        return hit.clone();
    }
    let deadlock = || Suffixes::from([(Vec::new(), Terminal::Bot)]);
    let head_p = p.events.get(i);
    let head_q = q.events.get(j);
    let in_x = |e: Option<&Event>| e.is_some_and(|e| x.contains(e));

    let mut out = Suffixes::new();
    match (head_p, head_q) {
        (None, None) => {
            out.insert((Vec::new(), sync_terminal(p.terminal, q.terminal)));
        }
        (Some(a), Some(b)) if in_x(Some(a)) && in_x(Some(b)) => match sync_event(a, b) {
            EventSync::Joint(e) => {
                let rest = par_suffix(x, p, q, i + 1, j + 1, memo);
                out.extend(prefix_all(&e, rest));
            }
            EventSync::Fail => out = deadlock(),
        },
        (Some(a), None) if in_x(Some(a)) => out = deadlock(),
        (None, Some(b)) if in_x(Some(b)) => out = deadlock(),
        _ => {
            if let Some(b) = head_p.filter(|e| !x.contains(e)) {
                let rest = par_suffix(x, p, q, i + 1, j, memo);
                out.extend(prefix_all(b, rest));
            }
            if let Some(b) = head_q.filter(|e| !x.contains(e)) {
                let rest = par_suffix(x, p, q, i, j + 1, memo);
                out.extend(prefix_all(b, rest));
            }
        }
    }
    memo.insert((i, j), out.clone());
    out
}

fn prefix_all(e: &Event, rest: Suffixes) -> impl Iterator<Item = (Vec<Event>, Terminal)> + '_ {
    rest.into_iter().map(move |(mut events, terminal)| {
        events.insert(0, e.clone());
        (events, terminal)
    })
}

/// Parallel composition of trace pairs. Compensations are composed only when
/// the forward composition completes without `bot`.
pub fn parallel_pairs(x: &SyncSet, pp: &TracePair, qq: &TracePair) -> BTreeSet<TracePair> {
    let mut out = BTreeSet::new();
    let mut compensations: Option<BTreeSet<Trace>> = None;
    for r in parallel_traces(x, &pp.forward, &qq.forward) {
        if r.is_partial() {
            out.insert(TracePair::partial(r));
        } else {
            let comps = compensations
                .get_or_insert_with(|| parallel_traces(x, &pp.compensation, &qq.compensation));
            for r2 in comps.iter() {
                out.insert(TracePair::new(r.clone(), r2.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Terminal::*;

    fn ev(name: &str) -> Event {
        Event::new(name).unwrap()
    }

    fn tr(events: &[&str], terminal: Terminal) -> Trace {
        Trace::new(events.iter().map(|e| ev(e)).collect(), terminal)
    }

    fn set(names: &[&str]) -> SyncSet {
        names.iter().map(|n| ev(n)).collect()
    }

    #[test]
    fn seq_only_splices_after_tick() {
        assert_eq!(
            seq_traces(&tr(&["a"], Tick), &tr(&["b"], Bang)),
            tr(&["a", "b"], Bang)
        );
        assert_eq!(
            seq_traces(&tr(&["a"], Bang), &tr(&["b"], Tick)),
            tr(&["a"], Bang)
        );
        assert_eq!(
            seq_traces(&tr(&["a"], Bot), &tr(&["b"], Tick)),
            tr(&["a"], Bot)
        );
        assert_eq!(
            seq_traces(&tr(&["a"], Query), &tr(&["b"], Tick)),
            tr(&["a"], Query)
        );
    }

    #[test]
    fn terminal_table_entries() {
        assert_eq!(sync_terminal(Bang, Query), Bang);
        assert_eq!(sync_terminal(Query, Tick), Query);
        assert_eq!(sync_terminal(Bot, Bang), Bot);
        assert_eq!(sync_terminal(Tick, Tick), Tick);
    }

    #[test]
    fn event_sync() {
        assert_eq!(sync_event(&ev("a"), &ev("a")), EventSync::Joint(ev("a")));
        assert_eq!(sync_event(&ev("a"), &ev("b")), EventSync::Fail);
        assert_eq!(
            sync_event(&ev("c.1"), &ev("c.1")),
            EventSync::Joint(ev("c.1"))
        );
    }

    #[test]
    fn parallel_trace_examples() {
        let got = parallel_traces(&set(&[]), &tr(&["a"], Tick), &tr(&["b"], Bang));
        assert_eq!(
            got,
            BTreeSet::from([tr(&["a", "b"], Bang), tr(&["b", "a"], Bang)])
        );

        let got = parallel_traces(&set(&["a"]), &tr(&["a"], Tick), &tr(&["a"], Tick));
        assert_eq!(got, BTreeSet::from([tr(&["a"], Tick)]));

        let got = parallel_traces(&set(&["a", "b"]), &tr(&["a"], Tick), &tr(&["b"], Tick));
        assert_eq!(got, BTreeSet::from([Trace::bot()]));

        let got = parallel_traces(&set(&["a"]), &tr(&["a"], Tick), &tr(&[], Tick));
        assert_eq!(got, BTreeSet::from([Trace::bot()]));
    }

    #[test]
    fn out_of_set_head_runs_before_blocked_head() {
        // b is free, a must wait for a partner that never arrives.
        let got = parallel_traces(&set(&["a"]), &tr(&["a"], Tick), &tr(&["b"], Tick));
        assert_eq!(got, BTreeSet::from([tr(&["b"], Bot)]));
    }

    #[test]
    fn parallel_pair_examples() {
        let skip = TracePair::new(tr(&[], Tick), tr(&[], Tick));
        assert_eq!(
            parallel_pairs(&set(&[]), &skip, &skip),
            BTreeSet::from([skip.clone()])
        );

        let left = TracePair::new(tr(&["a"], Tick), tr(&[], Tick));
        let right = TracePair::new(tr(&["b"], Tick), tr(&[], Tick));
        assert_eq!(
            parallel_pairs(&set(&["a", "b"]), &left, &right),
            BTreeSet::from([TracePair::partial(Trace::bot())])
        );

        let thrown = TracePair::new(tr(&["a"], Bang), tr(&["r"], Tick));
        assert_eq!(
            parallel_pairs(&set(&[]), &thrown, &skip),
            BTreeSet::from([thrown.clone()])
        );
    }

    #[test]
    fn rendering() {
        assert_eq!(tr(&["a", "b"], Bang).to_string(), "<a,b,!>");
        assert_eq!(Trace::bot().to_string(), "<bot>");
        let pair = TracePair::new(tr(&["a"], Tick), tr(&["r"], Tick));
        assert_eq!(pair.to_string(), "(<a,ok>, <r,ok>)");
    }
}
