use std::collections::BTreeSet;

use ccsp::trace::{parallel_traces, seq_traces, sync_terminal};
use ccsp::{Event, SyncSet, Terminal, Trace};
use proptest::prelude::*;

fn ev(name: &str) -> Event {
    Event::new(name).unwrap()
}

// Naive reading of the rules on slices, with every mirrored case spelled out.
fn oracle(
    x: &BTreeSet<&str>,
    p: &[&str],
    wp: Terminal,
    q: &[&str],
    wq: Terminal,
) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let bot = || vec!["bot".to_string()];
    let cons = |e: &str, rest: BTreeSet<Vec<String>>| -> Vec<Vec<String>> {
        rest.into_iter()
            .map(|mut r| {
                r.insert(0, e.to_string());
                r
            })
            .collect()
    };
    match (p.split_first(), q.split_first()) {
        (None, None) => {
            out.insert(vec![sync_terminal(wp, wq).symbol().to_string()]);
        }
        (Some((a, _)), None) if x.contains(a) => {
            out.insert(bot());
        }
        (None, Some((a, _))) if x.contains(a) => {
            out.insert(bot());
        }
        (Some((a, p2)), Some((b, q2))) if x.contains(a) && x.contains(b) => {
            if a == b {
                out.extend(cons(a, oracle(x, p2, wp, q2, wq)));
            } else {
                out.insert(bot());
            }
        }
        _ => {
            if let Some((b, p2)) = p.split_first() {
                if !x.contains(b) {
                    out.extend(cons(b, oracle(x, p2, wp, q, wq)));
                }
            }
            if let Some((b, q2)) = q.split_first() {
                if !x.contains(b) {
                    out.extend(cons(b, oracle(x, p, wp, q2, wq)));
                }
            }
        }
    }
    out
}

fn flatten(t: &Trace) -> Vec<String> {
    let mut v: Vec<String> = t.events.iter().map(|e| e.name().to_string()).collect();
    v.push(t.terminal.symbol().to_string());
    v
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn terminal() -> impl Strategy<Value = Terminal> {
    prop::sample::select(Terminal::ALL.to_vec())
}

fn events(max: usize) -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(NAMES.to_vec()), 0..=max)
}

fn sync() -> impl Strategy<Value = BTreeSet<&'static str>> {
    prop::collection::btree_set(prop::sample::select(NAMES.to_vec()), 0..=3)
}

fn trace(es: &[&str], w: Terminal) -> Trace {
    Trace::new(es.iter().map(|e| ev(e)).collect(), w)
}

fn sync_set(x: &BTreeSet<&str>) -> SyncSet {
    x.iter().map(|e| ev(e)).collect()
}

proptest! {
    #[test]
    fn parallel_matches_oracle(x in sync(), p in events(4), wp in terminal(), q in events(4), wq in terminal()) {
        let got: BTreeSet<Vec<String>> =
            parallel_traces(&sync_set(&x), &trace(&p, wp), &trace(&q, wq)).iter().map(flatten).collect();
        prop_assert_eq!(got, oracle(&x, &p, wp, &q, wq));
    }

    #[test]
    fn parallel_is_symmetric(x in sync(), p in events(4), wp in terminal(), q in events(4), wq in terminal()) {
        let x = sync_set(&x);
        let (p, q) = (trace(&p, wp), trace(&q, wq));
        prop_assert_eq!(parallel_traces(&x, &p, &q), parallel_traces(&x, &q, &p));
    }

    #[test]
    fn parallel_never_lengthens(x in sync(), p in events(4), wp in terminal(), q in events(4), wq in terminal()) {
        let x = sync_set(&x);
        let (p, q) = (trace(&p, wp), trace(&q, wq));
        let results = parallel_traces(&x, &p, &q);
        prop_assert!(!results.is_empty());
        for r in results {
            prop_assert!(r.len() <= p.len() + q.len());
        }
    }

    #[test]
    fn interleaving_without_sync_never_deadlocks(p in events(3), q in events(3)) {
        let (p, q) = (trace(&p, Terminal::Tick), trace(&q, Terminal::Tick));
        for r in parallel_traces(&SyncSet::empty(), &p, &q) {
            prop_assert_eq!(r.terminal, Terminal::Tick);
            prop_assert_eq!(r.len(), p.len() + q.len());
        }
    }

    #[test]
    fn seq_is_associative(
        p in events(3), wp in terminal(), q in events(3), wq in terminal(), r in events(3), wr in terminal()
    ) {
        let (p, q, r) = (trace(&p, wp), trace(&q, wq), trace(&r, wr));
        prop_assert_eq!(seq_traces(&seq_traces(&p, &q), &r), seq_traces(&p, &seq_traces(&q, &r)));
    }
}

#[test]
fn terminal_sync_is_associative_and_commutative() {
    for a in Terminal::ALL {
        for b in Terminal::ALL {
            assert_eq!(sync_terminal(a, b), sync_terminal(b, a));
            for c in Terminal::ALL {
                assert_eq!(
                    sync_terminal(sync_terminal(a, b), c),
                    sync_terminal(a, sync_terminal(b, c)),
                    "{a:?} {b:?} {c:?}"
                );
            }
        }
    }
}
