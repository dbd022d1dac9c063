//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria 5b and 5c cannot be met as stated (see the README). They are
//! still measured and reported as FAIL; the run only errors when some result
//! differs from what is recorded here.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ccsp::carbroker::{build_carbroker, inner_block, participants, CarBrokerConfig};
use ccsp::correspondence::{
    campaign_terms, check_theorem1_standard, partition_instance, run_campaign,
    run_partition_campaign, GenConfig,
};
use ccsp::operational::derived_traces_standard;
use ccsp::trace::sync_terminal;
use ccsp::{
    eval_compensable, eval_standard, parse, pretty, Engine, Event, Mutation, Term, Terminal,
};

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
    expected_to_pass: bool,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome {
        id,
        passed,
        detail,
        expected_to_pass: true,
    }
}

fn campaign_config() -> GenConfig {
    let alphabet = ["a", "b", "c"]
        .iter()
        .map(|n| Event::new(n).unwrap())
        .collect();
    GenConfig::new(1, 7, alphabet, 0.5).unwrap()
}

fn table() -> Outcome {
    use Terminal::*;
    // Columns of the table, then the two bottom cases.
    let listed = [
        (Bang, Bang, Bang),
        (Bang, Query, Bang),
        (Bang, Tick, Bang),
        (Query, Query, Query),
        (Query, Tick, Query),
        (Tick, Tick, Tick),
    ];
    let mut expected = std::collections::BTreeMap::new();
    for (a, b, r) in listed {
        expected.insert((a, b), r);
        expected.insert((b, a), r);
    }
    for w in Terminal::ALL {
        expected.insert((Bot, w), Bot);
        expected.insert((w, Bot), Bot);
    }
    let mut pairs_ok = 0;
    for a in Terminal::ALL {
        for b in Terminal::ALL {
            if expected.get(&(a, b)) == Some(&sync_terminal(a, b)) {
                pairs_ok += 1;
            }
        }
    }
    let mut assoc_ok = 0;
    for a in Terminal::ALL {
        for b in Terminal::ALL {
            for c in Terminal::ALL {
                if sync_terminal(sync_terminal(a, b), c) == sync_terminal(a, sync_terminal(b, c)) {
                    assoc_ok += 1;
                }
            }
        }
    }
    outcome(
        "1",
        expected.len() == 16 && pairs_ok == 16 && assoc_ok == 64,
        format!("terminal synchronisation: {pairs_ok}/16 pairs, {assoc_ok}/64 associative triples"),
    )
}

fn theorem_campaign() -> Outcome {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_ccsp"))
        .args([
            "fuzz",
            "--count",
            "500",
            "--size",
            "7",
            "--alphabet",
            "a,b,c",
            "--seed",
            "1",
        ])
        .output()
        .expect("run the ccsp binary");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let first = stdout.lines().next().unwrap_or("").to_string();
    outcome(
        "2",
        output.status.success() && first.contains("passed 1000, failed 0, engine errors 0"),
        format!(
            "`ccsp fuzz --count 500 --size 7 --alphabet a,b,c --seed 1`: {first} in {:.2?}",
            start.elapsed()
        ),
    )
}

fn partition() -> Outcome {
    let start = Instant::now();
    let report = run_partition_campaign(&Engine::new(), &campaign_config(), 200)
        .expect("bounded exploration");
    outcome(
        "3",
        report.violations.is_empty() && report.checked > 0,
        format!(
            "200 triples, {} derived pairs: {} completing, {} deadlocking, {} violations in {:.2?}",
            report.checked,
            report.completing,
            report.partial,
            report.violations.len(),
            start.elapsed()
        ),
    )
}

fn closure(terms: &[Term]) -> Outcome {
    let mut violations = 0;
    for term in terms {
        violations += match term {
            Term::Standard(p) => eval_standard(p).unwrap().closure_violations().len(),
            Term::Compensable(pp) => eval_compensable(pp).unwrap().closure_violations().len(),
        };
    }
    outcome(
        "4",
        violations == 0,
        format!(
            "{} denotations, {violations} closure violations",
            terms.len()
        ),
    )
}

fn mutants() -> Vec<Outcome> {
    let cfg = campaign_config();
    let cases = [
        ("5a", Mutation::DropUniversalBottom, true),
        ("5b", Mutation::DropDeadlockClauses, false),
        ("5c", Mutation::ReverseCompensationOrder, false),
    ];
    cases
        .into_iter()
        .map(|(id, mutation, expected_to_pass)| {
            let summary = run_campaign(&Engine::new().with_mutation(mutation), &cfg, 500);
            let (passed, detail) = match &summary.first_counterexample {
                Some(cex) => (
                    cex.shrunk.size() <= 5,
                    format!(
                        "{mutation:?}: {} failures, smallest counterexample {} of size {}",
                        summary.failed,
                        pretty(&cex.shrunk),
                        cex.shrunk.size()
                    ),
                ),
                None => (
                    false,
                    format!("{mutation:?}: no failures in {} terms", summary.passed),
                ),
            };
            Outcome {
                id,
                passed,
                detail,
                expected_to_pass,
            }
        })
        .collect()
}

fn carbroker(terms: &mut Vec<Term>) -> Vec<Outcome> {
    let start = Instant::now();
    let cfg = CarBrokerConfig::new(1, 1).unwrap();
    let block = inner_block(&cfg);
    let system = build_carbroker(&cfg);
    terms.push(block.clone().into());
    terms.push(system.clone().into());

    let report = check_theorem1_standard(&Engine::new(), &block).unwrap();
    let a = outcome(
        "6a",
        report.holds,
        format!(
            "inner block: {} traces, {} states, holds = {}",
            report.stats.traces, report.stats.states, report.holds
        ),
    );

    let mut rejected = 0;
    let mut compensated = 0;
    for t in derived_traces_standard(&block).unwrap() {
        if t.terminal != Terminal::Tick {
            continue;
        }
        if let Some(no) = t.events.iter().position(|e| e.name() == "reply.no") {
            rejected += 1;
            if t.events[no..].iter().any(|e| e.name() == "cancelOrder.m1") {
                compensated += 1;
            }
        }
    }
    let b = outcome(
        "6b",
        rejected > 0 && rejected == compensated,
        format!(
            "{compensated}/{rejected} completed block traces with reply.no cancel the order later"
        ),
    );

    let clean: Vec<_> = eval_standard(&system)
        .unwrap()
        .into_traces()
        .into_iter()
        .filter(|t| {
            t.terminal == Terminal::Tick
                && t.events.iter().any(|e| e.name() == "reply.yes")
                && !t.events.iter().any(|e| e.name().starts_with("cancel"))
        })
        .collect();
    let p = participants(&cfg);
    let c = outcome(
        "6c",
        !clean.is_empty(),
        format!(
            "{} successful system traces without cancellation, e.g. {} (sync sets {}/{}/{} events) in {:.2?}",
            clean.len(),
            clean.first().map_or("none".to_string(), |t| t.to_string()),
            p.a.len(),
            p.b.len(),
            p.c.len(),
            start.elapsed()
        ),
    );
    vec![a, b, c]
}

fn round_trip() -> Outcome {
    let cfg = campaign_config();
    let terms: BTreeSet<Term> = campaign_terms(&cfg, 500).into_iter().collect();
    let all = campaign_terms(&cfg, 500);
    let mut ok = 0;
    for term in &all {
        if parse(&pretty(term)).as_ref() == Ok(term) {
            ok += 1;
        }
    }
    outcome(
        "7",
        ok == all.len() && all.len() == 1000,
        format!(
            "{ok}/{} generated terms ({} distinct) survive parse(pretty(t))",
            all.len(),
            terms.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut terms = campaign_terms(&campaign_config(), 500);
    for index in 0..200 {
        let (_, pp, qq) = partition_instance(&campaign_config(), index);
        terms.push(pp.into());
        terms.push(qq.into());
    }

    let mut outcomes = vec![table(), theorem_campaign(), partition()];
    let broker = carbroker(&mut terms);
    outcomes.push(closure(&terms));
    outcomes.extend(mutants());
    outcomes.extend(broker);
    outcomes.push(round_trip());

    let mut unexpected = 0;
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let note = match (o.passed, o.expected_to_pass) {
            (false, false) => " (known, unattainable as stated)",
            (true, false) => " (recorded as unattainable but passed)",
            _ => "",
        };
        println!("{verdict} criterion {}: {}{note}", o.id, o.detail);
        if o.passed != o.expected_to_pass {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
