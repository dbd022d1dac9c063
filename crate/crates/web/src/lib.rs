//! Browser bindings: each export takes term source text and returns plain
//! text, or an error message.

use ccsp::operational::State;
use ccsp::syntax::{pretty_state, render_set};
use ccsp::{check_theorem1, eval_compensable, eval_standard, parse, Engine, Term};
use wasm_bindgen::prelude::*;

/// Keeps the page responsive on large terms.
pub const WEB_STATE_BOUND: usize = 20_000;

fn engine() -> Engine {
    Engine::new().with_state_bound(WEB_STATE_BOUND)
}

fn parsed(src: &str) -> Result<Term, String> {
    parse(src).map_err(|e| e.to_string())
}

/// The denotation, one trace or trace pair per line.
#[wasm_bindgen]
pub fn traces(src: &str) -> Result<String, String> {
    match parsed(src)? {
        Term::Standard(p) => Ok(render_set(
            eval_standard(&p).map_err(|e| e.to_string())?.traces(),
        )),
        Term::Compensable(pp) => Ok(render_set(
            eval_compensable(&pp).map_err(|e| e.to_string())?.pairs(),
        )),
    }
}

/// Correspondence report between derived and denoted traces.
#[wasm_bindgen]
pub fn check(src: &str) -> Result<String, String> {
    let report = check_theorem1(&engine(), &parsed(src)?).map_err(|e| e.to_string())?;
    Ok(report.to_string())
}

/// Reachable transitions as `STATE --label--> STATE` lines.
#[wasm_bindgen]
pub fn lts(src: &str) -> Result<String, String> {
    let lts = engine()
        .lts(State::from(parsed(src)?))
        .map_err(|e| e.to_string())?;
    let names: Vec<String> = lts.states.iter().map(pretty_state).collect();
    let mut out = String::new();
    for (from, label, to) in &lts.edges {
        out.push_str(&format!("{} --{label}--> {}\n", names[*from], names[*to]));
    }
    Ok(out)
}
