//! The car-broker web service: a broker negotiating a purchase between a
//! buyer, a supplier and a loan provider.
//!
//! Channel communications `c.v` become dotted events over finite value sets:
//! models `m1..`, quotes `q1..` per model, and the loan replies `yes`/`no`.

use thiserror::Error;

use crate::syntax::{parse_compensable, parse_standard};
use crate::terms::{CompensableTerm, Event, StandardTerm, SyncSet};

pub const MAX_MODELS: usize = 2;
pub const MAX_QUOTES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarBrokerError {
    #[error("models must lie in 1..={MAX_MODELS}, got {0}")]
    Models(usize),
    #[error("quotes per model must lie in 1..={MAX_QUOTES}, got {0}")]
    Quotes(usize),
}

/// The loan outcomes are always `yes` and `no`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarBrokerConfig {
    pub models: usize,
    pub quotes_per_model: usize,
}

impl CarBrokerConfig {
    pub fn new(models: usize, quotes_per_model: usize) -> Result<Self, CarBrokerError> {
        if !(1..=MAX_MODELS).contains(&models) {
            return Err(CarBrokerError::Models(models));
        }
        if !(1..=MAX_QUOTES).contains(&quotes_per_model) {
            return Err(CarBrokerError::Quotes(quotes_per_model));
        }
        Ok(CarBrokerConfig {
            models,
            quotes_per_model,
        })
    }

    fn models(&self) -> Vec<String> {
        (1..=self.models).map(|m| format!("m{m}")).collect()
    }

    fn quotes(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for m in self.models() {
            for q in 1..=self.quotes_per_model {
                out.push((m.clone(), format!("q{q}")));
            }
        }
        out
    }
}

fn choice_of(branches: impl IntoIterator<Item = String>) -> String {
    let parts: Vec<String> = branches.into_iter().map(|b| format!("({b})")).collect();
    parts.join(" [] ")
}

fn set_of(events: &[String]) -> String {
    format!("{{{}}}", events.join(","))
}

/// The four participants and the three synchronisation sets, as source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participants {
    pub broker: String,
    pub supplier: String,
    pub buyer: String,
    pub loan_star: String,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

pub fn participants(cfg: &CarBrokerConfig) -> Participants {
    let per_model = |m: &str, body: &dyn Fn(&str, &str) -> String| {
        choice_of(
            cfg.quotes()
                .into_iter()
                .filter(|(mm, _)| mm == m)
                .map(|(m, q)| body(&m, &q)),
        )
    };

    let broker = choice_of(cfg.models().iter().map(|m| {
        let after_order = per_model(m, &|m, q| {
            format!(
                "quote.{m}.{q} % skip ; reqLoan.{m}.{q} % cancelLoan ; \
                 ((reply.yes % skip) [] (reply.no % skip ; throww)) ; \
                 ((ack.yes % skip) [] (ack.no % skip ; throww))"
            )
        });
        format!("order.{m} % cancelOrder.{m} ; rfq % skip ; ({after_order})")
    }));

    let supplier = choice_of(cfg.models().iter().map(|m| {
        let quote = per_model(m, &|m, q| format!("quote.{m}.{q} % cancelQuote.{m}.{q}"));
        format!("order.{m} % skip ; rfq % skip ; ({quote}) ; (skipp [] yieldd)")
    }));

    let buyer = choice_of(cfg.models().iter().map(|m| {
        let quote = per_model(m, &|m, q| format!("quote.{m}.{q} % skip"));
        format!(
            "order.{m} % skip ; ({quote}) ; \
             ((ack.yes % skip) [] (ack.no % skip ; throww) [] skipp)"
        )
    }));

    let loan_star = choice_of(cfg.quotes().iter().map(|(m, q)| {
        format!("reqLoan.{m}.{q} % skip ; ((reply.yes % skip) [] (reply.no % skip))")
    }));

    let orders: Vec<String> = cfg.models().iter().map(|m| format!("order.{m}")).collect();
    let quotes: Vec<String> = cfg
        .quotes()
        .iter()
        .map(|(m, q)| format!("quote.{m}.{q}"))
        .collect();
    let loans: Vec<String> = cfg
        .quotes()
        .iter()
        .map(|(m, q)| format!("reqLoan.{m}.{q}"))
        .collect();

    let a = [
        orders.clone(),
        quotes.clone(),
        vec!["ack.yes".into(), "ack.no".into()],
    ]
    .concat();
    let b = [vec!["rfq".to_string()], quotes, orders].concat();
    let c = [loans, vec!["reply.yes".into(), "reply.no".into()]].concat();
    Participants {
        broker,
        supplier,
        buyer,
        loan_star,
        a,
        b,
        c,
    }
}

/// `Broker ||B Supplier`, the compensable body of the inner block.
pub fn broker_supplier(cfg: &CarBrokerConfig) -> CompensableTerm {
    let p = participants(cfg);
    let src = format!("({}) ||{} ({})", p.broker, set_of(&p.b), p.supplier);
    parse_compensable(&src).expect("generated broker source is well formed")
}

/// `[[ Broker ||B Supplier ]]`.
pub fn inner_block(cfg: &CarBrokerConfig) -> StandardTerm {
    StandardTerm::block(broker_supplier(cfg))
}

/// `(Buyer ||A [[ Broker ||B Supplier ]]) ||C LoanStar`, where Buyer and
/// LoanStar are transaction blocks of their own.
pub fn build_carbroker(cfg: &CarBrokerConfig) -> StandardTerm {
    let p = participants(cfg);
    let src = format!(
        "([[ {} ]] ||{} [[ ({}) ||{} ({}) ]]) ||{} [[ {} ]]",
        p.buyer,
        set_of(&p.a),
        p.broker,
        set_of(&p.b),
        p.supplier,
        set_of(&p.c),
        p.loan_star
    );
    parse_standard(&src).expect("generated system source is well formed")
}

/// Sync set from event names produced by [`participants`].
pub fn sync_set(names: &[String]) -> SyncSet {
    names
        .iter()
        .map(|n| Event::new(n).expect("generated event name"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(CarBrokerConfig::new(0, 1), Err(CarBrokerError::Models(0)));
        assert_eq!(CarBrokerConfig::new(1, 3), Err(CarBrokerError::Quotes(3)));
        assert!(CarBrokerConfig::new(2, 2).is_ok());
    }

    #[test]
    fn alphabet_of_smallest_system() {
        let term = build_carbroker(&CarBrokerConfig::new(1, 1).unwrap());
        let names: Vec<String> = term
            .alphabet()
            .iter()
            .map(|e| e.name().to_string())
            .collect();
        for expected in [
            "order.m1",
            "rfq",
            "quote.m1.q1",
            "reqLoan.m1.q1",
            "reply.yes",
            "reply.no",
            "cancelOrder.m1",
            "cancelLoan",
            "ack.yes",
        ] {
            assert!(names.iter().any(|n| n == expected), "missing {expected}");
        }
    }

    #[test]
    fn sync_sets_cover_values() {
        let p = participants(&CarBrokerConfig::new(2, 2).unwrap());
        assert_eq!(p.b.len(), 1 + 4 + 2);
        assert_eq!(p.c.len(), 4 + 2);
        assert!(p.a.contains(&"quote.m2.q2".to_string()));
    }
}
