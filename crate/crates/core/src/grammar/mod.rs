//! Unambiguous context-free grammar of one-dimensional walks with
//! nonnegative prefix sums, with exact length-indexed counting and
//! uniform sampling of words.
//!
//! Nonterminals:
//! - `D`: excursions (start and end at height 0, never below).
//! - `L_k`: words of weight `k` whose nonempty proper prefixes all stay
//!   strictly above `k` (first passage down to `k` from above).
//! - `R_j`: words of weight `-j` whose nonempty proper prefixes are all
//!   positive.
//! - `P`: all nonnegative walks, `Paux` the part after the last visit to 0.

mod compiled;
mod count;
mod guided;
mod sample;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::projection::OneDModel;

pub(crate) use compiled::{Compiled, Node};
pub use guided::{derive_guided, guided_counts, GuidedCounts};
pub use count::{count_words, oned_counts, OneDFinal, WordCounts};
pub use sample::{derive_word, sample_word, Derivation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nonterminal {
    P,
    Paux,
    D,
    L(usize),
    R(usize),
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonterminal::P => f.write_str("P"),
            Nonterminal::Paux => f.write_str("Paux"),
            Nonterminal::D => f.write_str("D"),
            Nonterminal::L(k) => write!(f, "L{k}"),
            Nonterminal::R(k) => write!(f, "R{k}"),
        }
    }
}

impl Serialize for Nonterminal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A symbol in a rule body; terminals are indices into the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    T(usize),
    N(Nonterminal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Nonterminal,
    /// An empty body is the empty word.
    pub alternatives: Vec<Vec<Symbol>>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub model: OneDModel,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub nonterminals: usize,
    pub alternatives: usize,
    pub max_body: usize,
}

impl Grammar {
    pub fn a_bar(&self) -> usize {
        self.model.a_bar.max(0) as usize
    }

    pub fn b_bar(&self) -> usize {
        self.model.b_bar.max(0) as usize
    }

    pub fn rule(&self, nt: Nonterminal) -> Option<&Rule> {
        self.rules.iter().find(|r| r.lhs == nt)
    }

    pub fn nonterminals(&self) -> Vec<Nonterminal> {
        self.rules.iter().map(|r| r.lhs).collect()
    }

    fn symbol_text(&self, s: &Symbol) -> String {
        match *s {
            Symbol::T(t) => {
                let term = &self.model.terminals[t];
                format!("'a{}:{:+}'", term.id, term.weight)
            }
            Symbol::N(nt) => nt.to_string(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rules: Vec<_> = self
            .rules
            .iter()
            .map(|r| {
                let alts: Vec<Vec<serde_json::Value>> = r
                    .alternatives
                    .iter()
                    .map(|body| {
                        body.iter()
                            .map(|s| match *s {
                                Symbol::T(t) => serde_json::json!({
                                    "terminal": self.model.terminals[t].id,
                                    "weight": self.model.terminals[t].weight,
                                }),
                                Symbol::N(nt) => serde_json::json!({ "nonterminal": nt.to_string() }),
                            })
                            .collect()
                    })
                    .collect();
                serde_json::json!({ "lhs": r.lhs.to_string(), "alternatives": alts })
            })
            .collect();
        serde_json::json!({
            "terminals": self.model.terminals,
            "a_bar": self.model.a_bar,
            "b_bar": self.model.b_bar,
            "rules": rules,
        })
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let alts: Vec<String> = r
                .alternatives
                .iter()
                .map(|body| {
                    if body.is_empty() {
                        "eps".to_string()
                    } else {
                        body.iter().map(|s| self.symbol_text(s)).collect::<Vec<_>>().join(" ")
                    }
                })
                .collect();
            let rhs = if alts.is_empty() { "(empty)".to_string() } else { alts.join(" | ") };
            writeln!(f, "{} -> {}", r.lhs, rhs)?;
        }
        Ok(())
    }
}

/// Grammar of the nonnegative walks of `m`.
pub fn build_grammar(m: &OneDModel) -> Result<Grammar> {
    if m.is_trivial() {
        return Err(Error::Trivial(format!(
            "one-dimensional model {:?} needs both a positive and a negative weight",
            m.weights()
        )));
    }
    let (a, b) = (m.a_bar as usize, m.b_bar as usize);
    let terms_of = |w: i64| -> Vec<Vec<Symbol>> {
        m.terminals
            .iter()
            .enumerate()
            .filter(|(_, t)| t.weight == w)
            .map(|(k, _)| vec![Symbol::T(k)])
            .collect()
    };
    use Nonterminal::*;
    use Symbol::N;
    let mut rules = Vec::with_capacity(a + b + 3);
    rules.push(Rule { lhs: P, alternatives: vec![vec![N(D), N(Paux)]] });
    let mut paux = vec![vec![]];
    paux.extend((1..=a).map(|k| vec![N(L(k)), N(P)]));
    rules.push(Rule { lhs: Paux, alternatives: paux });
    let mut d = vec![vec![]];
    d.extend(terms_of(0).into_iter().map(|mut t| {
        t.push(N(D));
        t
    }));
    d.extend((1..=a.min(b)).map(|k| vec![N(L(k)), N(D), N(R(k)), N(D)]));
    rules.push(Rule { lhs: D, alternatives: d });
    for i in 1..=a {
        let mut alts = terms_of(i as i64);
        alts.extend((i + 1..=a.min(i + b)).map(|k| vec![N(L(k)), N(D), N(R(k - i))]));
        rules.push(Rule { lhs: L(i), alternatives: alts });
    }
    for j in 1..=b {
        let mut alts = terms_of(-(j as i64));
        alts.extend((j + 1..=b.min(j + a)).map(|k| vec![N(L(k - j)), N(D), N(R(k))]));
        rules.push(Rule { lhs: R(j), alternatives: alts });
    }
    Ok(Grammar { model: m.clone(), rules })
}

/// Checks that every referenced nonterminal has a rule, that `L_k` and
/// `R_k` stay within `1..=a_bar` and `1..=b_bar`, and that terminals exist.
pub fn validate_grammar(g: &Grammar) -> Result<ValidationReport> {
    let (a, b) = (g.a_bar(), g.b_bar());
    let in_range = |nt: Nonterminal| match nt {
        Nonterminal::L(k) => (1..=a).contains(&k),
        Nonterminal::R(k) => (1..=b).contains(&k),
        _ => true,
    };
    let mut seen = std::collections::HashSet::new();
    for r in &g.rules {
        if !in_range(r.lhs) {
            return Err(Error::DanglingSymbol {
                rule: r.lhs.to_string(),
                symbol: format!("{} (index out of range)", r.lhs),
            });
        }
        if !seen.insert(r.lhs) {
            return Err(Error::DanglingSymbol {
                rule: r.lhs.to_string(),
                symbol: format!("{} (defined twice)", r.lhs),
            });
        }
    }
    let mut report = ValidationReport { nonterminals: g.rules.len(), alternatives: 0, max_body: 0 };
    for r in &g.rules {
        for body in &r.alternatives {
            report.alternatives += 1;
            report.max_body = report.max_body.max(body.len());
            for s in body {
                let ok = match *s {
                    Symbol::T(t) => t < g.model.terminals.len(),
                    Symbol::N(nt) => in_range(nt) && seen.contains(&nt),
                };
                if !ok {
                    return Err(Error::DanglingSymbol {
                        rule: r.lhs.to_string(),
                        symbol: g.symbol_text(s),
                    });
                }
            }
        }
    }
    for nt in [Nonterminal::P, Nonterminal::Paux, Nonterminal::D] {
        if !seen.contains(&nt) {
            return Err(Error::DanglingSymbol { rule: "(grammar)".into(), symbol: nt.to_string() });
        }
    }
    Ok(report)
}
