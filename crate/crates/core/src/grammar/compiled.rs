//! Binary normal form used for counting and sampling: every node is the
//! empty word, a terminal, a union, or a concatenation of two nodes.
//! Concatenations are hash-consed so that shared suffixes such as `D R_j`
//! are counted once.

use std::collections::HashMap;

use super::{Grammar, Nonterminal, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Eps,
    Term(usize),
    Alt(Vec<usize>),
    Seq(usize, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub nodes: Vec<Node>,
    /// Shortest word length, `usize::MAX` for an empty language.
    pub min_len: Vec<usize>,
    /// Evaluation order within one length: every node comes after the
    /// nodes it needs at the same length.
    pub order: Vec<usize>,
    pub roots: Vec<(Nonterminal, usize)>,
}

const NONE: usize = usize::MAX;

impl Compiled {
    pub fn new(g: &Grammar) -> Result<Self> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut roots = Vec::with_capacity(g.rules.len());
        for r in &g.rules {
            roots.push((r.lhs, nodes.len()));
            nodes.push(Node::Alt(Vec::new()));
        }
        let root_of = |nt: Nonterminal| roots.iter().find(|(k, _)| *k == nt).map(|&(_, i)| i);
        let mut interned: HashMap<Node, usize> = HashMap::new();
        let mut intern = |nodes: &mut Vec<Node>, node: Node| -> usize {
            *interned.entry(node.clone()).or_insert_with(|| {
                nodes.push(node);
                nodes.len() - 1
            })
        };
        for (ri, r) in g.rules.iter().enumerate() {
            let mut children = Vec::with_capacity(r.alternatives.len());
            for body in &r.alternatives {
                let mut ids = Vec::with_capacity(body.len());
                for s in body {
                    ids.push(match *s {
                        Symbol::T(t) => intern(&mut nodes, Node::Term(t)),
                        Symbol::N(nt) => root_of(nt).ok_or_else(|| Error::DanglingSymbol {
                            rule: r.lhs.to_string(),
                            symbol: nt.to_string(),
                        })?,
                    });
                }
                let id = match ids.pop() {
                    None => intern(&mut nodes, Node::Eps),
                    Some(mut acc) => {
                        while let Some(prev) = ids.pop() {
                            acc = intern(&mut nodes, Node::Seq(prev, acc));
                        }
                        acc
                    }
                };
                children.push(id);
            }
            nodes[ri] = Node::Alt(children);
        }

        let min_len = min_lengths(&nodes);
        let order = same_length_order(&nodes, &min_len)?;
        Ok(Compiled { nodes, min_len, order, roots })
    }

    pub fn root(&self, nt: Nonterminal) -> Option<usize> {
        self.roots.iter().find(|(k, _)| *k == nt).map(|&(_, i)| i)
    }

    /// Length of every word of `node` when it is fixed.
    pub fn fixed_len(&self, node: usize) -> Option<usize> {
        match self.nodes[node] {
            Node::Eps => Some(0),
            Node::Term(_) => Some(1),
            _ => None,
        }
    }

    /// Range of left-part lengths for a split of `Seq(b, c)` at length `m`.
    pub fn split_range(&self, b: usize, c: usize, m: usize) -> Option<(usize, usize)> {
        let (mb, mc) = (self.min_len[b], self.min_len[c]);
        if mb == NONE || mc == NONE || mb + mc > m {
            return None;
        }
        let mut lo = mb;
        let mut hi = m - mc;
        if let Some(f) = self.fixed_len(b) {
            (lo, hi) = (f, f);
        }
        if let Some(f) = self.fixed_len(c) {
            lo = lo.max(m - f);
            hi = hi.min(m - f);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Longest chain of nodes that one derivation can visit at a single
    /// length.
    pub fn chain_bound(&self) -> usize {
        self.nodes.len()
    }
}

/// `lo, hi, lo + 1, hi - 1, ...`: split lengths from both ends, so that
/// the typical lopsided split is found after few products.
pub(crate) fn boustrophedon(lo: usize, hi: usize) -> impl Iterator<Item = usize> {
    let n = hi - lo + 1;
    (0..n).map(move |k| if k % 2 == 0 { lo + k / 2 } else { hi - k / 2 })
}

fn min_lengths(nodes: &[Node]) -> Vec<usize> {
    let mut min = vec![NONE; nodes.len()];
    loop {
        let mut changed = false;
        for (i, node) in nodes.iter().enumerate() {
            let v = match node {
                Node::Eps => 0,
                Node::Term(_) => 1,
                Node::Alt(ch) => ch.iter().map(|&c| min[c]).min().unwrap_or(NONE),
                Node::Seq(b, c) => {
                    if min[*b] == NONE || min[*c] == NONE {
                        NONE
                    } else {
                        min[*b] + min[*c]
                    }
                }
            };
            if v < min[i] {
                min[i] = v;
                changed = true;
            }
        }
        if !changed {
            return min;
        }
    }
}

fn same_length_order(nodes: &[Node], min_len: &[usize]) -> Result<Vec<usize>> {
    let deps = |i: usize| -> Vec<usize> {
        match &nodes[i] {
            Node::Eps | Node::Term(_) => vec![],
            Node::Alt(ch) => ch.clone(),
            Node::Seq(b, c) => {
                let mut d = Vec::new();
                if min_len[*c] == 0 {
                    d.push(*b);
                }
                if min_len[*b] == 0 {
                    d.push(*c);
                }
                d
            }
        }
    };
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; nodes.len()];
    let mut order = Vec::with_capacity(nodes.len());
    for start in 0..nodes.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, deps(start), 0usize)];
        state[start] = 1;
        while let Some((node, ds, k)) = stack.last_mut() {
            if *k < ds.len() {
                let d = ds[*k];
                *k += 1;
                match state[d] {
                    0 => {
                        state[d] = 1;
                        let dd = deps(d);
                        stack.push((d, dd, 0));
                    }
                    1 => {
                        return Err(Error::Domain(
                            "grammar has a cycle of length-preserving derivations".into(),
                        ))
                    }
                    _ => {}
                }
            } else {
                state[*node] = 2;
                order.push(*node);
                stack.pop();
            }
        }
    }
    Ok(order)
}
