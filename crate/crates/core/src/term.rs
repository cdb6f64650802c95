//! De Bruijn terms.
//!
//! A term is stored as its prefix (Polish) word: every abstraction is
//! followed by its body and every application by its left then right
//! operand. All traversals are loops over this flat vector, so terms with
//! nesting depth in the millions can be built, inspected and dropped
//! without recursion.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

mod blc;
mod dot;
mod syntax;

pub use blc::{decode_blc, encode_blc, read_packed, write_packed, DecodeError, PackedError};
pub use dot::render_dot;
pub use syntax::{parse_term, render_term, ParseError, RenderStyle};

/// One constructor in prefix order. `Var(s)` has `s` successors, i.e.
/// De Bruijn index `s + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Var(u64),
    Abs,
    App,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedTerm {
    #[error("node sequence ends before the term is complete")]
    Incomplete,
    #[error("extra nodes after a complete term at position {0}")]
    Trailing(usize),
}

/// Borrowed subterm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermRef<'a> {
    nodes: &'a [Node],
}

/// One-level view of a term as a tagged union.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermView<'a> {
    Var(u64),
    Abs(TermRef<'a>),
    App(TermRef<'a>, TermRef<'a>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermMetrics {
    pub abstractions: u64,
    pub applications: u64,
    pub variables: u64,
    pub successors: u64,
    pub depth: u64,
}

/// Length of the complete term starting at the front of `nodes`, if any.
fn complete_len(nodes: &[Node]) -> Option<usize> {
    let mut pending = 1usize;
    for (i, node) in nodes.iter().enumerate() {
        match node {
            Node::Var(_) => pending -= 1,
            Node::Abs => {}
            Node::App => pending += 1,
        }
        if pending == 0 {
            return Some(i + 1);
        }
    }
    None
}

impl Term {
    pub fn var(successors: u64) -> Term {
        Term { nodes: vec![Node::Var(successors)] }
    }

    /// Variable with De Bruijn index `index` (must be at least 1).
    pub fn index(index: u64) -> Term {
        assert!(index >= 1, "De Bruijn indices start at 1");
        Term::var(index - 1)
    }

    pub fn abs(body: Term) -> Term {
        let mut nodes = Vec::with_capacity(body.nodes.len() + 1);
        nodes.push(Node::Abs);
        nodes.extend_from_slice(&body.nodes);
        Term { nodes }
    }

    pub fn app(left: Term, right: Term) -> Term {
        let mut nodes = Vec::with_capacity(left.nodes.len() + right.nodes.len() + 1);
        nodes.push(Node::App);
        nodes.extend_from_slice(&left.nodes);
        nodes.extend_from_slice(&right.nodes);
        Term { nodes }
    }

    /// Wraps a prefix word after checking it is exactly one complete term.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Term, MalformedTerm> {
        match complete_len(&nodes) {
            None => Err(MalformedTerm::Incomplete),
            Some(len) if len < nodes.len() => Err(MalformedTerm::Trailing(len)),
            Some(_) => Ok(Term { nodes }),
        }
    }

    /// Caller guarantees `nodes` is a complete prefix word.
    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Term {
        debug_assert_eq!(complete_len(&nodes), Some(nodes.len()));
        Term { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Node> {
        self.nodes
    }

    pub fn as_ref(&self) -> TermRef<'_> {
        TermRef { nodes: &self.nodes }
    }

    pub fn view(&self) -> TermView<'_> {
        self.as_ref().view()
    }

    /// Number of constructors (leaves, abstractions, applications).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn openness(&self) -> u64 {
        openness(self)
    }

    pub fn is_closed(&self) -> bool {
        self.openness() == 0
    }

    pub fn is_normal_form(&self) -> bool {
        is_normal_form(self)
    }

    pub fn metrics(&self) -> TermMetrics {
        term_metrics(self)
    }

    /// Largest De Bruijn index occurring in the term.
    pub fn max_index(&self) -> u64 {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(s) => Some(s + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

impl<'a> TermRef<'a> {
    pub fn nodes(&self) -> &'a [Node] {
        self.nodes
    }

    pub fn view(&self) -> TermView<'a> {
        match self.nodes[0] {
            Node::Var(s) => TermView::Var(s),
            Node::Abs => TermView::Abs(TermRef { nodes: &self.nodes[1..] }),
            Node::App => {
                let rest = &self.nodes[1..];
                let split = complete_len(rest).expect("well-formed term");
                TermView::App(TermRef { nodes: &rest[..split] }, TermRef { nodes: &rest[split..] })
            }
        }
    }

    pub fn to_term(&self) -> Term {
        Term { nodes: self.nodes.to_vec() }
    }
}

/// Minimal `m` such that prefixing `m` abstractions closes the term.
pub fn openness(t: &Term) -> u64 {
    let mut depths: Vec<u64> = vec![0];
    let mut open = 0u64;
    for node in t.nodes() {
        let depth = depths.pop().expect("well-formed term");
        match *node {
            Node::Var(s) => open = open.max((s + 1).saturating_sub(depth)),
            Node::Abs => depths.push(depth + 1),
            Node::App => {
                depths.push(depth);
                depths.push(depth);
            }
        }
    }
    open
}

/// A redex is an application whose left operand is an abstraction; in
/// prefix order that is an `App` immediately followed by an `Abs`.
pub fn is_normal_form(t: &Term) -> bool {
    !t.nodes().windows(2).any(|w| w[0] == Node::App && w[1] == Node::Abs)
}

pub fn term_metrics(t: &Term) -> TermMetrics {
    let mut m = TermMetrics::default();
    let mut levels: Vec<u64> = vec![1];
    for node in t.nodes() {
        let level = levels.pop().expect("well-formed term");
        m.depth = m.depth.max(level);
        match *node {
            Node::Var(s) => {
                m.variables += 1;
                m.successors += s;
            }
            Node::Abs => {
                m.abstractions += 1;
                levels.push(level + 1);
            }
            Node::App => {
                m.applications += 1;
                levels.push(level + 1);
                levels.push(level + 1);
            }
        }
    }
    m
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self, RenderStyle::Integers))
    }
}

impl FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}
