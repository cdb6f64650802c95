//! Exhaustive generation of all terms of a given size.
//!
//! Order: the leaf first, then the abstraction, then applications by
//! ascending size of the left operand; within each branch the subterms
//! come in the same order recursively.

use std::ops::ControlFlow;

use super::CountError;
use crate::size_model::SizeSpec;
use crate::term::{Node, Term};

/// Largest size enumerated unless configured otherwise.
pub const DEFAULT_ENUM_CAP: u64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Terms with openness at most `m`.
    Open(u64),
    /// All terms.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Filter {
    #[default]
    All,
    /// No subterm of the form `(λM) N`.
    NormalForm,
    /// Exactly `q` abstractions.
    Abstractions(u64),
    /// Every index at most `h`.
    MaxIndex(u64),
    /// Members of the superclass `L_{m,N}`: below `N` enclosing
    /// abstractions a leaf must be bound, from `N` on any leaf is allowed.
    Superclass(u64),
}

#[derive(Debug, Clone)]
pub struct Enumerator {
    spec: SizeSpec,
    scope: Scope,
    filter: Filter,
    cap: u64,
}

struct State {
    nodes: Vec<Node>,
    abstractions: u64,
}

type Cont<'a> = dyn FnMut(&mut State) -> ControlFlow<()> + 'a;

impl Enumerator {
    pub fn new(spec: SizeSpec, scope: Scope, filter: Filter) -> Enumerator {
        Enumerator { spec, scope, filter, cap: DEFAULT_ENUM_CAP }
    }

    pub fn with_cap(mut self, cap: u64) -> Enumerator {
        self.cap = cap;
        self
    }

    /// Calls `f` on every matching term of size `n`, stopping early when
    /// `f` breaks.
    pub fn for_each<F>(&self, n: u64, mut f: F) -> Result<ControlFlow<()>, CountError>
    where
        F: FnMut(&Term) -> ControlFlow<()>,
    {
        if n > self.cap {
            return Err(CountError::ResourceLimit { n, cap: self.cap });
        }
        if let Filter::MaxIndex(0) = self.filter {
            return Err(CountError::InvalidArgument("successor bound h must be at least 1".into()));
        }
        let level = match self.scope {
            Scope::Open(m) => m,
            Scope::Any => 0,
        };
        let want_q = match self.filter {
            Filter::Abstractions(q) => Some(q),
            _ => None,
        };
        let mut state = State { nodes: Vec::new(), abstractions: 0 };
        let mut done = |s: &mut State| {
            if want_q.is_some_and(|q| q != s.abstractions) {
                return ControlFlow::Continue(());
            }
            f(&Term::from_nodes_unchecked(s.nodes.clone()))
        };
        Ok(self.gen(level, n, false, &mut state, &mut done))
    }

    pub fn collect(&self, n: u64) -> Result<Vec<Term>, CountError> {
        let mut out = Vec::new();
        let _ = self.for_each(n, |t| {
            out.push(t.clone());
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    pub fn count(&self, n: u64) -> Result<u64, CountError> {
        let mut k = 0u64;
        let _ = self.for_each(n, |_| {
            k += 1;
            ControlFlow::Continue(())
        })?;
        Ok(k)
    }

    fn leaf_allowed(&self, level: u64, s: u64) -> bool {
        let bound = match (self.scope, self.filter) {
            (Scope::Any, _) => true,
            (_, Filter::Superclass(top)) if level >= top => true,
            _ => s < level,
        };
        bound && !matches!(self.filter, Filter::MaxIndex(h) if s >= h)
    }

    /// Generates every term of size `n` at `level`, calling `k` with each
    /// one appended to the state.
    fn gen(&self, level: u64, n: u64, no_abs: bool, st: &mut State, k: &mut Cont<'_>) -> ControlFlow<()> {
        let (c, d) = (self.spec.c(), self.spec.d());

        if let Some(s) = self.spec.leaf_successors(n) {
            if self.leaf_allowed(level, s) {
                st.nodes.push(Node::Var(s));
                let r = k(st);
                st.nodes.pop();
                r?;
            }
        }

        let q_room = match self.filter {
            Filter::Abstractions(q) => st.abstractions < q,
            _ => true,
        };
        if n >= c && !no_abs && q_room {
            st.nodes.push(Node::Abs);
            st.abstractions += 1;
            let r = self.gen(level + 1, n - c, false, st, k);
            st.abstractions -= 1;
            st.nodes.pop();
            r?;
        }

        if n >= d {
            let s = n - d;
            // without a size-0 leaf, operands have positive size
            let (lo, hi) = if d == 0 { (1, s.saturating_sub(1)) } else { (0, s) };
            let normal = self.filter == Filter::NormalForm;
            for i in lo..=hi {
                if d == 0 && s < 2 {
                    break;
                }
                st.nodes.push(Node::App);
                let r = self.gen(level, i, normal, st, &mut |st: &mut State| {
                    self.gen(level, s - i, false, st, k)
                });
                st.nodes.pop();
                r?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Every m-open term of size `n` matching `filter`, under the default cap.
pub fn enumerate_terms(spec: &SizeSpec, m: u64, n: u64, filter: Filter) -> Result<Vec<Term>, CountError> {
    Enumerator::new(*spec, Scope::Open(m), filter).collect(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size_model::Preset;

    fn nat() -> SizeSpec {
        Preset::Natural.spec()
    }

    fn show(ts: &[Term]) -> Vec<String> {
        ts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn small_sizes() {
        assert_eq!(show(&enumerate_terms(&nat(), 0, 2, Filter::All).unwrap()), ["λ1"]);
        assert!(enumerate_terms(&nat(), 0, 1, Filter::All).unwrap().is_empty());
        assert_eq!(show(&enumerate_terms(&nat(), 0, 4, Filter::All).unwrap()), ["λλ2", "λλλ1", "λ1 1"]);
    }

    #[test]
    fn normal_forms_of_size_five() {
        let ts = enumerate_terms(&nat(), 0, 5, Filter::NormalForm).unwrap();
        assert_eq!(ts.len(), 4);
        assert!(ts.iter().all(|t| t.is_normal_form()));
        assert_eq!(enumerate_terms(&nat(), 0, 5, Filter::All).unwrap().len(), 6);
    }

    #[test]
    fn order_is_leaf_abs_then_apps() {
        let ts = Enumerator::new(nat(), Scope::Any, Filter::All).collect(3).unwrap();
        assert_eq!(show(&ts), ["3", "λ2", "λλ1", "1 1"]);
    }

    #[test]
    fn filters() {
        let e = Enumerator::new(nat(), Scope::Open(1), Filter::MaxIndex(1));
        assert_eq!(e.count(3).unwrap(), 2);
        let e = Enumerator::new(nat(), Scope::Open(1), Filter::Abstractions(0));
        assert_eq!(show(&e.collect(3).unwrap()), ["1 1"]);
        let e = Enumerator::new(nat(), Scope::Open(0), Filter::Superclass(1));
        // under one abstraction any index is allowed: λ2 joins λλ1
        assert_eq!(show(&e.collect(3).unwrap()), ["λ2", "λλ1"]);
    }

    #[test]
    fn cap_and_early_stop() {
        let e = Enumerator::new(nat(), Scope::Open(0), Filter::All).with_cap(5);
        assert_eq!(e.count(6), Err(CountError::ResourceLimit { n: 6, cap: 5 }));
        let mut seen = 0;
        let r = e
            .for_each(5, |_| {
                seen += 1;
                if seen == 2 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .unwrap();
        assert_eq!((seen, r), (2, ControlFlow::Break(())));
    }

    #[test]
    fn size_zero_leaf() {
        let spec = Preset::LessNatural.spec();
        let e = Enumerator::new(spec, Scope::Open(1), Filter::All);
        assert_eq!(show(&e.collect(0).unwrap()), ["1"]);
    }
}
