//! Exact and scaled counting of term families.
//!
//! Every family is counted from its coefficient recurrence:
//!
//! * m-open terms: `L(m,n) = [leaf of size n with index <= m] + L(m+1, n-c)
//!   + sum_{i+j=n-d} L(m,i) L(m,j)`;
//! * all terms: the same with every index allowed;
//! * bounded successors: as m-open, but indices never exceed `h`;
//! * exactly `q` abstractions: the abstraction count splits over the two
//!   operands of an application;
//! * normal forms: an application is normal when its left operand is a
//!   normal non-abstraction and its right operand is normal;
//! * superclass `N`: as m-open below level `N`, unrestricted from `N` on.
//!
//! [`enumerate`] is the brute-force oracle that all of these are checked
//! against.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::size_model::SizeSpec;

pub mod cache;
pub mod enumerate;
mod table;
mod weights;

pub use enumerate::{enumerate_terms, Enumerator, Filter, Scope};
pub use table::CountTable;
pub use weights::{Exact, Scaled, Weights};

/// Default cap on `n` for exact counting.
pub const DEFAULT_MAX_N: u64 = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("size {n} exceeds the configured cap {cap}")]
    ResourceLimit { n: u64, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    MOpen,
    Unrestricted,
    /// Every index is at most `h`.
    BoundedSuccessors { h: u64 },
    /// Exactly `q` abstractions, for all `q <= max_q`.
    QAbstractions { max_q: u64 },
    NormalForm,
    /// `L_{m,N}`: leaf constraint dropped from level `top` on.
    Superclass { top: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::MOpen => "m-open",
            Family::Unrestricted => "unrestricted",
            Family::BoundedSuccessors { .. } => "bounded-h",
            Family::QAbstractions { .. } => "q-abstractions",
            Family::NormalForm => "normal-form",
            Family::Superclass { .. } => "superclass-N",
        }
    }

    /// Family-specific parameter as `key=value`, if any.
    pub fn param(&self) -> Option<(&'static str, u64)> {
        match *self {
            Family::BoundedSuccessors { h } => Some(("h", h)),
            Family::QAbstractions { max_q } => Some(("q", max_q)),
            Family::Superclass { top } => Some(("N", top)),
            _ => None,
        }
    }

    pub fn from_parts(name: &str, param: Option<u64>) -> Option<Family> {
        Some(match (name, param) {
            ("m-open", None) => Family::MOpen,
            ("unrestricted", None) => Family::Unrestricted,
            ("bounded-h", Some(h)) => Family::BoundedSuccessors { h },
            ("q-abstractions", Some(max_q)) => Family::QAbstractions { max_q },
            ("normal-form", None) => Family::NormalForm,
            ("superclass-N", Some(top)) => Family::Superclass { top },
            _ => return None,
        })
    }

    fn validate(&self) -> Result<(), CountError> {
        match *self {
            Family::BoundedSuccessors { h: 0 } => {
                Err(CountError::InvalidArgument("successor bound h must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some((k, v)) => write!(f, "{}({}={})", self.name(), k, v),
            None => f.write_str(self.name()),
        }
    }
}

/// Exact counts for one size model, with tables kept between queries.
///
/// Tables grow on demand: a query outside the computed region rebuilds the
/// family's table with at least the requested size and level.
#[derive(Debug)]
pub struct Counter {
    spec: SizeSpec,
    cap: u64,
    tables: HashMap<Family, CountTable<Exact>>,
}

fn grow(k: u64) -> u64 {
    k + k / 2 + 1
}

impl Counter {
    pub fn new(spec: SizeSpec) -> Counter {
        Counter { spec, cap: DEFAULT_MAX_N, tables: HashMap::new() }
    }

    pub fn with_cap(spec: SizeSpec, cap: u64) -> Counter {
        Counter { spec, cap, tables: HashMap::new() }
    }

    pub fn spec(&self) -> SizeSpec {
        self.spec
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Installs a prebuilt table, e.g. one read from the disk cache.
    pub fn insert_table(&mut self, table: CountTable<Exact>) {
        assert_eq!(table.spec(), self.spec, "table built for another size model");
        self.tables.insert(table.family(), table);
    }

    pub fn table(&self, family: Family) -> Option<&CountTable<Exact>> {
        self.tables.get(&family)
    }

    /// Makes sure the family's table answers `(m, n)` and returns it.
    pub fn ensure(&mut self, family: Family, m: u64, n: u64) -> Result<&CountTable<Exact>, CountError> {
        family.validate()?;
        if n > self.cap {
            return Err(CountError::ResourceLimit { n, cap: self.cap });
        }
        let fresh = match self.tables.get(&family) {
            Some(t) if t.covers(m, n) => None,
            // grow with headroom so that scans over increasing queries
            // rebuild only logarithmically often
            Some(t) => Some((n.max(grow(t.max_n())).min(self.cap.max(n)), m.max(grow(t.max_level())))),
            None => Some((n, m)),
        };
        if let Some((max_n, max_level)) = fresh {
            let t = CountTable::build(self.spec, family, max_n, max_level, Exact);
            self.tables.insert(family, t);
        }
        Ok(&self.tables[&family])
    }

    fn lookup(&mut self, family: Family, m: u64, n: u64) -> Result<BigUint, CountError> {
        let t = self.ensure(family, m, n)?;
        Ok(t.get(m, n).cloned().expect("covered entry"))
    }

    /// Number of m-open terms of size `n`.
    pub fn m_open(&mut self, m: u64, n: u64) -> Result<BigUint, CountError> {
        self.lookup(Family::MOpen, m, n)
    }

    pub fn unrestricted(&mut self, n: u64) -> Result<BigUint, CountError> {
        self.lookup(Family::Unrestricted, 0, n)
    }

    /// m-open terms in which every index is at most `h`.
    pub fn bounded_successors(&mut self, m: u64, h: u64, n: u64) -> Result<BigUint, CountError> {
        self.lookup(Family::BoundedSuccessors { h }, m, n)
    }

    /// m-open terms with exactly `q` abstractions.
    pub fn q_abstractions(&mut self, m: u64, q: u64, n: u64) -> Result<BigUint, CountError> {
        if q > n / self.spec.c() {
            if n > self.cap {
                return Err(CountError::ResourceLimit { n, cap: self.cap });
            }
            return Ok(BigUint::default());
        }
        let family = self.q_family(q);
        let t = self.ensure(family, m, n)?;
        Ok(t.get_q(m, q, n).cloned().expect("covered entry"))
    }

    /// Reuses a table with a larger `max_q` when one exists, otherwise
    /// replaces the largest one by a table with room to spare.
    fn q_family(&mut self, q: u64) -> Family {
        let have: Vec<u64> = self
            .tables
            .keys()
            .filter_map(|f| match *f {
                Family::QAbstractions { max_q } => Some(max_q),
                _ => None,
            })
            .collect();
        if let Some(&max_q) = have.iter().filter(|&&k| k >= q).min() {
            return Family::QAbstractions { max_q };
        }
        let Some(&largest) = have.iter().max() else {
            return Family::QAbstractions { max_q: q };
        };
        let old = self.tables.remove(&Family::QAbstractions { max_q: largest }).expect("listed table");
        let max_q = q.max(grow(largest));
        let family = Family::QAbstractions { max_q };
        let t = CountTable::build(self.spec, family, old.max_n(), old.max_level(), Exact);
        self.tables.insert(family, t);
        family
    }

    /// m-open terms with at most `q` abstractions.
    pub fn at_most_q(&mut self, m: u64, q: u64, n: u64) -> Result<BigUint, CountError> {
        let q = q.min(n / self.spec.c());
        let mut total = BigUint::default();
        for l in 0..=q {
            total += self.q_abstractions(m, l, n)?;
        }
        Ok(total)
    }

    pub fn normal_form(&mut self, m: u64, n: u64) -> Result<BigUint, CountError> {
        self.lookup(Family::NormalForm, m, n)
    }

    /// Coefficient of `L_{m,N}`; requires `m <= N`.
    pub fn superclass(&mut self, top: u64, m: u64, n: u64) -> Result<BigUint, CountError> {
        if m > top {
            return Err(CountError::InvalidArgument(format!("superclass level m = {m} exceeds N = {top}")));
        }
        self.lookup(Family::Superclass { top }, m, n)
    }

    /// Terms of size `n` that are not m-open.
    pub fn not_m_open(&mut self, m: u64, n: u64) -> Result<BigUint, CountError> {
        let all = self.unrestricted(n)?;
        let open = self.m_open(m, n)?;
        Ok(all - open)
    }
}

pub fn count_m_open(spec: &SizeSpec, m: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).m_open(m, n)
}

pub fn count_unrestricted(spec: &SizeSpec, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).unrestricted(n)
}

pub fn count_bounded_successors(spec: &SizeSpec, m: u64, h: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).bounded_successors(m, h, n)
}

pub fn count_q_abstractions(spec: &SizeSpec, m: u64, q: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).q_abstractions(m, q, n)
}

pub fn count_at_most_q(spec: &SizeSpec, m: u64, q: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).at_most_q(m, q, n)
}

pub fn count_normal_form(spec: &SizeSpec, m: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).normal_form(m, n)
}

pub fn count_superclass(spec: &SizeSpec, top: u64, m: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).superclass(top, m, n)
}

pub fn count_not_m_open(spec: &SizeSpec, m: u64, n: u64) -> Result<BigUint, CountError> {
    Counter::new(*spec).not_m_open(m, n)
}

/// `u(m, n) = count * rho^n` for `n = 0..=max_n` at level `m`, for every
/// family except [`Family::QAbstractions`].
pub fn scaled_counts(spec: &SizeSpec, family: Family, m: u64, max_n: u64, rho: f64) -> Vec<f64> {
    let t = CountTable::build(*spec, family, max_n, m, Scaled { rho });
    (0..=max_n).map(|n| *t.get(m, n).expect("covered entry")).collect()
}

/// `count * rho^n` for exactly `q` abstractions, `n = 0..=max_n`.
pub fn scaled_q_counts(spec: &SizeSpec, m: u64, q: u64, max_n: u64, rho: f64) -> Vec<f64> {
    let t = CountTable::build(*spec, Family::QAbstractions { max_q: q }, max_n, m, Scaled { rho });
    (0..=max_n)
        .map(|n| t.get_q(m, q, n).copied().unwrap_or(0.0))
        .collect()
}
