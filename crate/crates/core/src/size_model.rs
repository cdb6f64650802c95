//! Additive size model for De Bruijn terms.
//!
//! A term's size is the sum of per-constructor weights: `a` for the zero
//! at the bottom of every index, `b` for each successor, `c` for each
//! abstraction and `d` for each application.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

use crate::term::{Node, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("weight `{name}` is negative ({value})")]
    NegativeWeight { name: char, value: i64 },
    #[error("weight `{name}` = {value} does not fit in 32 bits")]
    WeightTooLarge { name: char, value: i64 },
    #[error("a + d must be at least 1")]
    ZeroSum,
    #[error("successor and abstraction weights must be at least 1 (b = {b}, c = {c})")]
    ZeroSuccessorOrAbstraction { b: u32, c: u32 },
    #[error("gcd(b, c, a + d) = {gcd}, expected 1")]
    GcdViolation { gcd: u64 },
    #[error("unknown preset `{0}` (expected natural, less-natural or binary)")]
    UnknownPreset(String),
    #[error("malformed spec `{0}` (expected a,b,c,d)")]
    Malformed(String),
}

/// Validated weights `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SizeSpec {
    a: u32,
    b: u32,
    c: u32,
    d: u32,
}

/// The three named size models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Natural,
    LessNatural,
    Binary,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Natural, Preset::LessNatural, Preset::Binary];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Natural => "natural",
            Preset::LessNatural => "less-natural",
            Preset::Binary => "binary",
        }
    }

    pub fn spec(self) -> SizeSpec {
        let (a, b, c, d) = match self {
            Preset::Natural => (1, 1, 1, 1),
            Preset::LessNatural => (0, 1, 1, 2),
            Preset::Binary => (2, 1, 2, 2),
        };
        SizeSpec { a, b, c, d }
    }
}

impl FromStr for Preset {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "natural" => Ok(Preset::Natural),
            "less-natural" => Ok(Preset::LessNatural),
            "binary" => Ok(Preset::Binary),
            other => Err(SpecError::UnknownPreset(other.to_string())),
        }
    }
}

pub fn preset_spec(name: &str) -> Result<SizeSpec, SpecError> {
    name.parse::<Preset>().map(Preset::spec)
}

impl SizeSpec {
    /// Checks the four admissibility conditions in order and reports the
    /// first one that fails.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, SpecError> {
        let mut w = [0u32; 4];
        for (slot, (name, value)) in w.iter_mut().zip([('a', a), ('b', b), ('c', c), ('d', d)]) {
            if value < 0 {
                return Err(SpecError::NegativeWeight { name, value });
            }
            *slot = u32::try_from(value).map_err(|_| SpecError::WeightTooLarge { name, value })?;
        }
        let [a, b, c, d] = w;
        if a as u64 + d as u64 == 0 {
            return Err(SpecError::ZeroSum);
        }
        if b == 0 || c == 0 {
            return Err(SpecError::ZeroSuccessorOrAbstraction { b, c });
        }
        let gcd = (b as u64).gcd(&(c as u64)).gcd(&(a as u64 + d as u64));
        if gcd != 1 {
            return Err(SpecError::GcdViolation { gcd });
        }
        Ok(SizeSpec { a, b, c, d })
    }

    pub fn a(&self) -> u64 {
        self.a as u64
    }
    pub fn b(&self) -> u64 {
        self.b as u64
    }
    pub fn c(&self) -> u64 {
        self.c as u64
    }
    pub fn d(&self) -> u64 {
        self.d as u64
    }

    pub fn weights(&self) -> (u64, u64, u64, u64) {
        (self.a(), self.b(), self.c(), self.d())
    }

    /// Size of the leaf with `s` successors, i.e. index `s + 1`.
    pub fn leaf_size(&self, s: u64) -> u64 {
        self.a() + self.b() * s
    }

    /// Number of successors of the leaf of size `n`, if one exists.
    pub fn leaf_successors(&self, n: u64) -> Option<u64> {
        if n < self.a() || !(n - self.a()).is_multiple_of(self.b()) {
            None
        } else {
            Some((n - self.a()) / self.b())
        }
    }

    /// Least `m` with `a + b*m > n`. At that openness level and above, the
    /// leaf constraint no longer excludes any term of size `n`.
    pub fn stabilization_level(&self, n: u64) -> u64 {
        if n < self.a() {
            0
        } else {
            (n - self.a()) / self.b() + 1
        }
    }

    /// Name of the preset with these weights, if any.
    pub fn preset(&self) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.spec() == *self)
    }

    pub fn term_size(&self, t: &Term) -> u128 {
        t.nodes()
            .iter()
            .map(|node| match *node {
                Node::Var(s) => self.a() as u128 + self.b() as u128 * s as u128,
                Node::Abs => self.c() as u128,
                Node::App => self.d() as u128,
            })
            .sum()
    }
}

pub fn term_size(spec: &SizeSpec, t: &Term) -> u128 {
    spec.term_size(t)
}

impl fmt::Display for SizeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for SizeSpec {
    type Err = SpecError;

    /// Accepts either a preset name or `a,b,c,d`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(p) = s.parse::<Preset>() {
            return Ok(p.spec());
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(SpecError::Malformed(s.to_string()));
        }
        let mut w = [0i64; 4];
        for (slot, p) in w.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| SpecError::Malformed(s.to_string()))?;
        }
        SizeSpec::new(w[0], w[1], w[2], w[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_presets() {
        assert_eq!(SizeSpec::new(1, 1, 1, 1).unwrap(), Preset::Natural.spec());
        assert_eq!(SizeSpec::new(0, 1, 1, 2).unwrap(), Preset::LessNatural.spec());
        assert_eq!(preset_spec("binary").unwrap().weights(), (2, 1, 2, 2));
        assert_eq!(preset_spec("natural").unwrap().weights(), (1, 1, 1, 1));
    }

    #[test]
    fn rejects_each_clause() {
        assert_eq!(SizeSpec::new(0, 2, 2, 2), Err(SpecError::GcdViolation { gcd: 2 }));
        assert_eq!(SizeSpec::new(0, 1, 1, 0), Err(SpecError::ZeroSum));
        assert!(matches!(
            SizeSpec::new(1, 0, 1, 1),
            Err(SpecError::ZeroSuccessorOrAbstraction { .. })
        ));
        assert!(matches!(
            SizeSpec::new(1, 1, 0, 1),
            Err(SpecError::ZeroSuccessorOrAbstraction { .. })
        ));
        assert!(matches!(
            SizeSpec::new(1, -1, 1, 1),
            Err(SpecError::NegativeWeight { name: 'b', .. })
        ));
        assert!(matches!(preset_spec("foo"), Err(SpecError::UnknownPreset(_))));
    }

    #[test]
    fn parses_quadruples() {
        assert_eq!("2,1,2,2".parse::<SizeSpec>().unwrap(), Preset::Binary.spec());
        assert_eq!("less-natural".parse::<SizeSpec>().unwrap(), Preset::LessNatural.spec());
        assert!("1,1,1".parse::<SizeSpec>().is_err());
        assert_eq!(Preset::Binary.spec().to_string(), "2,1,2,2");
    }

    #[test]
    fn sizes_of_small_terms() {
        let nat = Preset::Natural.spec();
        let t: Term = "\\\\((S0) 0)".parse().unwrap();
        assert_eq!(nat.term_size(&t), 6);
        let id: Term = "\\1".parse().unwrap();
        assert_eq!(Preset::Binary.spec().term_size(&id), 4);
        let spec = SizeSpec::new(3, 2, 5, 1).unwrap();
        assert_eq!(spec.term_size(&Term::var(0)), 3);
    }

    #[test]
    fn stabilization_level() {
        let nat = Preset::Natural.spec();
        assert_eq!(nat.stabilization_level(0), 0);
        assert_eq!(nat.stabilization_level(1), 1);
        assert_eq!(nat.stabilization_level(5), 5);
        let bin = Preset::Binary.spec();
        assert_eq!(bin.stabilization_level(1), 0);
        assert_eq!(bin.stabilization_level(2), 1);
        let less = Preset::LessNatural.spec();
        assert_eq!(less.stabilization_level(0), 1);
    }
}
