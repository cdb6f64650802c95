#![allow(dead_code)]

use lamcount::{Node, SizeSpec, Term};

/// Everything the family filters look at, computed by one walk over the
/// prefix nodes.
#[derive(Debug, Clone, Default)]
pub struct Shape {
    pub openness: u64,
    pub redex: bool,
    pub abstractions: u64,
    pub max_index: u64,
    /// `(depth, successors)` of every leaf.
    pub leaves: Vec<(u64, u64)>,
}

impl Shape {
    pub fn of(t: &Term) -> Shape {
        let nodes = t.nodes();
        let mut sh = Shape::default();
        let mut depths = vec![0u64];
        for (i, node) in nodes.iter().enumerate() {
            let depth = depths.pop().expect("well-formed term");
            match *node {
                Node::Var(s) => {
                    sh.openness = sh.openness.max((s + 1).saturating_sub(depth));
                    sh.max_index = sh.max_index.max(s + 1);
                    sh.leaves.push((depth, s));
                }
                Node::Abs => {
                    sh.abstractions += 1;
                    depths.push(depth + 1);
                }
                Node::App => {
                    sh.redex |= nodes[i + 1] == Node::Abs;
                    depths.push(depth);
                    depths.push(depth);
                }
            }
        }
        sh
    }

    pub fn in_superclass(&self, m: u64, top: u64) -> bool {
        self.leaves.iter().all(|&(depth, s)| m + depth >= top || s < m + depth)
    }
}

/// All terms of each size `0..=n_max`, built bottom-up by brute force.
pub fn all_terms(spec: &SizeSpec, n_max: u64) -> Vec<Vec<Term>> {
    let (a, b, c, d) = spec.weights();
    let mut by_size: Vec<Vec<Term>> = Vec::new();
    for n in 0..=n_max {
        let mut here = Vec::new();
        if n >= a && (n - a) % b == 0 {
            here.push(Term::var((n - a) / b));
        }
        if n >= c && c > 0 {
            for t in &by_size[(n - c) as usize] {
                here.push(Term::abs(t.clone()));
            }
        }
        if n >= d {
            let s = n - d;
            for i in 0..=s {
                if i >= n || s - i >= n {
                    continue;
                }
                for l in &by_size[i as usize] {
                    for r in &by_size[(s - i) as usize] {
                        here.push(Term::app(l.clone(), r.clone()));
                    }
                }
            }
        }
        by_size.push(here);
    }
    by_size
}

pub fn characteristic(spec: &SizeSpec, z: f64) -> f64 {
    let (a, b, c, d) = spec.weights();
    let p = |k: u64| z.powi(k as i32);
    (1.0 - p(b)) * (1.0 - p(c)).powi(2) - 4.0 * p(a + d)
}

/// Plain bisection for the root of a function positive at `lo` and
/// negative at `hi`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rho(spec: &SizeSpec) -> f64 {
    bisect(|z| characteristic(spec, z), 0.0, 1.0)
}

pub fn natural() -> SizeSpec {
    SizeSpec::new(1, 1, 1, 1).unwrap()
}

pub fn binary() -> SizeSpec {
    SizeSpec::new(2, 1, 2, 2).unwrap()
}

pub fn less_natural() -> SizeSpec {
    SizeSpec::new(0, 1, 1, 1).unwrap()
}
