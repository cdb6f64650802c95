//! Singular Boltzmann sampling of m-open terms.
//!
//! Terms are drawn from the superclass `L_{m,N}` at `z = rho`: at level
//! `k < N` a node is a bound leaf, an abstraction (moving to level `k+1`)
//! or an application, with probabilities read off
//! `A_k = z^a sum_{j<k} z^(bj) + z^c A_(k+1) + z^d A_k^2`; at level `N`
//! leaves are unconstrained and their index is geometric. Draws that
//! leave the size window or use an index not bound by an enclosing
//! abstraction are rejected, so conditioned on its size the result is
//! uniform among the m-open terms of that size.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::asymptotics::{self, AsymptoticsError};
use crate::size_model::SizeSpec;
use crate::term::{Node, Term};

/// Default truncation level.
pub const DEFAULT_N: u64 = 20;
/// Default relative window half-width.
pub const DEFAULT_EPSILON: f64 = 0.1;

const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rejections {
    pub oversize: u64,
    pub undersize: u64,
    pub unbound_index: u64,
}

impl Rejections {
    pub fn total(&self) -> u64 {
        self.oversize + self.undersize + self.unbound_index
    }

    fn add(&mut self, other: &Rejections) {
        self.oversize += other.oversize;
        self.undersize += other.undersize;
        self.unbound_index += other.unbound_index;
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("branch probabilities at level {level} sum to {sum}")]
    NormalizationFailure { level: u64, sum: f64 },
    #[error("no term accepted in {attempts} attempts ({rejections:?})")]
    AttemptsExhausted { attempts: u64, rejections: Rejections },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

/// Branch law at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLaw {
    /// `P(leaf with j successors)` for `j` below the level; empty at the
    /// top level, where the index is geometric.
    pub leaves: Vec<f64>,
    /// Total leaf probability.
    pub leaf: f64,
    pub abs: f64,
    pub app: f64,
}

impl LevelLaw {
    pub fn total(&self) -> f64 {
        self.leaf + self.abs + self.app
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerTables {
    pub spec: SizeSpec,
    pub top: u64,
    pub rho: f64,
    /// `A_m = L_{m,N}(rho)` for `m = 0..=N`.
    pub values: Vec<f64>,
    /// Branch laws for `m = 0..=N`.
    pub levels: Vec<LevelLaw>,
}

/// Computes the branch laws for truncation level `top` and checks that
/// each level sums to one.
pub fn build_tables(spec: &SizeSpec, top: u64, tol: f64) -> Result<SamplerTables, SamplerError> {
    if top == 0 {
        return Err(SamplerError::InvalidArgument("N must be at least 1".into()));
    }
    let sc = asymptotics::superclass_constants(spec, top, tol)?;
    let rho = sc.rho;
    let (a, b, c, d) = spec.weights();
    let p = |k: u64| rho.powi(k as i32);
    let values = sc.a;
    let mut levels = Vec::with_capacity(top as usize + 1);
    for m in 0..=top {
        let am = values[m as usize];
        let law = if m < top {
            let leaves: Vec<f64> = (0..m).map(|j| p(a + b * j) / am).collect();
            LevelLaw {
                leaf: leaves.iter().sum(),
                leaves,
                abs: p(c) * values[m as usize + 1] / am,
                app: p(d) * am,
            }
        } else {
            LevelLaw { leaves: Vec::new(), leaf: p(a) / ((1.0 - p(b)) * am), abs: p(c), app: p(d) * am }
        };
        let sum = law.total();
        if !((sum - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(SamplerError::NormalizationFailure { level: m, sum });
        }
        levels.push(LevelLaw {
            leaves: law.leaves.iter().map(|x| x / sum).collect(),
            leaf: law.leaf / sum,
            abs: law.abs / sum,
            app: law.app / sum,
        });
    }
    Ok(SamplerTables { spec: *spec, top, rho, values, levels })
}

/// Inclusive size window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeWindow {
    pub min: u64,
    pub max: u64,
}

impl SizeWindow {
    pub fn new(min: u64, max: u64) -> Result<SizeWindow, SamplerError> {
        if min > max {
            return Err(SamplerError::InvalidArgument(format!("empty size window [{min}, {max}]")));
        }
        Ok(SizeWindow { min, max })
    }

    /// `[(1-eps) n, (1+eps) n]`, rounded outwards (ignoring float noise).
    pub fn around(n: u64, eps: f64) -> Result<SizeWindow, SamplerError> {
        if !(0.0..1.0).contains(&eps) {
            return Err(SamplerError::InvalidArgument(format!("epsilon {eps} outside [0, 1)")));
        }
        let n = n as f64;
        let slack = 1e-9 * n.max(1.0);
        SizeWindow::new(((1.0 - eps) * n + slack).floor() as u64, ((1.0 + eps) * n - slack).ceil() as u64)
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.min..=self.max).contains(&n)
    }
}

enum Branch {
    Leaf(u64),
    Abs,
    App,
}

enum Outcome {
    Done(u64),
    Oversize,
    UnboundIndex,
}

impl SamplerTables {
    fn draw<R: Rng + ?Sized>(&self, level: u64, rng: &mut R) -> Branch {
        let law = &self.levels[level as usize];
        let mut u: f64 = rng.gen();
        if u < law.leaf {
            if level < self.top {
                for (j, &pj) in law.leaves.iter().enumerate() {
                    if u < pj {
                        return Branch::Leaf(j as u64);
                    }
                    u -= pj;
                }
                return Branch::Leaf(law.leaves.len() as u64 - 1);
            }
            // inversion; 1 - U lies in (0, 1]
            let v = 1.0 - rng.gen::<f64>();
            let j = (v.ln() / (self.spec.b() as f64 * self.rho.ln())).floor();
            return Branch::Leaf(j as u64);
        }
        if u < law.leaf + law.abs {
            Branch::Abs
        } else {
            Branch::App
        }
    }

    /// One top-down generation. The stack holds the number of abstractions
    /// enclosing each pending subterm.
    fn attempt<R: Rng + ?Sized>(&self, target_m: u64, max_size: u64, rng: &mut R, nodes: &mut Vec<Node>) -> Outcome {
        let (a, b, c, d) = self.spec.weights();
        nodes.clear();
        let mut size = 0u64;
        let mut pending = vec![0u64];
        while let Some(depth) = pending.pop() {
            let bound = target_m.saturating_add(depth);
            match self.draw(bound.min(self.top), rng) {
                Branch::Leaf(j) => {
                    if j >= bound {
                        return Outcome::UnboundIndex;
                    }
                    size = size.saturating_add(a + b.saturating_mul(j));
                    nodes.push(Node::Var(j));
                }
                Branch::Abs => {
                    size += c;
                    nodes.push(Node::Abs);
                    pending.push(depth + 1);
                }
                Branch::App => {
                    size += d;
                    nodes.push(Node::App);
                    pending.push(depth);
                    pending.push(depth);
                }
            }
            if size > max_size {
                return Outcome::Oversize;
            }
        }
        Outcome::Done(size)
    }
}

/// An accepted term and the cost of finding it.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub term: Term,
    pub size: u64,
    pub attempts: u64,
    pub rejections: Rejections,
}

/// Draws until a term with openness at most `target_m` and size in
/// `window` is produced.
pub fn sample_with_rng<R: Rng + ?Sized>(
    tables: &SamplerTables,
    target_m: u64,
    window: SizeWindow,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Draw, SamplerError> {
    if max_attempts == 0 {
        return Err(SamplerError::InvalidArgument("max_attempts must be at least 1".into()));
    }
    let mut rejections = Rejections::default();
    let mut nodes = Vec::new();
    for attempt in 1..=max_attempts {
        match tables.attempt(target_m, window.max, rng, &mut nodes) {
            Outcome::Oversize => rejections.oversize += 1,
            Outcome::UnboundIndex => rejections.unbound_index += 1,
            Outcome::Done(size) if size < window.min => rejections.undersize += 1,
            Outcome::Done(size) => {
                let term = Term::from_nodes_unchecked(std::mem::take(&mut nodes));
                debug_assert!(term.openness() <= target_m);
                return Ok(Draw { term, size, attempts: attempt, rejections });
            }
        }
    }
    Err(SamplerError::AttemptsExhausted { attempts: max_attempts, rejections })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub term: Term,
    pub size: u64,
    pub attempts: u64,
    pub rejections: Rejections,
    pub rng_seed: u64,
    /// ChaCha stream of `rng_seed` used for this sample.
    pub stream: u64,
}

/// Generator for sample `stream` of a run seeded with `seed`: ChaCha8
/// seeded from `seed` with its stream number set to `stream`.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reproducible sample: the same tables, target, window, seed and stream
/// always give the same report.
pub fn sample_term(
    tables: &SamplerTables,
    target_m: u64,
    window: SizeWindow,
    seed: u64,
    stream: u64,
    max_attempts: u64,
) -> Result<SampleReport, SamplerError> {
    let mut rng = sample_rng(seed, stream);
    let d = sample_with_rng(tables, target_m, window, &mut rng, max_attempts)?;
    Ok(SampleReport {
        term: d.term,
        size: d.size,
        attempts: d.attempts,
        rejections: d.rejections,
        rng_seed: seed,
        stream,
    })
}

/// Aggregates over a batch of accepted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub count: u64,
    pub mean_size: f64,
    pub mean_variables: f64,
    pub var_variables: f64,
    pub mean_abstractions: f64,
    pub var_abstractions: f64,
    /// `sum X / sum n` for the variable counts `X`.
    pub variables_per_size: f64,
    /// `sum (X - mu n)^2 / sum n` with `mu = variables_per_size`.
    pub variance_per_size: f64,
    /// Share of variables among all constructors.
    pub variables_per_node: f64,
    pub attempts: u64,
    pub rejections: Rejections,
    /// Accepted over attempts that were not rejected for their size.
    pub closed_proportion: f64,
    pub elapsed: Duration,
}

/// Draws `count` samples, the `i`-th from stream `i` of `seed`.
pub fn sample_batch_stats(
    tables: &SamplerTables,
    target_m: u64,
    window: SizeWindow,
    count: u64,
    seed: u64,
    max_attempts: u64,
) -> Result<BatchStats, SamplerError> {
    if count == 0 {
        return Err(SamplerError::InvalidArgument("count must be at least 1".into()));
    }
    let start = Instant::now();
    let mut rejections = Rejections::default();
    let mut attempts = 0;
    let mut rows = Vec::with_capacity(count as usize);
    for i in 0..count {
        let r = match sample_term(tables, target_m, window, seed, i, max_attempts) {
            Ok(r) => r,
            Err(SamplerError::AttemptsExhausted { attempts: a, rejections: rj }) => {
                rejections.add(&rj);
                return Err(SamplerError::AttemptsExhausted { attempts: attempts + a, rejections });
            }
            Err(e) => return Err(e),
        };
        attempts += r.attempts;
        rejections.add(&r.rejections);
        let m = r.term.metrics();
        rows.push((r.size as f64, m.variables as f64, m.abstractions as f64, r.term.node_count() as f64));
    }
    let k = count as f64;
    let mean = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / k;
    let var = |f: fn(&(f64, f64, f64, f64)) -> f64, mu: f64| {
        if count < 2 {
            0.0
        } else {
            rows.iter().map(|r| (f(r) - mu).powi(2)).sum::<f64>() / (k - 1.0)
        }
    };
    let mean_variables = mean(|r| r.1);
    let mean_abstractions = mean(|r| r.2);
    let total_size: f64 = rows.iter().map(|r| r.0).sum();
    let total_vars: f64 = rows.iter().map(|r| r.1).sum();
    let total_nodes: f64 = rows.iter().map(|r| r.3).sum();
    let mu = total_vars / total_size;
    let sized = attempts - rejections.oversize - rejections.undersize;
    Ok(BatchStats {
        count,
        mean_size: mean(|r| r.0),
        mean_variables,
        var_variables: var(|r| r.1, mean_variables),
        mean_abstractions,
        var_abstractions: var(|r| r.2, mean_abstractions),
        variables_per_size: mu,
        variance_per_size: rows.iter().map(|r| (r.1 - mu * r.0).powi(2)).sum::<f64>() / total_size,
        variables_per_node: total_vars / total_nodes,
        attempts,
        rejections,
        closed_proportion: count as f64 / sized as f64,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::DEFAULT_TOL;
    use crate::size_model::Preset;

    fn natural() -> SamplerTables {
        build_tables(&Preset::Natural.spec(), DEFAULT_N, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn branch_laws() {
        let t = natural();
        let top = &t.levels[20];
        assert!((top.abs - 0.2955977425).abs() < 1e-8);
        assert!((top.app - 0.3522011287).abs() < 1e-8);
        assert!((top.leaf - 0.3522011287).abs() < 1e-8);
        assert_eq!(t.levels[0].leaf, 0.0);
        for p in Preset::ALL {
            let t = build_tables(&p.spec(), 12, DEFAULT_TOL).unwrap();
            assert!(t.levels.iter().all(|l| (l.total() - 1.0).abs() < 1e-9));
        }
        assert!(build_tables(&Preset::Natural.spec(), 0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn size_two_is_identity() {
        let t = natural();
        let w = SizeWindow::new(2, 2).unwrap();
        for s in 0..20 {
            let r = sample_term(&t, 0, w, 7, s, 100_000).unwrap();
            assert_eq!(r.term.to_string(), "λ1");
        }
    }

    #[test]
    fn deterministic_per_seed_and_stream() {
        let t = natural();
        let w = SizeWindow::around(200, 0.1).unwrap();
        let x = sample_term(&t, 0, w, 42, 3, 1_000_000).unwrap();
        let y = sample_term(&t, 0, w, 42, 3, 1_000_000).unwrap();
        assert_eq!(x, y);
        assert!(x.term.is_closed() && w.contains(x.size));
        assert_eq!(Preset::Natural.spec().term_size(&x.term), x.size as u128);
    }

    #[test]
    fn open_targets() {
        let t = build_tables(&Preset::Binary.spec(), 8, DEFAULT_TOL).unwrap();
        let w = SizeWindow::new(30, 60).unwrap();
        for s in 0..10 {
            let r = sample_term(&t, 2, w, 1, s, 1_000_000).unwrap();
            assert!(r.term.openness() <= 2);
        }
    }

    #[test]
    fn exhausted_attempts() {
        let t = natural();
        let w = SizeWindow::new(1000, 1000).unwrap();
        match sample_term(&t, 0, w, 1, 0, 3) {
            Err(SamplerError::AttemptsExhausted { attempts: 3, rejections }) => assert_eq!(rejections.total(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn batch_guards_and_stats() {
        let t = natural();
        let w = SizeWindow::around(100, 0.1).unwrap();
        assert!(sample_batch_stats(&t, 0, w, 0, 1, 10).is_err());
        let s = sample_batch_stats(&t, 0, w, 20, 5, 1_000_000).unwrap();
        assert_eq!(s.count, 20);
        assert!(s.mean_size >= 90.0 && s.mean_size <= 110.0);
        assert!(s.closed_proportion > 0.0 && s.closed_proportion <= 1.0);
    }

    #[test]
    fn windows() {
        assert_eq!(SizeWindow::around(100, 0.1).unwrap(), SizeWindow { min: 90, max: 110 });
        assert!(SizeWindow::new(3, 2).is_err());
        assert!(SizeWindow::around(10, 1.5).is_err());
    }
}
