mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lamcount::asymptotics::{self, DEFAULT_TOL};
use lamcount::counting::{self, Counter, Enumerator, Family, Filter, Scope};
use lamcount::sampler::{self, SizeWindow};
use lamcount::{Preset, SizeSpec, Term};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{natural, Shape};

type Outcome = Result<String, String>;

fn within(what: &str, got: f64, want: f64, tol: f64) -> Outcome {
    if (got - want).abs() <= tol {
        Ok(format!("{what} = {got:.10}"))
    } else {
        Err(format!("{what} = {got:.10}, expected {want} +- {tol:e}"))
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn num<E: std::fmt::Display>(r: Result<f64, E>) -> Result<f64, String> {
    r.map_err(|e| e.to_string())
}

fn singularities() -> Outcome {
    let rho = |spec: &SizeSpec| num(asymptotics::dominant_singularity(spec, DEFAULT_TOL).map(|s| s.rho));
    let natural = rho(&Preset::Natural.spec())?;
    let binary = rho(&Preset::Binary.spec())?;
    all(vec![
        within("rho natural", natural, 0.295598, 1e-5),
        within("rho binary", binary, 0.509308, 1e-5),
        within("1/rho binary", 1.0 / binary, 1.963448, 1e-4),
        within("rho natural vs bisection", natural, common::rho(&Preset::Natural.spec()), 1e-12),
    ])
}

fn normal_form_constants() -> Outcome {
    let mut parts = Vec::new();
    for (p, rt, ratio) in [(Preset::Natural, 0.318876, 0.926999), (Preset::Binary, 0.526219, 0.967864)] {
        let nf = asymptotics::normal_form_singularity(&p.spec(), DEFAULT_TOL).map_err(|e| e.to_string())?;
        parts.push(within(&format!("rho_tilde {}", p.name()), nf.rho_tilde, rt, 1e-5));
        parts.push(within(&format!("ratio {}", p.name()), nf.ratio, ratio, 1e-5));
    }
    all(parts)
}

fn constant_bands() -> Outcome {
    let mut parts = Vec::new();
    for (p, lo, hi) in [(Preset::Natural, 0.07790995266, 0.0779099823), (Preset::Binary, 0.01252417, 0.01254594)] {
        let c100 = num(asymptotics::leading_constant_estimate(&p.spec(), 0, 100))?;
        let c200 = num(asymptotics::leading_constant_estimate(&p.spec(), 0, 200))?;
        parts.push(if c100 >= lo - 1e-4 && c100 <= hi + 1e-4 {
            Ok(format!("C {} = {c100:.12}", p.name()))
        } else {
            Err(format!("C {} = {c100:.12} outside [{lo}, {hi}] +- 1e-4", p.name()))
        });
        let rel = (c100 - c200).abs() / c200;
        parts.push(if rel < 5e-7 {
            Ok(format!("N=100 vs 200 rel diff {rel:.1e}"))
        } else {
            Err(format!("{}: N=100 gives {c100}, N=200 gives {c200}", p.name()))
        });
    }
    all(parts)
}

/// Every term of each size up to `n_max`, produced by the library
/// enumerator and classified here.
fn oracle_equivalence() -> Outcome {
    let mut compared = 0u64;
    for p in Preset::ALL {
        let spec = p.spec();
        let n_max = if p == Preset::Natural { 14 } else { 12 };
        let mut c = Counter::new(spec);
        for n in 0..=n_max {
            let mut tally: HashMap<String, u64> = HashMap::new();
            let mut bump = |k: String| *tally.entry(k).or_default() += 1;
            let _ = Enumerator::new(spec, Scope::Any, Filter::All).with_cap(n_max).for_each(n, |t: &Term| {
                let sh = Shape::of(t);
                bump("all".into());
                for m in 0..=3 {
                    if sh.openness <= m {
                        bump(format!("open {m}"));
                        if !sh.redex {
                            bump(format!("nf {m}"));
                        }
                        if sh.abstractions <= 3 {
                            bump(format!("q {m} {}", sh.abstractions));
                        }
                        for h in sh.max_index.max(1)..=3 {
                            bump(format!("h {m} {h}"));
                        }
                    }
                    for top in m..=6 {
                        if sh.in_superclass(m, top) {
                            bump(format!("sup {m} {top}"));
                        }
                    }
                }
                std::ops::ControlFlow::Continue(())
            })
            .map_err(|e| e.to_string())?;

            let want = |k: String| BigUint::from(tally.get(&k).copied().unwrap_or(0));
            let mut check = |k: String, got: Result<BigUint, counting::CountError>| -> Result<(), String> {
                let got = got.map_err(|e| e.to_string())?;
                compared += 1;
                if got == want(k.clone()) {
                    Ok(())
                } else {
                    Err(format!("{} n={n} {k}: counted {got}, enumerated {}", p.name(), want(k.clone())))
                }
            };
            check("all".into(), c.unrestricted(n))?;
            for m in 0..=3 {
                check(format!("open {m}"), c.m_open(m, n))?;
                check(format!("nf {m}"), c.normal_form(m, n))?;
                for q in 0..=3 {
                    check(format!("q {m} {q}"), c.q_abstractions(m, q, n))?;
                }
                for h in 1..=3 {
                    check(format!("h {m} {h}"), c.bounded_successors(m, h, n))?;
                }
                for top in m..=6 {
                    check(format!("sup {m} {top}"), c.superclass(top, m, n))?;
                }
            }
        }
    }
    Ok(format!("{compared} counts agree with enumeration"))
}

fn structural_identities() -> Outcome {
    let n_max = 40;
    let mut c = Counter::new(natural());
    let e = |x: counting::CountError| x.to_string();
    for n in 0..=n_max {
        let unrestricted = c.unrestricted(n).map_err(e)?;
        let mut prev = BigUint::from(0u8);
        for m in 0..=n_max + 2 {
            let l = c.m_open(m, n).map_err(e)?;
            if l < prev || l > unrestricted {
                return Err(format!("m-monotonicity fails at m={m}, n={n}"));
            }
            let sum = (0..=n).try_fold(BigUint::from(0u8), |acc, q| c.q_abstractions(m, q, n).map(|x| acc + x));
            if sum.map_err(e)? != l {
                return Err(format!("partition fails at m={m}, n={n}"));
            }
            let mut prev_h = BigUint::from(0u8);
            for h in 1..=n_max + 2 {
                let lh = c.bounded_successors(m, h, n).map_err(e)?;
                if lh < prev_h || lh > l || (h >= n && lh != l) {
                    return Err(format!("h-monotonicity fails at m={m}, h={h}, n={n}"));
                }
                prev_h = lh;
            }
            let k = c.not_m_open(m, n).map_err(e)?;
            if k.clone() + &l != unrestricted {
                return Err(format!("K + L != unrestricted at m={m}, n={n}"));
            }
            prev = l;
        }
    }
    for top in 0..=n_max {
        for m in 0..=top.min(4) {
            for n in 0..=top {
                if c.superclass(top, m, n).map_err(e)? != c.m_open(m, n).map_err(e)? {
                    return Err(format!("superclass N={top} disagrees at m={m}, n={n}"));
                }
            }
        }
    }
    Ok(format!("n <= {n_max}: monotone in m and h, partition, K >= 0, superclass agreement"))
}

fn scaled_constant() -> Outcome {
    let spec = natural();
    let rho = num(asymptotics::dominant_singularity(&spec, DEFAULT_TOL).map(|s| s.rho))?;
    let n = 1000;
    let u = counting::scaled_counts(&spec, Family::MOpen, 0, n, rho);
    let est = u[n as usize] * (n as f64).powf(1.5);
    let c = num(asymptotics::leading_constant_estimate(&spec, 0, 100))?;
    let rel = (est - c).abs() / c;
    let msg = format!("u(0,{n}) n^1.5 = {est:.8}, C = {c:.8}, rel diff {rel:.4}");
    if rel <= 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn normal_form_slope() -> Outcome {
    let spec = natural();
    let mut c = Counter::new(spec);
    let e = |x: counting::CountError| x.to_string();
    let mut log_ratio = |n: u64| -> Result<f64, String> {
        let b = c.normal_form(0, n).map_err(e)?.to_f64().unwrap();
        let l = c.m_open(0, n).map_err(e)?.to_f64().unwrap();
        Ok((b / l).ln())
    };
    let n = 400;
    let slope = (log_ratio(n + 1)? - log_ratio(n - 1)?) / 2.0;
    let mean = log_ratio(n)? / n as f64;
    let want = 0.926999f64.ln();
    let rel = (slope - want).abs() / want.abs();
    let msg = format!("slope at n={n} = {slope:.6}, log(B/L)/n = {mean:.6}, log 0.926999 = {want:.6}, rel diff {rel:.3}");
    if rel <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn branch_probabilities() -> Outcome {
    let spec = natural();
    let t = sampler::build_tables(&spec, 20, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let law = &t.levels[20];
    let rho = common::rho(&spec);
    let (abs, app) = (rho, (1.0 - rho) / 2.0);
    all(vec![
        within("abstraction", law.abs, abs, 1e-8),
        within("application", law.app, app, 1e-8),
        within("leaf", law.leaf, app, 1e-8),
        within("published abstraction", abs, 0.2955977425, 1e-8),
        within("published application", app, 0.3522011287, 1e-8),
    ])
}

fn uniformity() -> Outcome {
    let spec = natural();
    let size = 8;
    let terms = counting::enumerate_terms(&spec, 0, size, Filter::All).map_err(|e| e.to_string())?;
    let index: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let tables = sampler::build_tables(&spec, 20, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let window = SizeWindow::new(size, size).map_err(|e| e.to_string())?;
    let samples = 10_000u64;
    let mut freq = vec![0u64; terms.len()];
    for i in 0..samples {
        let r = sampler::sample_term(&tables, 0, window, 7, i, 10_000_000).map_err(|e| e.to_string())?;
        let k = index.get(&r.term).ok_or_else(|| format!("sampled term {:?} is not a closed size-8 term", r.term))?;
        freq[*k] += 1;
    }
    let expected = samples as f64 / terms.len() as f64;
    let chi2: f64 = freq.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((terms.len() - 1) as f64).map_err(|e| e.to_string())?;
    let p = 1.0 - dist.cdf(chi2);
    let msg = format!("{} terms, chi2 = {chi2:.2}, p = {p:.4}", terms.len());
    if p > 1e-3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn central_limit() -> Outcome {
    let spec = natural();
    let tables = sampler::build_tables(&spec, 20, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let window = SizeWindow::around(10_000, 0.1).map_err(|e| e.to_string())?;
    let st = sampler::sample_batch_stats(&tables, 0, window, 200, 11, 10_000_000).map_err(|e| e.to_string())?;
    let alpha = (1.0 - common::rho(&spec)) / 2.0;
    let mean_rel = (st.variables_per_size - alpha).abs() / alpha;
    let var_rel = (st.variance_per_size - alpha).abs() / alpha;
    let msg = format!(
        "variables/n = {:.4} (rel {mean_rel:.3}), variance/n = {:.4} (rel {var_rel:.3}), variables per node = {:.4}, target {alpha:.10}",
        st.variables_per_size, st.variance_per_size, st.variables_per_node
    );
    if mean_rel <= 0.05 && var_rel <= 0.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn performance() -> Outcome {
    let spec = natural();
    let start = Instant::now();
    let tables = sampler::build_tables(&spec, 20, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let window = SizeWindow::new(90_000, 110_000).map_err(|e| e.to_string())?;
    let r = sampler::sample_term(&tables, 0, window, 3, 0, u64::MAX).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let size = spec.term_size(&r.term);
    let series = asymptotics::closed_proportion_series(&spec, 20, 200).map_err(|e| e.to_string())?;
    let unbound = 1.0 - series[20].proportion;
    let msg = format!(
        "size {size} in {:.2}s after {} attempts; 1 - b0/b(20,0) = {unbound:.2e}",
        elapsed.as_secs_f64(),
        r.attempts
    );
    let closed = r.term.is_closed() && (90_000..=110_000).contains(&size);
    if closed && elapsed < Duration::from_secs(60) && unbound.abs() < 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn convergence() -> Outcome {
    let spec = natural();
    let rho = num(asymptotics::dominant_singularity(&spec, DEFAULT_TOL).map(|s| s.rho))?;
    let series = asymptotics::rho_h_series(&spec, 60, DEFAULT_TOL).map_err(|e| e.to_string())?;
    for w in series.windows(2) {
        let ((h0, r0), (h1, r1)) = (w[0], w[1]);
        // once rho^(h) - rho drops below one ulp of rho, consecutive values coincide
        let resolvable = r0 - rho > 4.0 * f64::EPSILON;
        if r1 > r0 || (resolvable && r1 >= r0) || r1 < rho - 4.0 * f64::EPSILON {
            return Err(format!("rho^({h0}) = {r0}, rho^({h1}) = {r1}, rho = {rho}"));
        }
    }
    let last = series[59].1;
    if (last - rho).abs() >= 1e-6 {
        return Err(format!("|rho^(60) - rho| = {:e}", (last - rho).abs()));
    }
    let mut c = Counter::new(spec);
    for n in 0..=25 {
        let sup = c.superclass(25, 0, n).map_err(|e| e.to_string())?;
        let open = c.m_open(0, n).map_err(|e| e.to_string())?;
        if sup != open {
            return Err(format!("superclass N=25 gives {sup} at n={n}, closed terms {open}"));
        }
    }
    Ok(format!("rho^(h) decreasing, |rho^(60) - rho| = {:.1e}; superclass N=25 agrees for n <= 25", (last - rho).abs()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, u64, fn() -> Outcome); 12] = [
        ("1", "singularity constants", 1, singularities),
        ("2", "normal-form constants", 1, normal_form_constants),
        ("3", "leading constant bands", 1, constant_bands),
        ("4", "oracle equivalence", 120, oracle_equivalence),
        ("5", "structural identities", 60, structural_identities),
        ("6a", "scaled-table constant", 300, scaled_constant),
        ("6b", "normal-form decay slope", 300, normal_form_slope),
        ("7", "sampler branch probabilities", 1, branch_probabilities),
        ("8", "sampler uniformity", 60, uniformity),
        ("9", "sampler central limit", 120, central_limit),
        ("10", "sampler performance", 60, performance),
        ("11", "convergence series", 60, convergence),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(d) if secs > limit as f64 => Err(format!("{d}; took {secs:.2}s, limit {limit}s")),
            o => o,
        };
        match outcome {
            Ok(d) => println!("PASS {id:>3} {name} ({secs:.2}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id:>3} {name} ({secs:.2}s): {d}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
