//! Cross-validation run by `lamcount selfcheck`.

use num_bigint::BigUint;

use crate::asymptotics::{self, DEFAULT_TOL};
use crate::counting::{Counter, Enumerator, Filter, Scope};
use crate::sampler;
use crate::size_model::{Preset, SizeSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: String, outcome: Result<String, String>) -> CheckResult {
    match outcome {
        Ok(detail) => CheckResult { name, passed: true, detail },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

/// Runs every check for all presets with oracle sizes up to `max_n`.
/// With `inject_fault` one oracle comparison is deliberately perturbed.
pub fn run_selfcheck(max_n: u64, inject_fault: bool) -> Vec<CheckResult> {
    let mut results = Vec::new();
    for p in Preset::ALL {
        let spec = p.spec();
        let name = p.name();
        results.push(check(format!("oracle {name}"), oracle(&spec, max_n, inject_fault)));
        results.push(check(format!("partition {name}"), partition(&spec, max_n)));
        results.push(check(format!("superclass {name}"), superclass(&spec, max_n)));
        results.push(check(format!("roots {name}"), roots(&spec)));
        results.push(check(format!("fixpoint {name}"), fixpoint(&spec)));
    }
    results
}

fn big(k: u64) -> BigUint {
    BigUint::from(k)
}

fn oracle(spec: &SizeSpec, max_n: u64, inject_fault: bool) -> Result<String, String> {
    let mut c = Counter::new(*spec);
    let mut compared = 0;
    let err = |what: &str, n: u64, want: u64, got: &BigUint| Err(format!("{what} at n = {n}: oracle {want}, count {got}"));
    for n in 0..=max_n {
        for m in 0..=2 {
            let e = |filter| Enumerator::new(*spec, Scope::Open(m), filter).with_cap(max_n);
            let mut want = e(Filter::All).count(n).map_err(|e| e.to_string())?;
            if inject_fault && m == 0 && n == max_n {
                want += 1;
            }
            let got = c.m_open(m, n).map_err(|e| e.to_string())?;
            if got != big(want) {
                return err(&format!("m-open m = {m}"), n, want, &got);
            }
            let want = e(Filter::NormalForm).count(n).map_err(|e| e.to_string())?;
            let got = c.normal_form(m, n).map_err(|e| e.to_string())?;
            if got != big(want) {
                return err(&format!("normal forms m = {m}"), n, want, &got);
            }
            for q in 0..=2 {
                let want = e(Filter::Abstractions(q)).count(n).map_err(|e| e.to_string())?;
                let got = c.q_abstractions(m, q, n).map_err(|e| e.to_string())?;
                if got != big(want) {
                    return err(&format!("q = {q} abstractions m = {m}"), n, want, &got);
                }
            }
            for h in 1..=2 {
                let want = e(Filter::MaxIndex(h)).count(n).map_err(|e| e.to_string())?;
                let got = c.bounded_successors(m, h, n).map_err(|e| e.to_string())?;
                if got != big(want) {
                    return err(&format!("indices <= {h} m = {m}"), n, want, &got);
                }
            }
            for top in m..=3 {
                let want = e(Filter::Superclass(top)).count(n).map_err(|e| e.to_string())?;
                let got = c.superclass(top, m, n).map_err(|e| e.to_string())?;
                if got != big(want) {
                    return err(&format!("superclass N = {top} m = {m}"), n, want, &got);
                }
            }
            compared += 1;
        }
        let want = Enumerator::new(*spec, Scope::Any, Filter::All).with_cap(max_n).count(n).map_err(|e| e.to_string())?;
        let got = c.unrestricted(n).map_err(|e| e.to_string())?;
        if got != big(want) {
            return err("all terms", n, want, &got);
        }
    }
    Ok(format!("{compared} (m, n) pairs agree with enumeration for n <= {max_n}"))
}

fn partition(spec: &SizeSpec, max_n: u64) -> Result<String, String> {
    let mut c = Counter::new(*spec);
    let n_max = 3 * max_n;
    for n in 0..=n_max {
        for m in 0..=3 {
            let total = c.m_open(m, n).map_err(|e| e.to_string())?;
            let sum = c.at_most_q(m, n, n).map_err(|e| e.to_string())?;
            if total != sum {
                return Err(format!("sum over q of L(m={m}, q, n={n}) = {sum}, L = {total}"));
            }
            let nf = c.normal_form(m, n).map_err(|e| e.to_string())?;
            if nf > total {
                return Err(format!("normal forms exceed all terms at m = {m}, n = {n}"));
            }
        }
    }
    Ok(format!("partition by abstractions holds for n <= {n_max}"))
}

fn superclass(spec: &SizeSpec, max_n: u64) -> Result<String, String> {
    let mut c = Counter::new(*spec);
    let top = 2 * max_n;
    for n in 0..=top {
        let open = c.m_open(0, n).map_err(|e| e.to_string())?;
        let sup = c.superclass(top, 0, n).map_err(|e| e.to_string())?;
        if open != sup {
            return Err(format!("L(0, {n}) = {open} but superclass N = {top} gives {sup}"));
        }
    }
    Ok(format!("superclass N = {top} agrees with closed terms for n <= {top}"))
}

fn roots(spec: &SizeSpec) -> Result<String, String> {
    let sd = asymptotics::dominant_singularity(spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let eps = 1e-10;
    let p = |z| asymptotics::characteristic(spec, z);
    if p(sd.rho - eps) <= 0.0 || p(sd.rho + eps) >= 0.0 {
        return Err(format!("no sign change around rho = {}", sd.rho));
    }
    let identity = 2.0 * sd.rho.powi(spec.d() as i32) * sd.a_inf + sd.rho.powi(spec.c() as i32);
    if (identity - 1.0).abs() > 1e-10 {
        return Err(format!("2 rho^d a_inf + rho^c = {identity}"));
    }
    let nf = asymptotics::normal_form_singularity(spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
    if !(nf.rho_tilde > sd.rho) {
        return Err(format!("rho_tilde = {} not above rho = {}", nf.rho_tilde, sd.rho));
    }
    let mut prev = 1.0;
    for h in 1..=10 {
        let r = asymptotics::bounded_h_singularity(spec, h, DEFAULT_TOL).map_err(|e| e.to_string())?;
        if !(r < prev && r > sd.rho) {
            return Err(format!("rho^({h}) = {r} out of order"));
        }
        prev = r;
    }
    Ok(format!("rho = {:.12}, rho_tilde = {:.12}", sd.rho, nf.rho_tilde))
}

fn fixpoint(spec: &SizeSpec) -> Result<String, String> {
    let t = sampler::build_tables(spec, sampler::DEFAULT_N, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let worst = t.levels.iter().map(|l| (l.total() - 1.0).abs()).fold(0.0, f64::max);
    if worst > 1e-9 {
        return Err(format!("branch laws off by {worst}"));
    }
    if t.levels[0].leaf != 0.0 {
        return Err("leaf mass at level 0".into());
    }
    Ok(format!("branch laws sum to 1 within {worst:.1e}"))
}
