//! Singularity analysis.
//!
//! Every generating function here has a square-root singularity at the
//! smallest positive root of an explicit function on `(0, 1)`. Expansions
//! are stored as `a - b*sqrt(1 - z/rho)` with `b > 0`, so coefficients
//! behave like `b/(2 sqrt(pi)) * n^(-3/2) * rho^(-n)`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::counting::{scaled_counts, Family};
use crate::size_model::SizeSpec;

/// Default bracket width for root finding.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default truncation level for superclass constants.
pub const DEFAULT_N: u64 = 100;

const MAX_BISECTIONS: usize = 200;
const NEWTON_STEPS: usize = 5;
const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("root finding for {what} did not converge")]
    NoConvergence { what: &'static str },
    #[error("negative radicand D_{m} = {value}")]
    NegativeRadicand { m: u64, value: f64 },
    #[error("root {root} is (numerically) a double root: derivative {derivative}")]
    DoubleRoot { root: f64, derivative: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A root with the width of the final bisection bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub width: f64,
}

/// Bisection on a sign-changing bracket down to width `tol`, then at most
/// five Newton steps, each kept only if it stays in the bracket.
pub fn find_root<F, D>(what: &'static str, f: F, df: D, lo: f64, hi: f64, tol: f64) -> Result<Root, AsymptoticsError>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo), f(hi));
    if !(tol > 0.0) || flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(AsymptoticsError::NoConvergence { what });
    }
    let lo_positive = flo > 0.0;
    let mut steps = 0;
    while hi - lo > tol {
        if steps == MAX_BISECTIONS {
            return Err(AsymptoticsError::NoConvergence { what });
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(Root { value: mid, width: 0.0 });
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let (fx, dx) = (f(x), df(x));
        if fx == 0.0 || dx == 0.0 || !dx.is_finite() {
            break;
        }
        let next = x - fx / dx;
        if !(lo..=hi).contains(&next) || f(next).abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    Ok(Root { value: x, width: hi - lo })
}

fn pw(z: f64, k: u64) -> f64 {
    z.powi(k as i32)
}

/// `k z^(k-1)`, zero for `k = 0`.
fn dpw(z: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * pw(z, k - 1)
    }
}

/// `sum_{j<m} z^(bj)` and its derivative.
fn leaf_sum(z: f64, b: u64, m: u64) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    for j in 0..m {
        s += pw(z, b * j);
        ds += dpw(z, b * j);
    }
    (s, ds)
}

/// Dominant singularity of the unrestricted family and the constants of
/// its square-root expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularData {
    pub spec: SizeSpec,
    pub rho: f64,
    pub a_inf: f64,
    pub b_inf: f64,
    pub tolerance: f64,
}

impl SingularData {
    /// Leading constant `b_inf / (2 sqrt(pi))` of the unrestricted counts.
    pub fn constant(&self) -> f64 {
        self.b_inf / (2.0 * PI.sqrt())
    }
}

/// `(1 - z^b)(1 - z^c)^2 - 4 z^(a+d)`.
pub fn characteristic(spec: &SizeSpec, z: f64) -> f64 {
    let (a, b, c, d) = spec.weights();
    (1.0 - pw(z, b)) * (1.0 - pw(z, c)).powi(2) - 4.0 * pw(z, a + d)
}

fn characteristic_deriv(spec: &SizeSpec, z: f64) -> f64 {
    let (a, b, c, d) = spec.weights();
    let (u, v) = (1.0 - pw(z, b), 1.0 - pw(z, c));
    -dpw(z, b) * v * v - 2.0 * u * v * dpw(z, c) - 4.0 * dpw(z, a + d)
}

pub fn dominant_singularity(spec: &SizeSpec, tol: f64) -> Result<SingularData, AsymptoticsError> {
    let (a, b, c, d) = spec.weights();
    let root = find_root(
        "dominant singularity",
        |z| characteristic(spec, z),
        |z| characteristic_deriv(spec, z),
        0.0,
        1.0,
        tol,
    )?;
    let rho = root.value;
    let (rb, rc, rd, rad) = (pw(rho, b), pw(rho, c), pw(rho, d), pw(rho, a + d));
    let a_inf = (1.0 - rc) / (2.0 * rd);
    let under = 4.0 * (a + d) as f64 * rad
        + 2.0 * c as f64 * rc * (1.0 - rb) * (1.0 - rc)
        + b as f64 * rb * (1.0 - rc).powi(2);
    let b_inf = under.sqrt() / (2.0 * rd * (1.0 - rb).sqrt());
    Ok(SingularData { spec: *spec, rho, a_inf, b_inf, tolerance: root.width })
}

/// Smallest positive root of
/// `(1 - z^c)^2 - 4 z^(a+d) (1 - z^(bh)) / (1 - z^b)`: the radius of the
/// terms whose indices are all at most `h`.
pub fn bounded_h_singularity(spec: &SizeSpec, h: u64, tol: f64) -> Result<f64, AsymptoticsError> {
    if h == 0 {
        return Err(AsymptoticsError::InvalidArgument("h must be at least 1".into()));
    }
    let (a, b, c, d) = spec.weights();
    let f = |z: f64| (1.0 - pw(z, c)).powi(2) - 4.0 * pw(z, a + d) * leaf_sum(z, b, h).0;
    let df = |z: f64| {
        let (s, ds) = leaf_sum(z, b, h);
        -2.0 * (1.0 - pw(z, c)) * dpw(z, c) - 4.0 * (dpw(z, a + d) * s + pw(z, a + d) * ds)
    };
    Ok(find_root("bounded-index singularity", f, df, 0.0, 1.0, tol)?.value)
}

/// Constants of the superclass expansions `L_{m,N} ~ a_m - b_m sqrt(1 - z/rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperclassConstants {
    pub top: u64,
    pub rho: f64,
    /// `a[m]` for `m = 0..=N`.
    pub a: Vec<f64>,
    /// `b[m]` for `m = 0..=N`.
    pub b: Vec<f64>,
    /// `D_m` for `m = 0..N`.
    pub radicands: Vec<f64>,
}

impl SuperclassConstants {
    /// `C(m, N) = b_m / (2 sqrt(pi))`.
    pub fn constant(&self, m: u64) -> Option<f64> {
        self.b.get(m as usize).map(|b| b / (2.0 * PI.sqrt()))
    }
}

/// Runs the backward recurrence from `(a_N, b_N) = (a_inf, b_inf)`:
///
/// ```text
/// D_m = 1 - 4 rho^(a+d) (1 - rho^(bm)) / (1 - rho^b) - 4 rho^(c+d) a_(m+1)
/// a_m = (1 - sqrt(D_m)) / (2 rho^d)
/// b_m = rho^c b_(m+1) / sqrt(D_m)
/// ```
pub fn superclass_constants(spec: &SizeSpec, top: u64, tol: f64) -> Result<SuperclassConstants, AsymptoticsError> {
    let sd = dominant_singularity(spec, tol)?;
    superclass_from(spec, &sd, top)
}

pub fn superclass_from(spec: &SizeSpec, sd: &SingularData, top: u64) -> Result<SuperclassConstants, AsymptoticsError> {
    let (a, b, c, d) = spec.weights();
    let rho = sd.rho;
    let len = top as usize + 1;
    let mut av = vec![0.0; len];
    let mut bv = vec![0.0; len];
    let mut radicands = vec![0.0; top as usize];
    av[top as usize] = sd.a_inf;
    bv[top as usize] = sd.b_inf;
    let (rad, rcd, rc, rd, rb) = (pw(rho, a + d), pw(rho, c + d), pw(rho, c), pw(rho, d), pw(rho, b));
    for m in (0..top).rev() {
        let mu = m as usize;
        let leaves = (1.0 - rho.powf((b * m) as f64)) / (1.0 - rb);
        let dm = 1.0 - 4.0 * rad * leaves - 4.0 * rcd * av[mu + 1];
        if !(dm > 0.0) {
            return Err(AsymptoticsError::NegativeRadicand { m, value: dm });
        }
        let root = dm.sqrt();
        radicands[mu] = dm;
        av[mu] = (1.0 - root) / (2.0 * rd);
        bv[mu] = rc * bv[mu + 1] / root;
    }
    Ok(SuperclassConstants { top, rho, a: av, b: bv, radicands })
}

/// Superclass estimate `C(m, N)` of the constant in
/// `L_{m,n} ~ C n^(-3/2) rho^(-n)`.
pub fn leading_constant_estimate(spec: &SizeSpec, m: u64, top: u64) -> Result<f64, AsymptoticsError> {
    if m > top {
        return Err(AsymptoticsError::InvalidArgument(format!("m = {m} exceeds N = {top}")));
    }
    let sc = superclass_constants(spec, top, DEFAULT_TOL)?;
    Ok(sc.constant(m).expect("m <= N"))
}

/// Empirical constant `L_{m,n} rho^n n^(3/2)` from the scaled count table.
pub fn empirical_constant(spec: &SizeSpec, m: u64, n: u64) -> Result<f64, AsymptoticsError> {
    if n == 0 {
        return Err(AsymptoticsError::InvalidArgument("n must be positive".into()));
    }
    let rho = dominant_singularity(spec, DEFAULT_TOL)?.rho;
    let u = scaled_counts(spec, Family::MOpen, m, n, rho);
    Ok(u[n as usize] * (n as f64).powf(1.5))
}

/// Smallest positive root `xi_M` of `1 - 4 z^(a+d) sum_{j<M} z^(bj)`.
pub fn xi_singularity(spec: &SizeSpec, big_m: u64, tol: f64) -> Result<f64, AsymptoticsError> {
    if big_m == 0 {
        return Err(AsymptoticsError::InvalidArgument("M must be at least 1".into()));
    }
    let (a, b, _, d) = spec.weights();
    let f = |z: f64| 1.0 - 4.0 * pw(z, a + d) * leaf_sum(z, b, big_m).0;
    let df = |z: f64| {
        let (s, ds) = leaf_sum(z, b, big_m);
        -4.0 * (dpw(z, a + d) * s + pw(z, a + d) * ds)
    };
    Ok(find_root("xi", f, df, 0.0, 1.0, tol)?.value)
}

/// `delta_i(z) = sqrt(1 - 4 z^(a+d) sum_{j<i} z^(bj))`.
fn delta(spec: &SizeSpec, i: u64, z: f64) -> f64 {
    let (a, b, _, d) = spec.weights();
    (1.0 - 4.0 * pw(z, a + d) * leaf_sum(z, b, i).0).max(0.0).sqrt()
}

/// Constant `C` in `L_{m,q,n} ~ C xi^(-n) / (2 sqrt(pi n^3))`, with
/// `xi = xi_(m+q)`.
///
/// Where the sizes occurring in the family are all congruent modulo some
/// `p > 1`, the nonzero coefficients are `p` times this estimate.
pub fn q_abstraction_constant(spec: &SizeSpec, m: u64, q: u64) -> Result<f64, AsymptoticsError> {
    let big_m = m + q;
    if big_m == 0 {
        return Err(AsymptoticsError::InvalidArgument("m + q must be at least 1".into()));
    }
    let (a, b, c, d) = spec.weights();
    let xi = xi_singularity(spec, big_m, DEFAULT_TOL)?;
    let weighted: f64 = (0..big_m).map(|j| (a + d + b * j) as f64 * pw(xi, b * j)).sum();
    let product: f64 = (0..q).map(|i| delta(spec, m + i, xi)).product();
    let scale = xi.powi((c * q) as i32 - d as i32);
    Ok(scale * (pw(xi, a + d) * weighted).sqrt() / product)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormSingularity {
    pub rho_tilde: f64,
    /// `rho / rho_tilde`.
    pub ratio: f64,
}

/// `f(z) = X^2 + (X - 4(1 - z^c))^3 / 27` with `X = 4 z^(a+d) / (1 - z^b)`,
/// and its derivative.
fn nf_discriminant(spec: &SizeSpec, z: f64) -> (f64, f64) {
    let (a, b, c, d) = spec.weights();
    let u = 1.0 - pw(z, b);
    let x = 4.0 * pw(z, a + d) / u;
    let dx = 4.0 * (dpw(z, a + d) * u + pw(z, a + d) * dpw(z, b)) / (u * u);
    let y = x - 4.0 * (1.0 - pw(z, c));
    let dy = dx + 4.0 * dpw(z, c);
    (x * x + y.powi(3) / 27.0, 2.0 * x * dx + y * y * dy / 9.0)
}

/// Smallest root of the discriminant `f` above `rho`. The root is located
/// by scanning `(rho, 1)` in steps of `1e-3`, then refined.
pub fn normal_form_singularity(spec: &SizeSpec, tol: f64) -> Result<NormalFormSingularity, AsymptoticsError> {
    const WHAT: &str = "normal-form singularity";
    let rho = dominant_singularity(spec, tol)?.rho;
    let f = |z: f64| nf_discriminant(spec, z).0;
    let df = |z: f64| nf_discriminant(spec, z).1;
    let mut lo = rho;
    let mut flo = f(lo);
    let mut bracket = None;
    let mut k = 1;
    loop {
        let hi = rho + k as f64 * SCAN_STEP;
        if hi >= 1.0 {
            break;
        }
        let fhi = f(hi);
        if fhi == 0.0 || flo.signum() != fhi.signum() {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        flo = fhi;
        k += 1;
    }
    let (lo, hi) = bracket.ok_or(AsymptoticsError::NoConvergence { what: WHAT })?;
    let rho_tilde = if f(hi) == 0.0 { hi } else { find_root(WHAT, f, df, lo, hi, tol)?.value };
    let derivative = df(rho_tilde);
    if derivative.abs() < 1e-9 {
        return Err(AsymptoticsError::DoubleRoot { root: rho_tilde, derivative });
    }
    Ok(NormalFormSingularity { rho_tilde, ratio: rho / rho_tilde })
}

/// Radius of convergence of the normal-form counts: the smallest positive
/// root of `(1 - z^b)(1 - z^c) - 4 z^(a+d)`.
///
/// At every level a normal form is an abstraction or a neutral term, and a
/// neutral term is a leaf or a neutral term applied to a normal form. Once
/// the leaf constraint is dropped this is `N = z^a/(1-z^b) + z^d N B` with
/// `B = N / (1 - z^c)`, whose discriminant vanishes at this root.
pub fn normal_form_radius(spec: &SizeSpec, tol: f64) -> Result<f64, AsymptoticsError> {
    let (a, b, c, d) = spec.weights();
    let f = |z: f64| (1.0 - pw(z, b)) * (1.0 - pw(z, c)) - 4.0 * pw(z, a + d);
    let df = |z: f64| -dpw(z, b) * (1.0 - pw(z, c)) - (1.0 - pw(z, b)) * dpw(z, c) - 4.0 * dpw(z, a + d);
    Ok(find_root("normal-form radius", f, df, 0.0, 1.0, tol)?.value)
}

/// `(C, sigma)` for counts behaving like `C n^(-3/2) sigma^(-n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyConstants {
    pub constant: f64,
    pub radius: f64,
}

/// `ln(C n^(-3/2) sigma^(-n))`.
pub fn log_asymptotic_count(fc: &FamilyConstants, n: u64) -> Result<f64, AsymptoticsError> {
    if n == 0 {
        return Err(AsymptoticsError::InvalidArgument("the estimate is undefined at n = 0".into()));
    }
    let n = n as f64;
    Ok(fc.constant.ln() - 1.5 * n.ln() - n * fc.radius.ln())
}

/// `C n^(-3/2) sigma^(-n)`, evaluated in log space; `inf` past `f64::MAX`.
pub fn asymptotic_count(fc: &FamilyConstants, n: u64) -> Result<f64, AsymptoticsError> {
    log_asymptotic_count(fc, n).map(f64::exp)
}

/// `(h, rho^(h))` for `h = 1..=h_max`.
pub fn rho_h_series(spec: &SizeSpec, h_max: u64, tol: f64) -> Result<Vec<(u64, f64)>, AsymptoticsError> {
    (1..=h_max).map(|h| bounded_h_singularity(spec, h, tol).map(|r| (h, r))).collect()
}

/// One row of the closed-proportion series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedProportion {
    pub top: u64,
    /// `C(0, N)`.
    pub constant: f64,
    /// `b_0 / b_(N,0)`: asymptotic share of closed terms in `L_{0,N}`,
    /// with `b_0` taken at the reference level.
    pub proportion: f64,
}

/// Closed-term share of the superclass for `N = 0..=n_max`, against the
/// constant at level `reference`.
pub fn closed_proportion_series(
    spec: &SizeSpec,
    n_max: u64,
    reference: u64,
) -> Result<Vec<ClosedProportion>, AsymptoticsError> {
    let sd = dominant_singularity(spec, DEFAULT_TOL)?;
    let b0 = superclass_from(spec, &sd, reference)?.b[0];
    (0..=n_max)
        .map(|top| {
            let sc = superclass_from(spec, &sd, top)?;
            Ok(ClosedProportion { top, constant: sc.constant(0).unwrap(), proportion: b0 / sc.b[0] })
        })
        .collect()
}
