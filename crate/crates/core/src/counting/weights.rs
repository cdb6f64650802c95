use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Coefficient arithmetic used by the count tables.
///
/// [`Exact`] stores plain counts. [`Scaled`] stores `count * rho^n`, which
/// stays bounded for the families whose radius of convergence is `rho`
/// and lets the same recurrences run to large `n` in floating point.
pub trait Weights: Clone {
    type Value: Clone + std::fmt::Debug + PartialEq;

    fn zero(&self) -> Self::Value;
    fn is_zero(&self, v: &Self::Value) -> bool;
    /// Weight of a single object of size `size`.
    fn unit(&self, size: u64) -> Self::Value;
    fn add_assign(&self, acc: &mut Self::Value, v: &Self::Value);
    fn add_product(&self, acc: &mut Self::Value, x: &Self::Value, y: &Self::Value);
    /// Accounts for `by` extra units of size on top of the operands.
    fn shifted(&self, v: Self::Value, by: u64) -> Self::Value;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Exact;

impl Weights for Exact {
    type Value = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn is_zero(&self, v: &BigUint) -> bool {
        v.is_zero()
    }
    fn unit(&self, _size: u64) -> BigUint {
        BigUint::one()
    }
    fn add_assign(&self, acc: &mut BigUint, v: &BigUint) {
        *acc += v;
    }
    fn add_product(&self, acc: &mut BigUint, x: &BigUint, y: &BigUint) {
        *acc += x * y;
    }
    fn shifted(&self, v: BigUint, _by: u64) -> BigUint {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub rho: f64,
}

impl Weights for Scaled {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn is_zero(&self, v: &f64) -> bool {
        *v == 0.0
    }
    fn unit(&self, size: u64) -> f64 {
        self.rho.powf(size as f64)
    }
    fn add_assign(&self, acc: &mut f64, v: &f64) {
        *acc += *v;
    }
    fn add_product(&self, acc: &mut f64, x: &f64, y: &f64) {
        *acc += x * y;
    }
    fn shifted(&self, v: f64, by: u64) -> f64 {
        v * self.rho.powf(by as f64)
    }
}
