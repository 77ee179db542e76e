//! q-shifted factorials, their multi-parameter products, and Gaussian
//! binomial coefficients.
//!
//! All products use the convention `(a;q)_n = (1 - a)(1 - aq)...(1 - aq^{n-1})`
//! with `(a;q)_0 = 1`. Infinite products are truncated once the remaining
//! factors are certified to change the logarithm of the result by at most
//! the requested tolerance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default upper guard on `q`; convergence of every product and series in
/// the crate degrades like `1 / (1 - q)`.
pub const DEFAULT_MAX_Q: f64 = 0.999_999;

/// Hard cap on the number of factors of an infinite product.
pub const MAX_FACTORS: usize = 1_000_000;

/// A validated base `q` with `0 < q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QBase(f64);

impl QBase {
    /// Validates `q` against `(0, 1)` and the default guard [`DEFAULT_MAX_Q`].
    pub fn new(q: f64) -> Result<Self> {
        Self::with_guard(q, DEFAULT_MAX_Q)
    }

    /// Validates `q` against `(0, 1)` and `q <= max_q`.
    pub fn with_guard(q: f64, max_q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("q must lie in (0, 1), got {q}"));
        }
        if q > max_q {
            return invalid(format!("q = {q} exceeds the convergence guard {max_q}"));
        }
        Ok(QBase(q))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Natural logarithm of `q` (always negative).
    #[inline]
    pub fn ln(self) -> f64 {
        self.0.ln()
    }

    /// `q^x` for real `x`.
    #[inline]
    pub fn pow(self, x: f64) -> f64 {
        self.0.powf(x)
    }

    /// The base `q^2`, used by the Jacobi triple product.
    pub fn squared(self) -> QBase {
        QBase(self.0 * self.0)
    }
}

impl TryFrom<f64> for QBase {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QBase::new(q)
    }
}

impl From<QBase> for f64 {
    fn from(q: QBase) -> f64 {
        q.0
    }
}

/// Number of factors in a q-shifted factorial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

/// Result of a (possibly infinite) q-shifted factorial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PochhammerValue {
    pub value: Complex64,
    pub order: Order,
    /// Factors actually multiplied. Equals `n` for finite orders.
    pub factors_used: usize,
    /// Bound on `|log(true / value)|`; zero for finite orders.
    pub tail_log_bound: f64,
}

impl PochhammerValue {
    fn exact(value: Complex64, n: usize) -> Self {
        PochhammerValue {
            value,
            order: Order::Finite(n),
            factors_used: n,
            tail_log_bound: 0.0,
        }
    }
}

/// `q^k` by repeated squaring, so finite and infinite products share
/// identical factors.
fn q_power(q: f64, k: usize) -> f64 {
    i32::try_from(k).map_or(0.0, |k| q.powi(k))
}

/// `(a;q)_n`, the exact product of `n` factors.
pub fn pochhammer_finite(a: Complex64, q: QBase, n: usize) -> PochhammerValue {
    let mut value = Complex64::new(1.0, 0.0);
    for k in 0..n {
        value *= Complex64::new(1.0, 0.0) - a * q_power(q.value(), k);
    }
    PochhammerValue::exact(value, n)
}

/// `(a;q)_inf`, truncated at the smallest `N` with `|a| q^N / (1 - q) <= tol`
/// and `|a| q^N < 1`.
///
/// The omitted factors satisfy
/// `|log prod_{k>=N} (1 - a q^k)| <= |a| q^N / ((1 - q)(1 - |a| q^N))`,
/// which is reported as `tail_log_bound`.
pub fn pochhammer_infinite(a: Complex64, q: QBase, tol: f64) -> Result<PochhammerValue> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let abs_a = a.norm();
    if !abs_a.is_finite() {
        return Err(Error::NonConvergent(format!(
            "infinite product with non-finite parameter {a}"
        )));
    }
    let qv = q.value();
    let one = Complex64::new(1.0, 0.0);
    let mut value = one;
    let mut n = 0usize;
    loop {
        let qn = q_power(qv, n);
        let head = abs_a * qn;
        if head < 1.0 && head / (1.0 - qv) <= tol {
            break;
        }
        if n >= MAX_FACTORS {
            return Err(Error::NonConvergent(format!(
                "(a;q)_inf with |a| = {abs_a}, q = {qv} needs more than {MAX_FACTORS} factors"
            )));
        }
        value *= one - a * qn;
        n += 1;
    }
    let head = abs_a * q_power(qv, n);
    Ok(PochhammerValue {
        value,
        order: Order::Infinite,
        factors_used: n,
        tail_log_bound: head / ((1.0 - qv) * (1.0 - head)),
    })
}

/// `(a_1, ..., a_k; q)_n`, the product of the individual q-shifted factorials.
///
/// `tol` is only consulted for [`Order::Infinite`].
pub fn multishifted(a_list: &[Complex64], q: QBase, order: Order, tol: f64) -> Result<PochhammerValue> {
    let mut value = Complex64::new(1.0, 0.0);
    let mut factors_used = 0;
    let mut tail_log_bound = 0.0;
    for &a in a_list {
        let part = match order {
            Order::Finite(n) => pochhammer_finite(a, q, n),
            Order::Infinite => pochhammer_infinite(a, q, tol)?,
        };
        value *= part.value;
        factors_used = factors_used.max(part.factors_used);
        tail_log_bound += part.tail_log_bound;
    }
    if a_list.is_empty() {
        if let Order::Finite(n) = order {
            factors_used = n;
        }
    }
    Ok(PochhammerValue {
        value,
        order,
        factors_used,
        tail_log_bound,
    })
}

/// Natural logarithm of the real product `(x;q)_inf` for `x < 1`, together
/// with its truncation bound. Factors are multiplied directly; only the
/// final product is logged.
pub(crate) fn ln_pochhammer_infinite_real(x: f64, q: QBase, tol: f64) -> Result<(f64, f64)> {
    let p = pochhammer_infinite(Complex64::new(x, 0.0), q, tol)?;
    if !(p.value.re > 0.0) {
        return invalid(format!("(x;q)_inf is not positive for x = {x}"));
    }
    Ok((p.value.re.ln(), p.tail_log_bound))
}

/// Gaussian binomial coefficient `[n, k]_q = (q;q)_n / ((q;q)_k (q;q)_{n-k})`.
///
/// Evaluated as `prod_{j=1}^{m} (1 - q^{n-m+j}) / (1 - q^j)` with
/// `m = min(k, n - k)`, so `[n, k]` and `[n, n - k]` run the same arithmetic.
pub fn q_binomial(n: usize, k: usize, q: QBase) -> Result<f64> {
    if k > n {
        return invalid(format!("q-binomial needs k <= n, got n = {n}, k = {k}"));
    }
    let m = k.min(n - k);
    let qv = q.value();
    let mut value = 1.0;
    for j in 1..=m {
        let num = 1.0 - qv.powi((n - m + j) as i32);
        let den = 1.0 - qv.powi(j as i32);
        value *= num / den;
    }
    Ok(value)
}
