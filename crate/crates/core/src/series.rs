//! Evaluators for the confluent q-series family, Ramanujan's entire
//! function, the theta function and user-supplied Laurent series.
//!
//! Every evaluator returns an [`EvalResult`] carrying a certified bound on
//! the omitted tail. Partial sums are accumulated with a power-of-two
//! exponent so that values far outside the double range can still be
//! compared against their envelopes in log space.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::qcore::QBase;
use crate::scaled::{ldexp, ldexp_c, Scaled, ScaledSum};

/// One-sided sums never stop before this index.
pub const MIN_STOP_INDEX: usize = 8;

/// Cap on the number of terms of a one-sided sum.
pub const MAX_TERMS: usize = 1_000_000;

/// Parameters of the confluent class
/// `f(z) = sum_k (a_1..a_r;q)_k q^{l k^2} / (b_1..b_s, q;q)_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfluentParams {
    pub a_list: Vec<Complex64>,
    pub b_list: Vec<f64>,
    pub l: f64,
    pub q: QBase,
}

fn check_denominators(b_list: &[f64]) -> Result<()> {
    for (j, &b) in b_list.iter().enumerate() {
        if !(0.0..1.0).contains(&b) {
            return invalid(format!("b[{j}] = {b} must lie in [0, 1)"));
        }
    }
    Ok(())
}

fn check_numerators(a_list: &[Complex64]) -> Result<()> {
    for (i, a) in a_list.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return invalid(format!("a[{i}] = {a} is not finite"));
        }
    }
    Ok(())
}

impl ConfluentParams {
    pub fn new(a_list: Vec<Complex64>, b_list: Vec<f64>, l: f64, q: QBase) -> Result<Self> {
        check_numerators(&a_list)?;
        check_denominators(&b_list)?;
        if !(l > 0.0 && l.is_finite()) {
            return invalid(format!("l must be positive, got {l}"));
        }
        Ok(ConfluentParams { a_list, b_list, l, q })
    }

    /// The `r = s = 0`, `l = 1` member, i.e. `A_q(-z)`.
    pub fn ramanujan(q: QBase) -> Self {
        ConfluentParams {
            a_list: Vec::new(),
            b_list: Vec::new(),
            l: 1.0,
            q,
        }
    }

    pub fn r(&self) -> usize {
        self.a_list.len()
    }

    pub fn s(&self) -> usize {
        self.b_list.len()
    }
}

/// Parameters of `_r phi_s(a_1..a_r; b_1..b_s; q, z)` with `s + 1 - r > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiParams {
    pub a_list: Vec<Complex64>,
    pub b_list: Vec<f64>,
    pub q: QBase,
}

impl PhiParams {
    pub fn new(a_list: Vec<Complex64>, b_list: Vec<f64>, q: QBase) -> Result<Self> {
        check_numerators(&a_list)?;
        check_denominators(&b_list)?;
        if b_list.len() < a_list.len() {
            return invalid(format!(
                "confluent series needs s + 1 - r > 0, got r = {}, s = {}",
                a_list.len(),
                b_list.len()
            ));
        }
        Ok(PhiParams { a_list, b_list, q })
    }

    /// `s + 1 - r`, always positive.
    pub fn excess(&self) -> usize {
        self.b_list.len() + 1 - self.a_list.len()
    }

    /// Gaussian weight `(s + 1 - r) / 2` of the equivalent confluent function.
    pub fn weight(&self) -> f64 {
        self.excess() as f64 / 2.0
    }
}

/// A truncated series value with a certified tail bound.
///
/// The represented number is `value * 2^exp2_scale`; `tail_bound` is in the
/// same units as `value`. Whenever the result fits in a double the scale is
/// folded in and `exp2_scale` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub exp2_scale: i32,
    pub terms_used: usize,
    pub tail_bound: f64,
    /// `tail_bound <= tol * max(1, |value|)` was reached.
    pub converged: bool,
}

impl EvalResult {
    fn from_sum(sum: ScaledSum, terms_used: usize, tail_bound: f64, converged: bool) -> Self {
        let mut r = EvalResult {
            value: sum.sum,
            exp2_scale: sum.exp2,
            terms_used,
            tail_bound,
            converged,
        };
        if r.exp2_scale != 0 {
            let folded = ldexp_c(r.value, r.exp2_scale);
            if folded.norm().is_finite() {
                r.value = folded;
                r.tail_bound = ldexp(r.tail_bound, r.exp2_scale);
                r.exp2_scale = 0;
            }
        }
        r
    }

    /// `log |f(z)|`, finite even when the value overflows a double.
    pub fn log_abs(&self) -> f64 {
        self.value.norm().ln() + self.exp2_scale as f64 * std::f64::consts::LN_2
    }

    /// `|f(z)|`, possibly infinite.
    pub fn abs(&self) -> f64 {
        ldexp(self.value.norm(), self.exp2_scale)
    }

    /// The value as a plain complex number, possibly infinite.
    pub fn to_complex(&self) -> Complex64 {
        ldexp_c(self.value, self.exp2_scale)
    }

    /// Tail bound in absolute units, possibly infinite.
    pub fn tail_bound_abs(&self) -> f64 {
        ldexp(self.tail_bound, self.exp2_scale)
    }
}

struct Step {
    /// `t_{k+1} / t_k`.
    ratio: Complex64,
    /// Bound on `|t_{j+1} / t_j|` for every `j >= k`.
    rho: f64,
}

/// Sums `t_0 = 1, t_{k+1} = t_k * ratio_k` until the geometric tail
/// certificate `|t_K| rho_K / (1 - rho_K)` drops below `tol * max(1, |partial|)`.
fn sum_one_sided(tol: f64, mut step: impl FnMut(usize) -> Step) -> EvalResult {
    let mut term = Scaled::one();
    let mut sum = ScaledSum::zero();
    sum.add(&term);
    let mut k = 0usize;
    loop {
        let st = step(k);
        if st.ratio.re == 0.0 && st.ratio.im == 0.0 {
            // every later term carries this vanishing factor
            return EvalResult::from_sum(sum, k + 1, 0.0, true);
        }
        if k >= MIN_STOP_INDEX && st.rho < 1.0 {
            let tail = sum.relative(&term) * st.rho / (1.0 - st.rho);
            if tail <= tol * sum.sum.norm().max(sum.unit()) {
                return EvalResult::from_sum(sum, k + 1, tail, true);
            }
        }
        if k + 1 >= MAX_TERMS {
            let tail = if st.rho < 1.0 {
                sum.relative(&term) * st.rho / (1.0 - st.rho)
            } else {
                f64::INFINITY
            };
            return EvalResult::from_sum(sum, k + 1, tail, false);
        }
        term.mul(st.ratio);
        sum.add(&term);
        k += 1;
    }
}

/// Shared term-ratio pieces: `prod(1 - a q^k) / (prod(1 - b q^k) (1 - q^{k+1}))`
/// and its modulus bound over all later indices.
fn parameter_ratio(a_list: &[Complex64], b_list: &[f64], q: QBase, k: usize) -> (Complex64, f64) {
    let qk = q.value().powi(k as i32);
    let one = Complex64::new(1.0, 0.0);
    let mut num = one;
    let mut num_bound = 1.0;
    for &a in a_list {
        num *= one - a * qk;
        num_bound *= 1.0 + a.norm() * qk;
    }
    let mut den = 1.0 - qk * q.value();
    for &b in b_list {
        den *= 1.0 - b * qk;
    }
    (num / den, num_bound / den)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

fn check_point(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("evaluation point {z} is not finite"));
    }
    Ok(())
}

/// Evaluates the confluent class member `f(z)` described by `p`.
pub fn eval_confluent_f(p: &ConfluentParams, z: Complex64, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    check_point(z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(EvalResult::from_sum(
            {
                let mut s = ScaledSum::zero();
                s.add(&Scaled::one());
                s
            },
            1,
            0.0,
            true,
        ));
    }
    let abs_z = z.norm();
    Ok(sum_one_sided(tol, |k| {
        let (par, par_bound) = parameter_ratio(&p.a_list, &p.b_list, p.q, k);
        let gauss = p.q.pow(p.l * (2 * k + 1) as f64);
        Step {
            ratio: par * (z * gauss),
            rho: par_bound * gauss * abs_z,
        }
    }))
}

/// Evaluates `_r phi_s(a; b; q, z)` by direct summation of
/// `(a;q)_k / (b, q;q)_k z^k (-q^{(k-1)/2})^{k(s+1-r)}`.
pub fn eval_phi(p: &PhiParams, z: Complex64, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    check_point(z)?;
    let m = p.excess() as i32;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let abs_z = z.norm();
    Ok(sum_one_sided(tol, |k| {
        let (par, par_bound) = parameter_ratio(&p.a_list, &p.b_list, p.q, k);
        let qmk = p.q.value().powi(m * k as i32);
        Step {
            ratio: par * z * (sign * qmk),
            rho: par_bound * qmk * abs_z,
        }
    }))
}

/// Linear map `w -> factor * w` relating `phi` arguments to `f` arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgumentMap {
    pub factor: f64,
}

impl ArgumentMap {
    pub fn apply(&self, w: Complex64) -> Complex64 {
        w * self.factor
    }
}

/// Rewrites `_r phi_s` as a member of the confluent class with weight
/// `l = (s + 1 - r) / 2`: `phi(w) = f((-1)^{s+1-r} q^{-l} w)`.
pub fn phi_to_f(p: &PhiParams) -> (ConfluentParams, ArgumentMap) {
    let l = p.weight();
    let sign = if p.excess().is_multiple_of(2) { 1.0 } else { -1.0 };
    let params = ConfluentParams {
        a_list: p.a_list.clone(),
        b_list: p.b_list.clone(),
        l,
        q: p.q,
    };
    (params, ArgumentMap { factor: sign * p.q.pow(-l) })
}

/// Ramanujan's entire function `A_q(z) = sum_k q^{k^2} (-z)^k / (q;q)_k`.
pub fn eval_ramanujan_aq(q: QBase, z: Complex64, tol: f64) -> Result<EvalResult> {
    eval_confluent_f(&ConfluentParams::ramanujan(q), -z, tol)
}

/// `Theta(z|q) = sum_{k in Z} q^{k^2} z^k`, truncated symmetrically.
pub fn eval_theta(q: QBase, z: Complex64, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    check_point(z)?;
    if z == Complex64::new(0.0, 0.0) {
        return invalid("theta function is undefined at z = 0");
    }
    let inv = z.inv();
    let ln_q = q.ln();
    let ln_m = z.norm().ln().abs();
    let mut pos = Scaled::one();
    let mut neg = Scaled::one();
    let mut sum = ScaledSum::zero();
    sum.add(&pos);
    let mut k = 0usize;
    loop {
        // Tail of both wings beyond |k| = K is at most
        // 2 q^{(K+1)^2} M^{K+1} / (1 - q^{2K+3} M).
        let kk = (k + 1) as f64;
        let ln_rho = (2.0 * kk + 1.0) * ln_q + ln_m;
        if ln_rho < 0.0 {
            let ln_tail = std::f64::consts::LN_2 + kk * kk * ln_q + kk * ln_m - (-ln_rho.exp()).ln_1p();
            let ln_scale = sum.ln_abs().max(0.0);
            if ln_tail <= tol.ln() + ln_scale {
                let tail = (ln_tail - sum.exp2 as f64 * std::f64::consts::LN_2).exp();
                return Ok(EvalResult::from_sum(sum, 2 * k + 1, tail, true));
            }
        }
        if 2 * k + 3 > MAX_TERMS {
            return Ok(EvalResult::from_sum(sum, 2 * k + 1, f64::INFINITY, false));
        }
        let g = q.pow((2 * k + 1) as f64);
        pos.mul(z * g);
        neg.mul(inv * g);
        sum.add(&pos);
        sum.add(&neg);
        k += 1;
    }
}

/// Coefficient stream `k -> a_k` of a Laurent series. Must be safe to call
/// from several threads at once.
pub type CoefficientFn = Arc<dyn Fn(i64) -> Complex64 + Send + Sync>;

/// Default cap on the symmetric truncation index of a Laurent series.
pub const DEFAULT_K_CAP: usize = 100_000;

/// A Laurent series `sum_k a_k (z - center)^k` whose coefficients obey
/// `|a_k| <= c_weighted * q^{|k|^{alpha+1}}`.
#[derive(Clone)]
pub struct LaurentSpec {
    pub center: Complex64,
    pub coeff: CoefficientFn,
    pub alpha: f64,
    pub q: QBase,
    pub c_weighted: f64,
    pub k_cap: usize,
}

impl fmt::Debug for LaurentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaurentSpec")
            .field("center", &self.center)
            .field("alpha", &self.alpha)
            .field("q", &self.q)
            .field("c_weighted", &self.c_weighted)
            .field("k_cap", &self.k_cap)
            .finish_non_exhaustive()
    }
}

impl LaurentSpec {
    /// Builds a spec with a caller-supplied weighted constant
    /// `c_weighted >= sum_k |a_k| q^{-|k|^{alpha+1}}`.
    pub fn new(
        center: Complex64,
        coeff: CoefficientFn,
        alpha: f64,
        q: QBase,
        c_weighted: f64,
        k_cap: usize,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if !(c_weighted >= 0.0 && c_weighted.is_finite()) {
            return invalid(format!("weighted constant must be finite and non-negative, got {c_weighted}"));
        }
        if k_cap == 0 {
            return invalid("k_cap must be positive");
        }
        check_point(center)?;
        Ok(LaurentSpec {
            center,
            coeff,
            alpha,
            q,
            c_weighted,
            k_cap,
        })
    }

    /// Builds a spec whose weighted constant is summed from the coefficient
    /// stream. Summation runs to `min(k_cap, 10^5)` and stops once the
    /// weighted terms have declined below `1e-17` of the running sum for
    /// three consecutive indices. This cannot certify convergence of a
    /// black-box stream; an unbounded stream yields `NonConvergent`.
    pub fn with_computed_weight(
        center: Complex64,
        coeff: CoefficientFn,
        alpha: f64,
        q: QBase,
        k_cap: usize,
    ) -> Result<Self> {
        let mut spec = LaurentSpec::new(center, coeff, alpha, q, 0.0, k_cap)?;
        spec.c_weighted = weighted_coefficient_sum(&spec)?;
        Ok(spec)
    }

    /// The theta stream `a_k = q^{k^2}` about the origin, with weighted
    /// constant `sum_k q^{k^2 - |k|^{1+alpha}}`, valid for `0 < alpha < 1`.
    pub fn theta(q: QBase, alpha: f64) -> Result<Self> {
        let c = crate::bounds::theta_weighted_constant(alpha, q, 1e-17)?;
        let qv = q.value();
        let coeff: CoefficientFn = Arc::new(move |k: i64| Complex64::new(qv.powf((k * k) as f64), 0.0));
        LaurentSpec::new(Complex64::new(0.0, 0.0), coeff, alpha, q, c, DEFAULT_K_CAP)
    }

    fn ln_weight(&self, k: i64) -> f64 {
        -self.q.ln() * (k.unsigned_abs() as f64).powf(self.alpha + 1.0)
    }
}

const WEIGHT_CUTOFF: usize = 100_000;

fn weighted_coefficient_sum(spec: &LaurentSpec) -> Result<f64> {
    let weighted = |k: i64| -> f64 {
        let a = (spec.coeff)(k).norm();
        if a == 0.0 {
            0.0
        } else {
            (a.ln() + spec.ln_weight(k)).exp()
        }
    };
    let mut sum = weighted(0);
    let mut prev = f64::INFINITY;
    let mut quiet = 0;
    let limit = spec.k_cap.min(WEIGHT_CUTOFF) as i64;
    for k in 1..=limit {
        let t = weighted(k) + weighted(-k);
        if !t.is_finite() {
            return Err(Error::NonConvergent(format!("weighted coefficient at |k| = {k} is not finite")));
        }
        sum += t;
        if t <= prev && t <= 1e-17 * sum {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        prev = t;
    }
    Err(Error::NonConvergent(format!(
        "weighted coefficient sum still growing at |k| = {limit}"
    )))
}

/// Evaluates the Laurent series of `spec` at `z != center`.
///
/// The omitted indices `|k| > K` are bounded through the coefficient
/// majorant by `2 c sum_{k > K} q^{k^{alpha+1}} M^k` with
/// `M = max(|z - center|, 1 / |z - center|)`.
pub fn eval_laurent(spec: &LaurentSpec, z: Complex64, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    check_point(z)?;
    let d = z - spec.center;
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::CenterPole);
    }
    let inv = d.inv();
    let lambda = -spec.q.ln();
    let ln_m = d.norm().ln().abs();
    let ln_c = spec.c_weighted.ln();
    let alpha = spec.alpha;
    let mut pos = Scaled::one();
    let mut neg = Scaled::one();
    let mut sum = ScaledSum::zero();
    sum.add(&Scaled::new((spec.coeff)(0)));
    let mut k = 0usize;
    loop {
        let next = (k + 1) as f64;
        // ratios u_{j+1}/u_j of the majorant are at most M exp(-lambda (alpha+1) j^alpha)
        let ln_rho = ln_m - lambda * (alpha + 1.0) * next.powf(alpha);
        if ln_rho < 0.0 {
            let ln_u = next * ln_m - lambda * next.powf(alpha + 1.0);
            let ln_tail = std::f64::consts::LN_2 + ln_c + ln_u - (-ln_rho.exp()).ln_1p();
            let ln_scale = if sum.sum.norm() > 0.0 { sum.ln_abs().max(0.0) } else { 0.0 };
            if ln_tail <= tol.ln() + ln_scale {
                let tail = (ln_tail - sum.exp2 as f64 * std::f64::consts::LN_2).exp();
                return Ok(EvalResult::from_sum(sum, 2 * k + 1, tail, true));
            }
        }
        if k + 1 > spec.k_cap {
            return Err(Error::NonConvergent(format!(
                "Laurent tail bound above tolerance at k_cap = {}",
                spec.k_cap
            )));
        }
        k += 1;
        pos.mul(d);
        neg.mul(inv);
        let ki = k as i64;
        let mut tp = pos;
        tp.mul((spec.coeff)(ki));
        let mut tn = neg;
        tn.mul((spec.coeff)(-ki));
        sum.add(&tp);
        sum.add(&tn);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parameter_validation() {
        assert!(ConfluentParams::new(vec![], vec![1.0], 1.0, q(0.5)).is_err());
        assert!(ConfluentParams::new(vec![], vec![-0.1], 1.0, q(0.5)).is_err());
        assert!(ConfluentParams::new(vec![], vec![0.0], 0.0, q(0.5)).is_err());
        assert!(ConfluentParams::new(vec![c(5.0, 1.0)], vec![0.0, 0.99], 0.1, q(0.5)).is_ok());
        assert!(PhiParams::new(vec![c(0.1, 0.0)], vec![], q(0.5)).is_err());
        assert!(PhiParams::new(vec![c(0.1, 0.0)], vec![0.2], q(0.5)).is_ok());
    }

    #[test]
    fn z_zero_is_a_single_term() {
        let p = ConfluentParams::new(vec![c(0.3, 0.2)], vec![0.4], 0.7, q(0.6)).unwrap();
        let r = eval_confluent_f(&p, c(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(r.value, c(1.0, 0.0));
        assert_eq!(r.terms_used, 1);
        let phi = PhiParams::new(vec![], vec![0.5], q(0.5)).unwrap();
        assert_eq!(eval_phi(&phi, c(0.0, 0.0), 1e-14).unwrap().value, c(1.0, 0.0));
        assert_eq!(eval_ramanujan_aq(q(0.5), c(0.0, 0.0), 1e-14).unwrap().value, c(1.0, 0.0));
    }

    #[test]
    fn ramanujan_reference_values() {
        let plus = eval_ramanujan_aq(q(0.5), c(1.0, 0.0), 1e-14).unwrap();
        let minus = eval_ramanujan_aq(q(0.5), c(-1.0, 0.0), 1e-14).unwrap();
        assert!((plus.value.re - 0.160_763_788_932_088_7).abs() < 1e-14);
        assert!((minus.value.re - 2.172_668_750_849_663_7).abs() < 1e-14);
        assert!(plus.converged && plus.tail_bound <= 1e-14);
    }

    #[test]
    fn vanishing_numerator_terminates() {
        let p = ConfluentParams::new(vec![c(1.0, 0.0)], vec![], 0.5, q(0.5)).unwrap();
        let r = eval_confluent_f(&p, c(3.0, -2.0), 1e-14).unwrap();
        assert_eq!(r.value, c(1.0, 0.0));
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn phi_reduction_small_cases() {
        let p = PhiParams::new(vec![], vec![], q(0.5)).unwrap();
        let (f, map) = phi_to_f(&p);
        assert_eq!(f.l, 0.5);
        assert!((map.factor + 0.5f64.powf(-0.5)).abs() < 1e-15);
        let p = PhiParams::new(vec![c(0.2, 0.0)], vec![0.1, 0.3], q(0.5)).unwrap();
        assert_eq!(phi_to_f(&p).0.l, 1.0);
    }

    #[test]
    fn theta_reference_values() {
        let t = eval_theta(q(0.5), c(1.0, 0.0), 1e-14).unwrap();
        assert!((t.value.re - 2.128_936_827_211_877).abs() < 1e-14);
        let t = eval_theta(q(0.5), c(-1.0, 0.0), 1e-14).unwrap();
        assert!((t.value.re - 0.121_124_208_002_580_5).abs() < 1e-14);
        assert!(matches!(eval_theta(q(0.5), c(0.0, 0.0), 1e-14), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn huge_arguments_do_not_overflow() {
        let p = ConfluentParams::new(vec![], vec![], 0.5, q(0.95)).unwrap();
        let r = eval_confluent_f(&p, c(1e6, 0.0), 1e-14).unwrap();
        assert!(r.converged);
        assert!(r.exp2_scale > 0);
        assert!(r.log_abs() > 709.0 && r.log_abs().is_finite());
    }

    #[test]
    fn laurent_simple_streams() {
        let one: CoefficientFn = Arc::new(|k| if k == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let spec = LaurentSpec::new(c(0.0, 0.0), one, 1.0, q(0.5), 1.0, 1000).unwrap();
        for z in [c(2.0, 0.0), c(-0.1, 3.0), c(1e-3, 0.0)] {
            assert_eq!(eval_laurent(&spec, z, 1e-14).unwrap().value, c(1.0, 0.0));
        }
        let recip: CoefficientFn =
            Arc::new(|k| if k.abs() == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let spec = LaurentSpec::with_computed_weight(c(0.0, 0.0), recip, 1.0, q(0.5), 1000).unwrap();
        assert!((spec.c_weighted - 4.0).abs() < 1e-15);
        let v = eval_laurent(&spec, c(2.0, 0.0), 1e-14).unwrap();
        assert!((v.value.re - 2.5).abs() < 1e-15);
        assert_eq!(eval_laurent(&spec, c(0.0, 0.0), 1e-14).unwrap_err(), Error::CenterPole);
    }

    #[test]
    fn laurent_cap_is_reported() {
        let stream: CoefficientFn = Arc::new(|_| c(0.0, 0.0));
        let spec = LaurentSpec::new(c(0.0, 0.0), stream, 0.5, q(0.9), 1.0, 2).unwrap();
        assert!(matches!(
            eval_laurent(&spec, c(1e4, 0.0), 1e-14),
            Err(Error::NonConvergent(_))
        ));
        let growing: CoefficientFn = Arc::new(|_| c(1.0, 0.0));
        assert!(matches!(
            LaurentSpec::with_computed_weight(c(0.0, 0.0), growing, 0.5, q(0.5), 200),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn laurent_theta_stream_matches_theta() {
        let spec = LaurentSpec::theta(q(0.5), 0.5).unwrap();
        for z in [c(1.0, 0.0), c(0.3, -2.0), c(-7.0, 1.0)] {
            let a = eval_laurent(&spec, z, 1e-15).unwrap().to_complex();
            let b = eval_theta(q(0.5), z, 1e-15).unwrap().to_complex();
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0), "{z}");
        }
    }
}
