//! Closed-form envelopes `|f(z)| <= E(|z|)` for the confluent class, the
//! `_r phi_s` specialisation, Ramanujan's function, the Laurent class with
//! weighted coefficients and the theta function.
//!
//! Every envelope is assembled in natural-log form as
//! `log_bound = ln(constant_c) + prefactor_log + exponent_term`; the linear
//! value is only reported when it fits in a double.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::{ln_pochhammer_infinite_real, pochhammer_infinite, QBase};
use crate::series::{phi_to_f, ConfluentParams, PhiParams};

/// Truncation tolerance for the infinite products inside the constants.
const PRODUCT_TOL: f64 = 1e-17;

/// Index cutoff for weighted-constant sums.
pub const WEIGHTED_CUTOFF: usize = 100_000;

/// An envelope value with its log-space breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub log_bound: f64,
    /// `exp(log_bound)`, or `None` when that overflows.
    pub bound: Option<f64>,
    pub constant_c: f64,
    pub prefactor_log: f64,
    pub exponent_term: f64,
}

impl EnvelopeResult {
    fn assemble(constant_c: f64, prefactor_log: f64, exponent_term: f64) -> Self {
        Self::assemble_ln(constant_c.ln(), constant_c, prefactor_log, exponent_term)
    }

    fn assemble_ln(ln_c: f64, constant_c: f64, prefactor_log: f64, exponent_term: f64) -> Self {
        let log_bound = ln_c + prefactor_log + exponent_term;
        let linear = log_bound.exp();
        EnvelopeResult {
            log_bound,
            bound: linear.is_finite().then_some(linear),
            constant_c,
            prefactor_log,
            exponent_term,
        }
    }
}

fn check_abs_z(abs_z: f64) -> Result<()> {
    if abs_z == 0.0 {
        return invalid("the envelope only holds for nonzero z");
    }
    if !(abs_z > 0.0 && abs_z.is_finite()) {
        return invalid(format!("|z| must be positive and finite, got {abs_z}"));
    }
    Ok(())
}

/// `ln c` with `c = (-|a_1|, ..., -|a_r|; q)_inf / (b_1, ..., b_s; q)_inf`,
/// rounded upward by the product truncation bounds.
pub fn log_constant_c(a_list: &[Complex64], b_list: &[f64], q: QBase) -> Result<f64> {
    let mut ln_c = 0.0;
    for a in a_list {
        let p = pochhammer_infinite(Complex64::new(-a.norm(), 0.0), q, PRODUCT_TOL)?;
        ln_c += p.value.re.ln() + p.tail_log_bound;
    }
    for &b in b_list {
        let (ln_p, tail) = ln_pochhammer_infinite_real(b, q, PRODUCT_TOL)?;
        ln_c += -ln_p + tail;
    }
    Ok(ln_c)
}

/// The constant `c` multiplying the majorant series of `f`.
pub fn constant_c(p: &ConfluentParams) -> Result<f64> {
    Ok(log_constant_c(&p.a_list, &p.b_list, p.q)?.exp())
}

/// `-ln (q^l; q)_inf`, rounded upward, i.e. `ln sum_k q^{kl} / (q;q)_k`.
fn ln_inverse_ql_product(l: f64, q: QBase) -> Result<f64> {
    let (ln_p, tail) = ln_pochhammer_infinite_real(q.pow(l), q, PRODUCT_TOL)?;
    Ok(-ln_p + tail)
}

/// Log of the largest majorant term: the maximum over real `k` of
/// `(q^{l(k-1)} |z|)^k`, namely
/// `ln|z| / 2 - (l/4) ln q - ln^2|z| / (4 l ln q)`, attained at
/// `k* = 1/2 - ln|z| / (2 l ln q)`.
pub fn term_peak(abs_z: f64, l: f64, q: QBase) -> Result<f64> {
    check_abs_z(abs_z)?;
    if !(l > 0.0) {
        return invalid(format!("l must be positive, got {l}"));
    }
    let lz = abs_z.ln();
    let lq = q.ln();
    Ok(0.5 * lz - 0.25 * l * lq - lz * lz / (4.0 * l * lq))
}

/// Envelope for the confluent class:
/// `|f(z)| <= c / (q^l;q)_inf * (|z|^2 q^{-l})^{1/4} exp(-ln^2|z| / (4 l ln q))`.
pub fn envelope_entire(p: &ConfluentParams, abs_z: f64) -> Result<EnvelopeResult> {
    check_abs_z(abs_z)?;
    let ln_c = log_constant_c(&p.a_list, &p.b_list, p.q)?;
    let lz = abs_z.ln();
    let lq = p.q.ln();
    let prefactor = ln_inverse_ql_product(p.l, p.q)? + 0.5 * lz - 0.25 * p.l * lq;
    let exponent = -lz * lz / (4.0 * p.l * lq);
    Ok(EnvelopeResult::assemble_ln(ln_c, ln_c.exp(), prefactor, exponent))
}

/// Envelope for `_r phi_s` obtained by pulling back [`envelope_entire`]
/// through [`phi_to_f`].
pub fn envelope_phi(p: &PhiParams, abs_z: f64) -> Result<EnvelopeResult> {
    check_abs_z(abs_z)?;
    let (params, map) = phi_to_f(p);
    envelope_entire(&params, abs_z * map.factor.abs())
}

/// The same envelope written directly in the `phi` variables:
/// `c / (b, q^{(s+1-r)/2}; q)_inf * (|z|^2 q^{3(r-s-1)/2})^{1/4}
///  * exp(ln^2(|z| q^{(r-s-1)/2}) / (2 (r-s-1) ln q))`.
pub fn envelope_phi_closed_form(p: &PhiParams, abs_z: f64) -> Result<EnvelopeResult> {
    check_abs_z(abs_z)?;
    let ln_c = log_constant_c(&p.a_list, &p.b_list, p.q)?;
    let d = p.a_list.len() as f64 - p.b_list.len() as f64 - 1.0;
    let lq = p.q.ln();
    let lz = abs_z.ln();
    let (ln_p, tail) = ln_pochhammer_infinite_real(p.q.pow(-d / 2.0), p.q, PRODUCT_TOL)?;
    let prefactor = -ln_p + tail + 0.25 * (2.0 * lz + 1.5 * d * lq);
    let shifted = lz + 0.5 * d * lq;
    let exponent = shifted * shifted / (2.0 * d * lq);
    Ok(EnvelopeResult::assemble_ln(ln_c, ln_c.exp(), prefactor, exponent))
}

/// Gaussian envelope for Ramanujan's function:
/// `|A_q(z)| <= (|z| / sqrt q)^{1/2} exp(-ln^2|z| / (4 ln q)) / (q;q)_inf`.
pub fn envelope_aq_gaussian(q: QBase, abs_z: f64) -> Result<EnvelopeResult> {
    check_abs_z(abs_z)?;
    let lz = abs_z.ln();
    let lq = q.ln();
    let (ln_p, tail) = ln_pochhammer_infinite_real(q.value(), q, PRODUCT_TOL)?;
    let prefactor = 0.5 * (lz - 0.5 * lq) - ln_p + tail;
    let exponent = -lz * lz / (4.0 * lq);
    Ok(EnvelopeResult::assemble(1.0, prefactor, exponent))
}

/// Exponential envelope for Ramanujan's function, valid at every `z`:
/// `|A_q(z)| <= exp(q |z| / (1 - q))`.
pub fn envelope_aq_exponential(q: QBase, abs_z: f64) -> Result<EnvelopeResult> {
    if !(abs_z >= 0.0 && abs_z.is_finite()) {
        return invalid(format!("|z| must be finite and non-negative, got {abs_z}"));
    }
    let qv = q.value();
    Ok(EnvelopeResult::assemble(1.0, 0.0, qv * abs_z / (1.0 - qv)))
}

/// Exponents of the Laurent-class envelope `c exp(beta |ln|z - a||^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicBoundParams {
    pub alpha: f64,
    pub q: QBase,
    pub beta: f64,
    pub gamma: f64,
    pub c_weighted: Option<f64>,
}

/// `beta = alpha / ((alpha+1)^{1+1/alpha} ln^{1/alpha}(1/q))`,
/// `gamma = (alpha+1) / alpha`.
pub fn meromorphic_bound_params(alpha: f64, q: QBase) -> Result<MeromorphicBoundParams> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    let inv_alpha = 1.0 / alpha;
    let lambda = -q.ln();
    let beta = alpha / ((alpha + 1.0).powf(1.0 + inv_alpha) * lambda.powf(inv_alpha));
    Ok(MeromorphicBoundParams {
        alpha,
        q,
        beta,
        gamma: (alpha + 1.0) * inv_alpha,
        c_weighted: None,
    })
}

/// `c_weighted * exp(beta |ln dist|^gamma)`, the envelope of a Laurent
/// series at distance `dist` from its center.
pub fn envelope_meromorphic(
    params: &MeromorphicBoundParams,
    c_weighted: f64,
    dist: f64,
) -> Result<EnvelopeResult> {
    if dist == 0.0 {
        return invalid("the envelope does not hold at the Laurent center");
    }
    if !(dist > 0.0 && dist.is_finite()) {
        return invalid(format!("distance must be positive and finite, got {dist}"));
    }
    if !(c_weighted >= 0.0 && c_weighted.is_finite()) {
        return invalid(format!("weighted constant must be finite, got {c_weighted}"));
    }
    let exponent = params.beta * dist.ln().abs().powf(params.gamma);
    Ok(EnvelopeResult::assemble(c_weighted, 0.0, exponent))
}

fn check_theta_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("theta envelope needs 0 < alpha < 1, got {alpha}"));
    }
    Ok(())
}

/// `sum_{k in Z} q^{k^2 - |k|^{1+alpha}}`, with the certified geometric tail
/// added so the result is an upper bound.
///
/// The exponent `e(k) = k^2 - k^{1+alpha}` is convex and increasing for
/// `k >= 1`, so `e(k+1) - e(k) >= e'(K)` for all `k >= K` and the terms past
/// `K` decay at least geometrically with ratio `q^{e'(K)}`.
pub fn theta_weighted_constant(alpha: f64, q: QBase, tol: f64) -> Result<f64> {
    check_theta_alpha(alpha)?;
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let lambda = -q.ln();
    let exponent = |k: f64| k * k - k.powf(1.0 + alpha);
    let mut sum = 1.0;
    for k in 1..=WEIGHTED_CUTOFF {
        let kf = k as f64;
        sum += 2.0 * (-lambda * exponent(kf)).exp();
        let slope = 2.0 * kf - (1.0 + alpha) * kf.powf(alpha);
        let rho = (-lambda * slope).exp();
        if rho < 1.0 {
            let next = (-lambda * exponent(kf + 1.0)).exp();
            let tail = 2.0 * next / (1.0 - rho);
            if tail <= tol * sum {
                return Ok(sum + tail);
            }
        }
    }
    Err(Error::NonConvergent(format!(
        "weighted theta constant needs more than {WEIGHTED_CUTOFF} indices"
    )))
}

/// Envelope `c(alpha) exp(beta |ln|z||^gamma)` for `Theta(z|q)`, the
/// instance `a_k = q^{k^2}` of the Laurent-class bound.
pub fn envelope_theta(alpha: f64, q: QBase, abs_z: f64) -> Result<EnvelopeResult> {
    check_theta_alpha(alpha)?;
    check_abs_z(abs_z)?;
    let c = theta_weighted_constant(alpha, q, PRODUCT_TOL)?;
    let params = meromorphic_bound_params(alpha, q)?;
    envelope_meromorphic(&params, c, abs_z)
}

/// The theta bound in the literal form `c(alpha) exp(ln^2|z| / ln(1/q))^{1/alpha}`.
///
/// Kept for comparison only; its exponent does not follow from the
/// coefficient-weight argument and it is never used to gate an audit.
pub fn envelope_theta_as_printed(alpha: f64, q: QBase, abs_z: f64) -> Result<EnvelopeResult> {
    check_theta_alpha(alpha)?;
    check_abs_z(abs_z)?;
    let c = theta_weighted_constant(alpha, q, PRODUCT_TOL)?;
    let lz = abs_z.ln();
    Ok(EnvelopeResult::assemble(c, 0.0, lz * lz / (-q.ln() * alpha)))
}
