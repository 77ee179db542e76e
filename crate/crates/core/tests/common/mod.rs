//! Naive direct-summation oracles. Every term is rebuilt from its
//! definition (fresh products, `powf`/`powu`), with no recurrences, no
//! rescaling and no early stopping.

#![allow(dead_code)]

use qineq::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(a;q)_n` as a fresh product.
pub fn poch(a: Complex64, q: f64, n: usize) -> Complex64 {
    (0..n).fold(c(1.0, 0.0), |acc, k| acc * (c(1.0, 0.0) - a * q.powi(k as i32)))
}

pub fn poch_real(a: f64, q: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (1.0 - a * q.powi(k as i32)))
}

/// Terms of the confluent class for `k < n`.
pub fn confluent_terms(a: &[Complex64], b: &[f64], l: f64, q: f64, z: Complex64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let num = a.iter().fold(c(1.0, 0.0), |acc, &ai| acc * poch(ai, q, k));
            let den = b.iter().fold(poch_real(q, q, k), |acc, &bj| acc * poch_real(bj, q, k));
            num / den * q.powf(l * (k * k) as f64) * z.powu(k as u32)
        })
        .collect()
}

/// Terms of `_r phi_s` for `k < n`, written with `(-q^{(k-1)/2})^{k(s+1-r)}`.
pub fn phi_terms(a: &[Complex64], b: &[f64], q: f64, z: Complex64, n: usize) -> Vec<Complex64> {
    let m = (b.len() + 1 - a.len()) as f64;
    (0..n)
        .map(|k| {
            let kf = k as f64;
            let num = a.iter().fold(c(1.0, 0.0), |acc, &ai| acc * poch(ai, q, k));
            let den = b.iter().fold(poch_real(q, q, k), |acc, &bj| acc * poch_real(bj, q, k));
            let sign = if (k as u64 * m as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
            let gauss = q.powf((kf - 1.0) / 2.0 * kf * m);
            num / den * z.powu(k as u32) * (sign * gauss)
        })
        .collect()
}

/// Terms of `A_q(z) = sum q^{k^2} (-z)^k / (q;q)_k` for `k < n`.
pub fn aq_terms(q: f64, z: Complex64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| (-z).powu(k as u32) * (q.powf((k * k) as f64) / poch_real(q, q, k)))
        .collect()
}

/// Terms of `Theta(z|q)` for `|k| <= big_k`.
pub fn theta_terms(q: f64, z: Complex64, big_k: i64) -> Vec<Complex64> {
    (-big_k..=big_k)
        .map(|k| z.powi(k as i32) * q.powf((k * k) as f64))
        .collect()
}

pub fn sum(terms: &[Complex64]) -> Complex64 {
    terms.iter().sum()
}

pub fn abs_sum(terms: &[Complex64]) -> f64 {
    terms.iter().map(|t| t.norm()).sum()
}

/// A small deterministic generator so oracle draws do not depend on the
/// library's own sampling code.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }

    pub fn disk(&mut self, radius: f64) -> Complex64 {
        Complex64::from_polar(radius * self.next_f64().sqrt(), self.uniform(0.0, std::f64::consts::TAU))
    }
}
